#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "convlens/ordering.hpp"
#include "convlens/random.hpp"

using namespace convlens;

namespace {

ConfusionMatrix make(const std::vector<std::vector<std::uint64_t>>& cells) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < cells.size(); ++i) labels.push_back(std::to_string(i));
    return ConfusionMatrix(labels, cells);
}

const ConfusionMatrix tri = make({{0, 5, 1}, {5, 0, 0}, {9, 0, 0}});

ConfusionMatrix random_matrix(std::size_t k, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::vector<std::uint64_t>> cells(k, std::vector<std::uint64_t>(k));
    for (auto& row : cells)
        for (auto& v : row) v = rng.next_below(21);
    cells[0][0] += 1;
    return make(cells);
}

} // namespace

TEST_CASE("objective on simple matrices") {
    CHECK(objective_value(make({{3, 0}, {0, 4}}), identity_permutation(2)) == 0);
    CHECK(objective_value(make({{0, 3}, {7, 0}}), identity_permutation(2)) == 10);
    CHECK(objective_value(tri, identity_permutation(3)) == 30);
    // display order (1, 0, 2): class 1, then 0, then 2
    CHECK(objective_value(tri, {1, 0, 2}) == 20);
    CHECK_THROWS_AS(objective_value(tri, {0, 1}), std::invalid_argument);
}

TEST_CASE("brute force finds the arrangement optimum") {
    const OrderingResult diag = brute_force_order(make({{3, 0}, {0, 4}}));
    CHECK(diag.objective == 0);
    CHECK(diag.permutation == identity_permutation(2));

    const OrderingResult best = brute_force_order(tri);
    CHECK(best.objective == 20);
    CHECK(best.permutation == Permutation{1, 0, 2});
    CHECK(best.initial_objective == 30);
}

TEST_CASE("lexicographic tie-break on symmetric matrices") {
    // symmetric: reversing any optimal order is co-optimal
    const ConfusionMatrix sym = make({{0, 9, 1}, {9, 0, 1}, {1, 1, 0}});
    const OrderingResult r = brute_force_order(sym);
    Permutation reversed(r.permutation.rbegin(), r.permutation.rend());
    CHECK(objective_value(sym, reversed) == r.objective);
    CHECK(r.permutation < reversed); // the smaller of the pair was returned
}

TEST_CASE("brute force guard") {
    CHECK_THROWS_AS(brute_force_order(random_matrix(11, 1)), std::invalid_argument);
}

TEST_CASE("annealing matches brute force on the 3x3 example") {
    AnnealSchedule s;
    s.steps = 10000;
    s.restarts = 3;
    s.seed = 1;
    const OrderingResult r = anneal_order(tri, s);
    CHECK(r.objective == 20);
    CHECK(objective_value(tri, r.permutation) == 20);
}

TEST_CASE("annealing leaves a diagonal matrix at zero") {
    AnnealSchedule s;
    s.steps = 500;
    const OrderingResult r = anneal_order(make({{3, 0}, {0, 4}}), s);
    CHECK(r.objective == 0);
}

TEST_CASE("annealing output invariants") {
    AnnealSchedule s;
    s.steps = 5000;
    s.seed = 42;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ConfusionMatrix c = random_matrix(7, seed);
        const OrderingResult r = anneal_order(c, s);
        CHECK(is_valid_permutation(r.permutation));
        CHECK(r.objective == objective_value(c, r.permutation));
        CHECK(r.objective <= r.initial_objective);
    }
}

TEST_CASE("annealing is reproducible") {
    const ConfusionMatrix c = random_matrix(8, 5);
    AnnealSchedule s;
    s.steps = 20000;
    s.seed = 7;
    const OrderingResult a = anneal_order(c, s);
    const OrderingResult b = anneal_order(c, s);
    CHECK(a.permutation == b.permutation);
    CHECK(a.objective == b.objective);
}

TEST_CASE("row-permuting the input does not change the brute-force optimum") {
    const ConfusionMatrix c = random_matrix(6, 11);
    const ConfusionMatrix p = c.permuted({5, 3, 0, 1, 4, 2});
    CHECK(brute_force_order(c).objective == brute_force_order(p).objective);
}

TEST_CASE("reversal invariance for symmetric matrices") {
    SplitMix64 rng(3);
    std::vector<std::vector<std::uint64_t>> cells(5, std::vector<std::uint64_t>(5, 0));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i; j < 5; ++j) cells[i][j] = cells[j][i] = rng.next_below(10) + 1;
    const ConfusionMatrix sym = make(cells);
    const Permutation perm{2, 0, 4, 1, 3};
    const Permutation rev(perm.rbegin(), perm.rend());
    CHECK(objective_value(sym, perm) == objective_value(sym, rev));
}

TEST_CASE("schedule validation") {
    AnnealSchedule s;
    s.cooling = 1.5;
    CHECK_THROWS_AS(anneal_order(tri, s), std::invalid_argument);
    s.cooling = 0.0;
    s.restarts = 0;
    CHECK_THROWS_AS(anneal_order(tri, s), std::invalid_argument);
}

TEST_CASE("current-score metropolis also reaches the small optimum") {
    AnnealSchedule s;
    s.steps = 10000;
    s.seed = 2;
    s.current_score_metropolis = true;
    CHECK(anneal_order(tri, s).objective == 20);
}
