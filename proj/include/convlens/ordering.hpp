#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "confmat.hpp"
#include "random.hpp"

namespace convlens {

/// order[p] is the original class displayed at position p.
using Permutation = std::vector<std::size_t>;

inline bool is_valid_permutation(const Permutation& perm) {
    Permutation sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != i) return false;
    return true;
}

inline Permutation identity_permutation(std::size_t k) {
    Permutation p(k);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

/// Distance-weighted confusion mass: sum over display positions of
/// C[order[i]][order[j]] * |i - j|.
inline std::uint64_t objective_value(const ConfusionMatrix& c, const Permutation& perm) {
    const std::size_t k = c.size();
    if (perm.size() != k)
        throw std::invalid_argument("permutation length does not match matrix size");
    std::uint64_t f = 0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const std::uint64_t d = i > j ? i - j : j - i;
            f += c.at(perm[i], perm[j]) * d;
        }
    return f;
}

struct AnnealSchedule {
    std::size_t steps = 0;       // 0 means "use default": 50000 * K
    double t0 = 0.0;             // <= 0 means default: max(1, f0 / (10 K))
    double cooling = 0.0;        // <= 0 means default: 0.001^(1/steps)
    std::size_t restarts = 3;
    std::uint64_t seed = 0;
    bool current_score_metropolis = false; // standard Metropolis instead of
                                           // comparing against the best score

    void validate() const {
        if (steps != 0 && steps < 1) throw std::invalid_argument("steps must be >= 1");
        if (cooling != 0.0 && (cooling <= 0.0 || cooling >= 1.0))
            throw std::invalid_argument("cooling must be in (0, 1)");
        if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    }
};

struct OrderingResult {
    Permutation permutation;
    std::uint64_t objective = 0;
    std::uint64_t initial_objective = 0;
    std::optional<std::vector<std::uint64_t>> trace; // best objective per sample point
};

/// Exhaustive minimum of the arrangement objective. Guarded to K <= 10.
/// Ties are broken by the lexicographically smallest order.
inline OrderingResult brute_force_order(const ConfusionMatrix& c) {
    const std::size_t k = c.size();
    if (k > 10) throw std::invalid_argument("brute force limited to K <= 10");
    Permutation perm = identity_permutation(k);
    OrderingResult res;
    res.initial_objective = objective_value(c, perm);
    res.permutation = perm;
    res.objective = res.initial_objective;
    // std::next_permutation enumerates in lexicographic order, so the first
    // permutation reaching the minimum is the lexicographically smallest.
    do {
        const std::uint64_t f = objective_value(c, perm);
        if (f < res.objective) {
            res.objective = f;
            res.permutation = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return res;
}

namespace detail {

// Move display rows [s..e] so the block starts at slot `ins` among the
// remaining rows. Columns follow rows implicitly since only the order vector
// is rearranged.
inline void move_block(Permutation& order, std::size_t s, std::size_t e, std::size_t ins) {
    Permutation block(order.begin() + static_cast<std::ptrdiff_t>(s),
                      order.begin() + static_cast<std::ptrdiff_t>(e) + 1);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(s),
                order.begin() + static_cast<std::ptrdiff_t>(e) + 1);
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(ins), block.begin(), block.end());
}

struct ChainResult {
    Permutation order;
    std::uint64_t objective;
    std::vector<std::uint64_t> trace;
};

// One simulated-annealing chain. Draw order per step: move kind, move
// indices, acceptance u.
inline ChainResult anneal_chain(const ConfusionMatrix& c, std::size_t steps, double t,
                                double cooling, bool current_score, std::uint64_t seed,
                                bool record_trace) {
    const std::size_t k = c.size();
    SplitMix64 rng(seed);

    Permutation current = identity_permutation(k);
    std::uint64_t f_current = objective_value(c, current);
    Permutation best = current;
    std::uint64_t f_best = f_current;

    ChainResult res;
    const std::size_t trace_stride = record_trace ? std::max<std::size_t>(1, steps / 256) : 0;

    for (std::size_t step = 0; step < steps; ++step) {
        Permutation candidate = current;
        if (rng.next_unit() < 0.5) {
            // Swap two display rows.
            const std::size_t i = rng.next_below(k);
            const std::size_t j = rng.next_below(k);
            std::swap(candidate[i], candidate[j]);
        } else {
            // Move a block.
            const std::size_t s = rng.next_below(k);
            const std::size_t e = rng.next_range(s, k - 1);
            const std::size_t ins = rng.next_below(k - (e - s));
            move_block(candidate, s, e, ins);
        }
        const std::uint64_t f_cand = objective_value(c, candidate);
        // Scores are negated objectives: the search minimizes f.
        const double s_cand = -static_cast<double>(f_cand);
        const double s_ref = -static_cast<double>(current_score ? f_current : f_best);
        const double u = rng.next_unit();
        if (u < std::exp((s_cand - s_ref) / t)) {
            current = std::move(candidate);
            f_current = f_cand;
            if (f_cand < f_best) {
                f_best = f_cand;
                best = current;
            }
        }
        t *= cooling;
        if (record_trace && step % trace_stride == 0) res.trace.push_back(f_best);
    }
    res.order = std::move(best);
    res.objective = f_best;
    return res;
}

} // namespace detail

/// Simulated annealing over class permutations with restarts. Deterministic
/// for a fixed (matrix, schedule): chain i is seeded with seed XOR i and the
/// best chain wins, ties broken by lowest chain index.
inline OrderingResult anneal_order(const ConfusionMatrix& c, AnnealSchedule schedule = {},
                                   bool record_trace = false) {
    schedule.validate();
    const std::size_t k = c.size();
    const std::uint64_t f0 = objective_value(c, identity_permutation(k));

    const std::size_t steps = schedule.steps ? schedule.steps : 50000 * k;
    const double t0 = schedule.t0 > 0.0
                          ? schedule.t0
                          : std::max(1.0, static_cast<double>(f0) / (10.0 * static_cast<double>(k)));
    const double cooling =
        schedule.cooling > 0.0 ? schedule.cooling
                               : std::pow(1e-3, 1.0 / static_cast<double>(steps));

    OrderingResult res;
    res.initial_objective = f0;
    bool first = true;
    for (std::size_t chain = 0; chain < schedule.restarts; ++chain) {
        detail::ChainResult cr =
            detail::anneal_chain(c, steps, t0, cooling, schedule.current_score_metropolis,
                                 schedule.seed ^ static_cast<std::uint64_t>(chain),
                                 record_trace && first);
        if (first || cr.objective < res.objective) {
            res.permutation = std::move(cr.order);
            res.objective = cr.objective;
            if (first && record_trace) res.trace = std::move(cr.trace);
        }
        first = false;
    }
    return res;
}

} // namespace convlens
