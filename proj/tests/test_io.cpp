#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "convlens/io.hpp"

using namespace convlens;

TEST_CASE("confusion CSV with a label header") {
    std::istringstream in("cat,dog\n5,1\n2,9\n");
    const ConfusionMatrix c = read_confusion_csv(in);
    CHECK(c.labels() == std::vector<std::string>{"cat", "dog"});
    CHECK(c.at(0, 1) == 1);
    CHECK(c.at(1, 0) == 2);
}

TEST_CASE("confusion CSV without a header uses index labels") {
    std::istringstream in("5,1\n2,9\n");
    const ConfusionMatrix c = read_confusion_csv(in);
    CHECK(c.labels() == std::vector<std::string>{"0", "1"});
}

TEST_CASE("confusion CSV round trip") {
    const ConfusionMatrix c({"a", "b", "c"}, {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    std::stringstream buf;
    write_confusion_csv(buf, c);
    const ConfusionMatrix back = read_confusion_csv(buf);
    CHECK(back.labels() == c.labels());
    CHECK(back.cells() == c.cells());
}

TEST_CASE("bad CSV input") {
    std::istringstream empty("");
    CHECK_THROWS_AS(read_confusion_csv(empty), std::invalid_argument);
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(read_confusion_csv(ragged), std::invalid_argument);
    std::istringstream junk("1,2\n3,x\n");
    CHECK_THROWS_AS(read_confusion_csv(junk), std::invalid_argument);
}

TEST_CASE("JSON round trips") {
    const ConfusionMatrix c({"a", "b"}, {{3, 1}, {0, 6}});
    const ConfusionMatrix back = confusion_from_json(to_json(c));
    CHECK(back.labels() == c.labels());
    CHECK(back.cells() == c.cells());

    OrderingResult r;
    r.permutation = {1, 0};
    r.objective = 4;
    r.initial_objective = 9;
    const json jr = to_json(r);
    CHECK(order_from_json(jr) == r.permutation);
    CHECK(jr.at("objective") == 4);

    const Clustering cl{{{"a", "b"}, {"c"}}};
    CHECK(clustering_from_json(to_json(cl)).groups == cl.groups);
}

TEST_CASE("tensor container validation") {
    const json good = json::array({{{"name", "w"}, {"shape", {2, 2}}, {"values", {1, 2, 3, 4}}}});
    const auto tensors = read_tensors(good);
    REQUIRE(tensors.size() == 1);
    CHECK(tensors[0].element_count() == 4);
    const FilterTensor f = as_filter(tensors[0]);
    CHECK(f.width == 2);
    CHECK(f.depth == 1);

    const json bad = json::array({{{"name", "w"}, {"shape", {2, 2}}, {"values", {1, 2, 3}}}});
    CHECK_THROWS_AS(read_tensors(bad), std::invalid_argument);
    const json scalar = json::array({{{"name", "w"}, {"shape", json::array()},
                                     {"values", json::array()}}});
    CHECK_THROWS_AS(read_tensors(scalar), std::invalid_argument);

    // round trip
    const json again = to_json(tensors);
    CHECK(again == good);
}

TEST_CASE("prediction CSV round trip") {
    PredictionSet p{{{0.25, 0.75}, {0.5, 0.5}}};
    std::stringstream buf;
    write_prediction_csv(buf, p);
    const PredictionSet back = read_prediction_csv(buf);
    REQUIRE(back.samples() == 2);
    CHECK(back.rows[0][1] == doctest::Approx(0.75));

    std::istringstream bad("0.9,0.5\n");
    CHECK_THROWS_AS(read_prediction_csv(bad), std::invalid_argument);
}

TEST_CASE("4-d tensors are not filters") {
    NamedTensor t{"w", {2, 2, 2, 2}, std::vector<double>(16, 0.0)};
    CHECK_THROWS_AS(as_filter(t), std::invalid_argument);
}
