#include "fetree/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace fetree;
using namespace fetree::testing;

TEST_CASE("total variation distance") {
    CHECK(tv_distance(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}) == 0.0);
    CHECK(tv_distance(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}) == 1.0);
    CHECK(tv_distance(std::vector<double>{0.6, 0.4}, std::vector<double>{0.4, 0.6}) ==
          Catch::Approx(0.2));
    CHECK_THROWS_AS(tv_distance(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), stats_error);

    // Map form handles disjoint supports.
    std::map<RootedTree, double> p{{RootedTree{0, {-1, 0}}, 1.0}};
    std::map<RootedTree, double> q{{RootedTree{1, {1, -1}}, 1.0}};
    CHECK(tv_distance(p, q) == 1.0);
    CHECK(tv_distance(p, p) == 0.0);
}

TEST_CASE("batch and ensemble conversions") {
    const auto mrev = reversed_kernel(three_vertex_kernel());
    const auto exact = enumerate_rooted_spanning_trees(mrev, 0);
    const auto probs = tree_probabilities(exact);
    REQUIRE(probs.size() == 3);
    double total = 0.0;
    for (const auto& [t, pr] : probs) total += pr;
    CHECK(total == Catch::Approx(1.0));

    SampleBatch b;
    b.add(exact.trees[0]);
    b.add(exact.trees[0]);
    b.add(exact.trees[1]);
    b.add(exact.trees[2]);
    const auto freq = tree_frequencies(b);
    CHECK(freq.at(exact.trees[0]) == 0.5);
    CHECK(tv_distance(b, exact) > 0.0);

    const auto roots = root_frequencies(b, 3);
    CHECK(roots[0] == 1.0);  // every enumerated tree is rooted at 0
    CHECK(roots[1] == 0.0);

    CHECK_THROWS_AS(tree_frequencies(SampleBatch{}), stats_error);
}

TEST_CASE("chi-square goodness of fit") {
    // Fair observations on a fair die: high p-value.
    const auto fair =
        chi_square_goodness({98, 105, 97, 102, 99, 99}, {100, 100, 100, 100, 100, 100});
    CHECK(fair.dof == 5);
    CHECK(fair.cells == 6);
    CHECK(fair.merged_cells == 0);
    CHECK(fair.p_value > 0.9);

    // Grossly biased observations: vanishing p-value.
    const auto biased =
        chi_square_goodness({300, 20, 30, 50, 100, 100}, {100, 100, 100, 100, 100, 100});
    CHECK(biased.p_value < 1e-10);

    // Known value: statistic 3.844 on 1 dof sits at p close to 0.05.
    const auto edge = chi_square_goodness({531, 469}, {500.0, 500.0});
    CHECK(edge.statistic == Catch::Approx(3.844));
    CHECK(edge.p_value == Catch::Approx(0.0499).margin(0.001));

    // Undersized cells accumulate into the next cell until the threshold.
    const auto merged = chi_square_goodness({2, 5, 101, 99}, {3.0, 4.0, 100.0, 100.0});
    CHECK(merged.cells == 3);
    CHECK(merged.merged_cells == 1);
    CHECK(merged.dof == 2);

    const auto swallowed = chi_square_goodness({1, 0, 101, 99}, {0.5, 1.0, 100.0, 100.0});
    CHECK(swallowed.cells == 2);
    CHECK(swallowed.merged_cells == 2);
    CHECK(swallowed.dof == 1);

    // A trailing undersized remainder folds into the last cell.
    const auto folded = chi_square_goodness({100, 2}, {100.0, 1.0});
    CHECK(folded.cells == 1);
    CHECK(folded.dof == 1);

    CHECK_THROWS_AS(chi_square_goodness({1}, {0.5}), stats_error);
    CHECK_THROWS_AS(chi_square_goodness({1, 1}, {1.0}), stats_error);
    CHECK_THROWS_AS(chi_square_goodness({1, 1}, {-1.0, 5.0}), stats_error);
    CHECK_THROWS_AS(chi_square_goodness({}, {}), stats_error);
}
