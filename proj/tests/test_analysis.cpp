#include <catch2/catch_amalgamated.hpp>

#include "fetree/analysis.hpp"
#include "support.hpp"

using namespace fetree;

namespace {

const auto r = [](long p, long q) { return make_rational(p, q); };

ExactKernel complete_graph_kernel(int n) {
    std::vector<std::vector<Rational>> rows(static_cast<size_t>(n), std::vector<Rational>(static_cast<size_t>(n)));
    std::vector<std::string> labels;
    for (int a = 0; a < n; ++a) {
        labels.push_back(std::to_string(a + 1));
        for (int b = 0; b < n; ++b)
            if (a != b) rows[a][b] = make_rational(1, n - 1);
    }
    return ExactKernel(std::move(labels), std::move(rows));
}

}  // namespace

TEST_CASE("stationary distribution of the three-vertex kernel") {
    const auto rho = stationary_distribution(testing::three_vertex_kernel());
    CHECK(rho[0] == r(33, 226));
    CHECK(rho[1] == r(95, 226));
    CHECK(rho[2] == r(98, 226));
}

TEST_CASE("stationary distribution trivia") {
    const auto rho2 = stationary_distribution(testing::two_cycle_kernel());
    CHECK(rho2[0] == r(1, 2));
    CHECK(rho2[1] == r(1, 2));

    const auto rho4 = stationary_distribution(complete_graph_kernel(4));
    for (int v = 0; v < 4; ++v) CHECK(rho4[v] == r(1, 4));
}

TEST_CASE("reversed kernel matches the closed form") {
    const auto mrev = reversed_kernel(testing::three_vertex_kernel());
    CHECK(mrev.at(0, 0) == Rational(0));
    CHECK(mrev.at(0, 1) == r(19, 33));
    CHECK(mrev.at(0, 2) == r(14, 33));
    CHECK(mrev.at(1, 0) == r(11, 95));
    CHECK(mrev.at(1, 2) == r(84, 95));
    CHECK(mrev.at(2, 0) == r(11, 49));
    CHECK(mrev.at(2, 1) == r(38, 49));
}

TEST_CASE("reversal is an involution and preserves the stationary law") {
    RandomSource rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        const auto m = testing::random_exact_kernel(rng, n);
        const auto mrev = reversed_kernel(m);
        const auto back = reversed_kernel(mrev);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) CHECK(back.at(a, b) == m.at(a, b));
        const auto rho = stationary_distribution(m);
        const auto rho_rev = stationary_distribution(mrev);
        for (int v = 0; v < n; ++v) CHECK(rho[v] == rho_rev[v]);
    }
}

TEST_CASE("reversibility detection") {
    CHECK_FALSE(is_reversible(testing::three_vertex_kernel()));
    CHECK(is_reversible(testing::two_cycle_kernel()));
    CHECK(is_reversible(complete_graph_kernel(5)));

    // Row-uniform over neighbors of a path graph: reversible, not symmetric.
    const ExactKernel path_walk({"a", "b", "c"},
                                {{Rational(0), Rational(1), Rational(0)},
                                 {r(1, 2), Rational(0), r(1, 2)},
                                 {Rational(0), Rational(1), Rational(0)}});
    CHECK(is_reversible(path_walk));
    const auto rev = reversed_kernel(path_walk);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(rev.at(a, b) == path_walk.at(a, b));
}

TEST_CASE("principal minors of the three-vertex kernel") {
    const auto m = testing::three_vertex_kernel();
    CHECK(principal_minor_det(m, 0) == r(11, 35));
    CHECK(principal_minor_det(m, 1) == r(19, 21));
    CHECK(principal_minor_det(m, 2) == r(14, 15));
    // Their normalization reproduces the stationary distribution.
    const Rational total = r(11, 35) + r(19, 21) + r(14, 15);
    CHECK(r(11, 35) / total == r(33, 226));
}

TEST_CASE("principal minor trivia and float mode") {
    CHECK(principal_minor_det(testing::two_cycle_kernel(), 0) == Rational(1));
    const auto f = to_float(testing::three_vertex_kernel());
    CHECK(principal_minor_det(f, 0) == Catch::Approx(11.0 / 35.0).epsilon(1e-12));
    const auto rho_f = stationary_distribution(f);
    CHECK(rho_f[1] == Catch::Approx(95.0 / 226.0).epsilon(1e-12));
    CHECK_FALSE(is_reversible(f));
}

TEST_CASE("normalized minors equal the stationary distribution") {
    RandomSource rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        const auto m = testing::random_exact_kernel(rng, n);
        const auto rho = stationary_distribution(m);
        std::vector<Rational> minors;
        Rational total(0);
        for (int w = 0; w < n; ++w) {
            minors.push_back(principal_minor_det(m, w));
            CHECK(minors.back() > Rational(0));
            total += minors.back();
        }
        for (int w = 0; w < n; ++w) CHECK(minors[static_cast<size_t>(w)] / total == rho[w]);
        // The minor is invariant under reversal.
        const auto mrev = reversed_kernel(m);
        for (int w = 0; w < n; ++w)
            CHECK(principal_minor_det(mrev, w) == minors[static_cast<size_t>(w)]);
    }
}

TEST_CASE("spanning tree enumeration on small supports") {
    const auto m = testing::three_vertex_kernel();
    const auto ens = enumerate_rooted_spanning_trees(m, 0);
    REQUIRE(ens.trees.size() == 3);
    for (const auto& t : ens.trees) {
        CHECK(t.root == 0);
        CHECK(t.spanning());
        CHECK(is_valid_tree(t));
    }
    CHECK(ens.total == r(11, 35));

    const ExactKernel path_walk({"a", "b", "c"},
                                {{Rational(0), Rational(1), Rational(0)},
                                 {r(1, 2), Rational(0), r(1, 2)},
                                 {Rational(0), Rational(1), Rational(0)}});
    CHECK(enumerate_rooted_spanning_trees(path_walk, 0).trees.size() == 1);

    for (int root = 0; root < 4; ++root)
        CHECK(enumerate_rooted_spanning_trees(complete_graph_kernel(4), root).trees.size() == 16);

    const auto big = complete_graph_kernel(9);
    CHECK_THROWS_AS(enumerate_rooted_spanning_trees(big, 0), analysis_error);
}

TEST_CASE("tree weights under both kernels") {
    const auto m = testing::three_vertex_kernel();
    const auto mrev = reversed_kernel(m);
    const RootedTree star{0, {-1, 0, 0}};  // {2->1, 3->1}
    CHECK(tree_weight(star, m) == r(1, 35));
    CHECK(tree_weight(star, mrev) == r(121, 4655));
    const RootedTree chain{0, {-1, 0, 1}};  // {3->2, 2->1}
    CHECK(tree_weight(chain, m) == r(6, 35));
    CHECK(tree_weight(chain, mrev) == r(418, 4655));
    const RootedTree other{0, {-1, 2, 0}};  // {2->3, 3->1}
    CHECK(tree_weight(other, m) == r(4, 35));
    CHECK(tree_weight(other, mrev) == r(924, 4655));
    CHECK(tree_weight(single_vertex_tree(2, 3), m) == Rational(1));

    const RootedTree bad{0, {-1, 1, 0}};  // self-edge 2->2 is absent
    CHECK_THROWS_AS(tree_weight(bad, m), analysis_error);
}

TEST_CASE("matrix tree identity on the three-vertex kernel") {
    const auto rep = matrix_tree_check(testing::three_vertex_kernel(), 0);
    CHECK(rep.det_m == r(11, 35));
    CHECK(rep.det_mrev == r(11, 35));
    CHECK(rep.tree_sum_m == r(11, 35));
    CHECK(rep.tree_sum_mrev == r(11, 35));
    CHECK(rep.pass);
}

TEST_CASE("matrix tree identity on random kernels") {
    RandomSource rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        const auto m = testing::random_exact_kernel(rng, n);
        for (int root = 0; root < n; ++root) {
            const auto rep = matrix_tree_check(m, root);
            CHECK(rep.pass);
            CHECK(rep.det_m == rep.tree_sum_m);
            CHECK(rep.det_m == rep.det_mrev);
        }
    }
}
