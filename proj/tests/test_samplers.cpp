#include "fetree/samplers.hpp"

#include "fetree/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace fetree;
using namespace fetree::testing;

namespace {

// All nine rooted spanning trees of the 3-vertex kernel with their exact
// reversed-kernel stationary masses, normalized over every root.
TreeEnsemble<Rational> all_rooted_trees(const ExactKernel& mrev) {
    TreeEnsemble<Rational> all;
    all.total = Rational(0);
    for (VertexId r = 0; r < mrev.size(); ++r) {
        const auto ens = enumerate_rooted_spanning_trees(mrev, r);
        all.trees.insert(all.trees.end(), ens.trees.begin(), ens.trees.end());
        all.weights.insert(all.weights.end(), ens.weights.begin(), ens.weights.end());
        all.total += ens.total;
    }
    return all;
}

}  // namespace

TEST_CASE("covering walk basics") {
    RandomSource rng(11);

    const ExactKernel loop({"1"}, {{Rational(1)}});
    const auto solo = walk_until_cover(loop, 0, rng);
    CHECK(solo.vertices == std::vector<VertexId>{0});
    CHECK(solo.steps() == 0);

    const auto pair = walk_until_cover(two_cycle_kernel(), 0, rng);
    CHECK(pair.vertices == std::vector<VertexId>{0, 1});

    CHECK_THROWS_AS(walk_until_cover(two_cycle_kernel(), 5, rng), sampler_error);
    CHECK_THROWS_AS(walk_until_cover(three_vertex_kernel(), 0, rng, 0), sampler_error);
}

TEST_CASE("covering walk ends at the last first visit") {
    RandomSource rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        const auto k = random_exact_kernel(rng, n);
        const auto p = walk_until_cover(k, static_cast<VertexId>(rng.next_below(static_cast<uint64_t>(n))), rng);
        REQUIRE(covers(p, n));
        CHECK(cover_index(p, n) == p.steps());
        CHECK(std::count(p.vertices.begin(), p.vertices.end(), p.back()) == 1);
    }
}

TEST_CASE("fixed-root sampling on the forced two-cycle") {
    RandomSource rng(13);
    for (int i = 0; i < 20; ++i) {
        const auto t = sample_fet(two_cycle_kernel(), 0, rng);
        CHECK(t == RootedTree{0, {-1, 0}});
    }
}

TEST_CASE("sampled trees are spanning, correctly rooted, and supported") {
    RandomSource rng(14);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        const auto m = random_exact_kernel(rng, n);
        const auto r = static_cast<VertexId>(rng.next_below(static_cast<uint64_t>(n)));
        const auto t = sample_fet(m, r, rng);
        REQUIRE(is_valid_tree(t));
        REQUIRE(t.spanning());
        CHECK(t.root == r);
        CHECK(t.edge_count() == n - 1);
        // A first-entrance edge parent -> child is a step of the walk.
        for (const auto& [child, parent] : t.edges()) CHECK(m.supports(parent, child));

        const auto w = wilson_sample(m, r, rng);
        REQUIRE(is_valid_tree(w));
        REQUIRE(w.spanning());
        CHECK(w.root == r);
        // A loop-erased edge child -> parent is a step of the walk.
        for (const auto& [child, parent] : w.edges()) CHECK(m.supports(child, parent));
    }
}

TEST_CASE("fixed-root frequencies match the reversed-kernel tree weights") {
    const auto m = three_vertex_kernel();
    const auto mrev = reversed_kernel(m);
    const auto exact = enumerate_rooted_spanning_trees(mrev, 0);

    const auto batch = run_batch(42, 200'000, [&](RandomSource& rng) { return sample_fet(m, 0, rng); }, 4);
    CHECK(batch.total == 200'000);
    CHECK(tv_distance(batch, exact) < 0.01);

    const auto gof = chi_square_goodness(batch, exact);
    CHECK(gof.p_value > 0.001);

    // The un-reversed weights give a genuinely different distribution.
    const auto wrong = enumerate_rooted_spanning_trees(m, 0);
    CHECK(tv_distance(exact, wrong) == Catch::Approx(0.268).margin(0.001));
    CHECK(tv_distance(batch, wrong) > 0.2);
}

TEST_CASE("wilson sampling with the reversed kernel matches the cover walk") {
    const auto m = three_vertex_kernel();
    const auto mrev = reversed_kernel(m);
    const auto exact = enumerate_rooted_spanning_trees(mrev, 0);

    const auto wilson = run_batch(43, 200'000, [&](RandomSource& rng) { return wilson_sample(mrev, 0, rng); }, 4);
    CHECK(tv_distance(wilson, exact) < 0.01);

    const auto ab = run_batch(42, 200'000, [&](RandomSource& rng) { return sample_fet(m, 0, rng); }, 4);
    CHECK(tv_distance(wilson, ab) < 0.015);

    // Wilson driven by the raw kernel lands on the raw tree weights instead.
    const auto raw = run_batch(44, 100'000, [&](RandomSource& rng) { return wilson_sample(m, 0, rng); }, 4);
    CHECK(tv_distance(raw, enumerate_rooted_spanning_trees(m, 0)) < 0.01);
    CHECK(tv_distance(raw, exact) > 0.2);
}

TEST_CASE("wilson on tree support returns the unique spanning tree") {
    const auto k = seven_vertex_kernel();
    RandomSource rng(15);
    for (int i = 0; i < 10; ++i) CHECK(wilson_sample(k, 0, rng) == RootedTree{0, {-1, 0, 5, 0, 3, 4, 4}});
}

TEST_CASE("stationary-mode sampling matches the stationary root marginal") {
    const auto m = three_vertex_kernel();
    const auto rho = stationary_distribution(m);
    const auto batch =
        run_batch(45, 100'000, [&](RandomSource& rng) { return sample_fet_stationary(m, rho, rng); }, 4);
    CHECK(tv_distance(root_frequencies(batch, 3), to_doubles(rho)) < 0.01);
}

TEST_CASE("tree chain step") {
    RandomSource rng(16);
    const auto flipped = tree_chain_step(RootedTree{0, {-1, 0}}, two_cycle_kernel(), rng);
    CHECK(flipped == RootedTree{1, {1, -1}});

    // Surgery keeps the state a spanning tree, on kernels with self-loops too.
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        const auto mrev = reversed_kernel(random_exact_kernel(rng, n));
        RootedTree state = wilson_sample(mrev, 0, rng);
        for (int i = 0; i < 5'000; ++i) {
            state = tree_chain_step(state, mrev, rng);
            REQUIRE(is_valid_tree(state));
            REQUIRE(state.spanning());
        }
    }

    CHECK_THROWS_AS(tree_chain_step(RootedTree{0, {-1, 0, -1}}, three_vertex_kernel(), rng), sampler_error);
}

TEST_CASE("tree chain occupation frequencies reach the tree-weight law") {
    const auto m = three_vertex_kernel();
    const auto mrev = reversed_kernel(m);
    const auto exact = all_rooted_trees(mrev);

    RandomSource rng(17);
    SampleBatch occupation;
    RootedTree state{0, {-1, 0, 0}};
    for (long long i = 0; i < 1'000'000; ++i) {
        state = tree_chain_step(state, mrev, rng);
        occupation.add(state);
    }
    CHECK(occupation.counts.size() == 9);  // visits every rooted spanning tree
    CHECK(tv_distance(occupation, exact) < 0.02);
}

TEST_CASE("tree chain stationarity is exact") {
    const auto k3 = verify_tree_chain_stationarity(three_vertex_kernel());
    CHECK(k3.states == 9);
    CHECK(k3.rows_stochastic);
    CHECK(k3.balanced);
    CHECK(k3.pass());
    CHECK(k3.max_balance_error == 0.0);

    // Reversible kernel: simple random walk on the 4-cycle. Four spanning
    // shapes (drop one edge), each rooted four ways.
    std::vector<std::vector<Rational>> rows(4, std::vector<Rational>(4, Rational(0)));
    for (VertexId v = 0; v < 4; ++v) {
        rows[static_cast<size_t>(v)][static_cast<size_t>((v + 1) % 4)] = make_rational(1, 2);
        rows[static_cast<size_t>(v)][static_cast<size_t>((v + 3) % 4)] = make_rational(1, 2);
    }
    const auto rev = verify_tree_chain_stationarity(ExactKernel({"a", "b", "c", "d"}, rows));
    CHECK(rev.states == 16);
    CHECK(rev.pass());

    const auto tiny = verify_tree_chain_stationarity(two_cycle_kernel());
    CHECK(tiny.states == 2);
    CHECK(tiny.pass());

    RandomSource rng(18);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = random_exact_kernel(rng, 2 + static_cast<int>(rng.next_below(4)));
        CHECK(verify_tree_chain_stationarity(m).pass());
    }
}

TEST_CASE("batch runs are deterministic and worker-count invariant") {
    const auto m = three_vertex_kernel();
    const auto sample = [&](RandomSource& rng) { return sample_fet(m, 0, rng); };

    const auto serial = run_batch(99, 2'000, sample, 1);
    const auto parallel = run_batch(99, 2'000, sample, 3);
    CHECK(serial.counts == parallel.counts);
    CHECK(serial.total == 2'000);

    const auto other_seed = run_batch(100, 2'000, sample, 3);
    CHECK(other_seed.counts != serial.counts);

    // Failures inside workers surface as exceptions.
    const auto broken = [&](RandomSource& rng) { return sample_fet(m, 0, rng, 0); };
    CHECK_THROWS_AS(run_batch(1, 10, broken, 2), sampler_error);
    CHECK_THROWS_AS(run_batch(1, -1, sample, 2), sampler_error);
}
