// Shared fixtures and generators for the test suite.
#pragma once

#include "fetree/kernel.hpp"
#include "fetree/path.hpp"
#include "fetree/random.hpp"
#include "fetree/scalar.hpp"

#include <string>
#include <vector>

namespace fetree::testing {

// 3-vertex kernel with rows (0,1/3,2/3), (1/5,0,4/5), (1/7,6/7,0). Its
// stationary distribution and reversal are known in closed form, which makes
// it the main exact fixture throughout the suite.
inline ExactKernel three_vertex_kernel() {
    const auto r = [](long p, long q) { return make_rational(p, q); };
    return ExactKernel({"1", "2", "3"},
                       {{r(0, 1), r(1, 3), r(2, 3)},
                        {r(1, 5), r(0, 1), r(4, 5)},
                        {r(1, 7), r(6, 7), r(0, 1)}});
}

inline std::string three_vertex_kernel_json() {
    return R"({"labels":["1","2","3"],"rows":[["0","1/3","2/3"],["1/5","0","4/5"],["1/7","6/7","0"]]})";
}

// Uniform random walk on the 7-vertex graph with edges 1-2, 1-4, 4-5, 5-6,
// 5-7, 6-3 (labels; 0-indexed: 0-1, 0-3, 3-4, 4-5, 4-6, 5-2). Reversible,
// stationary distribution proportional to the degrees (2,1,1,2,3,2,1)/12.
inline ExactKernel seven_vertex_kernel() {
    const std::vector<std::vector<VertexId>> adj = {{1, 3}, {0}, {5}, {0, 4}, {3, 5, 6}, {2, 4}, {4}};
    std::vector<std::vector<Rational>> rows(7, std::vector<Rational>(7, Rational(0)));
    std::vector<std::string> labels;
    for (VertexId u = 0; u < 7; ++u) {
        for (const VertexId v : adj[static_cast<size_t>(u)])
            rows[static_cast<size_t>(u)][static_cast<size_t>(v)] =
                make_rational(1, static_cast<long>(adj[static_cast<size_t>(u)].size()));
        labels.push_back(std::to_string(u + 1));
    }
    return ExactKernel(std::move(labels), std::move(rows));
}

// Walk on the 7-vertex graph whose first-entrance tree, heap encoding, and
// golf decomposition are frozen fixtures across the suite.
inline Path seven_walk() {
    return Path{{0, 3, 0, 1, 0, 1, 0, 3, 0, 3, 4, 5, 4, 6, 4, 3, 4, 5, 2}};
}

// Deterministic 2-cycle a <-> b.
inline ExactKernel two_cycle_kernel() {
    return ExactKernel({"a", "b"}, {{Rational(0), Rational(1)}, {Rational(1), Rational(0)}});
}

// Random kernel with exact rational entries: a random connected symmetric
// support (spanning tree plus extra undirected edges and optional self-loops)
// with integer weights per directed edge, rows normalized exactly. Generally
// non-reversible.
inline ExactKernel random_exact_kernel(RandomSource& rng, int n, double extra_edge_prob = 0.4,
                                       double self_loop_prob = 0.25) {
    std::vector<std::vector<BigInt>> w(static_cast<size_t>(n), std::vector<BigInt>(static_cast<size_t>(n), 0));
    const auto weight = [&rng] { return BigInt(1 + static_cast<long>(rng.next_below(9))); };
    for (int v = 1; v < n; ++v) {
        const int u = static_cast<int>(rng.next_below(static_cast<uint64_t>(v)));
        w[v][u] = weight();
        w[u][v] = weight();
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (w[a][b] == 0 && rng.next_double() < extra_edge_prob) {
                w[a][b] = weight();
                w[b][a] = weight();
            }
    for (int a = 0; a < n; ++a)
        if (rng.next_double() < self_loop_prob) w[a][a] = weight();

    std::vector<std::vector<Rational>> rows(static_cast<size_t>(n), std::vector<Rational>(static_cast<size_t>(n)));
    std::vector<std::string> labels;
    for (int a = 0; a < n; ++a) {
        BigInt sum = 0;
        for (int b = 0; b < n; ++b) sum += w[a][b];
        for (int b = 0; b < n; ++b) rows[a][b] = make_rational(w[a][b], sum);
        labels.push_back(std::to_string(a + 1));
    }
    return ExactKernel(std::move(labels), std::move(rows));
}

// Random walk of exactly `steps` steps following the kernel (float weights).
template <ScalarMode S>
Path random_walk(const MarkovKernel<S>& kernel, RandomSource& rng, VertexId start, int steps) {
    Path p{{start}};
    std::vector<double> row(static_cast<size_t>(kernel.size()));
    for (int i = 0; i < steps; ++i) {
        const VertexId u = p.back();
        for (VertexId b = 0; b < kernel.size(); ++b) row[static_cast<size_t>(b)] = to_double(kernel.at(u, b));
        p.vertices.push_back(rng.categorical(row));
    }
    return p;
}

}  // namespace fetree::testing
