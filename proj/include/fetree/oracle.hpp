// oracle.hpp — exact distributions of the first-entrance tree: a brute-force
// dynamic program over chain histories, the closed-form tree-weight law, the
// stationary joint law, and comparison reports against sampled batches.
#pragma once

#include "fetree/analysis.hpp"
#include "fetree/samplers.hpp"
#include "fetree/stats.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace fetree {

struct oracle_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExactDpGuard = 5;
inline constexpr int kJointGuard = 6;

template <ScalarMode S>
struct ExactDistribution {
    VertexId root = -1;  // -1 for the joint law over all roots
    std::map<RootedTree, S> probs;
    S normalizer = S(0);
    uint64_t kernel_hash = 0;

    S total() const {
        S sum(0);
        for (const auto& [t, p] : probs) sum += p;
        return sum;
    }
};

namespace detail {

// Green column for the chain confined to `mask`: component w holds the
// expected number of visits to `at` starting from w before leaving the set.
template <ScalarMode S>
std::vector<S> confined_green_column(const MarkovKernel<S>& m, unsigned mask, VertexId at) {
    std::vector<VertexId> members;
    for (VertexId v = 0; v < m.size(); ++v)
        if (mask & (1u << v)) members.push_back(v);
    const size_t k = members.size();
    Matrix<S> a(k, std::vector<S>(k));
    std::vector<S> b(k, S(0));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = 0; j < k; ++j) a[i][j] = (i == j ? S(1) : S(0)) - m.at(members[i], members[j]);
        if (members[i] == at) b[i] = S(1);
    }
    const auto x = solve_linear(std::move(a), std::move(b));
    std::vector<S> full(static_cast<size_t>(m.size()), S(0));
    for (size_t i = 0; i < k; ++i) full[static_cast<size_t>(members[i])] = x[i];
    return full;
}

}  // namespace detail

// Brute-force law of the first-entrance tree, independent of the tree-weight
// formula: a dynamic program over (visited set, current vertex, partial
// parent map). For each visited set the exit law of the confined chain is
// computed exactly from the linear system, so every history contributes its
// exact probability to the tree it builds. Uses only chain dynamics.
template <ScalarMode S>
ExactDistribution<S> exact_fet_distribution(const MarkovKernel<S>& m, VertexId r) {
    const int n = m.size();
    if (n > kExactDpGuard)
        throw oracle_error("exact first-entrance law is limited to " + std::to_string(kExactDpGuard) +
                           " vertices");
    if (r < 0 || r >= n) throw oracle_error("root vertex out of range");

    ExactDistribution<S> dist;
    dist.root = r;
    dist.normalizer = S(1);
    const unsigned full = (1u << n) - 1u;
    std::map<std::pair<unsigned, VertexId>, std::vector<S>> greens;
    std::vector<VertexId> parents(static_cast<size_t>(n), -1);

    const auto green = [&](unsigned mask, VertexId at) -> const std::vector<S>& {
        const auto key = std::make_pair(mask, at);
        auto it = greens.find(key);
        if (it == greens.end()) it = greens.emplace(key, detail::confined_green_column(m, mask, at)).first;
        return it->second;
    };

    const auto rec = [&](auto&& self, unsigned mask, VertexId u, const S& prob) -> void {
        if (mask == full) {
            dist.probs[RootedTree{r, parents}] += prob;
            return;
        }
        for (VertexId exit = 0; exit < n; ++exit) {
            if (!(mask & (1u << exit))) continue;
            const S& visits = green(mask, exit)[static_cast<size_t>(u)];
            if (!(visits > S(0))) continue;
            for (VertexId v = 0; v < n; ++v) {
                if (mask & (1u << v)) continue;
                if (!m.supports(exit, v)) continue;
                parents[static_cast<size_t>(v)] = exit;
                self(self, mask | (1u << v), v, prob * visits * m.at(exit, v));
                parents[static_cast<size_t>(v)] = -1;
            }
        }
    };
    rec(rec, 1u << r, r, S(1));
    return dist;
}

// Closed-form law: probability proportional to the product of reversed-kernel
// edge weights, normalized by the principal minor determinant at the root.
template <ScalarMode S>
ExactDistribution<S> theorem_distribution(const MarkovKernel<S>& m, VertexId r) {
    const MarkovKernel<S> mrev = reversed_kernel(m);
    const auto ens = enumerate_rooted_spanning_trees(mrev, r);
    ExactDistribution<S> dist;
    dist.root = r;
    dist.normalizer = principal_minor_det(mrev, r);
    for (size_t i = 0; i < ens.trees.size(); ++i) dist.probs[ens.trees[i]] = ens.weights[i] / dist.normalizer;
    return dist;
}

// Joint law of (tree, root) in the stationary regime: reversed tree weight
// over the sum of all principal minor determinants. The marginal over trees
// rooted at r is the stationary mass of r.
template <ScalarMode S>
ExactDistribution<S> stationary_joint_distribution(const MarkovKernel<S>& m) {
    const int n = m.size();
    if (n > kJointGuard)
        throw oracle_error("joint law is limited to " + std::to_string(kJointGuard) + " vertices");
    const MarkovKernel<S> mrev = reversed_kernel(m);
    ExactDistribution<S> dist;
    dist.root = -1;
    dist.normalizer = S(0);
    for (VertexId x = 0; x < n; ++x) dist.normalizer += principal_minor_det(m, x);
    for (VertexId r = 0; r < n; ++r)
        for (const auto& t : enumerate_rooted_spanning_trees(mrev, r).trees)
            dist.probs[t] = tree_weight(t, mrev) / dist.normalizer;
    return dist;
}

template <ScalarMode S>
struct ComparisonReport {
    double tv = 0.0;
    S max_abs_diff = S(0);                            // exact-vs-exact only
    std::optional<ChiSquareReport> chi;               // batch comparisons only
    std::map<RootedTree, std::pair<double, double>> table;  // expected, observed
};

namespace detail {

template <ScalarMode S>
TreeEnsemble<S> ensemble_from(const ExactDistribution<S>& d) {
    TreeEnsemble<S> e;
    e.root = d.root;
    e.total = S(0);
    for (const auto& [t, p] : d.probs) {
        e.trees.push_back(t);
        e.weights.push_back(p);
        e.total += p;
    }
    return e;
}

}  // namespace detail

template <ScalarMode S>
ComparisonReport<S> compare(const ExactDistribution<S>& expected, const SampleBatch& observed) {
    if (observed.total == 0) throw oracle_error("cannot compare against an empty batch");
    const auto ens = detail::ensemble_from(expected);
    ComparisonReport<S> rep;
    rep.tv = tv_distance(observed, ens);
    rep.chi = chi_square_goodness(observed, ens);
    const auto freq = tree_frequencies(observed);
    for (const auto& [t, p] : expected.probs) {
        const auto it = freq.find(t);
        rep.table[t] = {to_double(p), it == freq.end() ? 0.0 : it->second};
    }
    for (const auto& [t, f] : freq)
        if (!expected.probs.contains(t)) rep.table[t] = {0.0, f};
    return rep;
}

template <ScalarMode S>
ComparisonReport<S> compare(const ExactDistribution<S>& expected, const ExactDistribution<S>& observed) {
    ComparisonReport<S> rep;
    const auto abs_s = [](const S& v) { return v < S(0) ? S(0) - v : v; };
    double tv_acc = 0.0;
    for (const auto& [t, p] : expected.probs) {
        const auto it = observed.probs.find(t);
        const S q = it == observed.probs.end() ? S(0) : it->second;
        rep.max_abs_diff = std::max(rep.max_abs_diff, abs_s(p - q));
        tv_acc += std::abs(to_double(p - q));
        rep.table[t] = {to_double(p), to_double(q)};
    }
    for (const auto& [t, q] : observed.probs) {
        if (expected.probs.contains(t)) continue;
        rep.max_abs_diff = std::max(rep.max_abs_diff, abs_s(q));
        tv_acc += std::abs(to_double(q));
        rep.table[t] = {0.0, to_double(q)};
    }
    rep.tv = tv_acc / 2.0;
    return rep;
}

}  // namespace fetree
