// stats.hpp — total-variation distances and a chi-square goodness-of-fit
// test (with small-cell merging) over rooted-tree distributions.
#pragma once

#include "fetree/analysis.hpp"
#include "fetree/samplers.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

namespace fetree {

struct stats_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw stats_error("distributions have different sizes");
    double d = 0.0;
    for (size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return d / 2.0;
}

template <ScalarMode S>
std::vector<double> to_doubles(const Distribution<S>& d) {
    std::vector<double> out(static_cast<size_t>(d.size()));
    for (VertexId v = 0; v < d.size(); ++v) out[static_cast<size_t>(v)] = to_double(d[v]);
    return out;
}

template <ScalarMode S>
std::map<RootedTree, double> tree_probabilities(const TreeEnsemble<S>& e) {
    std::map<RootedTree, double> p;
    for (size_t i = 0; i < e.trees.size(); ++i)
        p[e.trees[i]] = to_double(e.weights[i]) / to_double(e.total);
    return p;
}

inline std::map<RootedTree, double> tree_frequencies(const SampleBatch& b) {
    std::map<RootedTree, double> p;
    if (b.total == 0) throw stats_error("empty sample batch");
    for (const auto& [t, c] : b.counts) p[t] = static_cast<double>(c) / static_cast<double>(b.total);
    return p;
}

inline double tv_distance(const std::map<RootedTree, double>& p, const std::map<RootedTree, double>& q) {
    double d = 0.0;
    for (const auto& [t, pp] : p) {
        const auto it = q.find(t);
        d += std::abs(pp - (it == q.end() ? 0.0 : it->second));
    }
    for (const auto& [t, qq] : q)
        if (!p.contains(t)) d += qq;
    return d / 2.0;
}

template <ScalarMode S>
double tv_distance(const SampleBatch& b, const TreeEnsemble<S>& e) {
    return tv_distance(tree_frequencies(b), tree_probabilities(e));
}

template <ScalarMode A, ScalarMode B>
double tv_distance(const TreeEnsemble<A>& a, const TreeEnsemble<B>& b) {
    return tv_distance(tree_probabilities(a), tree_probabilities(b));
}

inline double tv_distance(const SampleBatch& a, const SampleBatch& b) {
    return tv_distance(tree_frequencies(a), tree_frequencies(b));
}

// Marginal distribution of the root over vertices 0..n-1.
inline std::vector<double> root_frequencies(const SampleBatch& b, int n) {
    std::vector<double> p(static_cast<size_t>(n), 0.0);
    if (b.total == 0) throw stats_error("empty sample batch");
    for (const auto& [t, c] : b.counts) {
        if (t.root < 0 || t.root >= n) throw stats_error("batch contains a tree with an out-of-range root");
        p[static_cast<size_t>(t.root)] += static_cast<double>(c) / static_cast<double>(b.total);
    }
    return p;
}

struct ChiSquareReport {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int cells = 0;         // cells after merging
    int merged_cells = 0;  // original cells folded into neighbors
};

// Pearson goodness-of-fit. Cells whose expected count falls below
// min_expected are merged (smallest expected first) until every remaining
// cell meets the threshold.
inline ChiSquareReport chi_square_goodness(std::vector<long long> observed, std::vector<double> expected,
                                           double min_expected = 5.0) {
    if (observed.size() != expected.size()) throw stats_error("observed/expected size mismatch");
    if (observed.empty()) throw stats_error("chi-square needs at least one cell");
    for (const double e : expected)
        if (e < 0.0) throw stats_error("negative expected count");

    std::vector<size_t> order(observed.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return expected[a] < expected[b]; });

    // Walk cells from smallest expected count, folding undersized ones into
    // an accumulator that is flushed whenever it reaches the threshold.
    std::vector<std::pair<long long, double>> cells;
    long long obs_acc = 0;
    double exp_acc = 0.0;
    int merged = 0;
    for (const size_t i : order) {
        obs_acc += observed[i];
        exp_acc += expected[i];
        if (exp_acc >= min_expected) {
            cells.emplace_back(obs_acc, exp_acc);
            obs_acc = 0;
            exp_acc = 0.0;
        } else {
            ++merged;
        }
    }
    if (exp_acc > 0.0 || obs_acc > 0) {
        if (cells.empty()) throw stats_error("total expected count below the merge threshold");
        cells.back().first += obs_acc;
        cells.back().second += exp_acc;
    }

    ChiSquareReport rep;
    rep.cells = static_cast<int>(cells.size());
    rep.merged_cells = merged;
    rep.dof = std::max(rep.cells - 1, 1);
    for (const auto& [obs, exp] : cells)
        rep.statistic += (static_cast<double>(obs) - exp) * (static_cast<double>(obs) - exp) / exp;
    rep.p_value = boost::math::gamma_q(rep.dof / 2.0, rep.statistic / 2.0);
    return rep;
}

// Chi-square of a sampled batch against an exact ensemble; the cell set is
// the ensemble's tree list, and sampling a tree outside it is an error.
template <ScalarMode S>
ChiSquareReport chi_square_goodness(const SampleBatch& b, const TreeEnsemble<S>& e, double min_expected = 5.0) {
    std::map<RootedTree, size_t> index;
    for (size_t i = 0; i < e.trees.size(); ++i) index[e.trees[i]] = i;
    std::vector<long long> observed(e.trees.size(), 0);
    for (const auto& [t, c] : b.counts) {
        const auto it = index.find(t);
        if (it == index.end()) throw stats_error("batch contains a tree with zero exact probability");
        observed[it->second] = c;
    }
    std::vector<double> expected(e.trees.size());
    for (size_t i = 0; i < e.trees.size(); ++i)
        expected[i] = to_double(e.weights[i]) / to_double(e.total) * static_cast<double>(b.total);
    return chi_square_goodness(std::move(observed), std::move(expected), min_expected);
}

}  // namespace fetree
