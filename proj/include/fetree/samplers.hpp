// samplers.hpp — Monte Carlo tree samplers: covering-walk first-entrance
// trees, loop-erased (Wilson) trees, the tree-valued root chain, and a
// deterministic parallel batch runner.
#pragma once

#include "fetree/analysis.hpp"
#include "fetree/kernel.hpp"
#include "fetree/path.hpp"
#include "fetree/random.hpp"
#include "fetree/tree.hpp"

#include <exception>
#include <map>
#include <thread>
#include <vector>

namespace fetree {

struct sampler_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr long long kDefaultStepBudget = 10'000'000;

namespace detail {

template <ScalarMode S>
VertexId step_from(const MarkovKernel<S>& m, VertexId u, RandomSource& rng, std::vector<double>& row) {
    for (VertexId b = 0; b < m.size(); ++b) row[static_cast<size_t>(b)] = to_double(m.at(u, b));
    return rng.categorical(row);
}

}  // namespace detail

// Runs the chain from start until every vertex has been visited. The walk
// ends at the moment of the last first visit.
template <ScalarMode S>
Path walk_until_cover(const MarkovKernel<S>& m, VertexId start, RandomSource& rng,
                      long long max_steps = kDefaultStepBudget) {
    if (start < 0 || start >= m.size()) throw sampler_error("start vertex out of range");
    Path p{{start}};
    std::vector<char> seen(static_cast<size_t>(m.size()), 0);
    seen[static_cast<size_t>(start)] = 1;
    int visited = 1;
    std::vector<double> row(static_cast<size_t>(m.size()));
    long long steps = 0;
    while (visited < m.size()) {
        if (++steps > max_steps)
            throw sampler_error("cover walk exceeded the step budget of " + std::to_string(max_steps));
        const VertexId v = detail::step_from(m, p.back(), rng, row);
        p.vertices.push_back(v);
        if (!seen[static_cast<size_t>(v)]) {
            seen[static_cast<size_t>(v)] = 1;
            ++visited;
        }
    }
    return p;
}

// First-entrance tree of a covering walk launched at a fixed root.
template <ScalarMode S>
RootedTree sample_fet(const MarkovKernel<S>& m, VertexId root, RandomSource& rng,
                      long long max_steps = kDefaultStepBudget) {
    return first_entrance_tree(walk_until_cover(m, root, rng, max_steps), m.size());
}

// Same, but the walk starts from a draw of the given distribution (normally
// the exact stationary distribution of m).
template <ScalarMode S, ScalarMode R>
RootedTree sample_fet_stationary(const MarkovKernel<S>& m, const Distribution<R>& rho, RandomSource& rng,
                                 long long max_steps = kDefaultStepBudget) {
    if (rho.size() != m.size()) throw sampler_error("start distribution size mismatch");
    std::vector<double> w(static_cast<size_t>(rho.size()));
    for (VertexId v = 0; v < rho.size(); ++v) w[static_cast<size_t>(v)] = to_double(rho[v]);
    return sample_fet(m, rng.categorical(w), rng, max_steps);
}

// Loop-erased random-walk sampler. The sampled tree has probability
// proportional to the product of k-weights of its edges, so calling it with
// the reversed kernel matches sample_fet in distribution.
template <ScalarMode S>
RootedTree wilson_sample(const MarkovKernel<S>& k, VertexId root, RandomSource& rng,
                         long long max_steps = kDefaultStepBudget) {
    const int n = k.size();
    if (root < 0 || root >= n) throw sampler_error("root vertex out of range");
    std::vector<char> in_tree(static_cast<size_t>(n), 0);
    in_tree[static_cast<size_t>(root)] = 1;
    std::vector<VertexId> next(static_cast<size_t>(n), -1);
    RootedTree t{root, std::vector<VertexId>(static_cast<size_t>(n), -1)};
    std::vector<double> row(static_cast<size_t>(n));
    long long steps = 0;
    for (VertexId i = 0; i < n; ++i) {
        if (in_tree[static_cast<size_t>(i)]) continue;
        // Walk until the tree is hit; loops are erased by overwriting next.
        for (VertexId u = i; !in_tree[static_cast<size_t>(u)]; u = next[static_cast<size_t>(u)]) {
            if (++steps > max_steps)
                throw sampler_error("loop-erased walk exceeded the step budget of " + std::to_string(max_steps));
            next[static_cast<size_t>(u)] = detail::step_from(k, u, rng, row);
        }
        for (VertexId u = i; !in_tree[static_cast<size_t>(u)]; u = next[static_cast<size_t>(u)]) {
            in_tree[static_cast<size_t>(u)] = 1;
            t.parent[static_cast<size_t>(u)] = next[static_cast<size_t>(u)];
        }
    }
    return t;
}

namespace detail {

// Edge surgery of the root chain: hang the old root below the new one.
inline RootedTree tree_chain_move(RootedTree state, VertexId new_root) {
    state.parent[static_cast<size_t>(state.root)] = new_root;
    state.parent[static_cast<size_t>(new_root)] = -1;
    state.root = new_root;
    return state;
}

}  // namespace detail

// One step of the tree-valued chain: the root hands its crown to a neighbor
// drawn from the reversed kernel.
template <ScalarMode S>
RootedTree tree_chain_step(const RootedTree& state, const MarkovKernel<S>& mrev, RandomSource& rng) {
    if (state.n() != mrev.size() || !state.spanning())
        throw sampler_error("tree chain state must span the kernel's vertex set");
    std::vector<double> row(static_cast<size_t>(mrev.size()));
    return detail::tree_chain_move(state, detail::step_from(mrev, state.root, rng, row));
}

struct TreeChainReport {
    int states = 0;
    bool rows_stochastic = false;
    bool balanced = false;
    double max_row_error = 0.0;
    double max_balance_error = 0.0;

    bool pass() const { return rows_stochastic && balanced; }
};

// Exact stationarity check of the tree chain: with P proportional to the
// product of reversed-kernel edge weights over all rooted spanning trees,
// verify that P is invariant for the edge-surgery transition kernel and that
// the transition rows are stochastic.
inline constexpr int kTreeChainGuard = 6;

template <ScalarMode S>
TreeChainReport verify_tree_chain_stationarity(const MarkovKernel<S>& m) {
    if (m.size() > kTreeChainGuard)
        throw sampler_error("tree chain verification is limited to " + std::to_string(kTreeChainGuard) +
                            " vertices");
    const MarkovKernel<S> mrev = reversed_kernel(m);
    std::vector<RootedTree> states;
    std::vector<S> weight;
    for (VertexId r = 0; r < m.size(); ++r) {
        const auto ens = enumerate_rooted_spanning_trees(mrev, r);
        states.insert(states.end(), ens.trees.begin(), ens.trees.end());
        weight.insert(weight.end(), ens.weights.begin(), ens.weights.end());
    }
    std::map<RootedTree, size_t> index;
    for (size_t i = 0; i < states.size(); ++i) index[states[i]] = i;

    TreeChainReport rep;
    rep.states = static_cast<int>(states.size());
    rep.rows_stochastic = true;
    rep.balanced = true;
    std::vector<S> influx(states.size(), S(0));
    for (size_t i = 0; i < states.size(); ++i) {
        S row_sum(0);
        for (VertexId rp = 0; rp < m.size(); ++rp) {
            const S q = mrev.at(states[i].root, rp);
            if (!(q > S(0))) continue;
            const auto it = index.find(detail::tree_chain_move(states[i], rp));
            if (it == index.end())
                throw sampler_error("tree chain stepped outside the enumerated state space");
            influx[it->second] += weight[i] * q;
            row_sum += q;
        }
        const double dev = std::abs(to_double(row_sum) - 1.0);
        rep.max_row_error = std::max(rep.max_row_error, dev);
        if (!approx_equal(row_sum, S(1))) rep.rows_stochastic = false;
    }
    for (size_t j = 0; j < states.size(); ++j) {
        const double dev = std::abs(to_double(influx[j] - weight[j]));
        rep.max_balance_error = std::max(rep.max_balance_error, dev);
        if (!approx_equal(influx[j], weight[j])) rep.balanced = false;
    }
    return rep;
}

struct SampleBatch {
    std::map<RootedTree, long long> counts;
    long long total = 0;
    uint64_t seed = 0;

    void add(const RootedTree& t) {
        ++counts[t];
        ++total;
    }

    void merge(const SampleBatch& other) {
        for (const auto& [t, c] : other.counts) counts[t] += c;
        total += other.total;
    }
};

// Runs `samples` independent trials of `sample: RandomSource& -> RootedTree`.
// Trial i always uses stream (seed, i), so the aggregate counts do not depend
// on the number of workers.
template <class Sampler>
SampleBatch run_batch(uint64_t seed, long long samples, const Sampler& sample, int workers = 1) {
    if (samples < 0) throw sampler_error("negative sample count");
    const int pool_size = static_cast<int>(std::min<long long>(std::max(workers, 1), std::max<long long>(samples, 1)));
    std::vector<SampleBatch> parts(static_cast<size_t>(pool_size));
    std::vector<std::exception_ptr> failures(static_cast<size_t>(pool_size));
    std::vector<std::thread> pool;
    for (int w = 0; w < pool_size; ++w)
        pool.emplace_back([&, w] {
            try {
                for (long long i = w; i < samples; i += pool_size) {
                    RandomSource rng(seed, static_cast<uint64_t>(i));
                    parts[static_cast<size_t>(w)].add(sample(rng));
                }
            } catch (...) {
                failures[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    SampleBatch batch;
    batch.seed = seed;
    for (const auto& part : parts) batch.merge(part);
    return batch;
}

}  // namespace fetree
