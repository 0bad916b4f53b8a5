// golf.hpp — golf sequences: balls walk the graph and are captured by the
// first still-free hole they reach. Includes the stochastic sampler, the
// forward heap encoding, and the decomposition of passport-family collections
// into a golf part plus a heap of cycles.
#pragma once

#include "fetree/heaps.hpp"
#include "fetree/kernel.hpp"
#include "fetree/random.hpp"
#include "fetree/tree.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace fetree {

struct golf_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GolfConfig {
    std::vector<VertexId> holes;   // ascending
    std::vector<VertexId> starts;  // ball launch order

    int nb() const { return static_cast<int>(starts.size()); }

    bool is_hole(VertexId v) const { return std::binary_search(holes.begin(), holes.end(), v); }

    // Balls per start vertex.
    std::vector<int> counting(int n) const {
        std::vector<int> c(static_cast<size_t>(n), 0);
        for (const VertexId s : starts) ++c[static_cast<size_t>(s)];
        return c;
    }
};

namespace detail {

inline void check_config(const GolfConfig& cfg, int n) {
    if (!std::is_sorted(cfg.holes.begin(), cfg.holes.end()) ||
        std::adjacent_find(cfg.holes.begin(), cfg.holes.end()) != cfg.holes.end())
        throw golf_error("hole set must be strictly ascending");
    for (const VertexId v : cfg.holes)
        if (v < 0 || v >= n) throw golf_error("hole out of range");
    for (const VertexId s : cfg.starts) {
        if (s < 0 || s >= n) throw golf_error("start out of range");
        if (cfg.is_hole(s)) throw golf_error("ball starts on a hole");
    }
    if (cfg.nb() > static_cast<int>(cfg.holes.size()))
        throw golf_error("more balls than holes");
}

}  // namespace detail

// Holes at the leaves; children - 1 balls per internal vertex, launched in
// vertex-index order. Optionally one leaf is excluded from the hole set.
inline GolfConfig golf_config_for_tree(const RootedTree& t, std::optional<VertexId> exclude = std::nullopt) {
    if (!t.spanning() || t.n() < 2) throw golf_error("golf configuration needs a spanning tree on >= 2 vertices");
    GolfConfig cfg;
    const auto cc = child_counts(t);
    for (VertexId u = 0; u < t.n(); ++u) {
        if (cc[static_cast<size_t>(u)] == 0) {
            if (exclude && *exclude == u) continue;
            cfg.holes.push_back(u);
        } else {
            for (int i = 1; i < cc[static_cast<size_t>(u)]; ++i) cfg.starts.push_back(u);
        }
    }
    if (exclude && cc[static_cast<size_t>(*exclude)] != 0) throw golf_error("excluded vertex is not a leaf");
    return cfg;
}

struct GolfSequence {
    std::vector<Path> paths;

    std::vector<VertexId> finals() const {
        std::vector<VertexId> f;
        for (const Path& p : paths) f.push_back(p.back());
        return f;
    }

    bool operator==(const GolfSequence&) const = default;
};

// Checks the three defining clauses: ball j starts at S_j; each final is a
// hole and finals are pairwise distinct; each path stops exactly at its first
// visit to a hole that is still free (captured holes are ordinary vertices).
inline bool is_golf_sequence(const GolfSequence& seq, const GolfConfig& cfg) {
    if (static_cast<int>(seq.paths.size()) != cfg.nb()) return false;
    std::vector<VertexId> remaining = cfg.holes;
    for (size_t j = 0; j < seq.paths.size(); ++j) {
        const Path& p = seq.paths[j];
        if (p.vertices.empty() || p.front() != cfg.starts[j]) return false;
        for (int i = 0; i < p.steps(); ++i)
            if (std::binary_search(remaining.begin(), remaining.end(), p.vertices[static_cast<size_t>(i)]))
                return false;
        const auto hit = std::lower_bound(remaining.begin(), remaining.end(), p.back());
        if (hit == remaining.end() || *hit != p.back()) return false;
        remaining.erase(hit);
    }
    return true;
}

// Sequential simulation: ball j performs a chain with the given kernel from
// S_j until it reaches a hole not yet captured.
template <ScalarMode S>
GolfSequence stochastic_golf(const MarkovKernel<S>& kernel, const GolfConfig& cfg, RandomSource& rng,
                             long long max_steps = 10'000'000) {
    detail::check_config(cfg, kernel.size());
    std::vector<char> captured(static_cast<size_t>(kernel.size()), 0);
    GolfSequence seq;
    long long steps = 0;
    std::vector<double> row(static_cast<size_t>(kernel.size()));
    for (const VertexId s : cfg.starts) {
        Path p{{s}};
        VertexId cur = s;
        for (;;) {
            if (++steps > max_steps)
                throw golf_error("golf simulation exceeded the step budget of " + std::to_string(max_steps));
            for (VertexId b = 0; b < kernel.size(); ++b) row[static_cast<size_t>(b)] = to_double(kernel.at(cur, b));
            cur = rng.categorical(row);
            p.vertices.push_back(cur);
            if (cfg.is_hole(cur) && !captured[static_cast<size_t>(cur)]) {
                captured[static_cast<size_t>(cur)] = 1;
                break;
            }
        }
        seq.paths.push_back(std::move(p));
    }
    return seq;
}

// Product of the forward step weights of all trajectories — the probability
// that the stochastic simulation under the same kernel produces exactly seq.
template <ScalarMode S>
S golf_weight(const GolfSequence& seq, const MarkovKernel<S>& kernel) {
    S w(1);
    for (const Path& p : seq.paths) w *= path_weight(p, kernel, StepWeight::forward);
    return w;
}

// Forward encoding: each step u -> v becomes the edge (u, v) under source u,
// paths concatenated in ball order.
inline HeapCollection golf_heap_encode(const GolfSequence& seq, int n) {
    HeapCollection h(n);
    for (const Path& p : seq.paths)
        for (int i = 0; i < p.steps(); ++i)
            h.targets[static_cast<size_t>(p.vertices[static_cast<size_t>(i)])].push_back(
                p.vertices[static_cast<size_t>(i) + 1]);
    return h;
}

namespace detail {

// Replays the golf balls through the collection, consuming first edges, each
// ball stopping at the first still-free hole. Returns the trajectories and
// the number of edges consumed per vertex (always a per-vertex prefix).
inline std::pair<GolfSequence, std::vector<size_t>> extract_golf(const HeapCollection& h,
                                                                 const GolfConfig& cfg) {
    check_config(cfg, h.n());
    std::vector<size_t> used(static_cast<size_t>(h.n()), 0);
    std::vector<char> captured(static_cast<size_t>(h.n()), 0);
    GolfSequence seq;
    for (const VertexId s : cfg.starts) {
        Path p{{s}};
        VertexId cur = s;
        for (;;) {
            const auto& stack = h.targets[static_cast<size_t>(cur)];
            if (used[static_cast<size_t>(cur)] >= stack.size())
                throw golf_error("collection is not a golf image: no edge left at vertex " +
                                 std::to_string(cur + 1));
            cur = stack[used[static_cast<size_t>(cur)]++];
            p.vertices.push_back(cur);
            if (cfg.is_hole(cur) && !captured[static_cast<size_t>(cur)]) {
                captured[static_cast<size_t>(cur)] = 1;
                break;
            }
        }
        seq.paths.push_back(std::move(p));
    }
    return {std::move(seq), std::move(used)};
}

}  // namespace detail

// Inverse of golf_heap_encode: every edge must be consumed by the replay.
inline GolfSequence golf_heap_decode(const HeapCollection& h, const GolfConfig& cfg) {
    auto [seq, used] = detail::extract_golf(h, cfg);
    size_t consumed = 0;
    for (const size_t c : used) consumed += c;
    if (consumed != static_cast<size_t>(h.total_edges()))
        throw golf_error("collection is not a golf image: edges left after all balls landed");
    return seq;
}

// Passport test for the decomposable family: out_u = n_u + balls(u) and
// in_u = n_u + [u is a hole other than f], for some n >= 0 with n_f = 0.
inline bool m_membership(const HeapCollection& h, const GolfConfig& cfg, VertexId f) {
    if (!cfg.is_hole(f)) throw golf_error("the free vertex must be a hole");
    if (static_cast<int>(cfg.holes.size()) != cfg.nb() + 1)
        throw golf_error("hole count must exceed ball count by one");
    const auto balls = cfg.counting(h.n());
    const Passport p = passport(h);
    for (VertexId u = 0; u < h.n(); ++u) {
        const int n_u = p.out[static_cast<size_t>(u)] - balls[static_cast<size_t>(u)];
        if (n_u < 0) return false;
        if (u == f && n_u != 0) return false;
        const int expected_in = n_u + (cfg.is_hole(u) && u != f ? 1 : 0);
        if (p.inn[static_cast<size_t>(u)] != expected_in) return false;
    }
    return true;
}

struct XiWitness {
    HeapCollection golf_part;
    HeapCollection cycle_part;
};

inline HeapCollection recompose(const XiWitness& w) { return concat(w.golf_part, w.cycle_part); }

// Splits a collection from the decomposable family into the heap of a golf
// sequence (leaving hole f free) and a residual heap of cycles avoiding f.
inline XiWitness decompose_truncated_heap(const HeapCollection& h, const GolfConfig& cfg, VertexId f) {
    if (!m_membership(h, cfg, f))
        throw golf_error("collection passport does not match the golf-plus-cycles family");
    auto [seq, used] = detail::extract_golf(h, cfg);
    XiWitness w{HeapCollection(h.n()), HeapCollection(h.n())};
    for (VertexId u = 0; u < h.n(); ++u) {
        const auto& full = h.targets[static_cast<size_t>(u)];
        const auto split = full.begin() + static_cast<long>(used[static_cast<size_t>(u)]);
        w.golf_part.targets[static_cast<size_t>(u)].assign(full.begin(), split);
        w.cycle_part.targets[static_cast<size_t>(u)].assign(split, full.end());
    }
    return w;
}

// The unique hole no ball landed in; defined when there is one more hole
// than balls.
inline VertexId free_hole(const GolfSequence& seq, const GolfConfig& cfg) {
    if (static_cast<int>(cfg.holes.size()) != cfg.nb() + 1)
        throw golf_error("free_hole needs exactly one more hole than balls");
    const auto fin = seq.finals();
    for (const VertexId hole : cfg.holes)
        if (std::find(fin.begin(), fin.end(), hole) == fin.end()) return hole;
    throw golf_error("no free hole found");
}

}  // namespace fetree
