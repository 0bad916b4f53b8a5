// heaps.hpp — per-vertex edge heaps: path encoding, passports, heaps of
// cycles, cycle popping, signed trivial-heap sums, and the inversion-formula
// enumeration.
#pragma once

#include "fetree/analysis.hpp"
#include "fetree/kernel.hpp"
#include "fetree/path.hpp"
#include "fetree/tree.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

namespace fetree {

struct heap_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered edge sequences, one per source vertex: targets[u][k] is the target
// of the k-th edge out of u; index 0 is the first (bottom) edge.
struct HeapCollection {
    std::vector<std::vector<VertexId>> targets;

    HeapCollection() = default;
    explicit HeapCollection(int n) : targets(static_cast<size_t>(n)) {}

    int n() const { return static_cast<int>(targets.size()); }

    int total_edges() const {
        int c = 0;
        for (const auto& h : targets) c += static_cast<int>(h.size());
        return c;
    }

    bool empty() const { return total_edges() == 0; }

    bool operator==(const HeapCollection&) const = default;
};

struct Passport {
    std::vector<int> out;
    std::vector<int> inn;

    bool balanced() const { return out == inn; }
    bool operator==(const Passport&) const = default;
};

inline Passport passport(const HeapCollection& h) {
    Passport p{std::vector<int>(static_cast<size_t>(h.n()), 0),
               std::vector<int>(static_cast<size_t>(h.n()), 0)};
    for (VertexId u = 0; u < h.n(); ++u) {
        p.out[static_cast<size_t>(u)] = static_cast<int>(h.targets[static_cast<size_t>(u)].size());
        for (const VertexId v : h.targets[static_cast<size_t>(u)]) ++p.inn[static_cast<size_t>(v)];
    }
    return p;
}

inline HeapCollection concat(const HeapCollection& a, const HeapCollection& b) {
    if (a.n() != b.n()) throw heap_error("concat: size mismatch");
    HeapCollection out = a;
    for (VertexId u = 0; u < a.n(); ++u)
        out.targets[static_cast<size_t>(u)].insert(out.targets[static_cast<size_t>(u)].end(),
                                                   b.targets[static_cast<size_t>(u)].begin(),
                                                   b.targets[static_cast<size_t>(u)].end());
    return out;
}

// Deletes p from the front of h, vertex by vertex; p must be a per-vertex
// prefix of h.
inline HeapCollection prefix_remove(const HeapCollection& h, const HeapCollection& p) {
    if (h.n() != p.n()) throw heap_error("prefix_remove: size mismatch");
    HeapCollection out(h.n());
    for (VertexId u = 0; u < h.n(); ++u) {
        const auto& full = h.targets[static_cast<size_t>(u)];
        const auto& pre = p.targets[static_cast<size_t>(u)];
        if (pre.size() > full.size() || !std::equal(pre.begin(), pre.end(), full.begin()))
            throw heap_error("prefix_remove: not a prefix at vertex " + std::to_string(u + 1));
        out.targets[static_cast<size_t>(u)].assign(full.begin() + static_cast<long>(pre.size()), full.end());
    }
    return out;
}

// Path -> heap: each step w_j -> w_{j+1} is recorded reversed, as the edge
// (w_{j+1}, w_j) under source w_{j+1}, in path order.
inline HeapCollection heap_encode(const Path& p, int n) {
    HeapCollection h(n);
    for (int j = 0; j < p.steps(); ++j)
        h.targets[static_cast<size_t>(p.vertices[static_cast<size_t>(j) + 1])].push_back(
            p.vertices[static_cast<size_t>(j)]);
    return h;
}

// Inverse of heap_encode. The path endpoint is the unique vertex with
// out - in = +1; a balanced collection encodes a closed path and needs the
// start vertex as a hint. Reconstruction consumes the last (top) edge of the
// current vertex, building the path back to front.
inline Path heap_decode(const HeapCollection& h, std::optional<VertexId> start_hint = std::nullopt) {
    const Passport p = passport(h);
    VertexId end = -1;
    int plus = 0, minus = 0;
    for (VertexId u = 0; u < h.n(); ++u) {
        const int d = p.out[static_cast<size_t>(u)] - p.inn[static_cast<size_t>(u)];
        if (d == 1 && ++plus == 1) end = u;
        else if (d == -1) ++minus;
        else if (d != 0) throw heap_error("heap is not a path image: |out-in| > 1 at vertex " + std::to_string(u + 1));
    }
    if (plus > 1 || minus > 1 || plus != minus) throw heap_error("heap is not a path image: endpoint count");
    if (plus == 0) {
        if (!start_hint) {
            if (h.empty()) throw heap_error("empty heap needs a start hint");
            throw heap_error("balanced heap needs a start hint");
        }
        end = *start_hint;
    }

    HeapCollection rest = h;
    std::vector<VertexId> rev{end};
    int remaining = rest.total_edges();
    VertexId cur = end;
    while (remaining > 0) {
        auto& stack = rest.targets[static_cast<size_t>(cur)];
        if (stack.empty())
            throw heap_error("heap is not a path image: stuck at vertex " + std::to_string(cur + 1) +
                             " with edges remaining");
        cur = stack.back();
        stack.pop_back();
        --remaining;
        rev.push_back(cur);
    }
    std::reverse(rev.begin(), rev.end());
    return Path{std::move(rev)};
}

// One single-edge heap (u, parent(u)) per non-root vertex.
inline HeapCollection tree_heap(const RootedTree& t) {
    HeapCollection h(t.n());
    for (const auto& [child, parent] : t.edges()) h.targets[static_cast<size_t>(child)].push_back(parent);
    return h;
}

template <ScalarMode S>
S heap_weight(const HeapCollection& h, const MarkovKernel<S>& k) {
    S w(1);
    for (VertexId u = 0; u < h.n(); ++u)
        for (const VertexId v : h.targets[static_cast<size_t>(u)]) w *= k.at(u, v);
    return w;
}

// Simple oriented cycle, stored rotated so the smallest vertex comes first.
// Total order: by length, then lexicographically by the canonical sequence.
struct Cycle {
    std::vector<VertexId> vertices;

    int length() const { return static_cast<int>(vertices.size()); }

    bool operator==(const Cycle&) const = default;
    bool operator<(const Cycle& o) const {
        if (length() != o.length()) return length() < o.length();
        return vertices < o.vertices;
    }
};

inline Cycle make_cycle(std::vector<VertexId> vs) {
    if (vs.empty()) throw heap_error("empty cycle");
    const auto min_it = std::min_element(vs.begin(), vs.end());
    std::rotate(vs.begin(), min_it, vs.end());
    for (size_t i = 1; i < vs.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (vs[i] == vs[j]) throw heap_error("cycle has a repeated vertex");
    return Cycle{std::move(vs)};
}

template <ScalarMode S>
S cycle_weight(const Cycle& c, const MarkovKernel<S>& k) {
    S w(1);
    for (int i = 0; i < c.length(); ++i)
        w *= k.at(c.vertices[static_cast<size_t>(i)],
                  c.vertices[static_cast<size_t>((i + 1) % c.length())]);
    return w;
}

// Walks first edges from `start` until a vertex repeats, removes the cycle
// found and returns it with the residual collection. Needs a balanced
// passport so the walk cannot strand.
inline std::pair<Cycle, HeapCollection> pop_cycle(const HeapCollection& h, VertexId start) {
    if (!passport(h).balanced()) throw heap_error("pop_cycle needs a balanced collection");
    if (h.targets[static_cast<size_t>(start)].empty())
        throw heap_error("pop_cycle: empty heap at start vertex " + std::to_string(start + 1));
    std::vector<VertexId> walk{start};
    std::vector<int> pos(static_cast<size_t>(h.n()), -1);
    pos[static_cast<size_t>(start)] = 0;
    VertexId cur = start;
    for (;;) {
        const auto& stack = h.targets[static_cast<size_t>(cur)];
        if (stack.empty()) throw heap_error("pop_cycle: stranded walk");  // unreachable when balanced
        const VertexId next = stack.front();
        if (pos[static_cast<size_t>(next)] >= 0) {
            const auto at = static_cast<size_t>(pos[static_cast<size_t>(next)]);
            std::vector<VertexId> cyc(walk.begin() + static_cast<long>(at), walk.end());
            HeapCollection rest = h;
            for (const VertexId u : cyc)
                rest.targets[static_cast<size_t>(u)].erase(rest.targets[static_cast<size_t>(u)].begin());
            return {make_cycle(std::move(cyc)), std::move(rest)};
        }
        pos[static_cast<size_t>(next)] = static_cast<int>(walk.size());
        walk.push_back(next);
        cur = next;
    }
}

// Repeatedly pops from the smallest-index vertex with a nonempty heap.
inline std::vector<Cycle> cycle_decomposition(HeapCollection h) {
    if (!passport(h).balanced()) throw heap_error("cycle_decomposition needs a balanced collection");
    std::vector<Cycle> out;
    for (;;) {
        VertexId start = -1;
        for (VertexId u = 0; u < h.n() && start < 0; ++u)
            if (!h.targets[static_cast<size_t>(u)].empty()) start = u;
        if (start < 0) return out;
        auto [c, rest] = pop_cycle(h, start);
        out.push_back(std::move(c));
        h = std::move(rest);
    }
}

// Passport test against the family indexed by a spanning tree (t, r) and a
// leaf f: out_u = n_u + (children(u) - 1) on internal vertices, in_u = n_u + 1
// on leaves other than f, for some n ≥ 0 with n_f = 0.
inline bool xi_membership(const HeapCollection& h, const RootedTree& t, VertexId f) {
    if (!t.spanning()) throw heap_error("xi_membership needs a spanning tree");
    const auto cc = child_counts(t);
    if (cc[static_cast<size_t>(f)] != 0) throw heap_error("xi_membership: f must be a leaf");
    const Passport p = passport(h);
    for (VertexId u = 0; u < t.n(); ++u) {
        const int children = cc[static_cast<size_t>(u)];
        const bool internal = children > 0;
        const int n_u = p.out[static_cast<size_t>(u)] - (internal ? children - 1 : 0);
        if (n_u < 0) return false;
        if (u == f && n_u != 0) return false;
        const int expected_in = n_u + (!internal && u != f ? 1 : 0);
        if (p.inn[static_cast<size_t>(u)] != expected_in) return false;
    }
    return true;
}

// All simple cycles in the support of k avoiding f, each in canonical form,
// enumerated smallest-vertex-first.
template <ScalarMode S>
std::vector<Cycle> simple_cycles_avoiding(const MarkovKernel<S>& k, VertexId f) {
    const int n = k.size();
    std::vector<Cycle> out;
    std::vector<VertexId> stack;
    std::vector<char> used(static_cast<size_t>(n), 0);
    const auto dfs = [&](auto&& self, VertexId base, VertexId cur) -> void {
        for (const VertexId nxt : k.neighbors(cur)) {
            if (nxt == f) continue;
            if (nxt == base) {
                out.push_back(make_cycle(stack));
                continue;
            }
            if (nxt <= base || used[static_cast<size_t>(nxt)]) continue;
            used[static_cast<size_t>(nxt)] = 1;
            stack.push_back(nxt);
            self(self, base, nxt);
            stack.pop_back();
            used[static_cast<size_t>(nxt)] = 0;
        }
    };
    for (VertexId base = 0; base < n; ++base) {
        if (base == f) continue;
        stack.assign(1, base);
        used[static_cast<size_t>(base)] = 1;
        dfs(dfs, base, base);
        used[static_cast<size_t>(base)] = 0;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Σ over all sets of vertex-disjoint cycles avoiding f of
// (-1)^{#cycles} ∏ edge weights. Equals det(Id - K^{(f)}).
template <ScalarMode S>
S trivial_signed_sum(const MarkovKernel<S>& k, VertexId f) {
    if (k.size() > kEnumerationGuard)
        throw heap_error("trivial_signed_sum limited to " + std::to_string(kEnumerationGuard) + " vertices");
    const auto cycles = simple_cycles_avoiding(k, f);
    std::vector<uint32_t> masks;
    std::vector<S> weights;
    for (const auto& c : cycles) {
        uint32_t m = 0;
        for (const VertexId v : c.vertices) m |= 1u << v;
        masks.push_back(m);
        weights.push_back(cycle_weight(c, k));
    }
    S total(1);  // the empty set
    const auto rec = [&](auto&& self, size_t i, uint32_t mask, const S& w, int count) -> void {
        for (size_t j = i; j < cycles.size(); ++j) {
            if (masks[j] & mask) continue;
            const S next = w * weights[j];
            total += (count + 1) % 2 == 0 ? next : -next;
            self(self, j + 1, mask | masks[j], next, count + 1);
        }
    };
    rec(rec, 0, 0, S(1), 0);
    return total;
}

// Puts c's edges at the bottom of h (so they become the first edges).
inline HeapCollection prepend_cycle(const Cycle& c, const HeapCollection& h) {
    HeapCollection out = h;
    for (int i = 0; i < c.length(); ++i) {
        auto& stack = out.targets[static_cast<size_t>(c.vertices[static_cast<size_t>(i)])];
        stack.insert(stack.begin(), c.vertices[static_cast<size_t>((i + 1) % c.length())]);
    }
    return out;
}

inline VertexId smallest_nonempty(const HeapCollection& h) {
    for (VertexId u = 0; u < h.n(); ++u)
        if (!h.targets[static_cast<size_t>(u)].empty()) return u;
    return -1;
}

// Visits every heap of cycles avoiding f with at most max_edges edges,
// exactly once. Generation walks the canonical decomposition backwards: a
// candidate cycle prepended to a visited heap is kept iff it is what the
// canonical pop (smallest nonempty vertex, first edges) returns.
template <ScalarMode S>
void for_each_heap_of_cycles(const MarkovKernel<S>& k, VertexId f, int max_edges,
                             const std::function<void(const HeapCollection&)>& visit) {
    if (k.size() > 6) throw heap_error("heap-of-cycles enumeration limited to 6 vertices");
    if (max_edges > 64) throw heap_error("heap-of-cycles enumeration limited to 64 edges");
    const auto cycles = simple_cycles_avoiding(k, f);
    HeapCollection empty(k.size());
    const auto rec = [&](auto&& self, const HeapCollection& h) -> void {
        visit(h);
        for (const auto& c : cycles) {
            if (h.total_edges() + c.length() > max_edges) continue;
            const HeapCollection grown = prepend_cycle(c, h);
            if (pop_cycle(grown, smallest_nonempty(grown)).first == c) self(self, grown);
        }
    };
    rec(rec, empty);
}

// Partial sum of Weight(H) over heaps of cycles avoiding f, up to max_edges
// edges; converges (monotonically in max_edges) to 1 / det(Id - K^{(f)}).
template <ScalarMode S>
S enumerate_heaps_of_cycles(const MarkovKernel<S>& k, VertexId f, int max_edges) {
    S total(0);
    for_each_heap_of_cycles<S>(k, f, max_edges,
                               [&](const HeapCollection& h) { total += heap_weight(h, k); });
    return total;
}

// Cycles of the top-edge functional graph: exactly the cycles whose every
// edge is the last one in its source heap ("no cycle above them").
inline std::vector<Cycle> maximal_cycles(const HeapCollection& h) {
    const int n = h.n();
    std::vector<VertexId> top(static_cast<size_t>(n), -1);
    for (VertexId u = 0; u < n; ++u)
        if (!h.targets[static_cast<size_t>(u)].empty()) top[static_cast<size_t>(u)] = h.targets[static_cast<size_t>(u)].back();
    std::vector<Cycle> out;
    std::vector<char> done(static_cast<size_t>(n), 0);
    for (VertexId s = 0; s < n; ++s) {
        if (done[static_cast<size_t>(s)] || top[static_cast<size_t>(s)] < 0) continue;
        // Follow the functional graph; mark the walk, keep only a fresh cycle.
        std::vector<int> pos(static_cast<size_t>(n), -1);
        std::vector<VertexId> walk;
        VertexId cur = s;
        while (cur >= 0 && !done[static_cast<size_t>(cur)] && pos[static_cast<size_t>(cur)] < 0) {
            pos[static_cast<size_t>(cur)] = static_cast<int>(walk.size());
            walk.push_back(cur);
            cur = top[static_cast<size_t>(cur)];
        }
        if (cur >= 0 && pos[static_cast<size_t>(cur)] >= 0) {
            std::vector<VertexId> cyc(walk.begin() + pos[static_cast<size_t>(cur)], walk.end());
            out.push_back(make_cycle(std::move(cyc)));
        }
        for (const VertexId v : walk) done[static_cast<size_t>(v)] = 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// One step of the sign-reversing involution behind the inversion formula:
// among the cycles of s and the maximal cycles of h disjoint from s, move the
// greatest one to the other component.
inline std::pair<HeapCollection, std::vector<Cycle>> pair_involution(const HeapCollection& h,
                                                                     std::vector<Cycle> s) {
    std::vector<char> in_s(static_cast<size_t>(h.n()), 0);
    for (const auto& c : s)
        for (const VertexId v : c.vertices) in_s[static_cast<size_t>(v)] = 1;

    std::optional<Cycle> best;
    bool best_from_s = false;
    for (const auto& c : s)
        if (!best || *best < c) {
            best = c;
            best_from_s = true;
        }
    for (const auto& c : maximal_cycles(h)) {
        const bool disjoint = std::none_of(c.vertices.begin(), c.vertices.end(),
                                           [&](VertexId v) { return in_s[static_cast<size_t>(v)]; });
        if (disjoint && (!best || *best < c)) {
            best = c;
            best_from_s = false;
        }
    }
    if (!best) throw heap_error("pair_involution has no move on the empty pair");

    HeapCollection h2 = h;
    if (best_from_s) {
        s.erase(std::find(s.begin(), s.end(), *best));
        for (int i = 0; i < best->length(); ++i)
            h2.targets[static_cast<size_t>(best->vertices[static_cast<size_t>(i)])].push_back(
                best->vertices[static_cast<size_t>((i + 1) % best->length())]);
    } else {
        for (const VertexId u : best->vertices) h2.targets[static_cast<size_t>(u)].pop_back();
        s.push_back(*best);
        std::sort(s.begin(), s.end());
    }
    return {std::move(h2), std::move(s)};
}

}  // namespace fetree
