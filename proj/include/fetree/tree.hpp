// tree.hpp — rooted trees with edges directed toward the root, plus the two
// tree-extraction procedures (first-entrance and last-exit).
#pragma once

#include "fetree/path.hpp"

#include <compare>
#include <stdexcept>
#include <vector>

namespace fetree {

struct tree_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// parent[v] == -1 means v has no parent: either v is the root or v is not in
// the tree at all (trees extracted from non-covering walks live on the
// visited set only). A vertex is in the tree iff it is the root or has a
// parent.
struct RootedTree {
    VertexId root = 0;
    std::vector<VertexId> parent;

    int n() const { return static_cast<int>(parent.size()); }

    bool contains(VertexId v) const { return v == root || parent[static_cast<size_t>(v)] >= 0; }

    int vertex_count() const {
        int c = 0;
        for (VertexId v = 0; v < n(); ++v) c += contains(v);
        return c;
    }

    int edge_count() const { return vertex_count() - 1; }

    bool spanning() const { return vertex_count() == n(); }

    // Edges (child, parent), child ascending.
    std::vector<std::pair<VertexId, VertexId>> edges() const {
        std::vector<std::pair<VertexId, VertexId>> out;
        for (VertexId v = 0; v < n(); ++v)
            if (v != root && parent[static_cast<size_t>(v)] >= 0)
                out.emplace_back(v, parent[static_cast<size_t>(v)]);
        return out;
    }

    bool operator==(const RootedTree&) const = default;
    auto operator<=>(const RootedTree&) const = default;
};

inline RootedTree single_vertex_tree(VertexId root, int n) {
    return RootedTree{root, std::vector<VertexId>(static_cast<size_t>(n), -1)};
}

// Checks acyclicity: every in-tree vertex reaches the root by parent links.
inline bool is_valid_tree(const RootedTree& t) {
    const int n = t.n();
    if (t.root < 0 || t.root >= n || t.parent[static_cast<size_t>(t.root)] != -1) return false;
    for (VertexId v = 0; v < n; ++v) {
        if (!t.contains(v)) continue;
        VertexId u = v;
        for (int hops = 0; u != t.root; ++hops) {
            if (hops > n) return false;
            u = t.parent[static_cast<size_t>(u)];
            if (u < 0 || u >= n) return false;
        }
    }
    return true;
}

inline std::vector<int> child_counts(const RootedTree& t) {
    std::vector<int> c(static_cast<size_t>(t.n()), 0);
    for (const auto& [child, parent] : t.edges()) ++c[static_cast<size_t>(parent)];
    return c;
}

// Leaves: in-tree vertices with no children. Internal: the in-tree rest.
inline std::vector<VertexId> leaves(const RootedTree& t) {
    const auto c = child_counts(t);
    std::vector<VertexId> out;
    for (VertexId v = 0; v < t.n(); ++v)
        if (t.contains(v) && c[static_cast<size_t>(v)] == 0) out.push_back(v);
    return out;
}

inline std::vector<VertexId> internal_vertices(const RootedTree& t) {
    const auto c = child_counts(t);
    std::vector<VertexId> out;
    for (VertexId v = 0; v < t.n(); ++v)
        if (t.contains(v) && c[static_cast<size_t>(v)] > 0) out.push_back(v);
    return out;
}

// Re-points the links along the path from the new root to the old one,
// preserving the undirected shape.
inline RootedTree reroot(const RootedTree& t, VertexId root) {
    if (root < 0 || root >= t.n() || !t.contains(root)) throw tree_error("reroot: vertex not in the tree");
    RootedTree out = t;
    VertexId v = root;
    VertexId below = -1;
    while (v != -1) {
        const VertexId up = v == t.root ? -1 : t.parent[static_cast<size_t>(v)];
        out.parent[static_cast<size_t>(v)] = below;
        below = v;
        v = up;
    }
    out.root = root;
    return out;
}

// Root w_0; each vertex first entered at step j gets parent w_{j-1} (the
// first-entrance step reversed). Defined on the visited set; with strict set,
// a walk that does not cover all n vertices is an error.
inline RootedTree first_entrance_tree(const Path& p, int n, bool strict = false) {
    if (p.vertices.empty()) throw tree_error("first_entrance_tree: empty path");
    RootedTree t = single_vertex_tree(p.front(), n);
    std::vector<char> seen(static_cast<size_t>(n), 0);
    seen[static_cast<size_t>(p.front())] = 1;
    for (int i = 0; i < p.steps(); ++i) {
        const VertexId v = p.vertices[static_cast<size_t>(i) + 1];
        if (!seen[static_cast<size_t>(v)]) {
            seen[static_cast<size_t>(v)] = 1;
            t.parent[static_cast<size_t>(v)] = p.vertices[static_cast<size_t>(i)];
        }
    }
    if (strict && !t.spanning()) throw tree_error("first_entrance_tree: path does not cover all vertices");
    return t;
}

// Incremental construction: start at the single-vertex tree at z_0; each step
// z_k → z_{k+1} adds the edge (z_k, z_{k+1}) and deletes the outgoing edge of
// z_{k+1}; the result is rooted at the endpoint z_m.
inline RootedTree last_exit_tree(const Path& p, int n, bool strict = false) {
    if (p.vertices.empty()) throw tree_error("last_exit_tree: empty path");
    RootedTree t = single_vertex_tree(p.front(), n);
    for (int i = 0; i < p.steps(); ++i) {
        const VertexId a = p.vertices[static_cast<size_t>(i)];
        const VertexId b = p.vertices[static_cast<size_t>(i) + 1];
        t.parent[static_cast<size_t>(a)] = b;
        t.parent[static_cast<size_t>(b)] = -1;
        t.root = b;
    }
    if (strict && !t.spanning()) throw tree_error("last_exit_tree: path does not cover all vertices");
    return t;
}

}  // namespace fetree
