// path.hpp — finite walks on a kernel's support graph.
#pragma once

#include "fetree/kernel.hpp"
#include "fetree/scalar.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace fetree {

// A walk w_0, w_1, ..., w_m stored by vertex index. Steps are the pairs
// (w_i, w_{i+1}); a path with a single vertex has no steps.
struct Path {
    std::vector<VertexId> vertices;

    int steps() const { return static_cast<int>(vertices.size()) - 1; }
    VertexId front() const { return vertices.front(); }
    VertexId back() const { return vertices.back(); }

    bool operator==(const Path&) const = default;
};

inline Path reverse(const Path& p) {
    Path out = p;
    std::reverse(out.vertices.begin(), out.vertices.end());
    return out;
}

// Index of the first position k such that w_0..w_k covers all n vertices,
// or nullopt if the path never covers.
inline std::optional<int> cover_index(const Path& p, int n) {
    std::vector<char> seen(static_cast<size_t>(n), 0);
    int distinct = 0;
    for (size_t k = 0; k < p.vertices.size(); ++k) {
        const auto v = static_cast<size_t>(p.vertices[k]);
        if (!seen[v]) {
            seen[v] = 1;
            if (++distinct == n) return static_cast<int>(k);
        }
    }
    return std::nullopt;
}

inline bool covers(const Path& p, int n) { return cover_index(p, n).has_value(); }

// The shortest covering prefix of p, or nullopt if p never covers.
inline std::optional<Path> cover_prefix(const Path& p, int n) {
    const auto k = cover_index(p, n);
    if (!k) return std::nullopt;
    return Path{std::vector<VertexId>(p.vertices.begin(), p.vertices.begin() + *k + 1)};
}

enum class StepWeight {
    forward,   // product of M[w_i][w_{i+1}]
    reversed,  // product of M[w_{i+1}][w_i]
};

template <ScalarMode S>
S path_weight(const Path& p, const MarkovKernel<S>& kernel, StepWeight mode = StepWeight::forward) {
    S w(1);
    for (int i = 0; i < p.steps(); ++i) {
        const VertexId a = p.vertices[static_cast<size_t>(i)];
        const VertexId b = p.vertices[static_cast<size_t>(i) + 1];
        w *= mode == StepWeight::forward ? kernel.at(a, b) : kernel.at(b, a);
    }
    return w;
}

}  // namespace fetree
