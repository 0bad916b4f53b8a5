// analysis.hpp — stationary distribution, time reversal, principal-minor
// determinants, and the brute-force spanning-tree ensemble.
#pragma once

#include "fetree/kernel.hpp"
#include "fetree/tree.hpp"

#include <numeric>
#include <utility>
#include <vector>

namespace fetree {

struct analysis_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
using Matrix = std::vector<std::vector<T>>;

// Gaussian elimination with pivoting; solves A x = b in place.
template <ScalarMode S>
std::vector<S> solve_linear(Matrix<S> a, std::vector<S> b) {
    const int n = static_cast<int>(a.size());
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        if constexpr (std::same_as<S, double>) {
            double best = 0.0;
            for (int r = col; r < n; ++r)
                if (std::abs(a[r][col]) > best) {
                    best = std::abs(a[r][col]);
                    pivot = r;
                }
        } else {
            for (int r = col; r < n && pivot < 0; ++r)
                if (a[r][col] != S(0)) pivot = r;
        }
        if (pivot < 0 || a[pivot][col] == S(0)) throw analysis_error("singular linear system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            if (a[r][col] == S(0)) continue;
            const S f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<S> x(static_cast<size_t>(n), S(0));
    for (int r = n - 1; r >= 0; --r) {
        S acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

// Fraction-free determinant: rows are scaled to integers, then Bareiss
// elimination keeps every intermediate value an exact integer.
inline Rational determinant(Matrix<Rational> a) {
    const int n = static_cast<int>(a.size());
    if (n == 0) return Rational(1);
    Matrix<BigInt> b(static_cast<size_t>(n), std::vector<BigInt>(static_cast<size_t>(n)));
    BigInt scale = 1;
    for (int r = 0; r < n; ++r) {
        BigInt common = 1;
        for (int c = 0; c < n; ++c) common = lcm(common, denominator(a[r][c]));
        for (int c = 0; c < n; ++c) b[r][c] = numerator(a[r][c]) * (common / denominator(a[r][c]));
        scale *= common;
    }
    int sign = 1;
    BigInt prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (b[k][k] == 0) {
            int swap_row = -1;
            for (int r = k + 1; r < n && swap_row < 0; ++r)
                if (b[r][k] != 0) swap_row = r;
            if (swap_row < 0) return Rational(0);
            std::swap(b[k], b[swap_row]);
            sign = -sign;
        }
        for (int r = k + 1; r < n; ++r)
            for (int c = k + 1; c < n; ++c)
                b[r][c] = (b[r][c] * b[k][k] - b[r][k] * b[k][c]) / prev;
        prev = b[k][k];
    }
    return make_rational(sign * b[n - 1][n - 1], scale);
}

inline double determinant(Matrix<double> a) {
    const int n = static_cast<int>(a.size());
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int r = k + 1; r < n; ++r)
            if (std::abs(a[r][k]) > std::abs(a[pivot][k])) pivot = r;
        if (a[pivot][k] == 0.0) return 0.0;
        if (pivot != k) {
            std::swap(a[k], a[pivot]);
            det = -det;
        }
        det *= a[k][k];
        for (int r = k + 1; r < n; ++r) {
            const double f = a[r][k] / a[k][k];
            for (int c = k; c < n; ++c) a[r][c] -= f * a[k][c];
        }
    }
    return det;
}

}  // namespace detail

// Solves the balance system directly: take Id - M, replace the last column by
// all-ones, and solve rho * Q = (0, ..., 0, 1).
template <ScalarMode S>
Distribution<S> stationary_distribution(const MarkovKernel<S>& m) {
    const int n = m.size();
    // Transpose so the row-vector equation becomes an ordinary solve.
    detail::Matrix<S> qt(static_cast<size_t>(n), std::vector<S>(static_cast<size_t>(n)));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const S entry = (r == c ? S(1) : S(0)) - m.at(r, c);
            qt[c][r] = c == n - 1 ? S(1) : entry;
        }
    std::vector<S> rhs(static_cast<size_t>(n), S(0));
    rhs[static_cast<size_t>(n) - 1] = S(1);
    auto rho = detail::solve_linear(std::move(qt), std::move(rhs));
    for (const S& p : rho)
        if (!(p > S(0))) throw analysis_error("stationary distribution has a non-positive entry");
    return Distribution<S>{std::move(rho)};
}

template <ScalarMode S>
MarkovKernel<S> reversed_kernel(const MarkovKernel<S>& m, const Distribution<S>& rho) {
    const int n = m.size();
    detail::Matrix<S> rows(static_cast<size_t>(n), std::vector<S>(static_cast<size_t>(n)));
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) rows[x][y] = rho[y] * m.at(y, x) / rho[x];
    return MarkovKernel<S>(m.labels(), std::move(rows));
}

template <ScalarMode S>
MarkovKernel<S> reversed_kernel(const MarkovKernel<S>& m) {
    return reversed_kernel(m, stationary_distribution(m));
}

template <ScalarMode S>
bool is_reversible(const MarkovKernel<S>& m) {
    const auto rho = stationary_distribution(m);
    for (int a = 0; a < m.size(); ++a)
        for (int b = a + 1; b < m.size(); ++b) {
            const S lhs = rho[a] * m.at(a, b);
            const S rhs = rho[b] * m.at(b, a);
            if constexpr (std::same_as<S, double>) {
                const double mag = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
                if (std::abs(lhs - rhs) > 1e-10 * mag) return false;
            } else {
                if (lhs != rhs) return false;
            }
        }
    return true;
}

// det(Id - M^{(r)}), the determinant of Id minus M with row and column r
// removed. Strictly positive for any valid kernel.
template <ScalarMode S>
S principal_minor_det(const MarkovKernel<S>& m, VertexId r) {
    const int n = m.size();
    detail::Matrix<S> a;
    for (int i = 0; i < n; ++i) {
        if (i == r) continue;
        std::vector<S> row;
        for (int j = 0; j < n; ++j) {
            if (j == r) continue;
            row.push_back((i == j ? S(1) : S(0)) - m.at(i, j));
        }
        a.push_back(std::move(row));
    }
    return detail::determinant(std::move(a));
}

template <ScalarMode S>
S tree_weight(const RootedTree& t, const MarkovKernel<S>& k) {
    S w(1);
    for (const auto& [child, parent] : t.edges()) {
        if (!k.supports(child, parent))
            throw analysis_error("tree edge (" + k.label(child) + "," + k.label(parent) +
                                 ") is not in the kernel support");
        w *= k.at(child, parent);
    }
    return w;
}

template <ScalarMode S>
struct TreeEnsemble {
    VertexId root = 0;
    std::vector<RootedTree> trees;
    std::vector<S> weights;
    S total = S(0);
};

inline constexpr int kEnumerationGuard = 8;

// All spanning trees rooted at r whose edges lie in the support of k, with
// weights ∏ k[u][parent(u)]. Brute force over parent maps; guarded to n ≤ 8.
template <ScalarMode S>
TreeEnsemble<S> enumerate_rooted_spanning_trees(const MarkovKernel<S>& k, VertexId r) {
    const int n = k.size();
    if (n > kEnumerationGuard)
        throw analysis_error("tree enumeration limited to " + std::to_string(kEnumerationGuard) +
                             " vertices, kernel has " + std::to_string(n));
    std::vector<std::vector<VertexId>> choices(static_cast<size_t>(n));
    std::vector<VertexId> others;
    for (VertexId v = 0; v < n; ++v) {
        if (v == r) continue;
        others.push_back(v);
        for (const VertexId u : k.neighbors(v))
            if (u != v) choices[static_cast<size_t>(v)].push_back(u);
    }
    TreeEnsemble<S> out;
    out.root = r;
    RootedTree t = single_vertex_tree(r, n);
    const auto recurse = [&](auto&& self, size_t i) -> void {
        if (i == others.size()) {
            if (!is_valid_tree(t)) return;
            const S w = tree_weight(t, k);
            out.trees.push_back(t);
            out.weights.push_back(w);
            out.total += w;
            return;
        }
        const VertexId v = others[i];
        for (const VertexId u : choices[static_cast<size_t>(v)]) {
            t.parent[static_cast<size_t>(v)] = u;
            self(self, i + 1);
        }
        t.parent[static_cast<size_t>(v)] = -1;
    };
    recurse(recurse, 0);
    return out;
}

template <ScalarMode S>
struct MttReport {
    S det_m;
    S det_mrev;
    S tree_sum_m;
    S tree_sum_mrev;
    bool pass = false;
};

// Checks det(Id−M^{(r)}) = Σ_t ∏ M_e, the same for M←, and that the two
// determinants agree.
template <ScalarMode S>
MttReport<S> matrix_tree_check(const MarkovKernel<S>& m, VertexId r) {
    const MarkovKernel<S> mrev = reversed_kernel(m);
    MttReport<S> rep{principal_minor_det(m, r), principal_minor_det(mrev, r),
                     enumerate_rooted_spanning_trees(m, r).total,
                     enumerate_rooted_spanning_trees(mrev, r).total, false};
    rep.pass = approx_equal(rep.det_m, rep.tree_sum_m) && approx_equal(rep.det_mrev, rep.tree_sum_mrev) &&
               approx_equal(rep.det_m, rep.det_mrev);
    return rep;
}

}  // namespace fetree
