// kernel.hpp — Markov kernels positive on an undirected support graph.
//
// Kernel files are JSON: {"labels": ["1","2","3"], "rows": [["0","1/3","2/3"], ...]}.
// Entries written as "p/q" or integer strings load in exact (Rational) mode;
// any decimal entry switches the whole file to double mode. Label order
// defines vertex indices and every canonical order downstream.
#pragma once

#include <json.hpp>

#include "fetree/scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fetree {

using VertexId = int;

struct kernel_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <ScalarMode S>
struct Distribution {
    std::vector<S> probs;

    int size() const { return static_cast<int>(probs.size()); }
    const S& operator[](VertexId v) const { return probs[static_cast<size_t>(v)]; }
};

// Row-stochastic kernel with symmetric support (M[a][b] > 0 iff M[b][a] > 0,
// self-loops allowed) whose support graph is connected. Immutable after
// construction; safe to share across threads.
template <ScalarMode S>
class MarkovKernel {
public:
    MarkovKernel(std::vector<std::string> labels, std::vector<std::vector<S>> rows)
        : labels_(std::move(labels)), rows_(std::move(rows)) {
        validate();
    }

    int size() const { return static_cast<int>(labels_.size()); }
    const S& at(VertexId a, VertexId b) const { return rows_[static_cast<size_t>(a)][static_cast<size_t>(b)]; }
    const std::vector<S>& row(VertexId a) const { return rows_[static_cast<size_t>(a)]; }
    bool supports(VertexId a, VertexId b) const { return at(a, b) > S(0); }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(VertexId v) const { return labels_[static_cast<size_t>(v)]; }

    VertexId index_of(const std::string& label) const {
        const auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw kernel_error("unknown vertex label '" + label + "'");
        return static_cast<VertexId>(it - labels_.begin());
    }

    // Neighbors of a in the support graph, ascending, self included if M[a][a] > 0.
    std::vector<VertexId> neighbors(VertexId a) const {
        std::vector<VertexId> out;
        for (VertexId b = 0; b < size(); ++b)
            if (supports(a, b)) out.push_back(b);
        return out;
    }

private:
    void validate() const {
        const int n = size();
        if (n < 1) throw kernel_error("kernel needs at least one vertex");
        if (rows_.size() != labels_.size()) throw kernel_error("label/row count mismatch");
        for (int a = 0; a < n; ++a) {
            if (static_cast<int>(rows_[a].size()) != n)
                throw kernel_error("row " + std::to_string(a + 1) + " has wrong length");
            S sum(0);
            for (int b = 0; b < n; ++b) {
                if (rows_[a][b] < S(0))
                    throw kernel_error("negative entry at (" + std::to_string(a + 1) + "," +
                                       std::to_string(b + 1) + ")");
                sum += rows_[a][b];
            }
            if (!approx_equal(sum, S(1)))
                throw kernel_error("row " + std::to_string(a + 1) + " sums to " +
                                   format_scalar(sum) + ", expected 1");
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if ((rows_[a][b] > S(0)) != (rows_[b][a] > S(0))) {
                    const int azero = rows_[a][b] > S(0) ? b : a;
                    const int bzero = azero == a ? b : a;
                    throw kernel_error("support asymmetry at (" + std::to_string(azero + 1) + "," +
                                       std::to_string(bzero + 1) + "): entry is zero but its mirror is not");
                }
        // Connectivity of the support graph (BFS from vertex 0).
        std::vector<char> seen(static_cast<size_t>(n), 0);
        std::vector<VertexId> queue{0};
        seen[0] = 1;
        while (!queue.empty()) {
            const VertexId a = queue.back();
            queue.pop_back();
            for (VertexId b = 0; b < n; ++b)
                if (!seen[static_cast<size_t>(b)] && rows_[a][b] > S(0)) {
                    seen[static_cast<size_t>(b)] = 1;
                    queue.push_back(b);
                }
        }
        for (int v = 0; v < n; ++v)
            if (!seen[static_cast<size_t>(v)])
                throw kernel_error("support graph is disconnected: vertex " + std::to_string(v + 1) +
                                   " unreachable from vertex 1");
    }

    std::vector<std::string> labels_;
    std::vector<std::vector<S>> rows_;
};

using ExactKernel = MarkovKernel<Rational>;
using FloatKernel = MarkovKernel<double>;
using AnyKernel = std::variant<ExactKernel, FloatKernel>;

inline FloatKernel to_float(const ExactKernel& k) {
    const int n = k.size();
    std::vector<std::vector<double>> rows(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            rows[a][b] = to_double(k.at(a, b));
            if (k.supports(a, b) && rows[a][b] <= 0.0)
                throw kernel_error("entry underflows to zero in float conversion");
        }
    return FloatKernel(k.labels(), std::move(rows));
}

namespace detail {

inline bool looks_rational(std::string_view s) {
    return s.find('.') == std::string_view::npos && s.find('e') == std::string_view::npos &&
           s.find('E') == std::string_view::npos;
}

}  // namespace detail

// Parses a kernel file. Mode is decided by the entries: all-rational strings
// give an ExactKernel, anything decimal gives a FloatKernel.
inline AnyKernel parse_kernel(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("kernel file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("labels") || !doc.contains("rows"))
        throw parse_error("kernel file needs 'labels' and 'rows'");

    std::vector<std::string> labels;
    for (const auto& l : doc["labels"]) labels.push_back(l.get<std::string>());

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : doc["rows"]) {
        std::vector<std::string> r;
        for (const auto& cell : row) {
            if (cell.is_string()) r.push_back(cell.get<std::string>());
            else if (cell.is_number()) r.push_back(cell.dump());
            else throw parse_error("kernel entries must be strings or numbers");
        }
        cells.push_back(std::move(r));
    }

    bool exact = true;
    for (const auto& row : cells)
        for (const auto& cell : row)
            exact = exact && detail::looks_rational(cell);

    if (exact) {
        std::vector<std::vector<Rational>> rows;
        for (const auto& row : cells) {
            std::vector<Rational> r;
            for (const auto& cell : row) r.push_back(parse_rational(cell));
            rows.push_back(std::move(r));
        }
        return ExactKernel(std::move(labels), std::move(rows));
    }
    std::vector<std::vector<double>> rows;
    for (const auto& row : cells) {
        std::vector<double> r;
        for (const auto& cell : row) {
            try {
                r.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw parse_error("not a number: '" + cell + "'");
            }
        }
        rows.push_back(std::move(r));
    }
    return FloatKernel(std::move(labels), std::move(rows));
}

inline uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Content hash of a kernel file: FNV-1a over the canonical (sorted-key,
// compact) JSON dump, so formatting differences do not change identity.
inline uint64_t kernel_file_hash(std::string_view text) {
    return fnv1a64(nlohmann::json::parse(text).dump());
}

}  // namespace fetree
