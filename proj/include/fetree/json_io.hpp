// json_io.hpp — JSON serialization of kernels, trees, heaps, golf sequences,
// exact distributions, and sample batches. Vertexes appear as labels in every
// wire format; label order in the kernel file defines the index order.
#pragma once

#include <json.hpp>

#include "fetree/analysis.hpp"
#include "fetree/golf.hpp"
#include "fetree/heaps.hpp"
#include "fetree/kernel.hpp"
#include "fetree/oracle.hpp"
#include "fetree/samplers.hpp"
#include "fetree/tree.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace fetree {

using Json = nlohmann::json;

inline std::string hash_string(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <ScalarMode S>
S scalar_from_string(const std::string& s) {
    if constexpr (std::is_same_v<S, Rational>) {
        return parse_rational(s);
    } else {
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw parse_error("not a number: '" + s + "'");
        }
    }
}

namespace detail {

inline VertexId label_index(const std::vector<std::string>& labels, const std::string& label) {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<VertexId>(i);
    throw parse_error("unknown vertex label '" + label + "'");
}

}  // namespace detail

template <ScalarMode S>
Json kernel_to_json(const MarkovKernel<S>& k) {
    Json rows = Json::array();
    for (VertexId a = 0; a < k.size(); ++a) {
        Json row = Json::array();
        for (VertexId b = 0; b < k.size(); ++b) row.push_back(format_scalar(k.at(a, b)));
        rows.push_back(std::move(row));
    }
    return Json{{"labels", k.labels()}, {"rows", std::move(rows)}};
}

// Canonical tree key: root label, then the parent label of every vertex in
// index order ("-" marks the root / absent slots).
inline std::string tree_key(const RootedTree& t, const std::vector<std::string>& labels) {
    std::string key = labels[static_cast<size_t>(t.root)] + "|";
    for (VertexId v = 0; v < t.n(); ++v) {
        if (v > 0) key += ",";
        const VertexId p = t.parent[static_cast<size_t>(v)];
        key += p < 0 ? "-" : labels[static_cast<size_t>(p)];
    }
    return key;
}

inline RootedTree tree_from_key(const std::string& key, const std::vector<std::string>& labels) {
    const auto bar = key.find('|');
    if (bar == std::string::npos) throw parse_error("malformed tree key '" + key + "'");
    RootedTree t{detail::label_index(labels, key.substr(0, bar)),
                 std::vector<VertexId>(labels.size(), -1)};
    size_t v = 0;
    size_t pos = bar + 1;
    while (pos <= key.size()) {
        auto comma = key.find(',', pos);
        if (comma == std::string::npos) comma = key.size();
        if (v >= labels.size()) throw parse_error("malformed tree key '" + key + "'");
        const std::string cell = key.substr(pos, comma - pos);
        if (cell != "-") t.parent[v] = detail::label_index(labels, cell);
        ++v;
        pos = comma + 1;
    }
    if (v != labels.size()) throw parse_error("malformed tree key '" + key + "'");
    return t;
}

inline Json tree_to_json(const RootedTree& t, const std::vector<std::string>& labels) {
    Json parents = Json::object();
    for (VertexId v = 0; v < t.n(); ++v) {
        const VertexId p = t.parent[static_cast<size_t>(v)];
        if (p >= 0) parents[labels[static_cast<size_t>(v)]] = labels[static_cast<size_t>(p)];
    }
    return Json{{"root", labels[static_cast<size_t>(t.root)]}, {"parents", std::move(parents)}};
}

inline RootedTree tree_from_json(const Json& j, const std::vector<std::string>& labels) {
    if (!j.is_object() || !j.contains("root") || !j.contains("parents"))
        throw parse_error("tree JSON needs 'root' and 'parents'");
    RootedTree t{detail::label_index(labels, j["root"].get<std::string>()),
                 std::vector<VertexId>(labels.size(), -1)};
    for (const auto& [child, parent] : j["parents"].items())
        t.parent[static_cast<size_t>(detail::label_index(labels, child))] =
            detail::label_index(labels, parent.get<std::string>());
    if (t.parent[static_cast<size_t>(t.root)] >= 0) throw parse_error("tree root cannot have a parent");
    return t;
}

inline Json heap_to_json(const HeapCollection& h, const std::vector<std::string>& labels) {
    Json obj = Json::object();
    for (VertexId u = 0; u < h.n(); ++u) {
        Json arr = Json::array();
        for (const VertexId v : h.targets[static_cast<size_t>(u)]) arr.push_back(labels[static_cast<size_t>(v)]);
        obj[labels[static_cast<size_t>(u)]] = std::move(arr);
    }
    return obj;
}

inline Json path_to_json(const Path& p, const std::vector<std::string>& labels) {
    Json arr = Json::array();
    for (const VertexId v : p.vertices) arr.push_back(labels[static_cast<size_t>(v)]);
    return arr;
}

inline Json golf_to_json(const GolfSequence& seq, const GolfConfig& cfg,
                         const std::vector<std::string>& labels) {
    Json holes = Json::array();
    for (const VertexId h : cfg.holes) holes.push_back(labels[static_cast<size_t>(h)]);
    Json starts = Json::array();
    for (const VertexId s : cfg.starts) starts.push_back(labels[static_cast<size_t>(s)]);
    Json paths = Json::array();
    for (const Path& p : seq.paths) paths.push_back(path_to_json(p, labels));
    Json out{{"holes", std::move(holes)}, {"starts", std::move(starts)}, {"paths", std::move(paths)}};
    out["free"] = static_cast<int>(cfg.holes.size()) == cfg.nb() + 1
                      ? Json(labels[static_cast<size_t>(free_hole(seq, cfg))])
                      : Json(nullptr);
    return out;
}

template <ScalarMode S>
Json distribution_to_json(const ExactDistribution<S>& d, const std::vector<std::string>& labels) {
    Json trees = Json::array();
    for (const auto& [t, p] : d.probs)
        trees.push_back(Json{{"parents", tree_to_json(t, labels)["parents"]}, {"prob", format_scalar(p)}});
    return Json{{"root", d.root < 0 ? Json(nullptr) : Json(labels[static_cast<size_t>(d.root)])},
                {"trees", std::move(trees)},
                {"normalizer", format_scalar(d.normalizer)}};
}

template <ScalarMode S>
ExactDistribution<S> distribution_from_json(const Json& j, const std::vector<std::string>& labels) {
    if (!j.is_object() || !j.contains("root") || !j.contains("trees"))
        throw parse_error("distribution JSON needs 'root' and 'trees'");
    if (j["root"].is_null()) throw parse_error("cannot load a distribution without a root");
    ExactDistribution<S> d;
    d.root = detail::label_index(labels, j["root"].get<std::string>());
    d.normalizer = j.contains("normalizer") ? scalar_from_string<S>(j["normalizer"].get<std::string>()) : S(1);
    for (const auto& entry : j["trees"]) {
        const RootedTree t = tree_from_json(
            Json{{"root", j["root"]}, {"parents", entry.at("parents")}}, labels);
        d.probs[t] = scalar_from_string<S>(entry.at("prob").get<std::string>());
    }
    return d;
}

inline Json batch_to_json(const SampleBatch& b, const std::vector<std::string>& labels) {
    Json counts = Json::object();
    for (const auto& [t, c] : b.counts) counts[tree_key(t, labels)] = c;
    return Json{{"samples", b.total}, {"seed", b.seed}, {"tree_counts", std::move(counts)}};
}

inline SampleBatch batch_from_json(const Json& j, const std::vector<std::string>& labels) {
    if (!j.is_object() || !j.contains("tree_counts")) throw parse_error("batch JSON needs 'tree_counts'");
    SampleBatch b;
    b.seed = j.value("seed", uint64_t{0});
    for (const auto& [key, count] : j["tree_counts"].items()) {
        const long long c = count.get<long long>();
        if (c < 0) throw parse_error("negative count in batch JSON");
        b.counts[tree_from_key(key, labels)] = c;
        b.total += c;
    }
    return b;
}

template <ScalarMode S>
Json mtt_to_json(const MttReport<S>& r) {
    return Json{{"det_M", format_scalar(r.det_m)},
                {"det_Mrev", format_scalar(r.det_mrev)},
                {"tree_sum_M", format_scalar(r.tree_sum_m)},
                {"tree_sum_Mrev", format_scalar(r.tree_sum_mrev)},
                {"pass", r.pass}};
}

}  // namespace fetree
