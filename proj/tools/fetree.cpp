// fetree — command-line front end: spanning-tree samplers, exact oracles,
// kernel analysis, and the heap/golf decompositions, all emitting JSON.
//
// Exit codes: 0 success, 1 validation failure, 2 a verification subcommand
// found a violation, 3 I/O failure.
#include <CLI11.hpp>

#include "fetree/json_io.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace fetree;

struct cli_failure {
    int code;
    std::string message;
};

struct check_failed {};  // verification subcommand found a violation

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cli_failure{3, "cannot open '" + path + "' for reading"};
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw cli_failure{3, "failed while reading '" + path + "'"};
    return std::move(buf).str();
}

void write_output(const std::string& path, const Json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cli_failure{3, "cannot open '" + path + "' for writing"};
    out << text;
    if (!out) throw cli_failure{3, "failed while writing '" + path + "'"};
}

Json parse_json_file(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::exception& e) {
        throw cli_failure{1, "'" + path + "' is not valid JSON: " + e.what()};
    }
}

enum class Mode { automatic, exact, floating };

struct KernelFile {
    AnyKernel kernel;
    uint64_t hash = 0;
};

// Loads and validates a kernel file. `sampling` picks the float default;
// explicit --exact/--float flags override it.
KernelFile load_kernel(const std::string& path, Mode mode, bool sampling) {
    const std::string text = read_file(path);
    KernelFile kf{parse_kernel(text), kernel_file_hash(text)};
    const bool is_exact = std::holds_alternative<ExactKernel>(kf.kernel);
    if (mode == Mode::exact && !is_exact)
        throw cli_failure{1, "--exact requires rational kernel entries ('p/q'), got decimals"};
    if (is_exact && (mode == Mode::floating || (mode == Mode::automatic && sampling)))
        kf.kernel = to_float(std::get<ExactKernel>(kf.kernel));
    return kf;
}

template <class K>
const std::vector<std::string>& labels_of(const K& kf) {
    return std::visit([](const auto& k) -> const std::vector<std::string>& { return k.labels(); }, kf.kernel);
}

// Adds the --exact/--float pair and returns a getter for the chosen mode.
std::function<Mode()> add_mode_flags(CLI::App* sub) {
    auto exact = std::make_shared<bool>(false);
    auto floating = std::make_shared<bool>(false);
    sub->add_flag("--exact", *exact, "force exact rational arithmetic");
    sub->add_flag("--float", *floating, "force double arithmetic")->excludes("--exact");
    return [exact, floating] {
        if (*exact) return Mode::exact;
        if (*floating) return Mode::floating;
        return Mode::automatic;
    };
}

// ---------------------------------------------------------------- handlers

template <ScalarMode S>
Json do_stationary(const MarkovKernel<S>& k) {
    const auto rho = stationary_distribution(k);
    Json arr = Json::array();
    for (VertexId v = 0; v < k.size(); ++v) arr.push_back(format_scalar(rho[v]));
    return Json{{"labels", k.labels()}, {"rho", std::move(arr)}};
}

template <ScalarMode S>
Json do_reverse(const MarkovKernel<S>& k) {
    return kernel_to_json(reversed_kernel(k));
}

template <ScalarMode S>
Json do_tree_weight(const MarkovKernel<S>& k, const Json& tree_doc, bool reversed) {
    const RootedTree t = tree_from_json(tree_doc, k.labels());
    const S w = reversed ? tree_weight(t, reversed_kernel(k)) : tree_weight(t, k);
    return Json{{"tree", tree_key(t, k.labels())}, {"reversed", reversed}, {"weight", format_scalar(w)}};
}

template <ScalarMode S>
Json do_mtt_check(const MarkovKernel<S>& k, const std::string& root) {
    const auto rep = matrix_tree_check(k, k.index_of(root));
    Json out = mtt_to_json(rep);
    out["root"] = root;
    if (!rep.pass) throw check_failed{};
    return out;
}

template <ScalarMode S>
Json do_sample_ab(const AnyKernel& original, const MarkovKernel<S>& k, const std::string& root,
                  bool stationary, long long samples, uint64_t seed, int workers) {
    SampleBatch batch;
    if (stationary) {
        // The start law comes from the pre-conversion kernel so that exact
        // kernel files get an exactly computed stationary distribution.
        std::visit(
            [&](const auto& orig) {
                const auto rho = stationary_distribution(orig);
                batch = run_batch(
                    seed, samples, [&](RandomSource& rng) { return sample_fet_stationary(k, rho, rng); },
                    workers);
            },
            original);
    } else {
        const VertexId r = k.index_of(root);
        batch = run_batch(seed, samples, [&](RandomSource& rng) { return sample_fet(k, r, rng); }, workers);
    }
    Json out = batch_to_json(batch, k.labels());
    out["mode"] = stationary ? "stationary" : "fixed-root";
    if (!stationary) out["root"] = root;
    return out;
}

template <ScalarMode S>
Json do_sample_wilson(const MarkovKernel<S>& k, const std::string& root, bool reversed, long long samples,
                      uint64_t seed, int workers) {
    const MarkovKernel<S> walk_kernel = reversed ? reversed_kernel(k) : k;
    const VertexId r = k.index_of(root);
    const auto batch =
        run_batch(seed, samples, [&](RandomSource& rng) { return wilson_sample(walk_kernel, r, rng); }, workers);
    Json out = batch_to_json(batch, k.labels());
    out["mode"] = "wilson";
    out["root"] = root;
    out["reversed"] = reversed;
    return out;
}

template <ScalarMode S>
Json do_exact_dist(const MarkovKernel<S>& k, const std::string& root, const std::string& method) {
    const VertexId r = k.index_of(root);
    const auto dist = method == "dp" ? exact_fet_distribution(k, r) : theorem_distribution(k, r);
    Json out = distribution_to_json(dist, k.labels());
    out["method"] = method;
    return out;
}

template <ScalarMode S>
Json do_compare(const std::vector<std::string>& labels, const Json& expected_doc, const Json& observed_doc,
                double threshold) {
    const auto expected = distribution_from_json<S>(expected_doc, labels);
    ComparisonReport<S> rep;
    if (observed_doc.contains("tree_counts"))
        rep = compare(expected, batch_from_json(observed_doc, labels));
    else
        rep = compare(expected, distribution_from_json<S>(observed_doc, labels));

    Json trees = Json::array();
    for (const auto& [t, row] : rep.table)
        trees.push_back(
            Json{{"tree", tree_key(t, labels)}, {"expected", row.first}, {"observed", row.second}});
    Json out{{"tv", rep.tv},
             {"max_abs_diff", format_scalar(rep.max_abs_diff)},
             {"threshold", threshold},
             {"trees", std::move(trees)}};
    out["chi_square"] = rep.chi ? Json{{"statistic", rep.chi->statistic},
                                       {"dof", rep.chi->dof},
                                       {"p_value", rep.chi->p_value}}
                                : Json(nullptr);
    const bool pass = rep.tv <= threshold;
    out["pass"] = pass;
    if (!pass) throw check_failed{};
    return out;
}

bool all_probs_rational(const Json& doc) {
    if (!doc.contains("trees")) return true;
    for (const auto& entry : doc["trees"])
        if (entry.contains("prob") && !detail::looks_rational(entry["prob"].get<std::string>()))
            return false;
    return true;
}

template <ScalarMode S>
Json do_heap_decompose(const MarkovKernel<S>& k, const std::string& walk_csv) {
    Path p;
    std::stringstream ss(walk_csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) p.vertices.push_back(k.index_of(cell));
    if (p.vertices.empty()) throw cli_failure{1, "--walk needs at least one vertex label"};
    for (int i = 0; i < p.steps(); ++i)
        if (!k.supports(p.vertices[static_cast<size_t>(i)], p.vertices[static_cast<size_t>(i) + 1]))
            throw cli_failure{1, "walk step " + std::to_string(i + 1) + " is not supported by the kernel"};

    const int n = k.size();
    const RootedTree t = first_entrance_tree(p, n);
    const HeapCollection full = heap_encode(p, n);
    const HeapCollection truncated = prefix_remove(full, tree_heap(t));

    Json out{{"walk", path_to_json(p, k.labels())},
             {"tree", tree_to_json(t, k.labels())},
             {"heap", heap_to_json(full, k.labels())},
             {"truncated", heap_to_json(truncated, k.labels())}};
    out["golf"] = Json(nullptr);
    out["cycles"] = Json(nullptr);
    if (t.spanning() && n >= 2) {
        const GolfConfig cfg = golf_config_for_tree(t);
        for (const VertexId f : cfg.holes) {
            if (!m_membership(truncated, cfg, f)) continue;
            const auto w = decompose_truncated_heap(truncated, cfg, f);
            out["golf"] = golf_to_json(golf_heap_decode(w.golf_part, cfg), cfg, k.labels());
            Json cycles = Json::array();
            for (const auto& c : cycle_decomposition(w.cycle_part)) {
                Json arr = Json::array();
                for (const VertexId v : c.vertices) arr.push_back(k.label(v));
                cycles.push_back(std::move(arr));
            }
            out["cycles"] = std::move(cycles);
            break;
        }
    }
    return out;
}

template <ScalarMode S>
Json do_golf_sim(const MarkovKernel<S>& k, const Json& tree_doc, long long samples, uint64_t seed) {
    const RootedTree t = tree_from_json(tree_doc, k.labels());
    const GolfConfig cfg = golf_config_for_tree(t);
    const MarkovKernel<S> mrev = reversed_kernel(k);

    std::map<std::string, long long> free_counts;
    Json example;
    for (long long i = 0; i < samples; ++i) {
        RandomSource rng(seed, static_cast<uint64_t>(i));
        const auto seq = stochastic_golf(mrev, cfg, rng);
        ++free_counts[k.label(free_hole(seq, cfg))];
        if (i == 0) example = golf_to_json(seq, cfg, k.labels());
    }
    return Json{{"seed", seed},
                {"samples", samples},
                {"free_counts", Json(free_counts)},
                {"example", std::move(example)}};
}

template <ScalarMode S>
Json do_inversion_check(const MarkovKernel<S>& k, const std::string& root, int max_edges, double tol) {
    const VertexId f = k.index_of(root);
    const S partial = enumerate_heaps_of_cycles(k, f, max_edges);
    const S target = S(1) / principal_minor_det(k, f);
    const double gap = to_double(target - partial);
    const bool pass = gap > -1e-12 && gap < tol;
    Json out{{"root", root},
             {"max_edges", max_edges},
             {"partial_sum", format_scalar(partial)},
             {"target", format_scalar(target)},
             {"gap", gap},
             {"tolerance", tol},
             {"pass", pass}};
    if (!pass) throw check_failed{};
    return out;
}

template <ScalarMode S>
Json do_tree_chain_check(const MarkovKernel<S>& k) {
    const auto rep = verify_tree_chain_stationarity(k);
    Json out{{"states", rep.states},
             {"rows_stochastic", rep.rows_stochastic},
             {"balanced", rep.balanced},
             {"max_row_error", rep.max_row_error},
             {"max_balance_error", rep.max_balance_error},
             {"pass", rep.pass()}};
    if (!rep.pass()) throw check_failed{};
    return out;
}

template <ScalarMode S>
Json do_duality_check(const MarkovKernel<S>& k, long long samples, uint64_t seed) {
    long long violations = 0;
    const int n = k.size();
    for (long long i = 0; i < samples; ++i) {
        RandomSource rng(seed, static_cast<uint64_t>(i));
        const Path p = walk_until_cover(k, static_cast<VertexId>(i % n), rng);
        if (first_entrance_tree(p, n) != last_exit_tree(reverse(p), n)) ++violations;
    }
    Json out{{"samples", samples}, {"seed", seed}, {"violations", violations}, {"pass", violations == 0}};
    if (violations != 0) throw check_failed{};
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rooted spanning trees of weighted graphs: samplers, exact laws, and heap decompositions"};
    app.require_subcommand(1);

    int exit_code = 0;
    const auto emit = [&](const std::string& output, const std::function<Json()>& handler) {
        try {
            write_output(output, handler());
        } catch (const check_failed&) {
            exit_code = 2;
        }
    };

    // Shared option storage; each subcommand binds the flags it uses.
    struct {
        std::string kernel, output = "-", root, tree, walk, expected, observed, method = "theorem";
        long long samples = 100'000;
        uint64_t seed = 0;
        int workers = 0, max_edges = 40;
        double threshold = 0.01, tol = 1e-4;
        bool stationary = false, reversed = false;
    } opt;

    const auto add_kernel = [&](CLI::App* sub) {
        sub->add_option("--kernel", opt.kernel, "kernel file (JSON)")->required();
        sub->add_option("--output", opt.output, "output path, '-' for stdout");
    };
    const auto resolve_workers = [&] {
        return opt.workers > 0 ? opt.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    };

    {
        auto* sub = app.add_subcommand("stationary", "exact stationary distribution of the kernel");
        add_kernel(sub);
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out = std::visit([](const auto& k) { return do_stationary(k); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("reverse", "time-reversed kernel, in kernel file format");
        add_kernel(sub);
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out = std::visit([](const auto& k) { return do_reverse(k); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("tree-weight", "product of edge weights of a rooted tree");
        add_kernel(sub);
        sub->add_option("--tree", opt.tree, "tree file (JSON)")->required();
        sub->add_flag("--reversed", opt.reversed, "weight under the reversed kernel");
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            const Json tree_doc = parse_json_file(opt.tree);
            emit(opt.output, [&] {
                Json out = std::visit(
                    [&](const auto& k) { return do_tree_weight(k, tree_doc, opt.reversed); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("mtt-check", "matrix-tree identity for the kernel and its reversal");
        add_kernel(sub);
        sub->add_option("--root", opt.root, "root vertex label")->required();
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out = std::visit([&](const auto& k) { return do_mtt_check(k, opt.root); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("sample-ab", "sample first-entrance trees from covering walks");
        add_kernel(sub);
        sub->add_option("--root", opt.root, "root vertex label (fixed-root mode)");
        sub->add_flag("--stationary", opt.stationary, "draw the start from the stationary law")
            ->excludes("--root");
        sub->add_option("--samples", opt.samples, "number of trees to sample");
        sub->add_option("--seed", opt.seed, "master seed");
        sub->add_option("--workers", opt.workers, "worker threads (0 = all cores)");
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            if (!opt.stationary && opt.root.empty())
                throw cli_failure{1, "sample-ab needs --root or --stationary"};
            const auto original = load_kernel(opt.kernel, Mode::automatic, false);
            const auto kf = load_kernel(opt.kernel, mode(), true);
            emit(opt.output, [&] {
                Json out = std::visit(
                    [&](const auto& k) {
                        return do_sample_ab(original.kernel, k, opt.root, opt.stationary, opt.samples,
                                            opt.seed, resolve_workers());
                    },
                    kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("sample-wilson", "sample trees with loop-erased walks");
        add_kernel(sub);
        sub->add_option("--root", opt.root, "root vertex label")->required();
        sub->add_flag("--reversed", opt.reversed, "walk with the reversed kernel");
        sub->add_option("--samples", opt.samples, "number of trees to sample");
        sub->add_option("--seed", opt.seed, "master seed");
        sub->add_option("--workers", opt.workers, "worker threads (0 = all cores)");
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), true);
            emit(opt.output, [&] {
                Json out = std::visit(
                    [&](const auto& k) {
                        return do_sample_wilson(k, opt.root, opt.reversed, opt.samples, opt.seed,
                                                resolve_workers());
                    },
                    kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("exact-dist", "exact law of the first-entrance tree");
        add_kernel(sub);
        sub->add_option("--root", opt.root, "root vertex label")->required();
        sub->add_option("--method", opt.method, "theorem (tree weights) or dp (chain dynamics)")
            ->check(CLI::IsMember({"theorem", "dp"}));
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out =
                    std::visit([&](const auto& k) { return do_exact_dist(k, opt.root, opt.method); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("compare", "compare an exact law against a batch or another law");
        add_kernel(sub);
        sub->add_option("--expected", opt.expected, "exact distribution file (JSON)")->required();
        sub->add_option("--observed", opt.observed, "batch or distribution file (JSON)")->required();
        sub->add_option("--threshold", opt.threshold, "pass when TV <= threshold");
        sub->callback([&] {
            const auto kf = load_kernel(opt.kernel, Mode::automatic, false);
            const Json expected_doc = parse_json_file(opt.expected);
            const Json observed_doc = parse_json_file(opt.observed);
            emit(opt.output, [&] {
                const auto& labels = labels_of(kf);
                Json out = all_probs_rational(expected_doc) && all_probs_rational(observed_doc)
                               ? do_compare<Rational>(labels, expected_doc, observed_doc, opt.threshold)
                               : do_compare<double>(labels, expected_doc, observed_doc, opt.threshold);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("heap-decompose",
                                       "first-entrance tree, heap, and golf/cycle split of a walk");
        add_kernel(sub);
        sub->add_option("--walk", opt.walk, "comma-separated vertex labels")->required();
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out = std::visit([&](const auto& k) { return do_heap_decompose(k, opt.walk); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("golf-sim", "stochastic golf sequences on a tree's configuration");
        add_kernel(sub);
        sub->add_option("--tree", opt.tree, "tree file (JSON)")->required();
        sub->add_option("--samples", opt.samples, "number of simulations");
        sub->add_option("--seed", opt.seed, "master seed");
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), true);
            const Json tree_doc = parse_json_file(opt.tree);
            emit(opt.output, [&] {
                Json out = std::visit(
                    [&](const auto& k) { return do_golf_sim(k, tree_doc, opt.samples, opt.seed); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("inversion-check",
                                       "partial heap-of-cycles sum against the determinant inverse");
        add_kernel(sub);
        sub->add_option("--root", opt.root, "avoided vertex label")->required();
        sub->add_option("--max-edges", opt.max_edges, "truncation size for the enumeration");
        sub->add_option("--tol", opt.tol, "largest acceptable gap to the target");
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out = std::visit(
                    [&](const auto& k) { return do_inversion_check(k, opt.root, opt.max_edges, opt.tol); },
                    kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("tree-chain-check", "exact stationarity of the tree-valued chain");
        add_kernel(sub);
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), false);
            emit(opt.output, [&] {
                Json out = std::visit([](const auto& k) { return do_tree_chain_check(k); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }
    {
        auto* sub = app.add_subcommand("duality-check",
                                       "first-entrance tree vs last-exit tree of the reversed walk");
        add_kernel(sub);
        sub->add_option("--samples", opt.samples, "number of covering walks");
        sub->add_option("--seed", opt.seed, "master seed");
        const auto mode = add_mode_flags(sub);
        sub->callback([&, mode] {
            const auto kf = load_kernel(opt.kernel, mode(), true);
            emit(opt.output, [&] {
                Json out = std::visit(
                    [&](const auto& k) { return do_duality_check(k, opt.samples, opt.seed); }, kf.kernel);
                out["kernel_hash"] = hash_string(kf.hash);
                return out;
            });
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const cli_failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
