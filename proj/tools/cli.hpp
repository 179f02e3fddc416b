#pragma once

// Command-line front end. run_cli() returns the exit status: 0 success,
// 2 partial failure (some sets or rows failed), 1 fatal error.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lkit/lkit.hpp"

namespace lkit::cli {

constexpr const char* version = "1.0.0";
constexpr const char* local_search_method = "bounded Nelder-Mead (restarts from sample points)";

struct ObjectFlags {
    std::string problem;
    std::string expression;
    std::string design;
    std::size_t dim = 0;
    std::size_t n = 0;
    std::string sample = "lhs";
    std::uint64_t instance = 1;
    std::vector<int> blocks;
    std::vector<double> lower;
    std::vector<double> upper;
    bool maximize = false;

    void add_to(CLI::App& app) {
        auto* src = app.add_option_group("source", "objective source");
        src->add_option("--problem", problem, "named problem")->check(CLI::IsMember(std::vector<std::string>(problem_names.begin(), problem_names.end())));
        src->add_option("--expression", expression, "expression over x1..xd");
        src->add_option("--design", design, "design CSV (x1,...,xd,y)")->check(CLI::ExistingFile);
        src->require_option(1);
        app.add_option("--dim", dim, "number of variables");
        app.add_option("--n", n, "sample size (default 50 * dim)");
        app.add_option("--sample", sample, "sampling method")->check(CLI::IsMember({"uniform", "lhs"}));
        app.add_option("--instance", instance, "problem generator seed");
        app.add_option("--blocks", blocks, "cells per dimension (one value or one per dimension)")->delimiter(',');
        app.add_option("--lower", lower, "lower bounds")->delimiter(',');
        app.add_option("--upper", upper, "upper bounds")->delimiter(',');
        app.add_flag("--maximize", maximize, "objective is to be maximized");
    }

    ObjectSpec spec(std::uint64_t seed) const {
        ObjectSpec s;
        s.problem = problem;
        s.expression = expression;
        if (!design.empty()) {
            std::ifstream in(design);
            std::ostringstream os;
            os << in.rdbuf();
            s.design_csv = os.str();
            if (s.design_csv.empty()) throw InvalidArgument("design file '" + design + "' is empty");
        }
        s.dim = dim;
        s.n = n;
        s.sample = parse_sample_method(sample);
        s.seed = seed;
        s.instance = instance;
        if (!blocks.empty()) s.blocks = blocks;
        if (!lower.empty()) s.lower = lower;
        if (!upper.empty()) s.upper = upper;
        s.minimize = !maximize;
        return s;
    }
};

inline std::vector<std::string> split_sets(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    if (out.empty()) throw InvalidArgument("--sets must name at least one feature set");
    return out;
}

inline ControlParams parse_control(const std::vector<std::string>& assignments) {
    ControlParams c;
    for (const auto& a : assignments) c.set_assignment(a);
    return c;
}

/// Writes to the --out file, or to `out` when the path is empty or "-".
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& write) {
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    write(f);
}

inline OrderedJson metadata(std::uint64_t seed, const std::vector<std::string>& sets, const ControlParams& control) {
    OrderedJson c = OrderedJson::object();
    for (const auto& [k, v] : control.values()) c[k] = v;
    return OrderedJson{{"tool", "lkit"},
                       {"version", version},
                       {"seed", seed},
                       {"sets", sets},
                       {"control", c},
                       {"local_search", local_search_method},
                       {"runtime_unit", "seconds"}};
}

inline int cmd_list_sets(bool no_eval, bool no_cm, const std::string& format, std::ostream& out) {
    const auto ids = list_feature_sets(!no_eval, !no_cm);
    if (format == "json") {
        OrderedJson a = OrderedJson::array();
        for (const auto& id : ids) {
            const auto& s = feature_set(id);
            a.push_back({{"id", id},
                         {"requires_function", s.requires_function},
                         {"requires_blocks", s.requires_blocks},
                         {"stochastic", s.stochastic},
                         {"features", feature_names(id).size()}});
        }
        out << a.dump(2) << "\n";
        return 0;
    }
    out << "set,requires_function,requires_blocks,stochastic,features\n";
    for (const auto& id : ids) {
        const auto& s = feature_set(id);
        out << id << "," << s.requires_function << "," << s.requires_blocks << "," << s.stochastic << "," << feature_names(id).size() << "\n";
    }
    return 0;
}

struct ComputeOptions {
    ObjectFlags object;
    std::string sets = "all";
    std::vector<std::string> control;
    std::uint64_t seed = 0;
    std::size_t reps = 1;
    std::string out;
    std::string format = "csv";
    std::size_t threads = default_thread_count();
};

/// Replication r samples (and seeds the stochastic sets) with seed + r.
inline int cmd_compute(const ComputeOptions& o, std::ostream& out, std::ostream& err) {
    const auto sets = resolve_sets(split_sets(o.sets));
    const auto control = parse_control(o.control);
    if (o.reps < 1) throw InvalidArgument("--reps must be at least 1");
    auto rows = parallel_map(o.reps, o.threads, [&](std::size_t r) {
        const std::uint64_t seed = o.seed + r;
        const auto built = build_object(o.object.spec(seed));
        auto row = compute_row(built.object, sets, control, seed);
        row.meta = {{"replication", std::to_string(r + 1)}, {"seed", std::to_string(seed)}};
        return row;
    });
    bool partial = false;
    for (const auto& r : rows)
        for (const auto& [set, msg] : r.errors) {
            partial = true;
            err << "warning: replication " << r.meta[0].second << ": " << set << ": " << msg << "\n";
        }
    emit(o.out, out, [&](std::ostream& os) {
        if (o.format == "json") {
            OrderedJson doc{{"metadata", metadata(o.seed, sets, control)}, {"rows", rows_to_json(rows)}};
            os << doc.dump(2) << "\n";
        } else {
            write_rows_csv(os, {"replication", "seed"}, feature_columns(sets, control), rows);
        }
    });
    return partial ? 2 : 0;
}

struct BatchCliOptions {
    std::string instances;
    std::string problem;
    std::size_t reps = 1;
    std::string sets = "all";
    std::string sample = "lhs";
    std::size_t n = 0;
    std::vector<int> blocks;
    std::vector<std::string> control;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::size_t threads = default_thread_count();
};

inline int cmd_batch(const BatchCliOptions& o, std::ostream& out, std::ostream& err) {
    std::ifstream in(o.instances);
    if (!in) throw InvalidArgument("cannot read instance file '" + o.instances + "'");
    const auto parsed = parse_instances(read_csv(in), o.problem);
    for (const auto& e : parsed.errors) err << "warning: skipped " << e << "\n";
    BatchOptions opt;
    opt.sets = resolve_sets(split_sets(o.sets));
    opt.reps = o.reps;
    if (opt.reps < 1) throw InvalidArgument("--reps must be at least 1");
    opt.n = o.n;
    opt.sample = parse_sample_method(o.sample);
    if (!o.blocks.empty()) opt.blocks = o.blocks;
    opt.control = parse_control(o.control);
    opt.master_seed = o.seed;
    opt.threads = o.threads;
    const auto rows = run_batch(parsed.instances, opt);
    bool partial = !parsed.errors.empty();
    for (const auto& r : rows)
        for (const auto& [set, msg] : r.errors) {
            partial = true;
            err << "warning: " << r.meta[0].second << " seed " << r.meta[1].second << " dim " << r.meta[2].second << " replication "
                << r.meta[3].second << ": " << set << ": " << msg << "\n";
        }
    emit(o.out, out, [&](std::ostream& os) {
        if (o.format == "json") {
            OrderedJson doc{{"metadata", metadata(o.seed, opt.sets, opt.control)}, {"rows", rows_to_json(rows)}};
            doc["metadata"]["skipped_rows"] = parsed.errors;
            os << doc.dump(2) << "\n";
        } else {
            write_rows_csv(os, batch_meta_columns(), feature_columns(opt.sets, opt.control), rows);
        }
    });
    return partial ? 2 : 0;
}

struct BenchOptions {
    std::string problem = "gallagher101";
    std::size_t dim = 2;
    std::size_t n = 800;
    std::vector<int> blocks{8, 5};
    std::size_t reps = 10;
    std::string sets = "all";
    std::uint64_t seed = 0;
    std::uint64_t instance = 2;
    std::string out;
};

struct SetTiming {
    std::string set;
    std::vector<double> seconds;
};

/// Times every set `reps` times on one feature object (fresh seed per rep).
inline std::vector<SetTiming> run_bench(const BenchOptions& o) {
    if (o.reps < 1) throw InvalidArgument("--reps must be at least 1");
    ObjectSpec spec;
    spec.problem = o.problem;
    spec.dim = o.dim;
    spec.n = o.n;
    spec.seed = o.seed;
    spec.instance = o.instance;
    if (!o.blocks.empty()) spec.blocks = o.blocks;
    const auto built = build_object(spec);
    std::vector<SetTiming> out;
    for (const auto& set : resolve_sets(split_sets(o.sets))) {
        SetTiming t{set, {}};
        for (std::size_t r = 0; r < o.reps; ++r) {
            const auto start = std::chrono::steady_clock::now();
            calculate_feature_set(built.object, set, {}, o.seed + r);
            t.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline OrderedJson bench_json(const BenchOptions& o, const std::vector<SetTiming>& timings) {
    OrderedJson sets = OrderedJson::array();
    for (const auto& t : timings) {
        const auto& v = t.seconds;
        sets.push_back({{"set", t.set},
                        {"reps", v.size()},
                        {"min", *std::min_element(v.begin(), v.end())},
                        {"q1", stats::quantile(v, 0.25)},
                        {"median", stats::quantile(v, 0.5)},
                        {"q3", stats::quantile(v, 0.75)},
                        {"max", *std::max_element(v.begin(), v.end())}});
    }
    return OrderedJson{{"problem", o.problem}, {"instance", o.instance}, {"dim", o.dim}, {"n", o.n}, {"blocks", o.blocks},
                       {"reps", o.reps},       {"unit", "seconds"},      {"local_search", local_search_method},
                       {"sets", sets}};
}

struct PlotOptions {
    ObjectFlags object;
    std::string kind;
    std::string approach = "min";
    std::size_t resolution = 50;
    std::string selections;
    double threshold = 0.8;
    std::uint64_t seed = 0;
    std::vector<std::string> control;
    std::string out;
};

inline int cmd_plot(const PlotOptions& o, std::ostream& out) {
    Json doc;
    if (o.kind == "featureimportance") {
        std::ifstream in(o.selections);
        if (!in) throw InvalidArgument("featureimportance needs --selections <json file>");
        const auto j = Json::parse(in);
        doc = feature_importance_plot_data(j.get<std::vector<std::vector<std::string>>>(), o.threshold);
    } else {
        const auto built = build_object(o.object.spec(o.seed));
        const auto approach = parse_cell_approach(o.approach);
        if (o.kind == "cellmapping")
            doc = cell_mapping_plot_data(built.object, approach);
        else if (o.kind == "barriertree2d")
            doc = barrier_tree_plot_data(built.object, approach, "2d");
        else if (o.kind == "barriertree3d")
            doc = barrier_tree_plot_data(built.object, approach, "3d");
        else if (o.kind == "infocontent")
            doc = info_content_plot_data(built.object, parse_control(o.control), o.seed);
        else if (o.kind == "function") {
            if (!built.problem) throw InvalidArgument("function plot requires --problem or --expression");
            doc = function_grid(*built.problem, o.resolution);
        }
    }
    emit(o.out, out, [&](std::ostream& os) { os << doc.dump() << "\n"; });
    return 0;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Landscape features for continuous black-box optimization problems", "lkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    bool no_eval = false, no_cm = false;
    std::string list_format = "text";
    auto* list = app.add_subcommand("list-sets", "list the feature sets");
    list->add_flag("--no-eval", no_eval, "exclude sets that need extra function evaluations");
    list->add_flag("--no-cellmapping", no_cm, "exclude sets that need a cell grid");
    list->add_option("--format", list_format)->check(CLI::IsMember({"text", "json"}));

    ComputeOptions co;
    auto* compute = app.add_subcommand("compute", "compute features of one problem or design");
    co.object.add_to(*compute);
    compute->add_option("--sets", co.sets, "comma separated set ids, groups (ela, cm) or all");
    compute->add_option("--control", co.control, "key=value override (repeatable)");
    compute->add_option("--seed", co.seed, "seed of replication 1");
    compute->add_option("--reps", co.reps, "replications");
    compute->add_option("--out", co.out, "output file (default stdout)");
    compute->add_option("--format", co.format)->check(CLI::IsMember({"csv", "json"}));
    compute->add_option("--threads", co.threads, "workers (default LKIT_THREADS or all cores)");

    BatchCliOptions bo;
    auto* batch = app.add_subcommand("batch", "compute features for every instance in a CSV");
    batch->add_option("instances", bo.instances, "CSV with columns problem,seed,dim (or dim only)")->required();
    batch->add_option("--problem", bo.problem, "problem for dim-only instance files");
    batch->add_option("--reps", bo.reps, "replications per instance");
    batch->add_option("--sets", bo.sets);
    batch->add_option("--sample", bo.sample)->check(CLI::IsMember({"uniform", "lhs"}));
    batch->add_option("--n", bo.n, "sample size (default 50 * dim)");
    batch->add_option("--blocks", bo.blocks)->delimiter(',');
    batch->add_option("--control", bo.control, "key=value override (repeatable)");
    batch->add_option("--seed", bo.seed, "master seed");
    batch->add_option("--out", bo.out);
    batch->add_option("--format", bo.format)->check(CLI::IsMember({"csv", "json"}));
    batch->add_option("--threads", bo.threads);

    BenchOptions be;
    auto* bench = app.add_subcommand("bench", "time every feature set");
    bench->add_option("--problem", be.problem)->check(CLI::IsMember(std::vector<std::string>(problem_names.begin(), problem_names.end())));
    bench->add_option("--instance", be.instance);
    bench->add_option("--dim", be.dim);
    bench->add_option("--n", be.n);
    bench->add_option("--blocks", be.blocks)->delimiter(',');
    bench->add_option("--reps", be.reps);
    bench->add_option("--sets", be.sets);
    bench->add_option("--seed", be.seed);
    bench->add_option("--out", be.out);

    PlotOptions po;
    auto* plot = app.add_subcommand("plot", "export plot data as JSON");
    plot->add_option("kind", po.kind)
        ->required()
        ->check(CLI::IsMember({"cellmapping", "barriertree2d", "barriertree3d", "infocontent", "function", "featureimportance"}));
    auto* psrc = plot->add_option_group("source", "objective source");
    psrc->add_option("--problem", po.object.problem);
    psrc->add_option("--expression", po.object.expression);
    psrc->add_option("--design", po.object.design)->check(CLI::ExistingFile);
    plot->add_option("--dim", po.object.dim);
    plot->add_option("--n", po.object.n);
    plot->add_option("--sample", po.object.sample)->check(CLI::IsMember({"uniform", "lhs"}));
    plot->add_option("--instance", po.object.instance);
    plot->add_option("--blocks", po.object.blocks)->delimiter(',');
    plot->add_option("--lower", po.object.lower)->delimiter(',');
    plot->add_option("--upper", po.object.upper)->delimiter(',');
    plot->add_option("--approach", po.approach)->check(CLI::IsMember({"min", "mean", "near"}));
    plot->add_option("--resolution", po.resolution);
    plot->add_option("--selections", po.selections, "JSON file: array of per-fold feature name arrays");
    plot->add_option("--threshold", po.threshold);
    plot->add_option("--seed", po.seed);
    plot->add_option("--control", po.control);
    plot->add_option("--out", po.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*list) return cmd_list_sets(no_eval, no_cm, list_format, out);
        if (*compute) return cmd_compute(co, out, err);
        if (*batch) return cmd_batch(bo, out, err);
        if (*bench) {
            const auto timings = run_bench(be);
            emit(be.out, out, [&](std::ostream& os) { os << bench_json(be, timings).dump(2) << "\n"; });
            return 0;
        }
        if (*plot) return cmd_plot(po, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"lkit"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace lkit::cli
