#pragma once

// Request -> feature object -> feature rows, shared by the CLI and the service.

#include <atomic>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lkit/csv.hpp"
#include "lkit/feature_sets.hpp"
#include "lkit/problems.hpp"
#include "lkit/sampling.hpp"
#include "lkit/thread_pool.hpp"

namespace lkit {

using OrderedJson = nlohmann::ordered_json;

/// Where the objective comes from plus sampling and grid parameters. Exactly
/// one of problem, expression and design_csv is set.
struct ObjectSpec {
    std::string problem;
    std::string expression;
    std::string design_csv;
    std::size_t dim = 0;
    std::size_t n = 0;  // 0 means 50 * dim
    SampleMethod sample = SampleMethod::lhs;
    std::uint64_t seed = 0;      // sample seed
    std::uint64_t instance = 1;  // problem generator seed
    std::optional<std::vector<int>> blocks;
    std::optional<std::vector<double>> lower;
    std::optional<std::vector<double>> upper;
    bool minimize = true;

    std::size_t sample_size() const { return n ? n : 50 * dim; }
};

struct BuiltObject {
    FeatureObject object;
    std::optional<Problem> problem;
};

namespace detail {

inline std::optional<Vector> bound_vector(const std::optional<std::vector<double>>& v, std::size_t dim, const char* what) {
    if (!v) return std::nullopt;
    if (v->size() == 1) return Vector::Constant(static_cast<Eigen::Index>(dim), v->front());
    if (v->size() != dim) throw InvalidArgument(std::string(what) + " needs 1 or " + std::to_string(dim) + " entries");
    return Eigen::Map<const Vector>(v->data(), static_cast<Eigen::Index>(v->size()));
}

} // namespace detail

inline BuiltObject build_object(const ObjectSpec& spec) {
    const int sources = !spec.problem.empty() + !spec.expression.empty() + !spec.design_csv.empty();
    if (sources != 1) throw InvalidArgument("give exactly one of problem, expression or design");

    FeatureObjectOptions opts;
    opts.blocks = spec.blocks;
    opts.minimize = spec.minimize;

    if (!spec.design_csv.empty()) {
        auto design = read_design_text(spec.design_csv);
        const auto d = static_cast<std::size_t>(design.x.cols());
        if (spec.dim && spec.dim != d) throw InvalidArgument("design has " + std::to_string(d) + " columns but dim is " + std::to_string(spec.dim));
        opts.lower = detail::bound_vector(spec.lower, d, "lower");
        opts.upper = detail::bound_vector(spec.upper, d, "upper");
        return {create_feature_object(std::move(design.x), std::move(design.y), std::move(opts)), std::nullopt};
    }

    if (spec.dim < 1) throw InvalidArgument("dim must be at least 1");
    const auto lower = detail::bound_vector(spec.lower, spec.dim, "lower");
    const auto upper = detail::bound_vector(spec.upper, spec.dim, "upper");
    Problem p = spec.problem.empty() ? make_expression_problem(spec.expression, spec.dim, lower, upper)
                                     : make_problem(spec.problem, spec.dim, spec.instance);
    if (lower) p.lower = *lower;
    if (upper) p.upper = *upper;

    SampleSpec s;
    s.n_obs = spec.sample_size();
    s.dim = spec.dim;
    s.lower = p.lower;
    s.upper = p.upper;
    s.method = spec.sample;
    s.seed = spec.seed;
    Matrix x = create_initial_sample(s);
    Vector y = evaluate_rows(p, x);
    opts.lower = p.lower;
    opts.upper = p.upper;
    opts.function = p.evaluate;
    return {create_feature_object(std::move(x), std::move(y), std::move(opts)), std::move(p)};
}

inline OrderedJson to_json(const FeatureValue& v) {
    switch (v.kind()) {
    case FeatureValue::Kind::missing: return nullptr;
    case FeatureValue::Kind::integer: return v.as_integer();
    case FeatureValue::Kind::real: break;
    }
    const double d = v.as_double();
    if (std::isinf(d)) return d > 0 ? "Inf" : "-Inf";
    return d;
}

inline OrderedJson to_json(const FeatureVector& fv) {
    OrderedJson o = OrderedJson::object();
    for (const auto& [name, v] : fv) o[name] = to_json(v);
    return o;
}

inline bool is_runtime_column(const std::string& name) {
    const std::string suffix = "costs_runtime";
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Column names of the requested sets in canonical order.
inline std::vector<std::string> feature_columns(const std::vector<std::string>& sets, const ControlParams& control) {
    std::vector<std::string> out;
    for (const auto& s : resolve_sets(sets))
        for (auto& n : feature_names(s, control)) out.push_back(std::move(n));
    return out;
}

/// Seed of replication `rep` of instance `index` under a master seed.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t index, std::size_t rep) {
    return Rng(master).child(index).child(rep).next();
}

struct FeatureRow {
    std::vector<std::pair<std::string, std::string>> meta;
    FeatureVector values;
    std::vector<std::pair<std::string, std::string>> errors;  // (set, message)
};

inline FeatureRow compute_row(const FeatureObject& fo, const std::vector<std::string>& sets, const ControlParams& control,
                              std::uint64_t seed) {
    FeatureRow row;
    const auto results = calculate_features(fo, sets, control, seed);
    for (const auto& r : results)
        if (!r.ok()) row.errors.emplace_back(r.set, r.error);
    row.values = flatten(results, control);
    return row;
}

inline void write_rows_csv(std::ostream& out, const std::vector<std::string>& meta_columns, const std::vector<std::string>& feature_cols,
                           const std::vector<FeatureRow>& rows) {
    std::vector<std::string> header = meta_columns;
    header.insert(header.end(), feature_cols.begin(), feature_cols.end());
    write_csv_row(out, header);
    for (const auto& r : rows) {
        std::vector<std::string> fields;
        for (const auto& [k, v] : r.meta) fields.push_back(v);
        for (const auto& [k, v] : r.values) fields.push_back(v.to_string());
        write_csv_row(out, fields);
    }
}

inline OrderedJson rows_to_json(const std::vector<FeatureRow>& rows) {
    OrderedJson a = OrderedJson::array();
    for (const auto& r : rows) {
        OrderedJson o = OrderedJson::object();
        for (const auto& [k, v] : r.meta) o[k] = v;
        o["features"] = to_json(r.values);
        OrderedJson errs = OrderedJson::object();
        for (const auto& [s, m] : r.errors) errs[s] = m;
        o["errors"] = errs;
        a.push_back(std::move(o));
    }
    return a;
}

/// Benchmark instance of a batch: named problem, generator seed, dimension.
struct Instance {
    std::string problem;
    std::uint64_t seed = 1;
    std::size_t dim = 0;
};

struct InstanceParse {
    std::vector<Instance> instances;
    std::vector<std::string> errors;  // one message per rejected row
};

/// Columns (problem, seed, dim), or dim alone together with `default_problem`.
inline InstanceParse parse_instances(const CsvTable& t, const std::string& default_problem = "") {
    InstanceParse out;
    const long cp = t.column("problem"), cs = t.column("seed"), cd = t.column("dim");
    if (cd < 0) throw InvalidArgument("instance CSV needs a 'dim' column");
    if (cp < 0 && default_problem.empty()) throw InvalidArgument("dim-only instance CSV needs a problem to apply to every row");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = "row " + std::to_string(i + 1) + " (line " + std::to_string(t.line_numbers[i]) + ")";
        try {
            if (r.size() != t.header.size()) throw InvalidArgument("expected " + std::to_string(t.header.size()) + " fields");
            Instance inst;
            inst.problem = cp >= 0 ? r[static_cast<std::size_t>(cp)] : default_problem;
            auto parse_uint = [&](long col, const char* what) {
                const auto& s = r[static_cast<std::size_t>(col)];
                std::size_t used = 0;
                long long v = -1;
                try {
                    v = std::stoll(s, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != s.size() || s.empty() || v < 0) throw InvalidArgument(std::string(what) + " '" + s + "' is not a non-negative integer");
                return static_cast<std::uint64_t>(v);
            };
            inst.dim = static_cast<std::size_t>(parse_uint(cd, "dim"));
            if (inst.dim < 1) throw InvalidArgument("dim must be at least 1");
            if (cs >= 0) inst.seed = parse_uint(cs, "seed");
            make_problem(inst.problem, 1, 0);
            out.instances.push_back(std::move(inst));
        } catch (const Error& e) {
            out.errors.push_back(where + ": " + e.what());
        }
    }
    return out;
}

struct BatchOptions {
    std::vector<std::string> sets{"all"};
    std::size_t reps = 1;
    std::size_t n = 0;
    SampleMethod sample = SampleMethod::lhs;
    std::optional<std::vector<int>> blocks;
    ControlParams control;
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
};

inline const std::vector<std::string>& batch_meta_columns() {
    static const std::vector<std::string> cols{"problem", "seed", "dim", "replication", "sample_seed"};
    return cols;
}

/// reps x instances rows in input order; `progress` is called after each row
/// with the number of finished rows.
inline std::vector<FeatureRow> run_batch(const std::vector<Instance>& instances, const BatchOptions& opt,
                                         const std::function<void(std::size_t)>& progress = {}) {
    const std::size_t total = instances.size() * opt.reps;
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    return parallel_map(total, opt.threads, [&](std::size_t k) {
        const std::size_t i = k / opt.reps, rep = k % opt.reps;
        const auto& inst = instances[i];
        const auto sample_seed = replication_seed(opt.master_seed, i, rep);
        ObjectSpec spec;
        spec.problem = inst.problem;
        spec.instance = inst.seed;
        spec.dim = inst.dim;
        spec.n = opt.n;
        spec.sample = opt.sample;
        spec.seed = sample_seed;
        spec.blocks = opt.blocks;
        FeatureRow row;
        try {
            row = compute_row(build_object(spec).object, opt.sets, opt.control, sample_seed);
        } catch (const std::exception& e) {
            std::vector<SetResult> failed;
            for (const auto& s : resolve_sets(opt.sets)) failed.push_back({s, std::nullopt, e.what(), false});
            row.values = flatten(failed, opt.control);
            row.errors.emplace_back("*", e.what());
        }
        row.meta = {{"problem", inst.problem},
                    {"seed", std::to_string(inst.seed)},
                    {"dim", std::to_string(inst.dim)},
                    {"replication", std::to_string(rep + 1)},
                    {"sample_seed", std::to_string(sample_seed)}};
        const auto finished = ++done;
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(finished);
        }
        return row;
    });
}

} // namespace lkit
