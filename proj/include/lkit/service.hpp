#pragma once

// Transport-independent HTTP API: route(method, path, params, body) -> response.
// Feature objects and batch jobs live in LRU stores; evicted entries are
// written to the spill directory (if any) and restored on demand.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lkit/pipeline.hpp"
#include "lkit/vizdata.hpp"

namespace lkit {

using Params = std::multimap<std::string, std::string>;

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

struct ServiceConfig {
    std::size_t threads = default_thread_count();
    std::size_t object_capacity = 64;
    std::size_t job_capacity = 16;
    std::size_t result_capacity = 256;
    std::string spill_dir;

    /// LKIT_THREADS and LKIT_SPILL_DIR.
    static ServiceConfig from_env() {
        ServiceConfig c;
        if (const char* dir = std::getenv("LKIT_SPILL_DIR")) c.spill_dir = dir;
        return c;
    }
};

/// Least-recently-used map. put() returns the evicted entries.
template <typename K, typename V>
class LruCache {
public:
    explicit LruCache(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

    std::optional<V> get(const K& key) {
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    std::vector<std::pair<K, V>> put(const K& key, V value) {
        std::vector<std::pair<K, V>> evicted;
        if (auto it = index_.find(key); it != index_.end()) {
            it->second->second = std::move(value);
            order_.splice(order_.begin(), order_, it->second);
            return evicted;
        }
        order_.emplace_front(key, std::move(value));
        index_[key] = order_.begin();
        while (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            evicted.push_back(std::move(order_.back()));
            order_.pop_back();
        }
        return evicted;
    }

    void erase(const K& key) {
        if (auto it = index_.find(key); it != index_.end()) {
            order_.erase(it->second);
            index_.erase(it);
        }
    }

    std::size_t size() const { return order_.size(); }

private:
    std::size_t capacity_;
    std::list<std::pair<K, V>> order_;
    std::unordered_map<K, typename std::list<std::pair<K, V>>::iterator> index_;
};

/// Request body rejected by the schema (HTTP 422).
struct SchemaError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline HttpResponse json_response(int status, const OrderedJson& body) { return {status, "application/json", body.dump()}; }

inline HttpResponse error_response(int status, const std::string& message, OrderedJson extra = OrderedJson::object()) {
    OrderedJson body{{"error", message}};
    for (auto& [k, v] : extra.items()) body[k] = v;
    return json_response(status, body);
}

inline std::vector<double> number_list(const Json& v, const char* field) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw SchemaError(std::string(field) + " must be a number or a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw SchemaError(std::string(field) + " must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

inline std::uint64_t unsigned_field(const Json& v, const char* field) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw SchemaError(std::string(field) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::vector<int> blocks_field(const Json& v) {
    std::vector<int> out;
    for (double b : number_list(v, "blocks")) {
        if (b != std::floor(b) || b < 1) throw SchemaError("blocks must be positive integers");
        out.push_back(static_cast<int>(b));
    }
    return out;
}

} // namespace detail

/// Validates a feature-object body and turns it into an ObjectSpec.
inline ObjectSpec object_spec_from_json(const Json& body) {
    if (!body.is_object()) throw SchemaError("body must be a JSON object");
    static const std::vector<std::string> allowed{"problem", "expression", "design", "dim",   "n",     "sample",
                                                  "seed",    "instance",   "blocks", "lower", "upper", "minimize"};
    for (const auto& [k, v] : body.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw SchemaError("unknown field '" + k + "'");
    ObjectSpec s;
    auto text = [&](const char* k) {
        if (!body.contains(k)) return std::string();
        if (!body[k].is_string() || body[k].get<std::string>().empty()) throw SchemaError(std::string(k) + " must be a non-empty string");
        return body[k].get<std::string>();
    };
    s.problem = text("problem");
    s.expression = text("expression");
    s.design_csv = text("design");
    if ((!s.problem.empty()) + (!s.expression.empty()) + (!s.design_csv.empty()) != 1)
        throw SchemaError("exactly one of problem, expression or design is required");
    if (body.contains("dim")) s.dim = detail::unsigned_field(body["dim"], "dim");
    if (s.design_csv.empty() && s.dim < 1) throw SchemaError("dim is required and must be at least 1");
    if (body.contains("n")) s.n = detail::unsigned_field(body["n"], "n");
    if (body.contains("sample")) {
        if (!body["sample"].is_string()) throw SchemaError("sample must be \"lhs\" or \"uniform\"");
        try {
            s.sample = parse_sample_method(body["sample"].get<std::string>());
        } catch (const InvalidArgument& e) {
            throw SchemaError(e.what());
        }
    }
    if (body.contains("seed")) s.seed = detail::unsigned_field(body["seed"], "seed");
    if (body.contains("instance")) s.instance = detail::unsigned_field(body["instance"], "instance");
    if (body.contains("blocks")) s.blocks = detail::blocks_field(body["blocks"]);
    if (body.contains("lower")) s.lower = detail::number_list(body["lower"], "lower");
    if (body.contains("upper")) s.upper = detail::number_list(body["upper"], "upper");
    if (body.contains("minimize")) {
        if (!body["minimize"].is_boolean()) throw SchemaError("minimize must be a boolean");
        s.minimize = body["minimize"].get<bool>();
    }
    if (!s.problem.empty()) {
        try {
            make_problem(s.problem, 1, 0);
        } catch (const InvalidArgument& e) {
            throw SchemaError(e.what());
        }
    }
    return s;
}

/// Canonical JSON of a spec; equal specs give equal text and thus equal ids.
inline Json object_spec_to_json(const ObjectSpec& s) {
    Json j{{"dim", s.dim}, {"n", s.sample_size()}, {"sample", s.sample == SampleMethod::lhs ? "lhs" : "uniform"}, {"seed", s.seed},
           {"minimize", s.minimize}};
    if (!s.problem.empty()) {
        j["problem"] = s.problem;
        j["instance"] = s.instance;
    }
    if (!s.expression.empty()) j["expression"] = s.expression;
    if (!s.design_csv.empty()) {
        j["design"] = s.design_csv;
        j.erase("n");
        j.erase("sample");
        j.erase("seed");
    }
    if (s.blocks) j["blocks"] = *s.blocks;
    if (s.lower) j["lower"] = *s.lower;
    if (s.upper) j["upper"] = *s.upper;
    return j;
}

inline OrderedJson summary_to_json(const Summary& s) {
    OrderedJson j{{"n_obs", s.n_obs}, {"dim", s.dim}, {"lower", s.lower}, {"upper", s.upper},
                  {"minimize", s.minimize}, {"has_function", s.has_function}};
    if (s.blocks) {
        j["blocks"] = *s.blocks;
        j["cell_widths"] = s.cell_widths;
        j["cells"] = {{"total", s.cells_total}, {"non_empty", s.cells_non_empty}, {"empty", s.cells_empty}};
        j["avg_obs_per_cell"] = {{"total", s.avg_obs_per_cell}, {"non_empty", s.avg_obs_per_non_empty_cell}};
    } else {
        j["blocks"] = nullptr;
    }
    return j;
}

inline OrderedJson openapi_document() {
    auto op = [](const char* summary, OrderedJson responses) { return OrderedJson{{"summary", summary}, {"responses", responses}}; };
    auto id_param = OrderedJson{{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
    OrderedJson object_schema{
        {"type", "object"},
        {"additionalProperties", false},
        {"properties",
         {{"problem", {{"type", "string"}, {"enum", problem_names}}},
          {"expression", {{"type", "string"}}},
          {"design", {{"type", "string"}, {"description", "CSV text with header x1,...,xd,y"}}},
          {"dim", {{"type", "integer"}, {"minimum", 1}}},
          {"n", {{"type", "integer"}, {"minimum", 1}}},
          {"sample", {{"type", "string"}, {"enum", {"lhs", "uniform"}}}},
          {"seed", {{"type", "integer"}, {"minimum", 0}}},
          {"instance", {{"type", "integer"}, {"minimum", 0}}},
          {"blocks", {{"oneOf", {{{"type", "integer"}}, {{"type", "array"}, {"items", {{"type", "integer"}, {"minimum", 1}}}}}}}},
          {"lower", {{"oneOf", {{{"type", "number"}}, {{"type", "array"}, {"items", {{"type", "number"}}}}}}}},
          {"upper", {{"oneOf", {{{"type", "number"}}, {{"type", "array"}, {"items", {{"type", "number"}}}}}}}},
          {"minimize", {{"type", "boolean"}}}}}};
    OrderedJson batch_schema{
        {"type", "object"},
        {"required", {"instances"}},
        {"properties",
         {{"instances",
           {{"type", "array"},
            {"minItems", 1},
            {"items",
             {{"type", "object"},
              {"required", {"problem", "dim"}},
              {"properties", {{"problem", {{"type", "string"}}}, {"seed", {{"type", "integer"}}}, {"dim", {{"type", "integer"}}}}}}}}},
          {"reps", {{"type", "integer"}, {"minimum", 1}}},
          {"sets", {{"type", "array"}, {"items", {{"type", "string"}}}}},
          {"sampling",
           {{"oneOf",
             {{{"type", "string"}, {"enum", {"lhs", "uniform"}}},
              {{"type", "object"},
               {"properties", {{"method", {{"type", "string"}}}, {"n", {{"type", "integer"}}}, {"blocks", {{"type", "array"}}}}}}}}}},
          {"seed", {{"type", "integer"}, {"minimum", 0}}},
          {"control", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}}}}};
    OrderedJson paths{
        {"/api/spec", {{"get", op("This document", {{"200", {{"description", "OpenAPI document"}}}})}}},
        {"/api/problems", {{"get", op("Named problem catalog", {{"200", {{"description", "problem list"}}}})}}},
        {"/api/sets", {{"get", op("Feature set registry", {{"200", {{"description", "set list with flags and names"}}}})}}},
        {"/api/feature-object",
         {{"post",
           {{"summary", "Create a feature object"},
            {"requestBody", {{"required", true}, {"content", {{"application/json", {{"schema", object_schema}}}}}}},
            {"responses",
             {{"200", {{"description", "id and summary"}}},
              {"400", {{"description", "malformed JSON or expression parse error (with position)"}}},
              {"422", {{"description", "schema violation"}}}}}}}}},
        {"/api/feature-object/{id}",
         {{"get", {{"summary", "Summary of a feature object"}, {"parameters", {id_param}}, {"responses", {{"200", {{"description", "summary"}}}, {"404", {{"description", "unknown id"}}}}}}}}},
        {"/api/feature-object/{id}/features",
         {{"get",
           {{"summary", "Compute feature sets"},
            {"parameters",
             {id_param,
              {{"name", "sets"}, {"in", "query"}, {"schema", {{"type", "string"}}}, {"description", "comma separated ids, groups or all"}},
              {{"name", "control"}, {"in", "query"}, {"schema", {{"type", "string"}}}, {"description", "key=value, repeatable"}},
              {{"name", "seed"}, {"in", "query"}, {"schema", {{"type", "integer"}}}}}},
            {"responses",
             {{"200", {{"description", "feature map in canonical order plus costs"}}},
              {"404", {{"description", "unknown id"}}},
              {"409", {{"description", "a requested set needs a function or cell grid the object lacks"}}},
              {"422", {{"description", "bad set id or control value"}}}}}}}}},
        {"/api/feature-object/{id}/features.csv",
         {{"get", {{"summary", "Same as features, as text/csv"}, {"parameters", {id_param}}, {"responses", {{"200", {{"description", "CSV"}}}}}}}}},
        {"/api/feature-object/{id}/plot/{kind}",
         {{"get",
           {{"summary", "Plot data"},
            {"parameters",
             {id_param,
              {{"name", "kind"},
               {"in", "path"},
               {"required", true},
               {"schema", {{"type", "string"}, {"enum", {"cellmapping", "barriertree2d", "barriertree3d", "infocontent", "function"}}}}},
              {{"name", "approach"}, {"in", "query"}, {"schema", {{"type", "string"}, {"enum", {"min", "mean", "near"}}}}},
              {{"name", "resolution"}, {"in", "query"}, {"schema", {{"type", "integer"}, {"minimum", 2}}}}}},
            {"responses",
             {{"200", {{"description", "plot JSON with schema_version"}}},
              {"404", {{"description", "unknown id or kind"}}},
              {"409", {{"description", "wrong dimension, no cell grid or no function"}}}}}}}}},
        {"/api/plot/featureimportance",
         {{"post",
           {{"summary", "Feature importance plot data from per-fold selections"},
            {"responses", {{"200", {{"description", "plot JSON"}}}, {"422", {{"description", "no folds"}}}}}}}}},
        {"/api/batch",
         {{"post",
           {{"summary", "Start a batch job"},
            {"requestBody", {{"required", true}, {"content", {{"application/json", {{"schema", batch_schema}}}}}}},
            {"responses", {{"202", {{"description", "job id"}}}, {"422", {{"description", "invalid instance rows by index"}}}}}}}}},
        {"/api/batch/{id}",
         {{"get",
           {{"summary", "Job status"},
            {"parameters", {id_param}},
            {"responses", {{"200", {{"description", "status, progress and result_csv when done"}}}, {"404", {{"description", "unknown job"}}}}}}}}},
        {"/api/batch/{id}/result.csv",
         {{"get",
           {{"summary", "Job result as text/csv"},
            {"parameters", {id_param}},
            {"responses", {{"200", {{"description", "CSV"}}}, {"404", {{"description", "unknown job"}}}, {"409", {{"description", "not finished"}}}}}}}}}};
    return OrderedJson{{"openapi", "3.0.3"}, {"info", {{"title", "lkit landscape feature service"}, {"version", "1.0.0"}}}, {"paths", paths}};
}

class Service {
public:
    explicit Service(ServiceConfig config = ServiceConfig::from_env())
        : config_(std::move(config)),
          pool_(config_.threads),
          objects_(config_.object_capacity),
          results_(config_.result_capacity),
          jobs_(config_.job_capacity) {
        if (!config_.spill_dir.empty()) std::filesystem::create_directories(config_.spill_dir);
    }

    HttpResponse route(const std::string& method, const std::string& path, const Params& params = {}, const std::string& body = "") {
        try {
            return dispatch(method, path, params, body);
        } catch (const ParseError& e) {
            return detail::error_response(400, e.what(), {{"position", e.position()}});
        } catch (const Unavailable& e) {
            return detail::error_response(409, e.what());
        } catch (const InvalidArgument& e) {
            return detail::error_response(422, e.what());
        } catch (const EvaluationError& e) {
            return detail::error_response(422, e.what());
        } catch (const std::exception& e) {
            return detail::error_response(500, e.what());
        }
    }

    HttpResponse create_object(const std::string& body_text) {
        Json body;
        try {
            body = Json::parse(body_text);
        } catch (const Json::parse_error& e) {
            return detail::error_response(400, std::string("malformed JSON: ") + e.what());
        }
        const auto spec = object_spec_from_json(body);
        const auto id = detail::hex64(detail::fnv1a(object_spec_to_json(spec).dump()));
        auto entry = lookup(id);
        if (!entry) {
            auto built = std::make_shared<Entry>(Entry{spec, build_object(spec)});
            store(id, built);
            entry = built;
        }
        return detail::json_response(200, object_json(id, *entry));
    }

    HttpResponse get_object(const std::string& id) {
        auto entry = lookup(id);
        if (!entry) return not_found(id);
        return detail::json_response(200, object_json(id, *entry));
    }

    HttpResponse features(const std::string& id, const Params& params, bool csv) {
        auto entry = lookup(id);
        if (!entry) return not_found(id);
        const auto requested = split_list(param(params, "sets", "all"));
        if (requested.empty()) throw InvalidArgument("sets must not be empty");
        const auto sets = resolve_sets(requested);
        ControlParams control;
        for (auto [it, end] = params.equal_range("control"); it != end; ++it)
            if (!it->second.empty()) control.set_assignment(it->second);
        const std::uint64_t seed = params.count("seed") ? parse_seed(param(params, "seed", "0")) : entry->spec.seed;

        for (const auto& r : requested) {
            if (r == "all" || std::find(sets.begin(), sets.end(), r) == sets.end()) continue;
            const auto& info = feature_set(r);
            if (info.requires_function && !entry->built.object.has_function())
                return detail::error_response(409, "feature set '" + r + "' requires function evaluations but the object has no function");
            if (info.requires_blocks && !entry->built.object.has_grid())
                return detail::error_response(409, "feature set '" + r + "' requires a cell grid but the object has no blocks");
        }

        std::string key = id + "|" + std::to_string(seed) + "|";
        for (const auto& s : sets) key += s + ",";
        for (const auto& [k, v] : control.values()) key += "|" + k + "=" + v;

        std::shared_future<std::shared_ptr<const FeatureRow>> fut;
        {
            std::lock_guard lock(mutex_);
            if (auto hit = results_.get(key)) {
                fut = *hit;
            } else {
                fut = pool_.submit([entry, sets, control, seed] {
                              return std::make_shared<const FeatureRow>(compute_row(entry->built.object, sets, control, seed));
                          }).share();
                results_.put(key, fut);
            }
        }
        const auto row = fut.get();
        if (csv) {
            std::ostringstream os;
            write_rows_csv(os, {}, row->values.names(), {*row});
            return {200, "text/csv", os.str()};
        }
        OrderedJson costs = OrderedJson::object();
        for (const auto& s : sets) {
            const auto fe = row->values.find(s + ".costs_fun_evals");
            const auto rt = row->values.find(s + ".costs_runtime");
            costs[s] = {{"fun_evals", fe ? to_json(*fe) : OrderedJson()}, {"runtime", rt ? to_json(*rt) : OrderedJson()}};
        }
        OrderedJson errors = OrderedJson::object();
        for (const auto& [s, m] : row->errors) errors[s] = m;
        return detail::json_response(200, OrderedJson{{"id", id}, {"seed", seed}, {"sets", sets}, {"features", to_json(row->values)},
                                                      {"costs", costs}, {"errors", errors}});
    }

    HttpResponse plot(const std::string& id, const std::string& kind, const Params& params) {
        auto entry = lookup(id);
        if (!entry) return not_found(id);
        const auto& fo = entry->built.object;
        const auto approach = parse_cell_approach(param(params, "approach", "min"));
        auto need_2d_grid = [&] {
            if (fo.dim() != 2) throw Unavailable(kind + " plot requires 2 dimensions (object has " + std::to_string(fo.dim()) + ")");
            if (!fo.has_grid()) throw Unavailable(kind + " plot requires a cell grid (create the object with blocks)");
        };
        Json doc;
        if (kind == "cellmapping") {
            need_2d_grid();
            doc = cell_mapping_plot_data(fo, approach);
        } else if (kind == "barriertree2d" || kind == "barriertree3d") {
            need_2d_grid();
            doc = barrier_tree_plot_data(fo, approach, kind.substr(11));
        } else if (kind == "infocontent") {
            ControlParams control;
            for (auto [it, end] = params.equal_range("control"); it != end; ++it) control.set_assignment(it->second);
            doc = info_content_plot_data(fo, control, entry->spec.seed);
        } else if (kind == "function") {
            if (!entry->built.problem) throw Unavailable("function plot requires a problem or expression");
            if (fo.dim() > 2) throw Unavailable("function plot requires 1 or 2 dimensions");
            const auto res = parse_seed(param(params, "resolution", "50"));
            doc = function_grid(*entry->built.problem, static_cast<std::size_t>(res));
        } else {
            return detail::error_response(404, "unknown plot kind '" + kind + "'");
        }
        return {200, "application/json", doc.dump()};
    }

    HttpResponse importance(const std::string& body_text) {
        Json body;
        try {
            body = Json::parse(body_text);
        } catch (const Json::parse_error& e) {
            return detail::error_response(400, std::string("malformed JSON: ") + e.what());
        }
        if (!body.is_object() || !body.contains("selections") || !body["selections"].is_array())
            throw SchemaError("body needs 'selections': array of per-fold name lists");
        std::vector<std::vector<std::string>> sel;
        for (const auto& fold : body["selections"]) {
            if (!fold.is_array()) throw SchemaError("each fold must be an array of feature names");
            auto& v = sel.emplace_back();
            for (const auto& n : fold) {
                if (!n.is_string()) throw SchemaError("feature names must be strings");
                v.push_back(n.get<std::string>());
            }
        }
        const double threshold = body.contains("threshold") && body["threshold"].is_number() ? body["threshold"].get<double>() : 0.8;
        return {200, "application/json", feature_importance_plot_data(sel, threshold).dump()};
    }

    HttpResponse problems() const {
        OrderedJson a = OrderedJson::array();
        for (const char* n : problem_names) {
            const auto p = make_problem(n, 2, 1);
            a.push_back({{"name", n}, {"lower", p.lower[0]}, {"upper", p.upper[0]}, {"any_dim", true}, {"generator_seed", true}});
        }
        return detail::json_response(200, a);
    }

    HttpResponse sets() const {
        OrderedJson a = OrderedJson::array();
        for (const auto& s : feature_sets())
            a.push_back({{"id", s.id},
                         {"requires_function", s.requires_function},
                         {"requires_blocks", s.requires_blocks},
                         {"stochastic", s.stochastic},
                         {"description", s.description},
                         {"features", feature_names(s.id)}});
        return detail::json_response(200, a);
    }

    HttpResponse submit_batch(const std::string& body_text) {
        Json body;
        try {
            body = Json::parse(body_text);
        } catch (const Json::parse_error& e) {
            return detail::error_response(400, std::string("malformed JSON: ") + e.what());
        }
        if (!body.is_object()) throw SchemaError("body must be a JSON object");
        if (!body.contains("instances") || !body["instances"].is_array() || body["instances"].empty())
            return detail::error_response(422, "instances must be a non-empty array");
        std::vector<Instance> instances;
        OrderedJson invalid = OrderedJson::array();
        const auto& rows = body["instances"];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            try {
                const auto& r = rows[i];
                if (!r.is_object()) throw SchemaError("instance must be an object");
                Instance inst;
                if (!r.contains("problem") || !r["problem"].is_string()) throw SchemaError("problem must be a string");
                inst.problem = r["problem"].get<std::string>();
                make_problem(inst.problem, 1, 0);
                if (!r.contains("dim")) throw SchemaError("dim is required");
                inst.dim = detail::unsigned_field(r["dim"], "dim");
                if (inst.dim < 1) throw SchemaError("dim must be at least 1");
                if (r.contains("seed")) inst.seed = detail::unsigned_field(r["seed"], "seed");
                instances.push_back(std::move(inst));
            } catch (const InvalidArgument& e) {
                invalid.push_back({{"index", i}, {"error", e.what()}});
            }
        }
        if (!invalid.empty()) return detail::error_response(422, "invalid instance rows", {{"invalid_rows", invalid}});

        BatchOptions opt;
        opt.threads = 1;
        if (body.contains("reps")) {
            opt.reps = detail::unsigned_field(body["reps"], "reps");
            if (opt.reps < 1) throw SchemaError("reps must be at least 1");
        }
        if (body.contains("sets")) {
            const auto& s = body["sets"];
            if (s.is_string()) {
                opt.sets = split_list(s.get<std::string>());
            } else if (s.is_array()) {
                opt.sets.clear();
                for (const auto& e : s) {
                    if (!e.is_string()) throw SchemaError("sets must be strings");
                    opt.sets.push_back(e.get<std::string>());
                }
            } else {
                throw SchemaError("sets must be a string or an array of strings");
            }
            if (opt.sets.empty()) throw SchemaError("sets must not be empty");
            resolve_sets(opt.sets);
        }
        if (body.contains("sampling")) {
            const auto& s = body["sampling"];
            if (s.is_string()) {
                opt.sample = parse_sample_method(s.get<std::string>());
            } else if (s.is_object()) {
                if (s.contains("method")) opt.sample = parse_sample_method(s["method"].get<std::string>());
                if (s.contains("n")) opt.n = detail::unsigned_field(s["n"], "sampling.n");
                if (s.contains("blocks")) opt.blocks = detail::blocks_field(s["blocks"]);
            } else {
                throw SchemaError("sampling must be a method name or an object");
            }
        }
        if (body.contains("seed")) opt.master_seed = detail::unsigned_field(body["seed"], "seed");
        if (body.contains("control")) {
            if (!body["control"].is_object()) throw SchemaError("control must be an object of strings");
            for (const auto& [k, v] : body["control"].items()) opt.control.set(k, v.is_string() ? v.get<std::string>() : v.dump());
        }

        auto job = std::make_shared<Job>();
        job->total = instances.size() * opt.reps;
        std::string id;
        {
            std::lock_guard lock(mutex_);
            id = "job-" + detail::hex64(detail::mix64(++job_counter_ ^ detail::fnv1a(body.dump())));
            for (auto& [k, v] : jobs_.put(id, job)) spill_job(k, *v);
        }
        pool_.submit([job, instances, opt] {
            try {
                const auto rows = run_batch(instances, opt, [&](std::size_t done) { job->done = done; });
                std::ostringstream os;
                write_rows_csv(os, batch_meta_columns(), feature_columns(opt.sets, opt.control), rows);
                std::lock_guard lock(job->mutex);
                job->csv = os.str();
                job->status = "done";
            } catch (const std::exception& e) {
                std::lock_guard lock(job->mutex);
                job->error = e.what();
                job->status = "failed";
            }
        });
        return detail::json_response(202, OrderedJson{{"job_id", id}, {"total", job->total}});
    }

    HttpResponse batch_status(const std::string& id) {
        auto job = find_job(id);
        if (!job) return detail::error_response(404, "unknown job '" + id + "'");
        std::lock_guard lock(job->mutex);
        OrderedJson j{{"job_id", id},
                      {"status", job->status},
                      {"progress", job->total ? static_cast<double>(job->done) / static_cast<double>(job->total) : 1.0},
                      {"completed", job->done.load()},
                      {"total", job->total}};
        if (job->status == "done") j["result_csv"] = job->csv;
        if (job->status == "failed") j["error"] = job->error;
        return detail::json_response(200, j);
    }

    HttpResponse batch_csv(const std::string& id) {
        auto job = find_job(id);
        if (!job) return detail::error_response(404, "unknown job '" + id + "'");
        std::lock_guard lock(job->mutex);
        if (job->status != "done") return detail::error_response(409, "job is " + job->status);
        return {200, "text/csv", job->csv};
    }

    std::size_t cached_objects() {
        std::lock_guard lock(mutex_);
        return objects_.size();
    }

private:
    struct Entry {
        ObjectSpec spec;
        BuiltObject built;
    };

    struct Job {
        std::mutex mutex;
        std::string status = "running";
        std::atomic<std::size_t> done{0};
        std::size_t total = 0;
        std::string csv;
        std::string error;
    };

    HttpResponse dispatch(const std::string& method, const std::string& path, const Params& params, const std::string& body) {
        std::vector<std::string> parts;
        std::stringstream ss(path);
        for (std::string p; std::getline(ss, p, '/');)
            if (!p.empty()) parts.push_back(p);
        if (parts.empty() || parts[0] != "api") return detail::error_response(404, "no route for " + path);
        parts.erase(parts.begin());
        const bool get = method == "GET", post = method == "POST";
        const auto n = parts.size();

        if (n == 1 && get && parts[0] == "spec") return detail::json_response(200, openapi_document());
        if (n == 1 && get && parts[0] == "problems") return problems();
        if (n == 1 && get && parts[0] == "sets") return sets();
        if (n == 1 && get && parts[0] == "health") return detail::json_response(200, {{"status", "ok"}});
        if (n == 1 && post && parts[0] == "feature-object") return create_object(body);
        if (n >= 2 && parts[0] == "feature-object" && get) {
            if (n == 2) return get_object(parts[1]);
            if (n == 3 && parts[2] == "features") return features(parts[1], params, false);
            if (n == 3 && parts[2] == "features.csv") return features(parts[1], params, true);
            if (n == 4 && parts[2] == "plot") return plot(parts[1], parts[3], params);
        }
        if (n == 2 && post && parts[0] == "plot" && parts[1] == "featureimportance") return importance(body);
        if (n == 1 && post && parts[0] == "batch") return submit_batch(body);
        if (n == 2 && get && parts[0] == "batch") return batch_status(parts[1]);
        if (n == 3 && get && parts[0] == "batch" && parts[2] == "result.csv") return batch_csv(parts[1]);
        return detail::error_response(404, "no route for " + method + " " + path);
    }

    static std::string param(const Params& params, const std::string& key, const std::string& fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string item; std::getline(ss, item, ',');) {
            item = detail::trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    static std::uint64_t parse_seed(const std::string& s) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || s.front() == '-') throw InvalidArgument("'" + s + "' is not a non-negative integer");
        return v;
    }

    HttpResponse not_found(const std::string& id) const { return detail::error_response(404, "unknown feature object '" + id + "'"); }

    OrderedJson object_json(const std::string& id, const Entry& e) const {
        const auto& fo = e.built.object;
        OrderedJson sets = OrderedJson::array();
        for (const auto& s : feature_sets()) {
            std::string reason;
            if (s.requires_function && !fo.has_function()) reason = "requires function evaluations";
            if (s.requires_blocks && !fo.has_grid()) reason = "requires a cell grid";
            sets.push_back({{"id", s.id}, {"available", reason.empty()}, {"reason", reason.empty() ? OrderedJson() : OrderedJson(reason)}});
        }
        return OrderedJson{{"id", id}, {"summary", summary_to_json(summarize(fo))}, {"sets", sets}};
    }

    std::filesystem::path spill_path(const std::string& id, const char* ext) const {
        return std::filesystem::path(config_.spill_dir) / (id + ext);
    }

    std::shared_ptr<const Entry> lookup(const std::string& id) {
        {
            std::lock_guard lock(mutex_);
            if (auto e = objects_.get(id)) return *e;
        }
        if (config_.spill_dir.empty() || id.find_first_of("/\\.") != std::string::npos) return nullptr;
        std::ifstream in(spill_path(id, ".object.json"));
        if (!in) return nullptr;
        const auto spec = object_spec_from_json(Json::parse(in));
        auto entry = std::make_shared<const Entry>(Entry{spec, build_object(spec)});
        store(id, entry);
        return entry;
    }

    void store(const std::string& id, std::shared_ptr<const Entry> entry) {
        std::lock_guard lock(mutex_);
        for (auto& [k, v] : objects_.put(id, std::move(entry))) {
            if (config_.spill_dir.empty()) continue;
            std::ofstream(spill_path(k, ".object.json")) << object_spec_to_json(v->spec).dump();
        }
    }

    void spill_job(const std::string& id, Job& job) {
        std::lock_guard lock(job.mutex);
        if (config_.spill_dir.empty() || job.status != "done") return;
        std::ofstream(spill_path(id, ".job.csv")) << job.csv;
        std::ofstream(spill_path(id, ".job.meta")) << job.total;
    }

    std::shared_ptr<Job> find_job(const std::string& id) {
        {
            std::lock_guard lock(mutex_);
            if (auto j = jobs_.get(id)) return *j;
        }
        if (config_.spill_dir.empty() || id.find_first_of("/\\.") != std::string::npos) return nullptr;
        std::ifstream csv(spill_path(id, ".job.csv")), meta(spill_path(id, ".job.meta"));
        if (!csv || !meta) return nullptr;
        auto job = std::make_shared<Job>();
        std::ostringstream os;
        os << csv.rdbuf();
        job->csv = os.str();
        meta >> job->total;
        job->done = job->total;
        job->status = "done";
        std::lock_guard lock(mutex_);
        for (auto& [k, v] : jobs_.put(id, job)) spill_job(k, *v);
        return job;
    }

    ServiceConfig config_;
    ThreadPool pool_;
    std::mutex mutex_;
    LruCache<std::string, std::shared_ptr<const Entry>> objects_;
    LruCache<std::string, std::shared_future<std::shared_ptr<const FeatureRow>>> results_;
    LruCache<std::string, std::shared_ptr<Job>> jobs_;
    std::uint64_t job_counter_ = 0;
};

} // namespace lkit
