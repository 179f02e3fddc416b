// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "dist_oracle.hpp"
#include "gcm_oracle.hpp"
#include "helpers.hpp"

using namespace lkit;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string group_of(const std::string& set) {
    if (set.rfind("ela_", 0) == 0) return "ela";
    if (set.rfind("cm_", 0) == 0) return "cm";
    if (set == "basic" || set == "limo" || set == "pca") return "basic+limo+pca";
    return set;
}

FeatureObject gallagher_fixture() { return test::problem_object("gallagher101", 2, 800, 2, 1, std::vector<int>{8, 5}); }

void census() {
    const auto fo = gallagher_fixture();
    const auto start = std::chrono::steady_clock::now();
    const auto results = calculate_features(fo, {"all"}, {}, 1);
    const double took = seconds_since(start);
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    std::string errors;
    for (const auto& r : results) {
        if (!r.ok()) {
            errors += " " + r.set + "(" + r.error + ")";
            continue;
        }
        counts[group_of(r.set)] += r.values->size();
        total += r.values->size();
    }
    const std::map<std::string, std::size_t> expected{{"ela", 83}, {"cm", 20},  {"gcm", 75}, {"bt", 93},
                                                      {"nbc", 7},  {"disp", 18}, {"ic", 7},   {"basic+limo+pca", 40}};
    std::string detail;
    for (const auto& [g, n] : expected) detail += g + "=" + std::to_string(counts[g]) + " ";
    detail += "total=" + std::to_string(total) + " in " + fmt("%.2f", took) + " s";
    if (!errors.empty()) detail += "; errors:" + errors;
    report(counts == expected && total == 343 && errors.empty() && took < 60.0, "set-size census", detail);
}

/// Each costs block is a (costs_fun_evals, costs_runtime) pair; sets with per-approach
/// features carry one block per approach, the last one closing the set.
void costs_convention() {
    const auto fo = gallagher_fixture();
    bool ok = true;
    std::string detail;
    for (const auto& set : list_feature_sets()) {
        const auto before = fo.evaluation_count();
        const auto fv = calculate_feature_set(fo, set, {}, 1);
        const auto used = static_cast<std::int64_t>(fo.evaluation_count() - before);
        const auto names = fv.names();
        const std::size_t n = names.size();
        const bool per_approach = set == "gcm" || set == "bt";
        std::vector<std::string> prefixes;
        if (per_approach) {
            for (const auto* a : {"min", "mean", "near"}) prefixes.push_back(set + "." + a + ".");
        } else {
            prefixes.push_back(set + ".");
        }
        const std::string last = prefixes.back();
        bool shape = n >= 2 && names[n - 2] == last + "costs_fun_evals" && names[n - 1] == last + "costs_runtime";
        std::int64_t reported = 0;
        for (const auto& p : prefixes) {
            const auto fe = fv.find(p + "costs_fun_evals");
            const auto rt = fv.find(p + "costs_runtime");
            shape = shape && fe && rt && fe->is_integer() && !rt->is_missing() && rt->as_double() >= 0;
            if (fe && fe->is_integer()) reported += fe->as_integer();
        }
        bool evals = false;
        std::int64_t expected = 0;
        if (set == "ela_conv") {
            expected = 1000;
            evals = reported == expected && used == expected;
        } else if (set == "ela_curv" || set == "ela_local") {
            expected = used;
            evals = reported == used && used > 0;
        } else {
            evals = reported == 0 && used == 0;
        }
        if (!shape || !evals) {
            ok = false;
            detail += set + "(shape " + (shape ? "ok" : "bad") + ", evals " + std::to_string(reported) + " vs " + std::to_string(expected) + ") ";
        }
        if (set == "ela_conv" || set == "ela_curv" || set == "ela_local") detail += set + "=" + std::to_string(reported) + " ";
    }
    report(ok, "costs convention", detail + "(gcm/bt: one costs pair per approach)");
}

SymbolSequence unit_line(const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Matrix x(n, 1);
    Vector v(n);
    std::vector<std::size_t> tour;
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = static_cast<double>(i);
        v[i] = y[static_cast<std::size_t>(i)];
        tour.push_back(static_cast<std::size_t>(i));
    }
    return sequence_from_tour(x, v, tour);
}

void information_content_oracle() {
    const auto ic = information_content(unit_line({0, 1, 0, 1}).symbols(0.0));
    const double h_expected = std::log(2.0) / std::log(6.0);
    const bool hand = std::abs(ic.h - h_expected) <= 1e-9 && ic.m == 1.0;

    Rng rng(2024);
    int h_bad = 0, m_bad = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::string name = problem_names[rng.below(problem_names.size())];
        const std::size_t d = 1 + rng.below(5);
        const std::size_t n = 50 + rng.below(251);
        const auto fo = test::problem_object(name, d, n, 1 + rng.below(20), rng.next());
        const auto c = ic_curves(fo, {}, rng.next());
        bool h_mono = true, m_mono = true;
        for (std::size_t k = 1; k < c.epsilon.size(); ++k) {
            h_mono = h_mono && c.h[k] <= c.h[k - 1];
            m_mono = m_mono && c.m[k] <= c.m[k - 1];
        }
        h_bad += !h_mono;
        m_bad += !m_mono;
    }
    report(hand && h_bad == 0 && m_bad == 0, "information content",
           "hand H=" + fmt("%.9f", ic.h) + " (want " + fmt("%.9f", h_expected) + "), M0=" + fmt("%g", ic.m) +
               "; over 100 random instances H(eps) increased somewhere in " + std::to_string(h_bad) + ", M(eps) in " + std::to_string(m_bad));
}

void gcm_oracle() {
    const std::vector<std::vector<int>> shapes{{1}, {2}, {3}, {4}, {5}, {6}, {2, 2}, {2, 3}, {3, 2}, {1, 2, 3}};
    Rng rng(77);
    std::size_t grids = 0;
    double worst_linear = 0, worst_power = 0;
    bool attractors_ok = true;
    auto check = [&](const std::vector<int>& blocks, const std::vector<double>& v) {
        const auto dim = static_cast<Eigen::Index>(blocks.size());
        const auto m = build_transition_model(CellGrid(blocks, Vector::Zero(dim), Vector::Ones(dim)), v);
        const auto o = test::chain_oracle(blocks, v);
        ++grids;
        if (m.attractors != o.attractors) {
            attractors_ok = false;
            return;
        }
        worst_linear = std::max(worst_linear, (m.absorption - o.absorption).cwiseAbs().maxCoeff());
        const Matrix limit = test::power_limit(o.transition);
        for (std::size_t a = 0; a < o.attractors.size(); ++a)
            worst_power = std::max(worst_power, (m.absorption.col(static_cast<Eigen::Index>(a)) -
                                                 limit.col(static_cast<Eigen::Index>(o.attractors[a])))
                                                    .cwiseAbs()
                                                    .maxCoeff());
    };
    for (const auto& blocks : shapes) {
        std::size_t n = 1;
        for (int b : blocks) n *= static_cast<std::size_t>(b);
        std::size_t patterns = 1;
        for (std::size_t k = 0; k < n; ++k) patterns *= 3;
        for (std::size_t p = 0; p < patterns; ++p) {
            std::vector<double> v(n);
            std::size_t code = p;
            for (auto& x : v) {
                x = static_cast<double>(code % 3) + rng.uniform(0.0, 0.5);
                code /= 3;
            }
            check(blocks, v);
            std::size_t tied = p;
            for (auto& x : v) {
                x = static_cast<double>(tied % 3);
                tied /= 3;
            }
            check(blocks, v);
        }
    }
    report(attractors_ok && worst_linear <= 1e-8 && worst_power <= 1e-6, "GCM oracle equivalence",
           std::to_string(grids) + " grids with n <= 6 cells, attractor sets " + (attractors_ok ? "equal" : "DIFFER") +
               ", max |absorption - linear solve| = " + fmt("%.2e", worst_linear) + ", max |absorption - P^(2^14)| = " + fmt("%.2e", worst_power));
}

void barrier_tree_hand() {
    const auto m = build_transition_model(CellGrid({5}, Vector::Zero(1), Vector::Constant(1, 5.0)), {1, 3, 0, 4, 2});
    const auto t = build_barrier_tree(m);
    std::size_t leaves = 0;
    std::string saddles;
    std::size_t n_saddles = 0;
    bool saddle_at_3 = false;
    for (const auto& node : t.nodes) {
        if (node.leaf()) {
            ++leaves;
            continue;
        }
        ++n_saddles;
        saddles += fmt("%g ", node.height);
        saddle_at_3 = saddle_at_3 || node.height == 3.0;
    }
    report(leaves == 2 && n_saddles == 1 && saddle_at_3 && t.depth() == 3.0, "barrier tree (1,3,0,4,2)",
           "leaves=" + std::to_string(leaves) + ", inner nodes=" + std::to_string(n_saddles) + " at heights " + saddles + ", depth=" +
               fmt("%g", t.depth()) + " (want 2 leaves, 1 saddle at 3, depth 3)");
}

void nbc_disp_oracle() {
    const std::vector<std::string> nbc_names{"nbc.nn_nb.sd_ratio", "nbc.nn_nb.mean_ratio", "nbc.nn_nb.cor", "nbc.dist_ratio.coeff_var",
                                             "nbc.nb_fitness.cor"};
    std::vector<std::string> disp_names;
    for (const auto* kind : {"ratio_mean", "ratio_median", "diff_mean", "diff_median"})
        for (const auto* q : {"02", "05", "10", "25"}) disp_names.push_back(std::string("disp.") + kind + "_" + q);

    Rng rng(99);
    double worst = 0;
    bool missing_ok = true;
    auto compare = [&](const FeatureValue& got, double want) {
        if (std::isnan(want)) {
            missing_ok = missing_ok && got.is_missing();
            return;
        }
        if (got.is_missing()) {
            missing_ok = false;
            return;
        }
        worst = std::max(worst, std::abs(got.as_double() - want));
    };
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 20 + rng.below(81);
        const std::size_t d = 1 + rng.below(5);
        const Matrix x = test::uniform_matrix(n, d, -5, 5, rng.next());
        Vector y(x.rows());
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = x.row(i).squaredNorm() + 3 * std::sin(3 * x(i, 0)) + rng.uniform();
        const bool manhattan = inst % 2 == 1;
        ControlParams c;
        if (manhattan) c.set("disp.dist_method", "manhattan");
        const auto fo = create_feature_object(x, y);
        const auto nbc_fv = calculate_feature_set(fo, "nbc", c);
        const auto disp_fv = calculate_feature_set(fo, "disp", c);
        const auto nbc_want = test::nbc_oracle(x, y);
        const auto disp_want = test::disp_oracle(x, y, {0.02, 0.05, 0.10, 0.25}, manhattan);
        for (std::size_t k = 0; k < 5; ++k) compare(nbc_fv.at(nbc_names[k]), nbc_want[k]);
        for (std::size_t k = 0; k < 16; ++k) compare(disp_fv.at(disp_names[k]), disp_want[k]);
    }

    const auto g = calculate_feature_set(test::problem_object("gallagher101", 2, 800, 2, 1), "nbc");
    const double printed[5] = {0.303, 0.605, 0.271, 0.383, -0.364};
    bool smoke = true;
    std::string values;
    for (std::size_t k = 0; k < 5; ++k) {
        smoke = smoke && std::abs(g[nbc_names[k]] - printed[k]) <= 0.2;
        values += fmt("%.3f ", g[nbc_names[k]]);
    }
    report(worst <= 1e-10 && missing_ok && smoke, "NBC/disp brute force",
           "50 instances, max deviation " + fmt("%.2e", worst) + (missing_ok ? "" : ", missing values disagree") +
               "; gallagher101 nbc = " + values + "(printed 0.303 0.605 0.271 0.383 -0.364, tolerance 0.2)");
}

void ela_fixtures() {
    const auto sphere = test::function_object(test::sphere, 200, 2, -5, 5, 3);
    const auto conv = calculate_feature_set(sphere, "ela_conv", {}, 1);
    const double p = conv["ela_conv.conv_prob"];
    const bool conv_ok = std::abs(p - 1.0) <= 1.0 / 1000.0;

    const auto lin = test::function_object([](const Vector& x) { return 2 + 3 * x[0] + 4 * x[1]; }, 200, 2, -5, 5, 4);
    const auto meta = calculate_feature_set(lin, "ela_meta");
    const double r2 = meta["ela_meta.lin_simple.adj_r2"], icpt = meta["ela_meta.lin_simple.intercept"],
                 ratio = meta["ela_meta.lin_simple.coef.max_by_min"];
    const bool meta_ok = std::abs(r2 - 1) <= 1e-10 && std::abs(icpt - 2) <= 1e-10 && std::abs(ratio - 4.0 / 3.0) <= 1e-10;

    const auto quad = test::function_object([](const Vector& x) { return x[0] * x[0] + 10 * x[1] * x[1]; }, 200, 2, -5, 5, 5);
    const double cond = calculate_feature_set(quad, "ela_curv", {}, 1)["ela_curv.hessian_cond.mean"];
    const bool curv_ok = std::abs(cond - 10) <= 1e-3;

    const auto local = calculate_feature_set(sphere, "ela_local", {}, 1);
    const auto clusters = local.at("ela_local.n_loc_opt.abs").as_integer();

    report(conv_ok && meta_ok && curv_ok && clusters == 1, "ELA analytic fixtures",
           "sphere conv_prob=" + fmt("%.4f", p) + "; linear adj_r2=" + fmt("%.12f", r2) + " intercept=" + fmt("%.10f", icpt) +
               " coef ratio=" + fmt("%.10f", ratio) + "; hessian ratio mean=" + fmt("%.6f", cond) + "; sphere local clusters=" +
               std::to_string(clusters));
}

void grid_fixture() {
    const auto s = summarize(gallagher_fixture());
    const bool ok = s.cell_widths == std::vector<double>{1.25, 2.0} && s.cells_total == 40;
    report(ok, "grid fixture",
           "cell widths (" + fmt("%g", s.cell_widths[0]) + ", " + fmt("%g", s.cell_widths[1]) + "), " + std::to_string(s.cells_total) + " cells");
}

std::string without_runtime(const std::string& csv) {
    const auto t = read_csv_text(csv);
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& r) {
        std::vector<std::string> kept;
        for (std::size_t j = 0; j < r.size(); ++j)
            if (!is_runtime_column(t.header[j])) kept.push_back(r[j]);
        write_csv_row(os, kept);
    };
    emit(t.header);
    for (const auto& r : t.rows) emit(r);
    return os.str();
}

void determinism() {
    auto run = [](const std::string& threads) {
        std::ostringstream out, err;
        const int code = cli::run_cli({"compute", "--problem", "gallagher101", "--instance", "2", "--dim", "2", "--n", "300", "--blocks", "5",
                                       "--sets", "all", "--seed", "11", "--reps", "3", "--threads", threads},
                                      out, err);
        return std::make_pair(code, out.str());
    };
    const auto a = run("1"), b = run("1"), c = run("3");
    const bool codes = a.first == 0 && b.first == 0 && c.first == 0;
    const bool same_runs = without_runtime(a.second) == without_runtime(b.second);
    const bool same_threads = without_runtime(a.second) == without_runtime(c.second);
    report(codes && same_runs && same_threads, "determinism",
           std::string("compute all sets, 3 replications: two runs ") + (same_runs ? "identical" : "DIFFER") + ", 1 vs 3 threads " +
               (same_threads ? "identical" : "DIFFER") + " (runtime columns excluded)");
}

void microbenchmark() {
    cli::BenchOptions basic;
    basic.sets = "basic";
    basic.reps = 101;
    const auto tb = cli::run_bench(basic);
    const double median = stats::quantile(tb[0].seconds, 0.5);

    cli::BenchOptions all;
    all.reps = 1;
    const auto ta = cli::run_bench(all);
    double slowest = 0;
    std::string slowest_set;
    for (const auto& t : ta) {
        if (t.seconds[0] <= slowest) continue;
        slowest = t.seconds[0];
        slowest_set = t.set;
    }
    report(median < 1e-3 && slowest < 10.0 && ta.size() == 17, "microbenchmark",
           "basic median " + fmt("%.1f", median * 1e6) + " us; slowest set " + slowest_set + " " + fmt("%.3f", slowest) + " s (n = 800, d = 2)");
}

} // namespace

int main() {
    census();
    costs_convention();
    information_content_oracle();
    gcm_oracle();
    barrier_tree_hand();
    nbc_disp_oracle();
    ela_fixtures();
    grid_fixture();
    determinism();
    microbenchmark();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures ? 1 : 0;
}
