// Samples a benchmark problem, prints the feature object summary, a few
// feature sets, and the cell-mapping plot payload.

#include <cstdio>
#include <iostream>

#include "lkit/lkit.hpp"

int main() {
    using namespace lkit;
    const auto problem = make_problem("gallagher101", 2, 2);

    SampleSpec spec;
    spec.n_obs = 400;
    spec.dim = problem.dim;
    spec.lower = problem.lower;
    spec.upper = problem.upper;
    spec.method = SampleMethod::lhs;
    spec.seed = 7;
    const Matrix x = create_initial_sample(spec);

    FeatureObjectOptions opt;
    opt.lower = problem.lower;
    opt.upper = problem.upper;
    opt.blocks = std::vector<int>{4};
    opt.function = problem.evaluate;
    const auto fo = create_feature_object(x, evaluate_rows(problem, x), opt);
    std::cout << summarize(fo).to_string() << "\n";

    const auto results = calculate_features(fo, {"ela_meta", "nbc", "cm_conv", "ic"}, {}, 7);
    for (const auto& r : results) {
        if (!r.ok()) {
            std::printf("%-10s failed: %s\n", r.set.c_str(), r.error.c_str());
            continue;
        }
        for (const auto& [name, value] : r.values->entries())
            std::printf("%-40s %s\n", name.c_str(), value.to_string().c_str());
    }
    std::printf("evaluations: %llu\n", static_cast<unsigned long long>(fo.evaluation_count()));

    std::cout << cell_mapping_plot_data(fo).dump(2).substr(0, 400) << "\n...\n";
}
