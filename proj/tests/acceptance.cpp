// Acceptance suite: every release criterion as one pass/fail line, with the
// thresholds pinned in code. Run all criteria or a single one:
//   semdt_acceptance [--criterion N]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "semdt/registry.hpp"
#include "semdt/train.hpp"
#include "semdt/tree_io.hpp"
#include "semdt/verify.hpp"

using namespace semdt;

namespace {

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

Dataset prepared(const std::string& name, std::uint64_t seed) {
    const RegistryEntry* entry = find_registry_entry(name);
    if (entry == nullptr) throw std::runtime_error("no registry entry " + name);
    Dataset ds = load_registry_dataset(*entry, SEMDT_DATA_DIR);
    split(ds, entry->fractions, seed, ds.task == TreeTask::classification);
    standardize(ds);
    return ds;
}

std::vector<double> run_registry_seeds(const std::string& name, int height,
                                       const OptimConfig& config,
                                       const std::vector<std::uint64_t>& seeds) {
    std::vector<double> metrics;
    for (std::uint64_t seed : seeds) {
        Dataset ds = prepared(name, seed);
        metrics.push_back(fit(ds, height, config, seed).test_metric);
    }
    return metrics;
}

std::vector<std::uint64_t> seed_range(int count) {
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < count; ++s) seeds.push_back(s);
    return seeds;
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

char detail_buffer[512];

// 1. Network argmax equals tree traversal across random architectures,
//    random box inputs and constructed boundary inputs.
CriterionResult criterion_equivalence() {
    const double t0 = now_seconds();
    const int heights[] = {1, 2, 3, 4, 5, 6};
    const int dims[] = {1, 4, 16};
    std::size_t total_mismatches = 0;
    std::size_t total_inputs = 0;
    int architectures = 0;

    Rng rng(2024);
    for (int height : heights) {
        for (int dim : dims) {
            for (TreeTask task : {TreeTask::classification, TreeTask::regression}) {
                SemNet net;
                if (task == TreeTask::classification) {
                    const int max_classes = std::min(1 << height, 6);
                    const int classes =
                        2 + static_cast<int>(uniform_index(rng, max_classes - 1));
                    net = encode(graft_classifier(height, classes), dim, task, rng);
                } else {
                    net = encode(build_balanced(height), dim, task, rng);
                }
                for (std::size_t i = 0; i < net.params.weights.size(); ++i) {
                    net.params.weights.data()[i] = uniform_range(rng, -1.0, 1.0);
                }
                for (double& b : net.params.biases) b = uniform_range(rng, -0.5, 0.5);

                EquivReport report = run_equiv_check(net, 100000, rng());
                total_mismatches += report.mismatches;
                total_inputs += report.samples;
                ++architectures;
            }
        }
    }
    const double elapsed = now_seconds() - t0;
    CriterionResult result;
    result.pass = total_mismatches == 0 && architectures >= 20 && elapsed < 120.0;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "%d architectures, %zu inputs, %zu mismatches, %.1fs (limit 120s)",
                  architectures, total_inputs, total_mismatches, elapsed);
    result.detail = detail_buffer;
    return result;
}

// 2. Analytic gradients vs central finite differences.
CriterionResult criterion_gradients() {
    const double t0 = now_seconds();
    GradcheckReport cls = run_gradcheck(TreeTask::classification, 50, 7);
    GradcheckReport reg = run_gradcheck(TreeTask::regression, 50, 8);
    const double elapsed = now_seconds() - t0;
    CriterionResult result;
    result.pass = cls.max_rel_error < 1e-4 && reg.max_rel_error < 1e-4 &&
                  elapsed < 60.0;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "classification max rel err %.2e, regression theta/alpha %.2e "
                  "(tolerance 1e-4), %.1fs (limit 60s)",
                  cls.max_rel_error, reg.max_rel_error, elapsed);
    result.detail = detail_buffer;
    return result;
}

// 3. Banknote authentication, height 3, 10 seeds.
CriterionResult criterion_banknote() {
    const double t0 = now_seconds();
    OptimConfig config;
    config.optimizer = OptimizerKind::adam;
    config.lr = 0.5;
    config.scheduler_decay = 0.98;
    config.batch_size = 128;
    config.epochs = 40;
    std::vector<double> metrics = run_registry_seeds("banknote", 3, config, seed_range(10));
    const double mean = mean_of(metrics);
    const double elapsed = now_seconds() - t0;
    CriterionResult result;
    result.pass = mean >= 99.0 && elapsed < 120.0;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "mean accuracy %.2f%% over 10 seeds (need >= 99.0), %.1fs (limit 120s)",
                  mean, elapsed);
    result.detail = detail_buffer;
    return result;
}

// 4. Balance scale, height 2, 10 seeds.
CriterionResult criterion_balance() {
    OptimConfig config;
    config.optimizer = OptimizerKind::adam;
    config.lr = 0.8;
    config.scheduler_decay = 0.98;
    config.batch_size = 128;
    config.epochs = 20;
    std::vector<double> metrics =
        run_registry_seeds("balance_scale", 2, config, seed_range(10));
    const double mean = mean_of(metrics);
    CriterionResult result;
    result.pass = mean >= 87.0;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "mean accuracy %.2f%% over 10 seeds (need >= 87.0)", mean);
    result.detail = detail_buffer;
    return result;
}

// 5. Acute inflammations 1 and 2, height 2: 100% on at least 9 of 10 seeds.
CriterionResult criterion_acute() {
    OptimConfig config1;
    config1.optimizer = OptimizerKind::adam;
    config1.lr = 0.3;
    config1.scheduler_decay = 0.99;
    config1.batch_size = 128;
    config1.epochs = 20;
    OptimConfig config2 = config1;
    config2.lr = 0.7;
    config2.scheduler_decay = 0.98;
    config2.epochs = 30;

    auto perfect_count = [](const std::vector<double>& metrics) {
        int count = 0;
        for (double m : metrics) count += m == 100.0 ? 1 : 0;
        return count;
    };
    const int perfect1 = perfect_count(
        run_registry_seeds("acute_inflammations_1", 2, config1, seed_range(10)));
    const int perfect2 = perfect_count(
        run_registry_seeds("acute_inflammations_2", 2, config2, seed_range(10)));

    CriterionResult result;
    result.pass = perfect1 >= 9 && perfect2 >= 9;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "100%% seeds: task 1 %d/10, task 2 %d/10 (need >= 9 each)",
                  perfect1, perfect2);
    result.detail = detail_buffer;
    return result;
}

// 6. Breast cancer, height 2, 10 seeds.
CriterionResult criterion_breast_cancer() {
    OptimConfig config;
    config.optimizer = OptimizerKind::adam;
    config.lr = 0.05;
    config.scheduler_decay = 0.90;
    config.batch_size = 256;
    config.epochs = 50;
    config.lambda = 1e-2;
    std::vector<double> metrics =
        run_registry_seeds("breast_cancer", 2, config, seed_range(10));
    const double mean = mean_of(metrics);
    CriterionResult result;
    result.pass = mean >= 95.5;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "mean accuracy %.2f%% over 10 seeds (need >= 95.5)", mean);
    result.detail = detail_buffer;
    return result;
}

// 7. Abalone regression, height 5, 5 seeds; RMSE in original target units.
CriterionResult criterion_abalone() {
    OptimConfig config;
    config.optimizer = OptimizerKind::adam;
    config.lr = 0.005;
    config.scheduler_decay = 0.95;
    config.batch_size = 32;
    config.epochs = 50;
    config.lambda = 5e-4;
    config.overparams = {248};
    std::vector<double> metrics = run_registry_seeds("abalone", 5, config, seed_range(5));
    const double mean = mean_of(metrics);
    CriterionResult result;
    result.pass = mean <= 2.28;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "mean RMSE %.3f over 5 seeds in original target units, rings "
                  "(need <= 2.28)",
                  mean);
    result.detail = detail_buffer;
    return result;
}

// 8. Noiseless two-piece piecewise-linear target learned to RMSE < 1e-2.
CriterionResult criterion_piecewise() {
    Rng rng(99);
    Dataset ds;
    ds.task = TreeTask::regression;
    const int rows = 400;
    ds.features = Matrix(rows, 1);
    ds.targets = Matrix(rows, 1);
    for (int r = 0; r < rows; ++r) {
        const double x = uniform_range(rng, -2.0, 2.0);
        ds.features(r, 0) = x;
        ds.targets(r, 0) = x < 0.0 ? x : -2.0 * x + 1.0;
    }
    ds.feature_names = {"x"};
    split(ds, {0.5, 0.25, 0.25}, 99, false);
    standardize(ds);

    // small-batch annealing: the split explores, best-val selection keeps the
    // epoch where it lands on the true break
    OptimConfig config;
    config.optimizer = OptimizerKind::adam;
    config.lr = 0.3;
    config.scheduler_decay = 0.997;
    config.epochs = 1500;
    config.batch_size = 8;
    const double rmse = fit(ds, 1, config, 1).test_metric;
    CriterionResult result;
    result.pass = rmse < 1e-2;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "test RMSE %.2e on the noiseless 2-piece target (need < 1e-2)", rmse);
    result.detail = detail_buffer;
    return result;
}

// 9. Exported tree and live network agree leaf-for-leaf on 10^4 inputs.
CriterionResult criterion_roundtrip() {
    std::size_t disagreements = 0;
    std::size_t models = 0;

    auto check_model = [&](const SemNet& net, int dim) {
        nlohmann::json doc = export_tree(decode(net));
        ObliqueTree restored = import_tree(doc);
        Rng rng(4242 + models);
        for (int i = 0; i < 10000; ++i) {
            std::vector<double> x(dim);
            for (double& v : x) v = uniform_range(rng, -3.0, 3.0);
            const int traversal_leaf = traverse(restored.tree, restored.params, x);
            const int net_leaf = forward(net, x).selected_leaf + net.num_nodes();
            if (traversal_leaf != net_leaf) ++disagreements;
        }
        ++models;
    };

    {
        Dataset ds = prepared("banknote", 0);
        OptimConfig config;
        config.optimizer = OptimizerKind::adam;
        config.lr = 0.5;
        config.scheduler_decay = 0.98;
        config.batch_size = 128;
        config.epochs = 10;
        RunResult run = fit(ds, 3, config, 0);
        check_model(run.best_net, ds.num_features());
    }
    {
        Dataset ds = prepared("abalone", 0);
        OptimConfig config;
        config.optimizer = OptimizerKind::adam;
        config.lr = 0.005;
        config.scheduler_decay = 0.95;
        config.batch_size = 32;
        config.epochs = 5;
        RunResult run = fit(ds, 4, config, 0);
        // checkpoint carries a folded view; compare against the plain net
        SemNet folded = run.best_net;
        folded.params = run.best_net.effective_params();
        folded.chain.factors.clear();
        check_model(folded, ds.num_features());
    }

    CriterionResult result;
    result.pass = disagreements == 0;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "%zu trained models x 10^4 inputs, %zu leaf disagreements",
                  models, disagreements);
    result.detail = detail_buffer;
    return result;
}

// 10. Identical config and seed produce byte-identical aggregate JSON.
CriterionResult criterion_determinism() {
    auto aggregate_bytes = [] {
        OptimConfig config;
        config.optimizer = OptimizerKind::adam;
        config.lr = 0.8;
        config.scheduler_decay = 0.98;
        config.batch_size = 128;
        config.epochs = 8;
        nlohmann::json per_seed = nlohmann::json::array();
        std::vector<double> metrics;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            Dataset ds = prepared("balance_scale", seed);
            RunResult run = fit(ds, 2, config, seed);
            metrics.push_back(run.test_metric);
            per_seed.push_back({{"seed", seed}, {"test_metric", run.test_metric}});
        }
        double mean = 0.0;
        for (double m : metrics) mean += m;
        mean /= static_cast<double>(metrics.size());
        double var = 0.0;
        for (double m : metrics) var += (m - mean) * (m - mean);
        nlohmann::json doc{{"per_seed", per_seed},
                           {"mean", mean},
                           {"std", std::sqrt(var / metrics.size())}};
        return doc.dump(2);
    };
    const std::string first = aggregate_bytes();
    const std::string second = aggregate_bytes();
    CriterionResult result;
    result.pass = first == second;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "aggregate JSON bytes %s across two identical runs",
                  result.pass ? "identical" : "DIFFER");
    result.detail = detail_buffer;
    return result;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[i + 1]);
        }
    }

    struct Entry {
        int id;
        const char* name;
        std::function<CriterionResult()> run;
    };
    const std::vector<Entry> criteria = {
        {1, "network argmax equals tree traversal", criterion_equivalence},
        {2, "gradients match finite differences", criterion_gradients},
        {3, "banknote height 3", criterion_banknote},
        {4, "balance scale height 2", criterion_balance},
        {5, "acute inflammations 1 and 2, height 2", criterion_acute},
        {6, "breast cancer height 2", criterion_breast_cancer},
        {7, "abalone regression height 5", criterion_abalone},
        {8, "synthetic piecewise-linear regression", criterion_piecewise},
        {9, "decode/export roundtrip", criterion_roundtrip},
        {10, "byte-identical aggregates per seed", criterion_determinism},
    };

    int failures = 0;
    for (const Entry& entry : criteria) {
        if (only != 0 && entry.id != only) continue;
        CriterionResult result;
        try {
            result = entry.run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s — %s\n", result.pass ? "PASS" : "FAIL",
                    entry.id, entry.name, result.detail.c_str());
        std::fflush(stdout);
        if (!result.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
