#ifndef SEMDT_TRAIN_HPP
#define SEMDT_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "semdt/data.hpp"
#include "semdt/optim.hpp"
#include "semdt/semnet.hpp"

namespace semdt {

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_metric = 0.0;
};

struct RunResult {
    SemNet best_net;            // checkpoint selected by validation
    ObliqueTree best_tree;      // its decoded form
    std::vector<EpochLog> epochs;
    int best_epoch = -1;
    double best_val_metric = 0.0;
    double test_metric = 0.0;   // accuracy % or RMSE in original units
    std::uint64_t seed = 0;
    double seconds = 0.0;
};

struct AggregateResult {
    double mean = 0.0;
    double stddev = 0.0;        // population std over seeds
    std::vector<double> per_seed;
    std::vector<std::uint64_t> seeds;
    int height = 0;
    std::string config_hash;
    bool partial = false;       // a seed aborted
    std::vector<std::string> errors;
};

// Percentage accuracy via hard traversal (classification) or RMSE in original
// target units (regression) over the given rows of the dataset.
double evaluate(const ObliqueTree& model, const Dataset& dataset,
                const std::vector<int>& rows);

// One training run: epochs of seeded shuffled mini-batches; after each epoch
// the decoded hard tree is scored on the validation split and the best
// checkpoint kept (ties keep the earlier epoch). The test metric is computed
// once, on that checkpoint.
RunResult fit(const Dataset& dataset, int height, const OptimConfig& config,
              std::uint64_t seed);

// Independent fits across seeds; metrics aggregated as mean +- population
// std. A seed that aborts marks the aggregate partial.
AggregateResult run_seeds(const Dataset& dataset, int height,
                          const OptimConfig& config,
                          const std::vector<std::uint64_t>& seeds,
                          int threads = 1,
                          std::vector<RunResult>* runs_out = nullptr);

// "mean +- std" with table-style precision (1 decimal for accuracy, 3 for
// RMSE-scale values).
std::string format_mean_std(double mean, double stddev, TreeTask task);

}  // namespace semdt

#endif
