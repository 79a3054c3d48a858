#ifndef SEMDT_RUN_CONFIG_HPP
#define SEMDT_RUN_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "semdt/data.hpp"
#include "semdt/optim.hpp"

namespace semdt {

// A training run description. The optim block keys mirror the hyperparameter
// table layout verbatim: epoch, optimizer, lr, mtm, scheduler_type,
// scheduler_decay, batch_size, lambda, grad_clip, overparams.
struct RunConfig {
    std::string dataset;               // registry name or file path
    std::string format = "csv";        // csv | libsvm
    TreeTask task = TreeTask::classification;
    int height = 2;
    std::vector<std::uint64_t> seeds = {0};
    OptimConfig optim;

    // non-registry datasets
    std::string target_column = "class";
    std::vector<std::string> categorical_columns;
    SplitFractions fractions{0.5, 0.25, 0.25};
    // provider-split datasets: a separate test file; validation is carved
    // from the train file at 0.8/0.2
    std::string test_dataset;
};

// Parses and validates; unknown keys anywhere are an error naming the key.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// Canonical JSON echo of every accepted key (defaults filled in).
nlohmann::json run_config_to_json(const RunConfig& config);

// Hash over the canonical config without the seed list, so artifacts from
// different seeds of one configuration compare as siblings.
std::string config_hash(const RunConfig& config);

// Loads the configured dataset (registry or file); split/standardize are
// still up to the caller.
Dataset load_config_dataset(const RunConfig& config, const std::string& data_dir);

// Registry entries carry their canonical split; plain files use the config's.
SplitFractions effective_fractions(const RunConfig& config);

// Split then standardize, honoring a provider test split when configured.
Dataset prepare_config_dataset(const RunConfig& config, const std::string& data_dir,
                               std::uint64_t seed);

}  // namespace semdt

#endif
