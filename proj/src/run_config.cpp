#include "semdt/run_config.hpp"

#include <set>
#include <stdexcept>

#include "semdt/hashing.hpp"
#include "semdt/registry.hpp"
#include "semdt/tree_io.hpp"

namespace semdt {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& doc, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
        }
    }
}

OptimConfig parse_optim(const json& doc) {
    reject_unknown_keys(doc,
                        {"epoch", "optimizer", "lr", "mtm", "scheduler_type",
                         "scheduler_decay", "batch_size", "lambda", "grad_clip",
                         "overparams"},
                        "optim block");
    OptimConfig optim;
    optim.epochs = doc.value("epoch", optim.epochs);
    if (doc.contains("optimizer")) {
        optim.optimizer = optimizer_from_string(doc.at("optimizer").get<std::string>());
    }
    optim.lr = doc.value("lr", optim.lr);
    if (doc.contains("mtm") && !doc.at("mtm").is_null()) {
        optim.momentum = doc.at("mtm").get<double>();
    }
    if (doc.contains("scheduler_type")) {
        optim.scheduler_type =
            scheduler_from_string(doc.at("scheduler_type").get<std::string>());
    }
    optim.scheduler_decay = doc.value("scheduler_decay", optim.scheduler_decay);
    optim.batch_size = doc.value("batch_size", optim.batch_size);
    if (doc.contains("lambda") && !doc.at("lambda").is_null()) {
        optim.lambda = doc.at("lambda").get<double>();
    }
    if (doc.contains("grad_clip") && !doc.at("grad_clip").is_null()) {
        optim.grad_clip = doc.at("grad_clip").get<double>();
    }
    if (doc.contains("overparams") && !doc.at("overparams").is_null()) {
        optim.overparams = doc.at("overparams").get<std::vector<int>>();
    }
    optim.validate();
    return optim;
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc) {
    reject_unknown_keys(doc,
                        {"dataset", "format", "task", "height", "seeds", "optim",
                         "target_column", "categorical_columns", "fractions",
                         "test_dataset"},
                        "run config");
    RunConfig config;
    config.dataset = doc.at("dataset").get<std::string>();
    config.format = doc.value("format", config.format);
    if (config.format != "csv" && config.format != "libsvm") {
        throw std::invalid_argument("config: format must be csv or libsvm");
    }
    if (doc.contains("task")) {
        const std::string task = doc.at("task").get<std::string>();
        if (task == "classification") {
            config.task = TreeTask::classification;
        } else if (task == "regression") {
            config.task = TreeTask::regression;
        } else {
            throw std::invalid_argument("config: task must be classification or regression");
        }
    }
    config.height = doc.value("height", config.height);
    if (config.height < 1) throw std::invalid_argument("config: height must be >= 1");
    if (doc.contains("seeds")) {
        config.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        if (config.seeds.empty()) throw std::invalid_argument("config: seeds empty");
    }
    if (doc.contains("optim")) config.optim = parse_optim(doc.at("optim"));
    config.target_column = doc.value("target_column", config.target_column);
    if (doc.contains("categorical_columns")) {
        config.categorical_columns =
            doc.at("categorical_columns").get<std::vector<std::string>>();
    }
    if (doc.contains("fractions")) {
        const auto f = doc.at("fractions").get<std::vector<double>>();
        if (f.size() != 3) throw std::invalid_argument("config: fractions needs 3 values");
        config.fractions = {f[0], f[1], f[2]};
    }
    config.test_dataset = doc.value("test_dataset", config.test_dataset);
    return config;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_json_file(path));
}

nlohmann::json run_config_to_json(const RunConfig& config) {
    json optim;
    optim["epoch"] = config.optim.epochs;
    optim["optimizer"] = to_string(config.optim.optimizer);
    optim["lr"] = config.optim.lr;
    optim["mtm"] = config.optim.momentum;
    optim["scheduler_type"] = to_string(config.optim.scheduler_type);
    optim["scheduler_decay"] = config.optim.scheduler_decay;
    optim["batch_size"] = config.optim.batch_size;
    optim["lambda"] = config.optim.lambda;
    if (config.optim.grad_clip) {
        optim["grad_clip"] = *config.optim.grad_clip;
    } else {
        optim["grad_clip"] = nullptr;
    }
    optim["overparams"] = config.optim.overparams;

    json doc;
    doc["dataset"] = config.dataset;
    doc["format"] = config.format;
    doc["task"] = config.task == TreeTask::classification ? "classification" : "regression";
    doc["height"] = config.height;
    doc["seeds"] = config.seeds;
    doc["optim"] = std::move(optim);
    doc["target_column"] = config.target_column;
    doc["categorical_columns"] = config.categorical_columns;
    doc["fractions"] = {config.fractions.train, config.fractions.val,
                        config.fractions.test};
    doc["test_dataset"] = config.test_dataset;
    return doc;
}

std::string config_hash(const RunConfig& config) {
    json doc = run_config_to_json(config);
    doc.erase("seeds");
    return sha256_hex(doc.dump());
}

SplitFractions effective_fractions(const RunConfig& config) {
    if (const RegistryEntry* entry = find_registry_entry(config.dataset)) {
        return entry->fractions;
    }
    return config.fractions;
}

namespace {

RawTable load_config_table(const RunConfig& config, const std::string& path) {
    if (config.format == "libsvm") return load_libsvm(path);
    CsvSchema schema;
    schema.target_column = config.target_column;
    schema.categorical_columns = config.categorical_columns;
    return load_csv(path, schema);
}

// Stacks two tables; LIBSVM widths may differ, so the narrower side is padded
// with zero feature columns before its label column.
RawTable concat_tables(RawTable a, RawTable b, bool libsvm) {
    if (libsvm && a.columns.size() != b.columns.size()) {
        RawTable& narrow = a.columns.size() < b.columns.size() ? a : b;
        const std::size_t wide = std::max(a.columns.size(), b.columns.size());
        RawColumn label = std::move(narrow.columns.back());
        narrow.columns.pop_back();
        while (narrow.columns.size() + 1 < wide) {
            RawColumn pad;
            pad.name = "x" + std::to_string(narrow.columns.size() + 1);
            pad.numbers.assign(narrow.num_rows, 0.0);
            narrow.columns.push_back(std::move(pad));
        }
        narrow.columns.push_back(std::move(label));
    }
    if (a.columns.size() != b.columns.size()) {
        throw std::invalid_argument("concat: train/test column counts differ");
    }
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
        if (a.columns[c].name != b.columns[c].name) {
            throw std::invalid_argument("concat: column mismatch at " +
                                        a.columns[c].name);
        }
        a.columns[c].numbers.insert(a.columns[c].numbers.end(),
                                    b.columns[c].numbers.begin(),
                                    b.columns[c].numbers.end());
        a.columns[c].strings.insert(a.columns[c].strings.end(),
                                    b.columns[c].strings.begin(),
                                    b.columns[c].strings.end());
    }
    a.num_rows += b.num_rows;
    return a;
}

}  // namespace

Dataset load_config_dataset(const RunConfig& config, const std::string& data_dir) {
    if (const RegistryEntry* entry = find_registry_entry(config.dataset)) {
        return load_registry_dataset(*entry, data_dir);
    }
    RawTable table = load_config_table(config, config.dataset);
    if (!config.test_dataset.empty()) {
        table = concat_tables(std::move(table),
                              load_config_table(config, config.test_dataset),
                              config.format == "libsvm");
    }
    if (!config.categorical_columns.empty() && config.format != "libsvm") {
        table = one_hot(table, config.categorical_columns);
    }
    const std::string target =
        config.format == "libsvm" ? "label" : config.target_column;
    return make_dataset(table, target, config.task);
}

Dataset prepare_config_dataset(const RunConfig& config, const std::string& data_dir,
                               std::uint64_t seed) {
    if (find_registry_entry(config.dataset) != nullptr || config.test_dataset.empty()) {
        Dataset dataset = load_config_dataset(config, data_dir);
        split(dataset, effective_fractions(config), seed,
              dataset.task == TreeTask::classification);
        standardize(dataset);
        return dataset;
    }
    // provider split: the first file is train+val material, the second test
    RawTable train_table = load_config_table(config, config.dataset);
    const std::size_t train_rows = train_table.num_rows;
    RawTable table = concat_tables(std::move(train_table),
                                   load_config_table(config, config.test_dataset),
                                   config.format == "libsvm");
    if (!config.categorical_columns.empty() && config.format != "libsvm") {
        table = one_hot(table, config.categorical_columns);
    }
    const std::string target =
        config.format == "libsvm" ? "label" : config.target_column;
    Dataset dataset = make_dataset(table, target, config.task);
    split_provider(dataset, train_rows, seed);
    standardize(dataset);
    return dataset;
}

}  // namespace semdt
