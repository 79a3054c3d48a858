#include "semdt/tree_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace semdt {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        rows.push_back(std::vector<double>(m.row(r), m.row(r) + m.cols()));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) {
        throw std::runtime_error("matrix: expected nonempty array");
    }
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != m.cols()) throw std::runtime_error("matrix: ragged rows");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

}  // namespace

nlohmann::json export_tree(const ObliqueTree& model, const Standardizer* stats,
                           bool destandardize, const ArtifactMeta* meta) {
    const ObliqueTree* source = &model;
    ObliqueTree rewritten;
    if (destandardize) {
        if (stats == nullptr || !stats->fitted()) {
            throw std::runtime_error("export_tree: no standardizer for de-standardized export");
        }
        rewritten = destandardize_tree(model, *stats);
        source = &rewritten;
    }

    json doc;
    doc["n"] = source->params.dim();
    doc["task"] = source->task == TreeTask::classification ? "classification" : "regression";

    json nodes = json::array();
    for (int i = 0; i < source->tree.num_internal(); ++i) {
        const InternalNode& node = source->tree.internal(i);
        json entry;
        entry["id"] = node.id;
        entry["weights"] = std::vector<double>(
            source->params.weights.row(i),
            source->params.weights.row(i) + source->params.dim());
        entry["bias"] = source->params.biases[i];
        entry["left"] = node.left;
        entry["right"] = node.right;
        nodes.push_back(std::move(entry));
    }
    doc["nodes"] = std::move(nodes);

    json leaves = json::array();
    const int k = source->tree.num_internal();
    for (int j = 0; j < source->tree.num_leaves(); ++j) {
        const Leaf& leaf = source->tree.leaves()[j];
        json entry;
        entry["id"] = k + j;
        if (source->task == TreeTask::classification) {
            entry["class"] = leaf.class_label;
        } else {
            const int n = source->params.dim();
            if (source->regressors.size() == 1) {
                const double* row = source->regressors[0].row(j);
                entry["theta"] = std::vector<double>(row, row + n);
                entry["alpha"] = row[n];
            } else {
                // multi-output: one theta row and one alpha per dimension
                json thetas = json::array();
                json alphas = json::array();
                for (const Matrix& block : source->regressors) {
                    const double* row = block.row(j);
                    thetas.push_back(std::vector<double>(row, row + n));
                    alphas.push_back(row[n]);
                }
                entry["theta"] = std::move(thetas);
                entry["alpha"] = std::move(alphas);
            }
        }
        leaves.push_back(std::move(entry));
    }
    doc["leaves"] = std::move(leaves);

    if (meta != nullptr) {
        doc["_meta"] = {{"config_hash", meta->config_hash},
                        {"seed", meta->seed},
                        {"destandardized", destandardize}};
    }
    return doc;
}

ObliqueTree import_tree(const nlohmann::json& doc) {
    const int n = doc.at("n").get<int>();
    const std::string task_name = doc.at("task").get<std::string>();
    const TreeTask task = task_name == "classification" ? TreeTask::classification
                                                        : TreeTask::regression;
    if (task_name != "classification" && task_name != "regression") {
        throw std::runtime_error("import_tree: unknown task " + task_name);
    }

    const json& nodes = doc.at("nodes");
    const json& leaf_docs = doc.at("leaves");
    const int k = static_cast<int>(nodes.size());

    std::vector<InternalNode> internal(k);
    DecisionParams params;
    params.weights = Matrix(k, n);
    params.biases.resize(k);
    for (const json& entry : nodes) {
        const int id = entry.at("id").get<int>();
        if (id < 0 || id >= k) throw std::runtime_error("import_tree: bad node id");
        internal[id] = InternalNode{id, entry.at("left").get<int>(),
                                    entry.at("right").get<int>()};
        const auto weights = entry.at("weights").get<std::vector<double>>();
        if (static_cast<int>(weights.size()) != n) {
            throw std::runtime_error("import_tree: weight row has wrong length");
        }
        for (int c = 0; c < n; ++c) params.weights(id, c) = weights[c];
        params.biases[id] = entry.at("bias").get<double>();
    }

    std::vector<Leaf> leaves(leaf_docs.size());
    ObliqueTree model;
    int out_dim = 1;
    if (task == TreeTask::regression && !leaf_docs.empty()) {
        const json& alpha = leaf_docs[0].at("alpha");
        out_dim = alpha.is_array() ? static_cast<int>(alpha.size()) : 1;
        model.regressors.assign(out_dim, Matrix(leaf_docs.size(), n + 1));
    }
    for (const json& entry : leaf_docs) {
        const int id = entry.at("id").get<int>();
        const int slot = id - k;
        if (slot < 0 || slot >= static_cast<int>(leaves.size())) {
            throw std::runtime_error("import_tree: bad leaf id");
        }
        Leaf leaf;
        leaf.id = id;
        leaf.regressor = slot;
        if (task == TreeTask::classification) {
            leaf.class_label = entry.at("class").get<int>();
        } else if (out_dim == 1) {
            const auto theta = entry.at("theta").get<std::vector<double>>();
            if (static_cast<int>(theta.size()) != n) {
                throw std::runtime_error("import_tree: theta has wrong length");
            }
            for (int c = 0; c < n; ++c) model.regressors[0](slot, c) = theta[c];
            model.regressors[0](slot, n) = entry.at("alpha").get<double>();
        } else {
            const json& thetas = entry.at("theta");
            const json& alphas = entry.at("alpha");
            for (int d = 0; d < out_dim; ++d) {
                const auto theta = thetas[d].get<std::vector<double>>();
                for (int c = 0; c < n; ++c) model.regressors[d](slot, c) = theta[c];
                model.regressors[d](slot, n) = alphas[d].get<double>();
            }
        }
        leaves[slot] = leaf;
    }

    // height recovered from the structure before validation
    int height = 0;
    {
        std::vector<std::pair<int, int>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [id, depth] = stack.back();
            stack.pop_back();
            if (id >= k) {
                height = std::max(height, depth);
            } else {
                stack.push_back({internal[id].left, depth + 1});
                stack.push_back({internal[id].right, depth + 1});
            }
        }
    }
    model.tree = TreeStructure(std::move(internal), std::move(leaves), height);
    model.params = std::move(params);
    model.task = task;
    return model;
}

ObliqueTree destandardize_tree(const ObliqueTree& model, const Standardizer& stats) {
    const int n = model.params.dim();
    if (static_cast<int>(stats.means.size()) != n) {
        throw std::runtime_error("destandardize: feature stats dimension mismatch");
    }
    ObliqueTree out = model;
    for (int i = 0; i < model.params.num_nodes(); ++i) {
        double shift = 0.0;
        for (int c = 0; c < n; ++c) {
            out.params.weights(i, c) = model.params.weights(i, c) / stats.stds[c];
            shift += model.params.weights(i, c) * stats.means[c] / stats.stds[c];
        }
        out.params.biases[i] = model.params.biases[i] - shift;
    }
    for (std::size_t d = 0; d < model.regressors.size(); ++d) {
        if (stats.target_stds.size() <= d) {
            throw std::runtime_error("destandardize: target stats missing");
        }
        const double sy = stats.target_stds[d];
        const double my = stats.target_means[d];
        for (std::size_t j = 0; j < model.regressors[d].rows(); ++j) {
            const double* row = model.regressors[d].row(j);
            double* out_row = out.regressors[d].row(j);
            double shift = 0.0;
            for (int c = 0; c < n; ++c) {
                out_row[c] = row[c] * sy / stats.stds[c];
                shift += row[c] * stats.means[c] / stats.stds[c];
            }
            out_row[n] = my + sy * (row[n] - shift);
        }
    }
    return out;
}

nlohmann::json standardizer_to_json(const Standardizer& stats) {
    json doc;
    doc["means"] = stats.means;
    doc["stds"] = stats.stds;
    if (!stats.target_means.empty()) {
        doc["target_mean"] = stats.target_means;
        doc["target_std"] = stats.target_stds;
    }
    return doc;
}

Standardizer standardizer_from_json(const nlohmann::json& doc) {
    Standardizer stats;
    stats.means = doc.at("means").get<std::vector<double>>();
    stats.stds = doc.at("stds").get<std::vector<double>>();
    if (doc.contains("target_mean")) {
        stats.target_means = doc.at("target_mean").get<std::vector<double>>();
        stats.target_stds = doc.at("target_std").get<std::vector<double>>();
    }
    return stats;
}

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint) {
    const SemNet& net = checkpoint.net;
    json doc;
    doc["version"] = kCheckpointVersion;
    doc["masks_hash"] = masks_hash(net);
    doc["task"] = net.task == TreeTask::classification ? "classification" : "regression";
    doc["input_dim"] = net.input_dim;

    json structure;
    structure["height"] = net.tree.height();
    json children = json::array();
    for (int i = 0; i < net.tree.num_internal(); ++i) {
        children.push_back({net.tree.internal(i).left, net.tree.internal(i).right});
    }
    structure["children"] = std::move(children);
    if (net.task == TreeTask::classification) {
        json labels = json::array();
        for (const Leaf& leaf : net.tree.leaves()) labels.push_back(leaf.class_label);
        structure["leaf_classes"] = std::move(labels);
    }
    doc["tree"] = std::move(structure);

    doc["params"] = {{"weights", matrix_to_json(net.params.weights)},
                     {"biases", net.params.biases}};
    if (!net.regressors.empty()) {
        json blocks = json::array();
        for (const Matrix& block : net.regressors) blocks.push_back(matrix_to_json(block));
        doc["regressors"] = std::move(blocks);
    }
    if (net.has_chain()) {
        json factors = json::array();
        for (const Matrix& factor : net.chain.factors) {
            factors.push_back(matrix_to_json(factor));
        }
        doc["overparam_chain"] = std::move(factors);
    }
    if (checkpoint.standardizer) {
        doc["standardizer"] = standardizer_to_json(*checkpoint.standardizer);
    }
    doc["config_hash"] = checkpoint.meta.config_hash;
    doc["seed"] = checkpoint.meta.seed;
    return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
    if (doc.at("version").get<int>() != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version");
    }
    const std::string task_name = doc.at("task").get<std::string>();
    const TreeTask task = task_name == "regression" ? TreeTask::regression
                                                    : TreeTask::classification;

    const json& structure = doc.at("tree");
    const json& children = structure.at("children");
    const int k = static_cast<int>(children.size());
    std::vector<InternalNode> internal(k);
    for (int i = 0; i < k; ++i) {
        internal[i] = InternalNode{i, children[i][0].get<int>(), children[i][1].get<int>()};
    }
    std::vector<Leaf> leaves(k + 1);
    for (int j = 0; j <= k; ++j) leaves[j] = Leaf{k + j, -1, j};
    if (task == TreeTask::classification) {
        const json& labels = structure.at("leaf_classes");
        for (int j = 0; j <= k; ++j) leaves[j].class_label = labels[j].get<int>();
    }
    TreeStructure tree(std::move(internal), std::move(leaves),
                       structure.at("height").get<int>());

    Checkpoint checkpoint;
    // masks rebuilt from the tree; decision rows then overwritten
    checkpoint.net = encode(tree, doc.at("input_dim").get<int>(), task, 0);
    SemNet& net = checkpoint.net;
    net.params.weights = matrix_from_json(doc.at("params").at("weights"));
    net.params.biases = doc.at("params").at("biases").get<std::vector<double>>();
    if (net.params.num_nodes() != k) throw std::runtime_error("checkpoint: weight shape");

    if (doc.contains("regressors")) {
        net.regressors.clear();
        for (const json& block : doc.at("regressors")) {
            net.regressors.push_back(matrix_from_json(block));
        }
    }
    if (doc.contains("overparam_chain")) {
        net.chain.factors.clear();
        for (const json& factor : doc.at("overparam_chain")) {
            net.chain.factors.push_back(matrix_from_json(factor));
        }
    }
    if (doc.contains("standardizer")) {
        checkpoint.standardizer = standardizer_from_json(doc.at("standardizer"));
    }
    checkpoint.meta.config_hash = doc.value("config_hash", "");
    checkpoint.meta.seed = doc.value("seed", std::uint64_t{0});

    if (doc.at("masks_hash").get<std::string>() != masks_hash(net)) {
        throw std::runtime_error("checkpoint: masks hash mismatch (corrupt tree)");
    }
    return checkpoint;
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return json::parse(in);
}

}  // namespace semdt
