#ifndef SEMDT_TREE_IO_HPP
#define SEMDT_TREE_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "semdt/data.hpp"
#include "semdt/semnet.hpp"

namespace semdt {

struct ArtifactMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
    bool destandardized = false;
};

// Tree interchange document:
//   {n, task, nodes: [{id, weights, bias, left, right}],
//    leaves: [{id, class} | {id, theta, alpha}]}
// Coefficients are in standardized-feature space unless destandardize is
// requested, which rewrites them to operate on raw units.
nlohmann::json export_tree(const ObliqueTree& model,
                           const Standardizer* stats = nullptr,
                           bool destandardize = false,
                           const ArtifactMeta* meta = nullptr);

ObliqueTree import_tree(const nlohmann::json& doc);

// Rewrites hyperplanes (and regressors) from standardized-feature space to
// raw units: A' = A / sigma, b' = b - sum A_i mu_i / sigma_i.
ObliqueTree destandardize_tree(const ObliqueTree& model, const Standardizer& stats);

// Versioned checkpoint; masks are reconstructed from the tree, never stored.
struct Checkpoint {
    SemNet net;
    std::optional<Standardizer> standardizer;
    ArtifactMeta meta;
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

nlohmann::json standardizer_to_json(const Standardizer& stats);
Standardizer standardizer_from_json(const nlohmann::json& doc);

void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace semdt

#endif
