#ifndef SEMDT_REGISTRY_HPP
#define SEMDT_REGISTRY_HPP

#include <optional>
#include <string>
#include <vector>

#include "semdt/data.hpp"

namespace semdt {

// A vendored dataset: file, checksum, schema and canonical split treatment.
struct RegistryEntry {
    std::string name;
    std::string file;          // relative to the data directory
    std::string sha256;
    TreeTask task = TreeTask::classification;
    std::string target_column;
    std::vector<std::string> categorical_columns;
    SplitFractions fractions;  // used when no provider split exists
};

const std::vector<RegistryEntry>& registry_entries();
const RegistryEntry* find_registry_entry(const std::string& name);

// Loads, one-hot encodes, verifies the checksum. Split and standardization
// are applied by the caller (they are seed-dependent).
Dataset load_registry_dataset(const RegistryEntry& entry,
                              const std::string& data_dir,
                              bool verify_checksum = true);

}  // namespace semdt

#endif
