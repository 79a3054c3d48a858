#include "semdt/registry.hpp"

#include <stdexcept>

#include "semdt/hashing.hpp"

namespace semdt {

const std::vector<RegistryEntry>& registry_entries() {
    static const std::vector<RegistryEntry> entries = {
        {"balance_scale", "balance_scale.csv",
         "9e2b701a8f82a928c1dcae4072aafbb8b170fd72b19a975ee53a68340bb10c4a",
         TreeTask::classification, "class", {}, {0.5, 0.25, 0.25}},
        {"banknote", "banknote.csv",
         "a4e6eb57f00dc0c5696badf6553001e8871644b5b98ab1b2869054af1d255125",
         TreeTask::classification, "class", {}, {0.5, 0.25, 0.25}},
        {"acute_inflammations_1", "acute_inflammations_1.csv",
         "02199bc67952444daf10b58efff5477dc1ae67b71c142cd5b25f3077377dd487",
         TreeTask::classification, "class", {}, {0.5, 0.25, 0.25}},
        {"acute_inflammations_2", "acute_inflammations_2.csv",
         "759ab6b541b7733558838d7a551a27cbc49354160eab6762b1b02c0574860aea",
         TreeTask::classification, "class", {}, {0.5, 0.25, 0.25}},
        {"breast_cancer", "breast_cancer.csv",
         "e2d801636e265052c0a9c9ab2d7e6b3236a3ad0a6c7d347e4abaec760965f75f",
         TreeTask::classification, "class", {}, {0.5, 0.25, 0.25}},
        {"blood_transfusion", "blood_transfusion.csv",
         "0eab63f3a5b151f549c1e49c40eb138716c0abbc21f91ed52e3203a277695a8b",
         TreeTask::classification, "class", {}, {0.5, 0.25, 0.25}},
        {"abalone", "abalone.csv",
         "b36baf97dbcb1ae8d70ae95dd06794ce7878aef96cefc29cd0c8ca0fd9f8aee1",
         TreeTask::regression, "rings", {"sex"}, {0.5, 0.1, 0.4}},
    };
    return entries;
}

const RegistryEntry* find_registry_entry(const std::string& name) {
    for (const RegistryEntry& entry : registry_entries()) {
        if (entry.name == name) return &entry;
    }
    return nullptr;
}

Dataset load_registry_dataset(const RegistryEntry& entry, const std::string& data_dir,
                              bool verify_checksum) {
    const std::string path = data_dir + "/" + entry.file;
    if (verify_checksum) {
        const std::string digest = sha256_file(path);
        if (digest != entry.sha256) {
            throw std::runtime_error("registry: checksum mismatch for " + path +
                                     " (got " + digest + ")");
        }
    }
    CsvSchema schema;
    schema.target_column = entry.target_column;
    schema.categorical_columns = entry.categorical_columns;
    RawTable table = load_csv(path, schema);
    if (!entry.categorical_columns.empty()) {
        table = one_hot(table, entry.categorical_columns);
    }
    return make_dataset(table, entry.target_column, entry.task);
}

}  // namespace semdt
