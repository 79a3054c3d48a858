#ifndef SEMDT_DATA_HPP
#define SEMDT_DATA_HPP

#include <string>
#include <vector>

#include "semdt/matrix.hpp"
#include "semdt/tree.hpp"

namespace semdt {

// An untyped parsed table: every column is either numeric or categorical.
struct RawColumn {
    std::string name;
    bool categorical = false;
    std::vector<double> numbers;        // when numeric
    std::vector<std::string> strings;   // when categorical
};

struct RawTable {
    std::vector<RawColumn> columns;
    std::size_t num_rows = 0;

    int column_index(const std::string& name) const;  // -1 when absent
};

struct CsvSchema {
    std::string target_column;
    std::vector<std::string> categorical_columns;
};

// RFC-4180 CSV with a mandatory header row; cells in categorical columns are
// kept as strings, everything else is parsed as a real. Ragged rows and
// unparseable numerics raise with the offending line number.
RawTable load_csv(const std::string& path, const CsvSchema& schema);

// "label idx:val idx:val ..." with 1-based strictly ascending indices; the
// dense width is the maximum index seen. Column names are x1..xn plus label.
RawTable load_libsvm(const std::string& path);

// Canonical LIBSVM text for a table produced by load_libsvm (zeros skipped).
std::string write_libsvm(const RawTable& table);

// Mapping from categorical values to indicator columns, ordered by first
// appearance in the fitted table.
struct CategoricalEncoding {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> values;  // per column
};

CategoricalEncoding fit_one_hot(const RawTable& table,
                                const std::vector<std::string>& columns);

// Replaces each categorical column with its indicator columns (named
// column=value); throws on categories absent from the encoding.
RawTable apply_one_hot(const RawTable& table, const CategoricalEncoding& encoding);

RawTable one_hot(const RawTable& table, const std::vector<std::string>& columns);

// Per-feature affine rescaling fitted on the training split only; population
// std, constant columns clamped to std 1.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<double> target_means;  // regression targets, per output dim
    std::vector<double> target_stds;

    bool fitted() const { return !means.empty(); }
    double destandardize_target(double value, int dim = 0) const {
        return value * target_stds[dim] + target_means[dim];
    }
};

struct Dataset {
    Matrix features;                  // N x n
    std::vector<int> labels;          // classification targets
    Matrix targets;                   // regression targets, N x d
    std::vector<std::string> feature_names;
    TreeTask task = TreeTask::classification;
    int num_classes = 0;
    // distinct raw label values, ascending; labels[i] indexes into this
    std::vector<double> class_values;

    std::vector<int> train_indices;
    std::vector<int> val_indices;
    std::vector<int> test_indices;
    Standardizer standardizer;

    std::size_t num_rows() const { return features.rows(); }
    int num_features() const { return static_cast<int>(features.cols()); }
    int output_dim() const {
        return task == TreeTask::regression ? static_cast<int>(targets.cols()) : 1;
    }
};

// Assembles a Dataset from a table (after any one-hot encoding): the target
// column becomes labels (classification; distinct values sorted ascending)
// or a 1-column target matrix (regression), the rest become features.
Dataset make_dataset(const RawTable& table, const std::string& target_column,
                     TreeTask task);

struct SplitFractions {
    double train = 0.5;
    double val = 0.25;
    double test = 0.25;
};

// Deterministic seeded shuffle into disjoint covering splits. Global split
// sizes are floor(f*N) for val and test with the remainder going to train;
// stratified allocation keeps per-class proportions within one row.
void split(Dataset& dataset, const SplitFractions& fractions, std::uint64_t seed,
           bool stratify);

// Uses a provider-supplied train/test boundary: rows [0, train_rows) are
// shuffled and carved 0.8/0.2 into train/val, the rest is the test split.
void split_provider(Dataset& dataset, std::size_t train_rows, std::uint64_t seed);

// Fits on the train split, transforms all rows; regression targets get the
// same treatment. Requires split() first.
void standardize(Dataset& dataset);

}  // namespace semdt

#endif
