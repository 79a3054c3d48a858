#include "semdt/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "semdt/rng.hpp"

namespace semdt {

int RawTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& cell, const std::string& path,
                    std::size_t line) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        parse_fail(path, line, "cannot parse numeric cell '" + cell + "'");
    }
    return value;
}

// One RFC-4180 record; quoted fields may contain commas, escaped quotes and
// line breaks. Returns false at end of input. `line` tracks the record's
// first physical line for error messages.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line, const std::string& path) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;

    std::string field;
    bool quoted = false;
    const std::size_t start_line = line;
    while (true) {
        if (c == EOF) {
            if (quoted) parse_fail(path, start_line, "unterminated quoted field");
            fields.push_back(field);
            return true;
        }
        if (quoted) {
            if (c == '"') {
                int next = in.get();
                if (next == '"') {
                    field.push_back('"');
                } else {
                    quoted = false;
                    c = next;
                    continue;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            ++line;
            fields.push_back(field);
            return true;
        } else {
            field.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
}

}  // namespace

RawTable load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::size_t line = 1;
    std::vector<std::string> header;
    if (!read_record(in, header, line, path)) {
        parse_fail(path, 1, "missing header row");
    }

    RawTable table;
    std::set<std::string> categorical(schema.categorical_columns.begin(),
                                      schema.categorical_columns.end());
    for (const std::string& name : header) {
        RawColumn col;
        col.name = name;
        col.categorical = categorical.count(name) > 0;
        table.columns.push_back(std::move(col));
    }
    for (const std::string& name : schema.categorical_columns) {
        if (table.column_index(name) < 0) {
            throw std::invalid_argument("load_csv: unknown categorical column " + name);
        }
    }
    if (!schema.target_column.empty() &&
        table.column_index(schema.target_column) < 0) {
        throw std::invalid_argument("load_csv: unknown target column " +
                                    schema.target_column);
    }

    std::vector<std::string> fields;
    while (true) {
        const std::size_t record_line = line;
        if (!read_record(in, fields, line, path)) break;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != header.size()) {
            parse_fail(path, record_line,
                       "ragged row: expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (table.columns[c].categorical) {
                table.columns[c].strings.push_back(fields[c]);
            } else {
                table.columns[c].numbers.push_back(
                    parse_number(fields[c], path, record_line));
            }
        }
        ++table.num_rows;
    }
    return table;
}

RawTable load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_libsvm: cannot open " + path);

    struct Entry { int index; double value; };
    std::vector<double> labels;
    std::vector<std::vector<Entry>> rows;
    int max_index = 0;

    std::string text_line;
    std::size_t line = 0;
    while (std::getline(in, text_line)) {
        ++line;
        std::istringstream ss(text_line);
        std::string token;
        if (!(ss >> token)) continue;  // blank line
        labels.push_back(parse_number(token, path, line));
        std::vector<Entry> row;
        int prev = 0;
        while (ss >> token) {
            auto colon = token.find(':');
            if (colon == std::string::npos) {
                parse_fail(path, line, "expected idx:val, got '" + token + "'");
            }
            int index = static_cast<int>(
                parse_number(token.substr(0, colon), path, line));
            double value = parse_number(token.substr(colon + 1), path, line);
            if (index <= prev) {
                parse_fail(path, line, "indices must be 1-based and ascending");
            }
            prev = index;
            max_index = std::max(max_index, index);
            row.push_back({index, value});
        }
        rows.push_back(std::move(row));
    }

    RawTable table;
    table.num_rows = rows.size();
    for (int c = 0; c < max_index; ++c) {
        RawColumn col;
        col.name = "x" + std::to_string(c + 1);
        col.numbers.assign(rows.size(), 0.0);
        table.columns.push_back(std::move(col));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const Entry& e : rows[r]) {
            table.columns[e.index - 1].numbers[r] = e.value;
        }
    }
    RawColumn label_col;
    label_col.name = "label";
    label_col.numbers = std::move(labels);
    table.columns.push_back(std::move(label_col));
    return table;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to shortest representation that round-trips
    for (int precision = 1; precision < 17; ++precision) {
        char probe[32];
        std::snprintf(probe, sizeof(probe), "%.*g", precision, v);
        if (std::strtod(probe, nullptr) == v) return probe;
    }
    return buf;
}

}  // namespace

std::string write_libsvm(const RawTable& table) {
    if (table.columns.empty()) return "";
    std::string out;
    const std::size_t n = table.columns.size() - 1;  // last column is the label
    for (std::size_t r = 0; r < table.num_rows; ++r) {
        out += format_value(table.columns[n].numbers[r]);
        for (std::size_t c = 0; c < n; ++c) {
            const double v = table.columns[c].numbers[r];
            if (v == 0.0) continue;
            out += ' ';
            out += std::to_string(c + 1);
            out += ':';
            out += format_value(v);
        }
        out += '\n';
    }
    return out;
}

CategoricalEncoding fit_one_hot(const RawTable& table,
                                const std::vector<std::string>& columns) {
    CategoricalEncoding encoding;
    for (const std::string& name : columns) {
        int idx = table.column_index(name);
        if (idx < 0) throw std::invalid_argument("one_hot: unknown column " + name);
        const RawColumn& col = table.columns[idx];
        if (!col.categorical) {
            throw std::invalid_argument("one_hot: column is not categorical: " + name);
        }
        std::vector<std::string> values;
        for (const std::string& v : col.strings) {
            if (std::find(values.begin(), values.end(), v) == values.end()) {
                values.push_back(v);  // first-appearance order
            }
        }
        encoding.columns.push_back(name);
        encoding.values.push_back(std::move(values));
    }
    return encoding;
}

RawTable apply_one_hot(const RawTable& table, const CategoricalEncoding& encoding) {
    RawTable out;
    out.num_rows = table.num_rows;
    for (const RawColumn& col : table.columns) {
        auto it = std::find(encoding.columns.begin(), encoding.columns.end(), col.name);
        if (it == encoding.columns.end()) {
            out.columns.push_back(col);
            continue;
        }
        const auto& values = encoding.values[it - encoding.columns.begin()];
        std::vector<RawColumn> indicators(values.size());
        for (std::size_t v = 0; v < values.size(); ++v) {
            indicators[v].name = col.name + "=" + values[v];
            indicators[v].numbers.assign(table.num_rows, 0.0);
        }
        for (std::size_t r = 0; r < col.strings.size(); ++r) {
            auto vit = std::find(values.begin(), values.end(), col.strings[r]);
            if (vit == values.end()) {
                throw std::runtime_error("one_hot: unseen category '" + col.strings[r] +
                                         "' in column " + col.name);
            }
            indicators[vit - values.begin()].numbers[r] = 1.0;
        }
        for (RawColumn& ind : indicators) out.columns.push_back(std::move(ind));
    }
    return out;
}

RawTable one_hot(const RawTable& table, const std::vector<std::string>& columns) {
    return apply_one_hot(table, fit_one_hot(table, columns));
}

Dataset make_dataset(const RawTable& table, const std::string& target_column,
                     TreeTask task) {
    int target = table.column_index(target_column);
    if (target < 0) {
        throw std::invalid_argument("make_dataset: unknown target column " +
                                    target_column);
    }
    if (table.columns[target].categorical) {
        throw std::invalid_argument("make_dataset: target must be numeric");
    }
    for (const RawColumn& col : table.columns) {
        if (col.categorical) {
            throw std::invalid_argument(
                "make_dataset: categorical column not encoded: " + col.name);
        }
    }

    Dataset ds;
    ds.task = task;
    const std::size_t n_features = table.columns.size() - 1;
    ds.features = Matrix(table.num_rows, n_features);
    std::size_t f = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (static_cast<int>(c) == target) continue;
        ds.feature_names.push_back(table.columns[c].name);
        for (std::size_t r = 0; r < table.num_rows; ++r) {
            ds.features(r, f) = table.columns[c].numbers[r];
        }
        ++f;
    }

    const std::vector<double>& raw_targets = table.columns[target].numbers;
    if (task == TreeTask::classification) {
        std::set<double> distinct(raw_targets.begin(), raw_targets.end());
        ds.class_values.assign(distinct.begin(), distinct.end());
        ds.num_classes = static_cast<int>(ds.class_values.size());
        if (ds.num_classes < 2) {
            throw std::invalid_argument("make_dataset: need at least two classes");
        }
        ds.labels.reserve(raw_targets.size());
        for (double v : raw_targets) {
            auto it = std::lower_bound(ds.class_values.begin(), ds.class_values.end(), v);
            ds.labels.push_back(static_cast<int>(it - ds.class_values.begin()));
        }
    } else {
        ds.targets = Matrix(table.num_rows, 1);
        for (std::size_t r = 0; r < table.num_rows; ++r) {
            ds.targets(r, 0) = raw_targets[r];
        }
    }
    return ds;
}

namespace {

// Largest-remainder allocation of `total` rows across groups, proportional to
// group sizes; keeps each group's share within one row of exact.
std::vector<std::size_t> allocate(const std::vector<std::size_t>& group_sizes,
                                  std::size_t total, std::size_t population) {
    std::vector<std::size_t> base(group_sizes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        const double exact = static_cast<double>(total) * group_sizes[g] / population;
        base[g] = static_cast<std::size_t>(exact);
        assigned += base[g];
        remainders.push_back({exact - static_cast<double>(base[g]), g});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < total - assigned; ++i) {
        base[remainders[i].second] += 1;
    }
    return base;
}

}  // namespace

void split(Dataset& dataset, const SplitFractions& fractions, std::uint64_t seed,
           bool stratify) {
    const double sum = fractions.train + fractions.val + fractions.test;
    if (fractions.train <= 0.0 || fractions.val < 0.0 || fractions.test < 0.0 ||
        std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split: fractions must be positive and sum to 1");
    }
    const std::size_t n = dataset.num_rows();
    const std::size_t n_val = static_cast<std::size_t>(fractions.val * n);
    const std::size_t n_test = static_cast<std::size_t>(fractions.test * n);

    Rng rng(seed);
    dataset.train_indices.clear();
    dataset.val_indices.clear();
    dataset.test_indices.clear();

    if (stratify && dataset.task == TreeTask::classification) {
        std::vector<std::vector<int>> per_class(dataset.num_classes);
        for (std::size_t r = 0; r < n; ++r) per_class[dataset.labels[r]].push_back(r);
        for (auto& group : per_class) shuffle_in_place(group, rng);

        const std::size_t splits_in_use =
            1 + (fractions.val > 0.0 ? 1 : 0) + (fractions.test > 0.0 ? 1 : 0);
        std::vector<std::size_t> sizes;
        for (const auto& group : per_class) {
            if (group.size() < splits_in_use) {
                throw std::runtime_error("split: class has fewer rows than splits");
            }
            sizes.push_back(group.size());
        }
        std::vector<std::size_t> val_alloc = allocate(sizes, n_val, n);
        std::vector<std::size_t> test_alloc = allocate(sizes, n_test, n);
        for (std::size_t g = 0; g < per_class.size(); ++g) {
            const auto& group = per_class[g];
            std::size_t pos = 0;
            for (std::size_t i = 0; i < val_alloc[g]; ++i) {
                dataset.val_indices.push_back(group[pos++]);
            }
            for (std::size_t i = 0; i < test_alloc[g]; ++i) {
                dataset.test_indices.push_back(group[pos++]);
            }
            for (; pos < group.size(); ++pos) {
                dataset.train_indices.push_back(group[pos]);
            }
        }
        std::sort(dataset.train_indices.begin(), dataset.train_indices.end());
        std::sort(dataset.val_indices.begin(), dataset.val_indices.end());
        std::sort(dataset.test_indices.begin(), dataset.test_indices.end());
    } else {
        std::vector<int> order(n);
        for (std::size_t r = 0; r < n; ++r) order[r] = static_cast<int>(r);
        shuffle_in_place(order, rng);
        const std::size_t n_train = n - n_val - n_test;
        dataset.train_indices.assign(order.begin(), order.begin() + n_train);
        dataset.val_indices.assign(order.begin() + n_train,
                                   order.begin() + n_train + n_val);
        dataset.test_indices.assign(order.begin() + n_train + n_val, order.end());
    }
}

void split_provider(Dataset& dataset, std::size_t train_rows, std::uint64_t seed) {
    const std::size_t n = dataset.num_rows();
    if (train_rows == 0 || train_rows > n) {
        throw std::invalid_argument("split_provider: bad train row count");
    }
    std::vector<int> order(train_rows);
    for (std::size_t r = 0; r < train_rows; ++r) order[r] = static_cast<int>(r);
    Rng rng(seed);
    shuffle_in_place(order, rng);
    const std::size_t n_train = static_cast<std::size_t>(0.8 * train_rows);
    dataset.train_indices.assign(order.begin(), order.begin() + n_train);
    dataset.val_indices.assign(order.begin() + n_train, order.end());
    dataset.test_indices.clear();
    for (std::size_t r = train_rows; r < n; ++r) {
        dataset.test_indices.push_back(static_cast<int>(r));
    }
}

void standardize(Dataset& dataset) {
    if (dataset.train_indices.empty()) {
        throw std::logic_error("standardize: split must be assigned first");
    }
    const std::size_t n_features = dataset.features.cols();
    const double count = static_cast<double>(dataset.train_indices.size());

    Standardizer& stats = dataset.standardizer;
    stats.means.assign(n_features, 0.0);
    stats.stds.assign(n_features, 0.0);
    for (int r : dataset.train_indices) {
        for (std::size_t c = 0; c < n_features; ++c) {
            stats.means[c] += dataset.features(r, c);
        }
    }
    for (std::size_t c = 0; c < n_features; ++c) stats.means[c] /= count;
    for (int r : dataset.train_indices) {
        for (std::size_t c = 0; c < n_features; ++c) {
            const double d = dataset.features(r, c) - stats.means[c];
            stats.stds[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < n_features; ++c) {
        stats.stds[c] = std::sqrt(stats.stds[c] / count);
        if (stats.stds[c] == 0.0) stats.stds[c] = 1.0;  // constant column
    }
    for (std::size_t r = 0; r < dataset.num_rows(); ++r) {
        for (std::size_t c = 0; c < n_features; ++c) {
            dataset.features(r, c) = (dataset.features(r, c) - stats.means[c]) / stats.stds[c];
        }
    }

    if (dataset.task == TreeTask::regression) {
        const std::size_t d = dataset.targets.cols();
        stats.target_means.assign(d, 0.0);
        stats.target_stds.assign(d, 0.0);
        for (int r : dataset.train_indices) {
            for (std::size_t c = 0; c < d; ++c) stats.target_means[c] += dataset.targets(r, c);
        }
        for (std::size_t c = 0; c < d; ++c) stats.target_means[c] /= count;
        for (int r : dataset.train_indices) {
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = dataset.targets(r, c) - stats.target_means[c];
                stats.target_stds[c] += diff * diff;
            }
        }
        for (std::size_t c = 0; c < d; ++c) {
            stats.target_stds[c] = std::sqrt(stats.target_stds[c] / count);
            if (stats.target_stds[c] == 0.0) stats.target_stds[c] = 1.0;
        }
        for (std::size_t r = 0; r < dataset.num_rows(); ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                dataset.targets(r, c) =
                    (dataset.targets(r, c) - stats.target_means[c]) / stats.target_stds[c];
            }
        }
    }
}

}  // namespace semdt
