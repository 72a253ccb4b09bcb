#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmalight/dataset.hpp"
#include "cmalight/errors.hpp"

namespace cml {

/// How to read a tabular file: which column is the target, which columns are
/// features (empty selection means "all others"), delimiter, header presence.
/// With a header, columns may be addressed by name; otherwise by 0-based index.
struct CsvSchema {
    std::string target_column;        // by name (requires header); wins over index if set
    int target_index = -1;            // by 0-based index
    std::vector<std::string> feature_columns; // by name; empty = all non-target columns
    std::vector<int> feature_indices;         // by index; empty = all non-target columns
    char delimiter = ',';
    bool header = true;
};

namespace detail {

// RFC-4180 style field splitting: quoted fields may contain the delimiter,
// newlines are not supported inside fields, "" escapes a quote.
inline std::vector<std::string> split_csv_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::optional<double> parse_double(const std::string& s) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || begin == end) return std::nullopt;
    return value;
}

} // namespace detail

/// Loads a delimited text file into a LabeledDataset. Malformed rows (wrong
/// column count, unparseable numeric cell) abort the load with the 1-based
/// data row index in the message.
inline LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file", path);

    std::vector<std::string> names;
    std::string line;
    std::size_t n_cols = 0;

    if (schema.header) {
        if (!std::getline(in, line)) throw IoError("empty file", path);
        names = detail::split_csv_line(line, schema.delimiter);
        n_cols = names.size();
    }

    // Resolve target column.
    int target = -1;
    if (!schema.target_column.empty()) {
        if (!schema.header)
            throw ContractError("load_csv: target column by name requires a header");
        for (std::size_t c = 0; c < names.size(); ++c)
            if (names[c] == schema.target_column) target = static_cast<int>(c);
        if (target < 0)
            throw ContractError("load_csv: target column '" + schema.target_column +
                                "' not found");
    } else {
        target = schema.target_index;
    }

    auto resolve_features = [&](std::size_t total) {
        std::vector<int> idx;
        if (!schema.feature_columns.empty()) {
            for (const auto& name : schema.feature_columns) {
                int found = -1;
                for (std::size_t c = 0; c < names.size(); ++c)
                    if (names[c] == name) found = static_cast<int>(c);
                if (found < 0)
                    throw ContractError("load_csv: feature column '" + name + "' not found");
                idx.push_back(found);
            }
        } else if (!schema.feature_indices.empty()) {
            idx = schema.feature_indices;
        } else {
            for (std::size_t c = 0; c < total; ++c)
                if (static_cast<int>(c) != target) idx.push_back(static_cast<int>(c));
        }
        return idx;
    };

    LabeledDataset ds;
    std::vector<int> feature_idx;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto fields = detail::split_csv_line(line, schema.delimiter);
        if (n_cols == 0) {
            n_cols = fields.size();
            if (target < 0 || target >= static_cast<int>(n_cols))
                throw ContractError("load_csv: target index out of range");
            feature_idx = resolve_features(n_cols);
        } else if (feature_idx.empty()) {
            if (target < 0 || target >= static_cast<int>(n_cols))
                throw ContractError("load_csv: target index out of range");
            feature_idx = resolve_features(n_cols);
        }
        if (fields.size() != n_cols)
            throw ContractError("load_csv: row " + std::to_string(row) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(n_cols));
        for (int c : feature_idx) {
            const auto v = detail::parse_double(fields[c]);
            if (!v)
                throw ContractError("load_csv: row " + std::to_string(row) +
                                    ": non-numeric value '" + fields[c] + "'");
            ds.features.push_back(*v);
        }
        const auto y = detail::parse_double(fields[target]);
        if (!y)
            throw ContractError("load_csv: row " + std::to_string(row) +
                                ": non-numeric target '" + fields[target] + "'");
        ds.targets.push_back(*y);
    }
    if (row == 0) throw ContractError("load_csv: no data rows in " + path);

    ds.rows = row;
    ds.cols = static_cast<int>(feature_idx.size());
    if (schema.header) {
        for (int c : feature_idx) ds.feature_names.push_back(names[c]);
        ds.target_name = names[target];
    }
    ds.validate();
    return ds;
}

/// Writes a dataset back out (features then target per row), full precision.
inline void write_csv(const std::string& path, const LabeledDataset& dataset,
                      char delimiter = ',') {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file", path);
    out.precision(17);
    for (int c = 0; c < dataset.cols; ++c) {
        const std::string name = c < static_cast<int>(dataset.feature_names.size())
                                     ? dataset.feature_names[c]
                                     : "x" + std::to_string(c);
        out << name << delimiter;
    }
    out << (dataset.target_name.empty() ? "y" : dataset.target_name) << "\n";
    for (int r = 0; r < dataset.rows; ++r) {
        for (int c = 0; c < dataset.cols; ++c)
            out << dataset.features[static_cast<std::size_t>(r) * dataset.cols + c] << delimiter;
        out << dataset.targets[r] << "\n";
    }
    if (!out) throw IoError("write failed", path);
}

} // namespace cml
