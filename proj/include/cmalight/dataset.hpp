#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmalight/errors.hpp"

namespace cml {

/// Samples (row-major P x d) with one real target per row. Regression targets
/// are arbitrary reals; binary classification targets are 0/1.
struct LabeledDataset {
    int rows = 0;
    int cols = 0;
    std::vector<double> features; // rows * cols, row-major
    std::vector<double> targets;  // rows
    std::vector<std::string> feature_names;
    std::string target_name;

    int sample_count() const noexcept { return rows; }
    int feature_dim() const noexcept { return cols; }

    std::span<const double> sample(int i) const {
        if (i < 0 || i >= rows)
            throw ContractError("LabeledDataset: sample index out of range");
        return {features.data() + static_cast<std::size_t>(i) * cols,
                static_cast<std::size_t>(cols)};
    }

    void validate() const {
        if (rows <= 0) throw ContractError("LabeledDataset: empty dataset");
        if (cols <= 0) throw ContractError("LabeledDataset: no feature columns");
        if (features.size() != static_cast<std::size_t>(rows) * cols ||
            targets.size() != static_cast<std::size_t>(rows))
            throw ContractError("LabeledDataset: inconsistent buffer sizes");
    }
};

enum class NormalizeMethod { minmax, zscore };

/// Affine transform x' = (x - shift) / scale for one column; degenerate
/// columns (constant) map to 0 and are flagged.
struct ColumnTransform {
    double shift = 0.0;
    double scale = 1.0;
    bool degenerate = false;

    double apply(double x) const { return degenerate ? 0.0 : (x - shift) / scale; }
    double invert(double y) const { return degenerate ? shift : y * scale + shift; }
};

struct NormalizationInfo {
    NormalizeMethod method = NormalizeMethod::minmax;
    std::vector<ColumnTransform> feature_transforms;
    std::optional<ColumnTransform> target_transform;
};

struct NormalizedDataset {
    LabeledDataset data;
    NormalizationInfo info;
};

namespace detail {

inline ColumnTransform column_transform(std::span<const double> column, NormalizeMethod method) {
    ColumnTransform t;
    if (method == NormalizeMethod::minmax) {
        const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
        t.shift = *mn;
        t.scale = *mx - *mn;
        if (t.scale == 0.0) { t.degenerate = true; t.scale = 1.0; }
    } else {
        const double n = static_cast<double>(column.size());
        const double mean = std::accumulate(column.begin(), column.end(), 0.0) / n;
        double var = 0.0;
        for (double x : column) var += (x - mean) * (x - mean);
        const double sd = std::sqrt(var / n);
        t.shift = mean;
        t.scale = sd;
        if (sd == 0.0) { t.degenerate = true; t.scale = 1.0; }
    }
    return t;
}

} // namespace detail

/// Per-column normalization. minmax maps each feature column to [0,1];
/// zscore to mean 0, sd 1 (population sd). The returned metadata supports the
/// inverse transform. Targets are included only on request (never for
/// classification labels).
inline NormalizedDataset normalize(const LabeledDataset& dataset, NormalizeMethod method,
                                   bool include_targets = false) {
    dataset.validate();
    NormalizedDataset out{dataset, {}};
    out.info.method = method;
    out.info.feature_transforms.resize(dataset.cols);

    std::vector<double> column(dataset.rows);
    for (int c = 0; c < dataset.cols; ++c) {
        for (int r = 0; r < dataset.rows; ++r)
            column[r] = dataset.features[static_cast<std::size_t>(r) * dataset.cols + c];
        const ColumnTransform t = detail::column_transform(column, method);
        out.info.feature_transforms[c] = t;
        for (int r = 0; r < dataset.rows; ++r)
            out.data.features[static_cast<std::size_t>(r) * dataset.cols + c] =
                t.apply(column[r]);
    }
    if (include_targets) {
        const ColumnTransform t = detail::column_transform(dataset.targets, method);
        out.info.target_transform = t;
        for (int r = 0; r < dataset.rows; ++r)
            out.data.targets[r] = t.apply(dataset.targets[r]);
    }
    return out;
}

/// Seeded shuffle split; test_fraction of the rows go to the second part.
inline std::pair<LabeledDataset, LabeledDataset>
train_test_split(const LabeledDataset& dataset, double test_fraction, std::uint64_t seed) {
    dataset.validate();
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw ContractError("train_test_split: test_fraction must be in [0, 1)");
    std::vector<int> idx(dataset.rows);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    const int n_test = static_cast<int>(std::floor(test_fraction * dataset.rows));
    auto take = [&](int begin, int count) {
        LabeledDataset part;
        part.rows = count;
        part.cols = dataset.cols;
        part.feature_names = dataset.feature_names;
        part.target_name = dataset.target_name;
        part.features.reserve(static_cast<std::size_t>(count) * dataset.cols);
        part.targets.reserve(count);
        for (int q = begin; q < begin + count; ++q) {
            const auto row = dataset.sample(idx[q]);
            part.features.insert(part.features.end(), row.begin(), row.end());
            part.targets.push_back(dataset.targets[idx[q]]);
        }
        return part;
    };
    return {take(n_test, dataset.rows - n_test), take(0, n_test)};
}

} // namespace cml
