#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmalight/dataset.hpp"
#include "cmalight/problem.hpp"

namespace cml {

enum class SyntheticKind { quadratic_sum, linear_regression, logistic_separable };

/// Recipe for a generated problem. All kinds produce non-negative, coercive
/// components (the data-driven kinds need lambda > 0 for coercivity, which is
/// enforced for logistic_separable where the unregularized problem has no
/// finite minimizer on separable data).
struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::quadratic_sum;
    int components = 10;    // P
    int dim = 2;            // parameter dim (quadratic_sum) or feature dim
    double condition = 10.0; // eigenvalue spread of the quadratic blocks
    double noise = 0.1;      // target noise (regression), class margin (logistic),
                             // center spread (quadratic_sum)
    double scale = 1.0;      // eigenvalue magnitude of the quadratic blocks
    double lambda = 1e-4;    // L2 weight for the data-driven kinds
    std::uint64_t seed = 0;
};

struct SyntheticProblem {
    FiniteSumProblem problem;
    std::optional<std::vector<double>> minimizer;
    std::optional<double> optimal_value;
    std::optional<LabeledDataset> dataset; // data-driven kinds only
};

/// Sum of convex quadratics f_i(w) = 0.5 (w-c_i)' A_i (w-c_i) with the given
/// SPD blocks (row-major, dim x dim). Returns the closed-form minimizer of
/// the sum, (sum A_i)^-1 (sum A_i c_i).
inline SyntheticProblem make_quadratic_sum(std::vector<std::vector<double>> matrices,
                                           std::vector<std::vector<double>> centers) {
    const int P = static_cast<int>(matrices.size());
    if (P == 0 || centers.size() != matrices.size())
        throw ContractError("make_quadratic_sum: need matching matrices and centers");
    const int dim = static_cast<int>(centers[0].size());
    for (int i = 0; i < P; ++i)
        if (static_cast<int>(centers[i].size()) != dim ||
            static_cast<int>(matrices[i].size()) != dim * dim)
            throw ContractError("make_quadratic_sum: inconsistent block dimensions");

    auto blocks = std::make_shared<const std::vector<std::vector<double>>>(std::move(matrices));
    auto cs = std::make_shared<const std::vector<std::vector<double>>>(std::move(centers));

    auto value = [blocks, cs, dim](int i, std::span<const double> w) -> double {
        const auto& A = (*blocks)[i];
        const auto& c = (*cs)[i];
        double q = 0.0;
        for (int r = 0; r < dim; ++r) {
            double row = 0.0;
            for (int s = 0; s < dim; ++s)
                row += A[static_cast<std::size_t>(r) * dim + s] * (w[s] - c[s]);
            q += (w[r] - c[r]) * row;
        }
        return 0.5 * q;
    };
    auto gradient = [blocks, cs, dim](int i, std::span<const double> w, std::span<double> out) {
        const auto& A = (*blocks)[i];
        const auto& c = (*cs)[i];
        for (int r = 0; r < dim; ++r) {
            double row = 0.0;
            for (int s = 0; s < dim; ++s)
                row += A[static_cast<std::size_t>(r) * dim + s] * (w[s] - c[s]);
            out[r] = row;
        }
    };

    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < P; ++i) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            A((*blocks)[i].data(), dim, dim);
        Eigen::Map<const Eigen::VectorXd> c((*cs)[i].data(), dim);
        total += A;
        rhs += A * c;
    }
    const Eigen::VectorXd wstar = total.ldlt().solve(rhs);

    SyntheticProblem out{
        FiniteSumProblem(P, dim, std::move(value), std::move(gradient), "quadratic_sum"),
        std::vector<double>(wstar.data(), wstar.data() + dim), std::nullopt, std::nullopt};
    out.optimal_value = eval_full_untracked(out.problem, *out.minimizer);
    return out;
}

namespace detail {

inline Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) g(r, c) = gauss(rng);
    return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

} // namespace detail

/// Uniform features in [0,1], targets x.w_true + b + noise * N(0,1).
inline LabeledDataset make_regression_dataset(int rows, int cols, double noise,
                                              std::uint64_t seed) {
    if (rows <= 0 || cols <= 0)
        throw ContractError("make_regression_dataset: rows and cols must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> w_true(cols);
    for (auto& w : w_true) w = coef(rng);
    const double b_true = coef(rng);

    LabeledDataset ds;
    ds.rows = rows;
    ds.cols = cols;
    ds.features.resize(static_cast<std::size_t>(rows) * cols);
    ds.targets.resize(rows);
    for (int r = 0; r < rows; ++r) {
        double y = b_true;
        for (int c = 0; c < cols; ++c) {
            const double x = unit(rng);
            ds.features[static_cast<std::size_t>(r) * cols + c] = x;
            y += w_true[c] * x;
        }
        ds.targets[r] = y + noise * gauss(rng);
    }
    return ds;
}

/// Gaussian features pushed away from a random separating hyperplane by
/// `margin`; labels in {0,1}. Linearly separable by construction.
inline LabeledDataset make_binary_dataset(int rows, int cols, double margin,
                                          std::uint64_t seed) {
    if (rows <= 0 || cols <= 0)
        throw ContractError("make_binary_dataset: rows and cols must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> u(cols);
    double nrm = 0.0;
    for (auto& v : u) { v = gauss(rng); nrm += v * v; }
    nrm = std::sqrt(nrm);
    for (auto& v : u) v /= nrm;

    LabeledDataset ds;
    ds.rows = rows;
    ds.cols = cols;
    ds.features.resize(static_cast<std::size_t>(rows) * cols);
    ds.targets.resize(rows);
    for (int r = 0; r < rows; ++r) {
        double proj = 0.0;
        std::vector<double> x(cols);
        for (int c = 0; c < cols; ++c) { x[c] = gauss(rng); proj += u[c] * x[c]; }
        const double label = proj >= 0.0 ? 1.0 : 0.0;
        const double push = (label == 1.0 ? 1.0 : -1.0) * margin;
        for (int c = 0; c < cols; ++c)
            ds.features[static_cast<std::size_t>(r) * cols + c] = x[c] + push * u[c];
        ds.targets[r] = label;
    }
    return ds;
}

namespace detail {

// Linear predictor theta'[x;1] over a dataset; type selects squared error or
// logistic loss. Parameters: cols weights + 1 bias, each component carries
// lambda/P of the L2 term.
inline FiniteSumProblem linear_model_problem(std::shared_ptr<const LabeledDataset> data,
                                             bool logistic, double lambda, std::string name) {
    const int P = data->sample_count();
    const int dim = data->feature_dim() + 1;

    auto predict = [](const LabeledDataset& ds, int i, std::span<const double> th) {
        const auto x = ds.sample(i);
        double z = th[x.size()];
        for (std::size_t c = 0; c < x.size(); ++c) z += th[c] * x[c];
        return z;
    };

    auto value = [data, logistic, lambda, P, predict](int i, std::span<const double> th) {
        const double z = predict(*data, i, th);
        const double y = data->targets[i];
        const double reg = lambda / P * squared_norm(th);
        if (!logistic) {
            const double r = z - y;
            return r * r / P + reg;
        }
        // -(1/P)[y log p + (1-y) log(1-p)] via the overflow-safe logistic form
        const double data_term = (std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)))) / P;
        return data_term + reg;
    };
    auto gradient = [data, logistic, lambda, P, predict](int i, std::span<const double> th,
                                                         std::span<double> out) {
        const double z = predict(*data, i, th);
        const double y = data->targets[i];
        const auto x = data->sample(i);
        const double s = logistic ? (sigmoid(z) - y) / P : 2.0 * (z - y) / P;
        for (std::size_t c = 0; c < x.size(); ++c) out[c] = s * x[c];
        out[x.size()] = s;
        const double creg = 2.0 * lambda / P;
        for (std::size_t c = 0; c < th.size(); ++c) out[c] += creg * th[c];
    };
    return FiniteSumProblem(P, dim, std::move(value), std::move(gradient), std::move(name));
}

} // namespace detail

/// Builds the requested problem. quadratic_sum carries its closed-form
/// minimizer; linear_regression carries the ridge solution; the data-driven
/// kinds also return the generated dataset so callers can train a network on
/// the same data instead of the linear model.
inline SyntheticProblem make_synthetic(const SyntheticSpec& spec) {
    if (spec.components <= 0 || spec.dim <= 0)
        throw ContractError("make_synthetic: components and dim must be positive");

    if (spec.kind == SyntheticKind::quadratic_sum) {
        if (spec.condition < 1.0)
            throw ContractError("make_synthetic: condition must be >= 1");
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<std::vector<double>> blocks(spec.components);
        std::vector<std::vector<double>> centers(spec.components);
        std::vector<double> shared_center(spec.dim);
        for (auto& c : shared_center) c = gauss(rng);
        for (int i = 0; i < spec.components; ++i) {
            const Eigen::MatrixXd q = detail::random_orthogonal(spec.dim, rng);
            Eigen::VectorXd eig(spec.dim);
            for (int r = 0; r < spec.dim; ++r) {
                const double t = spec.dim == 1 ? 0.0 : static_cast<double>(r) / (spec.dim - 1);
                eig(r) = spec.scale * std::pow(spec.condition, -t); // in scale*[1/condition, 1]
            }
            const Eigen::MatrixXd a = q * eig.asDiagonal() * q.transpose();
            blocks[i].resize(static_cast<std::size_t>(spec.dim) * spec.dim);
            for (int r = 0; r < spec.dim; ++r)
                for (int c = 0; c < spec.dim; ++c)
                    blocks[i][static_cast<std::size_t>(r) * spec.dim + c] =
                        0.5 * (a(r, c) + a(c, r));
            centers[i].resize(spec.dim);
            for (int r = 0; r < spec.dim; ++r)
                centers[i][r] = shared_center[r] + spec.noise * gauss(rng);
        }
        return make_quadratic_sum(std::move(blocks), std::move(centers));
    }

    if (spec.kind == SyntheticKind::linear_regression) {
        auto data = std::make_shared<const LabeledDataset>(
            make_regression_dataset(spec.components, spec.dim, spec.noise, spec.seed));
        SyntheticProblem out{detail::linear_model_problem(data, false, spec.lambda,
                                                          "linear_regression"),
                             std::nullopt, std::nullopt, *data};

        // Ridge solution of (1/P)||Xt th - y||^2 + lambda||th||^2.
        const int P = data->sample_count();
        const int dim = data->feature_dim() + 1;
        Eigen::MatrixXd xt(P, dim);
        Eigen::VectorXd y(P);
        for (int r = 0; r < P; ++r) {
            const auto row = data->sample(r);
            for (int c = 0; c < data->feature_dim(); ++c) xt(r, c) = row[c];
            xt(r, dim - 1) = 1.0;
            y(r) = data->targets[r];
        }
        const Eigen::MatrixXd lhs =
            xt.transpose() * xt / P + spec.lambda * Eigen::MatrixXd::Identity(dim, dim);
        const Eigen::VectorXd sol = lhs.ldlt().solve(xt.transpose() * y / P);
        out.minimizer = std::vector<double>(sol.data(), sol.data() + dim);
        out.optimal_value = eval_full_untracked(out.problem, *out.minimizer);
        return out;
    }

    // logistic_separable
    if (spec.lambda <= 0.0)
        throw ContractError("make_synthetic: logistic_separable requires lambda > 0");
    auto data = std::make_shared<const LabeledDataset>(
        make_binary_dataset(spec.components, spec.dim, spec.noise, spec.seed));
    return SyntheticProblem{detail::linear_model_problem(data, true, spec.lambda,
                                                         "logistic_separable"),
                            std::nullopt, std::nullopt, *data};
}

} // namespace cml
