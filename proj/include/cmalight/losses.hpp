#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cmalight/dataset.hpp"
#include "cmalight/mlp.hpp"
#include "cmalight/problem.hpp"

namespace cml {

enum class LossKind { mse, cel };

/// Clamp bound for cross-entropy logs; clamping is counted, not an error.
inline constexpr double kCelClip = 1e-12;

namespace detail {

inline double l2_penalty(std::span<const double> w, double lambda, int total_samples) {
    if (lambda == 0.0) return 0.0;
    return lambda / total_samples * squared_norm(w);
}

inline void add_l2_gradient(std::span<const double> w, double lambda, int total_samples,
                            std::span<double> grad) {
    if (lambda == 0.0) return;
    const double c = 2.0 * lambda / total_samples;
    for (std::size_t j = 0; j < w.size(); ++j) grad[j] += c * w[j];
}

} // namespace detail

/// Per-sample regularized squared error:
///   (1/P)(yhat(w; x) - y)^2 + (lambda/P)||w||^2.
/// Each sample carries lambda/P of the regularizer so the P components sum to
/// the full regularized loss and every component stays non-negative and
/// coercive for lambda > 0.
inline double mse_component_value(const MlpArchitecture& arch, std::span<const double> w,
                                  std::span<const double> x, double y, double lambda,
                                  int total_samples, MlpWorkspace& ws) {
    const double yhat = detail::mlp_forward_ws(arch, w, x, ws);
    const double r = yhat - y;
    return r * r / total_samples + detail::l2_penalty(w, lambda, total_samples);
}

/// Value plus gradient (written into grad) of the MSE component.
inline double mse_component_grad(const MlpArchitecture& arch, std::span<const double> w,
                                 std::span<const double> x, double y, double lambda,
                                 int total_samples, MlpWorkspace& ws, std::span<double> grad) {
    const double yhat = detail::mlp_forward_ws(arch, w, x, ws);
    const double r = yhat - y;
    detail::mlp_backprop_ws(arch, w, x, 2.0 * r / total_samples, ws, grad);
    detail::add_l2_gradient(w, lambda, total_samples, grad);
    return r * r / total_samples + detail::l2_penalty(w, lambda, total_samples);
}

/// Per-sample regularized binary cross-entropy. The network output is passed
/// through a sigmoid, so y must be 0 or 1:
///   -(1/P)[y log(p) + (1-y) log(1-p)] + (lambda/P)||w||^2,  p = sigmoid(yhat).
/// p is clamped to [kCelClip, 1-kCelClip] before the logs; clamp events are
/// tallied in clamp_events when provided.
inline double cel_component_value(const MlpArchitecture& arch, std::span<const double> w,
                                  std::span<const double> x, double y, double lambda,
                                  int total_samples, MlpWorkspace& ws,
                                  std::atomic<std::int64_t>* clamp_events = nullptr) {
    if (y != 0.0 && y != 1.0)
        throw ContractError("cel_component: target must be 0 or 1");
    const double p_raw = sigmoid(detail::mlp_forward_ws(arch, w, x, ws));
    double p = p_raw;
    if (p < kCelClip) p = kCelClip;
    if (p > 1.0 - kCelClip) p = 1.0 - kCelClip;
    if (p != p_raw && clamp_events) clamp_events->fetch_add(1, std::memory_order_relaxed);
    const double data = -(y * std::log(p) + (1.0 - y) * std::log1p(-p)) / total_samples;
    return data + detail::l2_penalty(w, lambda, total_samples);
}

/// Value plus gradient of the CEL component. The gradient uses the exact
/// sigmoid form (p - y)/P at the output, which matches the unclamped value.
inline double cel_component_grad(const MlpArchitecture& arch, std::span<const double> w,
                                 std::span<const double> x, double y, double lambda,
                                 int total_samples, MlpWorkspace& ws, std::span<double> grad,
                                 std::atomic<std::int64_t>* clamp_events = nullptr) {
    if (y != 0.0 && y != 1.0)
        throw ContractError("cel_component: target must be 0 or 1");
    const double yhat = detail::mlp_forward_ws(arch, w, x, ws);
    const double p_raw = sigmoid(yhat);
    detail::mlp_backprop_ws(arch, w, x, (p_raw - y) / total_samples, ws, grad);
    detail::add_l2_gradient(w, lambda, total_samples, grad);
    double p = p_raw;
    if (p < kCelClip) p = kCelClip;
    if (p > 1.0 - kCelClip) p = 1.0 - kCelClip;
    if (p != p_raw && clamp_events) clamp_events->fetch_add(1, std::memory_order_relaxed);
    const double data = -(y * std::log(p) + (1.0 - y) * std::log1p(-p)) / total_samples;
    return data + detail::l2_penalty(w, lambda, total_samples);
}

/// Convenience pair forms used in tests and small drivers.
inline std::pair<double, std::vector<double>>
mse_component(const MlpArchitecture& arch, const MlpParams& params, std::span<const double> x,
              double y, double lambda, int total_samples) {
    MlpWorkspace ws;
    std::vector<double> grad(params.flat().size());
    const double v =
        mse_component_grad(arch, params.flat(), x, y, lambda, total_samples, ws, grad);
    return {v, std::move(grad)};
}

inline std::pair<double, std::vector<double>>
cel_component(const MlpArchitecture& arch, const MlpParams& params, std::span<const double> x,
              double y, double lambda, int total_samples) {
    MlpWorkspace ws;
    std::vector<double> grad(params.flat().size());
    const double v =
        cel_component_grad(arch, params.flat(), x, y, lambda, total_samples, ws, grad);
    return {v, std::move(grad)};
}

/// Wraps one network + dataset + loss as a finite-sum problem with one
/// component per sample. The components sum to the full regularized loss.
inline FiniteSumProblem build_problem(const MlpArchitecture& arch,
                                      std::shared_ptr<const LabeledDataset> dataset,
                                      LossKind loss, double lambda,
                                      std::shared_ptr<std::atomic<std::int64_t>> clamp_events = {}) {
    arch.validate();
    if (!dataset) throw ContractError("build_problem: null dataset");
    dataset->validate();
    if (dataset->feature_dim() != arch.input_dim)
        throw ContractError("build_problem: dataset has " +
                            std::to_string(dataset->feature_dim()) +
                            " features, architecture expects " + std::to_string(arch.input_dim));
    if (lambda < 0.0) throw ContractError("build_problem: lambda must be non-negative");
    if (loss == LossKind::cel)
        for (double y : dataset->targets)
            if (y != 0.0 && y != 1.0)
                throw ContractError("build_problem: cross-entropy targets must be 0 or 1");

    const int total = dataset->sample_count();
    auto value = [arch, dataset, loss, lambda, total, clamp_events](
                     int i, std::span<const double> w) -> double {
        thread_local MlpWorkspace ws;
        const auto x = dataset->sample(i);
        const double y = dataset->targets[i];
        if (loss == LossKind::mse)
            return mse_component_value(arch, w, x, y, lambda, total, ws);
        return cel_component_value(arch, w, x, y, lambda, total, ws, clamp_events.get());
    };
    auto gradient = [arch, dataset, loss, lambda, total, clamp_events](
                        int i, std::span<const double> w, std::span<double> out) {
        thread_local MlpWorkspace ws;
        const auto x = dataset->sample(i);
        const double y = dataset->targets[i];
        if (loss == LossKind::mse)
            mse_component_grad(arch, w, x, y, lambda, total, ws, out);
        else
            cel_component_grad(arch, w, x, y, lambda, total, ws, out, clamp_events.get());
    };
    const std::string loss_name = loss == LossKind::mse ? "mse" : "cel";
    return FiniteSumProblem(total, arch.parameter_count(), std::move(value),
                            std::move(gradient), arch.label() + "-" + loss_name);
}

inline FiniteSumProblem build_problem(const MlpArchitecture& arch, LabeledDataset dataset,
                                      LossKind loss, double lambda,
                                      std::shared_ptr<std::atomic<std::int64_t>> clamp_events = {}) {
    return build_problem(arch, std::make_shared<const LabeledDataset>(std::move(dataset)), loss,
                         lambda, std::move(clamp_events));
}

} // namespace cml
