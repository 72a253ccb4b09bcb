#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmalight/errors.hpp"

namespace cml {

/// Evaluation bookkeeping for one optimizer run.
///
/// A "full evaluation" is the value of the whole objective (all components at
/// one fixed point) requested as a unit; component evaluations at distinct
/// points never count towards it. Diagnostics use the *_untracked entry
/// points below, which leave these counters alone.
struct EvalCounters {
    std::int64_t full_value_evals = 0;
    std::int64_t component_value_evals = 0;
    std::int64_t component_gradient_evals = 0;
    std::int64_t epochs = 0;
};

/// Unconstrained finite-sum objective f(w) = sum_i f_i(w), i = 0..components-1.
///
/// Components are expected to be non-negative and smooth; callers that need
/// these properties check values as they evaluate. Instances are immutable
/// after construction and safe to share across concurrent runs, provided the
/// callbacks themselves are re-entrant.
class FiniteSumProblem {
public:
    using ValueFn = std::function<double(int, std::span<const double>)>;
    using GradientFn = std::function<void(int, std::span<const double>, std::span<double>)>;

    FiniteSumProblem(int components, int dim, ValueFn value, GradientFn gradient,
                     std::string name = "")
        : components_(components), dim_(dim), value_(std::move(value)),
          gradient_(std::move(gradient)), name_(std::move(name)) {
        if (components_ <= 0)
            throw ContractError("FiniteSumProblem: component count must be positive");
        if (dim_ <= 0)
            throw ContractError("FiniteSumProblem: dimension must be positive");
        if (!value_ || !gradient_)
            throw ContractError("FiniteSumProblem: value/gradient callbacks required");
    }

    int components() const noexcept { return components_; }
    int dim() const noexcept { return dim_; }
    const std::string& name() const noexcept { return name_; }

    /// Value of component i at w. Indices are 0-based.
    double component_value(int i, std::span<const double> w) const {
        check_args(i, w);
        return value_(i, w);
    }

    /// Gradient of component i at w, written into out (length dim).
    void component_gradient(int i, std::span<const double> w, std::span<double> out) const {
        check_args(i, w);
        if (out.size() != static_cast<std::size_t>(dim_))
            throw ContractError("FiniteSumProblem: gradient buffer has wrong length");
        gradient_(i, w, out);
    }

private:
    void check_args(int i, std::span<const double> w) const {
        if (i < 0 || i >= components_)
            throw ContractError("FiniteSumProblem: component index " + std::to_string(i) +
                                " out of range [0, " + std::to_string(components_) + ")");
        if (w.size() != static_cast<std::size_t>(dim_))
            throw ContractError("FiniteSumProblem: point has length " +
                                std::to_string(w.size()) + ", expected " + std::to_string(dim_));
    }

    int components_;
    int dim_;
    ValueFn value_;
    GradientFn gradient_;
    std::string name_;
};

namespace detail {

inline double sum_components(const FiniteSumProblem& problem, std::span<const double> w) {
    double total = 0.0;
    for (int i = 0; i < problem.components(); ++i) {
        const double v = problem.component_value(i, w);
        if (!std::isfinite(v))
            throw NumericError("non-finite component value", i);
        total += v;
    }
    return total;
}

inline std::vector<double> sum_gradients(const FiniteSumProblem& problem,
                                         std::span<const double> w) {
    std::vector<double> total(static_cast<std::size_t>(problem.dim()), 0.0);
    std::vector<double> g(total.size());
    for (int i = 0; i < problem.components(); ++i) {
        problem.component_gradient(i, w, g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!std::isfinite(g[j]))
                throw NumericError("non-finite component gradient", i);
            total[j] += g[j];
        }
    }
    return total;
}

} // namespace detail

/// f(w): one full evaluation. Increments full_value_evals by 1 and
/// component_value_evals by the component count.
inline double eval_full(const FiniteSumProblem& problem, std::span<const double> w,
                        EvalCounters& counters) {
    const double total = detail::sum_components(problem, w);
    counters.full_value_evals += 1;
    counters.component_value_evals += problem.components();
    return total;
}

/// f(w) for diagnostics/instrumentation; leaves counters untouched.
inline double eval_full_untracked(const FiniteSumProblem& problem, std::span<const double> w) {
    return detail::sum_components(problem, w);
}

/// Full gradient  sum_i grad f_i(w). Diagnostic only; increments
/// component_gradient_evals by the component count.
inline std::vector<double> grad_full(const FiniteSumProblem& problem, std::span<const double> w,
                                     EvalCounters& counters) {
    auto total = detail::sum_gradients(problem, w);
    counters.component_gradient_evals += problem.components();
    return total;
}

/// Full gradient without touching counters.
inline std::vector<double> grad_full_untracked(const FiniteSumProblem& problem,
                                               std::span<const double> w) {
    return detail::sum_gradients(problem, w);
}

inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

} // namespace cml
