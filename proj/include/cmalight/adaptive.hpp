#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cmalight/problem.hpp"
#include "cmalight/trial.hpp"

namespace cml {

// Adaptive-gradient baselines with their standard default settings, applied
// per component (batch size 1) inside an epoch loop in fixed order.

struct AdamConfig {
    double step = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    std::int64_t max_epochs = 1000;
    double time_limit_s = std::numeric_limits<double>::infinity();
    double grad_tolerance = 0.0;

    void validate() const {
        if (!(step > 0.0)) throw ContractError("AdamConfig: step must be > 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw ContractError("AdamConfig: betas must be in [0,1)");
        if (!(epsilon > 0.0)) throw ContractError("AdamConfig: epsilon must be > 0");
    }
};

struct AdagradConfig {
    double step = 1e-2;
    double epsilon = 1e-10;

    std::int64_t max_epochs = 1000;
    double time_limit_s = std::numeric_limits<double>::infinity();
    double grad_tolerance = 0.0;

    void validate() const {
        if (!(step > 0.0)) throw ContractError("AdagradConfig: step must be > 0");
        if (!(epsilon > 0.0)) throw ContractError("AdagradConfig: epsilon must be > 0");
    }
};

struct AdadeltaConfig {
    double rho = 0.9;
    double epsilon = 1e-6;
    double step = 1.0; // scaling of the adapted update

    std::int64_t max_epochs = 1000;
    double time_limit_s = std::numeric_limits<double>::infinity();
    double grad_tolerance = 0.0;

    void validate() const {
        if (!(rho >= 0.0 && rho < 1.0)) throw ContractError("AdadeltaConfig: rho must be in [0,1)");
        if (!(epsilon > 0.0)) throw ContractError("AdadeltaConfig: epsilon must be > 0");
        if (!(step > 0.0)) throw ContractError("AdadeltaConfig: step must be > 0");
    }
};

struct AdamState {
    std::vector<double> w;
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;

    explicit AdamState(std::span<const double> w0)
        : w(w0.begin(), w0.end()), m(w0.size(), 0.0), v(w0.size(), 0.0) {}
};

inline void adam_step(AdamState& s, std::span<const double> grad, const AdamConfig& cfg) {
    if (grad.size() != s.w.size()) throw ContractError("adam_step: gradient length mismatch");
    s.t += 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
    for (std::size_t j = 0; j < s.w.size(); ++j) {
        s.m[j] = cfg.beta1 * s.m[j] + (1.0 - cfg.beta1) * grad[j];
        s.v[j] = cfg.beta2 * s.v[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
        const double m_hat = s.m[j] / c1;
        const double v_hat = s.v[j] / c2;
        s.w[j] -= cfg.step * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

struct AdagradState {
    std::vector<double> w;
    std::vector<double> accum;

    explicit AdagradState(std::span<const double> w0)
        : w(w0.begin(), w0.end()), accum(w0.size(), 0.0) {}
};

inline void adagrad_step(AdagradState& s, std::span<const double> grad,
                         const AdagradConfig& cfg) {
    if (grad.size() != s.w.size()) throw ContractError("adagrad_step: gradient length mismatch");
    for (std::size_t j = 0; j < s.w.size(); ++j) {
        s.accum[j] += grad[j] * grad[j];
        s.w[j] -= cfg.step * grad[j] / (std::sqrt(s.accum[j]) + cfg.epsilon);
    }
}

struct AdadeltaState {
    std::vector<double> w;
    std::vector<double> accum_grad;
    std::vector<double> accum_update;

    explicit AdadeltaState(std::span<const double> w0)
        : w(w0.begin(), w0.end()), accum_grad(w0.size(), 0.0), accum_update(w0.size(), 0.0) {}
};

inline void adadelta_step(AdadeltaState& s, std::span<const double> grad,
                          const AdadeltaConfig& cfg) {
    if (grad.size() != s.w.size()) throw ContractError("adadelta_step: gradient length mismatch");
    for (std::size_t j = 0; j < s.w.size(); ++j) {
        s.accum_grad[j] = cfg.rho * s.accum_grad[j] + (1.0 - cfg.rho) * grad[j] * grad[j];
        const double update = -std::sqrt(s.accum_update[j] + cfg.epsilon) /
                              std::sqrt(s.accum_grad[j] + cfg.epsilon) * grad[j];
        s.accum_update[j] = cfg.rho * s.accum_update[j] + (1.0 - cfg.rho) * update * update;
        s.w[j] += cfg.step * update;
    }
}

namespace detail {

// Per-component epoch loop shared by the adaptive baselines. The update
// callback owns the optimizer state; `w` is the view it reads and writes.
template <typename UpdateFn>
TrialRecord per_sample_run(const FiniteSumProblem& problem, std::span<double> w,
                           const std::string& name, std::int64_t max_epochs,
                           double time_limit_s, double grad_tolerance, Instrumentation instr,
                           std::uint64_t seed, UpdateFn&& update) {
    TrialRecord rec;
    rec.algorithm = name;
    rec.seed = seed;

    Stopwatch clock;
    EvalCounters counters;

    const auto grad_norm_at = [&](std::span<const double> p) {
        return norm(grad_full_untracked(problem, p));
    };
    const bool need_grad = grad_tolerance > 0.0;

    EpochEntry init;
    init.epoch = 0;
    init.wall_s = clock.seconds();
    init.counters = counters;
    try {
        init.f = eval_full_untracked(problem, w);
        if (need_grad || instr.record_grad_norm) init.grad_norm = grad_norm_at(w);
    } catch (const NumericError& e) {
        rec.status = RunStatus::numeric_error;
        rec.error_message = e.what();
        rec.final_w.assign(w.begin(), w.end());
        return rec;
    }
    rec.entries.push_back(init);
    if (need_grad && *init.grad_norm <= grad_tolerance) {
        rec.status = RunStatus::converged;
        rec.final_w.assign(w.begin(), w.end());
        return rec;
    }

    const int stride = std::max(1, instr.stride);
    std::vector<double> g(w.size());
    std::int64_t k = 0;
    while (k < max_epochs) {
        if (clock.seconds() >= time_limit_s) break;
        double f_tilde = 0.0;
        try {
            for (int i = 0; i < problem.components(); ++i) {
                const double v = problem.component_value(i, w);
                counters.component_value_evals += 1;
                if (!std::isfinite(v))
                    throw NumericError("per-sample epoch: non-finite component value", i, i);
                f_tilde += v;
                problem.component_gradient(i, w, g);
                counters.component_gradient_evals += 1;
                for (double gj : g)
                    if (!std::isfinite(gj))
                        throw NumericError("per-sample epoch: non-finite gradient", i, i);
                update(g);
            }
        } catch (const NumericError& e) {
            rec.status = RunStatus::numeric_error;
            rec.error_message = e.what();
            rec.final_w.assign(w.begin(), w.end());
            return rec;
        }
        counters.epochs += 1;
        ++k;

        EpochEntry entry;
        entry.epoch = k;
        entry.wall_s = clock.seconds();
        entry.f_tilde = f_tilde;
        entry.counters = counters;
        const bool stride_hit = k % stride == 0;
        if (instr.record_f && stride_hit) entry.f = eval_full_untracked(problem, w);
        if (need_grad || (instr.record_grad_norm && stride_hit))
            entry.grad_norm = grad_norm_at(w);
        rec.entries.push_back(entry);

        if (need_grad && *entry.grad_norm <= grad_tolerance) {
            rec.status = RunStatus::converged;
            break;
        }
    }

    if (!rec.entries.empty()) {
        EpochEntry& last = rec.entries.back();
        if (instr.record_f && !last.f) last.f = eval_full_untracked(problem, w);
        if (instr.record_grad_norm && !last.grad_norm) last.grad_norm = grad_norm_at(w);
    }
    rec.final_w.assign(w.begin(), w.end());
    return rec;
}

} // namespace detail

inline TrialRecord adam_run(const FiniteSumProblem& problem, std::span<const double> w0,
                            const AdamConfig& config, Instrumentation instr = {},
                            std::uint64_t seed = 0) {
    config.validate();
    AdamState state(w0);
    return detail::per_sample_run(problem, state.w, "adam", config.max_epochs,
                                  config.time_limit_s, config.grad_tolerance, instr, seed,
                                  [&](std::span<const double> g) { adam_step(state, g, config); });
}

inline TrialRecord adagrad_run(const FiniteSumProblem& problem, std::span<const double> w0,
                               const AdagradConfig& config, Instrumentation instr = {},
                               std::uint64_t seed = 0) {
    config.validate();
    AdagradState state(w0);
    return detail::per_sample_run(
        problem, state.w, "adagrad", config.max_epochs, config.time_limit_s,
        config.grad_tolerance, instr, seed,
        [&](std::span<const double> g) { adagrad_step(state, g, config); });
}

inline TrialRecord adadelta_run(const FiniteSumProblem& problem, std::span<const double> w0,
                                const AdadeltaConfig& config, Instrumentation instr = {},
                                std::uint64_t seed = 0) {
    config.validate();
    AdadeltaState state(w0);
    return detail::per_sample_run(
        problem, state.w, "adadelta", config.max_epochs, config.time_limit_s,
        config.grad_tolerance, instr, seed,
        [&](std::span<const double> g) { adadelta_step(state, g, config); });
}

} // namespace cml
