#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmalight/problem.hpp"
#include "cmalight/trial.hpp"

namespace cml {

/// Hyperparameters and run budget of the watchdog-controlled loop.
/// zeta0/tau/theta/gamma/delta default to the published setting.
struct CmaLightConfig {
    double zeta0 = 0.5;  // initial stepsize
    double tau = 1e-2;   // small-direction / shrink threshold
    double theta = 0.75; // stepsize shrink factor
    double gamma = 1e-2; // sufficient-decrease coefficient
    double delta = 0.9;  // linesearch expansion factor (step grows by 1/delta)

    std::int64_t max_epochs = 1000;
    double time_limit_s = std::numeric_limits<double>::infinity();
    double grad_tolerance = 0.0; // diagnostic stop on ||grad f||; off when <= 0

    /// Divergence guard: the linesearch aborts once alpha would exceed
    /// extrapolation_ceiling * zeta. Unreachable on coercive objectives.
    double extrapolation_ceiling = 1e6;

    void validate() const {
        if (!(zeta0 > 0.0)) throw ContractError("CmaLightConfig: zeta0 must be > 0");
        if (!(theta > 0.0 && theta < 1.0))
            throw ContractError("CmaLightConfig: theta must be in (0,1)");
        if (!(tau > 0.0)) throw ContractError("CmaLightConfig: tau must be > 0");
        if (!(gamma > 0.0 && gamma < 1.0))
            throw ContractError("CmaLightConfig: gamma must be in (0,1)");
        if (!(delta > 0.0 && delta < 1.0))
            throw ContractError("CmaLightConfig: delta must be in (0,1)");
        if (max_epochs < 0) throw ContractError("CmaLightConfig: max_epochs must be >= 0");
        if (!(time_limit_s > 0.0)) throw ContractError("CmaLightConfig: time limit must be > 0");
        if (grad_tolerance < 0.0)
            throw ContractError("CmaLightConfig: grad_tolerance must be >= 0");
        if (!(extrapolation_ceiling > 1.0))
            throw ContractError("CmaLightConfig: extrapolation ceiling must be > 1");
    }
};

/// One incremental-gradient epoch's byproducts: tentative point, aggregated
/// direction, and the zero-cost objective estimate.
struct InnerCycleOutput {
    std::vector<double> w_tilde;    // w + zeta * direction (telescoped)
    std::vector<double> direction;  // sum of the per-component anti-gradients
    double f_tilde = 0.0;           // sum of component values along the pass
};

/// One epoch of incremental gradient from w with stepsize zeta, visiting
/// components in the given order:
///   f_i and -grad f_i are taken at the running point, which then moves by
///   zeta times the anti-gradient.
/// Accumulates the objective estimate f_tilde = sum of the visited component
/// values. Costs P component values and P component gradients, never a full
/// evaluation.
inline InnerCycleOutput inner_cycle(const FiniteSumProblem& problem, std::span<const double> w,
                                    double zeta, std::span<const int> order,
                                    EvalCounters& counters) {
    if (!(zeta > 0.0)) throw ContractError("inner_cycle: zeta must be > 0");
    if (order.size() != static_cast<std::size_t>(problem.components()))
        throw ContractError("inner_cycle: order must list every component once");
    {
        std::vector<bool> seen(order.size(), false);
        for (int i : order) {
            if (i < 0 || i >= problem.components() || seen[i])
                throw ContractError("inner_cycle: order is not a permutation");
            seen[i] = true;
        }
    }

    InnerCycleOutput out;
    out.w_tilde.assign(w.begin(), w.end());
    out.direction.assign(w.size(), 0.0);
    std::vector<double> g(w.size());

    int position = 0;
    for (int i : order) {
        const double v = problem.component_value(i, out.w_tilde);
        counters.component_value_evals += 1;
        if (!std::isfinite(v))
            throw NumericError("inner_cycle: non-finite component value at position " +
                                   std::to_string(position),
                               i, position);
        out.f_tilde += v;

        problem.component_gradient(i, out.w_tilde, g);
        counters.component_gradient_evals += 1;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!std::isfinite(g[j]))
                throw NumericError("inner_cycle: non-finite component gradient at position " +
                                       std::to_string(position),
                                   i, position);
            out.direction[j] -= g[j];
            out.w_tilde[j] -= zeta * g[j];
        }
        ++position;
    }
    return out;
}

/// Result of the extrapolation linesearch. alpha is 0 or zeta/delta^j;
/// whenever alpha > 0, f_hat holds f(w + alpha d) and satisfies
/// f_hat <= f(w) - gamma * alpha * ||d||^2.
struct LinesearchOutput {
    double alpha = 0.0;
    std::optional<double> f_hat;
    int full_evals_used = 0;
    int expansions = 0;     // successful while-loop steps
    bool extra_eval = false; // no-loop exit paid one evaluation at w + zeta d
};

/// Derivative-free extrapolation linesearch along d, seeded with the epoch
/// estimate f_tilde of the objective at the tentative point w + zeta d.
///
/// Evaluates f(w) once, rejects (alpha = 0) if the estimate already fails the
/// sufficient-decrease test, and otherwise grows the step by 1/delta while
/// the trial value keeps both below the sufficient-decrease bound at the
/// trial step and below the previous trial value. When the loop never runs,
/// the returned step is zeta and one extra evaluation at w + zeta d produces
/// the true f_hat; if that true value misses the sufficient-decrease bound
/// (the estimate was optimistic), the search returns alpha = 0 so a positive
/// alpha always certifies the decrease it claims.
inline LinesearchOutput edfl_light(const FiniteSumProblem& problem, double f_tilde,
                                   std::span<const double> w, std::span<const double> d,
                                   double zeta, double gamma, double delta,
                                   EvalCounters& counters, double ceiling = 1e6) {
    if (!(zeta > 0.0)) throw ContractError("edfl_light: zeta must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw ContractError("edfl_light: gamma and delta must be in (0,1)");
    if (d.size() != w.size()) throw ContractError("edfl_light: w and d lengths differ");

    LinesearchOutput out;
    const double f_w = eval_full(problem, w, counters);
    out.full_evals_used = 1;
    const double d_sq = squared_norm(d);

    if (f_tilde > f_w - gamma * zeta * d_sq) return out; // alpha = 0

    double alpha = zeta;
    double f_current = f_tilde;
    std::vector<double> trial(w.size());
    for (;;) {
        const double candidate = alpha / delta;
        if (candidate > ceiling * zeta)
            throw NumericError("edfl_light: extrapolation exceeded " +
                               std::to_string(ceiling) +
                               " * zeta; objective does not look coercive along d");
        for (std::size_t j = 0; j < w.size(); ++j) trial[j] = w[j] + candidate * d[j];
        const double f_trial = eval_full(problem, trial, counters);
        out.full_evals_used += 1;
        if (!std::isfinite(f_trial))
            throw NumericError("edfl_light: non-finite trial value");
        if (f_trial <= std::min(f_w - gamma * candidate * d_sq, f_current)) {
            f_current = f_trial;
            alpha = candidate;
            out.expansions += 1;
        } else {
            break;
        }
    }

    if (out.expansions == 0) {
        for (std::size_t j = 0; j < w.size(); ++j) trial[j] = w[j] + zeta * d[j];
        const double f_hat = eval_full(problem, trial, counters);
        out.full_evals_used += 1;
        out.extra_eval = true;
        if (f_hat > f_w - gamma * zeta * d_sq) return out; // estimate was optimistic; alpha = 0
        out.alpha = zeta;
        out.f_hat = f_hat;
        return out;
    }

    out.alpha = alpha;
    out.f_hat = f_current; // cached from the last successful trial
    return out;
}

/// Outer-loop state. zeta is non-increasing (each update is identity or a
/// multiplication by theta); phi is non-increasing; f0 is set once at
/// initialization.
struct CmaLightState {
    std::int64_t k = 0;
    std::vector<double> w;
    double zeta = 0.0;
    double phi = 0.0;
    double f0 = 0.0;
    EvalCounters counters;
    StepBranch last_branch = StepBranch::none;
    double last_alpha = 0.0;
};

/// Per-iteration report from cma_light_step.
struct CmaStepInfo {
    double f_tilde = 0.0;
    double d_norm = 0.0;
    double zeta_used = 0.0;
    StepBranch branch = StepBranch::none;
    double alpha = 0.0;
    std::optional<double> f_hat;
    int edfl_full_evals = 0;
    int edfl_expansions = 0;
    bool edfl_extra_eval = false;
    bool accepted = false; // alpha == zeta_used: tentative epoch point taken
};

/// Evaluates f(w0) (the one mandatory full evaluation) and seeds the state.
inline CmaLightState cma_light_init(const FiniteSumProblem& problem, std::span<const double> w0,
                                    const CmaLightConfig& config) {
    config.validate();
    if (w0.size() != static_cast<std::size_t>(problem.dim()))
        throw ContractError("cma_light_init: w0 has wrong length");
    for (double x : w0)
        if (!std::isfinite(x)) throw ContractError("cma_light_init: w0 must be finite");

    CmaLightState state;
    state.w.assign(w0.begin(), w0.end());
    state.f0 = eval_full(problem, state.w, state.counters);
    if (!std::isfinite(state.f0)) throw NumericError("cma_light_init: non-finite f(w0)");
    state.phi = state.f0;
    state.zeta = config.zeta0;
    return state;
}

/// One outer iteration:
///   1. inner cycle from w with the current zeta;
///   2. watchdog: the estimate passing the sufficient-decrease test against
///      phi (and staying below f(w0)) accepts the tentative point for free;
///   3. a small aggregated direction shrinks zeta, moving only if the
///      estimate stays below f(w0);
///   4. otherwise the linesearch runs; its step is taken only when the true
///      value at the new point stays below f(w0), zeta shrinks when the
///      extrapolated decrease alpha*||d||^2 is below tau*zeta, and phi
///      absorbs the best value seen.
/// Full evaluations happen only inside the linesearch.
inline CmaStepInfo cma_light_step(CmaLightState& state, const FiniteSumProblem& problem,
                                  const CmaLightConfig& config, std::span<const int> order) {
    const double zeta = state.zeta;
    InnerCycleOutput ic = inner_cycle(problem, state.w, zeta, order, state.counters);

    CmaStepInfo info;
    info.f_tilde = ic.f_tilde;
    info.zeta_used = zeta;
    const double d_sq = squared_norm(ic.direction);
    info.d_norm = std::sqrt(d_sq);

    double alpha = 0.0;
    if (ic.f_tilde <= std::min(state.phi - config.gamma * zeta, state.f0)) {
        info.branch = StepBranch::watchdog_accept;
        alpha = zeta;
        state.phi = ic.f_tilde;
    } else if (info.d_norm <= config.tau * zeta) {
        info.branch = StepBranch::small_direction;
        state.zeta = config.theta * zeta;
        alpha = ic.f_tilde <= state.f0 ? zeta : 0.0;
    } else {
        const LinesearchOutput ls =
            edfl_light(problem, ic.f_tilde, state.w, ic.direction, zeta, config.gamma,
                       config.delta, state.counters, config.extrapolation_ceiling);
        info.f_hat = ls.f_hat;
        info.edfl_full_evals = ls.full_evals_used;
        info.edfl_expansions = ls.expansions;
        info.edfl_extra_eval = ls.extra_eval;

        if (ls.alpha * d_sq <= config.tau * zeta) {
            info.branch = StepBranch::edfl_shrink;
            state.zeta = config.theta * zeta;
            if (ls.alpha > 0.0 && *ls.f_hat <= state.f0)
                alpha = ls.alpha;
            else if (ls.alpha == 0.0 && ic.f_tilde <= state.f0)
                alpha = zeta;
            else
                alpha = 0.0;
        } else {
            info.branch = StepBranch::edfl_keep;
            alpha = (ls.alpha > 0.0 && *ls.f_hat <= state.f0) ? ls.alpha : 0.0;
        }
        double phi_next = std::min(ic.f_tilde, state.phi);
        if (ls.f_hat) phi_next = std::min(phi_next, *ls.f_hat);
        state.phi = phi_next;
    }

    for (std::size_t j = 0; j < state.w.size(); ++j) state.w[j] += alpha * ic.direction[j];
    info.alpha = alpha;
    info.accepted = alpha == zeta;
    state.last_branch = info.branch;
    state.last_alpha = alpha;
    state.k += 1;
    state.counters.epochs += 1;
    return info;
}

/// Full run: repeats cma_light_step until the epoch/time budget is exhausted
/// or the diagnostic gradient stop fires. Instrumented values go through the
/// untracked evaluation path.
inline TrialRecord cma_light_run(const FiniteSumProblem& problem, std::span<const double> w0,
                                 const CmaLightConfig& config, OrderingPolicy ordering = {},
                                 Instrumentation instr = {}) {
    config.validate();
    TrialRecord rec;
    rec.algorithm = "cma_light";
    rec.seed = ordering.seed;

    Stopwatch clock;
    CmaLightState state;
    try {
        state = cma_light_init(problem, w0, config);
    } catch (const NumericError& e) {
        rec.status = RunStatus::numeric_error;
        rec.error_message = e.what();
        return rec;
    }
    ComponentOrder order(problem.components(), ordering);

    const auto grad_norm_at = [&](std::span<const double> w) {
        return norm(grad_full_untracked(problem, w));
    };
    const bool need_grad_each_epoch = config.grad_tolerance > 0.0;

    EpochEntry init;
    init.epoch = 0;
    init.wall_s = clock.seconds();
    init.f_tilde = state.f0;
    init.f = state.f0; // true by definition of the initialization evaluation
    init.zeta = state.zeta;
    init.phi = state.phi;
    init.counters = state.counters;
    if (need_grad_each_epoch || instr.record_grad_norm) init.grad_norm = grad_norm_at(state.w);
    rec.entries.push_back(init);
    if (need_grad_each_epoch && *init.grad_norm <= config.grad_tolerance) {
        rec.status = RunStatus::converged;
        rec.final_w = state.w;
        return rec;
    }

    const int stride = std::max(1, instr.stride);
    while (state.k < config.max_epochs) {
        if (clock.seconds() >= config.time_limit_s) break;
        CmaStepInfo info;
        try {
            info = cma_light_step(state, problem, config, order.next_epoch());
        } catch (const NumericError& e) {
            rec.status = RunStatus::numeric_error;
            rec.error_message = e.what();
            rec.final_w = state.w;
            return rec;
        }

        EpochEntry entry;
        entry.epoch = state.k;
        entry.wall_s = clock.seconds();
        entry.f_tilde = info.f_tilde;
        entry.zeta = state.zeta; // stepsize after the update law
        entry.phi = state.phi;
        entry.alpha = info.alpha;
        entry.branch = info.branch;
        entry.accepted = info.accepted;
        entry.edfl_evals = info.edfl_full_evals;
        entry.counters = state.counters;

        const bool stride_hit = state.k % stride == 0;
        if (instr.record_f && stride_hit) entry.f = eval_full_untracked(problem, state.w);
        if (need_grad_each_epoch || (instr.record_grad_norm && stride_hit))
            entry.grad_norm = grad_norm_at(state.w);
        rec.entries.push_back(entry);

        if (need_grad_each_epoch && *entry.grad_norm <= config.grad_tolerance) {
            rec.status = RunStatus::converged;
            break;
        }
    }

    // Make sure the last entry carries the instrumented values when asked.
    if (!rec.entries.empty()) {
        EpochEntry& last = rec.entries.back();
        if (instr.record_f && !last.f) last.f = eval_full_untracked(problem, state.w);
        if (instr.record_grad_norm && !last.grad_norm) last.grad_norm = grad_norm_at(state.w);
    }
    rec.final_w = state.w;
    return rec;
}

} // namespace cml
