#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "cmalight/cma_light.hpp"
#include "cmalight/problem.hpp"
#include "cmalight/trial.hpp"

namespace cml {

/// Incremental gradient with per-epoch decaying stepsize
/// zeta_{k+1} = zeta_k (1 - epsilon).
struct IgConfig {
    double zeta0 = 0.5;
    double epsilon = 0.5;

    std::int64_t max_epochs = 1000;
    double time_limit_s = std::numeric_limits<double>::infinity();
    double grad_tolerance = 0.0; // diagnostic stop; off when <= 0

    void validate() const {
        if (!(zeta0 > 0.0)) throw ContractError("IgConfig: zeta0 must be > 0");
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw ContractError("IgConfig: epsilon must be in (0,1)");
        if (max_epochs < 0) throw ContractError("IgConfig: max_epochs must be >= 0");
        if (!(time_limit_s > 0.0)) throw ContractError("IgConfig: time limit must be > 0");
    }
};

/// Each epoch is one inner cycle in fixed order; the tentative point is
/// always taken and the stepsize decays geometrically. Never evaluates the
/// full objective (instrumented values go through the untracked path).
inline TrialRecord ig_run(const FiniteSumProblem& problem, std::span<const double> w0,
                          const IgConfig& config, Instrumentation instr = {},
                          std::uint64_t seed = 0) {
    config.validate();
    if (w0.size() != static_cast<std::size_t>(problem.dim()))
        throw ContractError("ig_run: w0 has wrong length");

    TrialRecord rec;
    rec.algorithm = "ig";
    rec.seed = seed;

    Stopwatch clock;
    EvalCounters counters;
    std::vector<double> w(w0.begin(), w0.end());
    double zeta = config.zeta0;
    ComponentOrder order(problem.components(), OrderingPolicy{OrderingKind::fixed, 0});

    const auto grad_norm_at = [&](std::span<const double> p) {
        return norm(grad_full_untracked(problem, p));
    };
    const bool need_grad = config.grad_tolerance > 0.0;

    EpochEntry init;
    init.epoch = 0;
    init.wall_s = clock.seconds();
    init.zeta = zeta;
    init.counters = counters;
    try {
        init.f = eval_full_untracked(problem, w); // shared baseline for the harness
        if (need_grad || instr.record_grad_norm) init.grad_norm = grad_norm_at(w);
    } catch (const NumericError& e) {
        rec.status = RunStatus::numeric_error;
        rec.error_message = e.what();
        rec.final_w = std::move(w);
        return rec;
    }
    rec.entries.push_back(init);
    if (need_grad && *init.grad_norm <= config.grad_tolerance) {
        rec.status = RunStatus::converged;
        rec.final_w = std::move(w);
        return rec;
    }

    const int stride = std::max(1, instr.stride);
    std::int64_t k = 0;
    while (k < config.max_epochs) {
        if (clock.seconds() >= config.time_limit_s) break;
        InnerCycleOutput ic;
        try {
            ic = inner_cycle(problem, w, zeta, order.next_epoch(), counters);
        } catch (const NumericError& e) {
            rec.status = RunStatus::numeric_error;
            rec.error_message = e.what();
            rec.final_w = std::move(w);
            return rec;
        }
        w = std::move(ic.w_tilde);
        zeta *= 1.0 - config.epsilon;
        counters.epochs += 1;
        ++k;

        EpochEntry entry;
        entry.epoch = k;
        entry.wall_s = clock.seconds();
        entry.f_tilde = ic.f_tilde;
        entry.zeta = zeta;
        entry.counters = counters;
        const bool stride_hit = k % stride == 0;
        if (instr.record_f && stride_hit) entry.f = eval_full_untracked(problem, w);
        if (need_grad || (instr.record_grad_norm && stride_hit))
            entry.grad_norm = grad_norm_at(w);
        rec.entries.push_back(entry);

        if (need_grad && *entry.grad_norm <= config.grad_tolerance) {
            rec.status = RunStatus::converged;
            break;
        }
    }

    if (!rec.entries.empty()) {
        EpochEntry& last = rec.entries.back();
        if (instr.record_f && !last.f) last.f = eval_full_untracked(problem, w);
        if (instr.record_grad_norm && !last.grad_norm) last.grad_norm = grad_norm_at(w);
    }
    rec.final_w = std::move(w);
    return rec;
}

} // namespace cml
