#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cmalight/problem.hpp"

namespace cml {

enum class RunStatus { budget_exhausted, converged, numeric_error };

/// Outer-iteration outcome of the watchdog-controlled loop; `none` marks the
/// initialization entry and algorithms without branch logic.
enum class StepBranch { none, watchdog_accept, small_direction, edfl_shrink, edfl_keep };

inline const char* to_string(StepBranch b) {
    switch (b) {
        case StepBranch::watchdog_accept: return "watchdog_accept";
        case StepBranch::small_direction: return "small_direction";
        case StepBranch::edfl_shrink: return "edfl_shrink";
        case StepBranch::edfl_keep: return "edfl_keep";
        default: return "none";
    }
}

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return "converged";
        case RunStatus::numeric_error: return "numeric_error";
        default: return "budget_exhausted";
    }
}

struct Budget {
    std::int64_t max_epochs = 100;
    double time_limit_s = std::numeric_limits<double>::infinity();
};

/// What to record beyond the optimizer's own quantities. Instrumented values
/// (true f, gradient norm) are computed through the untracked evaluation path
/// and never show up in the run's counters.
struct Instrumentation {
    bool record_f = false;
    bool record_grad_norm = false;
    int stride = 1; // record every stride-th epoch (and always the last)
};

enum class OrderingKind { fixed, reshuffle };

struct OrderingPolicy {
    OrderingKind kind = OrderingKind::fixed;
    std::uint64_t seed = 0;
};

/// Produces the component visiting order for each epoch: identity for fixed,
/// a fresh seeded permutation per epoch for reshuffle.
class ComponentOrder {
public:
    ComponentOrder(int components, OrderingPolicy policy)
        : order_(components), policy_(policy), rng_(policy.seed) {
        std::iota(order_.begin(), order_.end(), 0);
    }

    std::span<const int> next_epoch() {
        if (policy_.kind == OrderingKind::reshuffle)
            std::shuffle(order_.begin(), order_.end(), rng_);
        return order_;
    }

private:
    std::vector<int> order_;
    OrderingPolicy policy_;
    std::mt19937_64 rng_;
};

/// One row of a run trajectory. Entry 0 is the initialization snapshot;
/// entries k >= 1 describe outer iteration k. Fields that do not apply to an
/// algorithm stay unset.
struct EpochEntry {
    std::int64_t epoch = 0;
    double wall_s = 0.0;
    double f_tilde = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> f;         // instrumented true objective
    std::optional<double> grad_norm; // instrumented gradient norm
    std::optional<double> zeta;      // stepsize in effect during this epoch
    std::optional<double> phi;       // reference value after the iteration
    std::optional<double> alpha;     // accepted steplength
    StepBranch branch = StepBranch::none;
    bool accepted = false; // alpha == zeta: the tentative epoch point was taken
    int edfl_evals = 0;    // full evaluations spent inside the linesearch
    EvalCounters counters; // cumulative snapshot
};

/// Time-stamped trajectory of one optimizer run.
struct TrialRecord {
    std::string algorithm;
    std::string problem_id;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::budget_exhausted;
    std::string error_message;
    std::vector<EpochEntry> entries;
    std::vector<double> final_w; // not serialized; in-memory convenience

    /// Objective trajectory value for profiles: instrumented f when present,
    /// the running estimate otherwise.
    static std::optional<double> objective(const EpochEntry& e) {
        if (e.f) return e.f;
        if (std::isfinite(e.f_tilde)) return e.f_tilde;
        return std::nullopt;
    }

    std::int64_t epochs_run() const {
        return entries.empty() ? 0 : entries.back().counters.epochs;
    }
};

/// Wall clock for run stamping.
class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace cml
