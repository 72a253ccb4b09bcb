#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmalight/errors.hpp"
#include "cmalight/trial.hpp"

namespace cml {

enum class CostMetric { wallclock, epochs, full_evals };

inline const char* to_string(CostMetric m) {
    switch (m) {
        case CostMetric::epochs: return "epochs";
        case CostMetric::full_evals: return "full_evals";
        default: return "wallclock";
    }
}

inline CostMetric cost_metric_from_string(const std::string& s) {
    if (s == "wallclock") return CostMetric::wallclock;
    if (s == "epochs") return CostMetric::epochs;
    if (s == "full_evals") return CostMetric::full_evals;
    throw ContractError("unknown cost metric '" + s + "'");
}

/// One solver's Dolan-More curve at a fixed precision: sorted performance
/// ratios (one per problem instance, +inf for unsolved) and the step function
/// rho(tau_hat) = fraction of instances with ratio <= tau_hat.
struct ProfileCurve {
    std::string algorithm;
    double precision = 0.0;
    CostMetric cost = CostMetric::wallclock;
    std::vector<double> ratios;                    // sorted, may contain +inf
    std::vector<std::pair<double, double>> points; // (tau_hat, rho) breakpoints
    double solved_fraction = 0.0;
};

namespace detail {

inline double entry_cost(const EpochEntry& e, CostMetric metric) {
    switch (metric) {
        case CostMetric::epochs:
            return std::max<double>(static_cast<double>(e.epoch), 1.0);
        case CostMetric::full_evals:
            // +1 floors the cost for methods that never evaluate f.
            return 1.0 + static_cast<double>(e.counters.full_value_evals);
        default:
            return std::max(e.wall_s, 1e-9);
    }
}

} // namespace detail

/// Computes one curve per solver. A solver solves an instance at precision
/// tau_prec once its objective trajectory reaches
///   f <= f_star + tau_prec * (f(w0) - f_star),
/// where f_star is the best final objective over all solvers on that
/// instance and f(w0) the instance's shared initial value; its cost is the
/// budget spent at the first entry meeting the threshold. Runs that ended in
/// numeric error carry infinite cost. Each (problem, seed) pair is one
/// instance; every (instance, solver) pair must be present.
inline std::vector<ProfileCurve> perf_profile(std::span<const TrialRecord> records,
                                              double precision, CostMetric cost) {
    if (records.empty()) throw ContractError("perf_profile: no records");
    if (!(precision > 0.0)) throw ContractError("perf_profile: precision must be > 0");

    using InstanceKey = std::pair<std::string, std::uint64_t>;
    std::set<InstanceKey> instances;
    std::set<std::string> solvers;
    std::map<std::pair<InstanceKey, std::string>, const TrialRecord*> by_pair;
    for (const auto& rec : records) {
        if (rec.entries.empty() && rec.status != RunStatus::numeric_error)
            throw ContractError("perf_profile: record without entries (" + rec.algorithm + ")");
        const InstanceKey key{rec.problem_id, rec.seed};
        instances.insert(key);
        solvers.insert(rec.algorithm);
        if (!by_pair.emplace(std::make_pair(key, rec.algorithm), &rec).second)
            throw ContractError("perf_profile: duplicate record for (" + rec.problem_id + ", seed " +
                                std::to_string(rec.seed) + ", " + rec.algorithm + ")");
    }
    for (const auto& inst : instances)
        for (const auto& s : solvers)
            if (!by_pair.count({inst, s}))
                throw ContractError("perf_profile: missing record for (" + inst.first +
                                    ", seed " + std::to_string(inst.second) + ", " + s + ")");

    const double inf = std::numeric_limits<double>::infinity();
    std::map<std::string, std::vector<double>> ratios_by_solver;
    for (const auto& s : solvers) ratios_by_solver[s] = {};

    for (const auto& inst : instances) {
        // Shared initial value and best final objective on this instance.
        std::optional<double> f0;
        double f_star = inf;
        for (const auto& s : solvers) {
            const TrialRecord& rec = *by_pair.at({inst, s});
            if (rec.entries.empty()) continue; // failed before producing entries
            if (!f0) f0 = TrialRecord::objective(rec.entries.front());
            if (rec.status == RunStatus::numeric_error) continue;
            const auto fin = TrialRecord::objective(rec.entries.back());
            if (fin && *fin < f_star) f_star = *fin;
        }
        if (!f0)
            throw ContractError("perf_profile: instance (" + inst.first +
                                ") has no initial objective");
        const double threshold =
            f_star == inf ? -inf : f_star + precision * (*f0 - f_star);

        std::map<std::string, double> cost_by_solver;
        double best_cost = inf;
        for (const auto& s : solvers) {
            const TrialRecord& rec = *by_pair.at({inst, s});
            double t = inf;
            if (rec.status != RunStatus::numeric_error) {
                for (const auto& e : rec.entries) {
                    const auto obj = TrialRecord::objective(e);
                    if (obj && *obj <= threshold) {
                        t = detail::entry_cost(e, cost);
                        break;
                    }
                }
            }
            cost_by_solver[s] = t;
            best_cost = std::min(best_cost, t);
        }
        for (const auto& s : solvers) {
            const double t = cost_by_solver[s];
            ratios_by_solver[s].push_back(t == inf || best_cost == inf ? inf : t / best_cost);
        }
    }

    std::vector<ProfileCurve> curves;
    const double n = static_cast<double>(instances.size());
    for (const auto& s : solvers) {
        ProfileCurve curve;
        curve.algorithm = s;
        curve.precision = precision;
        curve.cost = cost;
        curve.ratios = ratios_by_solver[s];
        std::sort(curve.ratios.begin(), curve.ratios.end());
        std::size_t done = 0;
        while (done < curve.ratios.size() && std::isfinite(curve.ratios[done])) {
            const double r = curve.ratios[done];
            std::size_t upto = done;
            while (upto < curve.ratios.size() && curve.ratios[upto] == r) ++upto;
            curve.points.emplace_back(r, static_cast<double>(upto) / n);
            done = upto;
        }
        curve.solved_fraction = static_cast<double>(done) / n;
        curves.push_back(std::move(curve));
    }
    return curves;
}

} // namespace cml
