#pragma once

#include <optional>

#include "cmalight/errors.hpp"
#include "cmalight/trial.hpp"

namespace cml {

/// Fraction of outer iterations that took the tentative epoch point
/// (alpha == zeta, i.e. w_{k+1} = w_tilde_k), over all iterations of a
/// watchdog-controlled run.
inline double acceptance_rate(const TrialRecord& record) {
    if (record.algorithm != "cma_light")
        throw ContractError("acceptance_rate: record is from '" + record.algorithm +
                            "', needs a cma_light run");
    if (record.entries.size() < 2)
        throw ContractError("acceptance_rate: record has no iterations");
    std::int64_t accepted = 0;
    std::int64_t total = 0;
    for (std::size_t e = 1; e < record.entries.size(); ++e) {
        ++total;
        if (record.entries[e].accepted) ++accepted;
    }
    return static_cast<double>(accepted) / static_cast<double>(total);
}

/// Average full evaluations per epoch, excluding evaluations made before the
/// first epoch (for the watchdog-controlled loop that is exactly the one
/// mandatory initialization evaluation). Absent when the record holds no
/// epochs.
inline std::optional<double> full_evals_per_epoch(const TrialRecord& record) {
    if (record.entries.empty()) throw ContractError("full_evals_per_epoch: empty record");
    const std::int64_t epochs = record.entries.back().counters.epochs;
    if (epochs == 0) return std::nullopt;
    const std::int64_t initial = record.entries.front().counters.full_value_evals;
    const std::int64_t total = record.entries.back().counters.full_value_evals;
    return static_cast<double>(total - initial) / static_cast<double>(epochs);
}

} // namespace cml
