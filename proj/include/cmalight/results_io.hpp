#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmalight/errors.hpp"
#include "cmalight/metrics.hpp"
#include "cmalight/profiles.hpp"
#include "cmalight/trial.hpp"

namespace cml {

inline constexpr const char* kResultsSchemaVersion = "v1";

namespace detail {

inline nlohmann::json to_json_number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr; // NaN / inf have no JSON representation
}

inline nlohmann::json optional_to_json(const std::optional<double>& v) {
    if (v && std::isfinite(*v)) return *v;
    return nullptr;
}

inline std::optional<double> optional_from_json(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

inline StepBranch branch_from_string(const std::string& s) {
    if (s == "watchdog_accept") return StepBranch::watchdog_accept;
    if (s == "small_direction") return StepBranch::small_direction;
    if (s == "edfl_shrink") return StepBranch::edfl_shrink;
    if (s == "edfl_keep") return StepBranch::edfl_keep;
    return StepBranch::none;
}

inline RunStatus status_from_string(const std::string& s) {
    if (s == "converged") return RunStatus::converged;
    if (s == "numeric_error") return RunStatus::numeric_error;
    return RunStatus::budget_exhausted;
}

/// Write-then-rename so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing", tmp.string());
        out << content;
        if (!out) throw IoError("write failed", tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + ec.message(), path.string());
}

inline std::string sanitize_for_filename(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '-';
    return out.empty() ? std::string("unnamed") : out;
}

} // namespace detail

inline nlohmann::json to_json(const EvalCounters& c) {
    return {{"full_value_evals", c.full_value_evals},
            {"component_value_evals", c.component_value_evals},
            {"component_gradient_evals", c.component_gradient_evals},
            {"epochs", c.epochs}};
}

inline EvalCounters counters_from_json(const nlohmann::json& j) {
    EvalCounters c;
    c.full_value_evals = j.at("full_value_evals").get<std::int64_t>();
    c.component_value_evals = j.at("component_value_evals").get<std::int64_t>();
    c.component_gradient_evals = j.at("component_gradient_evals").get<std::int64_t>();
    c.epochs = j.at("epochs").get<std::int64_t>();
    return c;
}

inline nlohmann::json to_json(const EpochEntry& e) {
    return {{"epoch", e.epoch},
            {"wall_s", e.wall_s},
            {"f_tilde", detail::to_json_number(e.f_tilde)},
            {"f", detail::optional_to_json(e.f)},
            {"grad_norm", detail::optional_to_json(e.grad_norm)},
            {"zeta", detail::optional_to_json(e.zeta)},
            {"phi", detail::optional_to_json(e.phi)},
            {"alpha", detail::optional_to_json(e.alpha)},
            {"branch", to_string(e.branch)},
            {"accepted", e.accepted},
            {"edfl_evals", e.edfl_evals},
            {"counters", to_json(e.counters)}};
}

inline EpochEntry epoch_entry_from_json(const nlohmann::json& j) {
    EpochEntry e;
    e.epoch = j.at("epoch").get<std::int64_t>();
    e.wall_s = j.at("wall_s").get<double>();
    e.f_tilde = j.at("f_tilde").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : j.at("f_tilde").get<double>();
    e.f = detail::optional_from_json(j, "f");
    e.grad_norm = detail::optional_from_json(j, "grad_norm");
    e.zeta = detail::optional_from_json(j, "zeta");
    e.phi = detail::optional_from_json(j, "phi");
    e.alpha = detail::optional_from_json(j, "alpha");
    e.branch = detail::branch_from_string(j.at("branch").get<std::string>());
    e.accepted = j.at("accepted").get<bool>();
    e.edfl_evals = j.at("edfl_evals").get<int>();
    e.counters = counters_from_json(j.at("counters"));
    return e;
}

inline nlohmann::json to_json(const TrialRecord& rec) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : rec.entries) entries.push_back(to_json(e));
    return {{"schema_version", kResultsSchemaVersion},
            {"algorithm", rec.algorithm},
            {"problem", rec.problem_id},
            {"seed", rec.seed},
            {"status", to_string(rec.status)},
            {"error", rec.error_message},
            {"entries", std::move(entries)}};
}

inline TrialRecord trial_record_from_json(const nlohmann::json& j) {
    if (!j.contains("schema_version") || j.at("schema_version") != kResultsSchemaVersion)
        throw ContractError("trial record: unsupported schema version");
    TrialRecord rec;
    rec.algorithm = j.at("algorithm").get<std::string>();
    rec.problem_id = j.at("problem").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.status = detail::status_from_string(j.at("status").get<std::string>());
    rec.error_message = j.value("error", std::string());
    for (const auto& je : j.at("entries")) rec.entries.push_back(epoch_entry_from_json(je));
    return rec;
}

inline TrialRecord read_record_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open record file", path);
    nlohmann::json j;
    try {
        in >> j;
        return trial_record_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("record file " + path + ": " + e.what());
    }
}

inline nlohmann::json to_json(const ProfileCurve& curve) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& [tau, rho] : curve.points) points.push_back({tau, rho});
    nlohmann::json ratios = nlohmann::json::array();
    std::size_t unsolved = 0;
    for (double r : curve.ratios)
        if (std::isfinite(r)) ratios.push_back(r);
        else ++unsolved;
    return {{"algorithm", curve.algorithm},
            {"precision", curve.precision},
            {"cost", to_string(curve.cost)},
            {"ratios", std::move(ratios)},
            {"unsolved", unsolved},
            {"points", std::move(points)},
            {"solved_fraction", curve.solved_fraction}};
}

/// Per-trial scalar metrics for the summary file.
inline nlohmann::json trial_summary_json(const TrialRecord& rec) {
    nlohmann::json j{{"algorithm", rec.algorithm},
                     {"problem", rec.problem_id},
                     {"seed", rec.seed},
                     {"status", to_string(rec.status)},
                     {"epochs", rec.epochs_run()},
                     {"wall_s", rec.entries.empty() ? 0.0 : rec.entries.back().wall_s}};
    if (!rec.entries.empty()) {
        j["counters"] = to_json(rec.entries.back().counters);
        j["final_objective"] =
            detail::optional_to_json(TrialRecord::objective(rec.entries.back()));
        j["final_grad_norm"] = detail::optional_to_json(rec.entries.back().grad_norm);
        const auto fepe = full_evals_per_epoch(rec);
        j["full_evals_per_epoch"] = detail::optional_to_json(fepe);
        if (rec.algorithm == "cma_light" && rec.entries.size() > 1)
            j["acceptance_rate"] = acceptance_rate(rec);
    }
    return j;
}

/// One CSV row per epoch entry across all records. Header:
///   algorithm,problem,seed,status,epoch,wall_s,f_tilde,f,grad_norm,zeta,phi,
///   alpha,branch,accepted,edfl_evals,full_value_evals,component_value_evals,
///   component_gradient_evals,epochs
inline std::string records_csv(std::span<const TrialRecord> records) {
    std::ostringstream out;
    out.precision(17);
    out << "algorithm,problem,seed,status,epoch,wall_s,f_tilde,f,grad_norm,zeta,phi,alpha,"
           "branch,accepted,edfl_evals,full_value_evals,component_value_evals,"
           "component_gradient_evals,epochs\n";
    const auto opt = [](const std::optional<double>& v) {
        std::ostringstream s;
        s.precision(17);
        if (v && std::isfinite(*v)) s << *v;
        return s.str();
    };
    for (const auto& rec : records) {
        for (const auto& e : rec.entries) {
            out << rec.algorithm << ',' << rec.problem_id << ',' << rec.seed << ','
                << to_string(rec.status) << ',' << e.epoch << ',' << e.wall_s << ','
                << opt(std::isfinite(e.f_tilde) ? std::optional<double>(e.f_tilde)
                                                : std::nullopt)
                << ',' << opt(e.f) << ',' << opt(e.grad_norm) << ',' << opt(e.zeta) << ','
                << opt(e.phi) << ',' << opt(e.alpha) << ',' << to_string(e.branch) << ','
                << (e.accepted ? 1 : 0) << ',' << e.edfl_evals << ','
                << e.counters.full_value_evals << ',' << e.counters.component_value_evals << ','
                << e.counters.component_gradient_evals << ',' << e.counters.epochs << '\n';
        }
    }
    return out.str();
}

/// Writes records.csv, summary.json and one record_*.json per trial into
/// `dir`. Files are written atomically; returns the written paths.
inline std::vector<std::string> emit_results(std::span<const TrialRecord> records,
                                             std::span<const ProfileCurve> curves,
                                             const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message(), dir);

    std::vector<std::string> written;

    const fs::path csv_path = fs::path(dir) / "records.csv";
    detail::write_file_atomic(csv_path, records_csv(records));
    written.push_back(csv_path.string());

    nlohmann::json summary{{"schema_version", kResultsSchemaVersion},
                           {"notes",
                            {{"full_evals_per_epoch",
                              "excludes evaluations made before the first epoch"}}}};
    summary["trials"] = nlohmann::json::array();
    for (const auto& rec : records) summary["trials"].push_back(trial_summary_json(rec));
    summary["profiles"] = nlohmann::json::array();
    for (const auto& curve : curves) summary["profiles"].push_back(to_json(curve));
    const fs::path summary_path = fs::path(dir) / "summary.json";
    detail::write_file_atomic(summary_path, summary.dump(2) + "\n");
    written.push_back(summary_path.string());

    for (const auto& rec : records) {
        const std::string name = "record_" + detail::sanitize_for_filename(rec.algorithm) + "_" +
                                 detail::sanitize_for_filename(rec.problem_id) + "_" +
                                 std::to_string(rec.seed) + ".json";
        const fs::path path = fs::path(dir) / name;
        detail::write_file_atomic(path, to_json(rec).dump(2) + "\n");
        written.push_back(path.string());
    }
    return written;
}

} // namespace cml
