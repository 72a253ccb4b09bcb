#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmalight/gradcheck.hpp"
#include "cmalight/results_io.hpp"
#include "cmalight/run_config.hpp"

namespace cml::cli {

// Exit codes: 0 success, 1 usage/config, 2 numeric failure, 3 IO.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitIo = 3;

namespace detail {

inline OrderingKind ordering_kind(const std::string& s) {
    if (s == "fixed") return OrderingKind::fixed;
    if (s == "reshuffle") return OrderingKind::reshuffle;
    throw ContractError("ordering must be 'fixed' or 'reshuffle'");
}

/// Directories expand to the record_*.json files inside them.
inline std::vector<std::string> expand_record_paths(const std::vector<std::string>& inputs) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in)) {
                const std::string name = e.path().filename().string();
                if (e.is_regular_file() && name.rfind("record_", 0) == 0 &&
                    e.path().extension() == ".json")
                    found.push_back(e.path().string());
            }
            std::sort(found.begin(), found.end());
            paths.insert(paths.end(), found.begin(), found.end());
        } else {
            paths.push_back(in);
        }
    }
    if (paths.empty()) throw ContractError("no record files found");
    return paths;
}

struct CommonOverrides {
    std::string config_path;
    std::string output_dir;
    std::vector<std::uint64_t> seeds;
    std::int64_t max_epochs = -1;
    double time_limit_s = -1.0;
    double grad_tolerance = -1.0;
    std::string ordering;
    int jobs = 0;

    RunConfig load() const {
        RunConfig cfg = load_run_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (!seeds.empty()) cfg.seeds = seeds;
        if (max_epochs >= 0) cfg.budget.max_epochs = max_epochs;
        if (time_limit_s > 0.0) cfg.budget.time_limit_s = time_limit_s;
        if (grad_tolerance >= 0.0) cfg.grad_tolerance = grad_tolerance;
        if (!ordering.empty()) cfg.ordering = ordering;
        if (jobs > 0) cfg.jobs = jobs;
        return cfg;
    }

    void attach(CLI::App* cmd, bool with_jobs) {
        cmd->add_option("-c,--config", config_path, "JSON run configuration")->required();
        cmd->add_option("-o,--output", output_dir, "Output directory (default: config, then $" +
                                                       std::string(kOutputDirEnvVar) +
                                                       ", then ./results)");
        cmd->add_option("--seeds", seeds, "Override the seed list");
        cmd->add_option("--max-epochs", max_epochs, "Override the epoch budget");
        cmd->add_option("--time-limit", time_limit_s, "Override the time limit (seconds)");
        cmd->add_option("--grad-tolerance", grad_tolerance,
                        "Diagnostic stop on the full gradient norm");
        cmd->add_option("--ordering", ordering, "Component ordering: fixed or reshuffle");
        if (with_jobs) cmd->add_option("-j,--jobs", jobs, "Max concurrent trials");
    }
};

inline int emit_and_report(const std::vector<TrialRecord>& records,
                           const std::vector<ProfileCurve>& curves, const std::string& dir) {
    const auto written = emit_results(records, curves, dir);
    std::size_t failed = 0;
    for (const auto& r : records)
        if (r.status == RunStatus::numeric_error) ++failed;
    std::cout << records.size() << " trial(s), " << failed << " numeric failure(s); results in "
              << dir << "\n";
    for (const auto& p : written) std::cout << "  " << p << "\n";
    return failed == records.size() && !records.empty() ? kExitNumeric : kExitOk;
}

inline int run_train(const CommonOverrides& common, const std::string& algorithm_name) {
    RunConfig cfg = common.load();
    if (cfg.problems.empty()) throw ContractError("config has no problem");
    if (cfg.algorithms.empty()) cfg.algorithms.push_back(AlgorithmSpec{});

    AlgorithmSpec algo = cfg.algorithms.front();
    if (!algorithm_name.empty()) {
        const auto hit = std::find_if(cfg.algorithms.begin(), cfg.algorithms.end(),
                                      [&](const AlgorithmSpec& a) { return a.name == algorithm_name; });
        if (hit != cfg.algorithms.end()) algo = *hit;
        else {
            algo = AlgorithmSpec{};
            algo.name = algorithm_name;
            if (algorithm_name != "cma_light" && algorithm_name != "ig" &&
                algorithm_name != "adam" && algorithm_name != "adagrad" &&
                algorithm_name != "adadelta")
                throw ContractError("unknown algorithm '" + algorithm_name + "'");
        }
    }

    const BenchProblem problem = build_bench_problem(cfg.problems.front());
    const OrderingKind ordering = ordering_kind(cfg.ordering);
    std::vector<TrialRecord> records =
        run_bench({problem}, {algo}, cfg.seeds, cfg.budget, cfg.grad_tolerance, ordering,
                  cfg.instrumentation, cfg.jobs);
    return emit_and_report(records, {}, resolve_output_dir(cfg));
}

inline int run_bench_cmd(const CommonOverrides& common, std::vector<double> precisions,
                         std::string cost_name) {
    RunConfig cfg = common.load();
    if (cfg.problems.empty()) throw ContractError("config has no problems");
    if (cfg.algorithms.empty()) throw ContractError("config has no algorithms");
    if (!precisions.empty()) cfg.profile_precisions = std::move(precisions);
    if (!cost_name.empty()) cfg.profile_cost = std::move(cost_name);

    std::vector<BenchProblem> problems;
    problems.reserve(cfg.problems.size());
    for (const auto& p : cfg.problems) problems.push_back(build_bench_problem(p));

    const OrderingKind ordering = ordering_kind(cfg.ordering);
    std::vector<TrialRecord> records =
        run_bench(problems, cfg.algorithms, cfg.seeds, cfg.budget, cfg.grad_tolerance, ordering,
                  cfg.instrumentation, cfg.jobs);

    const CostMetric cost = cost_metric_from_string(cfg.profile_cost);
    std::vector<ProfileCurve> curves;
    for (double prec : cfg.profile_precisions) {
        auto batch = perf_profile(records, prec, cost);
        curves.insert(curves.end(), batch.begin(), batch.end());
    }
    return emit_and_report(records, curves, resolve_output_dir(cfg));
}

inline int run_profile(const std::vector<std::string>& record_inputs,
                       std::vector<double> precisions, const std::string& cost_name,
                       std::string output_dir) {
    if (precisions.empty()) precisions = {0.1, 0.01, 1e-4};
    const CostMetric cost = cost_metric_from_string(cost_name);

    std::vector<TrialRecord> records;
    for (const auto& path : expand_record_paths(record_inputs))
        records.push_back(read_record_file(path));

    std::vector<ProfileCurve> curves;
    for (double prec : precisions) {
        auto batch = perf_profile(records, prec, cost);
        curves.insert(curves.end(), batch.begin(), batch.end());
    }

    if (output_dir.empty()) {
        if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) output_dir = env;
        else output_dir = "results";
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message(), output_dir);
    nlohmann::json out{{"schema_version", kResultsSchemaVersion},
                       {"profiles", nlohmann::json::array()}};
    for (const auto& c : curves) out["profiles"].push_back(to_json(c));
    const fs::path path = fs::path(output_dir) / "profiles.json";
    cml::detail::write_file_atomic(path, out.dump(2) + "\n");
    std::cout << curves.size() << " profile curve(s) written to " << path.string() << "\n";
    return kExitOk;
}

inline int run_gradcheck(const std::string& config_path, int trials, std::uint64_t seed,
                         double threshold, double inject_error) {
    RunConfig cfg = load_run_config(config_path);
    if (cfg.problems.empty()) throw ContractError("config has no problem");
    BenchProblem bench = build_bench_problem(cfg.problems.front());

    FiniteSumProblem problem = bench.problem;
    if (inject_error != 0.0) {
        // Test hook: perturb one gradient coordinate so the check must fail.
        FiniteSumProblem base = bench.problem;
        problem = FiniteSumProblem(
            base.components(), base.dim(),
            [base](int i, std::span<const double> w) { return base.component_value(i, w); },
            [base, inject_error](int i, std::span<const double> w, std::span<double> out) {
                base.component_gradient(i, w, out);
                if (i == 0) out[0] += inject_error;
            },
            base.name() + "-corrupted");
    }

    const std::vector<double> w0 = bench.initial_point(seed);
    const double err = grad_check(problem, w0, trials, seed);
    std::cout << "max relative gradient error over " << trials << " trials: " << err << "\n";
    if (err > threshold) {
        std::cout << "FAIL (threshold " << threshold << ")\n";
        return kExitNumeric;
    }
    std::cout << "OK (threshold " << threshold << ")\n";
    return kExitOk;
}

} // namespace detail

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name.
inline int run(std::vector<std::string> args) {
    CLI::App app{"Finite-sum training toolkit: watchdog-controlled minibatch descent, "
                 "baselines, and a benchmark harness"};
    app.require_subcommand(1);

    detail::CommonOverrides train_common;
    std::string train_algorithm;
    CLI::App* train = app.add_subcommand("train", "Run one algorithm on one problem, one record per seed");
    train_common.attach(train, true);
    train->add_option("-a,--algorithm", train_algorithm,
                      "Algorithm name (default: first configured)");

    detail::CommonOverrides bench_common;
    std::vector<double> bench_precisions;
    std::string bench_cost;
    CLI::App* bench = app.add_subcommand("bench", "Cross product of problems x algorithms x seeds");
    bench_common.attach(bench, true);
    bench->add_option("--precision", bench_precisions, "Profile precision(s)");
    bench->add_option("--cost", bench_cost, "Profile cost metric: wallclock, epochs, full_evals");

    std::vector<std::string> profile_records;
    std::vector<double> profile_precisions;
    std::string profile_cost = "wallclock";
    std::string profile_output;
    CLI::App* profile = app.add_subcommand("profile", "Performance profiles from record files");
    profile->add_option("-r,--records", profile_records,
                        "Record files or directories containing record_*.json")->required();
    profile->add_option("--precision", profile_precisions,
                        "Precision(s); default 0.1 0.01 0.0001");
    profile->add_option("--cost", profile_cost, "Cost metric: wallclock, epochs, full_evals");
    profile->add_option("-o,--output", profile_output, "Output directory");

    std::string gradcheck_config;
    int gradcheck_trials = 10;
    std::uint64_t gradcheck_seed = 1;
    double gradcheck_threshold = 1e-5;
    double gradcheck_inject = 0.0;
    CLI::App* gradcheck = app.add_subcommand("gradcheck",
                                             "Compare analytic gradients with finite differences");
    gradcheck->add_option("-c,--config", gradcheck_config, "JSON run configuration")->required();
    gradcheck->add_option("--trials", gradcheck_trials, "Sampled (component, coordinate) pairs");
    gradcheck->add_option("--seed", gradcheck_seed, "Seed for sampling and the initial point");
    gradcheck->add_option("--threshold", gradcheck_threshold, "Failure threshold");
    gradcheck->add_option("--inject-gradient-error", gradcheck_inject,
                          "Test hook: corrupt one gradient coordinate by this amount");

    std::vector<const char*> argv;
    argv.push_back("cmalight");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) return detail::run_train(train_common, train_algorithm);
        if (bench->parsed())
            return detail::run_bench_cmd(bench_common, bench_precisions, bench_cost);
        if (profile->parsed())
            return detail::run_profile(profile_records, profile_precisions, profile_cost,
                                       profile_output);
        if (gradcheck->parsed())
            return detail::run_gradcheck(gradcheck_config, gradcheck_trials, gradcheck_seed,
                                         gradcheck_threshold, gradcheck_inject);
    } catch (const ContractError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}

} // namespace cml::cli
