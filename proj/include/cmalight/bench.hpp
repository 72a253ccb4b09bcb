#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cmalight/adaptive.hpp"
#include "cmalight/cma_light.hpp"
#include "cmalight/ig.hpp"
#include "cmalight/problem.hpp"
#include "cmalight/trial.hpp"

namespace cml {

/// A problem instance as the harness sees it: the objective plus a seeded
/// initial-point law shared by all solvers on this problem.
struct BenchProblem {
    std::string id;
    FiniteSumProblem problem;
    std::function<std::vector<double>(std::uint64_t)> initial_point;
    std::optional<std::vector<double>> minimizer;
    std::optional<double> optimal_value;
};

/// Solver selection plus hyperparameters; only the block matching `name` is
/// consulted. Budget fields inside the blocks are overridden per trial.
struct AlgorithmSpec {
    std::string name = "cma_light"; // cma_light | ig | adam | adagrad | adadelta
    CmaLightConfig cma{};
    IgConfig ig{};
    AdamConfig adam{};
    AdagradConfig adagrad{};
    AdadeltaConfig adadelta{};
};

/// One seeded run of one solver on one problem. Deterministic given the seed
/// (wall-clock fields excepted); numeric failures are captured in the record
/// status rather than thrown.
inline TrialRecord run_trial(const BenchProblem& bench, const AlgorithmSpec& algo,
                             std::uint64_t seed, Budget budget, double grad_tolerance = 0.0,
                             OrderingKind ordering = OrderingKind::fixed,
                             Instrumentation instr = {}) {
    if (!bench.initial_point) throw ContractError("run_trial: problem has no initial-point law");
    const std::vector<double> w0 = bench.initial_point(seed);

    TrialRecord rec;
    if (algo.name == "cma_light") {
        CmaLightConfig cfg = algo.cma;
        cfg.max_epochs = budget.max_epochs;
        cfg.time_limit_s = budget.time_limit_s;
        cfg.grad_tolerance = grad_tolerance;
        rec = cma_light_run(bench.problem, w0, cfg, OrderingPolicy{ordering, seed}, instr);
    } else if (algo.name == "ig") {
        IgConfig cfg = algo.ig;
        cfg.max_epochs = budget.max_epochs;
        cfg.time_limit_s = budget.time_limit_s;
        cfg.grad_tolerance = grad_tolerance;
        rec = ig_run(bench.problem, w0, cfg, instr, seed);
    } else if (algo.name == "adam") {
        AdamConfig cfg = algo.adam;
        cfg.max_epochs = budget.max_epochs;
        cfg.time_limit_s = budget.time_limit_s;
        cfg.grad_tolerance = grad_tolerance;
        rec = adam_run(bench.problem, w0, cfg, instr, seed);
    } else if (algo.name == "adagrad") {
        AdagradConfig cfg = algo.adagrad;
        cfg.max_epochs = budget.max_epochs;
        cfg.time_limit_s = budget.time_limit_s;
        cfg.grad_tolerance = grad_tolerance;
        rec = adagrad_run(bench.problem, w0, cfg, instr, seed);
    } else if (algo.name == "adadelta") {
        AdadeltaConfig cfg = algo.adadelta;
        cfg.max_epochs = budget.max_epochs;
        cfg.time_limit_s = budget.time_limit_s;
        cfg.grad_tolerance = grad_tolerance;
        rec = adadelta_run(bench.problem, w0, cfg, instr, seed);
    } else {
        throw ContractError("run_trial: unknown algorithm '" + algo.name + "'");
    }
    rec.problem_id = bench.id;
    rec.seed = seed;
    return rec;
}

/// Cross product problems x algorithms x seeds, optionally on `jobs` worker
/// threads. Record order is the deterministic task order regardless of
/// scheduling.
inline std::vector<TrialRecord> run_bench(const std::vector<BenchProblem>& problems,
                                          const std::vector<AlgorithmSpec>& algorithms,
                                          const std::vector<std::uint64_t>& seeds, Budget budget,
                                          double grad_tolerance = 0.0,
                                          OrderingKind ordering = OrderingKind::fixed,
                                          Instrumentation instr = {}, int jobs = 1) {
    if (problems.empty()) throw ContractError("run_bench: no problems");
    if (algorithms.empty()) throw ContractError("run_bench: no algorithms");
    if (seeds.empty()) throw ContractError("run_bench: no seeds");

    struct Task {
        const BenchProblem* problem;
        const AlgorithmSpec* algo;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& p : problems)
        for (const auto& a : algorithms)
            for (std::uint64_t s : seeds) tasks.push_back({&p, &a, s});

    std::vector<TrialRecord> records(tasks.size());
    if (jobs <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            records[t] = run_trial(*tasks[t].problem, *tasks[t].algo, tasks[t].seed, budget,
                                   grad_tolerance, ordering, instr);
        return records;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size() || failed.load()) return;
            try {
                records[t] = run_trial(*tasks[t].problem, *tasks[t].algo, tasks[t].seed, budget,
                                       grad_tolerance, ordering, instr);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure.empty()) failure = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(jobs, static_cast<int>(tasks.size()));
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw ContractError("run_bench: " + failure);
    return records;
}

} // namespace cml
