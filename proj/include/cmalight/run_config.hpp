#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmalight/bench.hpp"
#include "cmalight/csv.hpp"
#include "cmalight/losses.hpp"
#include "cmalight/synthetic.hpp"

namespace cml {

/// Environment variable consulted for the default output directory.
inline constexpr const char* kOutputDirEnvVar = "CMALIGHT_OUT";

/// Network + loss attached to a dataset (or to a synthetic data kind).
struct ModelSpec {
    int hidden_layers = 1;
    int hidden_width = 50;
    std::string loss = "mse"; // mse | cel
    double lambda = 1e-4;
};

struct DatasetSpec {
    std::string path;
    std::string target_column;                // by name (header required), or
    int target_index = -1;                    // by 0-based index
    std::vector<std::string> feature_columns; // empty = all others
    std::vector<int> feature_indices;
    std::string delimiter = ",";
    bool header = true;
    std::string normalize = "minmax"; // minmax | zscore | none
    bool normalize_targets = false;
};

struct ProblemConfig {
    std::string id;            // empty = derived from the spec
    std::string type = "synthetic"; // synthetic | dataset
    SyntheticSpec synthetic{};
    DatasetSpec dataset{};
    std::optional<ModelSpec> model; // train a network instead of the linear model
};

/// Whole-run description: problems x algorithms x seeds under one budget.
struct RunConfig {
    std::vector<ProblemConfig> problems;
    std::vector<AlgorithmSpec> algorithms;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    Budget budget{};                   // max_epochs 100, time limit 300 s
    double grad_tolerance = 0.0;       // diagnostic stop for every algorithm
    std::string ordering = "fixed";    // fixed | reshuffle
    Instrumentation instrumentation{true, false, 1};
    std::vector<double> profile_precisions = {0.1, 0.01, 1e-4};
    std::string profile_cost = "wallclock"; // wallclock | epochs | full_evals
    std::string output_dir;                 // empty = $CMALIGHT_OUT or ./results
    int jobs = 1;
};

inline RunConfig default_run_config() {
    RunConfig cfg;
    cfg.budget.max_epochs = 100;
    cfg.budget.time_limit_s = 300.0;
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization. Emission is canonical (all fields), parsing fills
// missing fields with defaults, so parse(emit(x)) == emit-identical x.
// ---------------------------------------------------------------------------

inline const char* to_string(SyntheticKind k) {
    switch (k) {
        case SyntheticKind::linear_regression: return "linear_regression";
        case SyntheticKind::logistic_separable: return "logistic_separable";
        default: return "quadratic_sum";
    }
}

inline SyntheticKind synthetic_kind_from_string(const std::string& s) {
    if (s == "quadratic_sum") return SyntheticKind::quadratic_sum;
    if (s == "linear_regression") return SyntheticKind::linear_regression;
    if (s == "logistic_separable") return SyntheticKind::logistic_separable;
    throw ContractError("unknown synthetic kind '" + s + "'");
}

inline nlohmann::json to_json(const SyntheticSpec& s) {
    return {{"kind", to_string(s.kind)},      {"components", s.components},
            {"dim", s.dim},                   {"condition", s.condition},
            {"noise", s.noise},               {"lambda", s.lambda},
            {"seed", s.seed}};
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.kind = synthetic_kind_from_string(j.value("kind", std::string("quadratic_sum")));
    s.components = j.value("components", s.components);
    s.dim = j.value("dim", s.dim);
    s.condition = j.value("condition", s.condition);
    s.noise = j.value("noise", s.noise);
    s.lambda = j.value("lambda", s.lambda);
    s.seed = j.value("seed", s.seed);
    return s;
}

inline nlohmann::json to_json(const ModelSpec& m) {
    return {{"hidden_layers", m.hidden_layers},
            {"hidden_width", m.hidden_width},
            {"loss", m.loss},
            {"lambda", m.lambda}};
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
    ModelSpec m;
    m.hidden_layers = j.value("hidden_layers", m.hidden_layers);
    m.hidden_width = j.value("hidden_width", m.hidden_width);
    m.loss = j.value("loss", m.loss);
    m.lambda = j.value("lambda", m.lambda);
    return m;
}

inline nlohmann::json to_json(const DatasetSpec& d) {
    return {{"path", d.path},
            {"target_column", d.target_column},
            {"target_index", d.target_index},
            {"feature_columns", d.feature_columns},
            {"feature_indices", d.feature_indices},
            {"delimiter", d.delimiter},
            {"header", d.header},
            {"normalize", d.normalize},
            {"normalize_targets", d.normalize_targets}};
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
    DatasetSpec d;
    d.path = j.value("path", d.path);
    d.target_column = j.value("target_column", d.target_column);
    d.target_index = j.value("target_index", d.target_index);
    d.feature_columns = j.value("feature_columns", d.feature_columns);
    d.feature_indices = j.value("feature_indices", d.feature_indices);
    d.delimiter = j.value("delimiter", d.delimiter);
    d.header = j.value("header", d.header);
    d.normalize = j.value("normalize", d.normalize);
    d.normalize_targets = j.value("normalize_targets", d.normalize_targets);
    return d;
}

inline nlohmann::json to_json(const ProblemConfig& p) {
    nlohmann::json j{{"id", p.id}, {"type", p.type}};
    if (p.type == "synthetic") j["synthetic"] = to_json(p.synthetic);
    else j["dataset"] = to_json(p.dataset);
    if (p.model) j["model"] = to_json(*p.model);
    return j;
}

inline ProblemConfig problem_config_from_json(const nlohmann::json& j) {
    ProblemConfig p;
    p.id = j.value("id", std::string());
    p.type = j.value("type", std::string("synthetic"));
    if (p.type != "synthetic" && p.type != "dataset")
        throw ContractError("problem.type must be 'synthetic' or 'dataset'");
    if (j.contains("synthetic")) p.synthetic = synthetic_spec_from_json(j.at("synthetic"));
    if (j.contains("dataset")) p.dataset = dataset_spec_from_json(j.at("dataset"));
    if (j.contains("model")) p.model = model_spec_from_json(j.at("model"));
    return p;
}

inline nlohmann::json to_json(const AlgorithmSpec& a) {
    nlohmann::json j{{"name", a.name}};
    if (a.name == "cma_light") {
        j["zeta0"] = a.cma.zeta0;
        j["tau"] = a.cma.tau;
        j["theta"] = a.cma.theta;
        j["gamma"] = a.cma.gamma;
        j["delta"] = a.cma.delta;
        j["extrapolation_ceiling"] = a.cma.extrapolation_ceiling;
    } else if (a.name == "ig") {
        j["zeta0"] = a.ig.zeta0;
        j["epsilon"] = a.ig.epsilon;
    } else if (a.name == "adam") {
        j["step"] = a.adam.step;
        j["beta1"] = a.adam.beta1;
        j["beta2"] = a.adam.beta2;
        j["epsilon"] = a.adam.epsilon;
    } else if (a.name == "adagrad") {
        j["step"] = a.adagrad.step;
        j["epsilon"] = a.adagrad.epsilon;
    } else if (a.name == "adadelta") {
        j["rho"] = a.adadelta.rho;
        j["epsilon"] = a.adadelta.epsilon;
        j["step"] = a.adadelta.step;
    }
    return j;
}

inline AlgorithmSpec algorithm_spec_from_json(const nlohmann::json& j) {
    AlgorithmSpec a;
    a.name = j.value("name", std::string("cma_light"));
    if (a.name == "cma_light") {
        a.cma.zeta0 = j.value("zeta0", a.cma.zeta0);
        a.cma.tau = j.value("tau", a.cma.tau);
        a.cma.theta = j.value("theta", a.cma.theta);
        a.cma.gamma = j.value("gamma", a.cma.gamma);
        a.cma.delta = j.value("delta", a.cma.delta);
        a.cma.extrapolation_ceiling = j.value("extrapolation_ceiling", a.cma.extrapolation_ceiling);
    } else if (a.name == "ig") {
        a.ig.zeta0 = j.value("zeta0", a.ig.zeta0);
        a.ig.epsilon = j.value("epsilon", a.ig.epsilon);
    } else if (a.name == "adam") {
        a.adam.step = j.value("step", a.adam.step);
        a.adam.beta1 = j.value("beta1", a.adam.beta1);
        a.adam.beta2 = j.value("beta2", a.adam.beta2);
        a.adam.epsilon = j.value("epsilon", a.adam.epsilon);
    } else if (a.name == "adagrad") {
        a.adagrad.step = j.value("step", a.adagrad.step);
        a.adagrad.epsilon = j.value("epsilon", a.adagrad.epsilon);
    } else if (a.name == "adadelta") {
        a.adadelta.rho = j.value("rho", a.adadelta.rho);
        a.adadelta.epsilon = j.value("epsilon", a.adadelta.epsilon);
        a.adadelta.step = j.value("step", a.adadelta.step);
    } else {
        throw ContractError("unknown algorithm '" + a.name + "'");
    }
    return a;
}

inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json problems = nlohmann::json::array();
    for (const auto& p : cfg.problems) problems.push_back(to_json(p));
    nlohmann::json algorithms = nlohmann::json::array();
    for (const auto& a : cfg.algorithms) algorithms.push_back(to_json(a));
    return {{"problems", std::move(problems)},
            {"algorithms", std::move(algorithms)},
            {"seeds", cfg.seeds},
            {"budget",
             {{"max_epochs", cfg.budget.max_epochs},
              {"time_limit_s", cfg.budget.time_limit_s},
              {"grad_tolerance", cfg.grad_tolerance}}},
            {"ordering", cfg.ordering},
            {"instrumentation",
             {{"record_f", cfg.instrumentation.record_f},
              {"record_grad_norm", cfg.instrumentation.record_grad_norm},
              {"stride", cfg.instrumentation.stride}}},
            {"profile_precisions", cfg.profile_precisions},
            {"profile_cost", cfg.profile_cost},
            {"output_dir", cfg.output_dir},
            {"jobs", cfg.jobs}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg = default_run_config();
    if (j.contains("problems"))
        for (const auto& jp : j.at("problems")) cfg.problems.push_back(problem_config_from_json(jp));
    if (j.contains("problem")) cfg.problems.push_back(problem_config_from_json(j.at("problem")));
    if (j.contains("algorithms"))
        for (const auto& ja : j.at("algorithms"))
            cfg.algorithms.push_back(algorithm_spec_from_json(ja));
    if (j.contains("algorithm")) cfg.algorithms.push_back(algorithm_spec_from_json(j.at("algorithm")));
    cfg.seeds = j.value("seeds", cfg.seeds);
    if (j.contains("budget")) {
        const auto& jb = j.at("budget");
        cfg.budget.max_epochs = jb.value("max_epochs", cfg.budget.max_epochs);
        cfg.budget.time_limit_s = jb.value("time_limit_s", cfg.budget.time_limit_s);
        cfg.grad_tolerance = jb.value("grad_tolerance", cfg.grad_tolerance);
    }
    cfg.ordering = j.value("ordering", cfg.ordering);
    if (cfg.ordering != "fixed" && cfg.ordering != "reshuffle")
        throw ContractError("ordering must be 'fixed' or 'reshuffle'");
    if (j.contains("instrumentation")) {
        const auto& ji = j.at("instrumentation");
        cfg.instrumentation.record_f = ji.value("record_f", cfg.instrumentation.record_f);
        cfg.instrumentation.record_grad_norm =
            ji.value("record_grad_norm", cfg.instrumentation.record_grad_norm);
        cfg.instrumentation.stride = ji.value("stride", cfg.instrumentation.stride);
    }
    cfg.profile_precisions = j.value("profile_precisions", cfg.profile_precisions);
    cfg.profile_cost = j.value("profile_cost", cfg.profile_cost);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.jobs = j.value("jobs", cfg.jobs);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file", path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("config file " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

/// Output directory resolution: config value, else $CMALIGHT_OUT, else
/// ./results.
inline std::string resolve_output_dir(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) return env;
    return "results";
}

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> uniform_point(int dim, double bound, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<double> w(dim);
    for (auto& x : w) x = u(rng);
    return w;
}

inline std::string derive_problem_id(const ProblemConfig& p) {
    if (!p.id.empty()) return p.id;
    std::string id;
    if (p.type == "synthetic") {
        id = std::string(to_string(p.synthetic.kind)) + "-P" +
             std::to_string(p.synthetic.components) + "-d" + std::to_string(p.synthetic.dim);
    } else {
        id = std::filesystem::path(p.dataset.path).stem().string();
    }
    if (p.model)
        id += "-" + std::to_string(p.model->hidden_layers) + "x" +
              std::to_string(p.model->hidden_width) + "-" + p.model->loss;
    return id;
}

} // namespace detail

/// Materializes a problem description: loads/generates the data, applies
/// normalization, wires the model, and fixes the seeded initial-point law.
inline BenchProblem build_bench_problem(const ProblemConfig& cfg) {
    const std::string id = detail::derive_problem_id(cfg);

    auto dataset_problem = [&](LabeledDataset data,
                               const ModelSpec& model) -> BenchProblem {
        MlpArchitecture arch;
        arch.input_dim = data.feature_dim();
        arch.hidden_layers = model.hidden_layers;
        arch.hidden_width = model.hidden_width;
        const LossKind loss = model.loss == "cel" ? LossKind::cel : LossKind::mse;
        if (model.loss != "mse" && model.loss != "cel")
            throw ContractError("model.loss must be 'mse' or 'cel'");
        FiniteSumProblem problem = build_problem(arch, std::move(data), loss, model.lambda);
        return BenchProblem{
            id, std::move(problem),
            [arch](std::uint64_t seed) {
                MlpParams p = MlpParams::random_init(arch, seed);
                return std::vector<double>(p.flat().begin(), p.flat().end());
            },
            std::nullopt, std::nullopt};
    };

    if (cfg.type == "dataset") {
        if (cfg.dataset.path.empty())
            throw ContractError("problem.dataset.path is required for dataset problems");
        if (!std::filesystem::exists(cfg.dataset.path))
            throw ContractError("problem.dataset.path does not exist: " + cfg.dataset.path);
        CsvSchema schema;
        schema.target_column = cfg.dataset.target_column;
        schema.target_index = cfg.dataset.target_index;
        schema.feature_columns = cfg.dataset.feature_columns;
        schema.feature_indices = cfg.dataset.feature_indices;
        if (cfg.dataset.delimiter.size() != 1)
            throw ContractError("problem.dataset.delimiter must be one character");
        schema.delimiter = cfg.dataset.delimiter[0];
        schema.header = cfg.dataset.header;
        LabeledDataset data = load_csv(cfg.dataset.path, schema);

        const ModelSpec model = cfg.model.value_or(ModelSpec{});
        if (cfg.dataset.normalize == "minmax")
            data = normalize(data, NormalizeMethod::minmax,
                             cfg.dataset.normalize_targets && model.loss != "cel")
                       .data;
        else if (cfg.dataset.normalize == "zscore")
            data = normalize(data, NormalizeMethod::zscore,
                             cfg.dataset.normalize_targets && model.loss != "cel")
                       .data;
        else if (cfg.dataset.normalize != "none")
            throw ContractError("problem.dataset.normalize must be minmax, zscore or none");
        return dataset_problem(std::move(data), model);
    }

    // Synthetic problems.
    if (cfg.model) {
        if (cfg.synthetic.kind == SyntheticKind::quadratic_sum)
            throw ContractError("a model block does not apply to quadratic_sum problems");
        SyntheticProblem base = make_synthetic(cfg.synthetic);
        return dataset_problem(std::move(*base.dataset), *cfg.model);
    }
    SyntheticProblem base = make_synthetic(cfg.synthetic);
    const int dim = base.problem.dim();
    const double bound = cfg.synthetic.kind == SyntheticKind::quadratic_sum
                             ? 1.0
                             : 1.0 / std::sqrt(static_cast<double>(dim));
    return BenchProblem{id, std::move(base.problem),
                        [dim, bound](std::uint64_t seed) {
                            return detail::uniform_point(dim, bound, seed);
                        },
                        std::move(base.minimizer), base.optimal_value};
}

} // namespace cml
