#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cmalight/problem.hpp"

namespace cml {

/// Max relative disagreement between analytic component gradients and central
/// finite differences of the component values, over `trials` random
/// (component, coordinate) pairs at the point w. Step h = 1e-6; the error is
/// |analytic - fd| / max(1, |analytic|). Counters are not touched.
inline double grad_check(const FiniteSumProblem& problem, std::span<const double> w, int trials,
                         std::uint64_t seed = 0) {
    if (trials < 1) throw ContractError("grad_check: trials must be >= 1");
    const double h = 1e-6;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_component(0, problem.components() - 1);
    std::uniform_int_distribution<int> pick_coord(0, problem.dim() - 1);

    std::vector<double> point(w.begin(), w.end());
    std::vector<double> grad(point.size());
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int i = pick_component(rng);
        const int j = pick_coord(rng);
        problem.component_gradient(i, point, grad);
        const double saved = point[j];
        point[j] = saved + h;
        const double fp = problem.component_value(i, point);
        point[j] = saved - h;
        const double fm = problem.component_value(i, point);
        point[j] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double err = std::abs(grad[j] - fd) / std::max(1.0, std::abs(grad[j]));
        worst = std::max(worst, err);
    }
    return worst;
}

} // namespace cml
