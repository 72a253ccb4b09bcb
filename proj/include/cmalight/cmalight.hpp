#pragma once

// Umbrella header for the whole library.

#include "cmalight/adaptive.hpp"
#include "cmalight/bench.hpp"
#include "cmalight/cma_light.hpp"
#include "cmalight/csv.hpp"
#include "cmalight/dataset.hpp"
#include "cmalight/errors.hpp"
#include "cmalight/gradcheck.hpp"
#include "cmalight/ig.hpp"
#include "cmalight/losses.hpp"
#include "cmalight/metrics.hpp"
#include "cmalight/mlp.hpp"
#include "cmalight/problem.hpp"
#include "cmalight/profiles.hpp"
#include "cmalight/results_io.hpp"
#include "cmalight/run_config.hpp"
#include "cmalight/synthetic.hpp"
#include "cmalight/trial.hpp"
