#pragma once

// Umbrella header: the whole conformal-selection library.

#include "confsel/baselines.hpp"
#include "confsel/core.hpp"
#include "confsel/csv.hpp"
#include "confsel/experiment.hpp"
#include "confsel/metrics.hpp"
#include "confsel/predictor.hpp"
#include "confsel/pvalue.hpp"
#include "confsel/rng.hpp"
#include "confsel/score.hpp"
#include "confsel/select.hpp"
#include "confsel/simgen.hpp"
