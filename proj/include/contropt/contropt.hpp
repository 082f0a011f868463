#pragma once

// Umbrella header for the contropt library.

#include "contropt/benchmark.hpp"
#include "contropt/contraction.hpp"
#include "contropt/error_estimation.hpp"
#include "contropt/geometry.hpp"
#include "contropt/io.hpp"
#include "contropt/objectives.hpp"
#include "contropt/sampling.hpp"
#include "contropt/surrogate.hpp"
