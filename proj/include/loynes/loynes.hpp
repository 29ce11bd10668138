#pragma once

// Umbrella header: simulation of Lindley waiting processes, tail-exponent
// estimation from observed increments, the matching closed-form quantities,
// and Monte Carlo experiment harnesses.

#include "loynes/analytic.hpp"
#include "loynes/csv.hpp"
#include "loynes/errors.hpp"
#include "loynes/estimators.hpp"
#include "loynes/experiments.hpp"
#include "loynes/lindley.hpp"
#include "loynes/matrix.hpp"
#include "loynes/processes.hpp"
#include "loynes/rng.hpp"
#include "loynes/trace.hpp"
#include "loynes/version.hpp"
