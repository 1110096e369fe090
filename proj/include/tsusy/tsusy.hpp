#pragma once

// Umbrella header for the whole library.

#include "tsusy/error.hpp"
#include "tsusy/units.hpp"
#include "tsusy/profiles.hpp"
#include "tsusy/banded.hpp"
#include "tsusy/operators.hpp"
#include "tsusy/integrator.hpp"
#include "tsusy/quadrature.hpp"
#include "tsusy/dynamics.hpp"
#include "tsusy/approx.hpp"
#include "tsusy/oscillation.hpp"
#include "tsusy/spatial.hpp"
#include "tsusy/io.hpp"
#include "tsusy/config.hpp"
#include "tsusy/runner.hpp"
