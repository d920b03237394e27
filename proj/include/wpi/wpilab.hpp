#pragma once

// Umbrella header pulling in the whole library.

#include "wpi/common.hpp"
#include "wpi/quadrature.hpp"
#include "wpi/rng.hpp"
#include "wpi/grid.hpp"
#include "wpi/model.hpp"
#include "wpi/action.hpp"
#include "wpi/spin.hpp"
#include "wpi/propagator.hpp"
#include "wpi/oracle.hpp"
#include "wpi/analysis.hpp"
#include "wpi/multiparticle.hpp"
#include "wpi/validate.hpp"
#include "wpi/io.hpp"
#include "wpi/config.hpp"
#include "wpi/scenarios.hpp"
