#pragma once

// Online-convex-optimization reference governor for constrained linear
// systems: umbrella header.

#include "ocorg/controller.hpp"
#include "ocorg/cost.hpp"
#include "ocorg/errors.hpp"
#include "ocorg/mas.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"
#include "ocorg/rng.hpp"
#include "ocorg/scenario.hpp"
#include "ocorg/sim.hpp"
#include "ocorg/system.hpp"
