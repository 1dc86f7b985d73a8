#pragma once

#include "nhrod/core.hpp"
#include "nhrod/diagnostics.hpp"
#include "nhrod/initial.hpp"
#include "nhrod/integrator.hpp"
#include "nhrod/oracle.hpp"
#include "nhrod/sim.hpp"
#include "nhrod/stencils.hpp"
