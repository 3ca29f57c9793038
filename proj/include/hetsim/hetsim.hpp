#pragma once

#include "hetsim/environment.hpp"
#include "hetsim/execmodel.hpp"
#include "hetsim/handoff.hpp"
#include "hetsim/netres.hpp"
#include "hetsim/planner.hpp"
#include "hetsim/report.hpp"
#include "hetsim/scenario.hpp"
#include "hetsim/sim.hpp"
#include "hetsim/topology.hpp"
