#pragma once

#include "cmdp/agent.hpp"
#include "cmdp/core.hpp"
#include "cmdp/experiment.hpp"
#include "cmdp/harness.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/oracles.hpp"
#include "cmdp/random_instances.hpp"
#include "cmdp/rng.hpp"
#include "cmdp/selfcheck.hpp"
#include "cmdp/solver.hpp"
