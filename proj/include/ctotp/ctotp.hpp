#pragma once

#include "ctotp/admittance_sim.hpp"
#include "ctotp/config.hpp"
#include "ctotp/csv.hpp"
#include "ctotp/dp_planner.hpp"
#include "ctotp/joint_trajectory.hpp"
#include "ctotp/limits.hpp"
#include "ctotp/path.hpp"
#include "ctotp/pipeline.hpp"
#include "ctotp/projected_dynamics.hpp"
#include "ctotp/robot_model.hpp"
#include "ctotp/types.hpp"
#include "ctotp/wrench_constraints.hpp"
