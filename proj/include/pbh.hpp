#ifndef PBH_HPP
#define PBH_HPP

#include "pbh/types.hpp"
#include "pbh/objectives.hpp"
#include "pbh/scaling_law.hpp"
#include "pbh/local_solver.hpp"
#include "pbh/barycenter.hpp"
#include "pbh/proximal_basin_hopping.hpp"
#include "pbh/baselines.hpp"
#include "pbh/theory.hpp"
#include "pbh/harness.hpp"

#endif  // PBH_HPP
