#pragma once

#include <string>

#include "owcsim/errors.hpp"
#include "owcsim/types.hpp"

namespace owcsim {

/// Writes a trajectory as CSV with header `t,x,y,v,psi,theta,phi`
/// (SI units, radians, 9 significant digits).
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Reads a trajectory CSV. The tick is recovered from the first two rows and
/// checked for uniform spacing; angles are re-canonicalized against the
/// 9-digit rounding of the writer. Needs at least two rows.
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace owcsim
