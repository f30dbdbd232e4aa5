#pragma once

#include <iosfwd>

#include "twqp/instance.hpp"

namespace twqp {

/// Writes the big-M reformulation in CPLEX LP format: variables x1..xn (free)
/// and z1..zk (binary, one per indicator variable), rows -U z_i <= x_i <= U z_i.
void export_bigm_lp(std::ostream& out, const Instance& inst, double U);

}  // namespace twqp
