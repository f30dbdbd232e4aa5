#pragma once

#include "twqp/instance.hpp"
#include "twqp/pwq.hpp"

namespace twqp {

inline constexpr int kMaxOracleIndicators = 25;

/// Exhaustive search over indicator patterns. For each pattern the free
/// block solves Q_JJ x_J = −c_J; ties go to the lexicographically smallest z.
Solution brute_force(const Instance& inst, Exec exec = Exec::parallel);

}  // namespace twqp
