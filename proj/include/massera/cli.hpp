#pragma once
/**
 * @file cli.hpp
 * @brief Command-line front end.
 *
 *   massera analyze <ode|map>       classify solutions, JSON report + CSV series
 *   massera fixed-points <ode|map>  fixed points of the period map
 *   massera chain [ode|map]         chain-recurrent sample points
 *   massera bebutov                 compact-open distance of two functions
 *   massera preset list             built-in equations
 *
 * Exit status: 0 for definite results, 3 when some verdict is INCONCLUSIVE,
 * 1 on any error (message on the error stream).
 */

#include <iosfwd>

namespace massera {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace massera
