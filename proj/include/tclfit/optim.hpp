#pragma once

#include "tclfit/operators.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace tclfit {

/// Returns f(x) and, when `grad` is non-null, fills ∇f(x). A rejected point (e.g. a
/// diverging propagation) returns +∞.
using Objective = std::function<double(const RVector& x, RVector* grad)>;

inline constexpr double kRejected = std::numeric_limits<double>::infinity();

struct AdamConfig {
  int max_iters = 500;
  double step = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct LBFGSConfig {
  int max_iters = 1000;
  int memory = 10;
  double tolerance = 1e-8;       // on ‖∇f‖∞
  double f_tolerance = 1e-13;    // relative decrease below which the run stops
  int max_backtracks = 40;
  double armijo = 1e-4;
};

struct OptimTrace {
  RVector best_x;
  double best_f = kRejected;
  RVector last_x;
  std::vector<double> history;  // accepted f values, one per iteration
  int evaluations = 0;
  int rejected = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Adam from x0. A rejected iterate is reverted and the step halved; throws
/// NumericalError if no iterate (x0 included) is ever accepted.
OptimTrace adam(const Objective& f, const RVector& x0, const AdamConfig& cfg);

/// L-BFGS (two-loop recursion) with Armijo backtracking from x0. Accepted f values
/// are non-increasing. Throws NumericalError if f(x0) is not finite.
OptimTrace lbfgs(const Objective& f, const RVector& x0, const LBFGSConfig& cfg);

}  // namespace tclfit
