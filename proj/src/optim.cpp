#include "tclfit/optim.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/log.hpp"

#include <cmath>
#include <deque>

namespace tclfit {

namespace {

bool finite_pair(double fx, const RVector& g) { return std::isfinite(fx) && g.allFinite(); }

}  // namespace

OptimTrace adam(const Objective& f, const RVector& x0, const AdamConfig& cfg) {
  if (cfg.max_iters < 0 || !(cfg.step > 0.0)) throw ValidationError("adam: need max_iters >= 0 and step > 0");
  OptimTrace tr;
  const Eigen::Index n = x0.size();
  RVector x = x0, good = x0, g(n);
  RVector m = RVector::Zero(n), v = RVector::Zero(n);
  double step = cfg.step;
  double b1t = 1.0, b2t = 1.0;
  bool any = false;
  for (int it = 0; it <= cfg.max_iters; ++it) {
    const double fx = f(x, &g);
    ++tr.evaluations;
    if (!finite_pair(fx, g)) {
      ++tr.rejected;
      if (!any) break;  // nothing to fall back to
      x = good;
      step *= 0.5;
      log().debug("adam: rejected iterate {}, step now {:.3e}", it, step);
      // Re-evaluate at the last good point next round with the smaller step.
      continue;
    }
    any = true;
    good = x;
    tr.history.push_back(fx);
    if (fx < tr.best_f) {
      tr.best_f = fx;
      tr.best_x = x;
    }
    if (it == cfg.max_iters) break;
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
    const RVector mhat = m / (1.0 - b1t);
    const RVector vhat = v / (1.0 - b2t);
    x -= step * (mhat.array() / (vhat.array().sqrt() + cfg.epsilon)).matrix();
  }
  if (!any) throw NumericalError("adam: every stage-1 step was rejected (loss not finite at the initial parameters)");
  tr.last_x = good;
  tr.stop_reason = "max_iters";
  return tr;
}

OptimTrace lbfgs(const Objective& f, const RVector& x0, const LBFGSConfig& cfg) {
  if (cfg.max_iters < 0 || cfg.memory < 1 || !(cfg.tolerance > 0.0))
    throw ValidationError("lbfgs: need max_iters >= 0, memory >= 1, tolerance > 0");
  OptimTrace tr;
  const Eigen::Index n = x0.size();
  RVector x = x0, g(n);
  double fx = f(x, &g);
  ++tr.evaluations;
  if (!finite_pair(fx, g)) throw NumericalError("lbfgs: loss or gradient not finite at the starting point");
  tr.history.push_back(fx);
  tr.best_f = fx;
  tr.best_x = x;

  std::deque<RVector> ss, ys;
  std::deque<double> rhos;
  RVector xn(n), gn(n);
  tr.stop_reason = "max_iters";
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (g.cwiseAbs().maxCoeff() <= cfg.tolerance) {
      tr.converged = true;
      tr.stop_reason = "gradient tolerance";
      break;
    }
    // Two-loop recursion for d = −H g.
    RVector d = -g;
    std::vector<double> alpha(ss.size());
    for (std::size_t i = ss.size(); i-- > 0;) {
      alpha[i] = rhos[i] * ss[i].dot(d);
      d -= alpha[i] * ys[i];
    }
    if (!ss.empty()) d *= ss.back().dot(ys.back()) / ys.back().squaredNorm();
    for (std::size_t i = 0; i < ss.size(); ++i) {
      const double beta = rhos[i] * ys[i].dot(d);
      d += (alpha[i] - beta) * ss[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      ss.clear();
      ys.clear();
      rhos.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    // First iteration without curvature information: keep the first trial step modest.
    double step = ss.empty() ? std::min(1.0, 1.0 / std::max(1e-300, g.cwiseAbs().maxCoeff())) : 1.0;
    bool accepted = false;
    double fn = kRejected;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      xn = x + step * d;
      fn = f(xn, nullptr);
      ++tr.evaluations;
      if (std::isfinite(fn) && fn <= fx + cfg.armijo * step * slope) {
        accepted = true;
        break;
      }
      ++tr.rejected;
      step *= 0.5;
    }
    if (accepted) {
      fn = f(xn, &gn);
      ++tr.evaluations;
      accepted = finite_pair(fn, gn);
    }
    if (!accepted) {
      if (!ss.empty()) {
        // Retry from steepest descent with a fresh memory.
        ss.clear();
        ys.clear();
        rhos.clear();
        continue;
      }
      tr.stop_reason = "line search failed";
      break;
    }
    const RVector s = xn - x;
    const RVector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      ss.push_back(s);
      ys.push_back(y);
      rhos.push_back(1.0 / sy);
      if (static_cast<int>(ss.size()) > cfg.memory) {
        ss.pop_front();
        ys.pop_front();
        rhos.pop_front();
      }
    }
    const double decrease = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    tr.history.push_back(fx);
    if (fx < tr.best_f) {
      tr.best_f = fx;
      tr.best_x = x;
    }
    if (decrease <= cfg.f_tolerance * std::fabs(fx)) {
      tr.converged = true;
      tr.stop_reason = "function tolerance";
      break;
    }
  }
  tr.last_x = x;
  return tr;
}

}  // namespace tclfit
