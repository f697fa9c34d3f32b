#include "tclfit/propagate.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/log.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tclfit {

namespace {

constexpr double kOverflow = 1e100;
constexpr double kRenormThreshold = 1e-9;

}  // namespace

void TimeGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time grid: dt must be positive");
  if (sample_stride < 1) throw ValidationError("time grid: sample_stride must be >= 1");
  if (!std::isfinite(t0) || !std::isfinite(t_end) || t_end < t0)
    throw ValidationError("time grid: need finite t0 <= t_end");
  const double n = (t_end - t0) / dt;
  if (std::fabs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream os;
    os << "time grid: (t_end - t0)/dt = " << n << " is not an integer";
    throw ValidationError(os.str());
  }
}

long TimeGrid::steps() const { return std::lround((t_end - t0) / dt); }

long grid_index(double t, double t0, double dt) {
  const double x = (t - t0) / dt;
  const long k = std::lround(x);
  if (std::fabs(x - static_cast<double>(k)) > 1e-6 || k < 0) {
    std::ostringstream os;
    os << "time " << t << " is not on the integration grid (t0 = " << t0 << ", dt = " << dt << ")";
    throw ValidationError(os.str());
  }
  return k;
}

CoefficientSchedule CoefficientSchedule::build(const CoefficientSource& source, double t0, double dt, long steps) {
  if (source.state_dependent()) throw ValidationError("coefficient schedule: source is state dependent");
  CoefficientSchedule s;
  s.t0 = t0;
  s.dt = dt;
  s.constant = !source.time_dependent();
  const long n = s.constant ? 1 : 2 * steps + 1;
  s.theta.resize(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) source.evaluate(t0 + 0.5 * dt * static_cast<double>(j), nullptr, s.theta[static_cast<std::size_t>(j)]);
  return s;
}

CoefficientSchedule CoefficientSchedule::build_with_jacobian(const CoefficientModel& model, double t0, double dt,
                                                             long steps) {
  if (model.state_dependent()) throw ValidationError("coefficient schedule: model is state dependent");
  CoefficientSchedule s;
  s.t0 = t0;
  s.dt = dt;
  s.constant = !model.time_dependent();
  const long n = s.constant ? 1 : 2 * steps + 1;
  s.theta.resize(static_cast<std::size_t>(n));
  s.jacobian.resize(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    const auto u = static_cast<std::size_t>(j);
    model.jacobian(t0 + 0.5 * dt * static_cast<double>(j), nullptr, s.theta[u], s.jacobian[u]);
  }
  return s;
}

Integrator::Integrator(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg)
    : source_(source),
      model_(dynamic_cast<const CoefficientModel*>(&source)),
      pulse_(pulse),
      cfg_(cfg),
      gen_(cfg.basis, source.mode()),
      detuning_(cfg.omega - pulse.rot_frequency()) {
  cfg_.validate();
  if (source.dim() != cfg.dim) {
    std::ostringstream os;
    os << "model dimension " << source.dim() << " does not match system dimension " << cfg.dim;
    throw DimensionError(os.str());
  }
  if (source.basis_kind() != cfg.basis.kind())
    throw ValidationError("model basis " + to_string(source.basis_kind()) + " does not match system basis " +
                          to_string(cfg.basis.kind()));
}

void Integrator::use_schedule(const CoefficientSchedule* schedule) {
  if (schedule && source_.state_dependent()) throw ValidationError("schedules apply to state-independent models only");
  schedule_ = schedule;
}

void Integrator::generator_at(double t, const RVector& theta, RMatrix& out) const {
  gen_.assemble(theta, out);
  if (detuning_ != 0.0) out.noalias() += detuning_ * gen_.number_term();
  const double p = pulse_.p(t);
  const double q = pulse_.q(t);
  if (p != 0.0) out.noalias() += p * gen_.p_term();
  if (q != 0.0) out.noalias() += q * gen_.q_term();
}

void Integrator::theta_at(long half, double t, const RVector& y, RVector& theta) const {
  if (schedule_) {
    if (!schedule_->constant && half >= schedule_->size()) throw ValidationError("coefficient schedule too short");
    theta = schedule_->theta_at(half);
    return;
  }
  if (source_.state_dependent()) {
    const RVector enc = gen_.encoding_scale().cwiseProduct(y);
    source_.evaluate(t, &enc, theta);
  } else {
    source_.evaluate(t, nullptr, theta);
  }
}

void Integrator::theta_jacobian_at(long half, double t, const RVector& y, RVector& theta, RMatrix& jp,
                                   RMatrix* jx) const {
  if (schedule_ && !schedule_->jacobian.empty()) {
    if (!schedule_->constant && half >= schedule_->size()) throw ValidationError("coefficient schedule too short");
    theta = schedule_->theta_at(half);
    jp = schedule_->jacobian_at(half);
    return;
  }
  if (model_->state_dependent()) {
    const RVector enc = gen_.encoding_scale().cwiseProduct(y);
    model_->jacobian(t, &enc, theta, jp, jx);
  } else {
    model_->jacobian(t, nullptr, theta, jp);
  }
}

void Integrator::check_state(const RVector& r, long step, double t) const {
  if (!r.allFinite() || r.cwiseAbs().maxCoeff() > kOverflow) {
    std::ostringstream os;
    os << "propagation diverged at step " << step << " (t = " << t << " us)";
    throw NumericalError(os.str());
  }
}

bool Integrator::frozen_step(double t, double dt) const {
  if (source_.time_dependent() || source_.state_dependent()) return false;
  const double p = pulse_.p(t);
  const double q = pulse_.q(t);
  return pulse_.p(t + 0.5 * dt) == p && pulse_.p(t + dt) == p && pulse_.q(t + 0.5 * dt) == q &&
         pulse_.q(t + dt) == q;
}

void Integrator::frozen_map(double t, double dt, RMatrix& phi, std::vector<RMatrix>* d_phi) const {
  // With a constant generator G, one RK4 step is exactly Σ_{k≤4} (hG)^k / k!.
  const int n = gen_.state_dim();
  RVector theta;
  theta_at(0, t, RVector::Zero(n), theta);
  RMatrix g(n, n);
  generator_at(t, theta, g);
  const RMatrix hg = dt * g;
  std::vector<RMatrix> powers{RMatrix::Identity(n, n)};
  phi = powers[0];
  double fact = 1.0;
  for (int k = 1; k <= 4; ++k) {
    powers.push_back(powers.back() * hg);
    fact *= k;
    phi += powers.back() / fact;
  }
  if (!d_phi) return;
  // ∂Φ/∂θ_c with d(H^k) = d(H^{k−1}) H + H^{k−1} E, E = h ∂G/∂θ_c.
  const int nc = gen_.coefficient_count();
  std::vector<RMatrix> dg(static_cast<std::size_t>(nc), RMatrix(n, n));
  RMatrix a;
  for (int j = 0; j < n; ++j) {
    gen_.channel_actions(theta, RVector::Unit(n, j), a);
    for (int c = 0; c < nc; ++c) dg[static_cast<std::size_t>(c)].col(j) = a.col(c);
  }
  d_phi->assign(static_cast<std::size_t>(nc), RMatrix::Zero(n, n));
  for (int c = 0; c < nc; ++c) {
    const RMatrix e = dt * dg[static_cast<std::size_t>(c)];
    RMatrix dp = e;
    RMatrix& out = (*d_phi)[static_cast<std::size_t>(c)];
    out = dp;
    fact = 1.0;
    for (int k = 2; k <= 4; ++k) {
      dp = (dp * hg + powers[static_cast<std::size_t>(k - 1)] * e).eval();
      fact *= k;
      out += dp / fact;
    }
  }
}

void Integrator::run(double t0, double dt, long steps, RVector& r, const Observer& observe) const {
  if (r.size() != gen_.state_dim()) throw DimensionError("run: state dimension mismatch");
  const int n = gen_.state_dim();
  const bool frozen = !source_.state_dependent();
  RMatrix g1(n, n), g2(n, n), g3(n, n), phi;
  RVector theta, k1(n), k2(n), k3(n), k4(n), y(n);
  double phi_p = std::numeric_limits<double>::quiet_NaN(), phi_q = phi_p;
  if (observe) observe(0, t0, r);
  bool have_g1 = false;
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    const double th = t + 0.5 * dt;
    const double te = t0 + static_cast<double>(k + 1) * dt;
    if (frozen_step(t, dt)) {
      if (pulse_.p(t) != phi_p || pulse_.q(t) != phi_q) {
        frozen_map(t, dt, phi, nullptr);
        phi_p = pulse_.p(t);
        phi_q = pulse_.q(t);
      }
      y.noalias() = phi * r;
      r.swap(y);
      have_g1 = false;
    } else {
      if (!have_g1) {
        theta_at(2 * k, t, r, theta);
        generator_at(t, theta, g1);
      }
      k1.noalias() = g1 * r;
      y = r + 0.5 * dt * k1;
      theta_at(2 * k + 1, th, y, theta);
      generator_at(th, theta, g2);
      k2.noalias() = g2 * y;
      y = r + 0.5 * dt * k2;
      if (!frozen) {
        theta_at(2 * k + 1, th, y, theta);
        generator_at(th, theta, g2);
      }
      k3.noalias() = g2 * y;
      y = r + dt * k3;
      theta_at(2 * k + 2, te, y, theta);
      generator_at(te, theta, g3);
      k4.noalias() = g3 * y;
      r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      // The end-of-step generator of a state-independent source is the next start generator.
      if (frozen) {
        g1.swap(g3);
        have_g1 = true;
      }
    }
    check_state(r, k + 1, te);
    if (observe) observe(k + 1, te, r);
  }
}

void Integrator::run_sensitivity(double t0, double dt, long steps, RVector& r, RMatrix& s,
                                 const SensitivityObserver& observe) const {
  if (!model_) throw ValidationError("sensitivity propagation requires a parameterized model");
  const int n = gen_.state_dim();
  const int np = model_->num_params();
  if (r.size() != n) throw DimensionError("run_sensitivity: state dimension mismatch");
  s.setZero(n, np);
  const bool nonlinear = model_->state_dependent();
  const RVector& scale = gen_.encoding_scale();

  RMatrix g(n, n), a, jp, jx, dtheta;
  RVector theta;
  RVector y(n);
  RMatrix ys(n, np);
  RVector kr[4];
  RMatrix ks[4];

  // k = G(θ(y)) y, K = G S + A (Jp + Jx·diag(scale)·S).
  auto stage = [&](long half, double t, const RVector& yy, const RMatrix& ss, RVector& kout, RMatrix& kso) {
    theta_jacobian_at(half, t, yy, theta, jp, nonlinear ? &jx : nullptr);
    generator_at(t, theta, g);
    gen_.channel_actions(theta, yy, a);
    kout.noalias() = g * yy;
    kso.noalias() = g * ss;
    if (nonlinear) {
      dtheta = jp;
      dtheta.noalias() += jx * scale.asDiagonal() * ss;
      kso.noalias() += a * dtheta;
    } else {
      kso.noalias() += a * jp;
    }
  };

  // Frozen steps: r' = Φ r, S' = Φ S + [∂Φ/∂θ_c r]_c Jp.
  RMatrix phi, m(n, gen_.coefficient_count()), jp_frozen;
  std::vector<RMatrix> d_phi;
  double phi_p = std::numeric_limits<double>::quiet_NaN(), phi_q = phi_p;

  if (observe) observe(0, t0, r, s);
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    const double th = t + 0.5 * dt;
    const double te = t0 + static_cast<double>(k + 1) * dt;
    if (frozen_step(t, dt)) {
      if (pulse_.p(t) != phi_p || pulse_.q(t) != phi_q) {
        frozen_map(t, dt, phi, &d_phi);
        theta_jacobian_at(0, t, r, theta, jp_frozen, nullptr);
        phi_p = pulse_.p(t);
        phi_q = pulse_.q(t);
      }
      for (std::size_t c = 0; c < d_phi.size(); ++c) m.col(static_cast<Eigen::Index>(c)).noalias() = d_phi[c] * r;
      ys.noalias() = phi * s;
      ys.noalias() += m * jp_frozen;
      s.swap(ys);
      y.noalias() = phi * r;
      r.swap(y);
    } else {
      stage(2 * k, t, r, s, kr[0], ks[0]);
      y = r + 0.5 * dt * kr[0];
      ys = s + 0.5 * dt * ks[0];
      stage(2 * k + 1, th, y, ys, kr[1], ks[1]);
      y = r + 0.5 * dt * kr[1];
      ys = s + 0.5 * dt * ks[1];
      stage(2 * k + 1, th, y, ys, kr[2], ks[2]);
      y = r + dt * kr[2];
      ys = s + dt * ks[2];
      stage(2 * k + 2, te, y, ys, kr[3], ks[3]);
      r += (dt / 6.0) * (kr[0] + 2.0 * kr[1] + 2.0 * kr[2] + kr[3]);
      s += (dt / 6.0) * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3]);
    }
    check_state(r, k + 1, te);
    if (!s.allFinite()) {
      std::ostringstream os;
      os << "sensitivity diverged at step " << k + 1 << " (t = " << te << " us)";
      throw NumericalError(os.str());
    }
    if (observe) observe(k + 1, te, r, s);
  }
}

RMatrix Integrator::step_matrix(double t, double dt) const {
  if (source_.state_dependent()) throw ValidationError("step_map: state-dependent models have no linear step map");
  const int n = gen_.state_dim();
  RMatrix g1(n, n), g2(n, n), g3(n, n);
  RVector theta;
  // Schedules are indexed from their own t0; step maps evaluate the source directly.
  source_.evaluate(t, nullptr, theta);
  generator_at(t, theta, g1);
  source_.evaluate(t + 0.5 * dt, nullptr, theta);
  generator_at(t + 0.5 * dt, theta, g2);
  source_.evaluate(t + dt, nullptr, theta);
  generator_at(t + dt, theta, g3);
  const RMatrix id = RMatrix::Identity(n, n);
  const RMatrix k1 = g1;
  const RMatrix k2 = g2 * (id + 0.5 * dt * k1);
  const RMatrix k3 = g2 * (id + 0.5 * dt * k2);
  const RMatrix k4 = g3 * (id + dt * k3);
  return id + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory propagate(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg,
                     const DensityMatrix& rho0, const TimeGrid& grid) {
  grid.validate();
  if (rho0.dim() != cfg.dim) throw DimensionError("propagate: initial state dimension does not match the system");
  Integrator integ(source, pulse, cfg);
  const RealGenerator& gen = integ.generator();
  const long steps = grid.steps();
  const double sqrt_n = std::sqrt(static_cast<double>(cfg.dim));

  Trajectory traj;
  RVector r = gen.to_real(rho0.matrix());
  integ.run(grid.t0, grid.dt, steps, r, [&](long step, double t, const RVector& y) {
    if (step % grid.sample_stride != 0 && step != steps) return;
    CMatrix m = gen.from_real(y);
    traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, hermiticity_defect(m));
    m = 0.5 * (m + m.adjoint()).eval();
    const double tr = sqrt_n * y[0];
    const double drift = std::fabs(tr - 1.0);
    traj.max_trace_drift = std::max(traj.max_trace_drift, drift);
    if (drift > kRenormThreshold) {
      m /= tr;
      ++traj.renormalized_samples;
      log().warn("trace drift {:.3e} at t = {} us; sample renormalized", drift, t);
    }
    traj.times.push_back(t);
    traj.states.push_back(DensityMatrix::unchecked(std::move(m)));
  });
  return traj;
}

CMatrix step_map(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg, double t,
                 double dt) {
  if (source.state_dependent()) throw ValidationError("step_map: state-dependent models have no linear step map");
  Integrator integ(source, pulse, cfg);
  return integ.generator().to_complex_superop(integ.step_matrix(t, dt));
}

CMatrix evolution_map(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg,
                      double t0, double t1, double dt) {
  if (source.state_dependent()) throw ValidationError("evolution_map: state-dependent models have no linear map");
  TimeGrid grid{t0, t1, dt, 1};
  grid.validate();
  Integrator integ(source, pulse, cfg);
  const int n = integ.generator().state_dim();
  RMatrix phi = RMatrix::Identity(n, n);
  const long steps = grid.steps();
  for (long k = 0; k < steps; ++k) phi = integ.step_matrix(grid.time_at(k), dt) * phi;
  return integ.generator().to_complex_superop(phi);
}

}  // namespace tclfit
