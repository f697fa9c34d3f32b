#pragma once

#include "tclfit/coeff_models.hpp"
#include "tclfit/generator.hpp"
#include "tclfit/operators.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tclfit {

/// Fixed-step grid. Samples are emitted every `sample_stride` steps, plus the final step.
struct TimeGrid {
  double t0 = 0.0;
  double t_end = 0.0;
  double dt = 0.004;  // µs
  int sample_stride = 1;

  /// Throws ValidationError unless dt > 0, stride >= 1 and (t_end − t0)/dt is an
  /// integer to relative 1e-9.
  void validate() const;
  long steps() const;
  double time_at(long step) const { return t0 + static_cast<double>(step) * dt; }
};

/// Index k with t = t0 + k·dt (to 1e-6·dt). Throws ValidationError for off-grid times.
long grid_index(double t, double t0, double dt);

struct Trajectory {
  std::string experiment_id;
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  double max_trace_drift = 0.0;          // before renormalization
  double max_hermiticity_defect = 0.0;   // before re-Hermitization
  int renormalized_samples = 0;
};

/// θ(t), optionally with ∂θ/∂ϑ, of a state-independent source on the half-step grid
/// t0 + j·dt/2, j = 0 … 2·steps. Shared by every experiment that uses the same model.
/// A time-independent source stores a single entry.
struct CoefficientSchedule {
  double t0 = 0.0;
  double dt = 0.0;
  bool constant = false;
  std::vector<RVector> theta;
  std::vector<RMatrix> jacobian;  // empty when not requested

  static CoefficientSchedule build(const CoefficientSource& source, double t0, double dt, long steps);
  static CoefficientSchedule build_with_jacobian(const CoefficientModel& model, double t0, double dt, long steps);

  long size() const { return static_cast<long>(theta.size()); }
  const RVector& theta_at(long half) const { return theta[constant ? 0 : static_cast<std::size_t>(half)]; }
  const RMatrix& jacobian_at(long half) const { return jacobian[constant ? 0 : static_cast<std::size_t>(half)]; }
};

/// Classic RK4 on the real coordinates of ρ (see RealGenerator).
///
/// Holds references to `source` and `pulse`; both must outlive the integrator.
class Integrator {
 public:
  using Observer = std::function<void(long step, double t, const RVector& r)>;
  using SensitivityObserver = std::function<void(long step, double t, const RVector& r, const RMatrix& s)>;

  Integrator(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg);

  const RealGenerator& generator() const { return gen_; }
  const SystemConfig& config() const { return cfg_; }

  /// θ values come from `schedule` (state-independent sources only) instead of the
  /// source. The schedule must cover every stage of later runs. Pass null to clear.
  void use_schedule(const CoefficientSchedule* schedule);

  /// Full real generator at t: L(θ) plus the control Hamiltonian terms.
  void generator_at(double t, const RVector& theta, RMatrix& out) const;

  /// Advances r by `steps` steps from t0; `observe` runs at step 0 and after every
  /// step. Throws NumericalError naming the step on a non-finite or overflowing state.
  void run(double t0, double dt, long steps, RVector& r, const Observer& observe) const;

  /// Same, also carrying S = ∂r/∂ϑ (initialized to zero) through the discrete RK4 map.
  /// The source must be a CoefficientModel.
  void run_sensitivity(double t0, double dt, long steps, RVector& r, RMatrix& s,
                       const SensitivityObserver& observe) const;

  /// Real matrix of one RK4 step (RK4 applied to the identity). State-independent only.
  RMatrix step_matrix(double t, double dt) const;

 private:
  void theta_at(long half, double t, const RVector& y, RVector& theta) const;
  void theta_jacobian_at(long half, double t, const RVector& y, RVector& theta, RMatrix& jp,
                         RMatrix* jx) const;
  void check_state(const RVector& r, long step, double t) const;
  /// True when the generator is constant over [t, t + dt] (time-independent source,
  /// constant drive); such steps use the cached polynomial map.
  bool frozen_step(double t, double dt) const;
  void frozen_map(double t, double dt, RMatrix& phi, std::vector<RMatrix>* d_phi) const;

  const CoefficientSource& source_;
  const CoefficientModel* model_;
  const ControlPulse& pulse_;
  SystemConfig cfg_;
  RealGenerator gen_;
  double detuning_;
  const CoefficientSchedule* schedule_ = nullptr;
};

/// RK4 trajectory from rho0 over `grid`. Sampled states are re-Hermitized and, when the
/// trace drifts by more than 1e-9, renormalized (logged at warn level).
Trajectory propagate(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg,
                     const DensityMatrix& rho0, const TimeGrid& grid);

/// Column-stacked N²×N² map of one RK4 step from t. Throws ValidationError for
/// state-dependent sources.
CMatrix step_map(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg,
                 double t, double dt);

/// Ordered product of step maps over [t0, t1]; the identity when t1 == t0.
CMatrix evolution_map(const CoefficientSource& source, const ControlPulse& pulse, const SystemConfig& cfg,
                      double t0, double t1, double dt);

}  // namespace tclfit
