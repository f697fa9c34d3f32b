#pragma once

#include "tclfit/coeff_models.hpp"
#include "tclfit/generator.hpp"
#include "tclfit/optim.hpp"
#include "tclfit/propagate.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tclfit {

/// Square-pulse parameters in file units: amplitudes in MHz (rad/µs when the dataset's
/// drive units are angular), duration in µs, rotating-frame frequency in GHz.
struct PulseRecord {
  double amplitude = 0.0;
  double q_amplitude = 0.0;
  double duration_us = 0.0;
  double rot_frequency_ghz = 0.0;

  ControlPulse to_pulse(bool angular) const;
};

struct Experiment {
  std::string id;
  PulseRecord record;  // what files store
  ControlPulse pulse;  // record.to_pulse(...), what the integrator uses
  int shots = 0;  // 0 for noiseless data
  std::optional<DensityMatrix> initial_state;  // prepared state; else the first sample
  Trajectory measured;                          // filtered states on increasing times

  const DensityMatrix& start_state() const;
};

struct Dataset {
  SystemConfig system;
  double omega_ghz = 0.0;      // file value behind system.omega
  bool drive_angular = false;  // pulse amplitudes were given in rad/µs instead of MHz
  std::vector<Experiment> experiments;

  /// Nonempty, increasing sample times starting at t >= 0, consistent dimensions.
  void validate() const;
  /// Latest sample time over all experiments.
  double horizon() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

enum class GradientMethod { FiniteDifference, ForwardSensitivity };

std::string to_string(GradientMethod m);
GradientMethod parse_gradient_method(std::string_view name);

struct FitConfig {
  ModelSpec model;
  AdamConfig stage1;
  int batch = 0;  // experiments per stage-1 gradient; 0 = all
  LBFGSConfig stage2;
  GradientMethod gradient = GradientMethod::ForwardSensitivity;
  double l1_weight = 0.0;
  std::uint64_t seed = 0;
  double t_train = 0.0;  // µs; samples with t <= t_train are fitted
  double dt = 0.004;     // integration step, µs
  int threads = 0;       // 0: TCLFIT_THREADS or 1
  std::optional<RVector> initial_params;  // default: initialize_model at the baseline

  void validate() const;
};

struct Metrics {
  double interp_mean = 0.0;
  double interp_std = 0.0;
  double extrap_mean = 0.0;
  double extrap_std = 0.0;
  long interp_count = 0;
  long extrap_count = 0;
};

/// Trace distances between measured and predicted states at each measured sample.
struct ExperimentScore {
  std::string id;
  std::vector<double> times;
  std::vector<double> distances;
};

struct Evaluation {
  Metrics metrics;
  std::vector<ExperimentScore> series;
  std::vector<Trajectory> predicted;  // at the measured sample times
};

struct FitResult {
  explicit FitResult(CoefficientModel m) : model(std::move(m)) {}

  CoefficientModel model;  // carries ϑ*
  bool baseline = false;   // the unfitted device model
  std::vector<double> loss_history;
  int stage1_iterations = 0;
  int stage2_iterations = 0;
  std::string stop_reason;
  double final_loss = 0.0;
  double t_train = 0.0;
  double dt = 0.004;
  Evaluation evaluation;
};

/// Report labels: equation ("Baseline", "Lindblad", "Linear TCL", "Nonlinear TCL") and
/// parameterization ("-", "Affine", "Neural Network", "KL - Sq. Exp.", "KL - Exp.").
std::string equation_label(const FitResult& r);
std::string parameterization_label(const FitResult& r);

/// Per-experiment data prepared once for repeated loss/gradient evaluation.
class LossProblem {
 public:
  LossProblem(const Dataset& data, const ModelSpec& spec, double t_train, double dt, double l1_weight,
              int threads = 0);

  int num_params() const { return n_params_; }
  std::size_t num_experiments() const { return prepared_.size(); }

  /// Total loss; +∞ when any propagation diverges.
  double loss(const RVector& params) const;
  /// Loss restricted to a subset of experiments (same regularizer).
  double loss(const RVector& params, const std::vector<std::size_t>& subset) const;
  /// Loss and gradient. Throws NumericalError (naming the parameter) on non-finite
  /// gradient entries and when the loss itself diverges.
  double gradient(const RVector& params, GradientMethod method, RVector& grad,
                  const std::vector<std::size_t>* subset = nullptr) const;

 private:
  struct Prepared {
    const Experiment* exp = nullptr;
    RVector r0;
    std::vector<long> steps;       // integration steps of the training samples
    std::vector<RVector> targets;  // measured states, real coordinates
    long last_step = 0;
  };

  double data_loss(const CoefficientModel& model, const CoefficientSchedule* sched, std::size_t i) const;
  double data_loss_sensitivity(const CoefficientModel& model, const CoefficientSchedule* sched, std::size_t i,
                               RVector& grad) const;
  std::vector<std::size_t> all() const;

  const Dataset& data_;
  ModelSpec spec_;
  double dt_;
  double l1_;
  int threads_;
  int n_params_;
  long max_step_ = 0;
  std::vector<Prepared> prepared_;
};

double loss(const RVector& params, const Dataset& data, const FitConfig& cfg);
RVector gradient(const RVector& params, const Dataset& data, const FitConfig& cfg);

/// Stage 1 (Adam) then stage 2 (L-BFGS); returns the best parameters seen, evaluated
/// over the full horizon.
FitResult fit(const Dataset& data, const FitConfig& cfg);

/// Propagates every experiment from its initial state over its full horizon and scores
/// the spectrally filtered prediction against each measured sample. t <= t_train is
/// interpolation. Throws ValidationError if a sample lies off the dt grid.
Evaluation evaluate(const CoefficientSource& model, const Dataset& data, double t_train, double dt = 0.004);
Evaluation evaluate(const FitResult& result, const Dataset& data);

/// Constant model whose generator is the two-channel device model (rates 1/T₁ on
/// |0⟩⟨1|, 1/T₂ on |1⟩⟨1|) projected onto the basis dissipators. No fitting.
CoefficientModel baseline_model(const SystemConfig& cfg, RateMode mode = RateMode::Diagonal);
/// θ of baseline_model.
RVector baseline_theta(const SystemConfig& cfg, RateMode mode = RateMode::Diagonal);
/// FitResult wrapper for the baseline, scored on `data`.
FitResult baseline_result(const Dataset& data, double t_train, double dt = 0.004);

/// Qubit only: least-squares (1/T₁, 1/T₂) of θ's dissipator on the device channels.
std::array<double, 2> qubit_decoherence_rates(const RVector& theta, const OperatorBasis& basis, RateMode mode);

/// `sys` with its operator basis replaced by a basis of the given kind.
SystemConfig with_basis(const SystemConfig& sys, BasisKind kind);

/// Mean and population standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& v);

/// Thread count: explicit value if > 0, else TCLFIT_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace tclfit
