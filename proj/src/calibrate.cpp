#include "tclfit/calibrate.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/log.hpp"
#include "parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

namespace tclfit {

namespace {

// Cap on cached ∂θ/∂ϑ entries per schedule (doubles); larger models recompute per stage.
constexpr double kJacobianCacheLimit = 2e7;

bool in_training(double t, double t_train) { return t <= t_train + 1e-9 * std::max(1.0, std::fabs(t_train)); }

RVector flatten(const RMatrix& m) { return Eigen::Map<const RVector>(m.data(), m.size()); }

/// Least squares on the columns of `cols`; columns that vanish or repeat an earlier
/// column get coefficient 0 so that equivalent channels are not split.
RVector unique_column_lstsq(const RMatrix& cols, const RVector& target) {
  const Eigen::Index m = cols.cols();
  std::vector<Eigen::Index> keep;
  const double scale = std::max(1e-300, cols.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c < m; ++c) {
    if (cols.col(c).cwiseAbs().maxCoeff() <= 1e-12 * scale) continue;
    bool dup = false;
    for (Eigen::Index k : keep)
      if ((cols.col(c) - cols.col(k)).cwiseAbs().maxCoeff() <= 1e-12 * scale) dup = true;
    if (!dup) keep.push_back(c);
  }
  RMatrix a(cols.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = cols.col(keep[k]);
  const RVector sol = a.completeOrthogonalDecomposition().solve(target);
  RVector out = RVector::Zero(m);
  for (std::size_t k = 0; k < keep.size(); ++k) out[keep[k]] = sol[static_cast<Eigen::Index>(k)];
  return out;
}

/// Upper-triangular Q with QQᵀ = Γ for symmetric PSD Γ (negative eigenvalues clipped).
RMatrix upper_factor(const RMatrix& gamma) {
  const Eigen::Index k = gamma.rows();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (gamma + gamma.transpose()));
  const RMatrix psd = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
  // Cholesky of the index-reversed matrix, skipping zero pivots.
  RMatrix rev(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) rev(i, j) = psd(k - 1 - i, k - 1 - j);
  RMatrix l = RMatrix::Zero(k, k);
  const double tiny = 1e-14 * std::max(1e-300, psd.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < k; ++j) {
    double d = rev(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= tiny) continue;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < k; ++i) l(i, j) = (rev(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
  }
  RMatrix q(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) q(i, j) = l(k - 1 - i, k - 1 - j);
  return q;
}

/// Real superoperators of the device channels D[a] and D[a†a].
std::array<RMatrix, 2> device_channels(const RealGenerator& gen) {
  const CMatrix a = lowering_operator(gen.dim());
  const CMatrix num = a.adjoint() * a;
  return {gen.to_real_superop(dissipator_superop(a, a)), gen.to_real_superop(dissipator_superop(num, num))};
}

}  // namespace

ControlPulse PulseRecord::to_pulse(bool angular) const {
  const double p = angular ? amplitude : mhz_to_angular(amplitude);
  const double q = angular ? q_amplitude : mhz_to_angular(q_amplitude);
  return ControlPulse::square(p, q, duration_us, ghz_to_angular(rot_frequency_ghz));
}

SystemConfig with_basis(const SystemConfig& sys, BasisKind kind) {
  SystemConfig out = sys;
  if (out.basis.kind() != kind || out.basis.dim() != sys.dim) out.basis = make_basis(sys.dim, kind);
  return out;
}

const DensityMatrix& Experiment::start_state() const {
  if (initial_state) return *initial_state;
  if (measured.states.empty()) throw ValidationError("experiment '" + id + "' has no samples");
  return measured.states.front();
}

void Dataset::validate() const {
  system.validate();
  if (experiments.empty()) throw ValidationError("dataset has no experiments");
  for (const auto& e : experiments) {
    const auto& m = e.measured;
    if (m.times.empty()) throw ValidationError("experiment '" + e.id + "': no samples");
    if (m.times.size() != m.states.size()) throw ValidationError("experiment '" + e.id + "': times/states length mismatch");
    if (!(m.times.front() >= 0.0)) throw ValidationError("experiment '" + e.id + "': sample times must be >= 0");
    for (std::size_t k = 1; k < m.times.size(); ++k)
      if (!(m.times[k] > m.times[k - 1]))
        throw ValidationError("experiment '" + e.id + "': sample times must be strictly increasing");
    for (const auto& s : m.states)
      if (s.dim() != system.dim) throw DimensionError("experiment '" + e.id + "': state dimension mismatch");
    if (!e.initial_state && m.times.front() != 0.0)
      throw ValidationError("experiment '" + e.id + "': needs initial_state or a sample at t = 0");
    if (e.initial_state && e.initial_state->dim() != system.dim)
      throw DimensionError("experiment '" + e.id + "': initial_state dimension mismatch");
  }
}

double Dataset::horizon() const {
  double h = 0.0;
  for (const auto& e : experiments)
    if (!e.measured.times.empty()) h = std::max(h, e.measured.times.back());
  return h;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset d;
  d.system = system;
  d.omega_ghz = omega_ghz;
  d.drive_angular = drive_angular;
  for (std::size_t i : indices) d.experiments.push_back(experiments.at(i));
  return d;
}

std::string to_string(GradientMethod m) {
  return m == GradientMethod::FiniteDifference ? "finite-difference" : "forward-sensitivity";
}

GradientMethod parse_gradient_method(std::string_view name) {
  if (name == "finite-difference" || name == "fd") return GradientMethod::FiniteDifference;
  if (name == "forward-sensitivity" || name == "sensitivity") return GradientMethod::ForwardSensitivity;
  throw ValidationError("unknown gradient method '" + std::string(name) +
                        "' (expected finite-difference, forward-sensitivity)");
}

void FitConfig::validate() const {
  model.validate();
  if (stage1.max_iters < 0 || !(stage1.step > 0.0)) throw ValidationError("stage1: need iters >= 0 and step > 0");
  if (batch < 0) throw ValidationError("stage1: batch must be >= 0");
  if (stage2.max_iters < 0 || stage2.memory < 1 || !(stage2.tolerance > 0.0))
    throw ValidationError("stage2: need iters >= 0, memory >= 1, tolerance > 0");
  if (!(l1_weight >= 0.0)) throw ValidationError("l1 weight must be >= 0");
  if (!(t_train > 0.0)) throw ValidationError("t_train must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
}

std::string equation_label(const FitResult& r) {
  if (r.baseline) return "Baseline";
  if (r.model.spec().variant == ModelVariant::Constant) return "Lindblad";
  return r.model.state_dependent() ? "Nonlinear TCL" : "Linear TCL";
}

std::string parameterization_label(const FitResult& r) {
  if (r.baseline) return "-";
  switch (r.model.spec().variant) {
    case ModelVariant::Constant: return "-";
    case ModelVariant::Affine: return "Affine";
    case ModelVariant::MLP: return "Neural Network";
    case ModelVariant::KLSqExp: return "KL - Sq. Exp.";
    case ModelVariant::KLExp: return "KL - Exp.";
  }
  return "-";
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TCLFIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

LossProblem::LossProblem(const Dataset& data, const ModelSpec& spec, double t_train, double dt, double l1_weight,
                         int threads)
    : data_(data), spec_(spec), dt_(dt), l1_(l1_weight), threads_(resolve_threads(threads)) {
  data.validate();
  spec.validate();
  if (spec.dim != data.system.dim) throw DimensionError("model dimension does not match the dataset");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  n_params_ = model_dimension(spec);
  const RealGenerator gen(make_basis(spec.dim, spec.basis), spec.mode);
  for (const auto& e : data.experiments) {
    Prepared p;
    p.exp = &e;
    p.r0 = gen.to_real(e.start_state().matrix());
    for (std::size_t k = 0; k < e.measured.times.size(); ++k) {
      const double t = e.measured.times[k];
      if (!in_training(t, t_train)) break;
      p.steps.push_back(grid_index(t, 0.0, dt));
      p.targets.push_back(gen.to_real(e.measured.states[k].matrix()));
    }
    p.last_step = p.steps.empty() ? 0 : p.steps.back();
    max_step_ = std::max(max_step_, p.last_step);
    prepared_.push_back(std::move(p));
  }
}

std::vector<std::size_t> LossProblem::all() const {
  std::vector<std::size_t> v(prepared_.size());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

double LossProblem::data_loss(const CoefficientModel& model, const CoefficientSchedule* sched, std::size_t i) const {
  const Prepared& p = prepared_[i];
  if (p.steps.empty()) return 0.0;
  const SystemConfig sys = with_basis(data_.system, spec_.basis);
  Integrator integ(model, p.exp->pulse, sys);
  integ.use_schedule(sched);
  RVector r = p.r0;
  std::size_t next = 0;
  double acc = 0.0;
  integ.run(0.0, dt_, p.last_step, r, [&](long step, double, const RVector& y) {
    if (next < p.steps.size() && p.steps[next] == step) {
      acc += (y - p.targets[next]).squaredNorm();
      ++next;
    }
  });
  return acc;
}

double LossProblem::data_loss_sensitivity(const CoefficientModel& model, const CoefficientSchedule* sched,
                                          std::size_t i, RVector& grad) const {
  const Prepared& p = prepared_[i];
  grad.setZero(n_params_);
  if (p.steps.empty()) return 0.0;
  const SystemConfig sys = with_basis(data_.system, spec_.basis);
  Integrator integ(model, p.exp->pulse, sys);
  integ.use_schedule(sched);
  RVector r = p.r0;
  RMatrix s;
  std::size_t next = 0;
  double acc = 0.0;
  integ.run_sensitivity(0.0, dt_, p.last_step, r, s, [&](long step, double, const RVector& y, const RMatrix& sy) {
    if (next < p.steps.size() && p.steps[next] == step) {
      const RVector diff = y - p.targets[next];
      acc += diff.squaredNorm();
      grad.noalias() += 2.0 * sy.transpose() * diff;
      ++next;
    }
  });
  return acc;
}

double LossProblem::loss(const RVector& params) const { return loss(params, all()); }

double LossProblem::loss(const RVector& params, const std::vector<std::size_t>& subset) const {
  const CoefficientModel model(spec_, params);
  std::optional<CoefficientSchedule> sched;
  if (!model.state_dependent()) sched = CoefficientSchedule::build(model, 0.0, dt_, max_step_);
  std::vector<double> parts(subset.size(), 0.0);
  try {
    detail::parallel_for(subset, threads_, [&](std::size_t k, std::size_t i) {
      parts[k] = data_loss(model, sched ? &*sched : nullptr, i);
    });
  } catch (const NumericalError& e) {
    log().debug("loss rejected: {}", e.what());
    return kRejected;
  }
  double total = 0.0;
  for (double x : parts) total += x;
  if (!std::isfinite(total)) return kRejected;
  return total + l1_ * params.lpNorm<1>();
}

double LossProblem::gradient(const RVector& params, GradientMethod method, RVector& grad,
                             const std::vector<std::size_t>* subset) const {
  const std::vector<std::size_t> items = subset ? *subset : all();
  if (params.size() != n_params_) throw DimensionError("gradient: parameter length mismatch");
  grad.setZero(n_params_);
  double f = 0.0;
  if (method == GradientMethod::FiniteDifference) {
    f = loss(params, items);
    if (!std::isfinite(f)) throw NumericalError("gradient: loss is not finite at the given parameters");
    RVector x = params;
    for (int k = 0; k < n_params_; ++k) {
      const double h = std::max(1e-6, 1e-6 * std::fabs(params[k]));
      x[k] = params[k] + h;
      const double fp = loss(x, items);
      x[k] = params[k] - h;
      const double fm = loss(x, items);
      x[k] = params[k];
      grad[k] = (fp - fm) / (2.0 * h);
    }
  } else {
    const CoefficientModel model(spec_, params);
    std::optional<CoefficientSchedule> sched;
    if (!model.state_dependent()) {
      const double entries = static_cast<double>(model.output_dim()) * n_params_ *
                             (model.time_dependent() ? 2.0 * static_cast<double>(max_step_) + 1.0 : 1.0);
      sched = entries <= kJacobianCacheLimit ? CoefficientSchedule::build_with_jacobian(model, 0.0, dt_, max_step_)
                                             : CoefficientSchedule::build(model, 0.0, dt_, max_step_);
    }
    std::vector<double> parts(items.size(), 0.0);
    std::vector<RVector> grads(items.size());
    detail::parallel_for(items, threads_, [&](std::size_t k, std::size_t i) {
      parts[k] = data_loss_sensitivity(model, sched ? &*sched : nullptr, i, grads[k]);
    });
    for (std::size_t k = 0; k < items.size(); ++k) {
      f += parts[k];
      grad += grads[k];
    }
    if (!std::isfinite(f)) throw NumericalError("gradient: loss is not finite at the given parameters");
    f += l1_ * params.lpNorm<1>();
    for (int k = 0; k < n_params_; ++k) grad[k] += l1_ * ((params[k] > 0.0) - (params[k] < 0.0));
  }
  for (int k = 0; k < n_params_; ++k) {
    if (!std::isfinite(grad[k])) {
      std::ostringstream os;
      os << "gradient entry " << k << " is not finite";
      throw NumericalError(os.str());
    }
  }
  return f;
}

double loss(const RVector& params, const Dataset& data, const FitConfig& cfg) {
  cfg.validate();
  return LossProblem(data, cfg.model, cfg.t_train, cfg.dt, cfg.l1_weight, cfg.threads).loss(params);
}

RVector gradient(const RVector& params, const Dataset& data, const FitConfig& cfg) {
  cfg.validate();
  RVector g;
  LossProblem(data, cfg.model, cfg.t_train, cfg.dt, cfg.l1_weight, cfg.threads).gradient(params, cfg.gradient, g);
  return g;
}

FitResult fit(const Dataset& data, const FitConfig& cfg) {
  cfg.validate();
  const LossProblem problem(data, cfg.model, cfg.t_train, cfg.dt, cfg.l1_weight, cfg.threads);
  const SystemConfig sys = with_basis(data.system, cfg.model.basis);

  RVector x0;
  if (cfg.initial_params) {
    x0 = *cfg.initial_params;
    if (x0.size() != problem.num_params()) throw DimensionError("initial parameters have the wrong length");
  } else {
    const RVector base = baseline_theta(sys, cfg.model.mode);
    x0 = initialize_model(cfg.model, &base, cfg.seed).params();
  }
  const double f0 = problem.loss(x0);
  if (!std::isfinite(f0)) throw ValidationError("loss is not finite at the initial parameters");
  log().info("fit {}: {} parameters, initial loss {:.6e}", to_string(cfg.model.variant), problem.num_params(), f0);

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n_exp = problem.num_experiments();
  const bool minibatch = cfg.batch > 0 && static_cast<std::size_t>(cfg.batch) < n_exp;

  const Objective stage1_objective = [&](const RVector& x, RVector* g) -> double {
    try {
      if (!g) return problem.loss(x);
      if (!minibatch) return problem.gradient(x, cfg.gradient, *g);
      std::vector<std::size_t> idx(n_exp);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(cfg.batch));
      std::sort(idx.begin(), idx.end());
      return problem.gradient(x, cfg.gradient, *g, &idx);
    } catch (const NumericalError& e) {
      log().debug("step rejected: {}", e.what());
      return kRejected;
    }
  };
  const Objective stage2_objective = [&](const RVector& x, RVector* g) -> double {
    try {
      return g ? problem.gradient(x, cfg.gradient, *g) : problem.loss(x);
    } catch (const NumericalError& e) {
      log().debug("step rejected: {}", e.what());
      return kRejected;
    }
  };

  FitResult result{CoefficientModel(cfg.model, x0)};
  result.t_train = cfg.t_train;
  result.dt = cfg.dt;

  RVector best = x0;
  double best_f = f0;
  RVector start2 = x0;
  if (cfg.stage1.max_iters > 0) {
    const OptimTrace t1 = adam(stage1_objective, x0, cfg.stage1);
    result.loss_history = t1.history;
    result.stage1_iterations = static_cast<int>(t1.history.size());
    // Mini-batch losses are not comparable with the full loss; rescore the candidate.
    const RVector& cand = minibatch ? t1.last_x : t1.best_x;
    const double fc = problem.loss(cand);
    if (fc < best_f) {
      best = cand;
      best_f = fc;
    }
    start2 = best;
    log().info("stage 1 done: loss {:.6e} ({} rejected)", best_f, t1.rejected);
  }
  result.stop_reason = "stage 1";
  if (cfg.stage2.max_iters > 0) {
    const OptimTrace t2 = lbfgs(stage2_objective, start2, cfg.stage2);
    result.loss_history.insert(result.loss_history.end(), t2.history.begin(), t2.history.end());
    result.stage2_iterations = static_cast<int>(t2.history.size()) - 1;
    result.stop_reason = t2.stop_reason;
    if (t2.best_f <= best_f) {
      best = t2.best_x;
      best_f = t2.best_f;
    }
    log().info("stage 2 done: loss {:.6e} ({})", best_f, t2.stop_reason);
  }
  result.model = CoefficientModel(cfg.model, best);
  result.final_loss = best_f;
  result.evaluation = evaluate(result.model, data, cfg.t_train, cfg.dt);
  return result;
}

Evaluation evaluate(const CoefficientSource& model, const Dataset& data, double t_train, double dt) {
  data.validate();
  if (model.dim() != data.system.dim) throw DimensionError("model dimension does not match the dataset");
  const SystemConfig sys = with_basis(data.system, model.basis_kind());
  Evaluation ev;
  std::vector<double> interp, extrap;
  for (const auto& e : data.experiments) {
    Integrator integ(model, e.pulse, sys);
    const RealGenerator& gen = integ.generator();
    std::vector<long> steps;
    for (double t : e.measured.times) steps.push_back(grid_index(t, 0.0, dt));
    ExperimentScore score;
    score.id = e.id;
    Trajectory pred;
    pred.experiment_id = e.id;
    std::size_t next = 0;
    RVector r = gen.to_real(e.start_state().matrix());
    integ.run(0.0, dt, steps.back(), r, [&](long step, double, const RVector& y) {
      if (next >= steps.size() || steps[next] != step) return;
      const double t = e.measured.times[next];
      const DensityMatrix p = spectral_filter(gen.from_real(y));
      const DensityMatrix m = spectral_filter(e.measured.states[next]);
      const double d = trace_distance(p, m);
      score.times.push_back(t);
      score.distances.push_back(d);
      (in_training(t, t_train) ? interp : extrap).push_back(d);
      pred.times.push_back(t);
      pred.states.push_back(p);
      ++next;
    });
    ev.series.push_back(std::move(score));
    ev.predicted.push_back(std::move(pred));
  }
  std::tie(ev.metrics.interp_mean, ev.metrics.interp_std) = mean_std(interp);
  std::tie(ev.metrics.extrap_mean, ev.metrics.extrap_std) = mean_std(extrap);
  ev.metrics.interp_count = static_cast<long>(interp.size());
  ev.metrics.extrap_count = static_cast<long>(extrap.size());
  return ev;
}

Evaluation evaluate(const FitResult& result, const Dataset& data) {
  return evaluate(result.model, data, result.t_train, result.dt);
}

RVector baseline_theta(const SystemConfig& cfg, RateMode mode) {
  cfg.validate();
  const OperatorBasis& basis = cfg.basis;
  const int k = basis.size();
  const RealGenerator gen(basis, mode);
  const auto channels = device_channels(gen);
  const RVector target = flatten(channels[0] / cfg.t1 + channels[1] / cfg.t2);
  const int n2 = gen.state_dim() * gen.state_dim();

  RVector theta = RVector::Zero(gen.coefficient_count());
  RVector probe = RVector::Zero(gen.coefficient_count());
  RMatrix g;
  if (mode == RateMode::Diagonal) {
    RMatrix cols(n2, k);
    for (int i = 0; i < k; ++i) {
      probe.setZero();
      probe[k + i] = 1.0;
      gen.assemble(probe, g);
      cols.col(i) = flatten(g);
    }
    theta.tail(k) = unique_column_lstsq(cols, target);
    return theta;
  }
  // General mode: least squares for Γ over D_ii and D_ij + D_ji, then Q from Γ.
  const int m = k * (k + 1) / 2;
  RMatrix cols(n2, m);
  std::vector<std::pair<int, int>> idx;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) idx.emplace_back(i, j);
  for (int c = 0; c < m; ++c) {
    const auto [i, j] = idx[static_cast<std::size_t>(c)];
    CMatrix sup = dissipator_superop(basis[i], basis[j]);
    if (i != j) sup += dissipator_superop(basis[j], basis[i]);
    cols.col(c) = flatten(gen.to_real_superop(sup));
  }
  const RVector coef = unique_column_lstsq(cols, target);
  RMatrix gamma = RMatrix::Zero(k, k);
  for (int c = 0; c < m; ++c) {
    const auto [i, j] = idx[static_cast<std::size_t>(c)];
    gamma(i, j) = coef[c];
    gamma(j, i) = coef[c];
  }
  const RMatrix q = upper_factor(gamma);
  Eigen::Index pos = k;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) theta[pos++] = q(i, j);
  return theta;
}

CoefficientModel baseline_model(const SystemConfig& cfg, RateMode mode) {
  ModelSpec spec;
  spec.variant = ModelVariant::Constant;
  spec.dim = cfg.dim;
  spec.basis = cfg.basis.kind();
  spec.mode = mode;
  spec.label = "Baseline";
  return CoefficientModel(spec, baseline_theta(cfg, mode));
}

FitResult baseline_result(const Dataset& data, double t_train, double dt) {
  FitResult r{baseline_model(data.system)};
  r.baseline = true;
  r.t_train = t_train;
  r.dt = dt;
  r.stop_reason = "not fitted";
  r.evaluation = evaluate(r.model, data, t_train, dt);
  return r;
}

std::array<double, 2> qubit_decoherence_rates(const RVector& theta, const OperatorBasis& basis, RateMode mode) {
  if (basis.dim() != 2) throw DimensionError("qubit_decoherence_rates: qubit bases only");
  const RealGenerator gen(basis, mode);
  RVector rates_only = theta;
  rates_only.head(basis.size()).setZero();
  RMatrix g;
  gen.assemble(rates_only, g);
  const auto channels = device_channels(gen);
  RMatrix cols(g.size(), 2);
  cols.col(0) = flatten(channels[0]);
  cols.col(1) = flatten(channels[1]);
  const RVector sol = cols.colPivHouseholderQr().solve(flatten(g));
  return {sol[0], sol[1]};
}

}  // namespace tclfit
