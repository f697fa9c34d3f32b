#include "tclfit/cli.hpp"

#include "tclfit/calibrate.hpp"
#include "tclfit/data_io.hpp"
#include "tclfit/errors.hpp"
#include "tclfit/log.hpp"
#include "tclfit/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace tclfit {

namespace {

// Output paths: the parent directory must already exist.
const CLI::Validator kWritable(
    [](std::string& path) -> std::string {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty() && !std::filesystem::is_directory(parent))
        return "directory does not exist: " + parent.string();
      return {};
    },
    "WRITABLE", "");

const std::map<std::string, ModelVariant> kModelNames = {
    {"lindblad", ModelVariant::Constant}, {"affine", ModelVariant::Affine},     {"mlp", ModelVariant::MLP},
    {"kl-exp", ModelVariant::KLExp},      {"kl-sqexp", ModelVariant::KLSqExp},
};

struct SystemFlags {
  int dim = 2;
  double omega_ghz = 3.448;
  double t1 = 214.0;
  double t2 = 32.0;
  std::string basis = "upper-triangular-gell-mann";

  void add(CLI::App* app) {
    app->add_option("--dim", dim, "Hilbert-space dimension")->check(CLI::Range(2, 8))->capture_default_str();
    app->add_option("--omega-ghz", omega_ghz, "transition frequency, GHz")->capture_default_str();
    app->add_option("--t1", t1, "T1, us")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--t2", t2, "T2, us")->check(CLI::PositiveNumber)->capture_default_str();
  }

  SystemConfig build() const {
    SystemConfig cfg;
    cfg.dim = dim;
    cfg.omega = ghz_to_angular(omega_ghz);
    cfg.t1 = t1;
    cfg.t2 = t2;
    cfg.basis = make_basis(dim, parse_basis_kind(basis));
    cfg.validate();
    return cfg;
  }
};

struct SynthFlags {
  std::string out;
  std::string truth;
  SystemFlags system;
  SynthProtocol protocol;
  double rot_ghz = 0.0;
};

struct FitFlags {
  std::string data;
  std::string out;
  std::string model;
  bool nonlinear = false;
  double t_train = 0.0;
  int terms = 4;
  double sigma = 1.0;
  double kappa = 1.0;
  std::vector<int> hidden{16};
  std::string activation = "tanh";
  std::string mode = "diagonal";
  std::string basis = "upper-triangular-gell-mann";
  bool positive_rates = false;
  double l1 = 0.0;
  std::string gradient = "forward-sensitivity";
  int stage1_iters = 500;
  double stage1_step = 1e-2;
  int batch = 0;
  int stage2_iters = 1000;
  int memory = 10;
  double tol = 1e-8;
  int validation = 0;
  std::uint64_t seed = 0;
  double dt = 0.004;
  int threads = 0;
  std::string label;
};

struct SimulateFlags {
  std::string model;
  std::string out;
  SystemFlags system;
  double amplitude = 0.0;
  double q_amplitude = 0.0;
  double duration = 50.0;
  double rot_ghz = 0.0;
  double dt = 0.004;
  double sample_dt = 0.04;
  double t_end = 0.0;
  int initial = 0;
};

struct EvaluateFlags {
  std::string model;
  std::string data;
  std::string out;
  double t_train = -1.0;
  double dt = 0.0;
};

struct ReportFlags {
  std::string data;
  std::vector<std::string> results;
  std::string out;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v + 0.0);
  return buf;
}

int stride_of(double sample_dt, double dt, const char* flag) {
  const double ratio = sample_dt / dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
    throw ValidationError(std::string(flag) + ": must be a positive multiple of --dt");
  return static_cast<int>(n);
}

int run_synth(const SynthFlags& f) {
  const SystemConfig sys = f.system.build();
  SynthProtocol p = f.protocol;
  if (f.rot_ghz != 0.0) p.rot_frequency_ghz = f.rot_ghz;
  p.validate();

  std::optional<CoefficientModel> truth;
  if (!f.truth.empty()) {
    truth = parse_model(read_file(f.truth));
    if (truth->dim() != sys.dim) throw ValidationError("--truth-model: dimension differs from --dim");
  } else {
    truth = baseline_model(sys);
  }
  const SystemConfig cfg = with_basis(sys, truth->basis_kind());
  log().info("synth: {} experiments, {} us, shots {}", p.n_experiments, p.duration_us, p.shots);
  Dataset data = generate_synthetic(*truth, cfg, p);
  data.omega_ghz = f.system.omega_ghz;
  save_dataset(data, f.out);
  log().info("synth: wrote {}", f.out);
  return kExitOk;
}

ModelSpec build_spec(const FitFlags& f, int dim) {
  ModelSpec spec;
  spec.variant = kModelNames.at(f.model);
  spec.dim = dim;
  spec.basis = parse_basis_kind(f.basis);
  spec.mode = parse_rate_mode(f.mode);
  spec.positive_rates = f.positive_rates;
  spec.time_scale = f.t_train;
  spec.label = f.label;
  if (f.nonlinear) {
    if (spec.variant != ModelVariant::Affine && spec.variant != ModelVariant::MLP)
      throw ValidationError("--nonlinear: only affine and mlp models take the state as input");
    spec.state_dependent = true;
  }
  spec.kl.terms = f.terms;
  spec.kl.sigma = f.sigma;
  spec.kl.kappa = f.kappa;
  spec.kl.kernel = spec.variant == ModelVariant::KLExp ? KernelKind::Exponential : KernelKind::SquaredExponential;
  if (spec.variant == ModelVariant::MLP) {
    spec.mlp.activation = f.activation == "identity" ? Activation::Identity : Activation::Tanh;
    spec.set_hidden_layers(f.hidden);
  }
  spec.validate();
  return spec;
}

int run_fit(const FitFlags& f) {
  Dataset data = load_dataset(f.data);
  const std::size_t n = data.experiments.size();
  if (f.validation < 0 || static_cast<std::size_t>(f.validation) >= n)
    throw ValidationError("--validation: must leave at least one training experiment (dataset has " +
                          std::to_string(n) + ")");
  if (f.t_train <= 0.0) throw ValidationError("--t-train: must be positive");

  std::vector<std::size_t> train_idx(n - static_cast<std::size_t>(f.validation));
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::vector<std::size_t> held_idx;
  for (std::size_t i = train_idx.size(); i < n; ++i) held_idx.push_back(i);
  const Dataset train = data.subset(train_idx);
  const Dataset& scored = held_idx.empty() ? data : data.subset(held_idx);

  if (f.model == "baseline") {
    FitResult r = baseline_result(scored, f.t_train, f.dt);
    save_result(r, f.out);
    log().info("fit: baseline interp {:.4g} extrap {:.4g}", r.evaluation.metrics.interp_mean,
               r.evaluation.metrics.extrap_mean);
    return kExitOk;
  }

  FitConfig cfg;
  cfg.model = build_spec(f, data.system.dim);
  cfg.stage1.max_iters = f.stage1_iters;
  cfg.stage1.step = f.stage1_step;
  cfg.batch = f.batch;
  cfg.stage2.max_iters = f.stage2_iters;
  cfg.stage2.memory = f.memory;
  cfg.stage2.tolerance = f.tol;
  cfg.gradient = parse_gradient_method(f.gradient);
  cfg.l1_weight = f.l1;
  cfg.seed = f.seed;
  cfg.t_train = f.t_train;
  cfg.dt = f.dt;
  cfg.threads = resolve_threads(f.threads);
  cfg.validate();

  log().info("fit: {} on {} experiments ({} held out), {} parameters", to_string(cfg.model.variant),
             train.experiments.size(), held_idx.size(), model_dimension(cfg.model));
  FitResult r = fit(train, cfg);
  if (!held_idx.empty()) r.evaluation = evaluate(r.model, scored, r.t_train, r.dt);
  save_result(r, f.out);
  log().info("fit: loss {:.6g} ({}), interp {:.4g} extrap {:.4g}", r.final_loss, r.stop_reason,
             r.evaluation.metrics.interp_mean, r.evaluation.metrics.extrap_mean);
  return kExitOk;
}

int run_simulate(const SimulateFlags& f) {
  const CoefficientModel model = parse_model(read_file(f.model));
  SystemFlags sf = f.system;
  sf.dim = model.dim();
  const SystemConfig cfg = with_basis(sf.build(), model.basis_kind());
  if (f.initial < 0 || f.initial >= cfg.dim) throw ValidationError("--initial: level out of range");

  PulseRecord rec{f.amplitude, f.q_amplitude, f.duration, f.rot_ghz == 0.0 ? f.system.omega_ghz : f.rot_ghz};
  const ControlPulse pulse = rec.to_pulse(false);
  TimeGrid grid;
  grid.t0 = 0.0;
  grid.t_end = f.t_end > 0.0 ? f.t_end : f.duration;
  grid.dt = f.dt;
  grid.sample_stride = stride_of(f.sample_dt, f.dt, "--sample-dt");
  grid.validate();

  const Trajectory traj = propagate(model, pulse, cfg, DensityMatrix::basis_state(cfg.dim, f.initial), grid);
  std::ostringstream os;
  os << "t_us";
  for (int i = 0; i < cfg.dim; ++i)
    for (int j = 0; j < cfg.dim; ++j) os << ",re_" << i << j << ",im_" << i << j;
  os << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << num(traj.times[k]);
    const CMatrix& m = traj.states[k].matrix();
    for (int i = 0; i < cfg.dim; ++i)
      for (int j = 0; j < cfg.dim; ++j) os << ',' << num(m(i, j).real()) << ',' << num(m(i, j).imag());
    os << '\n';
  }
  write_file(f.out, os.str());
  log().info("simulate: {} samples to {}", traj.times.size(), f.out);
  return kExitOk;
}

int run_evaluate(const EvaluateFlags& f) {
  FitResult r = load_result(f.model);
  const Dataset data = load_dataset(f.data);
  const double t_train = f.t_train >= 0.0 ? f.t_train : r.t_train;
  const double dt = f.dt > 0.0 ? f.dt : r.dt;
  r.t_train = t_train;
  r.dt = dt;
  r.evaluation = evaluate(r.model, data, t_train, dt);
  save_result(r, f.out);
  const Metrics& m = r.evaluation.metrics;
  log().info("evaluate: interp {:.4g} ({:.4g}), extrap {:.4g} ({:.4g})", m.interp_mean, m.interp_std, m.extrap_mean,
             m.extrap_std);
  return kExitOk;
}

int run_report(const ReportFlags& f) {
  const Dataset data = load_dataset(f.data);
  std::vector<FitResult> results;
  for (const auto& p : f.results) results.push_back(load_result(p));
  const ReportBundle b = emit_report(results, data, f.out);
  log().info("report: {} rows to {}", b.table.size(), b.metrics_path);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Fit time-convolutionless master equations to measured density-matrix time series."};
  app.name("tclfit");
  app.set_config("--config", "", "TOML or INI file with flag values; command-line flags override");
  app.require_subcommand(1, 1);
  std::string level;
  app.add_option("--log-level", level, "trace|debug|info|warn|error|off (default: TCLFIT_LOG_LEVEL or warn)");

  SynthFlags sy;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", sy.out, "dataset JSON")->required()->check(kWritable);
  synth->add_option("--truth-model", sy.truth, "model JSON driving the data (default: device baseline)")
      ->check(CLI::ExistingFile);
  synth->add_option("--experiments", sy.protocol.n_experiments)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--p-max", sy.protocol.p_max_mhz, "largest drive amplitude, MHz")->capture_default_str();
  synth->add_option("--duration", sy.protocol.duration_us, "us")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--sample-dt", sy.protocol.sample_dt_us, "us")->capture_default_str();
  synth->add_option("--dt", sy.protocol.dt_us, "integration step, us")->capture_default_str();
  synth->add_option("--shots", sy.protocol.shots, "0 for noiseless")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--seed", sy.protocol.seed)->capture_default_str();
  synth->add_option("--rot-ghz", sy.rot_ghz, "rotating-frame frequency (default: resonant)");
  sy.system.add(synth);

  FitFlags fi;
  auto* fitc = app.add_subcommand("fit", "fit a coefficient model to a dataset");
  fitc->add_option("--data", fi.data)->required()->check(CLI::ExistingFile);
  fitc->add_option("--out", fi.out, "result JSON")->required()->check(kWritable);
  fitc->add_option("--model", fi.model)
      ->required()
      ->check(CLI::IsMember({"baseline", "lindblad", "affine", "mlp", "kl-exp", "kl-sqexp"}));
  fitc->add_flag("--nonlinear", fi.nonlinear, "feed the state into affine/mlp models");
  fitc->add_option("--t-train", fi.t_train, "us; samples up to here are fitted")->required();
  fitc->add_option("--M", fi.terms, "KL terms")->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--sigma", fi.sigma, "KL kernel scale")->capture_default_str();
  fitc->add_option("--kappa", fi.kappa, "KL correlation length (normalized time)")->capture_default_str();
  fitc->add_option("--hidden", fi.hidden, "MLP hidden widths")->delimiter(',')->capture_default_str();
  fitc->add_option("--activation", fi.activation)->check(CLI::IsMember({"tanh", "identity"}))->capture_default_str();
  fitc->add_option("--mode", fi.mode)->check(CLI::IsMember({"diagonal", "general-gamma", "general"}))->capture_default_str();
  fitc->add_option("--basis", fi.basis)
      ->check(CLI::IsMember({"gell-mann", "upper-triangular-gell-mann", "pauli"}))
      ->capture_default_str();
  fitc->add_flag("--positive-rates", fi.positive_rates, "softplus on decay rates");
  fitc->add_option("--l1", fi.l1, "L1 weight on parameters")->check(CLI::NonNegativeNumber)->capture_default_str();
  fitc->add_option("--gradient", fi.gradient)
      ->check(CLI::IsMember({"forward-sensitivity", "sensitivity", "finite-difference", "fd"}))
      ->capture_default_str();
  fitc->add_option("--stage1-iters", fi.stage1_iters)->check(CLI::NonNegativeNumber)->capture_default_str();
  fitc->add_option("--stage1-step", fi.stage1_step)->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--batch", fi.batch, "experiments per Adam step, 0 = all")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fitc->add_option("--stage2-iters", fi.stage2_iters)->check(CLI::NonNegativeNumber)->capture_default_str();
  fitc->add_option("--memory", fi.memory, "L-BFGS history")->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--tol", fi.tol, "gradient tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--validation", fi.validation, "hold out the last K experiments for scoring")
      ->check(CLI::NonNegativeNumber);
  fitc->add_option("--seed", fi.seed)->capture_default_str();
  fitc->add_option("--dt", fi.dt, "integration step, us")->check(CLI::PositiveNumber)->capture_default_str();
  fitc->add_option("--threads", fi.threads)->envname("TCLFIT_THREADS")->check(CLI::NonNegativeNumber);
  fitc->add_option("--label", fi.label, "row name in reports");

  SimulateFlags si;
  auto* sim = app.add_subcommand("simulate", "propagate a saved model under a square pulse");
  sim->add_option("--model", si.model)->required()->check(CLI::ExistingFile);
  sim->add_option("--out", si.out, "CSV of density-matrix entries")->required()->check(kWritable);
  sim->add_option("--amplitude", si.amplitude, "p, MHz")->capture_default_str();
  sim->add_option("--q-amplitude", si.q_amplitude, "q, MHz")->capture_default_str();
  sim->add_option("--duration", si.duration, "pulse length, us")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim->add_option("--t-end", si.t_end, "us (default: --duration)");
  sim->add_option("--rot-ghz", si.rot_ghz, "rotating-frame frequency (default: resonant)");
  sim->add_option("--dt", si.dt)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--sample-dt", si.sample_dt)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--initial", si.initial, "initial level |k><k|")->capture_default_str();
  si.system.add(sim);

  EvaluateFlags ev;
  auto* eval = app.add_subcommand("evaluate", "score a saved model against a dataset");
  eval->add_option("--model", ev.model, "model or result JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", ev.data)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", ev.out, "result JSON with metrics")->required()->check(kWritable);
  eval->add_option("--t-train", ev.t_train, "us (default: from the result)");
  eval->add_option("--dt", ev.dt, "us (default: from the result)");

  ReportFlags re;
  auto* rep = app.add_subcommand("report", "metrics table, Bloch traces and histograms");
  rep->add_option("--data", re.data)->required()->check(CLI::ExistingFile);
  rep->add_option("--results", re.results)->required()->check(CLI::ExistingFile);
  rep->add_option("--out", re.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_log_level(level);
    if (synth->parsed()) return run_synth(sy);
    if (fitc->parsed()) return run_fit(fi);
    if (sim->parsed()) return run_simulate(si);
    if (eval->parsed()) return run_evaluate(ev);
    return run_report(re);
  } catch (const NumericalError& e) {
    log().error("{}", e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    log().error("{}", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    log().error("{}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    log().error("internal error: {}", e.what());
    return kExitNumerical;
  }
}

}  // namespace tclfit
