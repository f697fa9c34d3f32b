#include "tclfit/data_io.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/propagate.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace tclfit {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kDatasetFormat = "tclfit-dataset";
constexpr const char* kModelFormat = "tclfit-model";

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  expect_object(j, path);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ParseError(join(path, k), "unknown field");
}

const json& field(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(join(path, key), "missing required field");
  return *it;
}

double number(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_number()) throw ParseError(join(path, key), "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  return j.contains(key) ? number(j, path, key) : fallback;
}

long integer(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_number_integer()) throw ParseError(join(path, key), "expected an integer");
  return v.get<long>();
}

bool boolean(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_boolean()) throw ParseError(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string string(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_string()) throw ParseError(join(path, key), "expected a string");
  return v.get<std::string>();
}

const json& array(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_array()) throw ParseError(join(path, key), "expected an array");
  return v;
}

std::vector<double> number_array(const json& j, const std::string& path, const char* key) {
  const json& a = array(j, path, key);
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw ParseError(index_path(join(path, key), i), "expected a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
}

void check_header(const json& doc, const char* format, int version) {
  expect_object(doc, "");
  if (string(doc, "", "format") != format)
    throw ParseError("format", "expected \"" + std::string(format) + "\", got \"" + doc["format"].get<std::string>() + "\"");
  const long v = integer(doc, "", "version");
  if (v != version) {
    std::ostringstream os;
    os << "document version " << v << " is not supported (this build reads version " << version
       << "); no migration is available";
    throw MigrationError(os.str());
  }
}

json matrix_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix matrix_from(const json& j, const std::string& path, const char* key, int dim) {
  const json& rows = array(j, path, key);
  const std::string p = join(path, key);
  if (static_cast<int>(rows.size()) != dim) throw ParseError(p, "expected " + std::to_string(dim) + " rows");
  RMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ParseError(index_path(p, static_cast<std::size_t>(i)), "expected " + std::to_string(dim) + " entries");
    for (int c = 0; c < dim; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ParseError(index_path(p, static_cast<std::size_t>(i)), "expected numbers");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

json state_json(const DensityMatrix& rho) {
  json j = json::object();
  j["rho_re"] = matrix_json(rho.matrix().real());
  j["rho_im"] = matrix_json(rho.matrix().imag());
  return j;
}

/// A state given either as expectations (qubit) or as rho_re / rho_im.
DensityMatrix state_from(const json& j, const std::string& path, int dim) {
  if (j.contains("expectations")) {
    if (dim != 2) throw ParseError(join(path, "expectations"), "expectations are only defined for qubits");
    const std::vector<double> a = number_array(j, path, "expectations");
    if (a.size() != 3) throw ParseError(join(path, "expectations"), "expected 3 values");
    for (double x : a)
      if (!(x >= -1.0 && x <= 1.0))
        throw ValidationError(join(path, "expectations") + ": value " + std::to_string(x) + " outside [-1, 1]");
    return ingest_state(linear_inversion(Eigen::Vector3d(a[0], a[1], a[2])).matrix());
  }
  const RMatrix re = matrix_from(j, path, "rho_re", dim);
  const RMatrix im = matrix_from(j, path, "rho_im", dim);
  CMatrix m(dim, dim);
  m.real() = re;
  m.imag() = im;
  try {
    return ingest_state(m);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json spec_json(const ModelSpec& s) {
  json j = json::object();
  j["variant"] = to_string(s.variant);
  j["dim"] = s.dim;
  j["basis"] = to_string(s.basis);
  j["mode"] = to_string(s.mode);
  j["state_dependent"] = s.state_dependent;
  j["positive_rates"] = s.positive_rates;
  j["time_scale"] = s.time_scale;
  if (s.variant == ModelVariant::KLExp || s.variant == ModelVariant::KLSqExp) {
    j["kl"] = {{"sigma", s.kl.sigma}, {"kappa", s.kl.kappa}, {"terms", s.kl.terms}};
  }
  if (s.variant == ModelVariant::MLP) {
    j["mlp"] = {{"widths", s.mlp.widths}, {"activation", s.mlp.activation == Activation::Tanh ? "tanh" : "identity"}};
  }
  j["label"] = s.label;
  return j;
}

template <class F>
auto wrap_value_error(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(path, e.what());
  }
}

ModelSpec spec_from(const json& j, const std::string& path) {
  check_keys(j, path,
             {"variant", "dim", "basis", "mode", "state_dependent", "positive_rates", "time_scale", "kl", "mlp", "label"});
  ModelSpec s;
  const std::string variant = string(j, path, "variant");
  s.variant = wrap_value_error(join(path, "variant"), [&] { return parse_model_variant(variant); });
  s.dim = static_cast<int>(integer(j, path, "dim"));
  const std::string basis = string(j, path, "basis");
  s.basis = wrap_value_error(join(path, "basis"), [&] { return parse_basis_kind(basis); });
  const std::string mode = string(j, path, "mode");
  s.mode = wrap_value_error(join(path, "mode"), [&] { return parse_rate_mode(mode); });
  s.state_dependent = boolean(j, path, "state_dependent");
  s.positive_rates = boolean(j, path, "positive_rates");
  s.time_scale = number(j, path, "time_scale");
  if (j.contains("label")) s.label = string(j, path, "label");
  if (s.variant == ModelVariant::KLExp || s.variant == ModelVariant::KLSqExp) {
    const std::string kp = join(path, "kl");
    const json& kl = field(j, path, "kl");
    check_keys(kl, kp, {"sigma", "kappa", "terms"});
    s.kl.kernel = s.variant == ModelVariant::KLExp ? KernelKind::Exponential : KernelKind::SquaredExponential;
    s.kl.sigma = number(kl, kp, "sigma");
    s.kl.kappa = number(kl, kp, "kappa");
    s.kl.terms = static_cast<int>(integer(kl, kp, "terms"));
  }
  if (s.variant == ModelVariant::MLP) {
    const std::string mp = join(path, "mlp");
    const json& mlp = field(j, path, "mlp");
    check_keys(mlp, mp, {"widths", "activation"});
    for (double w : number_array(mlp, mp, "widths")) s.mlp.widths.push_back(static_cast<int>(w));
    const std::string act = string(mlp, mp, "activation");
    if (act == "tanh") s.mlp.activation = Activation::Tanh;
    else if (act == "identity") s.mlp.activation = Activation::Identity;
    else throw ParseError(join(mp, "activation"), "expected tanh or identity");
  }
  wrap_value_error(path, [&] {
    s.validate();
    return 0;
  });
  return s;
}

json model_document(const CoefficientModel& model) {
  json doc = json::object();
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["metadata"] = {{"tool", "tclfit"}};
  doc["model"] = spec_json(model.spec());
  doc["params"] = std::vector<double>(model.params().data(), model.params().data() + model.params().size());
  return doc;
}

CoefficientModel model_from(const json& doc) {
  const ModelSpec spec = spec_from(field(doc, "", "model"), "model");
  const std::vector<double> p = number_array(doc, "", "params");
  const int want = model_dimension(spec);
  if (static_cast<int>(p.size()) != want)
    throw ParseError("params", "expected " + std::to_string(want) + " values, got " + std::to_string(p.size()));
  return CoefficientModel(spec, Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size())));
}

}  // namespace

DensityMatrix linear_inversion(const Eigen::Vector3d& a) {
  if (!a.allFinite()) throw ValidationError("linear_inversion: expectations must be finite");
  return DensityMatrix::unchecked(bloch_matrix(BlochVector{a}));
}

DensityMatrix ingest_state(const CMatrix& raw) {
  if (raw.rows() != raw.cols() || raw.rows() < 2) throw DimensionError("state must be a square matrix of dim >= 2");
  if (!raw.allFinite()) throw ValidationError("state has non-finite entries");
  if (hermiticity_defect(raw) <= kHermitianTol) {
    const CMatrix m = 0.5 * (raw + raw.adjoint());
    if (std::fabs(m.trace().real() - 1.0) <= 1e-12) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() >= -1e-12) return DensityMatrix::unchecked(m);
    }
  }
  return spectral_filter(raw);
}

void SynthProtocol::validate() const {
  if (n_experiments < 1) throw ValidationError("synth: n_experiments must be >= 1");
  if (!(p_max_mhz > 0.0)) throw ValidationError("synth: p_max must be positive");
  if (!(duration_us > 0.0)) throw ValidationError("synth: duration must be positive");
  if (!(dt_us > 0.0) || !(sample_dt_us > 0.0)) throw ValidationError("synth: dt and sample_dt must be positive");
  if (shots < 0) throw ValidationError("synth: shots must be >= 0");
  const double stride = sample_dt_us / dt_us;
  if (std::fabs(stride - std::round(stride)) > 1e-9 * stride || std::round(stride) < 1.0)
    throw ValidationError("synth: sample_dt must be a positive multiple of dt");
  const double samples = duration_us / sample_dt_us;
  if (std::fabs(samples - std::round(samples)) > 1e-9 * std::max(1.0, samples))
    throw ValidationError("synth: duration must be a multiple of sample_dt");
}

double sample_expectation(double exact, int shots, std::mt19937_64& rng) {
  if (shots <= 0) throw ValidationError("sample_expectation: shots must be positive");
  const double p = std::clamp(0.5 * (1.0 + exact), 0.0, 1.0);
  std::binomial_distribution<int> dist(shots, p);
  return 2.0 * static_cast<double>(dist(rng)) / static_cast<double>(shots) - 1.0;
}

Dataset generate_synthetic(const CoefficientSource& truth, const SystemConfig& cfg, const SynthProtocol& protocol) {
  protocol.validate();
  cfg.validate();
  if (protocol.shots > 0 && cfg.dim != 2) throw ValidationError("synth: shot noise is modelled for qubits only");
  const SystemConfig sys = with_basis(cfg, truth.basis_kind());

  Dataset data;
  data.system = cfg;
  data.omega_ghz = angular_to_ghz(cfg.omega);
  const double rot_ghz = protocol.rot_frequency_ghz.value_or(data.omega_ghz);

  std::mt19937_64 rng(protocol.seed);
  std::uniform_real_distribution<double> amp(0.0, protocol.p_max_mhz);
  data.experiments.resize(static_cast<std::size_t>(protocol.n_experiments));
  for (int i = 0; i < protocol.n_experiments; ++i) {
    Experiment& e = data.experiments[static_cast<std::size_t>(i)];
    char id[32];
    std::snprintf(id, sizeof id, "exp-%03d", i);
    e.id = id;
    double p = 0.0;
    while (p <= 0.0) p = amp(rng);
    e.record = PulseRecord{p, 0.0, protocol.duration_us, rot_ghz};
    e.pulse = e.record.to_pulse(false);
    e.shots = protocol.shots;
    e.initial_state = DensityMatrix::basis_state(cfg.dim, 0);
    e.measured.experiment_id = e.id;
  }

  const long stride = std::lround(protocol.sample_dt_us / protocol.dt_us);
  const long steps = std::lround(protocol.duration_us / protocol.dt_us);
  std::vector<std::size_t> items(data.experiments.size());
  std::iota(items.begin(), items.end(), std::size_t{0});
  detail::parallel_for(items, resolve_threads(0), [&](std::size_t, std::size_t i) {
    Experiment& e = data.experiments[i];
    Integrator integ(truth, e.pulse, sys);
    const RealGenerator& gen = integ.generator();
    // Per-experiment stream: results do not depend on the thread layout.
    std::mt19937_64 noise(protocol.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    RVector r = gen.to_real(e.initial_state->matrix());
    integ.run(0.0, protocol.dt_us, steps, r, [&](long step, double, const RVector& y) {
      if (step % stride != 0) return;
      const CMatrix rho = gen.from_real(y);
      e.measured.times.push_back(static_cast<double>(step) * protocol.dt_us);
      if (protocol.shots == 0) {
        e.measured.states.push_back(ingest_state(rho));
        return;
      }
      Eigen::Vector3d a;
      for (int k = 0; k < 3; ++k) a[k] = sample_expectation((rho * pauli(k)).trace().real(), protocol.shots, noise);
      e.measured.states.push_back(ingest_state(linear_inversion(a).matrix()));
    });
  });
  return data;
}

Dataset parse_dataset(const std::string& text) {
  const json doc = parse_document(text);
  check_header(doc, kDatasetFormat, kDatasetVersion);
  check_keys(doc, "", {"format", "version", "metadata", "system", "experiments"});

  Dataset data;
  const json& sys = field(doc, "", "system");
  check_keys(sys, "system", {"dim", "omega_ghz", "t1_us", "t2_us", "drive_units"});
  const int dim = static_cast<int>(integer(sys, "system", "dim"));
  if (dim < 2) throw ParseError("system.dim", "must be >= 2");
  data.system.dim = dim;
  data.system.basis = make_basis(dim, BasisKind::UpperTriangularGellMann);
  data.omega_ghz = number(sys, "system", "omega_ghz");
  data.system.omega = ghz_to_angular(data.omega_ghz);
  data.system.t1 = number(sys, "system", "t1_us");
  data.system.t2 = number(sys, "system", "t2_us");
  if (sys.contains("drive_units")) {
    const std::string u = string(sys, "system", "drive_units");
    if (u == "mhz") data.drive_angular = false;
    else if (u == "rad_per_us") data.drive_angular = true;
    else throw ParseError("system.drive_units", "expected \"mhz\" or \"rad_per_us\"");
  }
  wrap_value_error("system", [&] {
    data.system.validate();
    return 0;
  });

  const json& exps = array(doc, "", "experiments");
  for (std::size_t i = 0; i < exps.size(); ++i) {
    const std::string ep = index_path("experiments", i);
    const json& ej = exps[i];
    check_keys(ej, ep, {"id", "shots", "pulse", "initial_state", "samples"});
    Experiment e;
    e.id = string(ej, ep, "id");
    e.shots = ej.contains("shots") ? static_cast<int>(integer(ej, ep, "shots")) : 0;
    if (e.shots < 0) throw ParseError(join(ep, "shots"), "must be >= 0");

    const std::string pp = join(ep, "pulse");
    const json& pj = field(ej, ep, "pulse");
    check_keys(pj, pp, {"amplitude", "q_amplitude", "duration_us", "rot_frequency_ghz"});
    e.record.amplitude = number(pj, pp, "amplitude");
    e.record.q_amplitude = number_or(pj, pp, "q_amplitude", 0.0);
    e.record.duration_us = number(pj, pp, "duration_us");
    e.record.rot_frequency_ghz = number_or(pj, pp, "rot_frequency_ghz", data.omega_ghz);
    if (!(e.record.duration_us >= 0.0)) throw ParseError(join(pp, "duration_us"), "must be >= 0");
    e.pulse = e.record.to_pulse(data.drive_angular);

    if (ej.contains("initial_state")) {
      const std::string sp = join(ep, "initial_state");
      check_keys(ej["initial_state"], sp, {"expectations", "rho_re", "rho_im"});
      e.initial_state = state_from(ej["initial_state"], sp, dim);
    }
    const json& samples = array(ej, ep, "samples");
    e.measured.experiment_id = e.id;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const std::string sp = index_path(join(ep, "samples"), k);
      check_keys(samples[k], sp, {"t_us", "expectations", "rho_re", "rho_im"});
      const double t = number(samples[k], sp, "t_us");
      if (!e.measured.times.empty() && !(t > e.measured.times.back()))
        throw ValidationError(join(sp, "t_us") + ": sample times must be strictly increasing");
      e.measured.times.push_back(t);
      e.measured.states.push_back(state_from(samples[k], sp, dim));
    }
    data.experiments.push_back(std::move(e));
  }
  data.validate();
  return data;
}

std::string dump_dataset(const Dataset& data) {
  json doc = json::object();
  doc["format"] = kDatasetFormat;
  doc["version"] = kDatasetVersion;
  doc["metadata"] = {{"tool", "tclfit"}};
  doc["system"] = {{"dim", data.system.dim},
                   {"omega_ghz", data.omega_ghz},
                   {"t1_us", data.system.t1},
                   {"t2_us", data.system.t2},
                   {"drive_units", data.drive_angular ? "rad_per_us" : "mhz"}};
  json exps = json::array();
  for (const auto& e : data.experiments) {
    json ej = json::object();
    ej["id"] = e.id;
    ej["shots"] = e.shots;
    ej["pulse"] = {{"amplitude", e.record.amplitude},
                   {"q_amplitude", e.record.q_amplitude},
                   {"duration_us", e.record.duration_us},
                   {"rot_frequency_ghz", e.record.rot_frequency_ghz}};
    if (e.initial_state) ej["initial_state"] = state_json(*e.initial_state);
    json samples = json::array();
    for (std::size_t k = 0; k < e.measured.times.size(); ++k) {
      json s = {{"t_us", e.measured.times[k]}};
      s.update(state_json(e.measured.states[k]));
      samples.push_back(std::move(s));
    }
    ej["samples"] = std::move(samples);
    exps.push_back(std::move(ej));
  }
  doc["experiments"] = std::move(exps);
  return doc.dump() + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

Dataset load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }
void save_dataset(const Dataset& data, const std::string& path) { write_file(path, dump_dataset(data)); }

std::string dump_model(const CoefficientModel& model) { return model_document(model).dump(2) + "\n"; }

CoefficientModel parse_model(const std::string& text) {
  const json doc = parse_document(text);
  check_header(doc, kModelFormat, kModelVersion);
  check_keys(doc, "", {"format", "version", "metadata", "model", "params", "fit"});
  return model_from(doc);
}

std::string dump_result(const FitResult& r) {
  json doc = model_document(r.model);
  const Metrics& m = r.evaluation.metrics;
  json fit = json::object();
  fit["baseline"] = r.baseline;
  fit["t_train"] = r.t_train;
  fit["dt"] = r.dt;
  fit["final_loss"] = r.final_loss;
  fit["stage1_iterations"] = r.stage1_iterations;
  fit["stage2_iterations"] = r.stage2_iterations;
  fit["stop_reason"] = r.stop_reason;
  fit["loss_history"] = r.loss_history;
  fit["metrics"] = {{"interp_mean", m.interp_mean},   {"interp_std", m.interp_std},
                    {"extrap_mean", m.extrap_mean},   {"extrap_std", m.extrap_std},
                    {"interp_count", m.interp_count}, {"extrap_count", m.extrap_count}};
  json series = json::array();
  for (const auto& s : r.evaluation.series) series.push_back({{"id", s.id}, {"times", s.times}, {"distances", s.distances}});
  fit["series"] = std::move(series);
  doc["fit"] = std::move(fit);
  return doc.dump(2) + "\n";
}

FitResult parse_result(const std::string& text) {
  const json doc = parse_document(text);
  check_header(doc, kModelFormat, kModelVersion);
  check_keys(doc, "", {"format", "version", "metadata", "model", "params", "fit"});
  FitResult r(model_from(doc));
  if (!doc.contains("fit")) return r;
  const json& f = doc["fit"];
  check_keys(f, "fit",
             {"baseline", "t_train", "dt", "final_loss", "stage1_iterations", "stage2_iterations", "stop_reason",
              "loss_history", "metrics", "series"});
  r.baseline = boolean(f, "fit", "baseline");
  r.t_train = number(f, "fit", "t_train");
  r.dt = number(f, "fit", "dt");
  r.final_loss = number(f, "fit", "final_loss");
  r.stage1_iterations = static_cast<int>(integer(f, "fit", "stage1_iterations"));
  r.stage2_iterations = static_cast<int>(integer(f, "fit", "stage2_iterations"));
  r.stop_reason = string(f, "fit", "stop_reason");
  r.loss_history = number_array(f, "fit", "loss_history");
  const json& m = field(f, "fit", "metrics");
  check_keys(m, "fit.metrics",
             {"interp_mean", "interp_std", "extrap_mean", "extrap_std", "interp_count", "extrap_count"});
  Metrics& mt = r.evaluation.metrics;
  mt.interp_mean = number(m, "fit.metrics", "interp_mean");
  mt.interp_std = number(m, "fit.metrics", "interp_std");
  mt.extrap_mean = number(m, "fit.metrics", "extrap_mean");
  mt.extrap_std = number(m, "fit.metrics", "extrap_std");
  mt.interp_count = integer(m, "fit.metrics", "interp_count");
  mt.extrap_count = integer(m, "fit.metrics", "extrap_count");
  const json& series = array(f, "fit", "series");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string sp = index_path("fit.series", i);
    check_keys(series[i], sp, {"id", "times", "distances"});
    ExperimentScore s;
    s.id = string(series[i], sp, "id");
    s.times = number_array(series[i], sp, "times");
    s.distances = number_array(series[i], sp, "distances");
    r.evaluation.series.push_back(std::move(s));
  }
  return r;
}

FitResult load_result(const std::string& path) { return parse_result(read_file(path)); }
void save_result(const FitResult& result, const std::string& path) { write_file(path, dump_result(result)); }

}  // namespace tclfit
