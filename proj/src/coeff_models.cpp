#include "tclfit/coeff_models.hpp"

#include "tclfit/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace tclfit {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_variant(const CoefficientModel& m, std::initializer_list<ModelVariant> allowed, const char* fn) {
  for (auto v : allowed)
    if (m.spec().variant == v) return;
  throw ValidationError(std::string(fn) + ": model variant " + to_string(m.spec().variant) + " not supported");
}

int layer_param_count(int in, int out) { return in * out + out; }

}  // namespace

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw ValidationError("inverse_softplus: argument must be positive");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::Constant: return "lindblad";
    case ModelVariant::Affine: return "affine";
    case ModelVariant::MLP: return "mlp";
    case ModelVariant::KLExp: return "kl-exp";
    case ModelVariant::KLSqExp: return "kl-sqexp";
  }
  return "unknown";
}

ModelVariant parse_model_variant(std::string_view name) {
  if (name == "lindblad" || name == "constant") return ModelVariant::Constant;
  if (name == "affine") return ModelVariant::Affine;
  if (name == "mlp") return ModelVariant::MLP;
  if (name == "kl-exp") return ModelVariant::KLExp;
  if (name == "kl-sqexp") return ModelVariant::KLSqExp;
  throw ValidationError("unknown model variant '" + std::string(name) +
                        "' (expected lindblad, affine, mlp, kl-exp, kl-sqexp)");
}

void ModelSpec::set_hidden_layers(const std::vector<int>& hidden) {
  mlp.widths.clear();
  mlp.widths.push_back(input_dim());
  mlp.widths.insert(mlp.widths.end(), hidden.begin(), hidden.end());
  mlp.widths.push_back(output_dim());
}

void ModelSpec::validate() const {
  if (dim < 2) throw DimensionError("model: dim must be >= 2");
  if (basis == BasisKind::PauliQubit && dim != 2) throw DimensionError("model: pauli basis requires dim 2");
  if (!(time_scale > 0.0)) throw ValidationError("model: time_scale must be positive");
  if (state_dependent && variant != ModelVariant::Affine && variant != ModelVariant::MLP)
    throw ValidationError("model: only affine and mlp models may be state dependent");
  if (positive_rates && mode != RateMode::Diagonal)
    throw ValidationError("model: positive_rates applies to diagonal mode only");
  if (variant == ModelVariant::KLExp || variant == ModelVariant::KLSqExp) {
    kl.validate();
    const auto want = variant == ModelVariant::KLExp ? KernelKind::Exponential : KernelKind::SquaredExponential;
    if (kl.kernel != want) throw ValidationError("model: KL kernel does not match the variant");
  }
  if (variant == ModelVariant::MLP) {
    const auto& w = mlp.widths;
    if (w.size() < 2) throw ValidationError("model: mlp needs at least input and output widths");
    for (int x : w)
      if (x <= 0) throw ValidationError("model: mlp widths must be positive");
    if (w.front() != input_dim() || w.back() != output_dim()) {
      std::ostringstream os;
      os << "model: mlp widths must start at " << input_dim() << " and end at " << output_dim();
      throw DimensionError(os.str());
    }
  }
}

int model_dimension(const ModelSpec& spec) {
  spec.validate();
  const int out = spec.output_dim();
  switch (spec.variant) {
    case ModelVariant::Constant: return out;
    case ModelVariant::Affine: return layer_param_count(spec.input_dim(), out);
    case ModelVariant::MLP: {
      int n = 0;
      for (std::size_t l = 0; l + 1 < spec.mlp.widths.size(); ++l)
        n += layer_param_count(spec.mlp.widths[l], spec.mlp.widths[l + 1]);
      return n;
    }
    case ModelVariant::KLExp:
    case ModelVariant::KLSqExp: return out * (1 + spec.kl.terms);
  }
  return 0;
}

AffineParams unpack_affine(const ModelSpec& spec, const RVector& params) {
  const int in = spec.input_dim();
  const int out = spec.output_dim();
  if (params.size() != layer_param_count(in, out)) throw DimensionError("unpack_affine: parameter length mismatch");
  AffineParams p;
  p.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(params.data(), out, in);
  p.bias = params.tail(out);
  return p;
}

RVector pack_affine(const ModelSpec& spec, const AffineParams& p) {
  const int in = spec.input_dim();
  const int out = spec.output_dim();
  if (p.weight.rows() != out || p.weight.cols() != in || p.bias.size() != out)
    throw DimensionError("pack_affine: shape mismatch");
  RVector v(layer_param_count(in, out));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), out, in) = p.weight;
  v.tail(out) = p.bias;
  return v;
}

std::vector<DenseLayer> unpack_mlp(const ModelSpec& spec, const RVector& params) {
  if (params.size() != model_dimension(spec)) throw DimensionError("unpack_mlp: parameter length mismatch");
  std::vector<DenseLayer> layers;
  Eigen::Index off = 0;
  const auto& w = spec.mlp.widths;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const int in = w[l];
    const int out = w[l + 1];
    DenseLayer layer;
    layer.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(params.data() + off, out, in);
    off += in * out;
    layer.bias = params.segment(off, out);
    off += out;
    layers.push_back(std::move(layer));
  }
  return layers;
}

RVector pack_mlp(const ModelSpec& spec, const std::vector<DenseLayer>& layers) {
  RVector v(model_dimension(spec));
  const auto& w = spec.mlp.widths;
  if (layers.size() + 1 != w.size()) throw DimensionError("pack_mlp: layer count mismatch");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const int in = w[l];
    const int out = w[l + 1];
    if (layers[l].weight.rows() != out || layers[l].weight.cols() != in || layers[l].bias.size() != out)
      throw DimensionError("pack_mlp: layer shape mismatch");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data() + off, out, in) = layers[l].weight;
    off += in * out;
    v.segment(off, out) = layers[l].bias;
    off += out;
  }
  return v;
}

KLParams unpack_kl(const ModelSpec& spec, const RVector& params) {
  const int out = spec.output_dim();
  const int m = spec.kl.terms;
  if (params.size() != out * (1 + m)) throw DimensionError("unpack_kl: parameter length mismatch");
  KLParams p;
  p.means.resize(out);
  p.coefficients.resize(out, m);
  for (int c = 0; c < out; ++c) {
    p.means[c] = params[c * (1 + m)];
    for (int i = 0; i < m; ++i) p.coefficients(c, i) = params[c * (1 + m) + 1 + i];
  }
  return p;
}

RVector pack_kl(const ModelSpec& spec, const KLParams& p) {
  const int out = spec.output_dim();
  const int m = spec.kl.terms;
  if (p.means.size() != out || p.coefficients.rows() != out || p.coefficients.cols() != m)
    throw DimensionError("pack_kl: shape mismatch");
  RVector v(out * (1 + m));
  for (int c = 0; c < out; ++c) {
    v[c * (1 + m)] = p.means[c];
    for (int i = 0; i < m; ++i) v[c * (1 + m) + 1 + i] = p.coefficients(c, i);
  }
  return v;
}

CoefficientModel::CoefficientModel(ModelSpec spec, RVector params) : spec_(std::move(spec)), params_(std::move(params)) {
  const int n = model_dimension(spec_);
  if (params_.size() != n) {
    std::ostringstream os;
    os << "model " << to_string(spec_.variant) << " expects " << n << " parameters, got " << params_.size();
    throw DimensionError(os.str());
  }
  if (spec_.variant == ModelVariant::KLExp || spec_.variant == ModelVariant::KLSqExp)
    kl_ = std::make_shared<const KLBasis>(spec_.kl);
}

CoefficientModel CoefficientModel::zeros(ModelSpec spec) {
  const int n = model_dimension(spec);
  return CoefficientModel(std::move(spec), RVector::Zero(n));
}

CoefficientModel CoefficientModel::with_params(RVector params) const {
  if (params.size() != params_.size()) throw DimensionError("with_params: parameter length mismatch");
  CoefficientModel m = *this;
  m.params_ = std::move(params);
  return m;
}

RVector CoefficientModel::input_vector(double t, const RVector* encoding) const {
  RVector x(spec_.input_dim());
  if (spec_.state_dependent) {
    if (!encoding || encoding->size() != spec_.dim * spec_.dim)
      throw DimensionError("state-dependent model needs a state encoding of length d^2");
    x.head(encoding->size()) = *encoding;
  }
  x[x.size() - 1] = t / spec_.time_scale;
  return x;
}

void CoefficientModel::raw_forward(double t, const RVector* encoding, RVector& raw) const {
  const int out = spec_.output_dim();
  switch (spec_.variant) {
    case ModelVariant::Constant:
      raw = params_;
      return;
    case ModelVariant::Affine: {
      const RVector x = input_vector(t, encoding);
      const int in = spec_.input_dim();
      raw = params_.tail(out);
      for (int i = 0; i < out; ++i) raw[i] += params_.segment(i * in, in).dot(x);
      return;
    }
    case ModelVariant::MLP: {
      RVector h = input_vector(t, encoding);
      const auto& w = spec_.mlp.widths;
      Eigen::Index off = 0;
      for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        const int in = w[l];
        const int o = w[l + 1];
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> wm(params_.data() + off, o, in);
        off += in * o;
        RVector z = wm * h + params_.segment(off, o);
        off += o;
        const bool hidden = l + 2 < w.size();
        if (hidden && spec_.mlp.activation == Activation::Tanh) z = z.array().tanh();
        h = std::move(z);
      }
      raw = std::move(h);
      return;
    }
    case ModelVariant::KLExp:
    case ModelVariant::KLSqExp: {
      const int m = spec_.kl.terms;
      RVector wts;
      kl_->weighted(t / spec_.time_scale, wts);
      raw.resize(out);
      for (int c = 0; c < out; ++c) {
        double v = params_[c * (1 + m)];
        for (int i = 0; i < m; ++i) v += params_[c * (1 + m) + 1 + i] * wts[i];
        raw[c] = v;
      }
      return;
    }
  }
}

void CoefficientModel::evaluate(double t, const RVector* encoding, RVector& theta) const {
  raw_forward(t, encoding, theta);
  if (spec_.positive_rates) {
    const int k = spec_.basis_size();
    for (int i = 0; i < k; ++i) theta[k + i] = softplus(theta[k + i]);
  }
}

RVector CoefficientModel::evaluate(double t, const RVector* encoding) const {
  RVector theta;
  evaluate(t, encoding, theta);
  return theta;
}

CoefficientVector CoefficientModel::coefficients(double t, const RVector* encoding) const {
  return CoefficientVector::from_flat(evaluate(t, encoding), spec_.mode, spec_.basis_size());
}

void CoefficientModel::jacobian(double t, const RVector* encoding, RVector& theta, RMatrix& d_params,
                                RMatrix* d_state) const {
  const int out = spec_.output_dim();
  const int p = num_params();
  const int ns = spec_.dim * spec_.dim;
  const bool want_state = d_state != nullptr && spec_.state_dependent;
  d_params.setZero(out, p);
  if (want_state) d_state->setZero(out, ns);

  switch (spec_.variant) {
    case ModelVariant::Constant:
      theta = params_;
      d_params.setIdentity();
      break;
    case ModelVariant::Affine: {
      const RVector x = input_vector(t, encoding);
      const int in = spec_.input_dim();
      theta = params_.tail(out);
      for (int i = 0; i < out; ++i) {
        theta[i] += params_.segment(i * in, in).dot(x);
        d_params.block(i, i * in, 1, in) = x.transpose();
        d_params(i, out * in + i) = 1.0;
        if (want_state) d_state->row(i) = params_.segment(i * in, ns).transpose();
      }
      break;
    }
    case ModelVariant::MLP: {
      const auto& w = spec_.mlp.widths;
      const std::size_t nl = w.size() - 1;
      std::vector<RVector> acts{input_vector(t, encoding)};  // layer inputs
      std::vector<RVector> derivs;                            // activation slopes
      std::vector<Eigen::Index> offsets;
      Eigen::Index off = 0;
      for (std::size_t l = 0; l < nl; ++l) {
        const int in = w[l];
        const int o = w[l + 1];
        offsets.push_back(off);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> wm(params_.data() + off, o, in);
        RVector z = wm * acts.back() + params_.segment(off + in * o, o);
        off += in * o + o;
        const bool hidden = l + 1 < nl;
        if (hidden && spec_.mlp.activation == Activation::Tanh) {
          z = z.array().tanh();
          derivs.emplace_back((1.0 - z.array().square()).matrix());
        } else {
          derivs.emplace_back(RVector::Ones(o));
        }
        acts.push_back(std::move(z));
      }
      theta = acts.back();
      // Backpropagate each output row: delta holds ∂θ_row/∂(pre-activation of layer l).
      for (int row = 0; row < out; ++row) {
        RVector delta = RVector::Zero(w[nl]);
        delta[row] = 1.0;
        for (std::size_t l = nl; l-- > 0;) {
          const int in = w[l];
          const int o = w[l + 1];
          delta = delta.cwiseProduct(derivs[l]);
          for (int i = 0; i < o; ++i) {
            if (delta[i] == 0.0) continue;
            for (int j = 0; j < in; ++j) d_params(row, offsets[l] + i * in + j) = delta[i] * acts[l][j];
            d_params(row, offsets[l] + in * o + i) = delta[i];
          }
          Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> wm(params_.data() + offsets[l], o, in);
          delta = wm.transpose() * delta;
        }
        if (want_state) d_state->row(row) = delta.head(ns).transpose();
      }
      break;
    }
    case ModelVariant::KLExp:
    case ModelVariant::KLSqExp: {
      const int m = spec_.kl.terms;
      RVector wts;
      kl_->weighted(t / spec_.time_scale, wts);
      theta.resize(out);
      for (int c = 0; c < out; ++c) {
        double v = params_[c * (1 + m)];
        d_params(c, c * (1 + m)) = 1.0;
        for (int i = 0; i < m; ++i) {
          v += params_[c * (1 + m) + 1 + i] * wts[i];
          d_params(c, c * (1 + m) + 1 + i) = wts[i];
        }
        theta[c] = v;
      }
      break;
    }
  }

  if (spec_.positive_rates) {
    const int k = spec_.basis_size();
    for (int i = k; i < 2 * k; ++i) {
      const double s = sigmoid(theta[i]);
      theta[i] = softplus(theta[i]);
      d_params.row(i) *= s;
      if (want_state) d_state->row(i) *= s;
    }
  }
}

RVector state_encoding(const CMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  if (rho.cols() != d || d < 2) throw DimensionError("state_encoding: square matrix of dim >= 2 required");
  const OperatorBasis gm = make_basis(d, BasisKind::GellMann);
  RVector e(d * d);
  e[0] = rho.trace().real();
  for (int i = 0; i < gm.size(); ++i) e[i + 1] = (rho * gm[i]).trace().real();
  return e;
}

RVector state_encoding(const VectorizedState& v) { return state_encoding(unvectorize(v.data)); }

CoefficientVector kl_evaluate(const CoefficientModel& model, double t) {
  require_variant(model, {ModelVariant::KLExp, ModelVariant::KLSqExp}, "kl_evaluate");
  return model.coefficients(t);
}

namespace {

CoefficientVector state_model_evaluate(const CoefficientModel& model, const std::optional<VectorizedState>& state,
                                       double t) {
  if (!model.state_dependent()) return model.coefficients(t);
  if (!state) throw ValidationError("state-dependent model evaluated without a state");
  const RVector enc = state_encoding(*state);
  if (enc.size() != model.dim() * model.dim()) throw DimensionError("state dimension does not match the model");
  return model.coefficients(t, &enc);
}

}  // namespace

CoefficientVector affine_evaluate(const CoefficientModel& model, const std::optional<VectorizedState>& state,
                                  double t) {
  require_variant(model, {ModelVariant::Affine}, "affine_evaluate");
  return state_model_evaluate(model, state, t);
}

CoefficientVector mlp_evaluate(const CoefficientModel& model, const std::optional<VectorizedState>& state,
                               double t) {
  require_variant(model, {ModelVariant::MLP}, "mlp_evaluate");
  return state_model_evaluate(model, state, t);
}

CoefficientModel initialize_model(const ModelSpec& spec, const RVector* baseline_theta, std::uint64_t seed) {
  const int out = spec.output_dim();
  RVector raw = RVector::Zero(out);
  if (baseline_theta) {
    if (baseline_theta->size() != out) throw DimensionError("initialize_model: baseline length mismatch");
    raw = *baseline_theta;
    if (spec.positive_rates) {
      const int k = spec.basis_size();
      for (int i = k; i < 2 * k; ++i) raw[i] = inverse_softplus(std::max(raw[i], 1e-6));
    }
  }

  CoefficientModel model = CoefficientModel::zeros(spec);
  switch (spec.variant) {
    case ModelVariant::Constant: return model.with_params(raw);
    case ModelVariant::Affine: {
      AffineParams p = unpack_affine(spec, model.params());
      p.bias = raw;
      return model.with_params(pack_affine(spec, p));
    }
    case ModelVariant::KLExp:
    case ModelVariant::KLSqExp: {
      KLParams p = unpack_kl(spec, model.params());
      p.means = raw;
      return model.with_params(pack_kl(spec, p));
    }
    case ModelVariant::MLP: {
      std::vector<DenseLayer> layers = unpack_mlp(spec, model.params());
      std::mt19937_64 rng(seed);
      for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        const double s = 1.0 / std::sqrt(static_cast<double>(layers[l].weight.cols()));
        std::uniform_real_distribution<double> u(-s, s);
        for (Eigen::Index i = 0; i < layers[l].weight.rows(); ++i)
          for (Eigen::Index j = 0; j < layers[l].weight.cols(); ++j) layers[l].weight(i, j) = u(rng);
      }
      layers.back().bias = raw;
      return model.with_params(pack_mlp(spec, layers));
    }
  }
  return model;
}

}  // namespace tclfit
