#pragma once

#include "tclfit/generator.hpp"
#include "tclfit/kl.hpp"
#include "tclfit/operators.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tclfit {

enum class ModelVariant { Constant, Affine, MLP, KLExp, KLSqExp };

std::string to_string(ModelVariant v);
ModelVariant parse_model_variant(std::string_view name);

enum class Activation { Tanh, Identity };

/// Full layer widths [input, hidden…, output]. Hidden layers use `activation`,
/// the output layer is always linear.
struct MLPConfig {
  std::vector<int> widths;
  Activation activation = Activation::Tanh;
};

/// Everything about a coefficient model except its trainable parameters.
struct ModelSpec {
  ModelVariant variant = ModelVariant::Constant;
  int dim = 2;
  BasisKind basis = BasisKind::UpperTriangularGellMann;
  RateMode mode = RateMode::Diagonal;
  bool state_dependent = false;  // Affine and MLP only
  bool positive_rates = false;   // γᵢ = softplus(gᵢ), Diagonal mode only
  double time_scale = 1.0;       // T_train in µs; models see x = t / time_scale
  KLConfig kl;
  MLPConfig mlp;
  std::string label;  // display name in reports; empty → derived from the variant

  int basis_size() const { return dim * dim - 1; }
  int output_dim() const { return coefficient_count(mode, basis_size()); }
  /// d² state coordinates when state dependent, plus normalized time.
  int input_dim() const { return (state_dependent ? dim * dim : 0) + 1; }

  /// Fills mlp.widths from hidden widths.
  void set_hidden_layers(const std::vector<int>& hidden);
  void validate() const;
};

/// Trainable parameter count. Packing:
///   Constant  θ (rates pre-softplus when positive_rates)
///   Affine    W row-major (output × input), then b
///   MLP       per layer: W row-major, then b
///   KL        per output channel c: [η̄_c, η_c,0 … η_c,M−1]
/// Output channels are always ω-block then γ/Q-block.
int model_dimension(const ModelSpec& spec);

/// Any map (t, ρ) ↦ θ that the propagator can drive.
class CoefficientSource {
 public:
  virtual ~CoefficientSource() = default;
  virtual int dim() const = 0;
  virtual BasisKind basis_kind() const = 0;
  virtual RateMode mode() const = 0;
  virtual bool state_dependent() const = 0;
  virtual bool time_dependent() const = 0;
  int output_dim() const { return coefficient_count(mode(), dim() * dim() - 1); }
  /// `encoding` is the real state encoding; ignored unless state_dependent().
  virtual void evaluate(double t, const RVector* encoding, RVector& theta) const = 0;
};

/// A state-independent source backed by an arbitrary function of time.
class FunctionSource final : public CoefficientSource {
 public:
  using Fn = std::function<RVector(double)>;
  FunctionSource(int dim, BasisKind basis, RateMode mode, Fn fn)
      : dim_(dim), basis_(basis), mode_(mode), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  BasisKind basis_kind() const override { return basis_; }
  RateMode mode() const override { return mode_; }
  bool state_dependent() const override { return false; }
  bool time_dependent() const override { return true; }
  void evaluate(double t, const RVector*, RVector& theta) const override { theta = fn_(t); }

 private:
  int dim_;
  BasisKind basis_;
  RateMode mode_;
  Fn fn_;
};

/// A parameterized coefficient model. Immutable; `with_params` returns a new value.
class CoefficientModel final : public CoefficientSource {
 public:
  CoefficientModel(ModelSpec spec, RVector params);

  static CoefficientModel zeros(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const RVector& params() const { return params_; }
  int num_params() const { return static_cast<int>(params_.size()); }
  CoefficientModel with_params(RVector params) const;
  /// Shared eigenpairs; null for non-KL variants.
  const KLBasis* kl_basis() const { return kl_.get(); }

  int dim() const override { return spec_.dim; }
  BasisKind basis_kind() const override { return spec_.basis; }
  RateMode mode() const override { return spec_.mode; }
  bool state_dependent() const override { return spec_.state_dependent; }
  bool time_dependent() const override { return spec_.variant != ModelVariant::Constant; }

  void evaluate(double t, const RVector* encoding, RVector& theta) const override;
  RVector evaluate(double t, const RVector* encoding = nullptr) const;
  CoefficientVector coefficients(double t, const RVector* encoding = nullptr) const;

  /// θ together with ∂θ/∂ϑ (output × P) and, when `d_state` is non-null and the
  /// model is state dependent, ∂θ/∂encoding (output × d²).
  void jacobian(double t, const RVector* encoding, RVector& theta, RMatrix& d_params,
                RMatrix* d_state = nullptr) const;

 private:
  void raw_forward(double t, const RVector* encoding, RVector& raw) const;
  RVector input_vector(double t, const RVector* encoding) const;

  ModelSpec spec_;
  RVector params_;
  std::shared_ptr<const KLBasis> kl_;
};

/// [Tr ρ, Tr(ρG₁), …, Tr(ρG_K)] with the Hermitian Gell-Mann matrices.
RVector state_encoding(const CMatrix& rho);
RVector state_encoding(const VectorizedState& v);

struct AffineParams {
  RMatrix weight;
  RVector bias;
};
AffineParams unpack_affine(const ModelSpec& spec, const RVector& params);
RVector pack_affine(const ModelSpec& spec, const AffineParams& p);

struct DenseLayer {
  RMatrix weight;
  RVector bias;
};
std::vector<DenseLayer> unpack_mlp(const ModelSpec& spec, const RVector& params);
RVector pack_mlp(const ModelSpec& spec, const std::vector<DenseLayer>& layers);

struct KLParams {
  RVector means;        // one per output channel
  RMatrix coefficients;  // output × M
};
KLParams unpack_kl(const ModelSpec& spec, const RVector& params);
RVector pack_kl(const ModelSpec& spec, const KLParams& p);

/// Variant-checked evaluators. Throw ValidationError on a variant mismatch and
/// DimensionError on a malformed state.
CoefficientVector kl_evaluate(const CoefficientModel& model, double t);
CoefficientVector affine_evaluate(const CoefficientModel& model,
                                  const std::optional<VectorizedState>& state, double t);
CoefficientVector mlp_evaluate(const CoefficientModel& model,
                               const std::optional<VectorizedState>& state, double t);

/// Starting parameters. With `baseline_theta`, constant parts start there (after
/// inverse softplus for positive rates): Constant = θ, Affine b = θ, KL means = θ,
/// MLP output bias = θ. KL fluctuations and affine/output-layer weights start at 0;
/// MLP hidden weights are uniform in ±1/√fan_in drawn from `seed`.
CoefficientModel initialize_model(const ModelSpec& spec, const RVector* baseline_theta,
                                  std::uint64_t seed);

double softplus(double x);
double inverse_softplus(double y);

}  // namespace tclfit
