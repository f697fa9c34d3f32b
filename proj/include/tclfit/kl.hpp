#pragma once

#include "tclfit/operators.hpp"

#include <string>
#include <vector>

namespace tclfit {

enum class KernelKind { Exponential, SquaredExponential };

/// Karhunen-Loève truncation of a covariance kernel on normalized time x = t / T_train.
///
/// Exponential:        k(x, x') = σ² exp(−|x − x'| / κ) on [0, 1].
/// SquaredExponential: k(x, x') = exp(−(x − x')² / (2κ²)) under the Gaussian weight
///                     N(0, σ²), which is where the closed-form eigenpairs live.
struct KLConfig {
  KernelKind kernel = KernelKind::SquaredExponential;
  double sigma = 1.0;
  double kappa = 1.0;
  int terms = 4;  // M

  void validate() const;
};

struct KLEigenpair {
  int index = 0;
  double lambda = 0.0;
  // ωᵢ, Exponential only. Kept in extended precision: the tan-product form of the
  // characteristic equation amplifies a 1-ulp double error by up to ~κ⁴ω⁴/2.
  long double root = 0.0;
  double norm = 1.0;  // divisor applied to the raw eigenfunction
};

/// (1 − κω tan(ω/2))(κω + tan(ω/2)); zero at every exponential-kernel root.
double exponential_characteristic(long double omega, double kappa);

/// First M roots in ascending order (even index: cosine branch, odd: sine branch),
/// λᵢ = 2κσ²/(1 + κ²ωᵢ²). Throws NumericalError if a branch fails to bracket.
std::vector<KLEigenpair> kl_exponential_eigens(const KLConfig& cfg);

/// a = 1/(4σ²), b = 1/(2κ²), c = √(a² + 2ab), A = a + b + c, B = b/A,
/// λᵢ = √(2a/A)·Bⁱ, φᵢ(x) ∝ exp(−(c − a)x²) Hᵢ(√(2c) x).
std::vector<KLEigenpair> kl_sqexp_eigens(const KLConfig& cfg);

/// Physicists' Hermite polynomial Hₙ(x).
double hermite(int n, double x);

/// Normalized eigenfunctions of a truncated expansion, evaluated together.
class KLBasis {
 public:
  KLBasis() = default;
  explicit KLBasis(const KLConfig& cfg);

  const KLConfig& config() const { return cfg_; }
  const std::vector<KLEigenpair>& eigenpairs() const { return pairs_; }
  int terms() const { return static_cast<int>(pairs_.size()); }

  double eigenfunction(int i, double x) const;
  /// out[i] = √λᵢ φᵢ(x) for i < M.
  void weighted(double x, RVector& out) const;

 private:
  KLConfig cfg_;
  std::vector<KLEigenpair> pairs_;
  double sq_c_ = 0.0;
  double sq_envelope_ = 0.0;
};

std::string to_string(KernelKind kind);

}  // namespace tclfit
