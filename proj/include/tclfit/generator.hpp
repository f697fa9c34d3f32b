#pragma once

#include "tclfit/operators.hpp"

#include <numbers>
#include <vector>

namespace tclfit {

// Internal units: time in µs, rates in 1/µs, frequencies in rad/µs (angular MHz).

inline double mhz_to_angular(double mhz) { return 2.0 * std::numbers::pi * mhz; }
inline double angular_to_mhz(double w) { return w / (2.0 * std::numbers::pi); }
inline double ghz_to_angular(double ghz) { return 2.0 * std::numbers::pi * 1000.0 * ghz; }
inline double angular_to_ghz(double w) { return w / (2.0 * std::numbers::pi * 1000.0); }

enum class RateMode { Diagonal, GeneralGamma };

std::string to_string(RateMode mode);
RateMode parse_rate_mode(std::string_view name);

/// Number of rate entries: K γs, or K(K+1)/2 packed entries of the upper-triangular Q.
int rate_count(RateMode mode, int basis_size);
/// ω block plus rate block.
int coefficient_count(RateMode mode, int basis_size);

/// θ = {ωᵢ} ∪ {γᵢ} (Diagonal) or {ωᵢ} ∪ {Q entries} (GeneralGamma).
///
/// Q is packed row-major over its upper triangle: (0,0), (0,1), …, (0,K−1), (1,1), …
struct CoefficientVector {
  RateMode mode = RateMode::Diagonal;
  RVector omegas;
  RVector rates;

  /// Splits a flat [ω…, rates…] vector. Throws DimensionError on length mismatch.
  static CoefficientVector from_flat(const RVector& flat, RateMode mode, int basis_size);
  RVector flat() const;
};

/// Γ = QQᵀ from the packed upper-triangular Q.
RMatrix gamma_matrix(const RVector& q_packed, int basis_size);

/// One constant piece of a drive envelope, active on [t_start, t_end].
struct PulseSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double p = 0.0;  // rad/µs
  double q = 0.0;  // rad/µs
};

/// Piecewise-constant p(t), q(t) on [0, duration]; zero outside. The rotating-frame
/// frequency is in rad/µs.
class ControlPulse {
 public:
  ControlPulse() = default;
  ControlPulse(std::vector<PulseSegment> segments, double duration, double rot_frequency);

  static ControlPulse square(double p, double q, double duration, double rot_frequency);

  double p(double t) const;
  double q(double t) const;
  double duration() const { return duration_; }
  double rot_frequency() const { return rot_frequency_; }
  const std::vector<PulseSegment>& segments() const { return segments_; }

 private:
  const PulseSegment* find(double t) const;

  std::vector<PulseSegment> segments_;
  double duration_ = 0.0;
  double rot_frequency_ = 0.0;
};

struct SystemConfig {
  int dim = 2;
  double omega = 0.0;  // transition frequency, rad/µs
  double t1 = 1.0;     // µs
  double t2 = 1.0;     // µs
  OperatorBasis basis = make_basis(2, BasisKind::UpperTriangularGellMann);

  /// Throws ValidationError unless t1, t2 > 0, omega finite and basis.dim() == dim.
  void validate() const;
};

/// Device values of the characterized transmon: ω = 3.448 GHz, T₁ = 214 µs, T₂ = 32 µs.
SystemConfig qudit_testbed_config();

/// N-level lowering operator, a|n⟩ = √n |n−1⟩.
CMatrix lowering_operator(int dim);

/// H(t) = (ω − ω_rot) a†a + p(t)(a + a†) + i q(t)(a − a†).
CMatrix control_hamiltonian(double t, const ControlPulse& pulse, const SystemConfig& cfg);

/// −i(I⊗H − Hᵀ⊗I): the column-stacked superoperator of ρ ↦ −i[H, ρ].
CMatrix hamiltonian_superop(const CMatrix& h);

/// Column-stacked superoperator of ρ ↦ AρB† − ½(B†Aρ + ρB†A).
CMatrix dissipator_superop(const CMatrix& a, const CMatrix& b);

/// Row vector t with t·vec(ρ) = Tr ρ.
Eigen::RowVectorXcd trace_functional(int dim);

/// L = Σ −iωᵢ(I⊗Hᵢ − Hᵢᵀ⊗I) + γᵢ(Λᵢ*⊗Λᵢ − ½(I⊗Λᵢ†Λᵢ + (Λᵢ†Λᵢ)ᵀ⊗I)),
/// where Hᵢ is the Hermitian generator behind Λᵢ (Hᵢ = Λᵢ for Hermitian bases).
CMatrix tcl_liouvillian(const CoefficientVector& theta, const OperatorBasis& basis);

/// Unitary part as above plus Σᵢⱼ Γᵢⱼ(Λⱼ*⊗Λᵢ − ½(I⊗Λⱼ†Λᵢ + (Λⱼ†Λᵢ)ᵀ⊗I)), Γ = QQᵀ.
CMatrix tcl_liouvillian_general(const CoefficientVector& theta, const OperatorBasis& basis);

/// Dispatches on theta.mode.
CMatrix liouvillian(const CoefficientVector& theta, const OperatorBasis& basis);

/// −i[H(t), ρ] + Σᵢ (1/Tᵢ)(LᵢρLᵢ† − ½{Lᵢ†Lᵢ, ρ}) with L₁ = |0⟩⟨1|, L₂ = |1⟩⟨1|.
CMatrix lindblad_rhs(const CMatrix& rho, double t, const ControlPulse& pulse, const SystemConfig& cfg);

/// The generator in real coordinates.
///
/// A Hermitian ρ is represented by rₖ = Tr(Bₖρ) with the orthonormal Hermitian basis
/// B₀ = I/√N, Bₖ = Gₖ/√2 (Gₖ the Gell-Mann matrices). Every Hermiticity-preserving
/// superoperator becomes a real N²×N² matrix, and ‖ρ − σ‖_F = ‖r − s‖₂.
class RealGenerator {
 public:
  RealGenerator(const OperatorBasis& basis, RateMode mode);

  int dim() const { return dim_; }
  int state_dim() const { return dim_ * dim_; }
  int basis_size() const { return k_; }
  RateMode mode() const { return mode_; }
  int coefficient_count() const { return tclfit::coefficient_count(mode_, k_); }

  RVector to_real(const CMatrix& rho) const;
  CMatrix from_real(const RVector& r) const;
  RMatrix to_real_superop(const CMatrix& l) const;
  CMatrix to_complex_superop(const RMatrix& r) const;

  /// out = L(θ) in real coordinates (no Hamiltonian part).
  void assemble(const RVector& theta, RMatrix& out) const;
  /// Column c of `out` is (∂L/∂θ_c)·y.
  void channel_actions(const RVector& theta, const RVector& y, RMatrix& out) const;

  /// Real forms of ρ ↦ −i[a†a, ρ], −i[a + a†, ρ] and −i[i(a − a†), ρ].
  const RMatrix& number_term() const { return number_; }
  const RMatrix& p_term() const { return p_drive_; }
  const RMatrix& q_term() const { return q_drive_; }

  /// Real input encoding [Tr ρ, Tr(ρG₁), …] = scale ⊙ r.
  const RVector& encoding_scale() const { return enc_scale_; }

 private:
  int dim_;
  int k_;
  RateMode mode_;
  CMatrix to_vec_;  // columns vec(Bₖ)
  std::vector<RMatrix> unitary_;
  std::vector<RMatrix> diss_;  // Diagonal: D_ii; General: P_ij = D_ij + D_ji for i <= j
  RMatrix number_, p_drive_, q_drive_;
  RVector enc_scale_;

  const RMatrix& pair(int i, int j) const;
};

}  // namespace tclfit
