#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace tclfit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Entrywise Hermiticity tolerance for matrices produced by arithmetic.
inline constexpr double kHermitianTol = 1e-12;
/// Hermiticity tolerance for raw tomography estimates (shot noise).
inline constexpr double kRawHermitianTol = 1e-8;
inline constexpr double kTraceTol = 1e-10;

/// Largest entrywise modulus of ρ − ρ†.
double hermiticity_defect(const CMatrix& m);

/// A validated quantum state: square, Hermitian, unit trace.
///
/// Positivity is not enforced here (states predicted by a TCL generator with
/// negative rates may leave the PSD cone); `spectral_filter` produces PSD states.
class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12 entrywise) and unit trace (1e-10).
  explicit DensityMatrix(CMatrix m);

  /// Wraps `m` without checks. For internal producers that guarantee the invariants.
  static DensityMatrix unchecked(CMatrix m);

  static DensityMatrix basis_state(int dim, int k);
  static DensityMatrix maximally_mixed(int dim);
  static DensityMatrix pure(const CVector& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

 private:
  DensityMatrix() = default;
  CMatrix m_;
};

/// Column-stacked vec(ρ).
struct VectorizedState {
  CVector data;
};

VectorizedState vectorize(const CMatrix& m);
VectorizedState vectorize(const DensityMatrix& rho);
/// Inverse of column stacking for an arbitrary square matrix. Throws DimensionError
/// when the length is not a perfect square.
CMatrix unvectorize(const CVector& v);
/// Inverse of `vectorize`, validated as a DensityMatrix.
DensityMatrix devectorize(const VectorizedState& v);

enum class BasisKind { GellMann, UpperTriangularGellMann, PauliQubit };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(std::string_view name);

/// N²−1 operators Λᵢ spanning the generator.
///
/// Ordering (k = 1..N−1): symmetric (j,k) and antisymmetric (j,k) for j < k, then
/// the k-th diagonal matrix. For N = 3 this is the textbook λ₁…λ₈; for N = 2 it is
/// (σx, σy, σz). Normalization Tr(ΛᵢΛⱼ) = 2δᵢⱼ for the Hermitian kinds.
///
/// UpperTriangularGellMann keeps the on-and-above-diagonal entries of each Gell-Mann
/// matrix, so E_jk + E_kj → E_jk and −iE_jk + iE_kj → −iE_jk; diagonal matrices are
/// unchanged. `hermitian_generators()[i]` is always the Gell-Mann matrix operator i
/// came from (identical to `operators()[i]` for the Hermitian kinds).
class OperatorBasis {
 public:
  static constexpr double kNormalization = 2.0;

  OperatorBasis(int dim, BasisKind kind, std::vector<CMatrix> operators,
                std::vector<CMatrix> hermitian);

  int dim() const { return dim_; }
  BasisKind kind() const { return kind_; }
  int size() const { return static_cast<int>(ops_.size()); }
  const CMatrix& operator[](int i) const { return ops_[static_cast<std::size_t>(i)]; }
  const std::vector<CMatrix>& operators() const { return ops_; }
  const std::vector<CMatrix>& hermitian_generators() const { return herm_; }

 private:
  int dim_;
  BasisKind kind_;
  std::vector<CMatrix> ops_;
  std::vector<CMatrix> herm_;
};

OperatorBasis make_basis(int dim, BasisKind kind);

/// σx, σy, σz for axis 0, 1, 2.
CMatrix pauli(int axis);

struct BlochVector {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
};

/// aᵢ = Tr(ρσᵢ). Qubits only.
BlochVector bloch_decompose(const CMatrix& rho);
BlochVector bloch_decompose(const DensityMatrix& rho);
/// ρ = ½(I + Σ aᵢσᵢ). No positivity check.
CMatrix bloch_matrix(const BlochVector& b);
DensityMatrix bloch_compose(const BlochVector& b);

/// ½ Σ |eig(a − b)|.
double trace_distance(const CMatrix& a, const CMatrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Zero the non-positive eigenvalues of a Hermitian estimate and renormalize the
/// rest to unit trace. Inputs within 1e-8 of Hermitian are symmetrized first.
/// Throws ValidationError for non-Hermitian input and NumericalError when no
/// eigenvalue is positive.
DensityMatrix spectral_filter(const CMatrix& raw);
DensityMatrix spectral_filter(const DensityMatrix& rho);

}  // namespace tclfit
