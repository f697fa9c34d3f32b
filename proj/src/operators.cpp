#include "tclfit/operators.hpp"

#include "tclfit/errors.hpp"

#include <cmath>
#include <sstream>

namespace tclfit {

namespace {

constexpr Complex kI{0.0, 1.0};

int perfect_square_root(Eigen::Index n) {
  const auto r = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n || n == 0) {
    std::ostringstream os;
    os << "vector length " << n << " is not a perfect square";
    throw DimensionError(os.str());
  }
  return static_cast<int>(r);
}

CMatrix unit(int dim, int j, int k) {
  CMatrix e = CMatrix::Zero(dim, dim);
  e(j, k) = 1.0;
  return e;
}

void require_qubit(int dim, const char* what) {
  if (dim != 2) {
    std::ostringstream os;
    os << what << " requires a qubit (dim 2), got dim " << dim;
    throw DimensionError(os.str());
  }
}

}  // namespace

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermiticity_defect: matrix is not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    throw DimensionError("density matrix must be square and non-empty");
  const double herm = hermiticity_defect(m_);
  if (herm > kHermitianTol) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (defect " << herm << ")";
    throw ValidationError(os.str());
  }
  const Complex tr = m_.trace();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "density matrix trace " << tr.real() << (tr.imag() < 0 ? "-" : "+")
       << std::abs(tr.imag()) << "i differs from 1";
    throw ValidationError(os.str());
  }
}

DensityMatrix DensityMatrix::unchecked(CMatrix m) {
  DensityMatrix rho;
  rho.m_ = std::move(m);
  return rho;
}

DensityMatrix DensityMatrix::basis_state(int dim, int k) {
  if (dim < 1 || k < 0 || k >= dim) throw DimensionError("basis_state: index out of range");
  return unchecked(unit(dim, k, k));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 1) throw DimensionError("maximally_mixed: dim must be positive");
  return unchecked(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw ValidationError("pure: zero state vector");
  const CVector u = psi / n;
  CMatrix m = u * u.adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  return unchecked(std::move(m));
}

VectorizedState vectorize(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("vectorize: matrix is not square");
  // Eigen storage is column-major, so the raw buffer is already column-stacked.
  return {Eigen::Map<const CVector>(m.data(), m.size())};
}

VectorizedState vectorize(const DensityMatrix& rho) { return vectorize(rho.matrix()); }

CMatrix unvectorize(const CVector& v) {
  const int n = perfect_square_root(v.size());
  return Eigen::Map<const CMatrix>(v.data(), n, n);
}

DensityMatrix devectorize(const VectorizedState& v) { return DensityMatrix(unvectorize(v.data)); }

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::GellMann: return "gell-mann";
    case BasisKind::UpperTriangularGellMann: return "upper-triangular-gell-mann";
    case BasisKind::PauliQubit: return "pauli";
  }
  return "unknown";
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "gell-mann") return BasisKind::GellMann;
  if (name == "upper-triangular-gell-mann") return BasisKind::UpperTriangularGellMann;
  if (name == "pauli") return BasisKind::PauliQubit;
  throw ValidationError("unknown basis kind '" + std::string(name) +
                        "' (expected gell-mann, upper-triangular-gell-mann, pauli)");
}

OperatorBasis::OperatorBasis(int dim, BasisKind kind, std::vector<CMatrix> operators,
                             std::vector<CMatrix> hermitian)
    : dim_(dim), kind_(kind), ops_(std::move(operators)), herm_(std::move(hermitian)) {
  const auto expected = static_cast<std::size_t>(dim * dim - 1);
  if (ops_.size() != expected || herm_.size() != expected)
    throw DimensionError("operator basis must hold N^2-1 operators");
}

OperatorBasis make_basis(int dim, BasisKind kind) {
  if (dim < 2) throw DimensionError("make_basis: dim must be >= 2, got " + std::to_string(dim));
  if (kind == BasisKind::PauliQubit) {
    require_qubit(dim, "pauli basis");
    std::vector<CMatrix> ops{pauli(0), pauli(1), pauli(2)};
    return OperatorBasis(dim, kind, ops, ops);
  }

  std::vector<CMatrix> herm;
  std::vector<CMatrix> upper;
  for (int k = 1; k < dim; ++k) {
    for (int j = 0; j < k; ++j) {
      herm.push_back(unit(dim, j, k) + unit(dim, k, j));
      upper.push_back(unit(dim, j, k));
      herm.push_back(-kI * unit(dim, j, k) + kI * unit(dim, k, j));
      upper.push_back(-kI * unit(dim, j, k));
    }
    CMatrix d = CMatrix::Zero(dim, dim);
    for (int m = 0; m < k; ++m) d(m, m) = 1.0;
    d(k, k) = -static_cast<double>(k);
    d *= std::sqrt(2.0 / (k * (k + 1.0)));
    herm.push_back(d);
    upper.push_back(d);
  }
  if (kind == BasisKind::GellMann) return OperatorBasis(dim, kind, herm, herm);
  return OperatorBasis(dim, kind, std::move(upper), std::move(herm));
}

CMatrix pauli(int axis) {
  CMatrix s = CMatrix::Zero(2, 2);
  switch (axis) {
    case 0: s(0, 1) = 1.0; s(1, 0) = 1.0; break;
    case 1: s(0, 1) = -kI; s(1, 0) = kI; break;
    case 2: s(0, 0) = 1.0; s(1, 1) = -1.0; break;
    default: throw DimensionError("pauli: axis must be 0, 1 or 2");
  }
  return s;
}

BlochVector bloch_decompose(const CMatrix& rho) {
  require_qubit(static_cast<int>(rho.rows()), "bloch_decompose");
  if (rho.cols() != 2) throw DimensionError("bloch_decompose: matrix is not square");
  BlochVector b;
  for (int i = 0; i < 3; ++i) b.a[i] = (rho * pauli(i)).trace().real();
  return b;
}

BlochVector bloch_decompose(const DensityMatrix& rho) { return bloch_decompose(rho.matrix()); }

CMatrix bloch_matrix(const BlochVector& b) {
  CMatrix m = CMatrix::Identity(2, 2);
  for (int i = 0; i < 3; ++i) m += b.a[i] * pauli(i);
  return 0.5 * m;
}

DensityMatrix bloch_compose(const BlochVector& b) { return DensityMatrix::unchecked(bloch_matrix(b)); }

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DimensionError("trace_distance: dimension mismatch");
  CMatrix d = a - b;
  d = 0.5 * (d + d.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

DensityMatrix spectral_filter(const CMatrix& raw) {
  if (raw.rows() != raw.cols() || raw.rows() == 0)
    throw DimensionError("spectral_filter: matrix must be square and non-empty");
  const double herm = hermiticity_defect(raw);
  if (herm > kRawHermitianTol) {
    std::ostringstream os;
    os << "spectral_filter: input is not Hermitian (defect " << herm << " > " << kRawHermitianTol << ")";
    throw ValidationError(os.str());
  }
  const CMatrix sym = 0.5 * (raw + raw.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  const RVector& e = es.eigenvalues();
  double total = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e[i] > 0.0) total += e[i];
  if (!(total > 0.0)) throw NumericalError("spectral_filter: no positive eigenvalue, state is unrecoverable");

  RVector kept = e.unaryExpr([total](double x) { return x > 0.0 ? x / total : 0.0; });
  CMatrix out = es.eigenvectors() * kept.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix::unchecked(std::move(out));
}

DensityMatrix spectral_filter(const DensityMatrix& rho) { return spectral_filter(rho.matrix()); }

}  // namespace tclfit
