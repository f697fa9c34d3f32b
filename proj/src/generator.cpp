#include "tclfit/generator.hpp"

#include "tclfit/errors.hpp"

#include <cmath>
#include <sstream>

namespace tclfit {

namespace {

constexpr Complex kI{0.0, 1.0};

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_theta(const CoefficientVector& theta, const OperatorBasis& basis, RateMode expected) {
  if (theta.mode != expected)
    throw ValidationError("coefficient vector mode " + to_string(theta.mode) + " where " +
                          to_string(expected) + " is required");
  const int k = basis.size();
  if (theta.omegas.size() != k || theta.rates.size() != rate_count(expected, k)) {
    std::ostringstream os;
    os << "coefficient lengths (" << theta.omegas.size() << ", " << theta.rates.size()
       << ") do not match basis size " << k << " in " << to_string(expected) << " mode";
    throw DimensionError(os.str());
  }
}

CMatrix unitary_part(const RVector& omegas, const OperatorBasis& basis) {
  const int n = basis.dim() * basis.dim();
  CMatrix l = CMatrix::Zero(n, n);
  for (int i = 0; i < basis.size(); ++i)
    if (omegas[i] != 0.0) l += omegas[i] * hamiltonian_superop(basis.hermitian_generators()[i]);
  return l;
}

}  // namespace

std::string to_string(RateMode mode) {
  return mode == RateMode::Diagonal ? "diagonal" : "general-gamma";
}

RateMode parse_rate_mode(std::string_view name) {
  if (name == "diagonal") return RateMode::Diagonal;
  if (name == "general-gamma" || name == "general") return RateMode::GeneralGamma;
  throw ValidationError("unknown rate mode '" + std::string(name) + "' (expected diagonal, general-gamma)");
}

int rate_count(RateMode mode, int basis_size) {
  return mode == RateMode::Diagonal ? basis_size : basis_size * (basis_size + 1) / 2;
}

int coefficient_count(RateMode mode, int basis_size) { return basis_size + rate_count(mode, basis_size); }

CoefficientVector CoefficientVector::from_flat(const RVector& flat, RateMode mode, int basis_size) {
  const int expected = coefficient_count(mode, basis_size);
  if (flat.size() != expected) {
    std::ostringstream os;
    os << "coefficient vector has length " << flat.size() << ", expected " << expected;
    throw DimensionError(os.str());
  }
  CoefficientVector c;
  c.mode = mode;
  c.omegas = flat.head(basis_size);
  c.rates = flat.tail(expected - basis_size);
  return c;
}

RVector CoefficientVector::flat() const {
  RVector out(omegas.size() + rates.size());
  out << omegas, rates;
  return out;
}

RMatrix gamma_matrix(const RVector& q_packed, int basis_size) {
  if (q_packed.size() != rate_count(RateMode::GeneralGamma, basis_size))
    throw DimensionError("packed Q length does not match the basis size");
  RMatrix q = RMatrix::Zero(basis_size, basis_size);
  Eigen::Index idx = 0;
  for (int i = 0; i < basis_size; ++i)
    for (int j = i; j < basis_size; ++j) q(i, j) = q_packed[idx++];
  return q * q.transpose();
}

ControlPulse::ControlPulse(std::vector<PulseSegment> segments, double duration, double rot_frequency)
    : segments_(std::move(segments)), duration_(duration), rot_frequency_(rot_frequency) {
  if (!(duration_ >= 0.0)) throw ValidationError("pulse duration must be nonnegative");
  for (const auto& s : segments_)
    if (!(s.t_end >= s.t_start) || !std::isfinite(s.p) || !std::isfinite(s.q))
      throw ValidationError("pulse segment has an inverted window or a non-finite amplitude");
}

ControlPulse ControlPulse::square(double p, double q, double duration, double rot_frequency) {
  return ControlPulse({PulseSegment{0.0, duration, p, q}}, duration, rot_frequency);
}

const PulseSegment* ControlPulse::find(double t) const {
  if (t < 0.0 || t > duration_) return nullptr;
  for (const auto& s : segments_)
    if (t >= s.t_start && t <= s.t_end) return &s;
  return nullptr;
}

double ControlPulse::p(double t) const {
  const auto* s = find(t);
  return s ? s->p : 0.0;
}

double ControlPulse::q(double t) const {
  const auto* s = find(t);
  return s ? s->q : 0.0;
}

void SystemConfig::validate() const {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw ValidationError("system: t1 and t2 must be positive");
  if (!std::isfinite(omega)) throw ValidationError("system: omega must be finite");
  if (basis.dim() != dim) throw DimensionError("system: basis dimension does not match dim");
}

SystemConfig qudit_testbed_config() {
  SystemConfig cfg;
  cfg.dim = 2;
  cfg.omega = ghz_to_angular(3.448);
  cfg.t1 = 214.0;
  cfg.t2 = 32.0;
  cfg.basis = make_basis(2, BasisKind::UpperTriangularGellMann);
  return cfg;
}

CMatrix lowering_operator(int dim) {
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

CMatrix control_hamiltonian(double t, const ControlPulse& pulse, const SystemConfig& cfg) {
  const CMatrix a = lowering_operator(cfg.dim);
  const CMatrix ad = a.adjoint();
  CMatrix h = (cfg.omega - pulse.rot_frequency()) * (ad * a);
  h += pulse.p(t) * (a + ad);
  h += kI * pulse.q(t) * (a - ad);
  return h;
}

CMatrix hamiltonian_superop(const CMatrix& h) {
  const auto n = h.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  return -kI * (kron(id, h) - kron(h.transpose(), id));
}

CMatrix dissipator_superop(const CMatrix& a, const CMatrix& b) {
  const auto n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix bda = b.adjoint() * a;
  return kron(b.conjugate(), a) - 0.5 * (kron(id, bda) + kron(bda.transpose(), id));
}

Eigen::RowVectorXcd trace_functional(int dim) {
  const CMatrix id = CMatrix::Identity(dim, dim);
  return Eigen::Map<const CVector>(id.data(), id.size()).transpose();
}

CMatrix tcl_liouvillian(const CoefficientVector& theta, const OperatorBasis& basis) {
  check_theta(theta, basis, RateMode::Diagonal);
  CMatrix l = unitary_part(theta.omegas, basis);
  for (int i = 0; i < basis.size(); ++i)
    if (theta.rates[i] != 0.0) l += theta.rates[i] * dissipator_superop(basis[i], basis[i]);
  return l;
}

CMatrix tcl_liouvillian_general(const CoefficientVector& theta, const OperatorBasis& basis) {
  check_theta(theta, basis, RateMode::GeneralGamma);
  const int k = basis.size();
  const RMatrix gamma = gamma_matrix(theta.rates, k);
  CMatrix l = unitary_part(theta.omegas, basis);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (gamma(i, j) != 0.0) l += gamma(i, j) * dissipator_superop(basis[i], basis[j]);
  return l;
}

CMatrix liouvillian(const CoefficientVector& theta, const OperatorBasis& basis) {
  return theta.mode == RateMode::Diagonal ? tcl_liouvillian(theta, basis)
                                          : tcl_liouvillian_general(theta, basis);
}

CMatrix lindblad_rhs(const CMatrix& rho, double t, const ControlPulse& pulse, const SystemConfig& cfg) {
  if (cfg.dim != 2 || rho.rows() != 2 || rho.cols() != 2)
    throw DimensionError("lindblad_rhs: the two-channel qubit model requires dim 2");
  const CMatrix h = control_hamiltonian(t, pulse, cfg);
  CMatrix out = -kI * (h * rho - rho * h);
  CMatrix l1 = CMatrix::Zero(2, 2);
  l1(0, 1) = 1.0;
  CMatrix l2 = CMatrix::Zero(2, 2);
  l2(1, 1) = 1.0;
  const std::pair<const CMatrix*, double> channels[] = {{&l1, 1.0 / cfg.t1}, {&l2, 1.0 / cfg.t2}};
  for (const auto& [l, rate] : channels) {
    const CMatrix ldl = l->adjoint() * *l;
    out += rate * (*l * rho * l->adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

RealGenerator::RealGenerator(const OperatorBasis& basis, RateMode mode)
    : dim_(basis.dim()), k_(basis.size()), mode_(mode) {
  const int n = dim_ * dim_;
  to_vec_.resize(n, n);
  const CMatrix id = CMatrix::Identity(dim_, dim_) / std::sqrt(static_cast<double>(dim_));
  to_vec_.col(0) = vectorize(id).data;
  // Orthonormal Hermitian basis from the Gell-Mann matrices, independent of `basis.kind()`.
  const OperatorBasis gm = make_basis(dim_, BasisKind::GellMann);
  for (int i = 0; i < k_; ++i) to_vec_.col(i + 1) = vectorize(gm[i] / std::sqrt(2.0)).data;

  enc_scale_.resize(n);
  enc_scale_[0] = std::sqrt(static_cast<double>(dim_));
  enc_scale_.tail(k_).setConstant(std::sqrt(2.0));

  for (int i = 0; i < k_; ++i) unitary_.push_back(to_real_superop(hamiltonian_superop(basis.hermitian_generators()[i])));
  if (mode_ == RateMode::Diagonal) {
    for (int i = 0; i < k_; ++i) diss_.push_back(to_real_superop(dissipator_superop(basis[i], basis[i])));
  } else {
    for (int i = 0; i < k_; ++i)
      for (int j = i; j < k_; ++j)
        diss_.push_back(to_real_superop(dissipator_superop(basis[i], basis[j]) + dissipator_superop(basis[j], basis[i])));
  }

  const CMatrix a = lowering_operator(dim_);
  const CMatrix ad = a.adjoint();
  number_ = to_real_superop(hamiltonian_superop(ad * a));
  p_drive_ = to_real_superop(hamiltonian_superop(a + ad));
  q_drive_ = to_real_superop(hamiltonian_superop(kI * (a - ad)));
}

const RMatrix& RealGenerator::pair(int i, int j) const {
  if (i > j) std::swap(i, j);
  // Row-major upper-triangle index of (i, j).
  const int idx = i * k_ - i * (i - 1) / 2 + (j - i);
  return diss_[static_cast<std::size_t>(idx)];
}

RVector RealGenerator::to_real(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) throw DimensionError("to_real: dimension mismatch");
  return (to_vec_.adjoint() * vectorize(rho).data).real();
}

CMatrix RealGenerator::from_real(const RVector& r) const {
  if (r.size() != state_dim()) throw DimensionError("from_real: dimension mismatch");
  CMatrix m = unvectorize(to_vec_ * r.cast<Complex>());
  // Conjugate pairs are computed by different sums; make them bitwise conjugate.
  for (int i = 0; i < dim_; ++i) {
    m(i, i) = m(i, i).real();
    for (int j = i + 1; j < dim_; ++j) m(j, i) = std::conj(m(i, j));
  }
  return m;
}

RMatrix RealGenerator::to_real_superop(const CMatrix& l) const {
  const CMatrix r = to_vec_.adjoint() * l * to_vec_;
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if (r.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("superoperator does not preserve Hermiticity");
  return r.real();
}

CMatrix RealGenerator::to_complex_superop(const RMatrix& r) const {
  return to_vec_ * r.cast<Complex>() * to_vec_.adjoint();
}

void RealGenerator::assemble(const RVector& theta, RMatrix& out) const {
  const int n = state_dim();
  out.setZero(n, n);
  for (int i = 0; i < k_; ++i)
    if (theta[i] != 0.0) out.noalias() += theta[i] * unitary_[static_cast<std::size_t>(i)];
  if (mode_ == RateMode::Diagonal) {
    for (int i = 0; i < k_; ++i)
      if (theta[k_ + i] != 0.0) out.noalias() += theta[k_ + i] * diss_[static_cast<std::size_t>(i)];
    return;
  }
  const RMatrix gamma = gamma_matrix(theta.tail(rate_count(mode_, k_)), k_);
  for (int i = 0; i < k_; ++i) {
    if (gamma(i, i) != 0.0) out.noalias() += 0.5 * gamma(i, i) * pair(i, i);
    for (int j = i + 1; j < k_; ++j)
      if (gamma(i, j) != 0.0) out.noalias() += gamma(i, j) * pair(i, j);
  }
}

void RealGenerator::channel_actions(const RVector& theta, const RVector& y, RMatrix& out) const {
  const int n = state_dim();
  out.resize(n, coefficient_count());
  for (int i = 0; i < k_; ++i) out.col(i).noalias() = unitary_[static_cast<std::size_t>(i)] * y;
  if (mode_ == RateMode::Diagonal) {
    for (int i = 0; i < k_; ++i) out.col(k_ + i).noalias() = diss_[static_cast<std::size_t>(i)] * y;
    return;
  }
  // ∂/∂Q_ab Σ Γ_ij D_ij y = Σ_j Q_jb P_aj y with P_aj = D_aj + D_ja.
  RMatrix q = RMatrix::Zero(k_, k_);
  Eigen::Index idx = k_;
  for (int i = 0; i < k_; ++i)
    for (int j = i; j < k_; ++j) q(i, j) = theta[idx++];
  std::vector<RVector> py(static_cast<std::size_t>(k_ * k_));
  for (int a = 0; a < k_; ++a)
    for (int j = a; j < k_; ++j) {
      py[static_cast<std::size_t>(a * k_ + j)] = pair(a, j) * y;
      py[static_cast<std::size_t>(j * k_ + a)] = py[static_cast<std::size_t>(a * k_ + j)];
    }
  Eigen::Index col = k_;
  for (int a = 0; a < k_; ++a)
    for (int b = a; b < k_; ++b) {
      RVector acc = RVector::Zero(n);
      for (int j = 0; j <= b; ++j)
        if (q(j, b) != 0.0) acc.noalias() += q(j, b) * py[static_cast<std::size_t>(a * k_ + j)];
      out.col(col++) = acc;
    }
}

}  // namespace tclfit
