#include "tclfit/kl.hpp"

#include "tclfit/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tclfit {

namespace {

using Real = long double;
constexpr Real kPi = std::numbers::pi_v<long double>;

// Pole-free forms of the two factors; each changes sign exactly once on its bracket.
Real even_factor(Real w, Real kappa) { return std::cos(w / 2) - kappa * w * std::sin(w / 2); }
Real odd_factor(Real w, Real kappa) { return kappa * w * std::cos(w / 2) + std::sin(w / 2); }

template <class F>
Real bisect(F f, Real lo, Real hi) {
  Real flo = f(lo);
  for (int it = 0; it < 400; ++it) {
    const Real mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    const Real fm = f(mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return std::fabs(f(lo)) <= std::fabs(f(hi)) ? lo : hi;
}

}  // namespace

std::string to_string(KernelKind kind) {
  return kind == KernelKind::Exponential ? "exponential" : "squared-exponential";
}

void KLConfig::validate() const {
  if (!(sigma > 0.0) || !(kappa > 0.0) || terms < 0) {
    std::ostringstream os;
    os << "KL config requires sigma > 0, kappa > 0, M >= 0 (got " << sigma << ", " << kappa << ", " << terms << ")";
    throw ValidationError(os.str());
  }
}

double exponential_characteristic(long double omega, double kappa) {
  const Real w = omega;
  const Real t = std::tan(w / 2);
  return static_cast<double>((1 - kappa * w * t) * (kappa * w + t));
}

std::vector<KLEigenpair> kl_exponential_eigens(const KLConfig& cfg) {
  cfg.validate();
  if (cfg.kernel != KernelKind::Exponential) throw ValidationError("kl_exponential_eigens: kernel is not exponential");
  const Real kappa = cfg.kappa;
  std::vector<KLEigenpair> out;
  out.reserve(static_cast<std::size_t>(cfg.terms));
  // Root i lies in (iπ, (i+1)π): cosine branch for even i, sine branch for odd i.
  for (int i = 0; i < cfg.terms; ++i) {
    const Real lo = i * kPi;
    const Real hi = (i + 1) * kPi;
    const bool even = i % 2 == 0;
    auto f = [&](Real w) { return even ? even_factor(w, kappa) : odd_factor(w, kappa); };
    if ((f(lo) < 0) == (f(hi) < 0)) {
      std::ostringstream os;
      os << "exponential KL: no sign change on branch (" << static_cast<double>(lo) << ", "
         << static_cast<double>(hi) << ") for kappa " << cfg.kappa;
      throw NumericalError(os.str());
    }
    const Real root = bisect(f, lo, hi);
    const double w = static_cast<double>(root);
    KLEigenpair p;
    p.index = i;
    p.root = root;
    p.lambda = 2.0 * cfg.kappa * cfg.sigma * cfg.sigma / (1.0 + cfg.kappa * cfg.kappa * w * w);
    p.norm = std::sqrt(even ? 0.5 + std::sin(w) / (2.0 * w) : 0.5 - std::sin(w) / (2.0 * w));
    out.push_back(p);
  }
  return out;
}

std::vector<KLEigenpair> kl_sqexp_eigens(const KLConfig& cfg) {
  cfg.validate();
  if (cfg.kernel != KernelKind::SquaredExponential)
    throw ValidationError("kl_sqexp_eigens: kernel is not squared-exponential");
  const double a = 1.0 / (4.0 * cfg.sigma * cfg.sigma);
  const double b = 1.0 / (2.0 * cfg.kappa * cfg.kappa);
  const double c = std::sqrt(a * a + 2.0 * a * b);
  const double big_a = a + b + c;
  const double big_b = b / big_a;
  std::vector<KLEigenpair> out;
  double lambda = std::sqrt(2.0 * a / big_a);
  double norm2 = std::sqrt(a / c);  // ∫ φ₀² N(0,σ²), then ×2i per order
  for (int i = 0; i < cfg.terms; ++i) {
    KLEigenpair p;
    p.index = i;
    p.lambda = lambda;
    p.norm = std::sqrt(norm2);
    out.push_back(p);
    lambda *= big_b;
    norm2 *= 2.0 * (i + 1);
  }
  return out;
}

double hermite(int n, double x) {
  if (n < 0) throw ValidationError("hermite: negative order");
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

KLBasis::KLBasis(const KLConfig& cfg) : cfg_(cfg) {
  if (cfg.kernel == KernelKind::Exponential) {
    pairs_ = kl_exponential_eigens(cfg);
  } else {
    pairs_ = kl_sqexp_eigens(cfg);
    const double a = 1.0 / (4.0 * cfg.sigma * cfg.sigma);
    const double b = 1.0 / (2.0 * cfg.kappa * cfg.kappa);
    const double c = std::sqrt(a * a + 2.0 * a * b);
    sq_c_ = c;
    sq_envelope_ = c - a;
  }
}

double KLBasis::eigenfunction(int i, double x) const {
  const auto& p = pairs_.at(static_cast<std::size_t>(i));
  if (cfg_.kernel == KernelKind::Exponential) {
    const double arg = static_cast<double>(p.root) * (x - 0.5);
    return (i % 2 == 0 ? std::cos(arg) : std::sin(arg)) / p.norm;
  }
  return std::exp(-sq_envelope_ * x * x) * hermite(i, std::sqrt(2.0 * sq_c_) * x) / p.norm;
}

void KLBasis::weighted(double x, RVector& out) const {
  const int m = terms();
  out.resize(m);
  if (m == 0) return;
  if (cfg_.kernel == KernelKind::Exponential) {
    for (int i = 0; i < m; ++i) {
      const auto& p = pairs_[static_cast<std::size_t>(i)];
      const double arg = static_cast<double>(p.root) * (x - 0.5);
      out[i] = std::sqrt(p.lambda) * (i % 2 == 0 ? std::cos(arg) : std::sin(arg)) / p.norm;
    }
    return;
  }
  const double env = std::exp(-sq_envelope_ * x * x);
  const double u = std::sqrt(2.0 * sq_c_) * x;
  double h0 = 1.0;
  double h1 = 2.0 * u;
  for (int i = 0; i < m; ++i) {
    double h = h0;
    if (i == 1) h = h1;
    if (i >= 2) {
      const double h2 = 2.0 * u * h1 - 2.0 * (i - 1) * h0;
      h0 = h1;
      h1 = h2;
      h = h2;
    }
    const auto& p = pairs_[static_cast<std::size_t>(i)];
    out[i] = std::sqrt(p.lambda) * env * h / p.norm;
  }
}

}  // namespace tclfit
