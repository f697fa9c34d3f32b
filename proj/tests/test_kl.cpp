#include "support.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/kl.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tclfit;
using tclfit::test::gauss_legendre;

namespace {

constexpr double kPi = std::numbers::pi;

// Bisection directly on the tan forms, inside each branch.
double tan_branch_root(int i, double kappa) {
  const bool even = i % 2 == 0;
  auto f = [&](double w) {
    const double t = std::tan(w / 2.0);
    return even ? 1.0 - kappa * w * t : kappa * w + t;
  };
  double lo = i * kPi + 1e-12, hi = (i + 1) * kPi - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0) == (f(lo) > 0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("exponential kernel roots") {
  for (double kappa : {0.5, 1.0, 2.0}) {
    KLConfig cfg;
    cfg.kernel = KernelKind::Exponential;
    cfg.kappa = kappa;
    cfg.terms = 10;
    const auto pairs = kl_exponential_eigens(cfg);
    REQUIRE(pairs.size() == 10);
    for (const auto& p : pairs) {
      CHECK(std::abs(exponential_characteristic(p.root, kappa)) <= 1e-10);
      const double oracle = tan_branch_root(p.index, kappa);
      CHECK(std::abs(static_cast<double>(p.root) - oracle) <= 1e-9 * oracle);
      CHECK(p.lambda == doctest::Approx(2.0 * kappa / (1.0 + kappa * kappa * oracle * oracle)).epsilon(1e-9));
    }
    for (std::size_t i = 1; i < pairs.size(); ++i) {
      CHECK(pairs[i].root > pairs[i - 1].root);
      CHECK(pairs[i].lambda < pairs[i - 1].lambda);
    }
  }
}

TEST_CASE("exponential eigenfunctions solve the Fredholm equation on [0, 1]") {
  KLConfig cfg;
  cfg.kernel = KernelKind::Exponential;
  cfg.sigma = 1.3;
  cfg.kappa = 0.7;
  cfg.terms = 6;
  const KLBasis basis(cfg);
  const double s2 = cfg.sigma * cfg.sigma;
  for (int i = 0; i < basis.terms(); ++i) {
    const double lambda = basis.eigenpairs()[static_cast<std::size_t>(i)].lambda;
    for (double x : {0.0, 0.23, 0.5, 0.91}) {
      double integral = 0.0;
      // split at the kink
      for (auto [lo, hi] : {std::pair{0.0, x}, std::pair{x, 1.0}}) {
        if (hi <= lo) continue;
        const auto [nodes, weights] = gauss_legendre(60, lo, hi);
        for (int k = 0; k < nodes.size(); ++k)
          integral += weights(k) * s2 * std::exp(-std::abs(x - nodes(k)) / cfg.kappa) * basis.eigenfunction(i, nodes(k));
      }
      CHECK(std::abs(integral - lambda * basis.eigenfunction(i, x)) < 1e-10);
    }
    // unit norm on [0, 1]
    const auto [nodes, weights] = gauss_legendre(80, 0.0, 1.0);
    double n2 = 0.0;
    for (int k = 0; k < nodes.size(); ++k) n2 += weights(k) * std::pow(basis.eigenfunction(i, nodes(k)), 2);
    CHECK(n2 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exponential Mercer trace") {
  KLConfig cfg;
  cfg.kernel = KernelKind::Exponential;
  cfg.sigma = 1.0;
  cfg.kappa = 1.0;
  cfg.terms = 50;
  double sum = 0.0;
  for (const auto& p : kl_exponential_eigens(cfg)) sum += p.lambda;
  // ∫₀¹ k(x, x) dx = σ²
  CHECK(std::abs(sum - 1.0) <= 0.02);
  CHECK(sum < 1.0);
}

TEST_CASE("Hermite recurrence") {
  for (double x : {-1.3, 0.0, 0.4, 2.0}) {
    CHECK(hermite(0, x) == 1.0);
    CHECK(hermite(1, x) == doctest::Approx(2.0 * x));
    CHECK(hermite(2, x) == doctest::Approx(4.0 * x * x - 2.0));
    CHECK(hermite(3, x) == doctest::Approx(8.0 * x * x * x - 12.0 * x));
  }
  CHECK_THROWS_AS(hermite(-1, 0.0), ValidationError);
}

TEST_CASE("squared-exponential eigenvalues are geometric") {
  for (double sigma : {0.5, 1.0, 2.0})
    for (double kappa : {0.3, 1.0, 3.0}) {
      KLConfig cfg;
      cfg.sigma = sigma;
      cfg.kappa = kappa;
      cfg.terms = 12;
      const auto pairs = kl_sqexp_eigens(cfg);
      const double a = 1.0 / (4.0 * sigma * sigma), b = 1.0 / (2.0 * kappa * kappa);
      const double big_b = b / (a + b + std::sqrt(a * a + 2.0 * a * b));
      for (std::size_t i = 1; i < pairs.size(); ++i)
        CHECK(std::abs(pairs[i].lambda / pairs[i - 1].lambda - big_b) <= 1e-14);
      CHECK(pairs[0].lambda == doctest::Approx(std::sqrt(2.0 * a / (a + b + std::sqrt(a * a + 2.0 * a * b)))));
    }
}

TEST_CASE("squared-exponential Fredholm residual under the Gaussian weight") {
  KLConfig cfg;
  cfg.sigma = 1.0;
  cfg.kappa = 1.0;
  cfg.terms = 5;
  const KLBasis basis(cfg);
  const auto [nodes, weights] = gauss_legendre(200, -12.0, 12.0);
  const double lambda0 = basis.eigenpairs()[0].lambda;
  auto density = [&](double y) { return std::exp(-y * y / 2.0) / std::sqrt(2.0 * kPi); };
  for (int i = 0; i < 5; ++i) {
    const double lambda = basis.eigenpairs()[static_cast<std::size_t>(i)].lambda;
    double worst = 0.0;
    for (double x : {-1.5, -0.4, 0.0, 0.3, 1.0, 2.2}) {
      double integral = 0.0;
      for (int k = 0; k < nodes.size(); ++k)
        integral += weights(k) * std::exp(-std::pow(x - nodes(k), 2) / 2.0) * basis.eigenfunction(i, nodes(k)) *
                    density(nodes(k));
      worst = std::max(worst, std::abs(integral - lambda * basis.eigenfunction(i, x)));
    }
    CHECK(worst <= 1e-3 * lambda0);
  }
  // orthonormal under N(0, σ²)
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double ip = 0.0;
      for (int k = 0; k < nodes.size(); ++k)
        ip += weights(k) * basis.eigenfunction(i, nodes(k)) * basis.eigenfunction(j, nodes(k)) * density(nodes(k));
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("weighted eigenfunctions") {
  for (KernelKind kind : {KernelKind::Exponential, KernelKind::SquaredExponential}) {
    KLConfig cfg;
    cfg.kernel = kind;
    cfg.kappa = 0.8;
    cfg.terms = 7;
    const KLBasis basis(cfg);
    RVector w;
    for (double x : {0.0, 0.37, 1.0}) {
      basis.weighted(x, w);
      REQUIRE(w.size() == 7);
      for (int i = 0; i < 7; ++i)
        CHECK(w(i) == doctest::Approx(std::sqrt(basis.eigenpairs()[static_cast<std::size_t>(i)].lambda) *
                                      basis.eigenfunction(i, x)).epsilon(1e-13));
    }
  }
}

TEST_CASE("configuration errors") {
  KLConfig bad;
  bad.kappa = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  KLConfig wrong;
  wrong.kernel = KernelKind::Exponential;
  CHECK_THROWS_AS(kl_sqexp_eigens(wrong), ValidationError);
  KLConfig empty;
  empty.terms = 0;
  CHECK(KLBasis(empty).terms() == 0);
}
