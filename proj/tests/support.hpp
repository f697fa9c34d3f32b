#pragma once

#include "tclfit/operators.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace tclfit::test {

inline CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline CMatrix random_state_matrix(int dim, std::mt19937_64& rng) {
  const CMatrix a = random_complex(dim, dim, rng);
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline DensityMatrix random_state(int dim, std::mt19937_64& rng) {
  return DensityMatrix(random_state_matrix(dim, rng));
}

inline RVector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  RVector v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

/// Scaling and squaring with a long Taylor tail.
template <class M>
M expm(const M& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.25) ++s;
  const M x = a / std::pow(2.0, s);
  M term = M::Identity(a.rows(), a.cols());
  M out = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * x / static_cast<double>(k);
    out += term;
  }
  for (int i = 0; i < s; ++i) out = out * out;
  return out;
}

inline double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  return es.eigenvalues().minCoeff();
}

/// Gauss-Legendre nodes and weights on [lo, hi] (Golub-Welsch).
inline std::pair<RVector, RVector> gauss_legendre(int n, double lo, double hi) {
  RMatrix j = RMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(j);
  const RVector x = es.eigenvalues();
  RVector w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {(0.5 * (hi - lo) * (x.array() + 1.0) + lo).matrix(), 0.5 * (hi - lo) * w};
}

}  // namespace tclfit::test
