#include "support.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/operators.hpp"

#include <doctest.h>

using namespace tclfit;
using tclfit::test::random_complex;
using tclfit::test::random_state;

TEST_CASE("vectorize stacks columns") {
  const DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  const CVector v = vectorize(rho).data;
  REQUIRE(v.size() == 4);
  CHECK(v(0) == Complex(0.5, 0));
  CHECK(v(1) == Complex(0, 0));
  CHECK(v(2) == Complex(0, 0));
  CHECK(v(3) == Complex(0.5, 0));

  CMatrix m(2, 2);
  m << 1, 2, 3, 4;
  const CVector w = vectorize(m).data;
  CHECK(w(1) == Complex(3, 0));  // (1,0) comes second
  CHECK(w(2) == Complex(2, 0));
}

TEST_CASE("vectorize round trip and Kronecker identity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = random_state(3, rng);
    CHECK((devectorize(vectorize(rho)).matrix() - rho.matrix()).norm() == doctest::Approx(0.0));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = random_complex(2, 2, rng);
    const CMatrix r = random_complex(2, 2, rng);
    const CMatrix b = random_complex(2, 2, rng);
    CMatrix kron(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) kron.block(2 * i, 2 * j, 2, 2) = b(j, i) * a;
    const CVector lhs = vectorize(CMatrix(a * r * b)).data;
    const CVector rhs = kron * vectorize(r).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("unvectorize rejects non-square lengths") {
  CHECK_THROWS_AS(unvectorize(CVector::Zero(5)), DimensionError);
}

TEST_CASE("density matrix validation") {
  CMatrix m = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);  // trace 2
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = Complex(0.1, 0.0);
  CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);  // not Hermitian
  CHECK_THROWS_AS(DensityMatrix{CMatrix::Identity(2, 3)}, Error);
}

TEST_CASE("Pauli basis") {
  const OperatorBasis b = make_basis(2, BasisKind::PauliQubit);
  REQUIRE(b.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK((b[i] - pauli(i)).norm() == 0.0);
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs((b[i] * b[j]).trace() - Complex(i == j ? 2.0 : 0.0, 0.0)) < 1e-15);
  }
  CHECK_THROWS(make_basis(3, BasisKind::PauliQubit));
}

TEST_CASE("Gell-Mann counts and orthogonality") {
  CHECK(make_basis(2, BasisKind::GellMann).size() == 3);
  CHECK(make_basis(3, BasisKind::GellMann).size() == 8);
  for (int n : {3, 4}) {
    const OperatorBasis b = make_basis(n, BasisKind::GellMann);
    for (int i = 0; i < b.size(); ++i) {
      CHECK(std::abs(b[i].trace()) < 1e-13);
      CHECK((b[i] - b[i].adjoint()).norm() < 1e-15);
      for (int j = 0; j < b.size(); ++j) {
        const Complex ip = (b[i].adjoint() * b[j]).trace();
        CHECK(std::abs(ip - Complex(i == j ? 2.0 : 0.0, 0.0)) < 1e-13);
      }
    }
  }
}

TEST_CASE("Gell-Mann N=2 is the Pauli triple; N=3 matches lambda_1..8") {
  const OperatorBasis b2 = make_basis(2, BasisKind::GellMann);
  for (int i = 0; i < 3; ++i) CHECK((b2[i] - pauli(i)).norm() < 1e-15);

  const OperatorBasis b3 = make_basis(3, BasisKind::GellMann);
  const Complex I(0, 1);
  CMatrix l2 = CMatrix::Zero(3, 3), l8 = CMatrix::Zero(3, 3), l5 = CMatrix::Zero(3, 3);
  l2(0, 1) = -I;
  l2(1, 0) = I;
  l5(0, 2) = -I;
  l5(2, 0) = I;
  l8(0, 0) = l8(1, 1) = 1.0 / std::sqrt(3.0);
  l8(2, 2) = -2.0 / std::sqrt(3.0);
  CHECK((b3[1] - l2).norm() < 1e-15);
  CHECK((b3[4] - l5).norm() < 1e-15);
  CHECK((b3[7] - l8).norm() < 1e-15);
}

TEST_CASE("upper-triangular basis keeps the upper part") {
  const OperatorBasis g = make_basis(3, BasisKind::GellMann);
  const OperatorBasis u = make_basis(3, BasisKind::UpperTriangularGellMann);
  REQUIRE(u.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CMatrix upper = g[i];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < r; ++c) upper(r, c) = 0.0;
    CHECK((u[i] - upper).norm() < 1e-15);
    CHECK((u.hermitian_generators()[i] - g[i]).norm() < 1e-15);
  }
  // qubit: σ⁺-like first operator
  const OperatorBasis q = make_basis(2, BasisKind::UpperTriangularGellMann);
  CHECK(q[0](0, 1) == Complex(1, 0));
  CHECK(q[0](1, 0) == Complex(0, 0));
}

TEST_CASE("basis kind names") {
  for (BasisKind k : {BasisKind::GellMann, BasisKind::UpperTriangularGellMann, BasisKind::PauliQubit})
    CHECK(parse_basis_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_basis_kind("nope"), ValidationError);
}

TEST_CASE("Bloch decomposition") {
  CHECK((bloch_decompose(DensityMatrix::basis_state(2, 0)).a - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
  CHECK(bloch_decompose(DensityMatrix::maximally_mixed(2)).a.norm() < 1e-15);
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK((bloch_decompose(DensityMatrix::pure(plus)).a - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix rho = random_state(2, rng);
    CHECK((bloch_compose(bloch_decompose(rho)).matrix() - rho.matrix()).norm() < 1e-14);
  }
  CHECK_THROWS_AS(bloch_decompose(DensityMatrix::maximally_mixed(3)), DimensionError);
}

TEST_CASE("trace distance") {
  CHECK(trace_distance(DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix a = random_state(2, rng);
    const DensityMatrix b = random_state(2, rng);
    CHECK(trace_distance(a, a) < 1e-14);
    const double bloch = 0.5 * (bloch_decompose(a).a - bloch_decompose(b).a).norm();
    CHECK(std::abs(trace_distance(a, b) - bloch) < 1e-12);
  }
}

TEST_CASE("spectral filter examples") {
  CMatrix valid = CMatrix::Zero(2, 2);
  valid(0, 0) = 0.7;
  valid(1, 1) = 0.3;
  CHECK((spectral_filter(valid).matrix() - valid).norm() < 1e-15);

  // eigenvalues (1.2, -0.2) in a rotated frame
  std::mt19937_64 rng(8);
  Eigen::HouseholderQR<CMatrix> qr(tclfit::test::random_complex(2, 2, rng));
  const CMatrix u = qr.householderQ();
  Eigen::Vector2cd ev(1.2, -0.2);
  const CMatrix raw = u * ev.asDiagonal() * u.adjoint();
  const CMatrix out = spectral_filter(raw).matrix();
  const CMatrix want = u.col(0) * u.col(0).adjoint();
  CHECK((out - want).norm() < 1e-12);

  Eigen::HouseholderQR<CMatrix> qr3(tclfit::test::random_complex(3, 3, rng));
  const CMatrix u3 = qr3.householderQ();
  Eigen::Vector3cd ev3(0.6, 0.5, -0.1);
  const CMatrix out3 = spectral_filter(CMatrix(u3 * ev3.asDiagonal() * u3.adjoint())).matrix();
  Eigen::Vector3cd want3(6.0 / 11.0, 5.0 / 11.0, 0.0);
  CHECK((out3 - u3 * want3.asDiagonal() * u3.adjoint()).norm() < 1e-12);
}

TEST_CASE("spectral filter errors") {
  CMatrix nonherm = CMatrix::Identity(2, 2) * 0.5;
  nonherm(0, 1) = 0.3;
  CHECK_THROWS_AS(spectral_filter(nonherm), ValidationError);
  CHECK_THROWS_AS(spectral_filter(CMatrix(-CMatrix::Identity(2, 2))), NumericalError);
}
