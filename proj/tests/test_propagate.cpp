#include "support.hpp"

#include "tclfit/errors.hpp"
#include "tclfit/propagate.hpp"

#include <doctest.h>

using namespace tclfit;
using tclfit::test::expm;
using tclfit::test::random_state;
using tclfit::test::random_vector;

namespace {

SystemConfig system_of(int dim, BasisKind kind = BasisKind::UpperTriangularGellMann, double omega = 0.0) {
  SystemConfig cfg;
  cfg.dim = dim;
  cfg.omega = omega;
  cfg.basis = make_basis(dim, kind);
  return cfg;
}

CoefficientModel constant_model(const SystemConfig& cfg, const RVector& theta, RateMode mode = RateMode::Diagonal) {
  ModelSpec s;
  s.dim = cfg.dim;
  s.basis = cfg.basis.kind();
  s.mode = mode;
  return CoefficientModel(s, theta);
}

CMatrix full_generator(const CoefficientModel& m, const SystemConfig& cfg, const ControlPulse& pulse, double t) {
  return liouvillian(m.coefficients(t), cfg.basis) + hamiltonian_superop(control_hamiltonian(t, pulse, cfg));
}

}  // namespace

TEST_CASE("time grid") {
  TimeGrid g{0.0, 1.0, 0.004, 5};
  CHECK_NOTHROW(g.validate());
  CHECK(g.steps() == 250);
  CHECK(g.time_at(10) == doctest::Approx(0.04));
  TimeGrid bad{0.0, 1.0, 0.3, 1};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  TimeGrid neg{0.0, 1.0, -0.1, 1};
  CHECK_THROWS_AS(neg.validate(), ValidationError);
  TimeGrid stride{0.0, 1.0, 0.1, 0};
  CHECK_THROWS_AS(stride.validate(), ValidationError);

  CHECK(grid_index(0.2, 0.0, 0.004) == 50);
  CHECK(grid_index(25.0, 0.0, 0.004) == 6250);
  CHECK_THROWS_AS(grid_index(0.0021, 0.0, 0.004), ValidationError);
}

TEST_CASE("zero generator leaves the state alone") {
  const SystemConfig cfg = system_of(3);
  const CoefficientModel zero = constant_model(cfg, RVector::Zero(16));
  const ControlPulse off = ControlPulse::square(0.0, 0.0, 1.0, 0.0);
  std::mt19937_64 rng(1);
  const DensityMatrix rho0 = random_state(3, rng);
  const Trajectory tr = propagate(zero, off, cfg, rho0, TimeGrid{0.0, 2.0, 0.01, 10});
  REQUIRE(tr.times.size() == 21);
  for (const auto& s : tr.states) CHECK((s.matrix() - rho0.matrix()).norm() < 1e-14);
}

TEST_CASE("pure dephasing matches the analytic decay") {
  const SystemConfig cfg = system_of(2, BasisKind::PauliQubit);
  const double gamma = 0.5;
  RVector theta = RVector::Zero(6);
  theta(5) = gamma;
  const CoefficientModel m = constant_model(cfg, theta);
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const DensityMatrix rho0 = DensityMatrix::pure(plus);
  const ControlPulse off = ControlPulse::square(0.0, 0.0, 0.0, 0.0);
  const double dt = 1e-3 / gamma;
  const Trajectory tr = propagate(m, off, cfg, rho0, TimeGrid{0.0, 4.0, dt, 100});
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double want = 0.5 * std::exp(-2.0 * gamma * tr.times[k]);
    CHECK(std::abs(std::abs(tr.states[k](0, 1)) - want) <= 1e-8);
    CHECK(tr.states[k](0, 0).real() == doctest::Approx(0.5).epsilon(1e-13));
  }
}

TEST_CASE("RK4 converges at fourth order against the matrix exponential") {
  std::mt19937_64 rng(2);
  const SystemConfig cfg = system_of(3, BasisKind::GellMann, 0.3);
  const CoefficientModel m = constant_model(cfg, (RVector(16) << random_vector(8, rng, 0.4),
                                                  random_vector(8, rng, 0.2).cwiseAbs()).finished());
  const ControlPulse pulse = ControlPulse::square(0.35, -0.2, 10.0, 0.0);
  const DensityMatrix rho0 = random_state(3, rng);
  const CMatrix l = full_generator(m, cfg, pulse, 1.0);

  std::vector<double> errs;
  for (double dt : {0.1, 0.05, 0.025}) {
    const Trajectory tr = propagate(m, pulse, cfg, rho0, TimeGrid{0.0, 4.0, dt, 1});
    double err = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); k += 4) {
      const CMatrix exact = unvectorize(expm(CMatrix(tr.times[k] * l)) * vectorize(rho0).data);
      err = std::max(err, (tr.states[k].matrix() - exact).norm());
    }
    errs.push_back(err);
  }
  const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
  CHECK(r1 == doctest::Approx(16.0).epsilon(0.15));
  CHECK(r2 == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("time-dependent sources: halving dt still gives fourth order") {
  std::mt19937_64 rng(3);
  const SystemConfig cfg = system_of(2);
  const RVector base = (RVector(6) << random_vector(3, rng, 0.5), 0.1, 0.2, 0.05).finished();
  FunctionSource src(2, BasisKind::UpperTriangularGellMann, RateMode::Diagonal, [base](double t) {
    RVector th = base;
    th.tail(3) *= 1.0 + 0.5 * std::sin(t);
    th(0) += 0.3 * std::cos(2.0 * t);
    return th;
  });
  const ControlPulse pulse = ControlPulse::square(0.4, 0.0, 10.0, 0.0);
  const DensityMatrix rho0 = DensityMatrix::basis_state(2, 0);
  const Trajectory ref = propagate(src, pulse, cfg, rho0, TimeGrid{0.0, 3.0, 0.003125, 64});
  std::vector<double> errs;
  for (double dt : {0.1, 0.05, 0.025}) {
    const Trajectory tr = propagate(src, pulse, cfg, rho0, TimeGrid{0.0, 3.0, dt, static_cast<int>(0.2 / dt + 0.5)});
    double err = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      err = std::max(err, (tr.states[k].matrix() - ref.states[k].matrix()).norm());
    errs.push_back(err);
  }
  CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("step maps") {
  std::mt19937_64 rng(4);
  const SystemConfig cfg = system_of(2);
  const CoefficientModel m = constant_model(cfg, random_vector(6, rng, 0.3));
  const ControlPulse pulse = ControlPulse::square(0.5, 0.1, 5.0, 0.0);

  const double h = 1e-6;
  const CMatrix first = CMatrix::Identity(4, 4) + h * full_generator(m, cfg, pulse, 1.0);
  CHECK((step_map(m, pulse, cfg, 1.0, h) - first).cwiseAbs().maxCoeff() <= 1e-9);

  CHECK((evolution_map(m, pulse, cfg, 0.7, 0.7, 0.01) - CMatrix::Identity(4, 4)).norm() < 1e-15);

  // 𝕃(t0, t + τ) = 𝕃(t, τ)·𝕃(t0, t)
  ModelSpec ks;
  ks.variant = ModelVariant::KLSqExp;
  ks.time_scale = 3.0;
  const CoefficientModel kl(ks, random_vector(model_dimension(ks), rng, 0.2));
  const CMatrix whole = evolution_map(kl, pulse, cfg, 0.0, 2.0, 0.01);
  const CMatrix split = evolution_map(kl, pulse, cfg, 1.2, 2.0, 0.01) * evolution_map(kl, pulse, cfg, 0.0, 1.2, 0.01);
  CHECK((whole - split).cwiseAbs().maxCoeff() <= 1e-12);

  // trace preservation of each step
  const CMatrix s = step_map(kl, pulse, cfg, 0.3, 0.01);
  CHECK((trace_functional(2) * s - trace_functional(2)).norm() < 1e-13);

  ModelSpec nl;
  nl.variant = ModelVariant::Affine;
  nl.state_dependent = true;
  CHECK_THROWS_AS(step_map(CoefficientModel::zeros(nl), pulse, cfg, 0.0, 0.01), ValidationError);
}

TEST_CASE("trajectories preserve trace and Hermiticity") {
  std::mt19937_64 rng(5);
  const SystemConfig cfg = system_of(3);
  ModelSpec s;
  s.variant = ModelVariant::MLP;
  s.dim = 3;
  s.state_dependent = true;
  s.time_scale = 5.0;
  s.set_hidden_layers({6});
  const CoefficientModel m(s, random_vector(model_dimension(s), rng, 0.2));
  const ControlPulse pulse = ControlPulse::square(0.3, 0.2, 3.0, 0.0);
  const Trajectory tr = propagate(m, pulse, cfg, random_state(3, rng), TimeGrid{0.0, 5.0, 0.005, 10});
  CHECK(tr.max_trace_drift <= 1e-9);
  CHECK(tr.max_hermiticity_defect <= 1e-10);
  CHECK(tr.renormalized_samples == 0);
  for (const auto& st : tr.states) {
    CHECK(std::abs(st.matrix().trace() - Complex(1.0, 0.0)) < 1e-9);
    CHECK(hermiticity_defect(st.matrix()) == 0.0);
  }
}

TEST_CASE("divergence raises a numerical error") {
  const SystemConfig cfg = system_of(2, BasisKind::PauliQubit);
  RVector theta = RVector::Zero(6);
  theta.tail(3).setConstant(-400.0);
  const CoefficientModel m = constant_model(cfg, theta);
  const ControlPulse off = ControlPulse::square(0.0, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(propagate(m, off, cfg, DensityMatrix::basis_state(2, 0), TimeGrid{0.0, 10.0, 0.01, 1}),
                  NumericalError);
}

TEST_CASE("mismatched configurations are rejected") {
  const SystemConfig cfg = system_of(3);
  const CoefficientModel m = constant_model(system_of(2), RVector::Zero(6));
  const ControlPulse off;
  CHECK_THROWS_AS(Integrator(m, off, cfg), DimensionError);
  CHECK_THROWS_AS(propagate(constant_model(cfg, RVector::Zero(16)), off, cfg, DensityMatrix::maximally_mixed(2),
                            TimeGrid{0.0, 1.0, 0.1, 1}),
                  DimensionError);
}

TEST_CASE("schedules reproduce direct evaluation") {
  std::mt19937_64 rng(6);
  const SystemConfig cfg = system_of(2);
  ModelSpec s;
  s.variant = ModelVariant::KLExp;
  s.kl.kernel = KernelKind::Exponential;
  s.time_scale = 2.0;
  const CoefficientModel m(s, random_vector(model_dimension(s), rng, 0.2));
  const ControlPulse pulse = ControlPulse::square(0.4, 0.0, 1.0, 0.0);
  const long steps = 200;
  const double dt = 0.01;
  RVector a = Integrator(m, pulse, cfg).generator().to_real(DensityMatrix::basis_state(2, 1).matrix());
  RVector b = a;
  Integrator direct(m, pulse, cfg);
  direct.run(0.0, dt, steps, a, nullptr);
  Integrator cached(m, pulse, cfg);
  const CoefficientSchedule sched = CoefficientSchedule::build(m, 0.0, dt, steps);
  CHECK(sched.size() == 2 * steps + 1);
  cached.use_schedule(&sched);
  cached.run(0.0, dt, steps, b, nullptr);
  CHECK((a - b).norm() < 1e-14);
}

TEST_CASE("forward sensitivities match finite differences of the trajectory") {
  std::mt19937_64 rng(7);
  const SystemConfig cfg = system_of(2);
  std::vector<ModelSpec> specs;
  ModelSpec kl;
  kl.variant = ModelVariant::KLSqExp;
  kl.time_scale = 2.0;
  specs.push_back(kl);
  ModelSpec nl;
  nl.variant = ModelVariant::Affine;
  nl.state_dependent = true;
  nl.time_scale = 2.0;
  specs.push_back(nl);
  ModelSpec c;
  c.mode = RateMode::GeneralGamma;
  specs.push_back(c);
  ModelSpec soft;
  soft.variant = ModelVariant::MLP;
  soft.state_dependent = true;
  soft.positive_rates = true;
  soft.time_scale = 2.0;
  soft.set_hidden_layers({3});
  specs.push_back(soft);

  const ControlPulse pulse = ControlPulse::square(0.6, 0.1, 1.0, 0.0);
  const double dt = 0.02;
  const long steps = 100;
  for (const auto& s : specs) {
    const CoefficientModel m(s, random_vector(model_dimension(s), rng, 0.3));
    Integrator integ(m, pulse, cfg);
    const RVector r0 = integ.generator().to_real(DensityMatrix::basis_state(2, 0).matrix());
    RVector r = r0;
    RMatrix sens;
    integ.run_sensitivity(0.0, dt, steps, r, sens, nullptr);
    REQUIRE(sens.cols() == m.num_params());
    for (int p = 0; p < m.num_params(); ++p) {
      const double h = 1e-6;
      RVector up = m.params(), dn = m.params();
      up(p) += h;
      dn(p) -= h;
      const CoefficientModel mu = m.with_params(up), md = m.with_params(dn);
      RVector ru = r0, rd = r0;
      Integrator(mu, pulse, cfg).run(0.0, dt, steps, ru, nullptr);
      Integrator(md, pulse, cfg).run(0.0, dt, steps, rd, nullptr);
      const RVector fd = (ru - rd) / (2.0 * h);
      CHECK((sens.col(p) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
    }
  }
}
