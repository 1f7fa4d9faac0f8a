#include <gtest/gtest.h>

#include <cmath>

#include "models.hpp"
#include "oracles.hpp"
#include "wcp/solver.hpp"
#include "wcp/verify.hpp"

using namespace wcp;
namespace models = testing_models;

namespace {

Vec one(double v) { return Vec::Constant(1, v); }

EvolveConfig theta_config(double t_end, double dt) {
  EvolveConfig cfg;
  cfg.t_end = t_end;
  cfg.dt = dt;
  cfg.scheme = Scheme::theta;
  return cfg;
}

}  // namespace

TEST(StepGrid, RoundsUpToWholeSteps) {
  auto [n, dt] = step_grid(0.0, 1.0, 0.3);
  EXPECT_EQ(n, 4);
  EXPECT_DOUBLE_EQ(dt, 0.25);
  EXPECT_EQ(step_grid(0.0, 1.0, 0.1).first, 10);
  EXPECT_THROW(step_grid(1.0, 1.0, 0.1), ConfigError);
  EXPECT_THROW(step_grid(0.0, 1.0, 0.0), ConfigError);
}

TEST(Evolve, ScalarGaussianMatchesClosedForm) {
  const auto model = models::ou_scalar();
  const auto dom = build_grid(1, 8.0, 201, Boundary::dirichlet);
  auto f = StateField::sample(dom, 1, 0.0, [](const Vec& x) { return one(std::exp(-0.5 * x(0) * x(0))); });
  auto cfg = theta_config(1.0, 0.005);
  cfg.record_times = {0.5, 1.0};
  auto out = evolve(model, dom, cfg, f);
  ASSERT_EQ(out.size(), 2u);
  for (const auto& u : out) {
    double err = 0.0;
    for (int p : inner_window(dom))
      err = std::max(err, std::abs(u.at(0, p) - oracle::ou_gaussian(dom.coord(p), u.t, 1.0, 1.0, 1.0)));
    EXPECT_LT(err, 1e-3) << "t=" << u.t;
  }
}

TEST(Evolve, CoupledSystemFactorsThroughTheMatrixExponential) {
  const Mat c = models::oracle_coupling();
  const auto model = models::ou(2, 1.0, 1.0, c);
  // the inward drift carries the boundary truncation deep into the box, so L = 8
  const auto dom = build_grid(1, 8.0, 201, Boundary::dirichlet);
  Vec v(2);
  v << 1.0, 0.5;
  auto f = StateField::sample(dom, 2, 0.0, [&](const Vec& x) -> Vec { return v * std::exp(-0.5 * x(0) * x(0)); });
  auto u = evolve(model, dom, theta_config(1.0, 0.005), f).back();
  const Vec w = oracle::expm(c) * v;
  double err = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int p : inner_window(dom))
      err = std::max(err, std::abs(u.at(k, p) - w(k) * oracle::ou_gaussian(dom.coord(p), 1.0, 1.0, 1.0, 1.0)));
  EXPECT_LT(err, 1e-3);
}

TEST(Evolve, ImplicitEulerIsFirstOrder) {
  const auto model = models::ou_scalar();
  const auto dom = build_grid(1, 6.0, 121, Boundary::dirichlet);
  auto f = StateField::sample(dom, 1, 0.0, [](const Vec& x) { return one(std::exp(-0.5 * x(0) * x(0))); });
  auto error_at = [&](double dt) {
    EvolveConfig cfg;
    cfg.t_end = 0.5;
    cfg.dt = dt;
    auto fine = evolve(model, dom, theta_config(0.5, 0.0005), f).back();
    auto u = evolve(model, dom, cfg, f).back();
    return (u.values - fine.values).cwiseAbs().maxCoeff();
  };
  const double ratio = error_at(0.02) / error_at(0.01);
  EXPECT_GT(ratio, 1.7);
  EXPECT_LT(ratio, 2.3);
}

TEST(Evolve, StepFunctionAgreesWithThePropagator) {
  const auto model = models::linear_weight(models::irreducible_matrix());
  const auto dom = build_grid(1, 3.0, 31, Boundary::dirichlet);
  auto f = StateField::sample(dom, 4, 0.0, [](const Vec& x) {
    Vec v(4);
    v << std::cos(x(0)), 1.0, x(0), 0.0;
    return v;
  });
  for (Scheme sch : {Scheme::implicit_euler, Scheme::theta}) {
    auto gen_at = [&](double t) { return assemble_generator(model, dom, t, true); };
    StateField a = step(gen_at, f, 0.1, sch);
    Propagator prop(model, dom, 0.1, sch, true);
    Vec b = f.values;
    prop.advance(b, 0.0);
    EXPECT_LT((a.values - b).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_DOUBLE_EQ(a.t, 0.1);
  }
}

TEST(Evolve, AdjointStepIsTheTranspose) {
  const auto rc = models::shipped("compact_polynomial");
  const auto dom = build_grid(1, 3.0, 41, Boundary::dirichlet);
  Propagator prop(rc.model, dom, 0.05, Scheme::theta, true);
  const int n = prop.size();
  Vec u = Vec::LinSpaced(n, -1.0, 2.0).array().sin();
  Vec r = Vec::LinSpaced(n, 0.0, 5.0).array().cos();
  Vec su = u, str = r;
  prop.advance(su, 0.2);
  prop.advance_adjoint(str, 0.2);
  EXPECT_NEAR(su.dot(r), u.dot(str), 1e-12 * (1.0 + std::abs(su.dot(r))));
}

TEST(Evolve, IsDeterministic) {
  const auto rc = models::shipped("irreducible_growing");
  const auto dom = rc.domain();
  auto f = StateField::sample(dom, rc.model.m, 0.0, rc.evolve.initial.function());
  auto a = evolve(rc.model, dom, rc.evolve_config(), f).back();
  auto b = evolve(rc.model, dom, rc.evolve_config(), f).back();
  EXPECT_TRUE(a.values == b.values);
}

TEST(Evolve, RejectsBadInput) {
  const auto model = models::ou_scalar();
  const auto dom = build_grid(1, 2.0, 21, Boundary::dirichlet);
  auto f = StateField::zeros(dom, 1, 0.0);
  auto cfg = theta_config(1.0, 0.1);
  cfg.record_times = {0.33};
  EXPECT_THROW(evolve(model, dom, cfg, f), ConfigError);
  f.values(3) = std::nan("");
  EXPECT_THROW(evolve(model, dom, theta_config(1.0, 0.1), f), NumericError);
  EXPECT_THROW(evolve(model, dom, theta_config(1.0, 0.1), StateField::zeros(dom, 2, 0.0)), ConfigError);
  EXPECT_THROW(evolve(model, dom, theta_config(1.0, 0.1), StateField::zeros(dom, 1, 0.5)), ConfigError);
}

TEST(Exhaustion, NestedBoxesConverge) {
  const auto model = models::ou_scalar();
  auto f = [](const Vec& x) { return one(std::exp(-0.5 * x(0) * x(0))); };
  std::vector<LadderRung> ladder{{1.5, 51}, {3.0, 101}, {4.5, 151}, {6.0, 201}};
  for (Boundary bc : {Boundary::dirichlet, Boundary::neumann}) {
    auto rep = exhaustion_solve(model, f, 0.0, 1.0, ladder, 1.0, 1e-4, bc, 0.01, Scheme::theta, false, 2);
    ASSERT_EQ(rep.deltas.size(), 3u);
    for (std::size_t i = 1; i < rep.deltas.size(); ++i) EXPECT_LT(rep.deltas[i], rep.deltas[i - 1]);
    EXPECT_TRUE(rep.converged);
  }
}

TEST(Exhaustion, LadderMustKeepTheSpacing) {
  const auto model = models::ou_scalar();
  auto f = [](const Vec&) { return one(1.0); };
  EXPECT_THROW(exhaustion_solve(model, f, 0.0, 1.0, {{1.0, 21}, {2.0, 21}}, 0.5, 1e-4, Boundary::dirichlet, 0.1,
                                Scheme::theta, false),
               ConfigError);
  EXPECT_THROW(exhaustion_solve(model, f, 0.0, 1.0, {{1.0, 21}, {2.0, 41}}, 1.5, 1e-4, Boundary::dirichlet, 0.1,
                                Scheme::theta, false),
               ConfigError);
}

TEST(Kbar, ConstantCouplingIsItsOwnBound) {
  const Mat c = models::oracle_coupling();
  auto res = compute_Kbar(models::ou(2, 1.0, 1.0, c), make_samples(1, 5.0, {0.0}, 41));
  EXPECT_LT((res.cbar - c).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> eig(c.transpose() * c);
  EXPECT_NEAR(res.K, std::sqrt(eig.eigenvalues().maxCoeff()), 1e-12);
}

TEST(Kbar, PolynomialRowSumsAreTakenAtTheOrigin) {
  const auto rc = models::shipped("compact_polynomial");
  auto res = compute_Kbar(rc.model, rc.samples());
  EXPECT_TRUE(res.exact);
  Mat expect(2, 2);
  expect << -2.0, 1.0, 1.0, -2.0;
  EXPECT_LT((res.cbar - expect).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(res.K, 3.0, 1e-9);
}

TEST(Kbar, RefusesGrowingRowSums) {
  EXPECT_THROW(compute_Kbar(models::linear_weight(models::growing_rowsum_matrix()), make_samples(1, 5.0, {0.0}, 41)),
               MissingCertificate);
  EXPECT_NO_THROW(compute_Kbar(models::linear_weight(models::irreducible_matrix()), make_samples(1, 5.0, {0.0}, 41)));
}

TEST(Kbar, SupEstimateHoldsOnTheOracleSystem) {
  const auto model = models::ou(2, 1.0, 1.0, models::oracle_coupling());
  const auto dom = build_grid(1, 5.0, 101, Boundary::dirichlet);
  const double K = compute_Kbar(model, make_samples(1, 5.0, {0.0}, 41)).K;
  auto f = StateField::sample(dom, 2, 0.0, [](const Vec& x) {
    Vec v(2);
    v << std::cos(3.0 * x(0)), -1.0;
    return v;
  });
  EXPECT_TRUE(check_sup_estimate(trajectory(model, dom, theta_config(1.0, 0.01), f), K).pass);
}
