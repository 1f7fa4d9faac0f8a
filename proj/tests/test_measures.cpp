#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "models.hpp"
#include "oracles.hpp"
#include "wcp/measures.hpp"

using namespace wcp;
namespace models = testing_models;

namespace {

CesaroConfig cesaro(double horizon, int n = 1) {
  CesaroConfig c;
  c.x0 = Vec::Zero(1);
  c.n = n;
  c.lattice_step = 1.0;
  c.horizon = horizon;
  c.dt = 0.05;
  return c;
}

const DiscreteDomain& ou_grid() {
  static const DiscreteDomain dom = build_grid(1, 6.0, 201, Boundary::dirichlet);
  return dom;
}

const MeasureSystem& scalar_system() {
  static const MeasureSystem ms = cesaro_measures(models::ou_scalar(0.5, 1.0), ou_grid(), cesaro(40.0));
  return ms;
}

const MeasureSystem& coupled_system(int anchor) {
  static std::map<int, MeasureSystem> cache;
  auto it = cache.find(anchor);
  if (it == cache.end()) {
    auto c = cesaro(40.0);
    c.anchor = anchor;
    it = cache.emplace(anchor, cesaro_measures(models::ou(2, 0.5, 1.0, models::oracle_coupling()), ou_grid(), c)).first;
  }
  return it->second;
}

Vec normal_masses(const DiscreteDomain& dom, const Vec& weights, double var) {
  const int m = static_cast<int>(weights.size());
  Vec out(dom.unknowns(m));
  for (int k = 0; k < m; ++k)
    for (int p = 0; p < dom.points(); ++p)
      out(dom.index(k, p)) = weights(k) * oracle::normal_cell_mass(dom.coord(p), dom.dx, var);
  return out;
}

}  // namespace

TEST(Distances, TotalVariationAndIntegration) {
  Vec a(3), b(3);
  a << 0.5, 0.5, 0.0;
  b << 0.0, 0.5, 0.5;
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 0.5);
  EXPECT_DOUBLE_EQ(tv_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(integrate(a, Vec::Constant(3, 2.0)), 2.0);
  EXPECT_NEAR(lp_norm_measure(a, Vec::Constant(3, -3.0), 2.0), 3.0, 1e-12);
  EXPECT_THROW(tv_distance(a, Vec::Zero(2)), ConfigError);
  Vec bad = Vec::Zero(3);
  bad(1) = std::nan("");
  EXPECT_THROW(integrate(a, bad), ConfigError);
}

TEST(TestFunctions, UnitSupNormAndSeeded) {
  const auto dom = build_grid(2, 2.0, 21, Boundary::dirichlet);
  auto fs = random_test_functions(dom, 2, 10, 42);
  ASSERT_EQ(fs.size(), 10u);
  for (const auto& f : fs) EXPECT_DOUBLE_EQ(f.cwiseAbs().maxCoeff(), 1.0);
  auto again = random_test_functions(dom, 2, 10, 42);
  for (std::size_t i = 0; i < fs.size(); ++i) EXPECT_TRUE(fs[i] == again[i]);
  EXPECT_FALSE(random_test_functions(dom, 2, 1, 43).front() == fs.front());
}

TEST(Cesaro, ScalarLimitIsTheInvariantGaussian) {
  const auto& ms = scalar_system();
  const auto& mu = ms.at(0.0);
  EXPECT_GE(mu.minCoeff(), 0.0);
  EXPECT_NEAR(mu.sum(), 1.0, 1e-3);
  // the Cesaro average approaches N(0, q / gamma) at rate 1 / horizon
  EXPECT_LT(tv_distance(mu, normal_masses(ou_grid(), Vec::Ones(1), 0.5)), 1e-2);
  EXPECT_FALSE(ms.trivial);
  EXPECT_TRUE(ms.converged);
}

TEST(Cesaro, CoupledLimitFactorsThroughTheLeftNullVector) {
  const auto& ms = coupled_system(0);
  const Vec w = oracle::left_null_vector(models::oracle_coupling());
  EXPECT_NEAR(w(0), 1.0 / 3.0, 1e-12);
  EXPECT_LT(tv_distance(ms.at(0.0), normal_masses(ou_grid(), w, 0.5)), 2e-2);
}

TEST(Cesaro, AnchorComponentDoesNotMatter) {
  EXPECT_LT(tv_distance(coupled_system(0).at(0.0), coupled_system(1).at(0.0)), 2e-2);
}

TEST(Cesaro, InvarianceResidualIsSmall) {
  const auto& ms = scalar_system();
  const StepSettings st{0.0, Scheme::implicit_euler, false};
  auto fs = random_test_functions(ou_grid(), 1, 5, 7);
  fs.push_back(Vec::Ones(ou_grid().points()));
  for (const auto& f : fs) EXPECT_LT(invariance_residual(ms, models::ou_scalar(0.5, 1.0), f, 0.0, 1.0, st), 1e-2);
}

TEST(Cesaro, MeasureLpBoundHolds) {
  const auto& ms = coupled_system(0);
  const auto model = models::ou(2, 0.5, 1.0, models::oracle_coupling());
  const StepSettings st{0.0, Scheme::implicit_euler, false};
  const double K = compute_Kbar(model, make_samples(1, 6.0, {0.0}, 41)).K;
  auto fs = random_test_functions(ou_grid(), 2, 5, 3);
  for (double p : {1.0, 2.0, 4.0}) EXPECT_TRUE(check_measure_lp_bound(ms, model, p, fs, 0.0, 1.0, K, st).pass) << p;
}

TEST(Cesaro, ExtraTimesInterpolateTheLattice) {
  auto c = cesaro(20.0);
  c.extra_times = {0.5};
  auto ms = cesaro_measures(models::ou_scalar(0.5, 1.0), ou_grid(), c);
  ASSERT_EQ(ms.times.size(), 3u);
  EXPECT_DOUBLE_EQ(ms.times[1], 0.5);
  EXPECT_NEAR(ms.total_mass(0.5), ms.total_mass(1.0), 1e-3);
  c.extra_times = {3.0};
  EXPECT_THROW(cesaro_measures(models::ou_scalar(0.5, 1.0), ou_grid(), c), ConfigError);
  EXPECT_THROW(ms.at(0.25), ConfigError);
}

TEST(Cesaro, RejectsBadConfigurations) {
  auto c = cesaro(1.0, 1);
  EXPECT_THROW(cesaro_measures(models::ou_scalar(), ou_grid(), c), ConfigError);
  c = cesaro(20.0);
  c.anchor = 1;
  EXPECT_THROW(cesaro_measures(models::ou_scalar(), ou_grid(), c), ConfigError);
  c = cesaro(20.1);
  EXPECT_THROW(cesaro_measures(models::ou_scalar(), ou_grid(), c), ConfigError);
}

TEST(Cesaro, DissipativeCouplingGivesATrivialLimit) {
  const auto rc = models::shipped("compact_polynomial");
  ASSERT_TRUE(rc.measures.has_value());
  auto ms = cesaro_measures(rc.model, rc.domain(), *rc.measures);
  EXPECT_TRUE(ms.trivial);
  for (double q : ms.mass_ratio) EXPECT_LT(q, 0.75);
}

TEST(Projection, PartitionCoversTheGridOnce) {
  const auto& ms = scalar_system();
  auto part = uniform_partition(ms.dom, ms.at(0.0), 1, 7);
  std::set<int> seen;
  std::size_t count = 0;
  for (const auto& cell : part) {
    count += cell.size();
    seen.insert(cell.begin(), cell.end());
  }
  EXPECT_EQ(count, static_cast<std::size_t>(ms.dom.points()));
  EXPECT_EQ(seen.size(), count);
}

TEST(Projection, IdempotentAndMassPreserving) {
  const auto& ms = scalar_system();
  auto part = uniform_partition(ms.dom, ms.at(0.0), 1, 10);
  const Vec f = random_test_functions(ms.dom, 1, 1, 5).front();
  const Vec pf = finite_rank_projection(ms, 0.0, part, f);
  EXPECT_LT((finite_rank_projection(ms, 0.0, part, pf) - pf).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(integrate(ms.at(0.0), pf), integrate(ms.at(0.0), f), 1e-12);
  const Vec ones = Vec::Ones(ms.dom.points());
  EXPECT_LT((finite_rank_projection(ms, 0.0, part, ones) - ones).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, EpsilonNetOnTheCoupledSystem) {
  const auto& ms = coupled_system(0);
  const auto model = models::ou(2, 0.5, 1.0, models::oracle_coupling());
  for (double eps : {0.2, 0.1}) {
    auto v = epsilon_net_experiment(ms, model, 0.0, 1.0, eps, 2.0, 20, 9, StepSettings{0.0, Scheme::implicit_euler, false});
    EXPECT_TRUE(v.pass) << eps;
    EXPECT_LE(v.extra["sup_error"].get<double>(), eps);
  }
}
