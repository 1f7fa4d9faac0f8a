#include <gtest/gtest.h>

#include <cmath>

#include "models.hpp"
#include "wcp/discretization.hpp"

using namespace wcp;
namespace models = testing_models;

namespace {

CoefficientModel planar_model(double cross) {
  PolynomialModelSpec s;
  s.d = 2;
  s.m = 1;
  s.omega = {{{TimeFunction::constant(1.0), TimeFunction::constant(cross)},
              {TimeFunction::constant(cross), TimeFunction::constant(1.0)}}};
  s.h_exp = {{{Rational{0, 1}, Rational{0, 1}}, {Rational{0, 1}, Rational{0, 1}}}};
  s.gamma = {{TimeFunction::constant(1.0), TimeFunction::constant(1.0)}};
  s.ell_exp = {{Rational{0, 1}, Rational{0, 1}}};
  s.dmat = {{TimeFunction::constant(0.0)}};
  s.sigma_exp = {{Rational{0, 1}}};
  return build_polynomial_model(s);
}

Vec sample(const DiscreteDomain& dom, int m, const std::function<double(const Vec&)>& f) {
  Vec v(dom.unknowns(m));
  for (int k = 0; k < m; ++k)
    for (int p = 0; p < dom.points(); ++p) v(dom.index(k, p)) = f(dom.point(p));
  return v;
}

}  // namespace

TEST(Grid, GeometryAndIndexing) {
  auto dom = build_grid(2, 2.0, 5, Boundary::dirichlet);
  EXPECT_DOUBLE_EQ(dom.dx, 1.0);
  EXPECT_EQ(dom.points(), 25);
  EXPECT_EQ(dom.unknowns(3), 75);
  EXPECT_EQ(dom.index(2, 7), 57);
  for (int p = 0; p < dom.points(); ++p) EXPECT_EQ(dom.flat(dom.multi(p)), p);
  EXPECT_EQ(dom.nearest(Vec::Constant(2, 0.4)), 12);
  EXPECT_EQ(dom.nearest(Vec::Constant(2, 99.0)), 24);
  EXPECT_TRUE(dom.on_boundary(0));
  EXPECT_FALSE(dom.on_boundary(12));
  EXPECT_EQ(dom.window(1.0).size(), 9u);
  EXPECT_DOUBLE_EQ(build_grid(1, 5.0, 101, Boundary::neumann).default_collar(), 0.5);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(build_grid(3, 1.0, 5, Boundary::dirichlet), ConfigError);
  EXPECT_THROW(build_grid(1, 1.0, 2, Boundary::dirichlet), ConfigError);
  EXPECT_THROW(build_grid(1, -1.0, 5, Boundary::dirichlet), ConfigError);
  EXPECT_THROW(boundary_from_string("periodic"), ConfigError);
}

TEST(Generator, CentralDifferencesAreExactOnQuadratics) {
  auto dom = build_grid(1, 3.0, 31, Boundary::dirichlet);
  auto gen = assemble_generator(models::ou_scalar(0.7, 1.3), dom, 0.0, false);
  Vec u = sample(dom, 1, [](const Vec& x) { return 1.0 + x(0) * x(0); });
  Vec lu = apply_generator(gen, u);
  for (int p = 2; p < dom.N - 2; ++p) {
    const double x = dom.coord(p);
    EXPECT_NEAR(lu(p), 2.0 * 0.7 - 2.0 * 1.3 * x * x, 1e-10);
  }
}

TEST(Generator, MixedDerivativeStencilIsExactOnBilinears) {
  auto dom = build_grid(2, 2.0, 21, Boundary::dirichlet);
  auto gen = assemble_generator(planar_model(0.3), dom, 0.0, false);
  Vec u = sample(dom, 1, [](const Vec& x) { return x(0) * x(1); });
  Vec lu = apply_generator(gen, u);
  for (int p = 0; p < dom.points(); ++p) {
    if (dom.on_boundary(p)) continue;
    auto mi = dom.multi(p);
    if (mi[0] == 1 || mi[1] == 1 || mi[0] == dom.N - 2 || mi[1] == dom.N - 2) continue;
    const Vec x = dom.point(p);
    EXPECT_NEAR(lu(p), 0.6 - 2.0 * x(0) * x(1), 1e-10);
  }
}

TEST(Generator, UpwindingRestoresTheSignPattern) {
  const auto rc = models::shipped("compact_polynomial");
  const auto dom = rc.domain();
  EXPECT_GE(min_offdiagonal(assemble_generator(rc.model, dom, 0.3, true)), 0.0);
  // central differences lose it where the drift dominates
  EXPECT_LT(min_offdiagonal(assemble_generator(rc.model, dom, 0.3, false)), 0.0);
  EXPECT_GE(min_offdiagonal(assemble_generator(models::linear_weight(models::irreducible_matrix()),
                                               build_grid(1, 5.0, 101, Boundary::dirichlet), 0.0, true)),
            0.0);
}

TEST(Generator, NeumannAnnihilatesConstantsForConservativeCoupling) {
  for (bool upwind : {false, true}) {
    auto dom = build_grid(1, 4.0, 81, Boundary::neumann);
    auto gen = assemble_generator(models::ou(2, 1.0, 1.0, models::oracle_coupling()), dom, 0.0, upwind);
    EXPECT_TRUE(gen.pinned.empty());
    Vec ones = Vec::Ones(dom.unknowns(2));
    EXPECT_LT(apply_generator(gen, ones).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Generator, DirichletPinsBoundaryUnknowns) {
  auto dom = build_grid(2, 1.0, 7, Boundary::dirichlet);
  auto gen = assemble_generator(planar_model(0.0), dom, 0.0, true);
  EXPECT_EQ(gen.matrix.rows(), dom.unknowns(1));
  EXPECT_EQ(static_cast<int>(gen.pinned.size()), 24);
  Mat dense = Mat(gen.matrix);
  for (int p = 0; p < dom.points(); ++p)
    if (dom.on_boundary(p)) {
      EXPECT_EQ(dense.row(p).cwiseAbs().sum(), 0.0);
      EXPECT_EQ(dense.col(p).cwiseAbs().sum(), 0.0);
    }
}

TEST(Generator, CouplingBlockSitsOnTheComponentIndex) {
  auto dom = build_grid(1, 2.0, 11, Boundary::neumann);
  const Mat c = models::irreducible_matrix();
  auto gen = assemble_generator(models::linear_weight(c), dom, 0.0, false);
  Mat dense = Mat(gen.matrix);
  const int p = 7;
  const double prof = std::abs(dom.coord(p)) + 1.0;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j) {
      if (j == k) continue;
      EXPECT_NEAR(dense(dom.index(k, p), dom.index(j, p)), prof * c(k, j), 1e-12);
    }
}

TEST(Generator, DimensionMismatchIsAConfigError) {
  EXPECT_THROW(assemble_generator(planar_model(0.0), build_grid(1, 1.0, 5, Boundary::dirichlet), 0.0, false),
               ConfigError);
}
