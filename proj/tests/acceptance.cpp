// Acceptance run: one PASS/FAIL line per criterion, details indented below it.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "models.hpp"
#include "oracles.hpp"
#include "wcp/kernels.hpp"
#include "wcp/measures.hpp"
#include "wcp/pipeline.hpp"

using namespace wcp;
namespace models = testing_models;

namespace {

struct Item {
  std::string label;
  bool pass;
  std::string detail;
};

class Criterion {
 public:
  explicit Criterion(int id) : id_(id), t0_(std::chrono::steady_clock::now()) {}

  void item(const std::string& label, bool pass, const std::string& detail) { items_.push_back({label, pass, detail}); }

  template <class... T>
  static std::string fmt(const T&... parts) {
    std::ostringstream os;
    os << std::setprecision(4);
    (os << ... << parts);
    return os.str();
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

  bool report(const std::string& title) const {
    bool ok = !items_.empty();
    for (const auto& i : items_) ok = ok && i.pass;
    std::cout << "criterion " << id_ << ": " << (ok ? "PASS" : "FAIL") << " " << title << " (" << std::fixed
              << std::setprecision(1) << elapsed() << " s)\n"
              << std::defaultfloat;
    for (const auto& i : items_) std::cout << "    [" << (i.pass ? "ok" : "FAIL") << "] " << i.label << ": " << i.detail << "\n";
    std::cout.flush();
    return ok;
  }

 private:
  int id_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<Item> items_;
};

Vec gaussian(const Vec& x) { return Vec::Constant(1, std::exp(-0.5 * x.squaredNorm())); }

double bump(const Vec& x, double r) {
  const double q = x.squaredNorm() / (r * r);
  return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
}

const std::vector<std::string> kShipped{"compact_polynomial", "c0_preserving", "irreducible_growing", "growing_rowsum",
                                        "ou_oracle"};

// Runs one named check and returns its verdicts, or a skip reason.
std::vector<VerifyEntry> verify_one(const RunConfig& rc, const std::string& name) {
  return run_verify(rc, name, 1, 12345);
}

void add_entries(Criterion& c, const std::string& prefix, const std::vector<VerifyEntry>& entries) {
  for (const auto& e : entries) {
    if (e.skipped) {
      c.item(prefix + e.check, false, "skipped: " + e.reason);
      continue;
    }
    c.item(prefix + e.verdict.name, e.verdict.pass,
           Criterion::fmt("measured ", e.verdict.measured, " bound ", e.verdict.bound, " tol ", e.verdict.tol));
  }
}

// ------------------------------------------------------------ criteria

bool oracle_equivalence() {
  Criterion c(1);
  const Mat C = models::oracle_coupling();
  const auto model = models::ou(2, 1.0, 1.0, C);
  const auto dom = build_grid(1, 8.0, 201, Boundary::dirichlet);
  Vec v(2);
  v << 1.0, 0.5;
  EvolveConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 5e-3;
  cfg.scheme = Scheme::theta;
  const auto t0 = std::chrono::steady_clock::now();
  auto f = StateField::sample(dom, 2, 0.0, [&](const Vec& x) -> Vec { return v * gaussian(x)(0); });
  auto u = evolve(model, dom, cfg, f).back();
  const double run = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Vec w = oracle::expm(C) * v;
  double err = 0.0, sup = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int p : inner_window(dom)) {
      const double o = w(k) * oracle::ou_gaussian(dom.coord(p), 1.0, 1.0, 1.0, 1.0);
      sup = std::max(sup, std::abs(o));
      err = std::max(err, std::abs(u.at(k, p) - o));
    }
  c.item("relative sup error, N=201, L=8", err / sup <= 1e-3, Criterion::fmt(err / sup, " <= 1e-3"));
  c.item("runtime", run < 30.0, Criterion::fmt(run, " s < 30 s"));
  return c.report("coupled OU system matches e^{tC} times the scalar semigroup");
}

bool maximum_principle() {
  Criterion c(2);
  const auto rc = models::shipped("irreducible_growing");
  const auto dom = rc.domain();
  const auto cert = run_check(rc).report;
  const auto fs = random_test_functions(dom, rc.model.m, 50, 2024);
  double worst = -1e300;
  bool all = true;
  for (const auto& g : fs) {
    StateField f = StateField::zeros(dom, rc.model.m, rc.evolve.s);
    f.values = -g.cwiseAbs();
    auto v = check_max_principle(trajectory(rc.model, dom, rc.evolve_config(), f), cert);
    worst = std::max(worst, v.measured);
    all = all && v.pass;
  }
  c.item("50 nonpositive data", all && worst <= 1e-8, Criterion::fmt("max field value ", worst, " <= 1e-8"));
  StateField g = StateField::sample(dom, rc.model.m, rc.evolve.s, [&](const Vec& x) {
    return Vec(Vec::Constant(rc.model.m, bump(x, 1.0)));
  });
  auto neg = check_max_principle(trajectory(rc.model, dom, rc.evolve_config(), g), cert);
  c.item("negative control (positive bump) fails", !neg.pass, Criterion::fmt("max field value ", neg.measured));
  c.item("runtime", c.elapsed() < 60.0, Criterion::fmt(c.elapsed(), " s < 60 s"));
  return c.report("nonpositive data stay nonpositive");
}

bool sup_estimate() {
  Criterion c(3);
  for (const auto& name : kShipped) {
    const auto rc = models::shipped(name);
    try {
      const double K = compute_Kbar(rc.model, rc.samples()).K;
      const auto dom = rc.domain();
      auto f = StateField::sample(dom, rc.model.m, rc.evolve.s, rc.evolve.initial.function());
      auto v = check_sup_estimate(trajectory(rc.model, dom, rc.evolve_config(), f), K);
      c.item(name, v.pass, Criterion::fmt("ratio ", v.measured, " <= 1 + 5e-3, K = ", K));
    } catch (const MissingCertificate& e) {
      // the refusal is the required behaviour for an unbounded row sum
      const bool expected = name == "growing_rowsum";
      c.item(name, expected, std::string("K refused: ") + e.what());
    }
  }
  return c.report("sup norm grows at most like e^{K(t-s)}");
}

bool strict_positivity() {
  Criterion c(4);
  const auto rc = models::shipped("irreducible_growing");
  const auto dom = rc.domain();
  auto f = StateField::sample(dom, 4, 0.0, [](const Vec& x) {
    Vec v = Vec::Zero(4);
    v(0) = bump(x, 1.5);
    return v;
  });
  auto traj = trajectory(rc.model, dom, rc.evolve_config(), f);
  double mn = 1e300;
  for (const auto& u : traj) {
    if (u.t < 0.05 - 1e-12) continue;
    for (int k = 0; k < 4; ++k)
      for (int p : inner_window(dom)) mn = std::min(mn, u.at(k, p));
  }
  c.item("all components, t - s >= 0.05", mn > 0.0, Criterion::fmt("min ", mn, " > 0"));
  Mat diag = Mat::Zero(4, 4);
  diag.diagonal() = models::irreducible_matrix().diagonal();
  auto decoupled = trajectory(models::linear_weight(diag), dom, rc.evolve_config(), f);
  double leak = 0.0;
  for (const auto& u : decoupled)
    for (int k = 1; k < 4; ++k)
      for (int p = 0; p < dom.points(); ++p) leak = std::max(leak, std::abs(u.at(k, p)));
  c.item("decoupled control", leak <= 1e-12, Criterion::fmt("max |u_k|, k > 0: ", leak, " <= 1e-12"));
  return c.report("irreducible coupling makes every component positive");
}

bool lyapunov_bound() {
  Criterion c(5);
  const auto dom = build_grid(1, 8.0, 201, Boundary::dirichlet);
  auto v = check_lyapunov_bound(models::ou_scalar(), dom, 0.0, {0.5, 1.0, 2.0}, quadratic_lyapunov(), 4.0, 2.0,
                                StepSettings{0.01, Scheme::theta, false});
  c.item("OU, (a, c) = (4, 2)", v.pass, Criterion::fmt("max excess ", v.measured, " <= ", v.tol));
  add_entries(c, "polynomial model, fitted constants: ", verify_one(models::shipped("compact_polynomial"), "lyapunov_bound"));
  return c.report("G(t,s)(phi 1) <= phi + a/c");
}

bool tightness() {
  Criterion c(6);
  const auto rc = models::shipped("compact_polynomial");
  auto entries = verify_one(rc, "tightness");
  add_entries(c, "", entries);
  const double r_far = 0.75 * rc.grid.L;
  for (const auto& e : entries) {
    if (e.skipped || e.verdict.name != "tightness_monotone") continue;
    const auto rs = e.verdict.extra["r"].get<std::vector<double>>();
    std::size_t idx = rs.size();
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (std::abs(rs[i] - r_far) < 1e-12) idx = i;
    if (idx == rs.size()) {
      c.item("tail at r = 0.75 L", false, "radius missing from the profile");
      continue;
    }
    double worst = 0.0;
    for (const auto& row : e.verdict.extra["profile"]) worst = std::max(worst, row["max_tail"][idx].get<double>());
    c.item("tail at r = 0.75 L", worst < 1e-2, Criterion::fmt(worst, " < 1e-2"));
  }
  return c.report("tail masses are monotone, small and below the Lyapunov envelope");
}

bool ode_envelope() {
  Criterion c(7);
  for (const char* name : {"compact_polynomial", "c0_preserving"}) {
    const auto rc = models::shipped(name);
    if (!rc.model.polynomial->tau(0).value()) continue;
    add_entries(c, std::string(name) + ": ", verify_one(rc, "ode_envelope"));
  }
  double worst = 0.0;
  for (double y0 : {0.5, 1.0, 5.0, 50.0})
    for (double c0 : {0.1, 1.0})
      for (double b : {0.1, 0.5, 1.0})
        worst = std::max(worst, std::abs(ode_comparison_envelope([](double y) { return y * y; }, c0, y0, b) -
                                         oracle::quadratic_decay(y0, c0, b)));
  c.item("h(y) = y^2 integrator vs closed form", worst <= 1e-8, Criterion::fmt(worst, " <= 1e-8"));
  return c.report("superlinear dissipation bounds G(s+delta,s)(phi 1) by the ODE solution");
}

bool l2_estimate() {
  Criterion c(8);
  const auto model = models::ou_scalar();
  const auto g = compute_gamma(model, make_samples(1, 8.0, {0.0}, 41));
  c.item("OU Gamma", std::abs(g.gamma - 1.0) < 1e-12, Criterion::fmt(g.gamma, " = 1"));
  const auto dom = build_grid(1, 8.0, 201, Boundary::dirichlet);
  EvolveConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 5e-3;
  cfg.scheme = Scheme::theta;
  auto v = check_L2_estimate(trajectory(model, dom, cfg, StateField::sample(dom, 1, 0.0, gaussian)), g.gamma);
  c.item("OU Gaussian", v.pass, Criterion::fmt("ratio ", v.measured, " <= 1 + 1e-2"));
  add_entries(c, "ou_oracle config: ", verify_one(models::shipped("ou_oracle"), "L2_estimate"));
  return c.report("L2 norm grows at most like e^{Gamma(t-s)/2}");
}

bool gradient_bound() {
  Criterion c(9);
  const auto dom = build_grid(1, 8.0, 401, Boundary::dirichlet);
  EvolveConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 5e-3;
  cfg.scheme = Scheme::theta;
  auto f = StateField::sample(dom, 1, 0.0, [](const Vec& x) { return Vec::Constant(1, std::sin(x(0))); });
  auto v = check_gradient_envelope(trajectory(models::ou_scalar(), dom, cfg, f),
                                   [](double t) { return std::exp(-t); }, 2e-3);
  c.item("OU, f = sin", v.pass, Criterion::fmt("max excess over e^{-t}: ", v.measured, " <= 2e-3"));
  add_entries(c, "polynomial model: ", verify_one(models::shipped("compact_polynomial"), "gradient_bound"));
  return c.report("gradients stay bounded");
}

bool invariant_measures() {
  Criterion c(10);
  const auto dom = build_grid(1, 6.0, 201, Boundary::dirichlet);
  CesaroConfig cc;
  cc.x0 = Vec::Zero(1);
  cc.n = 0;
  cc.horizon = 20.0;
  cc.dt = 0.05;
  auto normal = [&](const Vec& w) {
    Vec out(dom.unknowns(static_cast<int>(w.size())));
    for (int k = 0; k < w.size(); ++k)
      for (int p = 0; p < dom.points(); ++p)
        out(dom.index(k, p)) = w(k) * oracle::normal_cell_mass(dom.coord(p), dom.dx, 0.5);
    return out;
  };
  auto scalar = cesaro_measures(models::ou_scalar(0.5, 1.0), dom, cc);
  const double tv1 = tv_distance(scalar.at(0.0), normal(Vec::Ones(1)));
  c.item("m = 1 vs N(0, 1/2), r = 20", tv1 <= 1e-2, Criterion::fmt("TV ", tv1, " <= 1e-2"));

  // The component chain adds its own O(1/r) Cesaro bias, about 0.02 at r = 20, so the coupled
  // comparison uses r = 40.
  const Mat C = models::oracle_coupling();
  cc.horizon = 40.0;
  auto coupled = cesaro_measures(models::ou(2, 0.5, 1.0, C), dom, cc);
  const double tv2 = tv_distance(coupled.at(0.0), normal(oracle::left_null_vector(C)));
  c.item("m = 2 vs w x N(0, 1/2), r = 40", tv2 <= 2e-2, Criterion::fmt("TV ", tv2, " <= 2e-2"));

  for (const auto& e : verify_one(models::shipped("ou_oracle"), "measures"))
    if (e.skipped || e.verdict.name == "invariance_residual" || e.verdict.name == "measure_convergence")
      add_entries(c, "ou_oracle config: ", {e});
  c.item("runtime", c.elapsed() < 600.0, Criterion::fmt(c.elapsed(), " s < 600 s single core"));
  return c.report("Cesaro averages converge to the invariant measures");
}

bool measure_lp_bound() {
  Criterion c(11);
  for (const auto& e : verify_one(models::shipped("ou_oracle"), "measures"))
    if (e.skipped || e.verdict.name.rfind("measure_lp_bound", 0) == 0 || e.verdict.name.rfind("finite_rank", 0) == 0)
      add_entries(c, "", {e});
  return c.report("L^p(mu) bound and finite-rank approximation");
}

bool exhaustion() {
  Criterion c(12);
  const auto model = models::ou(2, 1.0, 1.0, models::oracle_coupling());
  auto f = [](const Vec& x) {
    Vec v(2);
    v << bump(x, 1.0), 0.5 * bump(x, 1.0);
    return v;
  };
  const double tol = 1e-4;
  std::vector<LadderRung> ladder{{2.0, 51}, {4.0, 101}, {6.0, 151}, {8.0, 201}};
  auto run = [&](Boundary bc) {
    return exhaustion_solve(model, f, 0.0, 1.0, ladder, 1.0, tol, bc, 5e-3, Scheme::theta, false);
  };
  auto dir = run(Boundary::dirichlet);
  auto neu = run(Boundary::neumann);
  const double gap = (dir.inner_values.back() - neu.inner_values.back()).cwiseAbs().maxCoeff();
  c.item("Dirichlet vs Neumann on |x| <= 1", gap <= 2.0 * tol, Criterion::fmt(gap, " <= 2e-4"));
  for (const auto* rep : {&dir, &neu}) {
    bool dec = rep->deltas.size() >= 2;
    std::string ds;
    for (std::size_t i = 0; i < rep->deltas.size(); ++i) {
      ds += Criterion::fmt(i ? ", " : "", rep->deltas[i]);
      if (i > 0) dec = dec && rep->deltas[i] < rep->deltas[i - 1];
    }
    c.item(rep == &dir ? "Dirichlet deltas strictly decreasing" : "Neumann deltas strictly decreasing", dec, ds);
  }
  return c.report("exhaustion ladders converge");
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria{
      oracle_equivalence, maximum_principle, sup_estimate, strict_positivity, lyapunov_bound, tightness,
      ode_envelope,       l2_estimate,       gradient_bound, invariant_measures, measure_lp_bound, exhaustion};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      failed += criteria[i]() ? 0 : 1;
    } catch (const std::exception& e) {
      std::cout << "criterion " << i + 1 << ": FAIL unexpected error: " << e.what() << "\n";
      ++failed;
    }
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
