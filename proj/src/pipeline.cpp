#include "wcp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "wcp/kernels.hpp"

namespace wcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScalarJet bounded_weight_jet() {
  ScalarJet w = inverse_quadratic();
  auto f = w.f;
  w.f = [f](const Vec& x) { return 1.0 + f(x); };
  return w;
}

int stride_for(const RunConfig& rc, const DiscreteDomain& dom) {
  const double dt = rc.evolve.dt > 0.0 ? rc.evolve.dt : dom.dx;
  const int n = step_grid(rc.evolve.s, rc.evolve.t_end, dt).first;
  return std::max(1, n / 20);
}

struct Context {
  const RunConfig& rc;
  int jobs;
  std::uint64_t seed;
  DiscreteDomain dom;
  SampleSet samples;
  std::optional<CheckOutcome> check;
  std::optional<KbarResult> kbar;
  std::optional<MeasureSystem> measures;

  const CheckOutcome& certs() {
    if (!check) check = run_check(rc);
    return *check;
  }
  double K() {
    if (!kbar) kbar = compute_Kbar(rc.model, samples);
    return kbar->K;
  }
  const MeasureSystem& ms() {
    if (!rc.measures) throw MissingCertificate("no [measures] section in the config");
    if (!measures) measures = cesaro_measures(rc.model, dom, *rc.measures);
    return *measures;
  }
  StateField initial() const {
    return StateField::sample(dom, rc.model.m, rc.evolve.s, rc.evolve.initial.function());
  }
  void need(const std::string& name) {
    if (!certs().report.has_pass(name)) throw MissingCertificate("needs a passing '" + name + "' certificate");
  }
};

using CheckFn = std::function<std::vector<PropertyVerdict>(Context&)>;

std::vector<PropertyVerdict> one(PropertyVerdict v) { return {std::move(v)}; }

PropertyVerdict strict_positive(const std::string& name, double minimum, const Witness& w) {
  auto v = PropertyVerdict::make(name, -minimum, 0.0, 0.0, TolKind::absolute);
  v.pass = minimum > 0.0;
  v.witnesses.push_back(w);
  return v;
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"max_principle",
       [](Context& c) {
         c.certs();
         const auto fs = random_test_functions(c.dom, c.rc.model.m, 1, c.seed);
         StateField f = StateField::zeros(c.dom, c.rc.model.m, c.rc.evolve.s);
         f.values = -fs.front().cwiseAbs();
         auto traj = trajectory(c.rc.model, c.dom, c.rc.evolve_config(), f, stride_for(c.rc, c.dom));
         return one(check_max_principle(traj, c.certs().report));
       }},
      {"sup_estimate",
       [](Context& c) {
         const double K = c.K();
         auto traj = trajectory(c.rc.model, c.dom, c.rc.evolve_config(), c.initial(), stride_for(c.rc, c.dom));
         return one(check_sup_estimate(traj, K));
       }},
      {"lyapunov_bound",
       [](Context& c) {
         c.need("lyapunov_dissipative");
         const auto& k = c.certs().report.constants;
         return one(check_lyapunov_bound(c.rc.model, c.dom, c.rc.evolve.s, {c.rc.evolve.t_end}, quadratic_lyapunov(),
                                         k["a"].get<double>(), k["c"].get<double>(), c.rc.step_settings()));
       }},
      {"lower_bound_c0",
       [](Context& c) {
         return one(check_lower_bound_c0(c.rc.model, c.dom, c.rc.evolve.s, c.rc.evolve.t_end, c.rc.step_settings()));
       }},
      {"ode_envelope",
       [](Context& c) {
         c.need("superlinear_dissipation");
         const auto& spec = *c.rc.model.polynomial;
         std::vector<double> tau;
         for (int k = 0; k < spec.m; ++k) tau.push_back(spec.tau(k).value());
         auto h = fit_comparison_functions(c.rc.model, quadratic_lyapunov(), tau, c.samples);
         const auto& deltas = c.rc.verify.deltas;
         const double dmax = *std::max_element(deltas.begin(), deltas.end());
         auto lb = check_lower_bound_c0(c.rc.model, c.dom, c.rc.evolve.s, c.rc.evolve.s + dmax, c.rc.step_settings());
         const double c0 = lb.extra["c0"].get<double>();
         if (!(c0 > 0.0)) throw MissingCertificate("needs a positive lower bound c0");
         return one(check_ode_envelope(c.rc.model, c.dom, c.rc.evolve.s, deltas, quadratic_lyapunov(), h,
                                       std::min(c0, 1.0), c.rc.step_settings()));
       }},
      {"L2_estimate",
       [](Context& c) {
         const double g = compute_gamma(c.rc.model, c.samples).gamma;
         auto traj = trajectory(c.rc.model, c.dom, c.rc.evolve_config(), c.initial(), stride_for(c.rc, c.dom));
         return one(check_L2_estimate(traj, g));
       }},
      {"Lp_estimate",
       [](Context& c) {
         const double g = compute_gamma(c.rc.model, c.samples).gamma;
         const double K = c.K();
         auto traj = trajectory(c.rc.model, c.dom, c.rc.evolve_config(), c.initial(), stride_for(c.rc, c.dom));
         return one(check_Lp_estimate(traj, c.rc.verify.lp_exponent, K, g));
       }},
      {"gradient_bound",
       [](Context& c) {
         const auto fine = build_grid(c.dom.d, c.dom.L, 2 * c.dom.N - 1, c.dom.bc);
         EvolveConfig cfg = c.rc.evolve_config();
         if (!(cfg.dt > 0.0)) cfg.dt = fine.dx;
         return one(check_gradient_bound(c.rc.model, c.dom, fine, c.rc.evolve.initial.function(), cfg,
                                         c.certs().report));
       }},
      {"c0_preserve",
       [](Context& c) {
         if (c.rc.model.polynomial) c.need("c0_preservation");
         const double r = 0.25 * c.dom.L;
         const ScalarJet v = inverse_quadratic();
         const double lambda0 = fit_c0_supersolution_rate(c.rc.model, v, c.samples);
         const int m = c.rc.model.m;
         auto f = [r, m](const Vec& x) {
           double q = x.squaredNorm() / (r * r);
           return Vec(Vec::Constant(m, q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0));
         };
         return one(check_c0_preserve(c.rc.model, c.dom, f, r, v, lambda0, c.samples, c.rc.evolve_config()));
       }},
      {"c0_not_preserved",
       [](Context& c) {
         c.need("bounded_weight");
         return one(check_c0_not_preserved(c.rc.model, c.dom, 0.5 * c.dom.L, 4, c.rc.evolve_config(),
                                           c.certs().report));
       }},
      {"positivity",
       [](Context& c) {
         if (!c.certs().irreducibility.irreducible) throw MissingCertificate("needs an irreducible coupling");
         c.need("offdiag_nonnegative");
         const int m = c.rc.model.m;
         const double rad = 0.25 * c.dom.L;
         auto f = [m, rad](const Vec& x) {
           Vec v = Vec::Zero(m);
           double q = x.squaredNorm() / (rad * rad);
           v(0) = q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
           return v;
         };
         EvolveConfig cfg = c.rc.evolve_config();
         cfg.record_times.clear();
         StateField u = evolve(c.rc.model, c.dom, cfg, StateField::sample(c.dom, m, cfg.s, f)).back();
         double mn = kInf;
         Witness w;
         for (int k = 0; k < m; ++k)
           for (int p : inner_window(c.dom))
             if (u.at(k, p) < mn) {
               mn = u.at(k, p);
               w = Witness{u.t, c.dom.point(p), k, mn, {}};
             }
         return one(strict_positive("positivity", mn, w));
       }},
      {"kernel_consistency",
       [](Context& c) {
         KernelConfig kc{c.rc.evolve.dt, c.rc.evolve.scheme, c.rc.grid.upwind, c.jobs};
         auto k = estimate_kernels(c.rc.model, c.dom, c.rc.evolve.s, c.rc.evolve.t_end, kc);
         StateField f = c.initial();
         EvolveConfig cfg = c.rc.evolve_config();
         cfg.record_times.clear();
         const Vec u = evolve(c.rc.model, c.dom, cfg, f).back().values;
         const double err = (k.P * f.values - u).cwiseAbs().maxCoeff();
         auto v = PropertyVerdict::make("kernel_consistency", err, 1e-8 + k.clipped_mass * f.sup_norm(), 0.0,
                                        TolKind::absolute);
         v.extra = {{"clipped_mass", k.clipped_mass}, {"flagged", k.flagged}};
         return one(v);
       }},
      {"tightness",
       [](Context& c) {
         c.need("lyapunov_dissipative");
         const auto& consts = c.certs().report.constants;
         const double a = consts["a"].get<double>(), cc = consts["c"].get<double>();
         std::vector<double> ts{c.rc.evolve.t_end}, rs{0.25 * c.dom.L, 0.5 * c.dom.L, 0.75 * c.dom.L};
         if (c.rc.kernels) {
           ts = c.rc.kernels->t;
           rs = c.rc.kernels->r;
         }
         std::sort(rs.begin(), rs.end());
         KernelConfig kc{c.rc.evolve.dt, c.rc.evolve.scheme, c.rc.grid.upwind, c.jobs};
         auto prof = tightness_profile(c.rc.model, c.dom, c.rc.evolve.s, ts, rs, kc);
         double mono = -kInf;
         for (const auto& row : prof.max_tail)
           for (std::size_t i = 0; i + 1 < row.size(); ++i) mono = std::max(mono, row[i + 1] - row[i]);
         if (rs.size() < 2) mono = 0.0;
         auto v1 = PropertyVerdict::make("tightness_monotone", mono, 0.0, 1e-12, TolKind::absolute);
         const ScalarJet phi = quadratic_lyapunov();
         const int m = c.rc.model.m;
         double worst = -kInf;
         Witness w;
         for (const auto& k : prof.kernels)
           for (double r : rs) {
             const double inf_phi = 1.0 + r * r;
             for (int x : inner_window(c.dom)) {
               Mat tm = tail_mass(k, r, {x});
               const double env = (phi.f(c.dom.point(x)) + a / cc) / inf_phi;
               for (int i = 0; i < m; ++i) {
                 double e = tm.row(i).sum() - env;
                 if (e > worst) {
                   worst = e;
                   w = Witness{k.t, c.dom.point(x), i, e, {}};
                 }
               }
             }
           }
         auto v2 = PropertyVerdict::make("tightness_envelope", worst, 0.0, 5e-2, TolKind::absolute);
         v2.witnesses.push_back(w);
         nlohmann::json table = nlohmann::json::array();
         for (std::size_t q = 0; q < ts.size(); ++q) table.push_back({{"t", ts[q]}, {"max_tail", prof.max_tail[q]}});
         v1.extra = {{"r", rs}, {"profile", table}};
         return std::vector<PropertyVerdict>{v1, v2};
       }},
      {"exhaustion",
       [](Context& c) {
         if (!c.rc.exhaustion) throw MissingCertificate("no [exhaustion] section in the config");
         const auto& ex = *c.rc.exhaustion;
         std::vector<LadderRung> ladder;
         for (double L : ex.ladder) ladder.push_back({L, static_cast<int>(std::lround(2.0 * L / c.dom.dx)) + 1});
         auto run = [&](Boundary bc) {
           return exhaustion_solve(c.rc.model, c.rc.evolve.initial.function(), c.rc.evolve.s, c.rc.evolve.t_end,
                                   ladder, ex.inner_L, ex.tol, bc, c.rc.evolve.dt, c.rc.evolve.scheme,
                                   c.rc.grid.upwind, c.jobs);
         };
         auto dir = run(Boundary::dirichlet);
         auto neu = run(Boundary::neumann);
         const double last = dir.deltas.empty() ? kInf : dir.deltas.back();
         auto v1 = PropertyVerdict::make("exhaustion_convergence", last, ex.tol, 0.0, TolKind::absolute);
         v1.extra = {{"deltas", dir.deltas}, {"ladder", dir.ladder}};
         double mono = -kInf;
         for (std::size_t i = 0; i + 1 < dir.deltas.size(); ++i)
           mono = std::max(mono, dir.deltas[i + 1] - dir.deltas[i]);
         auto v2 = PropertyVerdict::make("exhaustion_monotone", dir.deltas.size() < 2 ? -1.0 : mono, 0.0, 0.0,
                                         TolKind::absolute);
         v2.pass = dir.deltas.size() < 2 || mono < 0.0;
         const double gap = (dir.inner_values.back() - neu.inner_values.back()).cwiseAbs().maxCoeff();
         auto v3 = PropertyVerdict::make("exhaustion_bc_agreement", gap, 2.0 * ex.tol, 0.0, TolKind::absolute);
         v3.extra = {{"neumann_deltas", neu.deltas}};
         return std::vector<PropertyVerdict>{v1, v2, v3};
       }},
      {"measures",
       [](Context& c) {
         const auto& ms = c.ms();
         if (ms.trivial && !c.certs().report.has_pass("measure_nontrivial"))
           throw MissingCertificate("Cesaro mass decays like 1/horizon (trivial limit); needs a passing "
                                    "'measure_nontrivial' certificate");
         const double tol = c.rc.measures->cauchy_tol;
         const double tv = *std::max_element(ms.tv_ladder.begin(), ms.tv_ladder.end());
         auto v1 = PropertyVerdict::make("measure_convergence", tv, tol, 0.0, TolKind::absolute);
         v1.extra = ms.manifest();
         std::vector<PropertyVerdict> out{v1};
         if (ms.times.size() < 2) return out;
         const double s = ms.times[0], t = ms.times[1];
         // measure checks step with the same settings the measures were built with
         const StepSettings mst{0.0, c.rc.measures->scheme, c.rc.measures->upwind};
         auto battery = random_test_functions(c.dom, c.rc.model.m, 9, c.seed);
         battery.insert(battery.begin(), Vec(Vec::Ones(c.dom.unknowns(c.rc.model.m))));
         double worst = 0.0;
         for (const auto& f : battery)
           worst = std::max(worst, invariance_residual(ms, c.rc.model, f, s, t, mst) /
                                       ms.total_mass(s));
         auto v2 = PropertyVerdict::make("invariance_residual", worst, 1e-2, 0.0, TolKind::absolute);
         v2.extra = {{"s", s}, {"t", t}, {"functions", battery.size()}};
         out.push_back(v2);
         const double K = c.K();
         for (double p : {1.0, 2.0, 4.0}) {
           auto v = check_measure_lp_bound(ms, c.rc.model, p, battery, s, t, K, mst);
           v.name += "_p" + std::to_string(static_cast<int>(p));
           out.push_back(v);
         }
         for (double eps : {0.2, 0.1}) {
           auto v = epsilon_net_experiment(ms, c.rc.model, s, t, eps, 2.0, 50, c.seed, mst);
           v.name += eps == 0.2 ? "_eps0.2" : "_eps0.1";
           out.push_back(v);
         }
         return out;
       }},
  };
  return checks;
}

}  // namespace

CheckOutcome run_check(const RunConfig& rc) {
  CheckOutcome out;
  const SampleSet samples = rc.samples();
  const auto& model = rc.model;
  auto& rep = out.report;
  rep.merge(check_structural_hypotheses(model, samples));

  out.irreducibility = check_irreducibility(model, samples);
  {
    HypothesisCheck c{"irreducibility", Verdict::sampled_pass, {}, "every component reaches every other"};
    if (model.polynomial) c.verdict = Verdict::certified;
    if (!out.irreducibility.irreducible) c.verdict = model.polynomial ? Verdict::refuted : Verdict::sampled_fail;
    if (!out.irreducibility.irreducible) c.witnesses.push_back(Witness{rc.evolve.s, Vec::Zero(model.d), -1, 0.0, "unreached component"});
    nlohmann::json chains = nlohmann::json::array();
    for (const auto& layers : out.irreducibility.chains) {
      nlohmann::json lj = nlohmann::json::array();
      for (const auto& l : layers) lj.push_back(std::vector<int>(l.begin(), l.end()));
      chains.push_back(lj);
    }
    rep.constants["chains"] = chains;
    rep.add(c);
  }

  double t0 = rc.evolve.s, t1 = rc.evolve.t_end;
  if (model.polynomial) {
    t0 = model.polynomial->t0;
    t1 = model.polynomial->t1;
  }
  rep.merge(check_lyapunov(model, quadratic_lyapunov(), t0, t1, LyapunovMode::dissipative, samples));
  rep.merge(check_gradient_hypothesis(model, samples, rc.verify.gradient));
  rep.add(check_measure_certificate(model, samples));

  if (model.polynomial) {
    const auto s6 = check_section6_conditions(*model.polynomial);
    rep.merge(s6);
    if (s6.has_pass("superlinear_dissipation")) {
      std::vector<double> tau;
      for (int k = 0; k < model.m; ++k) tau.push_back(model.polynomial->tau(k).value());
      try {
        auto h = fit_comparison_functions(model, quadratic_lyapunov(), tau, samples);
        std::vector<ScalarJet> w(model.m, bounded_weight_jet());
        auto comp = check_comp2_conditions(model, quadratic_lyapunov(), h, w, 0.5 * samples.radius, 1.0, samples);
        // the exact exponent verdict is authoritative for the bounded-weight condition
        comp.checks.erase(std::remove_if(comp.checks.begin(), comp.checks.end(),
                                         [](const HypothesisCheck& c) { return c.name == "bounded_weight"; }),
                          comp.checks.end());
        rep.merge(comp);
      } catch (const NumericError& e) {
        rep.add({"comparison_dissipation", Verdict::sampled_fail, {}, e.what()});
      }
    }
  }

  for (const auto& name : rc.verify.require)
    if (!rep.has_pass(name)) out.failed_required.push_back(name);
  return out;
}

nlohmann::json VerifyEntry::to_json() const {
  if (skipped) return {{"property", check}, {"skipped", true}, {"reason", reason}};
  return verdict.to_json();
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

std::vector<VerifyEntry> run_verify(const RunConfig& rc, const std::string& which, int jobs, std::uint64_t seed) {
  Context ctx{rc, jobs, seed, rc.domain(), rc.samples(), {}, {}, {}};
  std::vector<VerifyEntry> out;
  bool found = false;
  for (const auto& [name, fn] : registry()) {
    if (which != "all" && which != name) continue;
    found = true;
    try {
      for (auto& v : fn(ctx)) out.push_back(VerifyEntry{name, std::move(v), false, {}});
    } catch (const MissingCertificate& e) {
      if (which != "all") throw;
      VerifyEntry skipped;
      skipped.check = name;
      skipped.skipped = true;
      skipped.reason = e.what();
      out.push_back(std::move(skipped));
    }
  }
  if (!found) throw ConfigError("unknown verify check '" + which + "'");
  return out;
}

}  // namespace wcp
