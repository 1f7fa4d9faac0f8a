#include "wcp/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "wcp/kernels.hpp"

namespace wcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json vec_json(const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

EvolveConfig evolve_cfg(double s, double t_end, const StepSettings& st) {
  EvolveConfig cfg;
  cfg.s = s;
  cfg.t_end = t_end;
  cfg.dt = st.dt;
  cfg.scheme = st.scheme;
  cfg.upwind = st.upwind;
  return cfg;
}

StateField sample_scalar(const DiscreteDomain& dom, int m, double t, const std::function<double(const Vec&)>& f) {
  return StateField::sample(dom, m, t, [&](const Vec& x) { return Vec(Vec::Constant(m, f(x))); });
}

double max_eig_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

PropertyVerdict PropertyVerdict::make(std::string name, double measured, double bound, double tol, TolKind kind) {
  PropertyVerdict v;
  v.name = std::move(name);
  v.measured = measured;
  v.bound = bound;
  v.margin = bound - measured;
  v.tol = tol;
  v.tol_kind = kind;
  v.pass = kind == TolKind::relative ? measured <= bound * (1.0 + tol) : measured <= bound + tol;
  return v;
}

nlohmann::json PropertyVerdict::to_json() const {
  nlohmann::json j = {{"property", name},
                      {"pass", pass},
                      {"measured", measured},
                      {"bound", bound},
                      {"margin", margin},
                      {"tol", tol},
                      {"tol_kind", tol_kind == TolKind::relative ? "relative" : "absolute"}};
  j["witnesses"] = nlohmann::json::array();
  for (const auto& w : witnesses) {
    nlohmann::json wj = {{"t", w.t}, {"x", vec_json(w.x)}, {"value", w.value}};
    if (w.k >= 0) wj["k"] = w.k;
    j["witnesses"].push_back(wj);
  }
  if (!extra.empty()) j["extra"] = extra;
  return j;
}

Trajectory trajectory(const CoefficientModel& model, const DiscreteDomain& dom, const EvolveConfig& cfg,
                      const StateField& f, int stride) {
  if (stride < 1) throw ConfigError("trajectory stride must be positive");
  const double nominal = cfg.dt > 0.0 ? cfg.dt : dom.dx;
  const int n = step_grid(cfg.s, cfg.t_end, nominal).first;
  Trajectory out;
  int i = 0;
  evolve_visit(model, dom, cfg, f, [&](const StateField& u) {
    if (i % stride == 0 || i == n) out.push_back(u);
    ++i;
  });
  return out;
}

std::vector<int> inner_window(const DiscreteDomain& dom) { return dom.window(dom.default_collar()); }

// ------------------------------------------------------------ sup-norm checks

PropertyVerdict check_max_principle(const Trajectory& traj, const HypothesisReport& cert) {
  for (const char* name : {"offdiag_nonnegative", "rowsum_nonpositive"})
    if (!cert.has_pass(name)) throw MissingCertificate(std::string("maximum principle needs ") + name);
  if (traj.empty()) throw ConfigError("empty trajectory");
  double worst = -kInf;
  Witness w;
  for (const auto& u : traj)
    for (int k = 0; k < u.m; ++k)
      for (int p = 0; p < u.dom.points(); ++p)
        if (u.at(k, p) > worst) {
          worst = u.at(k, p);
          w = Witness{u.t, u.dom.point(p), k, worst, {}};
        }
  auto v = PropertyVerdict::make("max_principle", worst, 0.0, 1e-8, TolKind::absolute);
  v.witnesses.push_back(w);
  return v;
}

PropertyVerdict check_sup_estimate(const Trajectory& traj, double K) {
  if (traj.empty()) throw ConfigError("empty trajectory");
  const double f_norm = traj.front().sup_norm();
  if (f_norm == 0.0) throw ConfigError("sup estimate needs a nonzero initial datum");
  const double s = traj.front().t;
  const auto win = inner_window(traj.front().dom);
  double worst = 0.0;
  double worst_t = s;
  for (const auto& u : traj) {
    double r = u.sup_norm(win) * std::exp(-K * (u.t - s)) / f_norm;
    if (r > worst) {
      worst = r;
      worst_t = u.t;
    }
  }
  auto v = PropertyVerdict::make("sup_estimate", worst, 1.0, 5e-3, TolKind::relative);
  v.extra = {{"K", K}, {"worst_t", worst_t}, {"collar", traj.front().dom.default_collar()}};
  return v;
}

PropertyVerdict check_lyapunov_bound(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                     const std::vector<double>& t_list, const ScalarJet& phi, double a, double c,
                                     const StepSettings& st) {
  if (t_list.empty()) throw ConfigError("no times for the Lyapunov bound");
  if (!(c > 0.0)) throw MissingCertificate("Lyapunov bound needs a dissipative certificate with c > 0");
  const double t_end = *std::max_element(t_list.begin(), t_list.end());
  StateField f = sample_scalar(dom, model.m, s, phi.f);
  Trajectory traj = trajectory(model, dom, evolve_cfg(s, t_end, st), f);
  const auto win = inner_window(dom);
  double worst = -kInf;
  Witness w;
  for (const auto& u : traj)
    for (int k = 0; k < model.m; ++k)
      for (int p : win) {
        double e = u.at(k, p) - phi.f(dom.point(p)) - a / c;
        if (e > worst) {
          worst = e;
          w = Witness{u.t, dom.point(p), k, e, {}};
        }
      }
  auto v = PropertyVerdict::make("lyapunov_bound", worst, 0.0, 1e-3 * a / c, TolKind::absolute);
  v.witnesses.push_back(w);
  v.extra = {{"a", a}, {"c", c}};
  return v;
}

PropertyVerdict check_lower_bound_c0(const CoefficientModel& model, const DiscreteDomain& dom, double s0, double t0,
                                     const StepSettings& st) {
  StateField f = sample_scalar(dom, model.m, s0, [](const Vec&) { return 1.0; });
  Trajectory traj = trajectory(model, dom, evolve_cfg(s0, t0, st), f);
  const auto win = inner_window(dom);
  double c0 = kInf;
  Witness w;
  for (const auto& u : traj)
    for (int k = 0; k < model.m; ++k)
      for (int p : win)
        if (u.at(k, p) < c0) {
          c0 = u.at(k, p);
          w = Witness{u.t, dom.point(p), k, c0, {}};
        }
  auto v = PropertyVerdict::make("lower_bound_c0", -c0, 0.0, 0.0, TolKind::absolute);
  v.pass = c0 > 0.0;
  v.witnesses.push_back(w);
  v.extra = {{"c0", c0}};
  return v;
}

// ------------------------------------------------------------ ODE envelope

double ode_comparison_envelope(const std::function<double(double)>& h, double c0, double y0, double b) {
  namespace odeint = boost::numeric::odeint;
  if (!(c0 > 0.0)) throw ConfigError("ODE envelope needs c0 > 0");
  if (b < 0.0) throw ConfigError("ODE envelope needs b >= 0");
  if (b == 0.0) return y0;
  using State = std::array<double, 1>;
  State y{y0};
  auto rhs = [&](const State& u, State& du, double) { du[0] = -c0 * h(u[0]); };
  auto stepper = odeint::make_controlled(1e-12, 1e-10, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, y, 0.0, b, b * 1e-3);
  if (!std::isfinite(y[0])) throw NumericError("ODE envelope is not finite");
  return y[0];
}

PropertyVerdict check_ode_envelope(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                   const std::vector<double>& deltas, const ScalarJet& phi,
                                   const std::vector<ComparisonFunction>& h, double c0, const StepSettings& st) {
  if (static_cast<int>(h.size()) != model.m) throw ConfigError("need one comparison function per component");
  const auto win = inner_window(dom);
  // y(delta; y0) is increasing in y0, so the largest grid value of phi bounds every start
  double y0 = 0.0;
  for (int p = 0; p < dom.points(); ++p) y0 = std::max(y0, phi.f(dom.point(p)));
  double worst = 0.0;
  Witness w;
  nlohmann::json per_delta = nlohmann::json::array();
  for (double delta : deltas) {
    StateField f = sample_scalar(dom, model.m, s, phi.f);
    StateField u = evolve(model, dom, evolve_cfg(s, s + delta, st), f).back();
    double dworst = 0.0;
    for (int k = 0; k < model.m; ++k) {
      const double y = ode_comparison_envelope(h[k].h, c0, y0, delta);
      for (int p : win) {
        const double r = u.at(k, p) / y;
        dworst = std::max(dworst, r);
        if (r > worst) {
          worst = r;
          w = Witness{u.t, dom.point(p), k, r, {}};
        }
      }
    }
    per_delta.push_back({{"delta", delta}, {"ratio", dworst}});
  }
  auto v = PropertyVerdict::make("ode_envelope", worst, 1.0, 5e-2, TolKind::relative);
  v.witnesses.push_back(w);
  v.extra = {{"c0", c0}, {"y0", y0}, {"deltas", per_delta}};
  return v;
}

// ------------------------------------------------------------ L^p

double kappa_C(const CoefficientModel& model, double t, const Vec& x) {
  if (model.polynomial) {
    const auto& s = *model.polynomial;
    bool signs = true;
    Mat off = Mat::Zero(s.m, s.m);
    double min_abs_diag = kInf;
    Rational min_sig_diag = s.sigma_exp[0][0], max_sig_off{0, 1};
    bool any_off = false;
    for (int i = 0; i < s.m; ++i)
      for (int j = 0; j < s.m; ++j) {
        double dij = s.dmat[i][j](t);
        if (i == j) {
          signs = signs && dij <= 0.0;
          min_abs_diag = std::min(min_abs_diag, std::abs(dij));
          min_sig_diag = std::min(min_sig_diag, s.sigma_exp[i][i]);
        } else {
          signs = signs && dij >= 0.0;
          off(i, j) = dij;
          max_sig_off = any_off ? std::max(max_sig_off, s.sigma_exp[i][j]) : s.sigma_exp[i][j];
          any_off = true;
        }
      }
    if (signs) {
      const double base = 1.0 + x.squaredNorm();
      const double lambda_d = s.m > 1 ? std::max(0.0, max_eig_sym(off)) : 0.0;
      return -min_abs_diag * std::pow(base, min_sig_diag.value()) +
             (any_off ? lambda_d * std::pow(base, max_sig_off.value()) : 0.0);
    }
  }
  return max_eig_sym(model.coupling(t, x));
}

double drift_correction_divergence(const CoefficientModel& model, int k, double t, const Vec& x) {
  if (model.drift_correction_divergence) return model.drift_correction_divergence(k, t, x);
  const int d = model.d;
  const double h1 = 1e-5, h2 = 1e-3;
  double div = 0.0;
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Unit(d, i);
    div += (model.drift(k, t, x + h1 * e)(i) - model.drift(k, t, x - h1 * e)(i)) / (2.0 * h1);
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Vec ei = Vec::Unit(d, i) * h2, ej = Vec::Unit(d, j) * h2;
      double dij = (model.diffusion(k, t, x + ei + ej)(i, j) - model.diffusion(k, t, x + ei - ej)(i, j) -
                    model.diffusion(k, t, x - ei + ej)(i, j) + model.diffusion(k, t, x - ei - ej)(i, j)) /
                   (4.0 * h2 * h2);
      div -= dij;
    }
  return div;
}

GammaResult compute_gamma(const CoefficientModel& model, const SampleSet& samples) {
  if (samples.points.empty() || samples.times.empty()) throw ConfigError("empty sample set");
  GammaResult res;
  const CoefficientModel* mp = &model;
  auto integrand = [mp](double t, const Vec& x) {
    double mn = kInf;
    for (int k = 0; k < mp->m; ++k) mn = std::min(mn, drift_correction_divergence(*mp, k, t, x));
    return 2.0 * kappa_C(*mp, t, x) - mn;
  };
  res.integrand = integrand;
  res.gamma = -kInf;
  double inner = -kInf;
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      double g = integrand(t, x);
      if (!std::isfinite(g)) throw NumericError("Gamma integrand is not finite");
      if (g > res.gamma) {
        res.gamma = g;
        res.worst = Witness{t, x, -1, g, {}};
      }
      if (x.cwiseAbs().maxCoeff() <= 0.5 * samples.radius) inner = std::max(inner, g);
    }
  bool certified = false;
  if (model.polynomial) certified = check_section6_conditions(*model.polynomial).has_pass("lp_invariance");
  if (!certified && samples.on_outer_shell(res.worst.x)) {
    const double scale = 1e-9 * (1.0 + std::abs(res.gamma));
    double further = integrand(res.worst.t, 2.0 * res.worst.x);
    if (res.gamma > inner + scale && further > res.gamma + scale) {
      res.finite = false;
      std::ostringstream os;
      os << "Gamma grows toward the sample boundary: " << res.gamma << " at |x|=" << res.worst.x.norm() << ", "
         << further << " at twice that radius";
      throw MissingCertificate(os.str());
    }
  }
  return res;
}

double lp_norm(const StateField& u, double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p norm needs p >= 1");
  return std::pow(u.values.cwiseAbs().array().pow(p).sum() * u.dom.cell_volume(), 1.0 / p);
}

PropertyVerdict check_L2_estimate(const Trajectory& traj, double gamma) {
  if (traj.empty()) throw ConfigError("empty trajectory");
  const double f2 = std::pow(lp_norm(traj.front(), 2.0), 2);
  if (f2 == 0.0) throw ConfigError("L2 estimate needs a nonzero initial datum");
  const double s = traj.front().t;
  double worst = 0.0, worst_t = s;
  for (const auto& u : traj) {
    double r = std::pow(lp_norm(u, 2.0), 2) * std::exp(-gamma * (u.t - s)) / f2;
    if (r > worst) {
      worst = r;
      worst_t = u.t;
    }
  }
  auto v = PropertyVerdict::make("L2_estimate", worst, 1.0, 1e-2, TolKind::relative);
  v.extra = {{"Gamma", gamma}, {"worst_t", worst_t}};
  return v;
}

PropertyVerdict check_Lp_estimate(const Trajectory& traj, double p, double K, double gamma) {
  if (traj.empty()) throw ConfigError("empty trajectory");
  const double fp = lp_norm(traj.front(), p);
  if (fp == 0.0) throw ConfigError("L^p estimate needs a nonzero initial datum");
  const double s = traj.front().t;
  const double rate = K * (1.0 - 2.0 / p) + gamma / p;
  double worst = 0.0, worst_t = s;
  for (const auto& u : traj) {
    double r = lp_norm(u, p) / (std::exp(rate * (u.t - s)) * fp);
    if (r > worst) {
      worst = r;
      worst_t = u.t;
    }
  }
  auto v = PropertyVerdict::make("Lp_estimate", worst, 1.0, 1e-2, TolKind::relative);
  v.extra = {{"p", p}, {"K", K}, {"Gamma", gamma}, {"worst_t", worst_t}};
  return v;
}

// ------------------------------------------------------------ gradients

double sup_gradient(const Trajectory& traj, Witness* where) {
  if (traj.empty()) throw ConfigError("empty trajectory");
  const auto& dom = traj.front().dom;
  const auto win = inner_window(dom);
  double worst = 0.0;
  for (const auto& u : traj)
    for (int k = 0; k < u.m; ++k)
      for (int p : win) {
        auto mi = dom.multi(p);
        double g2 = 0.0;
        for (int a = 0; a < dom.d; ++a) {
          auto lo = mi, hi = mi;
          --lo[a];
          ++hi[a];
          double g = (u.at(k, dom.flat(hi)) - u.at(k, dom.flat(lo))) / (2.0 * dom.dx);
          g2 += g * g;
        }
        double g = std::sqrt(g2);
        if (g > worst) {
          worst = g;
          if (where) *where = Witness{u.t, dom.point(p), k, g, {}};
        }
      }
  return worst;
}

PropertyVerdict check_gradient_envelope(const Trajectory& traj, const std::function<double(double)>& envelope,
                                        double tol) {
  if (traj.empty()) throw ConfigError("empty trajectory");
  const double s = traj.front().t;
  double worst = -kInf;
  Witness w;
  for (const auto& u : traj) {
    Witness wu;
    double g = sup_gradient(Trajectory{u}, &wu);
    double e = g - envelope(u.t - s);
    if (e > worst) {
      worst = e;
      w = wu;
    }
  }
  auto v = PropertyVerdict::make("gradient_envelope", worst, 0.0, tol, TolKind::absolute);
  v.witnesses.push_back(w);
  return v;
}

PropertyVerdict check_gradient_bound(const CoefficientModel& model, const DiscreteDomain& coarse,
                                     const DiscreteDomain& fine, const std::function<Vec(const Vec&)>& f,
                                     const EvolveConfig& cfg, const HypothesisReport& cert) {
  if (!cert.has_pass("gradient_hypothesis") && !cert.has_pass("gradient_bound"))
    throw MissingCertificate("gradient bound needs a passing gradient hypothesis certificate");
  if (!(fine.dx < coarse.dx)) throw ConfigError("the fine grid must have a smaller spacing");
  auto run = [&](const DiscreteDomain& dom, Witness* w) {
    EvolveConfig c = cfg;
    Trajectory traj = trajectory(model, dom, c, StateField::sample(dom, model.m, cfg.s, f));
    return sup_gradient(traj, w);
  };
  Witness wc, wf;
  const double gc = run(coarse, &wc), gf = run(fine, &wf);
  const double ratio = gc > 0.0 ? gf / gc : (gf > 0.0 ? kInf : 0.0);
  auto v = PropertyVerdict::make("gradient_bound", ratio, 1.1, 0.0, TolKind::relative);
  v.witnesses = {wc, wf};
  v.extra = {{"coarse_sup_gradient", gc}, {"fine_sup_gradient", gf}};
  return v;
}

// ------------------------------------------------------------ C_0 behaviour

PropertyVerdict check_c0_preserve(const CoefficientModel& model, const DiscreteDomain& dom,
                                  const std::function<Vec(const Vec&)>& f, double r, const ScalarJet& v,
                                  double lambda0, const SampleSet& samples, const EvolveConfig& cfg) {
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      Vec a = eval_operator(model, v.replicate(x, model.m), t, x);
      double vx = v.f(x);
      for (int k = 0; k < model.m; ++k)
        if (lambda0 * vx - a(k) < -1e-12 * std::max(1.0, std::abs(a(k)))) {
          std::ostringstream os;
          os << "supersolution inequality fails for component " << k << " at t=" << t << " |x|=" << x.norm()
             << " (value " << lambda0 * vx - a(k) << ")";
          throw MissingCertificate(os.str());
        }
    }
  StateField f0 = StateField::sample(dom, model.m, cfg.s, f);
  double delta = kInf;
  for (int p = 0; p < dom.points(); ++p) {
    Vec x = dom.point(p);
    if (x.norm() <= r) {
      delta = std::min(delta, v.f(x));
    } else {
      for (int k = 0; k < model.m; ++k)
        if (f0.at(k, p) != 0.0) throw ConfigError("initial datum is not supported in the ball of radius r");
    }
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("weight must be positive on the ball of radius r");
  const double fn = f0.sup_norm();
  Trajectory traj = trajectory(model, dom, cfg, f0);
  const auto win = inner_window(dom);
  double worst = 0.0;
  Witness w;
  for (const auto& u : traj)
    for (int p : win) {
      Vec x = dom.point(p);
      if (x.norm() < r) continue;
      double bound = std::exp(lambda0 * (u.t - cfg.s)) * fn * v.f(x) / delta;
      for (int k = 0; k < model.m; ++k) {
        double q = std::abs(u.at(k, p)) / bound;
        if (q > worst) {
          worst = q;
          w = Witness{u.t, x, k, q, {}};
        }
      }
    }
  auto out = PropertyVerdict::make("c0_preserve", worst, 1.0, 5e-3, TolKind::relative);
  out.witnesses.push_back(w);
  out.extra = {{"lambda0", lambda0}, {"delta", delta}, {"r", r}};
  return out;
}

PropertyVerdict check_c0_not_preserved(const CoefficientModel& model, const DiscreteDomain& dom, double R, int n,
                                       const EvolveConfig& cfg, const HypothesisReport& cert) {
  if (!cert.has_pass("compactness") && !cert.has_pass("comparison_dissipation"))
    throw MissingCertificate("C0 non-preservation needs a compactness certificate");
  Subset ball;
  ball.center = Vec::Zero(dom.d);
  ball.radius = R;
  const Vec theta = smooth_indicator(dom, ball, n);
  StateField f = StateField::zeros(dom, model.m, cfg.s);
  StateField one = f;
  for (int k = 0; k < model.m; ++k)
    for (int p = 0; p < dom.points(); ++p) {
      f.at(k, p) = theta(p);
      one.at(k, p) = 1.0;
    }
  const StateField u = evolve(model, dom, cfg, f).back();
  const StateField g = evolve(model, dom, cfg, one).back();
  const auto win = inner_window(dom);
  double c0 = kInf, umin = kInf;
  Witness w;
  for (int k = 0; k < model.m; ++k)
    for (int p : win) {
      c0 = std::min(c0, g.at(k, p));
      if (u.at(k, p) < umin) {
        umin = u.at(k, p);
        w = Witness{u.t, dom.point(p), k, umin, {}};
      }
    }
  auto v = PropertyVerdict::make("c0_not_preserved", 0.5 * c0, umin, 0.0, TolKind::absolute);
  v.pass = v.pass && c0 > 0.0;
  v.witnesses.push_back(w);
  v.extra = {{"c0", c0}, {"min_field", umin}, {"R", R}, {"n", n}};
  return v;
}

}  // namespace wcp
