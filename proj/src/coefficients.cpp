#include "wcp/coefficients.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wcp {

namespace {

constexpr double kVanishing = 1e-14;

double sqnorm1(const Vec& x) { return 1.0 + x.squaredNorm(); }

Witness make_witness(double t, const Vec& x, int k, double value, std::string label = {}) {
  return Witness{t, x, k, value, std::move(label)};
}

std::string idx(int i, int j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

bool same_function(const TimeFunction& a, const TimeFunction& b) {
  return a.c == b.c && a.sin_a == b.sin_a && a.sin_w == b.sin_w && a.cos_a == b.cos_a && a.cos_w == b.cos_w &&
         a.exp_a == b.exp_a && a.exp_r == b.exp_r;
}

void validate_spec(const PolynomialModelSpec& s) {
  if (s.d < 1 || s.m < 1) throw ConfigError("polynomial model needs d >= 1 and m >= 1");
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("polynomial model: wrong shape of " + what);
  };
  need(static_cast<int>(s.omega.size()) == s.m, "omega");
  need(static_cast<int>(s.h_exp.size()) == s.m, "h_exp");
  need(static_cast<int>(s.gamma.size()) == s.m, "gamma");
  need(static_cast<int>(s.ell_exp.size()) == s.m, "ell_exp");
  need(static_cast<int>(s.dmat.size()) == s.m, "dmat");
  need(static_cast<int>(s.sigma_exp.size()) == s.m, "sigma_exp");
  for (int k = 0; k < s.m; ++k) {
    need(static_cast<int>(s.omega[k].size()) == s.d, "omega");
    need(static_cast<int>(s.h_exp[k].size()) == s.d, "h_exp");
    need(static_cast<int>(s.gamma[k].size()) == s.d, "gamma");
    need(static_cast<int>(s.ell_exp[k].size()) == s.d, "ell_exp");
    need(static_cast<int>(s.dmat[k].size()) == s.m, "dmat");
    need(static_cast<int>(s.sigma_exp[k].size()) == s.m, "sigma_exp");
    for (int i = 0; i < s.d; ++i) {
      need(static_cast<int>(s.omega[k][i].size()) == s.d, "omega");
      need(static_cast<int>(s.h_exp[k][i].size()) == s.d, "h_exp");
    }
  }
  if (!(s.t1 > s.t0)) throw ConfigError("polynomial model: empty working interval");
  for (int k = 0; k < s.m; ++k) {
    for (int i = 0; i < s.d; ++i) {
      for (int j = 0; j < s.d; ++j) {
        if (!same_function(s.omega[k][i][j], s.omega[k][j][i]))
          throw ConfigError("polynomial model: omega^" + std::to_string(k) + " is not symmetric at " + idx(i, j));
        if (!(s.h_exp[k][i][j] == s.h_exp[k][j][i]))
          throw ConfigError("polynomial model: h^" + std::to_string(k) + " is not symmetric at " + idx(i, j));
        if (s.h_exp[k][i][j] < Rational{0, 1}) throw ConfigError("polynomial model: negative diffusion exponent");
      }
      if (s.ell_exp[k][i] < Rational{0, 1}) throw ConfigError("polynomial model: negative drift exponent");
      auto [lo, hi] = enclose(s.gamma[k][i], s.t0, s.t1);
      (void)hi;
      if (!(lo > 0.0))
        throw ConfigError("polynomial model: inf of gamma_" + std::to_string(i) + "^" + std::to_string(k) +
                          " over the working interval is not positive");
    }
    for (int j = 0; j < s.m; ++j)
      if (s.sigma_exp[k][j] < Rational{0, 1}) throw ConfigError("polynomial model: negative coupling exponent");
  }
}

double max_eig_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eig_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<double> times_in(const SampleSet& s, double t0, double t1) {
  std::vector<double> out;
  for (double t : s.times)
    if (t >= t0 - 1e-12 && t <= t1 + 1e-12) out.push_back(t);
  if (out.empty()) out = {t0, t1};
  return out;
}

}  // namespace

// ------------------------------------------------------------ polynomial spec

Rational PolynomialModelSpec::tau(int k) const {
  Rational t = sigma_exp[k][k];
  for (int i = 0; i < d; ++i) t = std::max(t, ell_exp[k][i]);
  return t;
}

bool PolynomialModelSpec::autonomous() const {
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < d; ++i) {
      if (!gamma[k][i].is_constant()) return false;
      for (int j = 0; j < d; ++j)
        if (!omega[k][i][j].is_constant()) return false;
    }
    for (int j = 0; j < m; ++j)
      if (!dmat[k][j].is_constant()) return false;
  }
  return true;
}

CoefficientModel build_polynomial_model(const PolynomialModelSpec& spec) {
  validate_spec(spec);
  CoefficientModel model;
  model.d = spec.d;
  model.m = spec.m;
  model.name = "polynomial";
  model.autonomous = spec.autonomous();
  model.polynomial = spec;
  const auto s = spec;  // captured by value: evaluators own their data
  model.diffusion = [s](int k, double t, const Vec& x) {
    double base = sqnorm1(x);
    Mat q(s.d, s.d);
    for (int i = 0; i < s.d; ++i)
      for (int j = 0; j < s.d; ++j) q(i, j) = s.omega[k][i][j](t) * std::pow(base, s.h_exp[k][i][j].value());
    return q;
  };
  model.drift = [s](int k, double t, const Vec& x) {
    double base = sqnorm1(x);
    Vec b(s.d);
    for (int i = 0; i < s.d; ++i) b(i) = -s.gamma[k][i](t) * x(i) * std::pow(base, s.ell_exp[k][i].value());
    return b;
  };
  model.coupling = [s](double t, const Vec& x) {
    double base = sqnorm1(x);
    Mat c(s.m, s.m);
    for (int h = 0; h < s.m; ++h)
      for (int k = 0; k < s.m; ++k) c(h, k) = s.dmat[h][k](t) * std::pow(base, s.sigma_exp[h][k].value());
    return c;
  };
  model.drift_correction_divergence = [s](int k, double t, const Vec& x) {
    double base = sqnorm1(x);
    double div = 0.0;
    for (int i = 0; i < s.d; ++i) {
      double g = s.gamma[k][i](t);
      double l = s.ell_exp[k][i].value();
      double hii = s.h_exp[k][i][i].value();
      div -= g * std::pow(base, l) + 2.0 * l * g * x(i) * x(i) * std::pow(base, l - 1.0) +
             2.0 * hii * s.omega[k][i][i](t) * std::pow(base, hii - 1.0);
      for (int j = 0; j < s.d; ++j) {
        double h = s.h_exp[k][i][j].value();
        div -= 4.0 * h * (h - 1.0) * s.omega[k][i][j](t) * x(i) * x(j) * std::pow(base, h - 2.0);
      }
    }
    return div;
  };
  return model;
}

CoefficientModel build_profiled_model(const ProfiledModelSpec& spec) {
  if (spec.d < 1 || spec.m < 1) throw ConfigError("model needs d >= 1 and m >= 1");
  if (static_cast<int>(spec.q.size()) != spec.m || static_cast<int>(spec.gamma.size()) != spec.m)
    throw ConfigError("model: q and gamma need one entry per component");
  if (spec.c0.rows() != spec.m || spec.c0.cols() != spec.m) throw ConfigError("model: coupling must be m x m");
  for (double q : spec.q)
    if (!(q > 0.0)) throw ConfigError("model: diffusion coefficients must be positive");
  CoefficientModel model;
  model.d = spec.d;
  model.m = spec.m;
  model.name = "profiled";
  model.autonomous = true;
  model.profiled = spec;
  const auto s = spec;
  model.diffusion = [s](int k, double, const Vec&) { return Mat(s.q[k] * Mat::Identity(s.d, s.d)); };
  model.drift = [s](int k, double, const Vec& x) { return Vec(-s.gamma[k] * x); };
  model.coupling = [s](double, const Vec& x) {
    double p = s.profile == ProfiledModelSpec::Profile::constant ? 1.0 : x.norm() + 1.0;
    return Mat(p * s.c0);
  };
  model.drift_correction_divergence = [s](int k, double, const Vec&) { return -s.d * s.gamma[k]; };
  return model;
}

CoefficientModel component_model(const CoefficientModel& model, int k) {
  if (k < 0 || k >= model.m) throw ConfigError("component index out of range");
  CoefficientModel out;
  out.d = model.d;
  out.m = 1;
  out.name = model.name + "/component" + std::to_string(k);
  out.autonomous = model.autonomous;
  auto diff = model.diffusion;
  auto drift = model.drift;
  auto coup = model.coupling;
  out.diffusion = [diff, k](int, double t, const Vec& x) { return diff(k, t, x); };
  out.drift = [drift, k](int, double t, const Vec& x) { return drift(k, t, x); };
  out.coupling = [coup, k](double t, const Vec& x) {
    Mat c(1, 1);
    c(0, 0) = coup(t, x)(k, k);
    return c;
  };
  if (model.drift_correction_divergence) {
    auto div = model.drift_correction_divergence;
    out.drift_correction_divergence = [div, k](int, double t, const Vec& x) { return div(k, t, x); };
  }
  return out;
}

// ------------------------------------------------------------ jets

Jet ScalarJet::replicate(const Vec& x, int m) const {
  Jet j;
  j.value = Vec::Constant(m, f(x));
  Vec g = grad(x);
  Mat h = hess(x);
  j.grad.assign(m, g);
  j.hess.assign(m, h);
  return j;
}

ScalarJet quadratic_lyapunov() {
  ScalarJet s;
  s.f = [](const Vec& x) { return 1.0 + x.squaredNorm(); };
  s.grad = [](const Vec& x) { return Vec(2.0 * x); };
  s.hess = [](const Vec& x) { return Mat(2.0 * Mat::Identity(x.size(), x.size())); };
  return s;
}

ScalarJet inverse_quadratic() {
  ScalarJet s;
  s.f = [](const Vec& x) { return 1.0 / (1.0 + x.squaredNorm()); };
  s.grad = [](const Vec& x) {
    double b = 1.0 + x.squaredNorm();
    return Vec(-2.0 * x / (b * b));
  };
  s.hess = [](const Vec& x) {
    double b = 1.0 + x.squaredNorm();
    Mat h = -2.0 / (b * b) * Mat::Identity(x.size(), x.size()) + 8.0 / (b * b * b) * x * x.transpose();
    return h;
  };
  return s;
}

ScalarJet constant_jet(double c) {
  ScalarJet s;
  s.f = [c](const Vec&) { return c; };
  s.grad = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  s.hess = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
  return s;
}

Vec eval_operator(const CoefficientModel& model, const Jet& psi, double t, const Vec& x) {
  const int m = model.m, d = model.d;
  if (x.size() != d) throw ConfigError("eval_operator: point has wrong dimension");
  if (psi.value.size() != m || static_cast<int>(psi.grad.size()) != m || static_cast<int>(psi.hess.size()) != m)
    throw ConfigError("eval_operator: psi has wrong number of components");
  Vec out(m);
  for (int k = 0; k < m; ++k) {
    if (psi.grad[k].size() != d || psi.hess[k].rows() != d || psi.hess[k].cols() != d)
      throw ConfigError("eval_operator: derivative samples have wrong dimension");
    Mat q = model.diffusion(k, t, x);
    Vec b = model.drift(k, t, x);
    out(k) = (q.cwiseProduct(psi.hess[k])).sum() + b.dot(psi.grad[k]);
  }
  out += model.coupling(t, x) * psi.value;
  return out;
}

// ------------------------------------------------------------ reports

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::refuted: return "refuted";
    case Verdict::sampled_pass: return "sampled-pass";
    case Verdict::sampled_fail: return "sampled-fail";
  }
  return "?";
}

bool passed(Verdict v) { return v == Verdict::certified || v == Verdict::sampled_pass; }

bool HypothesisReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass(); });
}

const HypothesisCheck* HypothesisReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool HypothesisReport::has_pass(const std::string& name) const {
  const auto* c = find(name);
  return c != nullptr && c->pass();
}

void HypothesisReport::merge(const HypothesisReport& other) {
  for (const auto& c : other.checks) checks.push_back(c);
  for (auto it = other.constants.begin(); it != other.constants.end(); ++it) constants[it.key()] = it.value();
}

nlohmann::json HypothesisReport::to_json() const {
  nlohmann::json j;
  j["pass"] = all_pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj = {{"name", c.name}, {"verdict", wcp::to_string(c.verdict)}, {"detail", c.detail}};
    cj["witnesses"] = nlohmann::json::array();
    for (const auto& w : c.witnesses) {
      nlohmann::json wj = {{"t", w.t}, {"x", std::vector<double>(w.x.data(), w.x.data() + w.x.size())},
                           {"value", w.value}};
      if (w.k >= 0) wj["k"] = w.k;
      if (!w.label.empty()) wj["label"] = w.label;
      cj["witnesses"].push_back(wj);
    }
    j["checks"].push_back(cj);
  }
  j["constants"] = constants;
  return j;
}

bool SampleSet::on_outer_shell(const Vec& x) const {
  return x.cwiseAbs().maxCoeff() >= radius * (1.0 - 1e-9);
}

SampleSet make_samples(int d, double R, const std::vector<double>& times, int n_per_dim) {
  if (n_per_dim < 2 || d < 1 || d > 2 || !(R > 0.0)) throw ConfigError("sample set needs n >= 2, d in {1,2}, R > 0");
  if (times.empty()) throw ConfigError("sample set needs at least one time");
  SampleSet s;
  s.times = times;
  s.radius = R;
  double h = 2.0 * R / (n_per_dim - 1);
  if (d == 1) {
    for (int i = 0; i < n_per_dim; ++i) s.points.push_back(Vec::Constant(1, -R + i * h));
  } else {
    for (int i = 0; i < n_per_dim; ++i)
      for (int j = 0; j < n_per_dim; ++j) {
        Vec x(2);
        x << -R + i * h, -R + j * h;
        s.points.push_back(x);
      }
  }
  return s;
}

// ------------------------------------------------------------ structural checks

HypothesisReport check_structural_hypotheses(const CoefficientModel& model, const SampleSet& samples) {
  if (samples.points.empty() || samples.times.empty()) throw ConfigError("empty sample set");
  const int m = model.m;
  HypothesisReport rep;
  std::vector<double> mu0(m, std::numeric_limits<double>::infinity());
  std::vector<Witness> mu_w(m);
  Mat off_min = Mat::Constant(m, m, std::numeric_limits<double>::infinity());
  std::vector<std::vector<Witness>> off_w(m, std::vector<Witness>(m));
  std::vector<double> row_max(m, -std::numeric_limits<double>::infinity());
  std::vector<Witness> row_w(m);

  for (double t : samples.times) {
    for (const auto& x : samples.points) {
      Mat c = model.coupling(t, x);
      for (int k = 0; k < m; ++k) {
        double e = min_eig_sym(model.diffusion(k, t, x));
        if (e < mu0[k]) {
          mu0[k] = e;
          mu_w[k] = make_witness(t, x, k, e);
        }
        double rs = c.row(k).sum();
        if (rs > row_max[k]) {
          row_max[k] = rs;
          row_w[k] = make_witness(t, x, k, rs);
        }
        for (int j = 0; j < m; ++j) {
          if (j == k) continue;
          if (c(k, j) < off_min(k, j)) {
            off_min(k, j) = c(k, j);
            off_w[k][j] = make_witness(t, x, k, c(k, j), idx(k, j));
          }
        }
      }
    }
  }

  const auto* poly = model.polynomial ? &*model.polynomial : nullptr;

  // ellipticity
  {
    HypothesisCheck chk{"ellipticity", Verdict::sampled_pass, {}, "min eigenvalue of Q^k over samples"};
    for (int k = 0; k < m; ++k)
      if (!(mu0[k] > 0.0)) {
        chk.verdict = Verdict::refuted;
        chk.witnesses.push_back(mu_w[k]);
      }
    if (poly && chk.verdict != Verdict::refuted) {
      auto s6 = check_section6_conditions(*poly);
      if (s6.has_pass("uniform_ellipticity")) chk.verdict = Verdict::certified;
      rep.constants["nu"] = s6.constants["nu"];
    }
    rep.constants["mu0"] = mu0;
    rep.add(chk);
  }

  // off-diagonal coupling: nonnegative (implies bounded below)
  {
    HypothesisCheck chk{"offdiag_nonnegative", Verdict::sampled_pass, {}, "inf of c_ij, i != j"};
    bool exact = poly != nullptr;
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j) {
        if (j == k) continue;
        if (off_min(k, j) < 0.0) {
          chk.verdict = Verdict::refuted;
          chk.witnesses.push_back(off_w[k][j]);
        }
        if (poly) {
          auto [lo, hi] = enclose(poly->dmat[k][j], poly->t0, poly->t1);
          (void)hi;
          if (lo < 0.0) exact = false;
        }
      }
    if (chk.verdict != Verdict::refuted && exact) chk.verdict = Verdict::certified;
    std::vector<std::vector<double>> tab(m, std::vector<double>(m, 0.0));
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j) tab[k][j] = j == k ? 0.0 : off_min(k, j);
    rep.constants["offdiag_inf"] = tab;
    rep.add(chk);
  }

  // row sums nonpositive
  {
    HypothesisCheck chk{"rowsum_nonpositive", Verdict::sampled_pass, {}, "sup of sum_j c_kj"};
    for (int k = 0; k < m; ++k)
      if (row_max[k] > 0.0) {
        chk.verdict = Verdict::refuted;
        chk.witnesses.push_back(row_w[k]);
      }
    if (poly && chk.verdict != Verdict::refuted) {
      bool exact = true;
      for (int k = 0; k < m && exact; ++k) {
        std::vector<TimeFunction> row;
        for (int j = 0; j < m; ++j) {
          row.push_back(poly->dmat[k][j]);
          if (j == k) continue;
          auto [lo, hi] = enclose(poly->dmat[k][j], poly->t0, poly->t1);
          (void)hi;
          if (lo < 0.0 || poly->sigma_exp[k][k] < poly->sigma_exp[k][j]) exact = false;
        }
        auto [lo, hi] = enclose_sum(row, std::vector<double>(m, 1.0), poly->t0, poly->t1);
        (void)lo;
        if (hi > 0.0) exact = false;
      }
      if (exact) chk.verdict = Verdict::certified;
    }
    rep.constants["rowsum_sup"] = row_max;
    rep.add(chk);
  }
  return rep;
}

std::vector<std::vector<bool>> coupling_support(const CoefficientModel& model, const SampleSet& samples) {
  const int m = model.m;
  std::vector<std::vector<bool>> sup(m, std::vector<bool>(m, false));
  if (model.polynomial) {
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) sup[j][k] = !model.polynomial->dmat[j][k].is_zero();
    return sup;
  }
  Mat mx = Mat::Zero(m, m);
  for (double t : samples.times)
    for (const auto& x : samples.points) mx = mx.cwiseMax(model.coupling(t, x).cwiseAbs());
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) sup[j][k] = mx(j, k) > kVanishing;
  return sup;
}

IrreducibilityResult check_irreducibility(const CoefficientModel& model, const SampleSet& samples) {
  IrreducibilityResult res;
  const int m = model.m;
  res.chains.assign(m, {});
  if (m == 1) {
    res.irreducible = true;
    return res;
  }
  auto sup = coupling_support(model, samples);
  res.irreducible = true;
  for (int k = 0; k < m; ++k) {
    std::vector<bool> seen(m, false);
    seen[k] = true;
    std::set<int> layer;
    for (int j = 0; j < m; ++j)
      if (j != k && sup[j][k]) layer.insert(j);
    while (!layer.empty()) {
      for (int j : layer) seen[j] = true;
      res.chains[k].push_back(layer);
      std::set<int> next;
      for (int j = 0; j < m; ++j) {
        if (seen[j]) continue;
        for (int h : layer)
          if (sup[j][h]) {
            next.insert(j);
            break;
          }
      }
      layer = std::move(next);
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) res.irreducible = false;
  }
  return res;
}

// ------------------------------------------------------------ Lyapunov

namespace {

struct LyapSample {
  double t;
  Vec x;
  int k;
  double a_phi;  // (A phi 1)_k
  double phi;
  bool outer;
};

double dissipative_a(const std::vector<LyapSample>& s, double c, bool* admissible, const LyapSample** worst_outer) {
  double best = -std::numeric_limits<double>::infinity();
  double best_outer = -std::numeric_limits<double>::infinity();
  for (const auto& p : s) {
    double g = p.a_phi + c * p.phi;
    best = std::max(best, g);
    if (p.outer && g > best_outer) {
      best_outer = g;
      if (worst_outer) *worst_outer = &p;
    }
  }
  if (admissible) *admissible = best_outer < best - 1e-12 * std::max(1.0, std::abs(best));
  return best;
}

}  // namespace

HypothesisReport check_lyapunov(const CoefficientModel& model, const ScalarJet& phi, double t0, double t1,
                                LyapunovMode mode, const SampleSet& samples) {
  if (samples.points.empty()) throw ConfigError("empty sample set");
  const int m = model.m;
  HypothesisReport rep;
  std::vector<LyapSample> pts;
  double lambda = -std::numeric_limits<double>::infinity();
  double delta = -std::numeric_limits<double>::infinity();
  Witness lambda_w, delta_w;
  CoefficientModel scalar_parts = model;
  scalar_parts.coupling = [m](double, const Vec&) { return Mat(Mat::Zero(m, m)); };

  for (double t : times_in(samples, t0, t1)) {
    for (const auto& x : samples.points) {
      double p = phi.f(x);
      if (!(p > 0.0)) throw ConfigError("Lyapunov function is not positive at a sample point");
      Jet jet = phi.replicate(x, m);
      Vec a = eval_operator(model, jet, t, x);
      Vec a_scalar = eval_operator(scalar_parts, jet, t, x);
      for (int k = 0; k < m; ++k) {
        pts.push_back({t, x, k, a(k), p, samples.on_outer_shell(x)});
        if (a(k) / p > lambda) {
          lambda = a(k) / p;
          lambda_w = make_witness(t, x, k, a(k) / p);
        }
        if (a_scalar(k) / p > delta) {
          delta = a_scalar(k) / p;
          delta_w = make_witness(t, x, k, a_scalar(k) / p);
        }
      }
    }
  }

  {
    // growth along rays as a proxy for blow-up at infinity
    HypothesisCheck chk{"lyapunov_growth", Verdict::sampled_pass, {}, "phi nondecreasing along sampled rays"};
    for (const auto& x : samples.points) {
      if (x.norm() == 0.0) continue;
      if (phi.f(1.01 * x) < phi.f(x)) {
        chk.verdict = Verdict::sampled_fail;
        chk.witnesses.push_back(make_witness(t0, x, -1, phi.f(x)));
        break;
      }
    }
    rep.add(chk);
  }
  rep.constants["lambdaJ"] = lambda;
  rep.constants["deltaJ"] = delta;
  rep.add({"lyapunov_general", Verdict::sampled_pass, {lambda_w}, "smallest lambda with A(phi 1) <= lambda phi"});
  rep.add({"scalar_lyapunov", Verdict::sampled_pass, {delta_w}, "smallest delta with A_k phi <= delta phi"});

  if (mode == LyapunovMode::dissipative) {
    constexpr int kGrid = 50;
    std::vector<double> cs(kGrid);
    for (int i = 0; i < kGrid; ++i) cs[i] = std::pow(10.0, -3.0 + 6.0 * i / (kGrid - 1));
    std::vector<bool> adm(kGrid);
    std::vector<double> ratio(kGrid, std::numeric_limits<double>::infinity());
    const LyapSample* worst = nullptr;
    for (int i = 0; i < kGrid; ++i) {
      bool ok = false;
      const LyapSample* w = nullptr;
      double a = dissipative_a(pts, cs[i], &ok, &w);
      adm[i] = ok;
      if (ok) ratio[i] = a / cs[i];
      if (i == 0) worst = w;
    }
    int best = -1;
    for (int i = 0; i < kGrid; ++i)
      if (adm[i] && (best < 0 || ratio[i] < ratio[best])) best = i;
    HypothesisCheck chk{"lyapunov_dissipative", Verdict::sampled_pass, {}, "A(phi 1) <= (a - c phi) 1"};
    if (best < 0) {
      chk.verdict = Verdict::refuted;
      if (worst) chk.witnesses.push_back(make_witness(worst->t, worst->x, worst->k, worst->a_phi));
      chk.detail += "; no positive c keeps the maximum off the sample boundary";
    } else {
      // refine a/c between the neighbouring grid values
      auto objective = [&](double c, bool* ok) {
        double a = dissipative_a(pts, c, ok, nullptr);
        return *ok ? a / c : std::numeric_limits<double>::infinity();
      };
      double c_best = cs[best];
      if (best + 1 < kGrid && !adm[best + 1]) {
        double lo = cs[best], hi = cs[best + 1];
        for (int it = 0; it < 80; ++it) {
          double mid = std::sqrt(lo * hi);
          bool ok = false;
          dissipative_a(pts, mid, &ok, nullptr);
          (ok ? lo : hi) = mid;
        }
        bool ok = false;
        if (objective(lo, &ok) <= ratio[best]) c_best = lo;
      } else {
        double lo = std::log(cs[std::max(best - 1, 0)]), hi = std::log(cs[std::min(best + 1, kGrid - 1)]);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 80; ++it) {
          double a1 = hi - g * (hi - lo), a2 = lo + g * (hi - lo);
          bool ok1 = false, ok2 = false;
          double f1 = objective(std::exp(a1), &ok1), f2 = objective(std::exp(a2), &ok2);
          if (f1 <= f2)
            hi = a2;
          else
            lo = a1;
        }
        bool ok = false;
        double cand = std::exp(0.5 * (lo + hi));
        if (objective(cand, &ok) <= ratio[best]) c_best = cand;
      }
      bool ok = false;
      double a = dissipative_a(pts, c_best, &ok, nullptr);
      rep.constants["a"] = a;
      rep.constants["c"] = c_best;
    }
    rep.add(chk);
  }
  return rep;
}

ComparisonFunction ComparisonFunction::power(double c1, double p, double c2) {
  ComparisonFunction h;
  h.h = [c1, p, c2](double y) { return c1 * std::pow(std::max(y, 0.0), p) - c2; };
  h.growth = p;
  return h;
}

std::vector<ComparisonFunction> fit_comparison_functions(const CoefficientModel& model, const ScalarJet& phi,
                                                         const std::vector<double>& tau, const SampleSet& samples,
                                                         std::vector<std::pair<double, double>>* coeffs) {
  const int m = model.m;
  if (static_cast<int>(tau.size()) != m) throw ConfigError("one growth exponent per component is required");
  std::vector<double> c1(m, std::numeric_limits<double>::infinity()), c2(m, 0.0);
  std::vector<std::vector<std::tuple<double, double>>> vals(m);  // (A phi, phi)
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      Vec a = eval_operator(model, phi.replicate(x, m), t, x);
      double p = phi.f(x);
      for (int k = 0; k < m; ++k) {
        vals[k].emplace_back(a(k), p);
        if (samples.on_outer_shell(x)) c1[k] = std::min(c1[k], 0.5 * (-a(k)) / std::pow(p, 1.0 + tau[k]));
      }
    }
  std::vector<ComparisonFunction> out;
  for (int k = 0; k < m; ++k) {
    if (!(c1[k] > 0.0) || !std::isfinite(c1[k]))
      throw NumericError("no dissipative growth of A(phi 1) at the sample boundary for component " +
                         std::to_string(k));
    for (auto [a, p] : vals[k]) c2[k] = std::max(c2[k], a + c1[k] * std::pow(p, 1.0 + tau[k]));
    out.push_back(ComparisonFunction::power(c1[k], 1.0 + tau[k], c2[k]));
    if (coeffs) coeffs->emplace_back(c1[k], c2[k]);
  }
  return out;
}

HypothesisReport check_comp2_conditions(const CoefficientModel& model, const ScalarJet& phi,
                                        const std::vector<ComparisonFunction>& h_funcs,
                                        const std::vector<ScalarJet>& w_funcs, double R, double mu,
                                        const SampleSet& samples) {
  const int m = model.m;
  if (static_cast<int>(h_funcs.size()) != m || static_cast<int>(w_funcs.size()) != m)
    throw ConfigError("one comparison function and one weight per component are required");
  HypothesisReport rep;

  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& x : samples.points) {
    ymin = std::min(ymin, phi.f(x));
    ymax = std::max(ymax, phi.f(x));
  }
  // convexity: midpoint test on a geometric ladder covering the sampled range of phi
  for (int k = 0; k < m; ++k) {
    const auto& h = h_funcs[k].h;
    double lo = std::max(ymin, 1e-12), hi = 10.0 * ymax;
    const int n = 200;
    double r = std::pow(hi / lo, 1.0 / n);
    for (int i = 0; i + 2 <= n; ++i) {
      double a = lo * std::pow(r, i), b = lo * std::pow(r, i + 2), mid = 0.5 * (a + b);
      double lhs = h(mid), rhs = 0.5 * (h(a) + h(b));
      if (lhs > rhs + 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)}))
        throw ConfigError("comparison function for component " + std::to_string(k) + " is not convex near y=" +
                          std::to_string(mid));
    }
  }

  HypothesisCheck dis{"comparison_dissipation", Verdict::sampled_pass, {}, "(A phi 1)_k <= -h_k(phi) outside B_R"};
  HypothesisCheck wchk{"bounded_weight", Verdict::sampled_pass, {}, "(A_k + c_kk - mu) w_k >= 0 outside B_R"};
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      if (x.norm() <= R) continue;
      Vec a = eval_operator(model, phi.replicate(x, m), t, x);
      Mat c = model.coupling(t, x);
      for (int k = 0; k < m; ++k) {
        double bound = -h_funcs[k].h(phi.f(x));
        if (a(k) > bound + 1e-12 * std::max(1.0, std::abs(bound))) {
          dis.verdict = Verdict::refuted;
          if (dis.witnesses.size() < 8) dis.witnesses.push_back(make_witness(t, x, k, a(k) - bound));
        }
        const auto& w = w_funcs[k];
        double wv = w.f(x);
        double lw = (model.diffusion(k, t, x).cwiseProduct(w.hess(x))).sum() + model.drift(k, t, x).dot(w.grad(x)) +
                    (c(k, k) - mu) * wv;
        if (lw < -1e-12) {
          wchk.verdict = Verdict::refuted;
          if (wchk.witnesses.size() < 8) wchk.witnesses.push_back(make_witness(t, x, k, lw));
        }
      }
    }
  rep.add(dis);
  rep.add(wchk);

  HypothesisCheck integ{"inverse_integrable", Verdict::sampled_pass, {}, "1/h_k integrable at infinity"};
  std::vector<double> tails;
  for (int k = 0; k < m; ++k) {
    const auto& h = h_funcs[k];
    // start where h is positive
    double y0 = std::max(ymin, 1e-12);
    while (!(h.h(y0) > 0.0) && y0 < 1e12) y0 *= 1.5;
    double y1 = std::max(ymax, 2.0 * y0);
    const int n = 2000;
    double lr = std::log(y1 / y0) / n, acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      double y = y0 * std::exp(i * lr);
      double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * y / h.h(y) * lr;
    }
    tails.push_back(acc);
    if (!(h.growth > 1.0)) {
      integ.verdict = Verdict::refuted;
      integ.witnesses.push_back(make_witness(0.0, Vec::Constant(1, y1), k, acc, "declared growth <= 1"));
    }
  }
  integ.detail += "; quadrature over the sampled range recorded in constants";
  rep.constants["inv_h_integral"] = tails;
  rep.add(integ);
  return rep;
}

// ------------------------------------------------------------ exponent conditions

HypothesisReport check_section6_conditions(const PolynomialModelSpec& s) {
  HypothesisReport rep;
  const int m = s.m, d = s.d;
  const Rational zero{0, 1}, one{1, 1}, two{2, 1};
  auto fail = [](HypothesisCheck& c, int k, const std::string& label, double value) {
    c.verdict = Verdict::refuted;
    c.witnesses.push_back(make_witness(0.0, Vec::Zero(1), k, value, label));
  };

  {
    HypothesisCheck c{"symmetry", Verdict::certified, {}, "omega and h symmetric, gamma bounded away from 0"};
    for (int k = 0; k < m; ++k) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j)
          if (!same_function(s.omega[k][i][j], s.omega[k][j][i]) || !(s.h_exp[k][i][j] == s.h_exp[k][j][i]))
            fail(c, k, "omega/h " + idx(i, j), 0.0);
        auto [lo, hi] = enclose(s.gamma[k][i], s.t0, s.t1);
        (void)hi;
        if (!(lo > 0.0)) fail(c, k, "gamma_" + std::to_string(i), lo);
      }
    }
    rep.add(c);
  }
  {
    HypothesisCheck c{"coupling_signs", Verdict::certified, {}, "d_ij > 0 off the diagonal, d_ii < 0, sigma_ij < sigma_ii"};
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        auto [lo, hi] = enclose(s.dmat[i][j], s.t0, s.t1);
        if (i == j) {
          if (!(hi < 0.0)) fail(c, i, "d" + idx(i, i) + " not negative", hi);
        } else {
          if (!(lo > 0.0)) fail(c, i, "d" + idx(i, j) + " not positive", lo);
          if (!(s.sigma_exp[i][j] < s.sigma_exp[i][i]))
            fail(c, i, "sigma" + idx(i, j) + " >= sigma" + idx(i, i), (s.sigma_exp[i][j] - s.sigma_exp[i][i]).value());
        }
      }
    rep.add(c);
  }
  {
    HypothesisCheck c{"uniform_ellipticity", Verdict::certified, {}, "min h_ii >= max h_ij and nu_k > 0"};
    std::vector<double> nu(m);
    for (int k = 0; k < m; ++k) {
      Rational min_hii = s.h_exp[k][0][0], max_hij = zero;
      bool any_off = false;
      for (int i = 0; i < d; ++i) {
        min_hii = std::min(min_hii, s.h_exp[k][i][i]);
        for (int j = 0; j < d; ++j)
          if (i != j) {
            max_hij = any_off ? std::max(max_hij, s.h_exp[k][i][j]) : s.h_exp[k][i][j];
            any_off = true;
          }
      }
      if (any_off && min_hii < max_hij) fail(c, k, "min h_ii < max h_ij", (min_hii - max_hij).value());
      // nu_k = inf_t (min_i omega_ii - max_i sqrt(sum_{j != i} omega_ij^2)) on a time grid with Lipschitz slack
      const int n = 513;
      double lip = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) lip += s.omega[k][i][j].lipschitz(s.t0, s.t1);
      double h = (s.t1 - s.t0) / (n - 1);
      double best = std::numeric_limits<double>::infinity();
      for (int q = 0; q < n; ++q) {
        double t = s.t0 + q * h;
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
        for (int i = 0; i < d; ++i) {
          mn = std::min(mn, s.omega[k][i][i](t));
          double acc = 0.0;
          for (int j = 0; j < d; ++j)
            if (j != i) acc += s.omega[k][i][j](t) * s.omega[k][i][j](t);
          mx = std::max(mx, std::sqrt(acc));
        }
        best = std::min(best, mn - mx);
      }
      nu[k] = best - 0.5 * h * lip;
      if (!(nu[k] > 0.0)) fail(c, k, "nu_k <= 0", nu[k]);
    }
    rep.constants["nu"] = nu;
    rep.add(c);
  }
  {
    HypothesisCheck c{"growth_balance", Verdict::certified, {}, "1 + max{sigma_kk, ell_i^k} > max h_ii^k"};
    for (int k = 0; k < m; ++k) {
      Rational max_hii = s.h_exp[k][0][0];
      for (int i = 0; i < d; ++i) max_hii = std::max(max_hii, s.h_exp[k][i][i]);
      if (!(one + s.tau(k) > max_hii)) fail(c, k, "component " + std::to_string(k), (one + s.tau(k) - max_hii).value());
    }
    rep.add(c);
  }
  std::vector<double> taus;
  for (int k = 0; k < m; ++k) taus.push_back(s.tau(k).value());
  rep.constants["tau"] = taus;
  {
    HypothesisCheck c{"compactness", Verdict::certified, {}, "max h_ii < 1 + max ell and row sums of d nonpositive"};
    for (int k = 0; k < m; ++k) {
      Rational max_hii = s.h_exp[k][0][0], max_ell = s.ell_exp[k][0];
      for (int i = 0; i < d; ++i) {
        max_hii = std::max(max_hii, s.h_exp[k][i][i]);
        max_ell = std::max(max_ell, s.ell_exp[k][i]);
      }
      if (!(max_hii < one + max_ell)) fail(c, k, "max h_ii >= 1 + max ell", (max_hii - one - max_ell).value());
      auto [lo, hi] = enclose_sum(s.dmat[k], std::vector<double>(m, 1.0), s.t0, s.t1);
      (void)lo;
      if (hi > 0.0) fail(c, k, "row sum of d positive", hi);
    }
    rep.add(c);
  }
  {
    HypothesisCheck c{"superlinear_dissipation", Verdict::certified, {}, "tau_k > 0"};
    for (int k = 0; k < m; ++k)
      if (!(s.tau(k) > zero)) fail(c, k, "tau_k = 0", 0.0);
    rep.add(c);
  }
  {
    HypothesisCheck c{"bounded_weight", Verdict::certified, {}, "max ell_i^k > 1 + max{sigma_kk, h_ij^k - 2}"};
    for (int k = 0; k < m; ++k) {
      Rational max_ell = s.ell_exp[k][0], rhs = s.sigma_exp[k][k];
      for (int i = 0; i < d; ++i) {
        max_ell = std::max(max_ell, s.ell_exp[k][i]);
        for (int j = 0; j < d; ++j) rhs = std::max(rhs, s.h_exp[k][i][j] - two);
      }
      if (!(max_ell > one + rhs)) fail(c, k, "component " + std::to_string(k), (max_ell - one - rhs).value());
    }
    rep.add(c);
  }
  {
    HypothesisCheck c{"c0_preservation", Verdict::certified, {},
                      "max{h_ii - 1, sigma_kk} > max{h_ij - 1, ell_i, sigma_kj (j != k)}"};
    for (int k = 0; k < m; ++k) {
      Rational lhs = s.sigma_exp[k][k], rhs = s.ell_exp[k][0];
      for (int i = 0; i < d; ++i) {
        lhs = std::max(lhs, s.h_exp[k][i][i] - one);
        rhs = std::max(rhs, s.ell_exp[k][i]);
        for (int j = 0; j < d; ++j) rhs = std::max(rhs, s.h_exp[k][i][j] - one);
      }
      for (int j = 0; j < m; ++j)
        if (j != k) rhs = std::max(rhs, s.sigma_exp[k][j]);
      if (!(lhs > rhs)) fail(c, k, "component " + std::to_string(k), (lhs - rhs).value());
    }
    rep.add(c);
  }
  {
    HypothesisCheck c{"lp_invariance", Verdict::certified, {}, "sigma_ii > max{ell_s^k, h_sj^k - 1}"};
    Rational rhs = s.ell_exp[0][0];
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < d; ++i) {
        rhs = std::max(rhs, s.ell_exp[k][i]);
        for (int j = 0; j < d; ++j) rhs = std::max(rhs, s.h_exp[k][i][j] - one);
      }
    for (int i = 0; i < m; ++i)
      if (!(s.sigma_exp[i][i] > rhs)) fail(c, i, "sigma" + idx(i, i), (s.sigma_exp[i][i] - rhs).value());
    rep.add(c);
  }
  {
    HypothesisCheck c{"gradient_bound", Verdict::certified, {},
                      "max{min ell_i^k, sigma_kk} > max{2 max sigma_ki (i != k), 2 sigma_kk - 1, min h_ii^k}"};
    for (int k = 0; k < m; ++k) {
      Rational min_ell = s.ell_exp[k][0], min_hii = s.h_exp[k][0][0];
      for (int i = 0; i < d; ++i) {
        min_ell = std::min(min_ell, s.ell_exp[k][i]);
        min_hii = std::min(min_hii, s.h_exp[k][i][i]);
      }
      Rational lhs = std::max(min_ell, s.sigma_exp[k][k]);
      Rational rhs = std::max(s.sigma_exp[k][k] * 2 - one, min_hii);
      for (int i = 0; i < m; ++i)
        if (i != k) rhs = std::max(rhs, s.sigma_exp[k][i] * 2);
      if (!(lhs > rhs)) fail(c, k, "component " + std::to_string(k), (lhs - rhs).value());
    }
    rep.add(c);
  }
  {
    HypothesisCheck c{"measure_exponent_condition", Verdict::refuted, {},
                      "some j with max ell^j > max{sigma_jj, h_ik^j - 1}"};
    for (int j = 0; j < m && c.verdict == Verdict::refuted; ++j) {
      Rational max_ell = s.ell_exp[j][0], rhs = s.sigma_exp[j][j];
      for (int i = 0; i < d; ++i) {
        max_ell = std::max(max_ell, s.ell_exp[j][i]);
        for (int q = 0; q < d; ++q) rhs = std::max(rhs, s.h_exp[j][i][q] - one);
      }
      if (max_ell > rhs) {
        c.verdict = Verdict::certified;
        c.detail += "; anchor component " + std::to_string(j);
        rep.constants["measure_anchor"] = j;
      }
    }
    if (c.verdict == Verdict::refuted) c.witnesses.push_back(make_witness(0.0, Vec::Zero(1), -1, 0.0, "no component"));
    rep.add(c);
  }
  return rep;
}

// ------------------------------------------------------------ gradient hypothesis

namespace {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x) {
  const int d = static_cast<int>(x.size());
  Vec f0 = f(x);
  Mat j(f0.size(), d);
  for (int i = 0; i < d; ++i) {
    double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

}  // namespace

HypothesisReport check_gradient_hypothesis(const CoefficientModel& model, const SampleSet& samples,
                                           const GradientInputs& in) {
  const int m = model.m, d = model.d;
  HypothesisReport rep;
  // first pass: c = sup |grad q_ij^k| / mu_k
  double cgrad = 0.0;
  for (double t : samples.times)
    for (const auto& x : samples.points)
      for (int k = 0; k < m; ++k) {
        double mu = min_eig_sym(model.diffusion(k, t, x));
        Mat jq = fd_jacobian(
            [&](const Vec& y) {
              Mat q = model.diffusion(k, t, y);
              return Vec(Eigen::Map<const Vec>(q.data(), q.size()));
            },
            x);
        for (int r = 0; r < jq.rows(); ++r) cgrad = std::max(cgrad, jq.row(r).norm() / mu);
      }
  std::vector<double> sigma(m, -std::numeric_limits<double>::infinity());
  std::vector<Witness> wit(m);
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      Mat c = model.coupling(t, x);
      Mat jc = fd_jacobian(
          [&](const Vec& y) {
            Mat cc = model.coupling(t, y);
            return Vec(Eigen::Map<const Vec>(cc.data(), cc.size()));
          },
          x);
      double rho1 = 0.0;
      for (int r = 0; r < jc.rows(); ++r) rho1 = std::max(rho1, jc.row(r).norm() / in.omega1);
      for (int k = 0; k < m; ++k) {
        double mu = min_eig_sym(model.diffusion(k, t, x));
        Mat jb = fd_jacobian([&](const Vec& y) { return model.drift(k, t, y); }, x);
        double rk = max_eig_sym(jb);
        double rho0 = 0.0;
        for (int h = 0; h < m; ++h)
          for (int q = 0; q < m; ++q)
            if (h != q) rho0 = std::max(rho0, std::abs(c(h, q)) / in.omega0);
        double val = (d * d * cgrad * cgrad / 4.0 - in.alpha) * mu + rk + c(k, k) +
                     in.gamma * (in.omega0 * rho0 * rho0 + in.omega1 * rho1 * rho1);
        if (val > sigma[k]) {
          sigma[k] = val;
          wit[k] = make_witness(t, x, k, val);
        }
      }
    }
  rep.constants["sigma_kJ"] = sigma;
  HypothesisCheck chk{"gradient_hypothesis", Verdict::sampled_pass, {}, "sigma_kJ finite"};
  if (model.polynomial) {
    auto s6 = check_section6_conditions(*model.polynomial);
    const auto* g = s6.find("gradient_bound");
    chk.verdict = g->verdict;
    chk.witnesses = g->witnesses;
    chk.detail += " (exponent condition)";
  } else {
    for (int k = 0; k < m; ++k)
      if (samples.on_outer_shell(wit[k].x)) {
        chk.verdict = Verdict::sampled_fail;
        chk.witnesses.push_back(wit[k]);
      }
  }
  rep.add(chk);
  return rep;
}

HypothesisCheck check_measure_certificate(const CoefficientModel& model, const SampleSet& samples) {
  const int m = model.m, d = model.d;
  constexpr double slack = 1e-12;
  HypothesisCheck chk{"measure_nontrivial", Verdict::sampled_fail, {}, ""};
  // vector candidate g = 1: A(t) 1 = C(t) 1 >= 0
  Witness worst = make_witness(0.0, Vec::Zero(d), -1, std::numeric_limits<double>::infinity());
  bool ok = true;
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      Vec rows = model.coupling(t, x).rowwise().sum();
      Eigen::Index k;
      const double v = rows.minCoeff(&k);
      if (v < worst.value) worst = make_witness(t, x, static_cast<int>(k), v, "row sum of C");
      ok = ok && v >= -slack;
    }
  if (ok) {
    chk.verdict = Verdict::sampled_pass;
    chk.detail = "g = 1 with A(t) g >= 0";
    return chk;
  }
  // scalar candidates g e_j with (A_j + c_jj) g >= 0
  const std::vector<std::pair<std::string, ScalarJet>> cands{
      {"1", constant_jet(1.0)},
      {"1 + 1/(1+|x|^2)", [] {
         ScalarJet w = inverse_quadratic();
         auto f = w.f;
         w.f = [f](const Vec& x) { return 1.0 + f(x); };
         return w;
       }()}};
  for (int j = 0; j < m; ++j)
    for (const auto& [label, g] : cands) {
      bool good = true;
      for (double t : samples.times) {
        for (const auto& x : samples.points) {
          Jet psi;
          psi.value = Vec::Zero(m);
          psi.grad.assign(m, Vec::Zero(d));
          psi.hess.assign(m, Mat::Zero(d, d));
          psi.value(j) = g.f(x);
          psi.grad[j] = g.grad(x);
          psi.hess[j] = g.hess(x);
          if (eval_operator(model, psi, t, x)(j) < -slack) {
            good = false;
            break;
          }
        }
        if (!good) break;
      }
      if (good) {
        chk.verdict = Verdict::sampled_pass;
        chk.detail = "g = " + label + " on component " + std::to_string(j) + " with (A_j + c_jj) g >= 0";
        return chk;
      }
    }
  chk.detail = "no candidate g with A(t) g >= 0 or (A_j + c_jj) g >= 0";
  chk.witnesses.push_back(worst);
  return chk;
}

double fit_c0_supersolution_rate(const CoefficientModel& model, const ScalarJet& v, const SampleSet& samples,
                                 double margin) {
  double worst = 0.0;
  for (double t : samples.times)
    for (const auto& x : samples.points) {
      double vx = v.f(x);
      if (!(vx > 0.0)) throw ConfigError("weight must be positive");
      Vec a = eval_operator(model, v.replicate(x, model.m), t, x);
      worst = std::max(worst, a.maxCoeff() / vx);
    }
  return worst * (1.0 + margin);
}

}  // namespace wcp
