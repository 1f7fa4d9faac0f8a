#include "wcp/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace wcp {

namespace {

bool is_multiple(double a, double b) {
  double q = a / b;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

// Trapezoid average of rows[0..K] on a uniform grid.
Vec trapezoid_average(const std::vector<Vec>& rows, int K) {
  Vec acc = 0.5 * (rows[0] + rows[K]);
  for (int k = 1; k < K; ++k) acc += rows[k];
  return acc / K;
}

Vec clip_negative(const Vec& v) { return v.cwiseMax(0.0); }

}  // namespace

std::size_t MeasureSystem::index_of(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  throw ConfigError("no measure stored at t=" + std::to_string(t));
}

nlohmann::json MeasureSystem::manifest() const {
  nlohmann::json j;
  j["anchor"] = anchor;
  j["x0"] = std::vector<double>(x0.data(), x0.data() + x0.size());
  j["horizon"] = horizon;
  j["tau_step"] = tau_step;
  j["dt"] = dt;
  j["times"] = times;
  j["tv_ladder"] = tv_ladder;
  j["converged"] = converged;
  j["mass_ratio"] = mass_ratio;
  j["trivial"] = trivial;
  std::vector<double> totals;
  for (const auto& v : mass) totals.push_back(v.sum());
  j["total_mass"] = totals;
  return j;
}

double tv_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ConfigError("measures live on different grids");
  return 0.5 * (a - b).cwiseAbs().sum();
}

double integrate(const Vec& mu, const Vec& f) {
  if (mu.size() != f.size()) throw ConfigError("function and measure sizes differ");
  if (!f.allFinite()) throw ConfigError("test function is not finite on the grid");
  return mu.dot(f);
}

MeasureSystem cesaro_measures(const CoefficientModel& model, const DiscreteDomain& dom, const CesaroConfig& cfg) {
  const double u = cfg.lattice_step, r = cfg.horizon;
  if (!(u > 0.0)) throw ConfigError("lattice step must be positive");
  if (cfg.n < 0) throw ConfigError("Cesaro time index must be nonnegative");
  if (!(r > cfg.n * u)) throw ConfigError("horizon must exceed the last Cesaro time");
  if (cfg.anchor < 0 || cfg.anchor >= model.m) throw ConfigError("anchor component out of range");
  if (cfg.x0.size() != dom.d) throw ConfigError("anchor point has wrong dimension");
  // Every averaging window and its half must be a whole number of tau nodes.
  const double base = 0.25 * u;
  if (!is_multiple(r, base)) throw ConfigError("horizon must be a multiple of a quarter lattice step");
  const double nominal = cfg.dt > 0.0 ? cfg.dt : dom.dx;
  const double h = base / std::ceil(base / (4.0 * nominal) - 1e-12);
  const double dt = 0.25 * h;
  const int n_unknowns = dom.unknowns(model.m);
  const int e = dom.index(cfg.anchor, dom.nearest(cfg.x0));

  MeasureSystem ms;
  ms.dom = dom;
  ms.m = model.m;
  ms.x0 = dom.point(dom.nearest(cfg.x0));
  ms.anchor = cfg.anchor;
  ms.horizon = r;
  ms.tau_step = h;
  ms.dt = dt;

  Propagator prop(model, dom, dt, cfg.scheme, cfg.upwind);
  // rows[k] = kernel row of the anchor at tau = T + k h, started at time T.
  auto rows_from = [&](double T, int K) {
    std::vector<Vec> rows;
    rows.reserve(K + 1);
    if (model.autonomous) {
      Vec v = Vec::Zero(n_unknowns);
      v(e) = 1.0;
      rows.push_back(v);
      for (int k = 0; k < K; ++k) {
        for (int q = 0; q < 4; ++q) prop.advance_adjoint(v, T + (4 * k + q) * dt);
        rows.push_back(v);
      }
    } else {
      Mat U = Mat::Identity(n_unknowns, n_unknowns);
      rows.push_back(U.row(e).transpose());
      for (int k = 0; k < K; ++k) {
        for (int q = 0; q < 4; ++q) prop.advance(U, T + (4 * k + q) * dt);
        rows.push_back(U.row(e).transpose());
      }
    }
    return rows;
  };

  std::vector<Vec> auto_rows;
  if (model.autonomous) auto_rows = rows_from(0.0, static_cast<int>(std::lround(r / h)));
  std::vector<std::pair<double, Vec>> stored;
  for (int i = 0; i <= cfg.n; ++i) {
    const double T = i * u;
    const int K = static_cast<int>(std::lround((r - T) / h));
    std::vector<Vec> rows = model.autonomous ? std::vector<Vec>(auto_rows.begin(), auto_rows.begin() + K + 1)
                                             : rows_from(T, K);
    Vec full = clip_negative(trapezoid_average(rows, K));
    Vec half = clip_negative(trapezoid_average(rows, K / 2));
    ms.tv_ladder.push_back(tv_distance(full, half));
    ms.mass_ratio.push_back(half.sum() > 0.0 ? full.sum() / half.sum() : 0.0);
    stored.emplace_back(T, std::move(full));
  }
  ms.converged = std::all_of(ms.tv_ladder.begin(), ms.tv_ladder.end(), [&](double v) { return v <= cfg.cauchy_tol; });
  // A limit with positive mass keeps the ratio near 1; a vanishing one decays like 1/r, giving about 1/2.
  ms.trivial = std::all_of(ms.mass_ratio.begin(), ms.mass_ratio.end(), [](double q) { return q < 0.75; });

  for (double s : cfg.extra_times) {
    if (s < 0.0 || s > cfg.n * u) throw ConfigError("extra measure time outside the Cesaro lattice");
    const int i = static_cast<int>(std::ceil(s / u - 1e-9));
    if (std::abs(i * u - s) <= 1e-9 * std::max(1.0, s)) continue;
    auto [steps, dts] = step_grid(s, i * u, dt);
    Propagator seg(model, dom, dts, cfg.scheme, cfg.upwind);
    Vec v = stored[i].second;
    for (int k = steps - 1; k >= 0; --k) seg.advance_adjoint(v, s + k * dts);
    stored.emplace_back(s, clip_negative(v));
  }
  std::sort(stored.begin(), stored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [t, v] : stored) {
    ms.times.push_back(t);
    ms.mass.push_back(std::move(v));
  }
  return ms;
}

double invariance_residual(const MeasureSystem& ms, const CoefficientModel& model, const Vec& f, double s, double t,
                           const StepSettings& st) {
  if (!(s < t)) throw ConfigError("invariance residual needs s < t");
  if (!f.allFinite()) throw ConfigError("test function is not finite on the grid");
  EvolveConfig cfg;
  cfg.s = s;
  cfg.t_end = t;
  cfg.dt = st.dt > 0.0 ? st.dt : ms.dt;
  cfg.scheme = st.scheme;
  cfg.upwind = st.upwind;
  StateField f0 = StateField::zeros(ms.dom, ms.m, s);
  f0.values = f;
  const Vec gf = evolve(model, ms.dom, cfg, f0).back().values;
  return std::abs(integrate(ms.at(t), gf) - integrate(ms.at(s), f));
}

double lp_norm_measure(const Vec& mu, const Vec& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p norm needs p >= 1");
  return std::pow(integrate(mu, f.cwiseAbs().array().pow(p).matrix()), 1.0 / p);
}

PropertyVerdict check_measure_lp_bound(const MeasureSystem& ms, const CoefficientModel& model, double p,
                                  const std::vector<Vec>& fs, double s, double t, double K, const StepSettings& st) {
  if (fs.empty()) throw ConfigError("no test functions");
  EvolveConfig cfg;
  cfg.s = s;
  cfg.t_end = t;
  cfg.dt = st.dt > 0.0 ? st.dt : ms.dt;
  cfg.scheme = st.scheme;
  cfg.upwind = st.upwind;
  double worst = 0.0;
  for (const auto& f : fs) {
    const double den = lp_norm_measure(ms.at(s), f, p);
    if (den == 0.0) throw ConfigError("test function has zero norm for the measure at s");
    StateField f0 = StateField::zeros(ms.dom, ms.m, s);
    f0.values = f;
    const Vec gf = evolve(model, ms.dom, cfg, f0).back().values;
    worst = std::max(worst, lp_norm_measure(ms.at(t), gf, p) / den);
  }
  const double bound = std::pow(2.0 * std::exp(K * (t - s)), (p - 1.0) / p);
  auto v = PropertyVerdict::make("measure_lp_bound", worst, bound, 5e-2, TolKind::relative);
  v.extra = {{"p", p}, {"K", K}, {"s", s}, {"t", t}, {"functions", fs.size()}};
  return v;
}

Partition uniform_partition(const DiscreteDomain& dom, const Vec& mu, int m, int width) {
  if (width < 1) throw ConfigError("partition width must be positive");
  const int nb = (dom.N + width - 1) / width;
  Partition blocks(dom.d == 1 ? nb : nb * nb);
  for (int p = 0; p < dom.points(); ++p) {
    auto mi = dom.multi(p);
    int b = dom.d == 1 ? mi[0] / width : (mi[0] / width) * nb + mi[1] / width;
    blocks[b].push_back(p);
  }
  auto positive = [&](const std::vector<int>& cell) {
    for (int k = 0; k < m; ++k) {
      double s = 0.0;
      for (int p : cell) s += mu(dom.index(k, p));
      if (!(s > 0.0)) return false;
    }
    return true;
  };
  Partition out;
  std::vector<int> pending;
  for (auto& b : blocks) {
    if (positive(b)) {
      b.insert(b.end(), pending.begin(), pending.end());
      pending.clear();
      out.push_back(std::move(b));
    } else if (!out.empty()) {
      out.back().insert(out.back().end(), b.begin(), b.end());
    } else {
      pending.insert(pending.end(), b.begin(), b.end());
    }
  }
  if (out.empty()) throw ConfigError("measure has no positive-mass cell");
  out.back().insert(out.back().end(), pending.begin(), pending.end());
  return out;
}

Vec finite_rank_projection(const MeasureSystem& ms, double t, const Partition& part, const Vec& f) {
  const Vec& mu = ms.at(t);
  if (f.size() != mu.size()) throw ConfigError("function and measure sizes differ");
  Vec out = f;
  for (const auto& cell : part)
    for (int k = 0; k < ms.m; ++k) {
      double mass = 0.0, acc = 0.0;
      for (int p : cell) {
        const int i = ms.dom.index(k, p);
        mass += mu(i);
        acc += mu(i) * f(i);
      }
      if (!(mass > 0.0)) throw ConfigError("partition cell has zero mass");
      for (int p : cell) out(ms.dom.index(k, p)) = acc / mass;
    }
  return out;
}

std::vector<Vec> random_test_functions(const DiscreteDomain& dom, int m, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), phase(0.0, 2.0 * M_PI);
  std::vector<Vec> out;
  for (int c = 0; c < count; ++c) {
    Vec f(dom.unknowns(m));
    for (int k = 0; k < m; ++k) {
      const double c0 = unit(rng);
      std::array<double, 3> amp, ph;
      std::array<Vec, 3> freq;
      for (int q = 0; q < 3; ++q) {
        amp[q] = unit(rng);
        ph[q] = phase(rng);
        freq[q] = Vec(dom.d);
        for (int a = 0; a < dom.d; ++a) freq[q](a) = 2.0 * unit(rng);
      }
      for (int p = 0; p < dom.points(); ++p) {
        const Vec x = dom.point(p);
        double v = c0;
        for (int q = 0; q < 3; ++q) v += amp[q] * std::cos(freq[q].dot(x) + ph[q]);
        f(dom.index(k, p)) = v;
      }
    }
    const double sup = f.cwiseAbs().maxCoeff();
    out.push_back(sup > 0.0 ? Vec(f / sup) : Vec(Vec::Ones(f.size())));
  }
  return out;
}

PropertyVerdict epsilon_net_experiment(const MeasureSystem& ms, const CoefficientModel& model, double s, double t,
                                       double eps, double p, int count, std::uint64_t seed, const StepSettings& st) {
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
  EvolveConfig cfg;
  cfg.s = s;
  cfg.t_end = t;
  cfg.dt = st.dt > 0.0 ? st.dt : ms.dt;
  cfg.scheme = st.scheme;
  cfg.upwind = st.upwind;
  const auto fs = random_test_functions(ms.dom, ms.m, count, seed);
  std::vector<Vec> gfs;
  for (const auto& f : fs) {
    StateField f0 = StateField::zeros(ms.dom, ms.m, s);
    f0.values = f;
    gfs.push_back(evolve(model, ms.dom, cfg, f0).back().values);
  }
  // sup norm in L^inf(mu_t): cells without mass do not count
  const Vec& mu_t = ms.at(t);
  auto sup_mu = [&mu_t](const Vec& v) {
    double out = 0.0;
    for (Eigen::Index q = 0; q < v.size(); ++q)
      if (mu_t(q) > 0.0) out = std::max(out, std::abs(v(q)));
    return out;
  };
  int width = std::max(1, ms.dom.N / 2);
  Partition part;
  double sup_err = 0.0;
  while (true) {
    part = uniform_partition(ms.dom, ms.at(t), ms.m, width);
    sup_err = 0.0;
    for (const auto& g : gfs) sup_err = std::max(sup_err, sup_mu(finite_rank_projection(ms, t, part, g) - g));
    if (sup_err <= eps || width == 1) break;
    width = std::max(1, width / 2);
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < fs.size(); ++c) {
    const double den = lp_norm_measure(ms.at(s), fs[c], p);
    if (den == 0.0) continue;
    const Vec dev = finite_rank_projection(ms, t, part, gfs[c]) - gfs[c];
    worst = std::max(worst, lp_norm_measure(ms.at(t), dev, p) / den);
  }
  auto v = PropertyVerdict::make("finite_rank_deviation", worst, 2.0 * std::pow(eps, 1.0 - 1.0 / p), 5e-2,
                                 TolKind::absolute);
  v.pass = v.pass && sup_err <= eps;
  v.extra = {{"eps", eps}, {"p", p}, {"width", width}, {"cells", part.size()}, {"sup_error", sup_err}};
  return v;
}

void write_measures_csv(const MeasureSystem& ms, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << "t,i";
  for (int a = 0; a < ms.dom.d; ++a) os << ",x" << a;
  os << ",mass\n" << std::setprecision(17);
  for (std::size_t q = 0; q < ms.times.size(); ++q)
    for (int k = 0; k < ms.m; ++k)
      for (int p = 0; p < ms.dom.points(); ++p) {
        const Vec x = ms.dom.point(p);
        os << ms.times[q] << "," << k;
        for (int a = 0; a < x.size(); ++a) os << "," << x(a);
        os << "," << ms.mass[q](ms.dom.index(k, p)) << "\n";
      }
}

}  // namespace wcp
