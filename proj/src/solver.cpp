#include "wcp/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wcp/parallel.hpp"

namespace wcp {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr int kDirectLimit = 200000;

SpMat identity(int n) {
  SpMat id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::implicit_euler ? "implicit-euler" : "theta"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "implicit-euler") return Scheme::implicit_euler;
  if (s == "theta") return Scheme::theta;
  throw ConfigError("unknown time scheme '" + s + "'");
}

// ------------------------------------------------------------ StateField

StateField StateField::zeros(const DiscreteDomain& dom, int m, double t) {
  StateField f;
  f.dom = dom;
  f.m = m;
  f.t = t;
  f.values = Vec::Zero(dom.unknowns(m));
  return f;
}

StateField StateField::sample(const DiscreteDomain& dom, int m, double t, const std::function<Vec(const Vec&)>& fn) {
  StateField f = zeros(dom, m, t);
  for (int p = 0; p < dom.points(); ++p) {
    Vec v = fn(dom.point(p));
    if (v.size() != m) throw ConfigError("initial datum has wrong number of components");
    for (int k = 0; k < m; ++k) f.at(k, p) = v(k);
  }
  f.validate();
  return f;
}

void StateField::validate() const {
  if (!values.allFinite()) {
    std::ostringstream os;
    os << "non-finite state at t=" << t;
    throw NumericError(os.str());
  }
}

double StateField::sup_norm(const std::vector<int>& pts) const {
  double s = 0.0;
  for (int k = 0; k < m; ++k)
    for (int p : pts) s = std::max(s, std::abs(at(k, p)));
  return s;
}

std::pair<int, double> step_grid(double s, double t_end, double dt) {
  if (!(t_end > s)) throw ConfigError("evolution needs s < t_end");
  if (!(dt > 0.0)) throw ConfigError("evolution needs dt > 0");
  int n = std::max(1, static_cast<int>(std::ceil((t_end - s) / dt - 1e-9)));
  return {n, (t_end - s) / n};
}

// ------------------------------------------------------------ Propagator

Propagator::Propagator(const CoefficientModel& model, const DiscreteDomain& dom, double dt, Scheme scheme,
                       bool upwind)
    : model_(&model),
      dom_(dom),
      dt_(dt),
      scheme_(scheme),
      upwind_(upwind),
      n_(dom.unknowns(model.m)),
      theta_(scheme == Scheme::implicit_euler ? 1.0 : 0.5),
      iterative_(dom.unknowns(model.m) > kDirectLimit) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
}

void Propagator::prepare(double t) {
  if (prepared_t_ && (model_->autonomous || *prepared_t_ == t)) return;
  DiscreteGenerator g1 = assemble_generator(*model_, dom_, t + dt_, upwind_);
  pinned_ = g1.pinned;
  lhs_ = identity(n_) - theta_ * dt_ * g1.matrix;
  lhs_.makeCompressed();
  if (theta_ < 1.0) {
    const SpMat& l0 = model_->autonomous ? g1.matrix : assemble_generator(*model_, dom_, t, upwind_).matrix;
    explicit_ = identity(n_) + (1.0 - theta_) * dt_ * l0;
  } else {
    explicit_ = identity(n_);
  }
  if (!iterative_) {
    lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu_->compute(lhs_);
    if (lu_->info() != Eigen::Success) {
      std::ostringstream os;
      os << "sparse LU failed at t=" << t + dt_ << ": " << lu_->lastErrorMessage();
      throw NumericError(os.str());
    }
  }
  prepared_t_ = t;
}

Vec Propagator::rhs(const Vec& u) const {
  Vec b = theta_ < 1.0 ? Vec(explicit_ * u) : u;
  for (int p : pinned_) b(p) = 0.0;
  return b;
}

void Propagator::check_residual(const Vec& x, const Vec& b, double t) const {
  double nb = b.norm();
  double r = (lhs_ * x - b).norm();
  if (!x.allFinite() || r > kResidualTol * std::max(nb, std::numeric_limits<double>::min())) {
    if (nb == 0.0 && r == 0.0) return;
    std::ostringstream os;
    os << "linear solve residual " << r / std::max(nb, 1e-300) << " exceeds tolerance at t=" << t + dt_;
    throw NumericError(os.str());
  }
}

namespace {

Vec iterative_solve(const SpMat& a, const Vec& b, double t) {
  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver;
  solver.setTolerance(kResidualTol);
  solver.compute(a);
  Vec x = solver.solve(b);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "iterative solve did not converge at t=" << t;
    throw NumericError(os.str());
  }
  return x;
}

}  // namespace

void Propagator::advance(Vec& u, double t) {
  if (u.size() != n_) throw ConfigError("state size does not match the propagator");
  prepare(t);
  Vec b = rhs(u);
  Vec x;
  if (iterative_) {
    x = iterative_solve(lhs_, b, t + dt_);
  } else {
    x = lu_->solve(b);
    Vec res = b - lhs_ * x;
    if (res.norm() > kResidualTol * b.norm()) x += lu_->solve(res);
  }
  check_residual(x, b, t);
  u = std::move(x);
}

void Propagator::advance(Mat& U, double t) {
  if (U.rows() != n_) throw ConfigError("state size does not match the propagator");
  prepare(t);
  Mat B = theta_ < 1.0 ? Mat(explicit_ * U) : U;
  for (int p : pinned_) B.row(p).setZero();
  if (iterative_) {
    for (int c = 0; c < B.cols(); ++c) {
      Vec x = iterative_solve(lhs_, B.col(c), t + dt_);
      U.col(c) = x;
    }
    return;
  }
  Mat X = lu_->solve(B);
  Mat R = B - lhs_ * X;
  for (int c = 0; c < X.cols(); ++c) {
    double nb = B.col(c).norm();
    if (R.col(c).norm() > kResidualTol * nb) {
      Vec corr = lu_->solve(Vec(R.col(c)));
      X.col(c) += corr;
      check_residual(X.col(c), B.col(c), t);
    }
  }
  if (!X.allFinite()) throw NumericError("non-finite values after step at t=" + std::to_string(t + dt_));
  U = std::move(X);
}

void Propagator::advance_adjoint(Vec& r, double t) {
  if (r.size() != n_) throw ConfigError("state size does not match the propagator");
  prepare(t);
  Vec y;
  if (iterative_) {
    SpMat at = lhs_.transpose();
    y = iterative_solve(at, r, t + dt_);
  } else {
    y = lu_->transpose().solve(r);
    Vec res = r - SpMat(lhs_.transpose()) * y;
    if (res.norm() > kResidualTol * r.norm()) y += lu_->transpose().solve(res);
  }
  for (int p : pinned_) y(p) = 0.0;
  r = theta_ < 1.0 ? Vec(explicit_.transpose() * y) : y;
  if (!r.allFinite()) throw NumericError("non-finite values in adjoint step at t=" + std::to_string(t + dt_));
}

// ------------------------------------------------------------ stepping

StateField step(const std::function<DiscreteGenerator(double)>& gen_at, const StateField& u, double dt,
                Scheme scheme) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const double theta = scheme == Scheme::implicit_euler ? 1.0 : 0.5;
  DiscreteGenerator g1 = gen_at(u.t + dt);
  const int n = static_cast<int>(u.values.size());
  if (g1.matrix.rows() != n) throw ConfigError("state size does not match the generator");
  SpMat lhs = identity(n) - theta * dt * g1.matrix;
  Vec b = u.values;
  if (theta < 1.0) b += (1.0 - theta) * dt * (gen_at(u.t).matrix * u.values);
  for (int p : g1.pinned) b(p) = 0.0;
  Eigen::SparseLU<SpMat> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) throw NumericError("sparse LU failed at t=" + std::to_string(u.t + dt));
  Vec x = lu.solve(b);
  Vec res = b - lhs * x;
  if (res.norm() > kResidualTol * b.norm()) x += lu.solve(res);
  res = b - lhs * x;
  if (!x.allFinite() || res.norm() > kResidualTol * std::max(b.norm(), 1e-300))
    if (!(b.norm() == 0.0 && res.norm() == 0.0))
      throw NumericError("linear solve failed at t=" + std::to_string(u.t + dt));
  StateField out = u;
  out.values = std::move(x);
  out.t = u.t + dt;
  return out;
}

void evolve_visit(const CoefficientModel& model, const DiscreteDomain& dom, const EvolveConfig& cfg,
                  const StateField& f, const std::function<void(const StateField&)>& visit) {
  if (std::abs(f.t - cfg.s) > 1e-12 * std::max(1.0, std::abs(cfg.s)))
    throw ConfigError("initial datum time does not match s");
  if (f.m != model.m || f.values.size() != dom.unknowns(model.m)) throw ConfigError("initial datum has wrong shape");
  f.validate();
  const double nominal = cfg.dt > 0.0 ? cfg.dt : dom.dx;
  auto [n, dt] = step_grid(cfg.s, cfg.t_end, nominal);
  Propagator prop(model, dom, dt, cfg.scheme, cfg.upwind);
  StateField u = f;
  visit(u);
  for (int i = 0; i < n; ++i) {
    const double t = cfg.s + i * dt;
    prop.advance(u.values, t);
    u.t = cfg.s + (i + 1) * dt;
    u.validate();
    visit(u);
  }
}

std::vector<StateField> evolve(const CoefficientModel& model, const DiscreteDomain& dom, const EvolveConfig& cfg,
                               const StateField& f) {
  const double nominal = cfg.dt > 0.0 ? cfg.dt : dom.dx;
  auto [n, dt] = step_grid(cfg.s, cfg.t_end, nominal);
  std::vector<double> rec = cfg.record_times.empty() ? std::vector<double>{cfg.t_end} : cfg.record_times;
  std::vector<int> want;
  for (double r : rec) {
    double k = (r - cfg.s) / dt;
    long kk = std::lround(k);
    if (kk < 0 || kk > n || std::abs(k - kk) > 1e-6)
      throw ConfigError("record time " + std::to_string(r) + " is not on the step grid");
    want.push_back(static_cast<int>(kk));
  }
  std::vector<StateField> out(want.size());
  int i = 0;
  evolve_visit(model, dom, cfg, f, [&](const StateField& u) {
    for (std::size_t r = 0; r < want.size(); ++r)
      if (want[r] == i) out[r] = u;
    ++i;
  });
  return out;
}

// ------------------------------------------------------------ exhaustion

ExhaustionReport exhaustion_solve(const CoefficientModel& model, const std::function<Vec(const Vec&)>& f, double s,
                                  double t_end, const std::vector<LadderRung>& ladder, double inner_L, double tol,
                                  Boundary bc, double dt, Scheme scheme, bool upwind, int jobs) {
  if (ladder.empty()) throw ConfigError("exhaustion ladder is empty");
  std::vector<DiscreteDomain> doms;
  for (const auto& r : ladder) doms.push_back(build_grid(model.d, r.L, r.N, bc));
  const double dx = doms.front().dx;
  for (std::size_t i = 0; i < doms.size(); ++i) {
    if (std::abs(doms[i].dx - dx) > 1e-9 * dx) throw ConfigError("exhaustion ladder must keep dx fixed");
    double off = (doms[i].L - doms.front().L) / dx;
    if (std::abs(off - std::round(off)) > 1e-6) throw ConfigError("exhaustion ladder grids are not nested");
    if (i > 0 && !(doms[i].L > doms[i - 1].L)) throw ConfigError("exhaustion ladder must increase in L");
  }
  if (!(inner_L < doms.front().L)) throw ConfigError("inner_L must be smaller than the smallest L");

  ExhaustionReport rep;
  const int R = static_cast<int>(doms.size());
  std::vector<StateField> finals(R);
  parallel_for(R, jobs, [&](int r) {
    EvolveConfig cfg;
    cfg.s = s;
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.scheme = scheme;
    cfg.upwind = upwind;
    StateField f0 = StateField::sample(doms[r], model.m, s, f);
    finals[r] = evolve(model, doms[r], cfg, f0).back();
  });
  for (int r = 0; r < R; ++r) {
    rep.ladder.push_back(doms[r].L);
    std::vector<double> vals, pts;
    for (int p = 0; p < doms[r].points(); ++p) {
      Vec x = doms[r].point(p);
      if (x.cwiseAbs().maxCoeff() > inner_L + 1e-9 * dx) continue;
      for (int k = 0; k < model.m; ++k) vals.push_back(finals[r].at(k, p));
      for (int a = 0; a < x.size(); ++a) pts.push_back(x(a));
    }
    rep.inner_values.push_back(Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    rep.inner_points.push_back(Eigen::Map<Vec>(pts.data(), static_cast<Eigen::Index>(pts.size())));
  }
  for (int r = 0; r + 1 < R; ++r)
    rep.deltas.push_back((rep.inner_values[r] - rep.inner_values[r + 1]).cwiseAbs().maxCoeff());
  rep.converged = !rep.deltas.empty() && rep.deltas.back() <= tol;
  rep.final_field = finals.back();
  return rep;
}

// ------------------------------------------------------------ C-bar

namespace {

std::string where(double t, const Vec& x) {
  std::ostringstream os;
  os << "t=" << t << " x=(";
  for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x(i);
  os << ")";
  return os.str();
}

}  // namespace

KbarResult compute_Kbar(const CoefficientModel& model, const SampleSet& samples) {
  const int m = model.m;
  if (samples.points.empty() || samples.times.empty()) throw ConfigError("empty sample set");
  KbarResult res;
  res.cbar = Mat::Zero(m, m);
  Vec rowsup = Vec::Constant(m, -std::numeric_limits<double>::infinity());

  if (model.polynomial) {
    const auto& s = *model.polynomial;
    res.exact = true;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        auto [lo, hi] = enclose(s.dmat[i][j], s.t0, s.t1);
        (void)hi;
        if (lo < 0.0 && s.sigma_exp[i][j] > Rational{0, 1})
          throw MissingCertificate("coupling entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") is unbounded below as |x| grows");
        res.cbar(i, j) = lo;
      }
    // row sums sup over t and base = 1 + |x|^2 >= 1
    const int nt = 129, ns = 4001;
    for (int k = 0; k < m; ++k) {
      Rational top = s.sigma_exp[k][0];
      for (int j = 0; j < m; ++j) top = std::max(top, s.sigma_exp[k][j]);
      std::vector<TimeFunction> lead;
      for (int j = 0; j < m; ++j)
        if (s.sigma_exp[k][j] == top) lead.push_back(s.dmat[k][j]);
      auto [llo, lhi] = enclose_sum(lead, std::vector<double>(lead.size(), 1.0), s.t0, s.t1);
      (void)llo;
      if (top > Rational{0, 1} && lhi > 0.0)
        throw MissingCertificate("row sum " + std::to_string(k) + " is unbounded above as |x| grows");
      for (int a = 0; a < nt; ++a) {
        double t = s.t0 + (s.t1 - s.t0) * a / (nt - 1);
        for (int b = 0; b < ns; ++b) {
          double base = std::pow(10.0, 12.0 * b / (ns - 1));
          double v = 0.0;
          for (int j = 0; j < m; ++j) v += s.dmat[k][j](t) * std::pow(base, s.sigma_exp[k][j].value());
          rowsup(k) = std::max(rowsup(k), v);
        }
      }
    }
  } else {
    Mat offmin = Mat::Constant(m, m, std::numeric_limits<double>::infinity());
    Mat offmin_inner = offmin;
    std::vector<std::vector<std::pair<double, Vec>>> arg(m, std::vector<std::pair<double, Vec>>(m));
    Vec rowsup_inner = rowsup;
    std::vector<std::pair<double, Vec>> rowarg(m);
    for (double t : samples.times)
      for (const auto& x : samples.points) {
        Mat c = model.coupling(t, x);
        bool inner = x.cwiseAbs().maxCoeff() <= 0.5 * samples.radius;
        for (int i = 0; i < m; ++i) {
          const double rs = c.row(i).sum();
          if (rs > rowsup(i)) {
            rowsup(i) = rs;
            rowarg[i] = {t, x};
          }
          if (inner) rowsup_inner(i) = std::max(rowsup_inner(i), rs);
          for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            if (c(i, j) < offmin(i, j)) {
              offmin(i, j) = c(i, j);
              arg[i][j] = {t, x};
            }
            if (inner) offmin_inner(i, j) = std::min(offmin_inner(i, j), c(i, j));
          }
        }
      }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        if (offmin(i, j) < 0.0 && samples.on_outer_shell(arg[i][j].second) &&
            offmin(i, j) < offmin_inner(i, j) - 1e-12)
          throw MissingCertificate("coupling entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") decreases without bound toward the sample boundary at " +
                                   where(arg[i][j].first, arg[i][j].second));
        res.cbar(i, j) = offmin(i, j);
      }
    for (int i = 0; i < m; ++i)
      if (rowsup(i) > 0.0 && samples.on_outer_shell(rowarg[i].second) && rowsup(i) > rowsup_inner(i) + 1e-12)
        throw MissingCertificate("row sum " + std::to_string(i) + " grows without bound toward the sample boundary at " +
                                 where(rowarg[i].first, rowarg[i].second));
  }
  for (int i = 0; i < m; ++i) {
    double off = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != i) off += res.cbar(i, k);
    res.cbar(i, i) = rowsup(i) - off;
  }
  Eigen::JacobiSVD<Mat> svd(res.cbar);
  res.K = m == 0 ? 0.0 : svd.singularValues()(0);
  return res;
}

}  // namespace wcp
