#include "wcp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "wcp/parallel.hpp"

namespace wcp {

namespace {

void clip(KernelEstimate& k) {
  double neg = 0.0, pos = 0.0;
  for (Eigen::Index c = 0; c < k.P.cols(); ++c)
    for (Eigen::Index r = 0; r < k.P.rows(); ++r) {
      double& v = k.P(r, c);
      if (v < 0.0) {
        neg -= v;
        v = 0.0;
      } else {
        pos += v;
      }
    }
  k.clipped_mass = neg;
  k.total_mass = pos;
  k.flagged = neg > 1e-6 * pos;
}

}  // namespace

std::vector<KernelEstimate> estimate_kernels(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                             const std::vector<double>& t_list, const KernelConfig& cfg) {
  if (t_list.empty()) throw ConfigError("no kernel times requested");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > s)) throw ConfigError("kernel times must exceed s");
    if (i > 0 && !(t_list[i] > t_list[i - 1])) throw ConfigError("kernel times must be increasing");
  }
  const int n = dom.unknowns(model.m);
  const double nominal = cfg.dt > 0.0 ? cfg.dt : dom.dx;
  const int jobs = std::max(1, std::min(cfg.jobs, n));

  // Column blocks are independent; each worker owns its propagators.
  std::vector<std::vector<Mat>> blocks(jobs);
  std::vector<double> dts(t_list.size());
  parallel_for(jobs, jobs, [&](int w) {
    const int c0 = static_cast<int>(static_cast<long>(n) * w / jobs);
    const int c1 = static_cast<int>(static_cast<long>(n) * (w + 1) / jobs);
    Mat U = Mat::Zero(n, c1 - c0);
    for (int c = c0; c < c1; ++c) U(c, c - c0) = 1.0;
    double t = s;
    for (std::size_t seg = 0; seg < t_list.size(); ++seg) {
      auto [steps, dt] = step_grid(t, t_list[seg], nominal);
      Propagator prop(model, dom, dt, cfg.scheme, cfg.upwind);
      for (int i = 0; i < steps; ++i) prop.advance(U, t + i * dt);
      t = t_list[seg];
      if (w == 0) dts[seg] = dt;
      blocks[w].push_back(U);
    }
  });

  std::vector<KernelEstimate> out;
  for (std::size_t seg = 0; seg < t_list.size(); ++seg) {
    KernelEstimate k;
    k.dom = dom;
    k.m = model.m;
    k.s = s;
    k.t = t_list[seg];
    k.dt = dts[seg];
    k.P.resize(n, n);
    int c0 = 0;
    for (int w = 0; w < jobs; ++w) {
      const Mat& b = blocks[w][seg];
      k.P.middleCols(c0, b.cols()) = b;
      c0 += static_cast<int>(b.cols());
    }
    clip(k);
    out.push_back(std::move(k));
  }
  return out;
}

KernelEstimate estimate_kernels(const CoefficientModel& model, const DiscreteDomain& dom, double s, double t,
                                const KernelConfig& cfg) {
  return estimate_kernels(model, dom, s, std::vector<double>{t}, cfg).front();
}

Mat tail_mass(const KernelEstimate& k, double r, const std::vector<int>& xs) {
  if (!(r < k.dom.L)) throw ConfigError("tail radius must be smaller than the domain half-width");
  if (xs.empty()) throw ConfigError("no base points for the tail estimate");
  const int m = k.m, P = k.dom.points();
  std::vector<int> far;
  for (int y = 0; y < P; ++y)
    if (k.dom.point(y).norm() > r) far.push_back(y);
  Mat out = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int x : xs) {
        double acc = 0.0;
        for (int y : far) acc += k(i, j, x, y);
        out(i, j) = std::max(out(i, j), acc);
      }
  return out;
}

Mat tail_mass(const KernelEstimate& k, double r) { return tail_mass(k, r, k.dom.window(k.dom.default_collar())); }

TightnessProfile tightness_profile(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                   const std::vector<double>& t_list, const std::vector<double>& r_list,
                                   const KernelConfig& cfg) {
  TightnessProfile prof;
  prof.t_list = t_list;
  prof.r_list = r_list;
  prof.kernels = estimate_kernels(model, dom, s, t_list, cfg);
  for (std::size_t a = 0; a < t_list.size(); ++a) {
    std::vector<double> row;
    for (double r : r_list) {
      Mat tm = tail_mass(prof.kernels[a], r);
      for (int i = 0; i < model.m; ++i)
        for (int j = 0; j < model.m; ++j) prof.rows.push_back({t_list[a], r, i, j, tm(i, j)});
      row.push_back(tm.maxCoeff());
    }
    prof.max_tail.push_back(std::move(row));
  }
  return prof;
}

Vec smooth_indicator(const DiscreteDomain& dom, const Subset& subset, int n) {
  if (subset.center.size() != dom.d) throw ConfigError("subset center has wrong dimension");
  if (n < 1) throw ConfigError("indicator sharpness must be positive");
  Vec out(dom.points());
  for (int p = 0; p < dom.points(); ++p) {
    Vec x = dom.point(p) - subset.center;
    double dist = subset.shape == Subset::Shape::ball ? subset.radius - x.norm()
                                                      : subset.radius - x.cwiseAbs().maxCoeff();
    out(p) = std::clamp(n * dist, 0.0, 1.0);
  }
  return out;
}

void write_kernel_binary(const KernelEstimate& k, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  const std::int64_t hdr[3] = {k.dom.d, k.m, k.dom.N};
  const double fhdr[4] = {k.dom.L, k.s, k.t, k.dt};
  os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  os.write(reinterpret_cast<const char*>(fhdr), sizeof fhdr);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = k.P;
  os.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!os) throw ConfigError("failed writing " + path);
}

KernelEstimate read_kernel_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::int64_t hdr[3];
  double fhdr[4];
  is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  is.read(reinterpret_cast<char*>(fhdr), sizeof fhdr);
  if (!is) throw ConfigError("truncated kernel file " + path);
  KernelEstimate k;
  k.dom = build_grid(static_cast<int>(hdr[0]), fhdr[0], static_cast<int>(hdr[2]), Boundary::dirichlet);
  k.m = static_cast<int>(hdr[1]);
  k.s = fhdr[1];
  k.t = fhdr[2];
  k.dt = fhdr[3];
  const int n = k.dom.unknowns(k.m);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(n, n);
  is.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!is) throw ConfigError("truncated kernel file " + path);
  k.P = rm;
  k.total_mass = k.P.sum();
  return k;
}

}  // namespace wcp
