#include "wcp/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wcp {

std::string to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "neumann"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return Boundary::dirichlet;
  if (s == "neumann") return Boundary::neumann;
  throw ConfigError("unknown boundary condition '" + s + "'");
}

Vec DiscreteDomain::point(int flat_index) const {
  auto mi = multi(flat_index);
  Vec x(d);
  for (int a = 0; a < d; ++a) x(a) = coord(mi[a]);
  return x;
}

std::array<int, 2> DiscreteDomain::multi(int flat_index) const {
  if (d == 1) return {flat_index, 0};
  return {flat_index / N, flat_index % N};
}

int DiscreteDomain::flat(const std::array<int, 2>& idx) const {
  if (d == 1) return idx[0];
  return idx[0] * N + idx[1];
}

bool DiscreteDomain::on_boundary(int flat_index) const {
  auto mi = multi(flat_index);
  for (int a = 0; a < d; ++a)
    if (mi[a] == 0 || mi[a] == N - 1) return true;
  return false;
}

double DiscreteDomain::cell_volume() const { return std::pow(dx, d); }

std::vector<int> DiscreteDomain::window(double collar) const {
  std::vector<int> out;
  const double lim = L - collar + 1e-9 * dx;
  for (int p = 0; p < points(); ++p)
    if (point(p).cwiseAbs().maxCoeff() <= lim) out.push_back(p);
  return out;
}

double DiscreteDomain::default_collar() const { return std::max(4.0 * dx, 0.1 * L); }

int DiscreteDomain::nearest(const Vec& x) const {
  if (x.size() != d) throw ConfigError("point has wrong dimension");
  std::array<int, 2> mi{0, 0};
  for (int a = 0; a < d; ++a) mi[a] = std::clamp(static_cast<int>(std::lround((x(a) + L) / dx)), 0, N - 1);
  return flat(mi);
}

DiscreteDomain build_grid(int d, double L, int N, Boundary bc) {
  if (d < 1 || d > 2) throw ConfigError("grid dimension must be 1 or 2");
  if (N < 3) throw ConfigError("grid needs N >= 3");
  if (!(L > 0.0)) throw ConfigError("grid needs L > 0");
  DiscreteDomain dom;
  dom.d = d;
  dom.L = L;
  dom.N = N;
  dom.dx = 2.0 * L / (N - 1);
  dom.bc = bc;
  return dom;
}

namespace {

// Neighbour index along one axis; out-of-range indices are mirrored (Neumann ghosts).
int reflect(int i, int N) {
  if (i < 0) return -i;
  if (i > N - 1) return 2 * (N - 1) - i;
  return i;
}

}  // namespace

DiscreteGenerator assemble_generator(const CoefficientModel& model, const DiscreteDomain& dom, double t, bool upwind) {
  if (model.d != dom.d) throw ConfigError("model dimension does not match the grid");
  const int m = model.m, P = dom.points(), d = dom.d, N = dom.N;
  const double dx = dom.dx, dx2 = dx * dx;
  const bool dirichlet = dom.bc == Boundary::dirichlet;

  DiscreteGenerator gen;
  gen.t = t;
  gen.m = m;
  gen.dom = dom;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * P * (d == 1 ? 3 + m : 9 + m));

  for (int p = 0; p < P; ++p) {
    const bool boundary = dom.on_boundary(p);
    if (dirichlet && boundary) {
      for (int k = 0; k < m; ++k) gen.pinned.push_back(dom.index(k, p));
      continue;
    }
    const Vec x = dom.point(p);
    const auto mi = dom.multi(p);
    auto nb = [&](int a, int off_a, int b = -1, int off_b = 0) {
      std::array<int, 2> q = mi;
      q[a] = reflect(q[a] + off_a, N);
      if (b >= 0) q[b] = reflect(q[b] + off_b, N);
      return dom.flat(q);
    };
    auto add = [&](int k, int col_point, double v) {
      if (v == 0.0) return;
      if (dirichlet && dom.on_boundary(col_point)) return;  // boundary values are zero
      trip.emplace_back(dom.index(k, p), dom.index(k, col_point), v);
    };
    Mat c = model.coupling(t, x);
    for (int k = 0; k < m; ++k) {
      Mat q = model.diffusion(k, t, x);
      Vec b = model.drift(k, t, x);
      if (!q.allFinite() || !b.allFinite() || !c.allFinite())
        throw NumericError("coefficient evaluation is not finite at t=" + std::to_string(t));
      const double asym = (q - q.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
        throw ConfigError("diffusion matrix is not symmetric at t=" + std::to_string(t));
      for (int a = 0; a < d; ++a) {
        add(k, nb(a, +1), q(a, a) / dx2);
        add(k, nb(a, -1), q(a, a) / dx2);
        add(k, p, -2.0 * q(a, a) / dx2);
        if (upwind) {
          if (b(a) > 0.0) {
            add(k, nb(a, +1), b(a) / dx);
            add(k, p, -b(a) / dx);
          } else if (b(a) < 0.0) {
            add(k, p, b(a) / dx);
            add(k, nb(a, -1), -b(a) / dx);
          }
        } else {
          add(k, nb(a, +1), b(a) / (2.0 * dx));
          add(k, nb(a, -1), -b(a) / (2.0 * dx));
        }
      }
      if (d == 2) {
        const double w = (q(0, 1) + q(1, 0)) / (4.0 * dx2);
        add(k, nb(0, +1, 1, +1), w);
        add(k, nb(0, -1, 1, -1), w);
        add(k, nb(0, +1, 1, -1), -w);
        add(k, nb(0, -1, 1, +1), -w);
      }
      for (int j = 0; j < m; ++j)
        if (c(k, j) != 0.0) trip.emplace_back(dom.index(k, p), dom.index(j, p), c(k, j));
    }
  }
  const int n = dom.unknowns(m);
  gen.matrix.resize(n, n);
  gen.matrix.setFromTriplets(trip.begin(), trip.end());
  gen.matrix.makeCompressed();
  return gen;
}

Vec apply_generator(const DiscreteGenerator& gen, const Vec& u) {
  if (u.size() != gen.matrix.cols()) throw ConfigError("state size does not match the generator");
  return gen.matrix * u;
}

double min_offdiagonal(const DiscreteGenerator& gen) {
  double mn = std::numeric_limits<double>::infinity();
  for (int col = 0; col < gen.matrix.outerSize(); ++col)
    for (SpMat::InnerIterator it(gen.matrix, col); it; ++it)
      if (it.row() != it.col()) mn = std::min(mn, it.value());
  return mn;
}

}  // namespace wcp
