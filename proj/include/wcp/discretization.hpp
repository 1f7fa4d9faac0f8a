#pragma once

#include <Eigen/Sparse>
#include <array>
#include <string>
#include <vector>

#include "wcp/coefficients.hpp"

namespace wcp {

enum class Boundary { dirichlet, neumann };
std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

using SpMat = Eigen::SparseMatrix<double>;

/// Uniform box grid [-L, L]^d with N points per axis.
struct DiscreteDomain {
  int d = 1;
  double L = 1.0;
  int N = 3;
  double dx = 1.0;
  Boundary bc = Boundary::dirichlet;

  int points() const { return d == 1 ? N : N * N; }
  int unknowns(int m) const { return m * points(); }
  double coord(int i) const { return -L + i * dx; }
  Vec point(int flat) const;
  std::array<int, 2> multi(int flat) const;
  int flat(const std::array<int, 2>& idx) const;
  int index(int k, int flat) const { return k * points() + flat; }
  bool on_boundary(int flat) const;
  double cell_volume() const;
  /// Grid points with max_i |x_i| <= L - collar.
  std::vector<int> window(double collar) const;
  /// Default boundary collar max(4 dx, 0.1 L).
  double default_collar() const;
  /// Nearest grid point to x.
  int nearest(const Vec& x) const;
};

DiscreteDomain build_grid(int d, double L, int N, Boundary bc);

struct DiscreteGenerator {
  double t = 0.0;
  int m = 1;
  DiscreteDomain dom;
  SpMat matrix;
  /// Unknowns held at zero (Dirichlet boundary nodes).
  std::vector<int> pinned;
};

DiscreteGenerator assemble_generator(const CoefficientModel& model, const DiscreteDomain& dom, double t, bool upwind);

/// L u for a flat vector of size m N^d.
Vec apply_generator(const DiscreteGenerator& gen, const Vec& u);

/// Smallest off-diagonal entry of the generator matrix.
double min_offdiagonal(const DiscreteGenerator& gen);

}  // namespace wcp
