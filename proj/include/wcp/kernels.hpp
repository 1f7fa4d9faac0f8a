#pragma once

#include <string>
#include <vector>

#include "wcp/solver.hpp"

namespace wcp {

/// Kernel masses p_ij(t, s, x, cell(y)) on the grid. Row (i, x), column (j, y),
/// both using the flat ordering k * N^d + point.
struct KernelEstimate {
  DiscreteDomain dom;
  int m = 1;
  double s = 0.0;
  double t = 0.0;
  double dt = 0.0;
  Mat P;
  double clipped_mass = 0.0;
  double total_mass = 0.0;
  /// clipped_mass > 1e-6 * total_mass
  bool flagged = false;

  double operator()(int i, int j, int x, int y) const { return P(dom.index(i, x), dom.index(j, y)); }
};

struct KernelConfig {
  double dt = 0.0;  // 0 selects dx
  Scheme scheme = Scheme::implicit_euler;
  bool upwind = false;
  int jobs = 1;
};

KernelEstimate estimate_kernels(const CoefficientModel& model, const DiscreteDomain& dom, double s, double t,
                                const KernelConfig& cfg);

/// Kernels at every time of t_list (sorted, > s) from one pass.
std::vector<KernelEstimate> estimate_kernels(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                             const std::vector<double>& t_list, const KernelConfig& cfg);

/// sup over x in xs of sum_{|y| > r} P[i][j][x][y], as an m x m matrix.
Mat tail_mass(const KernelEstimate& P, double r, const std::vector<int>& xs);
/// Same with x over the default inner window.
Mat tail_mass(const KernelEstimate& P, double r);

struct TightnessRow {
  double t;
  double r;
  int i;
  int j;
  double tail;
};

struct TightnessProfile {
  std::vector<TightnessRow> rows;
  /// max over (i,j) of the tail, indexed [t][r]
  std::vector<std::vector<double>> max_tail;
  std::vector<double> t_list;
  std::vector<double> r_list;
  std::vector<KernelEstimate> kernels;
};

TightnessProfile tightness_profile(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                   const std::vector<double>& t_list, const std::vector<double>& r_list,
                                   const KernelConfig& cfg);

struct Subset {
  enum class Shape { box, ball };
  Shape shape = Shape::ball;
  Vec center;
  /// Radius for a ball; half-width for a box.
  double radius = 1.0;
};

/// clamp(n * dist(x, complement of subset), 0, 1) at every grid point.
Vec smooth_indicator(const DiscreteDomain& dom, const Subset& subset, int n);

/// Binary layout: int64 d, m, N; float64 L, s, t, dt; then P row-major.
void write_kernel_binary(const KernelEstimate& k, const std::string& path);
KernelEstimate read_kernel_binary(const std::string& path);

}  // namespace wcp
