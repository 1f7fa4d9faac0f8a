#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wcp/verify.hpp"

namespace wcp {

/// Cell masses mu_{i,t} on the grid, one flat vector (k * N^d + point) per time.
struct MeasureSystem {
  DiscreteDomain dom;
  int m = 1;
  Vec x0;
  int anchor = 0;
  double horizon = 0.0;
  double tau_step = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Vec> mass;
  /// TV distance between the horizon-r and half-horizon averages, per Cesaro time.
  std::vector<double> tv_ladder;
  bool converged = false;
  /// Total mass at the horizon over total mass at the half horizon, per Cesaro time.
  std::vector<double> mass_ratio;
  /// Mass decays like 1/horizon: the limit is the zero measure.
  bool trivial = false;

  std::size_t index_of(double t) const;
  const Vec& at(double t) const { return mass[index_of(t)]; }
  double total_mass(double t) const { return at(t).sum(); }
  nlohmann::json manifest() const;
};

struct CesaroConfig {
  Vec x0;
  int anchor = 0;
  /// Cesaro averages are built at lattice times 0, u, ..., n u.
  int n = 0;
  double lattice_step = 1.0;
  double horizon = 20.0;
  /// Nominal time step; 0 selects dx. The tau grid uses 4 steps per node.
  double dt = 0.0;
  Scheme scheme = Scheme::implicit_euler;
  bool upwind = false;
  double cauchy_tol = 2e-2;
  /// Non-lattice times added through mu_s = G(n, s)^T mu_n.
  std::vector<double> extra_times;
};

MeasureSystem cesaro_measures(const CoefficientModel& model, const DiscreteDomain& dom, const CesaroConfig& cfg);

/// Half the L1 distance between two cell-mass vectors.
double tv_distance(const Vec& a, const Vec& b);

/// sum_i int f_i dmu_i for a flat grid function f.
double integrate(const Vec& mu, const Vec& f);

/// |sum_i int (G(t,s) f)_i dmu_{i,t} - sum_i int f_i dmu_{i,s}|
double invariance_residual(const MeasureSystem& ms, const CoefficientModel& model, const Vec& f, double s, double t,
                           const StepSettings& st);

/// ||f||_{L^p(mu)}
double lp_norm_measure(const Vec& mu, const Vec& f, double p);

/// ||G(t,s) f||_{L^p(mu_t)} / ||f||_{L^p(mu_s)} <= (2 e^{K(t-s)})^{(p-1)/p}
PropertyVerdict check_measure_lp_bound(const MeasureSystem& ms, const CoefficientModel& model, double p,
                                  const std::vector<Vec>& fs, double s, double t, double K, const StepSettings& st);

/// Disjoint sets of grid points covering the grid.
using Partition = std::vector<std::vector<int>>;

/// Axis-aligned blocks of `width` grid points per axis; blocks with zero mass for some
/// component are merged into their predecessor.
Partition uniform_partition(const DiscreteDomain& dom, const Vec& mu, int m, int width);

/// Componentwise conditional expectation of f with respect to mu on the partition.
Vec finite_rank_projection(const MeasureSystem& ms, double t, const Partition& part, const Vec& f);

/// Smooth random grid functions with unit sup norm.
std::vector<Vec> random_test_functions(const DiscreteDomain& dom, int m, int count, std::uint64_t seed);

/// Refines a uniform partition until the projections of G(t,s) f are eps-close in sup
/// norm, then checks the L^p(mu) deviation against 2 eps^{1-1/p}.
PropertyVerdict epsilon_net_experiment(const MeasureSystem& ms, const CoefficientModel& model, double s, double t,
                                       double eps, double p, int count, std::uint64_t seed, const StepSettings& st);

void write_measures_csv(const MeasureSystem& ms, const std::string& path);

}  // namespace wcp
