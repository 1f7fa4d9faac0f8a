#pragma once

#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "wcp/discretization.hpp"

namespace wcp {

enum class Scheme { implicit_euler, theta };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct StateField {
  DiscreteDomain dom;
  int m = 1;
  Vec values;
  double t = 0.0;

  static StateField zeros(const DiscreteDomain& dom, int m, double t);
  /// Samples f(x) in R^m at every grid point.
  static StateField sample(const DiscreteDomain& dom, int m, double t, const std::function<Vec(const Vec&)>& f);

  double& at(int k, int p) { return values(dom.index(k, p)); }
  double at(int k, int p) const { return values(dom.index(k, p)); }
  /// Throws NumericError on NaN/Inf.
  void validate() const;
  /// max |u| over the given grid points and all components.
  double sup_norm(const std::vector<int>& pts) const;
  double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
};

struct EvolveConfig {
  double s = 0.0;
  double t_end = 1.0;
  double dt = 0.0;  // 0 selects dt = dx
  Scheme scheme = Scheme::implicit_euler;
  std::vector<double> record_times;
  bool upwind = false;
};

/// Number of steps and effective step size for [s, t_end] with nominal dt.
std::pair<int, double> step_grid(double s, double t_end, double dt);

/// Time stepper for one model/grid pair. Autonomous models factorize once.
class Propagator {
 public:
  Propagator(const CoefficientModel& model, const DiscreteDomain& dom, double dt, Scheme scheme, bool upwind);

  /// u(t) -> u(t + dt)
  void advance(Vec& u, double t);
  /// Each column of U advanced from t to t + dt.
  void advance(Mat& U, double t);
  /// r -> S^T r where S is the step map from t to t + dt.
  void advance_adjoint(Vec& r, double t);

  double dt() const { return dt_; }
  int size() const { return n_; }

 private:
  void prepare(double t);
  Vec rhs(const Vec& u) const;
  void check_residual(const Vec& x, const Vec& b, double t) const;

  const CoefficientModel* model_;
  DiscreteDomain dom_;
  double dt_;
  Scheme scheme_;
  bool upwind_;
  int n_;
  double theta_;
  bool iterative_;
  std::optional<double> prepared_t_;
  SpMat lhs_;        // I - theta dt L(t + dt)
  SpMat explicit_;   // I + (1 - theta) dt L(t)
  std::vector<int> pinned_;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
};

/// One step with generators supplied by gen_at.
StateField step(const std::function<DiscreteGenerator(double)>& gen_at, const StateField& u, double dt, Scheme scheme);

/// Visits the initial field and the field after every step.
void evolve_visit(const CoefficientModel& model, const DiscreteDomain& dom, const EvolveConfig& cfg,
                  const StateField& f, const std::function<void(const StateField&)>& visit);

std::vector<StateField> evolve(const CoefficientModel& model, const DiscreteDomain& dom, const EvolveConfig& cfg,
                               const StateField& f);

struct ExhaustionReport {
  std::vector<double> ladder;
  std::vector<double> deltas;
  bool converged = false;
  StateField final_field;
  /// Final rung restricted to the inner box, one vector per rung.
  std::vector<Vec> inner_values;
  std::vector<Vec> inner_points;
};

struct LadderRung {
  double L;
  int N;
};

ExhaustionReport exhaustion_solve(const CoefficientModel& model, const std::function<Vec(const Vec&)>& f, double s,
                                  double t_end, const std::vector<LadderRung>& ladder, double inner_L, double tol,
                                  Boundary bc, double dt, Scheme scheme, bool upwind, int jobs = 1);

struct KbarResult {
  Mat cbar;
  double K = 0.0;
  bool exact = false;
};

KbarResult compute_Kbar(const CoefficientModel& model, const SampleSet& samples);

}  // namespace wcp
