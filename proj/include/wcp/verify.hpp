#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wcp/solver.hpp"

namespace wcp {

enum class TolKind { relative, absolute };

/// Outcome of one property check. pass iff measured <= bound * (1 + tol) for a
/// relative tolerance, measured <= bound + tol for an absolute one.
struct PropertyVerdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  double tol = 0.0;
  TolKind tol_kind = TolKind::relative;
  std::vector<Witness> witnesses;
  nlohmann::json extra = nlohmann::json::object();

  static PropertyVerdict make(std::string name, double measured, double bound, double tol, TolKind kind);
  nlohmann::json to_json() const;
};

using Trajectory = std::vector<StateField>;

/// Fields at s and after every `stride` steps (the final step is always kept).
Trajectory trajectory(const CoefficientModel& model, const DiscreteDomain& dom, const EvolveConfig& cfg,
                      const StateField& f, int stride = 1);

/// Grid points used for sup-norm measurements (default collar excluded).
std::vector<int> inner_window(const DiscreteDomain& dom);

/// Needs passing offdiag_nonnegative and rowsum_nonpositive checks in `cert`.
PropertyVerdict check_max_principle(const Trajectory& traj, const HypothesisReport& cert);

PropertyVerdict check_sup_estimate(const Trajectory& traj, double K);

struct StepSettings {
  double dt = 0.0;
  Scheme scheme = Scheme::theta;
  bool upwind = false;
};

/// G(t,s)(phi 1) <= phi + a/c on the inner window.
PropertyVerdict check_lyapunov_bound(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                     const std::vector<double>& t_list, const ScalarJet& phi, double a, double c,
                                     const StepSettings& st);

/// min over [s0, t0] and the inner window of G(t, s0) 1. The constant is in extra["c0"].
PropertyVerdict check_lower_bound_c0(const CoefficientModel& model, const DiscreteDomain& dom, double s0, double t0,
                                     const StepSettings& st);

/// y(b) for y' = -c0 h(y), y(0) = y0.
double ode_comparison_envelope(const std::function<double(double)>& h, double c0, double y0, double b);

/// max_x (G(s+delta, s)(phi 1))_k <= y_k(delta; y0 = max phi) for each delta.
PropertyVerdict check_ode_envelope(const CoefficientModel& model, const DiscreteDomain& dom, double s,
                                   const std::vector<double>& deltas, const ScalarJet& phi,
                                   const std::vector<ComparisonFunction>& h, double c0, const StepSettings& st);

struct GammaResult {
  double gamma = 0.0;
  bool finite = true;
  Witness worst;
  /// 2 kappa_C - min_k div gamma^k at (t, x)
  std::function<double(double, const Vec&)> integrand;
};

/// Throws MissingCertificate when the integrand grows toward the sample boundary.
GammaResult compute_gamma(const CoefficientModel& model, const SampleSet& samples);

/// Upper bound of the quadratic form of C(t, x).
double kappa_C(const CoefficientModel& model, double t, const Vec& x);

/// Divergence of b^k - (sum_j D_j q_ij^k)_i.
double drift_correction_divergence(const CoefficientModel& model, int k, double t, const Vec& x);

double lp_norm(const StateField& u, double p);

PropertyVerdict check_L2_estimate(const Trajectory& traj, double gamma);

/// ||u(t)||_p <= exp([K(1 - 2/p) + Gamma/p](t - s)) ||f||_p
PropertyVerdict check_Lp_estimate(const Trajectory& traj, double p, double K, double gamma);

/// max over the trajectory and inner window of |grad u_k| (central differences).
double sup_gradient(const Trajectory& traj, Witness* where = nullptr);

/// sup |grad u(t)| <= envelope(t - s) + tol.
PropertyVerdict check_gradient_envelope(const Trajectory& traj, const std::function<double(double)>& envelope,
                                        double tol);

/// Two-grid boundedness: sup gradient on `fine` over sup gradient on `coarse` <= 1.1.
/// Needs a passing gradient_hypothesis or gradient_bound check in `cert`.
PropertyVerdict check_gradient_bound(const CoefficientModel& model, const DiscreteDomain& coarse,
                                     const DiscreteDomain& fine, const std::function<Vec(const Vec&)>& f,
                                     const EvolveConfig& cfg, const HypothesisReport& cert);

/// |u(t, x)| <= e^{lambda0 (t-s)} ||f|| max_k v(x) / inf_{B_r} v for |x| >= r, f supported in B_r.
/// Throws MissingCertificate if lambda0 v - A(t)(v 1) >= 0 fails on `samples`.
PropertyVerdict check_c0_preserve(const CoefficientModel& model, const DiscreteDomain& dom,
                                  const std::function<Vec(const Vec&)>& f, double r, const ScalarJet& v,
                                  double lambda0, const SampleSet& samples, const EvolveConfig& cfg);

/// G(t,s) theta_n(B_R) 1 >= c0/2 on the inner window once the tail mass is small.
/// Needs a passing compactness or comparison_dissipation check in `cert`.
PropertyVerdict check_c0_not_preserved(const CoefficientModel& model, const DiscreteDomain& dom, double R, int n,
                                       const EvolveConfig& cfg, const HypothesisReport& cert);

}  // namespace wcp
