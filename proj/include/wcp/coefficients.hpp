#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wcp/timefn.hpp"
#include "wcp/types.hpp"

namespace wcp {

/// Exponents and time profiles of the polynomial coefficient family
///   q_ij^k = omega_ij^k(t) (1+|x|^2)^{h_ij^k}
///   b_i^k  = -gamma_i^k(t) x_i (1+|x|^2)^{ell_i^k}
///   c_hk   = d_hk(t) (1+|x|^2)^{sigma_hk}
struct PolynomialModelSpec {
  int d = 1;
  int m = 1;
  std::vector<std::vector<std::vector<TimeFunction>>> omega;  // [k][i][j]
  std::vector<std::vector<TimeFunction>> gamma;               // [k][i]
  std::vector<std::vector<TimeFunction>> dmat;                // [h][k]
  std::vector<std::vector<std::vector<Rational>>> h_exp;      // [k][i][j]
  std::vector<std::vector<Rational>> ell_exp;                 // [k][i]
  std::vector<std::vector<Rational>> sigma_exp;               // [h][k]
  double t0 = 0.0;  // working time interval
  double t1 = 1.0;

  /// max over i of {sigma_kk, ell_i^k}
  Rational tau(int k) const;
  bool autonomous() const;
};

/// Constant diffusion q_k I, linear drift -gamma_k x and coupling C(x) = profile(x) C0.
struct ProfiledModelSpec {
  enum class Profile { constant, abs_plus_one };
  int d = 1;
  int m = 1;
  std::vector<double> q;      // per component
  std::vector<double> gamma;  // per component
  Mat c0;                     // m x m
  Profile profile = Profile::constant;
};

/// Evaluators for Q^k(t,x), b^k(t,x) and C(t,x). Immutable after construction.
struct CoefficientModel {
  int d = 1;
  int m = 1;
  std::string name;
  bool autonomous = true;
  std::function<Mat(int k, double t, const Vec& x)> diffusion;
  std::function<Vec(int k, double t, const Vec& x)> drift;
  std::function<Mat(double t, const Vec& x)> coupling;
  /// Optional exact divergence of b^k - (sum_j D_j q_ij^k)_i.
  std::function<double(int k, double t, const Vec& x)> drift_correction_divergence;
  std::optional<PolynomialModelSpec> polynomial;
  std::optional<ProfiledModelSpec> profiled;
};

CoefficientModel build_polynomial_model(const PolynomialModelSpec& spec);
CoefficientModel build_profiled_model(const ProfiledModelSpec& spec);

/// Scalar model for component k alone: A_k + c_kk.
CoefficientModel component_model(const CoefficientModel& model, int k);

/// Value, gradient and Hessian of each component at a point.
struct Jet {
  Vec value;                // m
  std::vector<Vec> grad;    // m entries of size d
  std::vector<Mat> hess;    // m entries of size d x d
};

/// Scalar C^2 function with derivatives.
struct ScalarJet {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;

  /// Jet of f times the all-ones vector in R^m.
  Jet replicate(const Vec& x, int m) const;
};

ScalarJet quadratic_lyapunov();      // 1 + |x|^2
ScalarJet inverse_quadratic();       // 1 / (1 + |x|^2)
ScalarJet constant_jet(double c);

/// (A(t) psi)(x)
Vec eval_operator(const CoefficientModel& model, const Jet& psi, double t, const Vec& x);

// ---------------------------------------------------------------- reports

enum class Verdict { certified, refuted, sampled_pass, sampled_fail };
std::string to_string(Verdict v);
bool passed(Verdict v);

struct Witness {
  double t = 0.0;
  Vec x;
  int k = -1;
  double value = 0.0;
  std::string label;
};

struct HypothesisCheck {
  std::string name;
  Verdict verdict = Verdict::sampled_pass;
  std::vector<Witness> witnesses;
  std::string detail;
  bool pass() const { return passed(verdict); }
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  nlohmann::json constants = nlohmann::json::object();

  bool all_pass() const;
  const HypothesisCheck* find(const std::string& name) const;
  bool has_pass(const std::string& name) const;
  void add(HypothesisCheck c) { checks.push_back(std::move(c)); }
  void merge(const HypothesisReport& other);
  nlohmann::json to_json() const;
};

/// Sample points and times for hypothesis checks.
struct SampleSet {
  std::vector<double> times;
  std::vector<Vec> points;
  double radius = 0.0;  // half-width of the sampled box

  bool on_outer_shell(const Vec& x) const;
};

/// Tensor lattice with n_per_dim points per axis on [-R,R]^d.
SampleSet make_samples(int d, double R, const std::vector<double>& times, int n_per_dim);

// ---------------------------------------------------------------- checks

HypothesisReport check_structural_hypotheses(const CoefficientModel& model, const SampleSet& samples);

struct IrreducibilityResult {
  bool irreducible = false;
  /// chains[k][i] = i-th layer of components reached from k.
  std::vector<std::vector<std::set<int>>> chains;
};

/// Support graph of C: entry (j,k) true iff c_jk is not identically zero.
std::vector<std::vector<bool>> coupling_support(const CoefficientModel& model, const SampleSet& samples);
IrreducibilityResult check_irreducibility(const CoefficientModel& model, const SampleSet& samples);

enum class LyapunovMode { general, dissipative };

HypothesisReport check_lyapunov(const CoefficientModel& model, const ScalarJet& phi, double t0, double t1,
                                LyapunovMode mode, const SampleSet& samples);

/// Convex comparison function with declared growth exponent at infinity.
struct ComparisonFunction {
  std::function<double(double)> h;
  double growth = 1.0;
  /// h(y) = c1 y^p - c2
  static ComparisonFunction power(double c1, double p, double c2);
};

/// Fit h_k(y) = c1 y^{1+tau} - c2 with (A phi 1)_k <= -h_k(phi) on all samples.
std::vector<ComparisonFunction> fit_comparison_functions(const CoefficientModel& model, const ScalarJet& phi,
                                                         const std::vector<double>& tau, const SampleSet& samples,
                                                         std::vector<std::pair<double, double>>* coeffs = nullptr);

HypothesisReport check_comp2_conditions(const CoefficientModel& model, const ScalarJet& phi,
                                        const std::vector<ComparisonFunction>& h_funcs,
                                        const std::vector<ScalarJet>& w_funcs, double R, double mu,
                                        const SampleSet& samples);

HypothesisReport check_section6_conditions(const PolynomialModelSpec& spec);

/// Inputs of the gradient hypothesis that the coefficients alone do not fix.
struct GradientInputs {
  double alpha = 1.0;
  double gamma = 1.0;
  double omega0 = 1.0;
  double omega1 = 1.0;
};

/// Sampled sigma_{k,J} with pointwise-minimal choices of mu_k, r_k, rho_0, rho_1.
HypothesisReport check_gradient_hypothesis(const CoefficientModel& model, const SampleSet& samples,
                                           const GradientInputs& in);

/// Sampled certificate that Cesaro limits are nontrivial: a positive bounded g with
/// A(t) g >= 0, or a component j and g with (A_j(t) + c_jj) g >= 0.
HypothesisCheck check_measure_certificate(const CoefficientModel& model, const SampleSet& samples);

/// lambda0 with lambda0 v - A(t)(v 1) >= 0 on samples, scaled by (1 + margin).
double fit_c0_supersolution_rate(const CoefficientModel& model, const ScalarJet& v, const SampleSet& samples,
                                 double margin = 0.1);

}  // namespace wcp
