#pragma once

#include <nlohmann/json.hpp>
#include <utility>
#include <vector>

namespace wcp {

/// c + a_s sin(w_s t) + a_c cos(w_c t) + a_e exp(-r_e t)
struct TimeFunction {
  double c = 0.0;
  double sin_a = 0.0, sin_w = 1.0;
  double cos_a = 0.0, cos_w = 1.0;
  double exp_a = 0.0, exp_r = 0.0;

  static TimeFunction constant(double v) {
    TimeFunction f;
    f.c = v;
    return f;
  }

  double operator()(double t) const;
  /// Upper bound on |f'| over [t0, t1].
  double lipschitz(double t0, double t1) const;
  bool is_constant() const;
  bool is_zero() const;
};

/// Guaranteed enclosure [lo, hi] of f over [t0, t1] from a grid scan plus the
/// Lipschitz slack of the gaps.
std::pair<double, double> enclose(const TimeFunction& f, double t0, double t1, int n_grid = 257);

/// Enclosure of sum_i w_i f_i over [t0, t1].
std::pair<double, double> enclose_sum(const std::vector<TimeFunction>& fs, const std::vector<double>& weights,
                                      double t0, double t1, int n_grid = 257);

TimeFunction time_function_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TimeFunction& f);

/// Exact exponent arithmetic for growth-order comparisons.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational from_double(double x);
  static Rational from_json(const nlohmann::json& j);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, long long k);
  friend bool operator<(Rational a, Rational b);
  friend bool operator==(Rational a, Rational b);
  friend bool operator>(Rational a, Rational b) { return b < a; }
  friend bool operator<=(Rational a, Rational b) { return !(b < a); }
  friend bool operator>=(Rational a, Rational b) { return !(a < b); }
};

std::string to_string(const Rational& r);

}  // namespace wcp
