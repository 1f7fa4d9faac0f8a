#include "wcp/timefn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcp/types.hpp"

namespace wcp {

double TimeFunction::operator()(double t) const {
  return c + sin_a * std::sin(sin_w * t) + cos_a * std::cos(cos_w * t) +
         exp_a * std::exp(-exp_r * t);
}

double TimeFunction::lipschitz(double t0, double t1) const {
  (void)t1;
  double lip = std::abs(sin_a * sin_w) + std::abs(cos_a * cos_w);
  if (exp_a != 0.0 && exp_r != 0.0) {
    double worst = exp_r > 0 ? std::exp(-exp_r * t0) : std::exp(-exp_r * t1);
    lip += std::abs(exp_a * exp_r) * worst;
  }
  return lip;
}

bool TimeFunction::is_constant() const {
  return sin_a == 0.0 && cos_a == 0.0 && (exp_a == 0.0 || exp_r == 0.0);
}

bool TimeFunction::is_zero() const {
  if (sin_a != 0.0 || cos_a != 0.0) return false;
  return exp_r == 0.0 ? c + exp_a == 0.0 : (c == 0.0 && exp_a == 0.0);
}

std::pair<double, double> enclose(const TimeFunction& f, double t0, double t1, int n_grid) {
  if (f.is_constant()) {
    double v = f(t0);
    return {v, v};
  }
  if (t1 < t0) std::swap(t0, t1);
  n_grid = std::max(n_grid, 2);
  double h = (t1 - t0) / (n_grid - 1);
  double lo = f(t0), hi = lo;
  for (int i = 1; i < n_grid; ++i) {
    double v = f(t0 + i * h);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double slack = 0.5 * h * f.lipschitz(t0, t1);
  return {lo - slack, hi + slack};
}

std::pair<double, double> enclose_sum(const std::vector<TimeFunction>& fs, const std::vector<double>& weights,
                                      double t0, double t1, int n_grid) {
  auto value = [&](double t) {
    double v = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) v += weights[i] * fs[i](t);
    return v;
  };
  bool constant = true;
  double lip = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    constant = constant && fs[i].is_constant();
    lip += std::abs(weights[i]) * fs[i].lipschitz(std::min(t0, t1), std::max(t0, t1));
  }
  if (constant) {
    double v = value(t0);
    return {v, v};
  }
  if (t1 < t0) std::swap(t0, t1);
  n_grid = std::max(n_grid, 2);
  double h = (t1 - t0) / (n_grid - 1);
  double lo = value(t0), hi = lo;
  for (int i = 1; i < n_grid; ++i) {
    double v = value(t0 + i * h);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo - 0.5 * h * lip, hi + 0.5 * h * lip};
}

TimeFunction time_function_from_json(const nlohmann::json& j) {
  TimeFunction f;
  if (j.is_number()) {
    f.c = j.get<double>();
    return f;
  }
  if (!j.is_object()) throw ConfigError("time function must be a number or an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    const auto& v = it.value();
    auto pair = [&](double& a, double& w) {
      if (!v.is_array() || v.size() != 2)
        throw ConfigError("time function term '" + key + "' expects [amplitude, rate]");
      a = v[0].get<double>();
      w = v[1].get<double>();
    };
    if (key == "c") {
      f.c = v.get<double>();
    } else if (key == "sin") {
      pair(f.sin_a, f.sin_w);
    } else if (key == "cos") {
      pair(f.cos_a, f.cos_w);
    } else if (key == "exp") {
      pair(f.exp_a, f.exp_r);
    } else {
      throw ConfigError("unknown time function term '" + key + "'");
    }
  }
  return f;
}

nlohmann::json to_json(const TimeFunction& f) {
  if (f.sin_a == 0.0 && f.cos_a == 0.0 && f.exp_a == 0.0) return f.c;
  nlohmann::json j = {{"c", f.c}};
  if (f.sin_a != 0.0) j["sin"] = {f.sin_a, f.sin_w};
  if (f.cos_a != 0.0) j["cos"] = {f.cos_a, f.cos_w};
  if (f.exp_a != 0.0) j["exp"] = {f.exp_a, f.exp_r};
  return j;
}

namespace {

Rational normalized(long long num, long long den) {
  if (den == 0) throw ConfigError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

}  // namespace

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw ConfigError("exponent must be finite");
  for (long long den = 1; den <= 10000; ++den) {
    double scaled = x * static_cast<double>(den);
    double r = std::round(scaled);
    if (std::abs(scaled - r) <= 1e-9 * std::max(1.0, std::abs(scaled)))
      return normalized(static_cast<long long>(r), den);
  }
  throw ConfigError("exponent " + std::to_string(x) +
                    " is not a rational with denominator <= 10000; write it as \"p/q\"");
}

Rational Rational::from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational{j.get<long long>(), 1};
  if (j.is_number()) return from_double(j.get<double>());
  if (j.is_string()) {
    auto s = j.get<std::string>();
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Rational{std::stoll(s), 1};
      return normalized(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse exponent '" + s + "'");
    }
  }
  throw ConfigError("exponent must be a number or a \"p/q\" string");
}

Rational operator+(Rational a, Rational b) {
  return normalized(a.num * b.den + b.num * a.den, a.den * b.den);
}
Rational operator-(Rational a, Rational b) {
  return normalized(a.num * b.den - b.num * a.den, a.den * b.den);
}
Rational operator*(Rational a, long long k) { return normalized(a.num * k, a.den); }
bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
bool operator==(Rational a, Rational b) { return a.num * b.den == b.num * a.den; }

std::string to_string(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

}  // namespace wcp
