#include "wcp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace wcp {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("section [" + where + "] must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in [" + where + "]");
}

double num(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
  return j.get<int>();
}

std::vector<double> num_list(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError(what + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(num(v, what));
  return out;
}

Vec vec(const json& j, const std::string& what) {
  auto v = num_list(j, what);
  return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool is_scalar_fn(const json& j) { return j.is_number() || j.is_object(); }
bool is_scalar_exp(const json& j) { return j.is_number() || j.is_string(); }

TimeFunction tf(const json& j, const std::string& what) {
  try {
    return time_function_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(what + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

Rational ex(const json& j, const std::string& what) {
  try {
    return Rational::from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// Per-component d-vector: scalar broadcast, or m entries each scalar or d-list.
template <class T, class F>
std::vector<std::vector<T>> per_component_vector(const json& j, int m, int d, const std::string& what, F parse,
                                                 bool (*scalar)(const json&)) {
  std::vector<std::vector<T>> out(m);
  if (scalar(j)) {
    for (auto& v : out) v.assign(d, parse(j, what));
    return out;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != m) throw ConfigError(what + " needs one entry per component");
  for (int k = 0; k < m; ++k) {
    if (scalar(j[k])) {
      out[k].assign(d, parse(j[k], what));
    } else {
      if (!j[k].is_array() || static_cast<int>(j[k].size()) != d) throw ConfigError(what + " entries need d values");
      for (int i = 0; i < d; ++i) out[k].push_back(parse(j[k][i], what));
    }
  }
  return out;
}

template <class T, class F>
std::vector<std::vector<T>> square(const json& j, int n, const std::string& what, F parse) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw ConfigError(what + " must be a " + std::to_string(n) +
                                                                          " x " + std::to_string(n) + " table");
  std::vector<std::vector<T>> out(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) throw ConfigError(what + " has a malformed row");
    for (int k = 0; k < n; ++k) out[i].push_back(parse(j[i][k], what));
  }
  return out;
}

CoefficientModel parse_polynomial(const json& j, double s, double t_end) {
  check_keys(j, {"kind", "d", "m", "t0", "t1", "omega", "gamma", "dmat", "h_exp", "ell_exp", "sigma_exp"}, "model");
  for (const char* key : {"d", "m", "omega", "gamma", "dmat", "h_exp", "ell_exp", "sigma_exp"})
    if (!j.contains(key)) throw ConfigError(std::string("[model] is missing '") + key + "'");
  PolynomialModelSpec spec;
  spec.d = integer(j["d"], "d");
  spec.m = integer(j["m"], "m");
  if (spec.d < 1 || spec.d > 2 || spec.m < 1) throw ConfigError("[model] needs d in {1,2} and m >= 1");
  spec.t0 = j.contains("t0") ? num(j["t0"], "t0") : s;
  spec.t1 = j.contains("t1") ? num(j["t1"], "t1") : t_end;
  const int m = spec.m, d = spec.d;

  // omega: scalar or per-component scalar means omega * I
  const json& om = j["omega"];
  spec.omega.assign(m, std::vector<std::vector<TimeFunction>>(d, std::vector<TimeFunction>(d)));
  auto diag_omega = [&](int k, const json& v) {
    for (int i = 0; i < d; ++i) spec.omega[k][i][i] = tf(v, "omega");
  };
  if (is_scalar_fn(om)) {
    for (int k = 0; k < m; ++k) diag_omega(k, om);
  } else {
    if (!om.is_array() || static_cast<int>(om.size()) != m) throw ConfigError("omega needs one entry per component");
    for (int k = 0; k < m; ++k) {
      if (is_scalar_fn(om[k]))
        diag_omega(k, om[k]);
      else
        spec.omega[k] = square<TimeFunction>(om[k], d, "omega", tf);
    }
  }
  const json& he = j["h_exp"];
  spec.h_exp.assign(m, std::vector<std::vector<Rational>>(d, std::vector<Rational>(d)));
  if (is_scalar_exp(he)) {
    for (auto& t : spec.h_exp)
      for (auto& row : t) row.assign(d, ex(he, "h_exp"));
  } else {
    if (!he.is_array() || static_cast<int>(he.size()) != m) throw ConfigError("h_exp needs one entry per component");
    for (int k = 0; k < m; ++k) {
      if (is_scalar_exp(he[k]))
        for (auto& row : spec.h_exp[k]) row.assign(d, ex(he[k], "h_exp"));
      else
        spec.h_exp[k] = square<Rational>(he[k], d, "h_exp", ex);
    }
  }
  spec.gamma = per_component_vector<TimeFunction>(j["gamma"], m, d, "gamma", tf, is_scalar_fn);
  spec.ell_exp = per_component_vector<Rational>(j["ell_exp"], m, d, "ell_exp", ex, is_scalar_exp);
  spec.dmat = square<TimeFunction>(j["dmat"], m, "dmat", tf);
  if (is_scalar_exp(j["sigma_exp"])) {
    spec.sigma_exp.assign(m, std::vector<Rational>(m, ex(j["sigma_exp"], "sigma_exp")));
  } else {
    spec.sigma_exp = square<Rational>(j["sigma_exp"], m, "sigma_exp", ex);
  }
  return build_polynomial_model(spec);
}

CoefficientModel parse_profiled(const json& j) {
  check_keys(j, {"kind", "d", "m", "q", "gamma", "coupling", "profile"}, "model");
  for (const char* key : {"d", "m", "q", "gamma", "coupling"})
    if (!j.contains(key)) throw ConfigError(std::string("[model] is missing '") + key + "'");
  ProfiledModelSpec spec;
  spec.d = integer(j["d"], "d");
  spec.m = integer(j["m"], "m");
  if (spec.d < 1 || spec.d > 2 || spec.m < 1) throw ConfigError("[model] needs d in {1,2} and m >= 1");
  auto per = [&](const json& v, const std::string& what) {
    auto l = num_list(v, what);
    if (l.size() == 1) l.assign(spec.m, l[0]);
    if (static_cast<int>(l.size()) != spec.m) throw ConfigError(what + " needs one entry per component");
    return l;
  };
  spec.q = per(j["q"], "q");
  spec.gamma = per(j["gamma"], "gamma");
  auto c = square<double>(j["coupling"], spec.m, "coupling", num);
  spec.c0.resize(spec.m, spec.m);
  for (int a = 0; a < spec.m; ++a)
    for (int b = 0; b < spec.m; ++b) spec.c0(a, b) = c[a][b];
  const std::string prof = j.value("profile", "constant");
  if (prof == "constant")
    spec.profile = ProfiledModelSpec::Profile::constant;
  else if (prof == "abs_plus_one")
    spec.profile = ProfiledModelSpec::Profile::abs_plus_one;
  else
    throw ConfigError("unknown coupling profile '" + prof + "'");
  return build_profiled_model(spec);
}

InitialData parse_initial(const json& j, int m, int d) {
  InitialData in;
  in.center = Vec::Zero(d);
  in.amplitude = Vec::Ones(m);
  if (j.is_null()) return in;
  check_keys(j, {"shape", "center", "radius", "amplitude"}, "evolve.initial");
  in.shape = j.value("shape", "constant");
  static const std::set<std::string> shapes{"constant", "gaussian", "bump", "sin", "indicator"};
  if (!shapes.count(in.shape)) throw ConfigError("unknown initial shape '" + in.shape + "'");
  if (j.contains("center")) {
    in.center = vec(j["center"], "center");
    if (in.center.size() != d) throw ConfigError("initial center has wrong dimension");
  }
  if (j.contains("radius")) in.radius = num(j["radius"], "radius");
  if (!(in.radius > 0.0)) throw ConfigError("initial radius must be positive");
  if (j.contains("amplitude")) {
    Vec a = vec(j["amplitude"], "amplitude");
    if (a.size() == 1) a = Vec::Constant(m, a(0));
    if (a.size() != m) throw ConfigError("amplitude needs one entry per component");
    in.amplitude = a;
  }
  return in;
}

}  // namespace

std::function<Vec(const Vec&)> InitialData::function() const {
  const InitialData in = *this;
  std::function<double(const Vec&)> prof;
  if (in.shape == "constant") {
    prof = [](const Vec&) { return 1.0; };
  } else if (in.shape == "gaussian") {
    prof = [in](const Vec& x) { return std::exp(-(x - in.center).squaredNorm() / (2.0 * in.radius * in.radius)); };
  } else if (in.shape == "bump") {
    prof = [in](const Vec& x) {
      double q = (x - in.center).squaredNorm() / (in.radius * in.radius);
      return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    };
  } else if (in.shape == "sin") {
    prof = [in](const Vec& x) { return std::sin((x - in.center).sum() / in.radius); };
  } else {
    prof = [in](const Vec& x) { return (x - in.center).norm() <= in.radius ? 1.0 : 0.0; };
  }
  return [prof, a = in.amplitude](const Vec& x) { return Vec(prof(x) * a); };
}

DiscreteDomain RunConfig::domain() const { return build_grid(model.d, grid.L, grid.N, grid.bc); }

EvolveConfig RunConfig::evolve_config() const {
  EvolveConfig c;
  c.s = evolve.s;
  c.t_end = evolve.t_end;
  c.dt = evolve.dt;
  c.scheme = evolve.scheme;
  c.record_times = evolve.record;
  c.upwind = grid.upwind;
  return c;
}

StepSettings RunConfig::step_settings() const { return StepSettings{evolve.dt, evolve.scheme, grid.upwind}; }

SampleSet RunConfig::samples() const {
  double t0 = evolve.s, t1 = evolve.t_end;
  if (model.polynomial) {
    t0 = model.polynomial->t0;
    t1 = model.polynomial->t1;
  }
  std::vector<double> times;
  const int nt = model.autonomous ? 1 : 5;
  for (int i = 0; i < nt; ++i) times.push_back(nt == 1 ? t0 : t0 + (t1 - t0) * i / (nt - 1));
  const double R = verify.sample_radius > 0.0 ? verify.sample_radius : grid.L;
  const int n = verify.samples_per_dim > 0 ? verify.samples_per_dim : (model.d == 1 ? 41 : 21);
  return make_samples(model.d, R, times, n);
}

std::string config_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const json& j) {
  check_keys(j, {"model", "grid", "evolve", "exhaustion", "kernels", "measures", "verify"}, "root");
  if (!j.contains("model") || !j["model"].is_object() || j["model"].empty())
    throw ConfigError("config needs a non-empty [model] section");
  RunConfig rc;
  rc.raw = j;
  rc.hash = config_hash(j);

  const json ev = j.value("evolve", json::object());
  check_keys(ev, {"s", "t_end", "dt", "scheme", "record", "initial"}, "evolve");
  if (ev.contains("s")) rc.evolve.s = num(ev["s"], "s");
  if (ev.contains("t_end")) rc.evolve.t_end = num(ev["t_end"], "t_end");
  if (ev.contains("dt")) rc.evolve.dt = num(ev["dt"], "dt");
  if (rc.evolve.dt < 0.0) throw ConfigError("dt must be nonnegative");
  if (!(rc.evolve.t_end > rc.evolve.s)) throw ConfigError("[evolve] needs t_end > s");
  if (ev.contains("scheme")) {
    if (!ev["scheme"].is_string()) throw ConfigError("scheme must be a string");
    rc.evolve.scheme = scheme_from_string(ev["scheme"].get<std::string>());
  }
  if (ev.contains("record")) rc.evolve.record = num_list(ev["record"], "record");

  const json& mj = j["model"];
  const std::string kind = mj.value("kind", "");
  if (kind == "polynomial")
    rc.model = parse_polynomial(mj, rc.evolve.s, rc.evolve.t_end);
  else if (kind == "profiled")
    rc.model = parse_profiled(mj);
  else
    throw ConfigError("[model] kind must be 'polynomial' or 'profiled'");
  rc.evolve.initial = parse_initial(ev.value("initial", json()), rc.model.m, rc.model.d);

  const json gr = j.value("grid", json::object());
  check_keys(gr, {"L", "N", "bc", "upwind"}, "grid");
  if (gr.contains("L")) rc.grid.L = num(gr["L"], "L");
  if (gr.contains("N")) rc.grid.N = integer(gr["N"], "N");
  if (gr.contains("bc")) {
    if (!gr["bc"].is_string()) throw ConfigError("bc must be a string");
    rc.grid.bc = boundary_from_string(gr["bc"].get<std::string>());
  }
  if (gr.contains("upwind")) {
    if (!gr["upwind"].is_boolean()) throw ConfigError("upwind must be true or false");
    rc.grid.upwind = gr["upwind"].get<bool>();
  }
  rc.domain();  // validates the grid

  if (j.contains("exhaustion")) {
    const json& ex = j["exhaustion"];
    check_keys(ex, {"ladder", "inner_L", "tol"}, "exhaustion");
    ExhaustionSection e;
    if (!ex.contains("ladder")) throw ConfigError("[exhaustion] needs a ladder");
    e.ladder = num_list(ex["ladder"], "ladder");
    if (ex.contains("inner_L")) e.inner_L = num(ex["inner_L"], "inner_L");
    if (ex.contains("tol")) e.tol = num(ex["tol"], "tol");
    rc.exhaustion = e;
  }
  if (j.contains("kernels")) {
    const json& kj = j["kernels"];
    check_keys(kj, {"t", "r"}, "kernels");
    KernelsSection k;
    k.t = kj.contains("t") ? num_list(kj["t"], "t") : std::vector<double>{rc.evolve.t_end};
    k.r = kj.contains("r") ? num_list(kj["r"], "r") : std::vector<double>{0.25 * rc.grid.L, 0.5 * rc.grid.L};
    rc.kernels = k;
  }
  if (j.contains("measures")) {
    const json& mm = j["measures"];
    check_keys(mm, {"x0", "anchor", "n", "lattice_step", "horizon", "dt", "scheme", "cauchy_tol", "extra_times"},
               "measures");
    CesaroConfig c;
    c.x0 = mm.contains("x0") ? vec(mm["x0"], "x0") : Vec(Vec::Zero(rc.model.d));
    if (mm.contains("anchor")) c.anchor = integer(mm["anchor"], "anchor");
    if (mm.contains("n")) c.n = integer(mm["n"], "n");
    if (mm.contains("lattice_step")) c.lattice_step = num(mm["lattice_step"], "lattice_step");
    if (mm.contains("horizon")) c.horizon = num(mm["horizon"], "horizon");
    if (mm.contains("dt")) c.dt = num(mm["dt"], "dt");
    if (mm.contains("cauchy_tol")) c.cauchy_tol = num(mm["cauchy_tol"], "cauchy_tol");
    if (mm.contains("extra_times")) c.extra_times = num_list(mm["extra_times"], "extra_times");
    if (mm.contains("scheme")) {
      if (!mm["scheme"].is_string()) throw ConfigError("scheme must be a string");
      c.scheme = scheme_from_string(mm["scheme"].get<std::string>());
    }
    c.upwind = rc.grid.upwind;
    rc.measures = c;
  }
  if (j.contains("verify")) {
    const json& vj = j["verify"];
    check_keys(vj, {"require", "sample_radius", "samples_per_dim", "deltas", "gradient", "lp_exponent"}, "verify");
    auto& v = rc.verify;
    if (vj.contains("require")) {
      if (!vj["require"].is_array()) throw ConfigError("require must be a list of check names");
      v.require.clear();
      for (const auto& s : vj["require"]) {
        if (!s.is_string()) throw ConfigError("require must be a list of check names");
        v.require.push_back(s.get<std::string>());
      }
    }
    if (vj.contains("sample_radius")) v.sample_radius = num(vj["sample_radius"], "sample_radius");
    if (vj.contains("samples_per_dim")) v.samples_per_dim = integer(vj["samples_per_dim"], "samples_per_dim");
    if (vj.contains("deltas")) v.deltas = num_list(vj["deltas"], "deltas");
    if (vj.contains("lp_exponent")) v.lp_exponent = num(vj["lp_exponent"], "lp_exponent");
    if (vj.contains("gradient")) {
      const json& g = vj["gradient"];
      check_keys(g, {"alpha", "gamma", "omega0", "omega1"}, "verify.gradient");
      if (g.contains("alpha")) v.gradient.alpha = num(g["alpha"], "alpha");
      if (g.contains("gamma")) v.gradient.gamma = num(g["gamma"], "gamma");
      if (g.contains("omega0")) v.gradient.omega0 = num(g["omega0"], "omega0");
      if (g.contains("omega1")) v.gradient.omega1 = num(g["omega1"], "omega1");
    }
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace wcp
