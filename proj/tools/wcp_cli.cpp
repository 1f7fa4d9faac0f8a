// Config-driven runner: check, solve, kernels, tightness, measures, verify.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "wcp/kernels.hpp"
#include "wcp/parallel.hpp"
#include "wcp/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wcp;

namespace {

class Manifest {
 public:
  Manifest(const RunConfig& rc, fs::path out, int jobs, std::uint64_t seed) : out_(std::move(out)) {
    m_["config_hash"] = rc.hash;
    m_["model"] = {{"kind", rc.model.name}, {"d", rc.model.d}, {"m", rc.model.m}, {"autonomous", rc.model.autonomous}};
    m_["grid"] = {{"L", rc.grid.L}, {"N", rc.grid.N}, {"bc", to_string(rc.grid.bc)}, {"upwind", rc.grid.upwind},
                  {"collar", rc.domain().default_collar()}};
    m_["evolve"] = {{"s", rc.evolve.s}, {"t_end", rc.evolve.t_end}, {"dt", rc.evolve.dt},
                    {"scheme", to_string(rc.evolve.scheme)}};
    m_["jobs"] = jobs;
    m_["seed"] = seed;
    m_["operations"] = json::array();
    m_["outputs"] = json::array();
  }

  template <class F>
  void timed(const std::string& name, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m_["operations"].push_back({{"name", name}, {"wall_time_s", wall}});
  }

  fs::path file(const std::string& name) {
    m_["outputs"].push_back(name);
    return out_ / name;
  }

  void set(const std::string& key, json v) { m_[key] = std::move(v); }

  void write() {
    std::ofstream os(out_ / "manifest.json");
    os << std::setw(2) << m_ << "\n";
  }

 private:
  fs::path out_;
  json m_;
};

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << std::setw(2) << j << "\n";
}

void write_fields_csv(const fs::path& p, const std::vector<StateField>& fields) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  const auto& dom = fields.front().dom;
  os << "t,k";
  for (int a = 0; a < dom.d; ++a) os << ",x" << a;
  os << ",u\n" << std::setprecision(17);
  for (const auto& u : fields)
    for (int k = 0; k < u.m; ++k)
      for (int p = 0; p < dom.points(); ++p) {
        os << u.t << "," << k;
        Vec x = dom.point(p);
        for (int a = 0; a < dom.d; ++a) os << "," << x(a);
        os << "," << u.at(k, p) << "\n";
      }
}

int cmd_check(const RunConfig& rc, Manifest& man) {
  CheckOutcome out;
  man.timed("check", [&] { out = run_check(rc); });
  json j = out.report.to_json();
  j["required"] = rc.verify.require;
  j["failed_required"] = out.failed_required;
  j["pass"] = out.pass();
  write_json(man.file("check.json"), j);
  for (const auto& c : out.report.checks) {
    json line = {{"check", c.name}, {"verdict", to_string(c.verdict)}};
    if (!c.pass() && !c.witnesses.empty()) {
      const auto& w = c.witnesses.front();
      line["witness"] = {{"t", w.t}, {"x", std::vector<double>(w.x.data(), w.x.data() + w.x.size())},
                         {"value", w.value}};
    }
    std::cout << line.dump() << "\n";
  }
  for (const auto& f : out.failed_required) std::cerr << "required hypothesis failed: " << f << "\n";
  return out.pass() ? 0 : 1;
}

int cmd_solve(const RunConfig& rc, Manifest& man) {
  const auto dom = rc.domain();
  std::vector<StateField> fields;
  man.timed("solve", [&] {
    StateField f = StateField::sample(dom, rc.model.m, rc.evolve.s, rc.evolve.initial.function());
    fields = evolve(rc.model, dom, rc.evolve_config(), f);
  });
  write_fields_csv(man.file("solve.csv"), fields);
  if (rc.exhaustion) {
    ExhaustionReport rep;
    man.timed("exhaustion", [&] {
      std::vector<LadderRung> ladder;
      for (double L : rc.exhaustion->ladder) ladder.push_back({L, static_cast<int>(std::lround(2.0 * L / dom.dx)) + 1});
      rep = exhaustion_solve(rc.model, rc.evolve.initial.function(), rc.evolve.s, rc.evolve.t_end, ladder,
                             rc.exhaustion->inner_L, rc.exhaustion->tol, rc.grid.bc, rc.evolve.dt, rc.evolve.scheme,
                             rc.grid.upwind);
    });
    std::ofstream os(man.file("exhaustion.csv"));
    os << "rung,L,delta\n" << std::setprecision(17);
    for (std::size_t i = 0; i < rep.ladder.size(); ++i)
      os << i << "," << rep.ladder[i] << "," << (i == 0 ? std::nan("") : rep.deltas[i - 1]) << "\n";
    std::cout << json{{"exhaustion_converged", rep.converged}, {"deltas", rep.deltas}}.dump() << "\n";
  }
  std::cout << json{{"solve", "ok"}, {"records", fields.size()}}.dump() << "\n";
  return 0;
}

int cmd_kernels(const RunConfig& rc, Manifest& man, int jobs) {
  const auto dom = rc.domain();
  std::vector<double> ts = rc.kernels ? rc.kernels->t : std::vector<double>{rc.evolve.t_end};
  std::vector<KernelEstimate> ks;
  man.timed("kernels", [&] {
    ks = estimate_kernels(rc.model, dom, rc.evolve.s, ts,
                          KernelConfig{rc.evolve.dt, rc.evolve.scheme, rc.grid.upwind, jobs});
  });
  json summary = json::array();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const std::string name = "kernel_" + std::to_string(i) + ".bin";
    write_kernel_binary(ks[i], man.file(name).string());
    summary.push_back({{"file", name}, {"t", ks[i].t}, {"clipped_mass", ks[i].clipped_mass},
                       {"total_mass", ks[i].total_mass}, {"flagged", ks[i].flagged}});
  }
  write_json(man.file("kernels.json"), summary);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_tightness(const RunConfig& rc, Manifest& man, int jobs) {
  const auto dom = rc.domain();
  std::vector<double> ts = rc.kernels ? rc.kernels->t : std::vector<double>{rc.evolve.t_end};
  std::vector<double> rs = rc.kernels ? rc.kernels->r : std::vector<double>{0.25 * dom.L, 0.5 * dom.L, 0.75 * dom.L};
  TightnessProfile prof;
  man.timed("tightness", [&] {
    prof = tightness_profile(rc.model, dom, rc.evolve.s, ts, rs,
                             KernelConfig{rc.evolve.dt, rc.evolve.scheme, rc.grid.upwind, jobs});
  });
  std::ofstream os(man.file("tightness.csv"));
  os << "t,r,i,j,tail\n" << std::setprecision(17);
  for (const auto& r : prof.rows) os << r.t << "," << r.r << "," << r.i << "," << r.j << "," << r.tail << "\n";
  std::cout << json{{"tightness", "ok"}, {"rows", prof.rows.size()}}.dump() << "\n";
  return 0;
}

int cmd_measures(const RunConfig& rc, Manifest& man) {
  if (!rc.measures) throw ConfigError("config has no [measures] section");
  MeasureSystem ms;
  man.timed("measures", [&] { ms = cesaro_measures(rc.model, rc.domain(), *rc.measures); });
  write_measures_csv(ms, man.file("measures.csv").string());
  write_json(man.file("measures_manifest.json"), ms.manifest());
  man.set("measures", ms.manifest());
  std::cout << json{{"converged", ms.converged}, {"tv_ladder", ms.tv_ladder}}.dump() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& rc, Manifest& man, const std::string& which, int jobs, std::uint64_t seed) {
  std::vector<VerifyEntry> entries;
  man.timed("verify " + which, [&] { entries = run_verify(rc, which, jobs, seed); });
  std::ofstream os(man.file("verify.jsonl"));
  bool pass = true;
  for (const auto& e : entries) {
    const std::string line = e.to_json().dump();
    os << line << "\n";
    std::cout << line << "\n";
    if (!e.skipped && !e.verdict.pass) pass = false;
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolution operators for coupled parabolic systems: checks, solves, kernels and invariant measures"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  int jobs = default_jobs();
  std::uint64_t seed = 12345;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker count")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed for test functions");

  auto* check = app.add_subcommand("check", "certify the model hypotheses");
  auto* solve = app.add_subcommand("solve", "evolve the initial datum");
  auto* kernels = app.add_subcommand("kernels", "estimate transition kernels");
  auto* tightness = app.add_subcommand("tightness", "tail-mass profile of the kernels");
  auto* measures = app.add_subcommand("measures", "Cesaro invariant measures");
  auto* verify = app.add_subcommand("verify", "property checks");
  std::string which = "all";
  verify->add_option("check", which, "check name or 'all'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig rc = load_config(config_path);
    fs::create_directories(out_dir);
    Manifest man(rc, out_dir, jobs, seed);
    int code = 0;
    if (*check) code = cmd_check(rc, man);
    if (*solve) code = cmd_solve(rc, man);
    if (*kernels) code = cmd_kernels(rc, man, jobs);
    if (*tightness) code = cmd_tightness(rc, man, jobs);
    if (*measures) code = cmd_measures(rc, man);
    if (*verify) code = cmd_verify(rc, man, which, jobs, seed);
    man.set("exit_code", code);
    man.write();
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MissingCertificate& e) {
    std::cerr << "missing certificate: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
