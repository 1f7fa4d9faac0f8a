#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wcp/measures.hpp"

namespace wcp {

/// Initial datum: per-component amplitude times a scalar profile.
struct InitialData {
  /// constant | gaussian | bump | sin | indicator
  std::string shape = "constant";
  Vec center;
  double radius = 1.0;
  Vec amplitude;

  std::function<Vec(const Vec&)> function() const;
};

struct GridSection {
  int N = 101;
  double L = 5.0;
  Boundary bc = Boundary::dirichlet;
  bool upwind = false;
};

struct EvolveSection {
  double s = 0.0;
  double t_end = 1.0;
  double dt = 0.0;
  Scheme scheme = Scheme::theta;
  std::vector<double> record;
  InitialData initial;
};

struct ExhaustionSection {
  std::vector<double> ladder;
  double inner_L = 1.0;
  double tol = 1e-4;
};

struct KernelsSection {
  std::vector<double> t;
  std::vector<double> r;
};

struct VerifySection {
  /// Hypothesis checks that must pass for `check` to succeed.
  std::vector<std::string> require{"ellipticity", "offdiag_nonnegative", "rowsum_nonpositive"};
  double sample_radius = 0.0;  // 0 selects grid L
  int samples_per_dim = 0;     // 0 selects 41 (d = 1) or 21 (d = 2)
  std::vector<double> deltas{0.1, 0.5, 1.0};
  GradientInputs gradient;
  double lp_exponent = 4.0;
};

struct RunConfig {
  nlohmann::json raw;
  std::string hash;
  CoefficientModel model;
  GridSection grid;
  EvolveSection evolve;
  std::optional<ExhaustionSection> exhaustion;
  std::optional<KernelsSection> kernels;
  std::optional<CesaroConfig> measures;
  VerifySection verify;

  DiscreteDomain domain() const;
  EvolveConfig evolve_config() const;
  StepSettings step_settings() const;
  SampleSet samples() const;
};

/// Strict parser: unknown keys and malformed values raise ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON dump, hex encoded.
std::string config_hash(const nlohmann::json& j);

}  // namespace wcp
