#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcp/config.hpp"

namespace wcp {

struct CheckOutcome {
  HypothesisReport report;
  IrreducibilityResult irreducibility;
  /// Names from [verify].require that did not pass (or were not produced).
  std::vector<std::string> failed_required;
  bool pass() const { return failed_required.empty(); }
};

/// Runs every applicable hypothesis checker on the configured model.
CheckOutcome run_check(const RunConfig& rc);

struct VerifyEntry {
  std::string check;
  PropertyVerdict verdict;
  bool skipped = false;
  std::string reason;

  nlohmann::json to_json() const;
};

/// Names accepted by run_verify besides "all".
const std::vector<std::string>& verify_check_names();

/// Runs one named check or all of them. With "all", checks whose certificates are
/// missing are reported as skipped; a single named check rethrows MissingCertificate.
std::vector<VerifyEntry> run_verify(const RunConfig& rc, const std::string& which, int jobs, std::uint64_t seed);

}  // namespace wcp
