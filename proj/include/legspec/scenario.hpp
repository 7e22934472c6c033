#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "legspec/handle.hpp"
#include "legspec/invariants.hpp"

namespace legspec {

inline constexpr const char* kSchemaVersion = "1.0";

const std::vector<std::string>& scenario_kinds();

/// Handle from JSON: an atom list, or {"word": [...], "power": k,
/// "inverse": bool, "conjugate_by": handle}. Atoms are {"reeb": c},
/// {"translation": "f(q)"} or {"flow": "H", "t0": 0, "t1": 1, "support": R}.
ContactomorphismHandle parse_handle(const nlohmann::json& j);

struct ScenarioOutput {
  nlohmann::json report;  // deterministic: no timings
  std::string csv;
  std::vector<std::string> log;
  bool pass = true;
};

/// Runs one scenario on a parsed config. Config problems raise InvalidInput;
/// module failures propagate with the scenario name prefixed, after the
/// results gathered so far are copied to `partial` when given.
ScenarioOutput run_scenario(const std::string& kind, nlohmann::json config,
                            std::optional<std::uint64_t> seed_override = std::nullopt,
                            ScenarioOutput* partial = nullptr);

/// Reads the config, runs, writes <out>/<kind>.json, .csv and .log and
/// returns the exit code (0 pass, 1 assertion failure, 2 config or pipeline
/// error). On error a <kind>.FAILED marker and an error report are written.
int run_scenario_files(const std::string& kind, const std::string& config_path, const std::string& out_dir,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace legspec
