#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "choicekit/mnl.hpp"
#include "choicekit/mxl.hpp"
#include "choicekit/sensitivity.hpp"

namespace choicekit {

// Stable text report for an MNL fit (golden-file friendly: fixed formatting,
// deterministic ordering).
std::string format_mnl_report(const EstimationResult& result, const ModelSpec& spec,
                              const ChoiceDataset& ds,
                              const std::map<std::string, std::string>& input_hashes);

// MXL fit report plus the mixing-distribution summary block. Coefficient rows
// carry the published reporting convention: a lognormal with utility-side
// sign -1 is shown as "(-) name".
std::string format_mxl_report(const MxlResult& result, const ChoiceDataset& ds,
                              const std::map<std::string, std::string>& input_hashes,
                              int summary_se_draws = 10000,
                              std::uint64_t summary_se_seed = 20210301);

std::string format_screening_report(const ScreeningReport& report);

std::string format_ablation_report(const std::vector<AblationRow>& rows);

// tidy CSV: scenario, attribute, raw value, transformed, extrapolated, mean,
// p5, p50, p95
std::string sensitivity_csv(const std::string& scenario, const SensitivityTable& table);

std::string file_hash_hex(const std::string& path);
std::string string_hash_hex(const std::string& text);

struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;   // path -> hash
  std::map<std::string, std::string> output_hashes;  // path -> hash
  std::map<std::string, std::uint64_t> seeds;
  std::string timestamp;  // empty unless explicitly requested (reproducibility)

  std::string to_json() const;
};

inline const char* tool_version() { return "choicekit 1.0.0"; }

}  // namespace choicekit
