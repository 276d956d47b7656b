#pragma once

#include <optional>
#include <string>

#include "choicekit/mxl.hpp"

namespace choicekit {

// Machine-readable estimation result: the model spec with point values filled
// into its mixing rules, the packed parameter vector, and (when available)
// the covariance. Written by `estimate`, consumed by `sensitivity` and
// `summarize-mixing`; published parameter sets ship in the same format.
struct ModelResult {
  std::string engine;  // "mnl" or "mxl"
  ModelSpec spec;      // mixing mu/sigma carry the values
  MxlPacking packing;
  Eigen::VectorXd theta;
  std::optional<Eigen::MatrixXd> vcov;
  double loglik = 0.0;
  double null_loglik = 0.0;
  int r_draws = 0;
  std::uint64_t seed = 0;

  MxlResult as_mxl() const;  // for the sweep/summary machinery
};

ModelResult model_result_from(const EstimationResult& fit, const ModelSpec& spec);
ModelResult model_result_from(const MxlResult& fit);

std::string result_to_json(const ModelResult& result);
ModelResult result_from_json(const std::string& json_text, const AttributeSchema& schema,
                             const std::vector<std::string>& covariate_names);
ModelResult load_result(const std::string& path, const AttributeSchema& schema,
                        const std::vector<std::string>& covariate_names);

}  // namespace choicekit
