#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "choicekit/dataset.hpp"
#include "choicekit/mxl.hpp"

namespace choicekit {

// Incremental-logit baseline: alternative 1 carries the average attribute
// difference (alternative 1 minus alternative 2), alternative 2 sits at zero.
// Both attribute-wise and term-wise averages are kept; interaction terms of a
// swept attribute are rebuilt from the attribute-wise values.
struct Baseline {
  std::vector<double> attr_delta;  // per schema attribute, transformed units
  std::vector<double> term_delta;  // per spec term
  double ref_pivot_minutes = 30.0;
};

// Sample baseline: term-wise mean of (x1 - x2) over all respondents and
// situations, with each respondent's own pivot time.
Baseline compute_baseline(const ChoiceDataset& ds, const ModelSpec& spec);

// Design baseline: mean over all choice sets of a plan (blocks weighted
// equally) at a fixed reference pivot.
Baseline design_baseline(const DesignPlan& plan, const AttributeSchema& schema,
                         const ModelSpec& spec, double ref_pivot_minutes = 30.0);

// Scenario baseline from explicit raw attribute values (interaction terms are
// the products of the attribute values).
Baseline explicit_baseline(const AttributeSchema& schema, const ModelSpec& spec,
                           const std::map<std::string, double>& raw_values,
                           double ref_pivot_minutes = 30.0);

// Raw sweep value -> regressor units. The pivoted attribute sweeps in
// absolute minutes; everything else uses its schema scaling.
double transform_sweep_value(const Attribute& attribute, double raw);

struct SweepSpec {
  std::string attribute;
  std::vector<double> grid;                  // raw units (minutes for the pivoted attribute)
  std::map<std::string, double> overrides;   // pin other attributes, raw units
  std::map<std::string, double> covariates;  // indicator assignment for covariate terms
  int mixing_draws = 10000;
  std::uint64_t seed = 20210301;
};

struct SweepPoint {
  double raw = 0.0;
  double transformed = 0.0;
  bool extrapolated = false;  // outside the fielded level range
  double mean = 0.0;
  double p5 = 0.0, p50 = 0.0, p95 = 0.0;
};

struct SensitivityTable {
  std::string attribute;
  std::vector<SweepPoint> points;
};

// Plug-in MNL sweep: bands coincide with the point prediction.
SensitivityTable sweep_mnl(const Baseline& baseline, const SweepSpec& sweep,
                           const AttributeSchema& schema, const ModelSpec& spec,
                           const Eigen::VectorXd& theta);

// Mixed-logit sweep: mean and quantile bands of the choice probability over
// seeded mixing draws.
SensitivityTable sweep_mxl(const Baseline& baseline, const SweepSpec& sweep,
                           const AttributeSchema& schema, const MxlResult& result);

// Same sweep evaluated for a covariate group and its complement (every listed
// indicator flipped).
std::pair<SensitivityTable, SensitivityTable> group_sweep(
    const Baseline& baseline, const SweepSpec& sweep, const AttributeSchema& schema,
    const MxlResult& result, const std::map<std::string, double>& group);

}  // namespace choicekit
