#include "choicekit/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "choicekit/halton.hpp"
#include "choicekit/tensor.hpp"

namespace choicekit {

namespace {

double covariate_value(const std::map<std::string, double>& covariates, const std::string& name) {
  const auto it = covariates.find(name);
  return it == covariates.end() ? 0.0 : it->second;
}

}  // namespace

Baseline compute_baseline(const ChoiceDataset& ds, const ModelSpec& spec) {
  if (ds.observations.empty()) throw std::runtime_error("compute_baseline: empty dataset");
  spec.validate(ds.schema, ds.covariate_names);

  Baseline b;
  b.attr_delta.assign(ds.schema.size(), 0.0);
  b.term_delta.assign(spec.n_terms(), 0.0);

  const DesignTensor t = expand(ds, spec);
  double count = 0.0;
  for (const auto& o : ds.observations) {
    const Respondent& r = ds.respondent_of(o);
    const auto x1 = transform_levels(o.levels[0], ds.schema, r.pivot_travel_time);
    const auto x2 = transform_levels(o.levels[1], ds.schema, r.pivot_travel_time);
    for (std::size_t k = 0; k < ds.schema.size(); ++k) b.attr_delta[k] += x1[k] - x2[k];
    count += 1.0;
  }
  for (std::size_t k = 0; k < ds.schema.size(); ++k) b.attr_delta[k] /= count;

  // term-wise means from the expanded tensor (rows are grouped (n, s, j))
  for (int n = 0; n < t.n_respondents; ++n)
    for (int s = 0; s < t.n_situations; ++s)
      for (int k = 0; k < t.n_terms; ++k)
        b.term_delta[static_cast<std::size_t>(k)] +=
            t.x(t.row(n, s, 0), k) - t.x(t.row(n, s, 1), k);
  for (auto& v : b.term_delta) v /= count;

  // the ASC column is structural, not part of the attribute baseline
  for (std::size_t k = 0; k < spec.n_terms(); ++k)
    if (spec.terms[k].kind == TermKind::asc) b.term_delta[k] = 0.0;
  return b;
}

Baseline design_baseline(const DesignPlan& plan, const AttributeSchema& schema,
                         const ModelSpec& spec, double ref_pivot_minutes) {
  Baseline b;
  b.ref_pivot_minutes = ref_pivot_minutes;
  b.attr_delta.assign(schema.size(), 0.0);
  b.term_delta.assign(spec.n_terms(), 0.0);

  double count = 0.0;
  for (int blk = 1; blk <= plan.n_blocks; ++blk)
    for (int s = 1; s <= plan.situations_per_block; ++s) {
      const auto x1 = transform_levels(plan.row(blk, s, 1).levels, schema, ref_pivot_minutes);
      const auto x2 = transform_levels(plan.row(blk, s, 2).levels, schema, ref_pivot_minutes);
      for (std::size_t k = 0; k < schema.size(); ++k) b.attr_delta[k] += x1[k] - x2[k];
      for (std::size_t k = 0; k < spec.n_terms(); ++k) {
        const TermSpec& term = spec.terms[k];
        if (term.kind == TermKind::main) {
          const auto a = static_cast<std::size_t>(schema.index_of(term.attribute));
          b.term_delta[k] += x1[a] - x2[a];
        } else if (term.kind == TermKind::attr_x_attr) {
          const auto a = static_cast<std::size_t>(schema.index_of(term.attribute));
          const auto c = static_cast<std::size_t>(schema.index_of(term.attribute_b));
          b.term_delta[k] += x1[a] * x1[c] - x2[a] * x2[c];
        }
        // asc: structural; attr_x_cov: covariates are scenario inputs
      }
      count += 1.0;
    }
  for (auto& v : b.attr_delta) v /= count;
  for (auto& v : b.term_delta) v /= count;
  // covariate terms default to the attribute delta (indicator applied later)
  for (std::size_t k = 0; k < spec.n_terms(); ++k)
    if (spec.terms[k].kind == TermKind::attr_x_cov)
      b.term_delta[k] =
          b.attr_delta[static_cast<std::size_t>(schema.index_of(spec.terms[k].attribute))];
  return b;
}

Baseline explicit_baseline(const AttributeSchema& schema, const ModelSpec& spec,
                           const std::map<std::string, double>& raw_values,
                           double ref_pivot_minutes) {
  Baseline b;
  b.ref_pivot_minutes = ref_pivot_minutes;
  b.attr_delta.assign(schema.size(), 0.0);
  for (const auto& [name, raw] : raw_values) {
    const int idx = schema.index_of(name);
    if (idx < 0) throw std::runtime_error("baseline: unknown attribute '" + name + "'");
    b.attr_delta[static_cast<std::size_t>(idx)] =
        transform_sweep_value(schema.attributes[static_cast<std::size_t>(idx)], raw);
  }
  b.term_delta.assign(spec.n_terms(), 0.0);
  for (std::size_t k = 0; k < spec.n_terms(); ++k) {
    const TermSpec& t = spec.terms[k];
    double v = 0.0;
    if (t.kind == TermKind::main || t.kind == TermKind::attr_x_cov)
      v = b.attr_delta[static_cast<std::size_t>(schema.index_of(t.attribute))];
    else if (t.kind == TermKind::attr_x_attr)
      v = b.attr_delta[static_cast<std::size_t>(schema.index_of(t.attribute))] *
          b.attr_delta[static_cast<std::size_t>(schema.index_of(t.attribute_b))];
    b.term_delta[k] = v;
  }
  return b;
}

double transform_sweep_value(const Attribute& attribute, double raw) {
  if (attribute.pivoted) return raw / 100.0;  // sweeps pin absolute minutes
  return attribute.scaling.apply(raw, std::nullopt);
}

namespace {

struct ScenarioTerms {
  Eigen::VectorXd x1;          // alternative-1 term values
  Eigen::VectorXd x2;          // alternative 2: zero except the ASC column
  bool extrapolated = false;
};

ScenarioTerms scenario_terms(const Baseline& baseline, const SweepSpec& sweep,
                             const AttributeSchema& schema, const ModelSpec& spec,
                             double swept_raw) {
  // pinned attributes: the swept one plus any overrides, in transformed units
  std::vector<bool> pinned(schema.size(), false);
  std::vector<double> pinned_value(schema.size(), 0.0);
  bool extrapolated = false;

  auto pin = [&](const std::string& name, double raw) {
    const int idx = schema.index_of(name);
    if (idx < 0) throw std::runtime_error("sweep: unknown attribute '" + name + "'");
    const Attribute& a = schema.attributes[static_cast<std::size_t>(idx)];
    pinned[static_cast<std::size_t>(idx)] = true;
    pinned_value[static_cast<std::size_t>(idx)] = transform_sweep_value(a, raw);
    double lo = a.levels.front(), hi = a.levels.front();
    for (double l : a.levels) {
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    if (a.pivoted) {
      lo *= baseline.ref_pivot_minutes;
      hi *= baseline.ref_pivot_minutes;
    }
    if (raw < lo - 1e-9 || raw > hi + 1e-9) extrapolated = true;
  };
  for (const auto& [name, raw] : sweep.overrides) pin(name, raw);
  pin(sweep.attribute, swept_raw);

  auto attr_value = [&](int idx) {
    return pinned[static_cast<std::size_t>(idx)] ? pinned_value[static_cast<std::size_t>(idx)]
                                                 : baseline.attr_delta[static_cast<std::size_t>(idx)];
  };

  ScenarioTerms out;
  out.extrapolated = extrapolated;
  out.x1.resize(static_cast<Eigen::Index>(spec.n_terms()));
  out.x2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.n_terms()));
  for (std::size_t k = 0; k < spec.n_terms(); ++k) {
    const TermSpec& t = spec.terms[k];
    double v = 0.0;
    switch (t.kind) {
      case TermKind::asc:
        v = (spec.asc_on == 1) ? 1.0 : 0.0;
        out.x2[static_cast<Eigen::Index>(k)] = (spec.asc_on == 2) ? 1.0 : 0.0;
        break;
      case TermKind::main:
        v = attr_value(schema.index_of(t.attribute));
        break;
      case TermKind::attr_x_attr: {
        const int a = schema.index_of(t.attribute);
        const int c = schema.index_of(t.attribute_b);
        if (pinned[static_cast<std::size_t>(a)] || pinned[static_cast<std::size_t>(c)])
          v = attr_value(a) * attr_value(c);
        else
          v = baseline.term_delta[k];  // term-wise sample mean
        break;
      }
      case TermKind::attr_x_cov:
        v = attr_value(schema.index_of(t.attribute)) *
            covariate_value(sweep.covariates, t.covariate);
        break;
    }
    out.x1[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

void check_sweep(const SweepSpec& sweep, const AttributeSchema& schema, const ModelSpec& spec) {
  if (schema.index_of(sweep.attribute) < 0)
    throw std::runtime_error("sweep: unknown attribute '" + sweep.attribute + "'");
  if (sweep.grid.empty()) throw std::runtime_error("sweep: empty grid");
  for (const auto& [name, value] : sweep.covariates) {
    bool used = false;
    for (const auto& t : spec.terms)
      if (t.kind == TermKind::attr_x_cov && t.covariate == name) used = true;
    if (!used)
      throw std::runtime_error("sweep: covariate '" + name + "' absent from the model spec");
    (void)value;
  }
}

}  // namespace

SensitivityTable sweep_mnl(const Baseline& baseline, const SweepSpec& sweep,
                           const AttributeSchema& schema, const ModelSpec& spec,
                           const Eigen::VectorXd& theta) {
  check_sweep(sweep, schema, spec);
  if (theta.size() != static_cast<Eigen::Index>(spec.n_terms()))
    throw std::runtime_error("sweep_mnl: theta length does not match spec");

  SensitivityTable table;
  table.attribute = sweep.attribute;
  const int swept_idx = schema.index_of(sweep.attribute);
  const Attribute& attr = schema.attributes[static_cast<std::size_t>(swept_idx)];
  for (double raw : sweep.grid) {
    const ScenarioTerms st = scenario_terms(baseline, sweep, schema, spec, raw);
    const double p = 1.0 / (1.0 + std::exp((st.x2 - st.x1).dot(theta)));
    SweepPoint pt;
    pt.raw = raw;
    pt.transformed = transform_sweep_value(attr, raw);
    pt.extrapolated = st.extrapolated;
    pt.mean = pt.p5 = pt.p50 = pt.p95 = p;
    table.points.push_back(pt);
  }
  return table;
}

SensitivityTable sweep_mxl(const Baseline& baseline, const SweepSpec& sweep,
                           const AttributeSchema& schema, const MxlResult& result) {
  check_sweep(sweep, schema, result.spec);
  const ModelSpec& spec = result.spec;
  const auto random_terms = spec.random_term_indices();
  const int R = sweep.mixing_draws;
  if (R < 1) throw std::runtime_error("sweep_mxl: mixing draw count must be >= 1");

  Eigen::VectorXd mus, sigmas;
  unpack_params(result.packing, result.theta, mus, sigmas);
  const DrawMatrix draws =
      random_terms.empty()
          ? DrawMatrix{Eigen::MatrixXd::Zero(R, 1), "none", sweep.seed, 0}
          : make_draws(R, static_cast<int>(random_terms.size()), sweep.seed);

  // realize the coefficient draws once; they are shared across grid points
  Eigen::MatrixXd betas(R, static_cast<Eigen::Index>(spec.n_terms()));
  Eigen::VectorXd beta;
  for (int r = 0; r < R; ++r) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(random_terms.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = draws.z(r, i);
    realize_betas(spec, mus, sigmas, z, beta);
    betas.row(r) = beta.transpose();
  }

  SensitivityTable table;
  table.attribute = sweep.attribute;
  const Attribute& attr = schema.attributes[static_cast<std::size_t>(schema.index_of(sweep.attribute))];
  std::vector<double> probs(static_cast<std::size_t>(R));
  for (double raw : sweep.grid) {
    const ScenarioTerms st = scenario_terms(baseline, sweep, schema, spec, raw);
    const Eigen::VectorXd diff = st.x1 - st.x2;
    double mean = 0.0;
    for (int r = 0; r < R; ++r) {
      const double v = betas.row(r).dot(diff);
      const double p = 1.0 / (1.0 + std::exp(-v));
      probs[static_cast<std::size_t>(r)] = p;
      mean += p;
    }
    mean /= static_cast<double>(R);
    std::sort(probs.begin(), probs.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(R - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, probs.size() - 1);
      const double w = pos - static_cast<double>(lo);
      return (1.0 - w) * probs[lo] + w * probs[hi];
    };
    SweepPoint pt;
    pt.raw = raw;
    pt.transformed = transform_sweep_value(attr, raw);
    pt.extrapolated = st.extrapolated;
    pt.mean = mean;
    pt.p5 = quantile(0.05);
    pt.p50 = quantile(0.50);
    pt.p95 = quantile(0.95);
    table.points.push_back(pt);
  }
  return table;
}

std::pair<SensitivityTable, SensitivityTable> group_sweep(
    const Baseline& baseline, const SweepSpec& sweep, const AttributeSchema& schema,
    const MxlResult& result, const std::map<std::string, double>& group) {
  SweepSpec g = sweep, c = sweep;
  for (const auto& [name, value] : group) {
    g.covariates[name] = value;
    c.covariates[name] = 1.0 - value;
  }
  return {sweep_mxl(baseline, g, schema, result), sweep_mxl(baseline, c, schema, result)};
}

}  // namespace choicekit
