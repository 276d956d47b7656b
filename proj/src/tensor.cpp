#include "choicekit/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace choicekit {

std::vector<double> transform_levels(const std::vector<double>& raw,
                                     const AttributeSchema& schema,
                                     std::optional<double> pivot_minutes) {
  if (raw.size() != schema.size())
    throw std::runtime_error("transform_levels: level count does not match schema");
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const Attribute& a = schema.attributes[k];
    if (!a.has_level(raw[k]))
      throw std::runtime_error("transform_levels: unknown level " + std::to_string(raw[k]) +
                               " for attribute '" + a.name + "'");
    out[k] = a.scaling.apply(raw[k], a.scaling.needs_pivot() ? pivot_minutes : std::nullopt);
    if (!std::isfinite(out[k]))
      throw std::runtime_error("transform_levels: non-finite value for attribute '" + a.name + "'");
  }
  return out;
}

double term_value(const TermSpec& term, const AttributeSchema& schema,
                  const std::vector<double>& transformed, const Respondent& respondent,
                  const ChoiceDataset& ds, int alternative_1based, int asc_on) {
  switch (term.kind) {
    case TermKind::asc:
      return alternative_1based == asc_on ? 1.0 : 0.0;
    case TermKind::main:
      return transformed[static_cast<std::size_t>(schema.index_of(term.attribute))];
    case TermKind::attr_x_attr:
      return transformed[static_cast<std::size_t>(schema.index_of(term.attribute))] *
             transformed[static_cast<std::size_t>(schema.index_of(term.attribute_b))];
    case TermKind::attr_x_cov: {
      const int c = ds.covariate_index(term.covariate);
      if (c < 0)
        throw std::runtime_error("term '" + term.name + "': covariate '" + term.covariate +
                                 "' not in dataset");
      return transformed[static_cast<std::size_t>(schema.index_of(term.attribute))] *
             respondent.covariates[static_cast<std::size_t>(c)];
    }
  }
  return 0.0;
}

DesignTensor expand(const ChoiceDataset& ds, const ModelSpec& spec) {
  spec.validate(ds.schema, ds.covariate_names);

  DesignTensor t;
  t.n_respondents = static_cast<int>(ds.respondents.size());
  t.n_situations = ds.situations_per_respondent;
  t.n_alternatives = ds.n_alternatives;
  t.n_terms = static_cast<int>(spec.n_terms());
  t.x.resize(static_cast<Eigen::Index>(t.n_respondents) * t.n_situations * t.n_alternatives,
             t.n_terms);
  t.chosen.assign(static_cast<std::size_t>(t.n_respondents) * t.n_situations, -1);

  std::vector<int> filled(static_cast<std::size_t>(t.n_respondents), 0);
  for (const auto& o : ds.observations) {
    const Respondent& r = ds.respondent_of(o);
    const int n = o.respondent_idx;
    const int s = filled[static_cast<std::size_t>(n)]++;
    t.chosen[static_cast<std::size_t>(n) * t.n_situations + s] = o.chosen - 1;
    for (int j = 0; j < t.n_alternatives; ++j) {
      const auto transformed =
          transform_levels(o.levels[static_cast<std::size_t>(j)], ds.schema,
                           r.pivot_travel_time > 0 ? std::optional<double>(r.pivot_travel_time)
                                                   : std::nullopt);
      for (int k = 0; k < t.n_terms; ++k)
        t.x(t.row(n, s, j), k) = term_value(spec.terms[static_cast<std::size_t>(k)], ds.schema,
                                            transformed, r, ds, j + 1, spec.asc_on);
    }
  }
  for (int n = 0; n < t.n_respondents; ++n)
    if (filled[static_cast<std::size_t>(n)] != t.n_situations)
      throw std::runtime_error("expand: respondent '" + ds.respondents[static_cast<std::size_t>(n)].id +
                               "' does not have " + std::to_string(t.n_situations) + " situations");
  if (!t.x.allFinite()) throw std::runtime_error("expand: non-finite design tensor");
  return t;
}

}  // namespace choicekit
