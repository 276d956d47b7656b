#include "choicekit/doptimal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "choicekit/halton.hpp"
#include "choicekit/math.hpp"
#include "choicekit/rng.hpp"
#include "choicekit/tensor.hpp"

namespace choicekit {

ModelSpec design_model_spec(const AttributeSchema& schema) {
  ModelSpec s;
  s.name = "design-main-plus-interactions";
  for (const auto& a : schema.attributes) {
    s.terms.push_back({TermKind::main, "b_" + a.name, a.name, "", ""});
    s.mixing.push_back({});
  }
  for (std::size_t i = 0; i < schema.size(); ++i)
    for (std::size_t j = i + 1; j < schema.size(); ++j) {
      const auto& a = schema.attributes[i].name;
      const auto& b = schema.attributes[j].name;
      s.terms.push_back({TermKind::attr_x_attr, "d_" + a + "_x_" + b, a, b, ""});
      s.mixing.push_back({});
    }
  s.validate(schema, {});
  return s;
}

PriorSpec default_design_prior(const ModelSpec& design_spec) {
  PriorSpec prior;
  const Eigen::Index p = static_cast<Eigen::Index>(design_spec.n_terms());
  prior.means = Eigen::VectorXd::Zero(p);
  prior.variances = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const TermSpec& t = design_spec.terms[static_cast<std::size_t>(i)];
    double mean = 0.0;
    if (t.kind == TermKind::main) {
      if (t.attribute == "crowding") mean = -0.17;
      else if (t.attribute == "travel_time") mean = -1.55;
      else if (t.attribute == "covid_cases") mean = -1.08;
      else if (t.attribute == "vaccine") mean = 1.51;
      // standing and mask carry no directional prior
    }
    prior.means[i] = mean;
    double sd;
    if (mean != 0.0) sd = std::fabs(mean);        // sign uncertainty on directional priors
    else if (t.kind == TermKind::main) sd = 0.5;  // undirected mains
    else sd = 0.1;                                // interactions
    prior.variances[i] = sd * sd;
  }
  return prior;
}

namespace {

// term columns for one design row at the reference pivot
void design_row_terms(const DesignRow& row, const AttributeSchema& schema, const ModelSpec& spec,
                      double ref_pivot, Eigen::VectorXd& out) {
  const std::vector<double> z = transform_levels(row.levels, schema, ref_pivot);
  out.resize(static_cast<Eigen::Index>(spec.n_terms()));
  for (std::size_t k = 0; k < spec.n_terms(); ++k) {
    const TermSpec& t = spec.terms[k];
    switch (t.kind) {
      case TermKind::asc:
        out[static_cast<Eigen::Index>(k)] = row.alternative == spec.asc_on ? 1.0 : 0.0;
        break;
      case TermKind::main:
        out[static_cast<Eigen::Index>(k)] =
            z[static_cast<std::size_t>(schema.index_of(t.attribute))];
        break;
      case TermKind::attr_x_attr:
        out[static_cast<Eigen::Index>(k)] =
            z[static_cast<std::size_t>(schema.index_of(t.attribute))] *
            z[static_cast<std::size_t>(schema.index_of(t.attribute_b))];
        break;
      case TermKind::attr_x_cov:
        throw std::runtime_error("design evaluation: covariate terms are not defined for plans");
    }
  }
}

// per-set model matrices (J x p), built once per plan
std::vector<Eigen::MatrixXd> set_matrices(const DesignPlan& plan, const AttributeSchema& schema,
                                          const ModelSpec& spec, double ref_pivot) {
  const Eigen::Index p = static_cast<Eigen::Index>(spec.n_terms());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(plan.n_blocks * plan.situations_per_block));
  Eigen::VectorXd row;
  for (int b = 1; b <= plan.n_blocks; ++b)
    for (int s = 1; s <= plan.situations_per_block; ++s) {
      Eigen::MatrixXd X(plan.n_alternatives, p);
      for (int j = 1; j <= plan.n_alternatives; ++j) {
        design_row_terms(plan.row(b, s, j), schema, spec, ref_pivot, row);
        X.row(j - 1) = row.transpose();
      }
      out.push_back(std::move(X));
    }
  return out;
}

double d_error_from_sets(const std::vector<Eigen::MatrixXd>& sets, const Eigen::VectorXd& theta,
                         int* rank_out) {
  const Eigen::Index p = theta.size();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  for (const auto& X : sets) {
    const int J = static_cast<int>(X.rows());
    Eigen::VectorXd v = X * theta;
    const double lse = log_sum_exp(v.data(), static_cast<std::size_t>(J));
    Eigen::VectorXd prob(J);
    for (int j = 0; j < J; ++j) prob[j] = std::exp(v[j] - lse);
    const Eigen::VectorXd xbar = X.transpose() * prob;
    for (int j = 0; j < J; ++j) info.noalias() += prob[j] * X.row(j).transpose() * X.row(j);
    info.noalias() -= xbar * xbar.transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  lu.setThreshold(1e-10);
  if (rank_out) *rank_out = static_cast<int>(lu.rank());
  if (lu.rank() < p) return std::numeric_limits<double>::infinity();
  // log-det through the LU factors avoids under/overflow for p ~ 20
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    logdet += std::log(std::fabs(lu.matrixLU()(i, i)));
  return std::exp(-logdet / static_cast<double>(p));
}

double bayesian_from_sets(const std::vector<Eigen::MatrixXd>& sets, const PriorSpec& prior) {
  const DrawMatrix draws = make_draws(prior.n_draws, static_cast<int>(prior.means.size()), prior.seed);
  const Eigen::VectorXd sds = prior.variances.cwiseSqrt();
  double sum = 0.0;
  for (int d = 0; d < prior.n_draws; ++d) {
    const Eigen::VectorXd theta = prior.means + sds.cwiseProduct(draws.z.row(d).transpose());
    sum += d_error_from_sets(sets, theta, nullptr);
  }
  return sum / static_cast<double>(prior.n_draws);
}

void check_prior(const ModelSpec& spec, const PriorSpec& prior) {
  const Eigen::Index p = static_cast<Eigen::Index>(spec.n_terms());
  if (prior.means.size() != p || prior.variances.size() != p)
    throw std::runtime_error("bayesian_d_error: prior dimension does not match spec");
  if (prior.n_draws < 1) throw std::runtime_error("bayesian_d_error: need at least one draw");
  if ((prior.variances.array() < 0).any())
    throw std::runtime_error("bayesian_d_error: negative prior variance");
}

}  // namespace

double d_error(const DesignPlan& plan, const AttributeSchema& schema, const ModelSpec& spec,
               const Eigen::VectorXd& theta, double ref_pivot_minutes, int* rank_out) {
  if (theta.size() != static_cast<Eigen::Index>(spec.n_terms()))
    throw std::runtime_error("d_error: theta length does not match spec");
  return d_error_from_sets(set_matrices(plan, schema, spec, ref_pivot_minutes), theta, rank_out);
}

double bayesian_d_error(const DesignPlan& plan, const AttributeSchema& schema,
                        const ModelSpec& spec, const PriorSpec& prior,
                        double ref_pivot_minutes) {
  check_prior(spec, prior);
  return bayesian_from_sets(set_matrices(plan, schema, spec, ref_pivot_minutes), prior);
}

namespace {

int constant_count(const DesignPlan& plan, int block, int situation,
                   const AttributeSchema& schema) {
  const auto& r1 = plan.row(block, situation, 1);
  const auto& r2 = plan.row(block, situation, 2);
  int c = 0;
  for (std::size_t k = 0; k < schema.size(); ++k)
    if (std::fabs(r1.levels[k] - r2.levels[k]) <= 1e-9) ++c;
  return c;
}

DesignRow& mutable_row(DesignPlan& plan, int block, int situation, int alternative) {
  for (auto& r : plan.rows)
    if (r.block == block && r.situation == situation && r.alternative == alternative) return r;
  throw std::runtime_error("improve_design: missing row");
}

}  // namespace

ImproveResult improve_design(const DesignPlan& start, const AttributeSchema& schema,
                             const std::vector<LevelConstraint>& constraints,
                             const ModelSpec& spec, const PriorSpec& prior,
                             const ImproveOptions& opt) {
  start.validate(schema);
  if (!check_constraints(start, schema, constraints).empty())
    throw std::runtime_error("improve_design: starting plan violates constraints");
  if (start.n_alternatives != 2)
    throw std::runtime_error("improve_design: written for two-alternative plans");

  check_prior(spec, prior);
  ImproveResult res;
  res.plan = start;
  res.start_d_error =
      bayesian_from_sets(set_matrices(start, schema, spec, opt.ref_pivot_minutes), prior);
  double current = res.start_d_error;

  RandomStream rng(opt.seed, 0);
  const int n_attrs = static_cast<int>(schema.size());

  for (int it = 0; it < opt.iterations; ++it) {
    ++res.proposed_moves;
    DesignPlan candidate = res.plan;
    const int b = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(candidate.n_blocks))) + 1;
    const int s =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(candidate.situations_per_block))) + 1;
    const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_attrs)));
    const Attribute& attr = schema.attributes[static_cast<std::size_t>(k)];

    DesignRow& r1 = mutable_row(candidate, b, s, 1);
    DesignRow& r2 = mutable_row(candidate, b, s, 2);
    const bool is_constant = std::fabs(r1.levels[static_cast<std::size_t>(k)] -
                                       r2.levels[static_cast<std::size_t>(k)]) <= 1e-9;

    const bool swap_roles = rng.next_below(4) == 0;  // 1-in-4 moves swap constant/varying roles
    if (swap_roles) {
      // pick a partner attribute with the opposite role
      std::vector<int> partners;
      for (int k2 = 0; k2 < n_attrs; ++k2) {
        if (k2 == k) continue;
        const bool c2 = std::fabs(r1.levels[static_cast<std::size_t>(k2)] -
                                  r2.levels[static_cast<std::size_t>(k2)]) <= 1e-9;
        if (c2 != is_constant) partners.push_back(k2);
      }
      if (partners.empty()) continue;
      const int k2 = partners[rng.next_below(partners.size())];
      const int kc = is_constant ? k : k2;   // currently constant
      const int kv = is_constant ? k2 : k;   // currently varying
      // varying -> constant at a random level
      const Attribute& va = schema.attributes[static_cast<std::size_t>(kv)];
      const double lv = va.levels[rng.next_below(va.levels.size())];
      r1.levels[static_cast<std::size_t>(kv)] = lv;
      r2.levels[static_cast<std::size_t>(kv)] = lv;
      // constant -> varying with two distinct levels
      const Attribute& ca = schema.attributes[static_cast<std::size_t>(kc)];
      if (ca.levels.size() < 2) continue;
      const double l1 = ca.levels[rng.next_below(ca.levels.size())];
      double l2 = l1;
      while (std::fabs(l2 - l1) <= 1e-9) l2 = ca.levels[rng.next_below(ca.levels.size())];
      r1.levels[static_cast<std::size_t>(kc)] = l1;
      r2.levels[static_cast<std::size_t>(kc)] = l2;
    } else if (is_constant) {
      // move the shared level of a constant attribute
      const double lv = attr.levels[rng.next_below(attr.levels.size())];
      r1.levels[static_cast<std::size_t>(k)] = lv;
      r2.levels[static_cast<std::size_t>(k)] = lv;
    } else {
      // move one alternative's level, keeping the attribute varying
      DesignRow& target = rng.next_below(2) == 0 ? r1 : r2;
      const DesignRow& other = (&target == &r1) ? r2 : r1;
      const double forbidden = other.levels[static_cast<std::size_t>(k)];
      double lv = forbidden;
      for (int tries = 0; tries < 16 && std::fabs(lv - forbidden) <= 1e-9; ++tries)
        lv = attr.levels[rng.next_below(attr.levels.size())];
      if (std::fabs(lv - forbidden) <= 1e-9) continue;
      target.levels[static_cast<std::size_t>(k)] = lv;
    }

    if (constant_count(candidate, b, s, schema) != constant_count(res.plan, b, s, schema))
      continue;
    if (!check_constraints(candidate, schema, constraints).empty()) continue;

    const double value =
        bayesian_from_sets(set_matrices(candidate, schema, spec, opt.ref_pivot_minutes), prior);
    if (value < current) {
      current = value;
      res.plan = std::move(candidate);
      ++res.accepted_moves;
    }
  }

  res.final_d_error = current;
  return res;
}

}  // namespace choicekit
