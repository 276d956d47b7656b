#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "choicekit/schema.hpp"

namespace choicekit {

// One alternative's raw attribute levels within a choice situation.
struct DesignRow {
  int block = 0;       // 1..n_blocks
  int situation = 0;   // 1..situations_per_block (within block)
  int alternative = 0; // 1..alternatives
  std::vector<double> levels;  // raw, ordered as in the schema
};

struct DesignPlan {
  int n_blocks = 3;
  int situations_per_block = 8;
  int n_alternatives = 2;
  std::vector<DesignRow> rows;

  const DesignRow& row(int block, int situation, int alternative) const {
    for (const auto& r : rows)
      if (r.block == block && r.situation == situation && r.alternative == alternative)
        return r;
    throw std::runtime_error("design: no row for block " + std::to_string(block) +
                             " situation " + std::to_string(situation) + " alternative " +
                             std::to_string(alternative));
  }

  bool has_situation(int block, int situation) const {
    for (const auto& r : rows)
      if (r.block == block && r.situation == situation) return true;
    return false;
  }

  // Structural check: complete block/situation/alternative grid, known levels.
  void validate(const AttributeSchema& schema) const {
    if (rows.size() != static_cast<std::size_t>(n_blocks * situations_per_block * n_alternatives))
      throw std::runtime_error("design: expected " +
                               std::to_string(n_blocks * situations_per_block * n_alternatives) +
                               " rows, got " + std::to_string(rows.size()));
    std::map<std::array<int, 3>, int> seen;
    for (const auto& r : rows) {
      if (r.block < 1 || r.block > n_blocks)
        throw std::runtime_error("design: block out of range: " + std::to_string(r.block));
      if (r.situation < 1 || r.situation > situations_per_block)
        throw std::runtime_error("design: situation out of range: " + std::to_string(r.situation));
      if (r.alternative < 1 || r.alternative > n_alternatives)
        throw std::runtime_error("design: alternative out of range: " + std::to_string(r.alternative));
      if (r.levels.size() != schema.size())
        throw std::runtime_error("design: row has " + std::to_string(r.levels.size()) +
                                 " levels, schema has " + std::to_string(schema.size()));
      for (std::size_t k = 0; k < schema.size(); ++k)
        if (!schema.attributes[k].has_level(r.levels[k]))
          throw std::runtime_error("design: level " + std::to_string(r.levels[k]) +
                                   " not in schema for attribute '" + schema.attributes[k].name + "'");
      if (++seen[{r.block, r.situation, r.alternative}] > 1)
        throw std::runtime_error("design: duplicate row (block " + std::to_string(r.block) +
                                 ", situation " + std::to_string(r.situation) + ", alternative " +
                                 std::to_string(r.alternative) + ")");
    }
  }
};

// Forbidden level combinations between two attributes.
struct LevelConstraint {
  std::string attribute_a;
  std::vector<double> levels_a;
  std::string attribute_b;
  std::vector<double> levels_b;
  std::string label;
};

struct ConstraintViolation {
  int block = 0, situation = 0, alternative = 0;
  std::string label;
};

// The fielding restrictions of the study design: high case counts are
// incompatible with high vaccination; high crowding is incompatible with low
// vaccination and with high case counts.
inline std::vector<LevelConstraint> study_constraints() {
  return {
      {"covid_cases", {70, 90}, "vaccine", {50, 65, 80}, "high cases with high vaccination"},
      {"crowding", {4, 6}, "vaccine", {5, 20, 35}, "high crowding with low vaccination"},
      {"crowding", {4, 6}, "covid_cases", {70, 90}, "high crowding with high cases"},
  };
}

inline bool level_in(const std::vector<double>& set, double v, double tol = 1e-9) {
  for (double s : set)
    if (std::fabs(s - v) <= tol) return true;
  return false;
}

inline std::vector<ConstraintViolation> check_constraints(
    const DesignPlan& plan, const AttributeSchema& schema,
    const std::vector<LevelConstraint>& constraints) {
  for (const auto& c : constraints) {
    for (const auto& name : {c.attribute_a, c.attribute_b})
      if (schema.index_of(name) < 0)
        throw std::runtime_error("constraint references unknown attribute '" + name + "'");
    for (double l : c.levels_a)
      if (!schema.at(c.attribute_a).has_level(l))
        throw std::runtime_error("constraint level " + std::to_string(l) +
                                 " not in schema for '" + c.attribute_a + "'");
    for (double l : c.levels_b)
      if (!schema.at(c.attribute_b).has_level(l))
        throw std::runtime_error("constraint level " + std::to_string(l) +
                                 " not in schema for '" + c.attribute_b + "'");
  }
  std::vector<ConstraintViolation> out;
  for (const auto& r : plan.rows) {
    for (const auto& c : constraints) {
      const int ia = schema.index_of(c.attribute_a);
      const int ib = schema.index_of(c.attribute_b);
      if (level_in(c.levels_a, r.levels[static_cast<std::size_t>(ia)]) &&
          level_in(c.levels_b, r.levels[static_cast<std::size_t>(ib)]))
        out.push_back({r.block, r.situation, r.alternative, c.label});
    }
  }
  return out;
}

// Partial-profile audit: which attributes are constant across the two
// alternatives of each choice set, and per-(block, attribute) counts.
struct ProfileAudit {
  struct SetReport {
    int block = 0, situation = 0;
    std::vector<std::string> constant_attributes;
  };
  std::vector<SetReport> sets;
  // constant-set counts indexed [block-1][attribute]
  std::vector<std::vector<int>> per_block_counts;
};

inline ProfileAudit partial_profile_audit(const DesignPlan& plan, const AttributeSchema& schema) {
  ProfileAudit audit;
  audit.per_block_counts.assign(static_cast<std::size_t>(plan.n_blocks),
                                std::vector<int>(schema.size(), 0));
  for (int b = 1; b <= plan.n_blocks; ++b) {
    for (int s = 1; s <= plan.situations_per_block; ++s) {
      const DesignRow& r1 = plan.row(b, s, 1);
      const DesignRow& r2 = plan.row(b, s, 2);
      ProfileAudit::SetReport rep{b, s, {}};
      for (std::size_t k = 0; k < schema.size(); ++k) {
        if (std::fabs(r1.levels[k] - r2.levels[k]) <= 1e-9) {
          rep.constant_attributes.push_back(schema.attributes[k].name);
          audit.per_block_counts[static_cast<std::size_t>(b - 1)][k] += 1;
        }
      }
      audit.sets.push_back(std::move(rep));
    }
  }
  return audit;
}

// Reference partial-profile design of the study: 3 blocks x 8 situations x 2
// alternatives. Levels ordered (crowding, standing, travel_time ratio,
// covid_cases, mask, vaccine %).
DesignPlan reference_design();

// CSV loading/saving in the published column layout
DesignPlan load_design_csv(const std::string& path, const AttributeSchema& schema);
void save_design_csv(const DesignPlan& plan, const AttributeSchema& schema,
                     const std::string& path);

}  // namespace choicekit
