#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace choicekit {

enum class TransformStep { identity, divide_by_100, fraction, pivot_ratio, sign_flip };

// Deterministic scaling from raw survey levels to model regressor units.
// Steps compose left to right; pivot_ratio needs the respondent's reference
// travel time in minutes.
struct Transform {
  std::vector<TransformStep> steps;

  bool needs_pivot() const {
    for (auto s : steps)
      if (s == TransformStep::pivot_ratio) return true;
    return false;
  }

  double apply(double raw, std::optional<double> pivot_minutes = std::nullopt) const {
    double x = raw;
    for (auto s : steps) {
      switch (s) {
        case TransformStep::identity: break;
        case TransformStep::divide_by_100: x /= 100.0; break;
        case TransformStep::fraction: x /= 100.0; break;  // percent of 1
        case TransformStep::pivot_ratio:
          if (!pivot_minutes)
            throw std::runtime_error("transform: pivot travel time required but missing");
          x *= *pivot_minutes;
          break;
        case TransformStep::sign_flip: x = -x; break;
      }
    }
    return x;
  }
};

enum class AttributeKind { numeric, binary };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::vector<double> levels;  // raw level values (binary: 0/1)
  Transform scaling;
  bool pivoted = false;

  bool has_level(double v, double tol = 1e-9) const {
    for (double l : levels)
      if (std::fabs(l - v) <= tol) return true;
    return false;
  }
};

struct AttributeSchema {
  std::vector<Attribute> attributes;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (attributes[i].name == name) return static_cast<int>(i);
    return -1;
  }
  const Attribute& at(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0) throw std::runtime_error("unknown attribute '" + name + "'");
    return attributes[static_cast<std::size_t>(i)];
  }
  std::size_t size() const { return attributes.size(); }

  void validate() const {
    if (attributes.empty()) throw std::runtime_error("schema: no attributes");
    int pivoted = 0;
    for (const auto& a : attributes) {
      if (a.name.empty()) throw std::runtime_error("schema: unnamed attribute");
      if (a.levels.empty()) throw std::runtime_error("schema: attribute '" + a.name + "' has no levels");
      if (a.pivoted) ++pivoted;
      if (a.kind == AttributeKind::binary && a.levels.size() != 2)
        throw std::runtime_error("schema: binary attribute '" + a.name + "' must have 2 levels");
    }
    for (std::size_t i = 0; i < attributes.size(); ++i)
      for (std::size_t j = i + 1; j < attributes.size(); ++j)
        if (attributes[i].name == attributes[j].name)
          throw std::runtime_error("schema: duplicate attribute '" + attributes[i].name + "'");
    if (pivoted > 1) throw std::runtime_error("schema: at most one attribute may be pivoted");
  }
};

// The London Underground study schema: six attributes, levels as fielded.
// Regressor units after scaling: crowding persons/m2, standing 0/1, travel
// time minutes/100, daily cases (per 1e5)/100, mask 0/1, vaccine share of 1.
inline AttributeSchema study_schema() {
  AttributeSchema s;
  s.attributes = {
      {"crowding", AttributeKind::numeric, {0, 1, 2, 4, 6}, {{TransformStep::identity}}, false},
      {"standing", AttributeKind::binary, {0, 1}, {{TransformStep::identity}}, false},
      {"travel_time",
       AttributeKind::numeric,
       {0.70, 1.00, 1.15, 1.30},
       {{TransformStep::pivot_ratio, TransformStep::divide_by_100}},
       true},
      {"covid_cases",
       AttributeKind::numeric,
       {10, 30, 50, 70, 90},
       {{TransformStep::divide_by_100}},
       false},
      {"mask", AttributeKind::binary, {0, 1}, {{TransformStep::identity}}, false},
      {"vaccine",
       AttributeKind::numeric,
       {5, 20, 35, 50, 65, 80},
       {{TransformStep::fraction}},
       false},
  };
  s.validate();
  return s;
}

}  // namespace choicekit
