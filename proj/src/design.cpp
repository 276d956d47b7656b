#include "choicekit/design.hpp"

#include <cstdio>
#include <fstream>

#include "choicekit/csv.hpp"

namespace choicekit {

namespace {

// (block, situation-within-block, alternative, crowding, standing, ratio, cases, mask, vaccine%)
constexpr double kReferenceRows[48][9] = {
    {1, 1, 1, 0, 0, 1.15, 70, 0, 35}, {1, 1, 2, 0, 0, 0.70, 90, 1, 20},
    {1, 2, 1, 0, 1, 0.70, 30, 1, 80}, {1, 2, 2, 1, 1, 1.00, 30, 0, 20},
    {1, 3, 1, 6, 1, 0.70, 10, 0, 50}, {1, 3, 2, 4, 0, 0.70, 50, 1, 50},
    {1, 4, 1, 4, 0, 1.30, 10, 1, 50}, {1, 4, 2, 2, 1, 1.15, 10, 1, 5},
    {1, 5, 1, 1, 1, 1.15, 50, 0, 5},  {1, 5, 2, 1, 0, 0.70, 70, 1, 5},
    {1, 6, 1, 0, 0, 1.30, 70, 0, 20}, {1, 6, 2, 4, 1, 1.30, 30, 0, 65},
    {1, 7, 1, 2, 1, 1.15, 50, 0, 80}, {1, 7, 2, 2, 0, 1.15, 90, 1, 35},
    {1, 8, 1, 0, 1, 1.30, 30, 0, 20}, {1, 8, 2, 1, 1, 0.70, 50, 1, 20},
    {2, 1, 1, 2, 1, 1.00, 10, 1, 50}, {2, 1, 2, 2, 0, 1.30, 10, 0, 5},
    {2, 2, 1, 1, 0, 0.70, 50, 1, 50}, {2, 2, 2, 6, 0, 1.00, 10, 1, 80},
    {2, 3, 1, 2, 1, 1.30, 50, 0, 65}, {2, 3, 2, 6, 0, 1.15, 50, 1, 65},
    {2, 4, 1, 2, 1, 1.30, 90, 0, 35}, {2, 4, 2, 0, 1, 1.30, 50, 1, 5},
    {2, 5, 1, 2, 0, 0.70, 30, 1, 65}, {2, 5, 2, 1, 1, 0.70, 30, 0, 5},
    {2, 6, 1, 1, 0, 1.15, 10, 1, 5},  {2, 6, 2, 1, 1, 1.30, 50, 1, 80},
    {2, 7, 1, 4, 1, 1.15, 50, 0, 80}, {2, 7, 2, 6, 0, 1.30, 30, 0, 80},
    {2, 8, 1, 0, 1, 1.15, 10, 1, 20}, {2, 8, 2, 0, 1, 1.00, 70, 0, 35},
    {3, 1, 1, 4, 1, 1.30, 10, 0, 50}, {3, 1, 2, 1, 0, 1.30, 30, 1, 50},
    {3, 2, 1, 1, 0, 1.00, 50, 0, 80}, {3, 2, 2, 1, 1, 0.70, 30, 0, 65},
    {3, 3, 1, 0, 1, 1.00, 70, 0, 5},  {3, 3, 2, 2, 0, 1.30, 70, 1, 5},
    {3, 4, 1, 0, 0, 1.00, 50, 1, 5},  {3, 4, 2, 0, 1, 1.15, 50, 0, 35},
    {3, 5, 1, 1, 0, 1.15, 30, 0, 80}, {3, 5, 2, 0, 0, 1.15, 50, 1, 50},
    {3, 6, 1, 4, 1, 1.30, 10, 1, 65}, {3, 6, 2, 4, 0, 1.15, 50, 0, 65},
    {3, 7, 1, 6, 0, 0.70, 30, 0, 50}, {3, 7, 2, 0, 1, 0.70, 30, 1, 65},
    {3, 8, 1, 1, 1, 1.30, 50, 1, 65}, {3, 8, 2, 2, 1, 0.70, 90, 1, 20},
};

const char* kDesignHeader =
    "Survey,Choice situation,Crowding density,Standing,Travel time ratio,"
    "New COVID-19 cases,Mask,Vaccine adoption";

std::string yesno(double v) { return v > 0.5 ? "Yes" : "No"; }

double parse_yesno(const std::string& s, const std::string& ctx) {
  if (s == "Yes" || s == "yes" || s == "1") return 1.0;
  if (s == "No" || s == "no" || s == "0") return 0.0;
  throw std::runtime_error(ctx + ": expected Yes/No, got '" + s + "'");
}

double parse_percent(const std::string& s, const std::string& ctx) {
  std::string t = s;
  if (!t.empty() && t.back() == '%') t.pop_back();
  return parse_double(t, ctx);
}

std::string format_level(double v) {
  char buf[32];
  if (v == static_cast<long>(v))
    std::snprintf(buf, sizeof buf, "%ld", static_cast<long>(v));
  else
    std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

DesignPlan reference_design() {
  DesignPlan plan;
  plan.rows.reserve(48);
  for (const auto& r : kReferenceRows) {
    DesignRow row;
    row.block = static_cast<int>(r[0]);
    row.situation = static_cast<int>(r[1]);
    row.alternative = static_cast<int>(r[2]);
    row.levels = {r[3], r[4], r[5], r[6], r[7], r[8]};
    plan.rows.push_back(std::move(row));
  }
  return plan;
}

DesignPlan load_design_csv(const std::string& path, const AttributeSchema& schema) {
  const CsvTable t = read_csv(path);
  const int c_block = t.require_column("Survey");
  const int c_sit = t.require_column("Choice situation");
  const int c_crowd = t.require_column("Crowding density");
  const int c_stand = t.require_column("Standing");
  const int c_time = t.require_column("Travel time ratio");
  const int c_cases = t.require_column("New COVID-19 cases");
  const int c_mask = t.require_column("Mask");
  const int c_vacc = t.require_column("Vaccine adoption");

  DesignPlan plan;
  int last_block = -1, last_global_sit = -1, alt = 0;
  int max_block = 0, max_sit = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string ctx = path + ":" + std::to_string(t.line_numbers[i]);
    DesignRow r;
    r.block = static_cast<int>(parse_long(row[static_cast<std::size_t>(c_block)], ctx));
    // published layout numbers situations consecutively across blocks
    const int global_sit = static_cast<int>(parse_long(row[static_cast<std::size_t>(c_sit)], ctx));
    if (r.block != last_block || global_sit != last_global_sit) alt = 0;
    last_block = r.block;
    last_global_sit = global_sit;
    r.alternative = ++alt;
    r.levels = {
        parse_double(row[static_cast<std::size_t>(c_crowd)], ctx),
        parse_yesno(row[static_cast<std::size_t>(c_stand)], ctx),
        parse_double(row[static_cast<std::size_t>(c_time)], ctx),
        parse_double(row[static_cast<std::size_t>(c_cases)], ctx),
        parse_yesno(row[static_cast<std::size_t>(c_mask)], ctx),
        parse_percent(row[static_cast<std::size_t>(c_vacc)], ctx),
    };
    plan.rows.push_back(std::move(r));
    max_block = std::max(max_block, plan.rows.back().block);
  }
  plan.n_blocks = max_block;

  // assign within-block situation indices in order of first appearance
  // (published files number situations 1..24 consecutively across blocks)
  {
    std::map<int, int> counter;
    int idx = 0;
    for (auto& r : plan.rows) {
      if (r.alternative == 1) idx = ++counter[r.block];
      r.situation = idx;
      max_sit = std::max(max_sit, idx);
    }
  }
  plan.situations_per_block = max_sit;
  plan.validate(schema);
  return plan;
}

void save_design_csv(const DesignPlan& plan, const AttributeSchema& schema,
                     const std::string& path) {
  (void)schema;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << kDesignHeader << "\n";
  for (const auto& r : plan.rows) {
    // published numbering: situations run consecutively across blocks
    const int global_sit = (r.block - 1) * plan.situations_per_block + r.situation;
    out << r.block << ',' << global_sit << ',' << format_level(r.levels[0]) << ','
        << yesno(r.levels[1]) << ',' << format_level(r.levels[2]) << ','
        << format_level(r.levels[3]) << ',' << yesno(r.levels[4]) << ','
        << format_level(r.levels[5]) << "%\n";
  }
}

}  // namespace choicekit
