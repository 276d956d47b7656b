#include "choicekit/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "choicekit/math.hpp"
#include "choicekit/mixing.hpp"

namespace choicekit {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

const char* family_label(MixingFamily f) {
  switch (f) {
    case MixingFamily::fixed: return "fixed";
    case MixingFamily::normal: return "normal";
    case MixingFamily::lognormal: return "lognormal";
  }
  return "?";
}

// published convention: lognormal coefficients entering utility with sign -1
// are reported as the distribution of the negated coefficient
std::string reported_name(const TermSpec& term, const MixingRule& rule) {
  if (rule.family == MixingFamily::lognormal && rule.sign < 0) return "(-) " + term.name;
  return term.name;
}

void coefficient_table(std::ostringstream& os, const std::vector<std::string>& names,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& se,
                       const Eigen::VectorXd& z) {
  os << "coefficient                            estimate   std.error     z-value\n";
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-36s %10.4f  %10.4f  %10.2f\n", names[static_cast<std::size_t>(i)].c_str(),
                  theta[i], se.size() ? se[i] : 0.0, z.size() ? z[i] : 0.0);
    os << line;
  }
}

void hashes_block(std::ostringstream& os, const std::map<std::string, std::string>& input_hashes) {
  if (input_hashes.empty()) return;
  os << "\ninputs:\n";
  for (const auto& [path, hash] : input_hashes) os << "  " << path << "  " << hash << "\n";
}

}  // namespace

std::string format_mnl_report(const EstimationResult& r, const ModelSpec& spec,
                              const ChoiceDataset& ds,
                              const std::map<std::string, std::string>& input_hashes) {
  std::ostringstream os;
  os << "== choicekit estimation report ==\n";
  os << "engine: mnl\n";
  os << "model: " << spec.name << "\n";
  os << "respondents: " << ds.respondents.size() << "\n";
  os << "observations: " << ds.observations.size() << "\n";
  os << "converged: " << (r.converged ? "yes" : "NO") << " (" << r.iterations
     << " iterations, gradient norm " << fmt("%.3e", r.gradient_norm) << ")\n";
  if (!r.converged) os << "note: " << r.message << "\n";
  os << "loglikelihood: " << fmt("%.4f", r.loglik) << "\n";
  os << "null loglikelihood (constant only): " << fmt("%.4f", r.null_loglik) << "\n\n";
  coefficient_table(os, r.names, r.theta, r.std_errors, r.z_values);
  hashes_block(os, input_hashes);
  return os.str();
}

std::string format_mxl_report(const MxlResult& r, const ChoiceDataset& ds,
                              const std::map<std::string, std::string>& input_hashes,
                              int summary_se_draws, std::uint64_t summary_se_seed) {
  std::ostringstream os;
  os << "== choicekit estimation report ==\n";
  os << "engine: mxl (panel, simulated maximum likelihood)\n";
  os << "model: " << r.spec.name << "\n";
  os << "respondents: " << ds.respondents.size() << "\n";
  os << "observations: " << ds.observations.size() << "\n";
  os << "draws: R=" << r.r_draws << "  " << r.generator << "\n";
  os << "seed: " << r.seed << "\n";
  os << "converged: " << (r.converged ? "yes" : "NO") << " (" << r.iterations
     << " iterations, gradient norm " << fmt("%.3e", r.gradient_norm) << ")\n";
  if (!r.converged) os << "note: " << r.message << "\n";
  for (const auto& d : r.diagnostics) os << "diagnostic: " << d << "\n";
  os << "simulated loglikelihood: " << fmt("%.4f", r.loglik) << "\n";
  os << "null loglikelihood (constant only): " << fmt("%.4f", r.null_loglik) << "\n\n";

  // packed coefficients with the published reporting convention on names
  std::vector<std::string> names;
  for (std::size_t k = 0; k < r.spec.n_terms(); ++k) {
    const auto& rule = r.spec.mixing[k];
    std::string base = reported_name(r.spec.terms[k], rule);
    if (rule.is_random()) base += " [" + std::string(family_label(rule.family)) + " mu]";
    names.push_back(base);
  }
  for (int k : r.packing.random_terms)
    names.push_back(reported_name(r.spec.terms[static_cast<std::size_t>(k)],
                                  r.spec.mixing[static_cast<std::size_t>(k)]) +
                    " [sigma]");
  coefficient_table(os, names, r.theta, r.std_errors, r.z_values);

  // mixing summary block (distribution of each random coefficient, reported
  // in the (-) convention, with simulation standard errors)
  if (!r.packing.random_terms.empty() && r.vcov.size() > 0) {
    os << "\nmixing summary (reported distribution; simulation SEs, M=" << summary_se_draws
       << "):\n";
    os << "coefficient                          statistic     estimate    std.error      z-value\n";
    const ParameterSampler sampler(r.theta, r.vcov, summary_se_draws, summary_se_seed);
    const char* stat_names[5] = {"mean", "std.dev", "p5", "p50", "p95"};
    for (int k : r.packing.random_terms) {
      const auto& term = r.spec.terms[static_cast<std::size_t>(k)];
      const auto& rule = r.spec.mixing[static_cast<std::size_t>(k)];
      const int mu_slot = k;
      const int sg_slot = r.packing.sigma_slot(k);
      auto summary_of = [&](const Eigen::VectorXd& theta) {
        const double mu = theta[mu_slot];
        const double sg = std::fabs(theta[sg_slot]);
        // reported convention: the lognormal of the negated coefficient is
        // shown with positive statistics
        return rule.family == MixingFamily::lognormal ? lognormal_summary(mu, sg, +1)
                                                      : normal_summary(mu, sg);
      };
      const DistributionSummary point = summary_of(r.theta);
      const auto values = point.as_vector();
      for (int st = 0; st < 5; ++st) {
        const double se = sampler.std_error(
            [&](const Eigen::VectorXd& th) { return summary_of(th).as_vector()[static_cast<std::size_t>(st)]; });
        char line[200];
        std::snprintf(line, sizeof line, "%-36s %-9s %12.4f %12.4f %12.2f\n",
                      (reported_name(term, rule) + " [" + family_label(rule.family) + "]").c_str(),
                      stat_names[st], values[static_cast<std::size_t>(st)], se,
                      se > 0 ? values[static_cast<std::size_t>(st)] / se : 0.0);
        os << line;
      }
    }
  }
  hashes_block(os, input_hashes);
  return os.str();
}

std::string format_screening_report(const ScreeningReport& rep) {
  std::ostringstream os;
  os << "== choicekit screening report ==\n";
  os << "input respondents: " << rep.n_input << "\n";
  os << "fast responders (below 40% of median response time): " << rep.fast_responders.size()
     << "\n";
  os << "straight-liners (same alternative in all situations): " << rep.straight_liners.size()
     << "\n";
  os << "inconsistent households (size below children + workers): " << rep.inconsistent.size()
     << "\n";
  os << "excluded (union of the three rules): " << rep.excluded_union.size() << "\n";
  os << "retained: " << rep.n_retained << "\n";
  auto list = [&](const char* label, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    os << label << ":";
    for (const auto& id : ids) os << ' ' << id;
    os << "\n";
  };
  list("fast responder ids", rep.fast_responders);
  list("straight-liner ids", rep.straight_liners);
  list("inconsistent ids", rep.inconsistent);
  return os.str();
}

std::string format_ablation_report(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "== per-attribute loglikelihood ablation (constant + one attribute) ==\n";
  os << "attribute                 loglikelihood     gain.over.null\n";
  for (const auto& row : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %14.4f %18.4f%s\n",
                  row.attribute.empty() ? "(constant only)" : row.attribute.c_str(), row.loglik,
                  row.gain_over_null, row.converged ? "" : "  [not converged]");
    os << line;
  }
  return os.str();
}

std::string sensitivity_csv(const std::string& scenario, const SensitivityTable& table) {
  std::ostringstream os;
  os << "scenario,attribute,raw_value,transformed,extrapolated,mean,p5,p50,p95\n";
  for (const auto& pt : table.points) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%s,%g,%g,%d,%.6f,%.6f,%.6f,%.6f\n", scenario.c_str(),
                  table.attribute.c_str(), pt.raw, pt.transformed, pt.extrapolated ? 1 : 0,
                  pt.mean, pt.p5, pt.p50, pt.p95);
    os << line;
  }
  return os.str();
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return string_hash_hex(ss.str());
}

std::string string_hash_hex(const std::string& text) { return hash_hex(fnv1a64(text)); }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = tool_version;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["inputs"] = input_hashes;
  j["outputs"] = output_hashes;
  j["seeds"] = seeds;
  j["timestamp"] = timestamp;  // empty string when omitted for reproducibility
  return j.dump(2) + "\n";
}

}  // namespace choicekit
