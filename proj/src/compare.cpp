#include "lesionmetrics/compare.hpp"

#include <map>
#include <optional>
#include <tuple>

#include "lesionmetrics/error.hpp"
#include "lesionmetrics/report.hpp"

namespace lesionmetrics {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using LesionKey = std::tuple<std::string, int, int>;

struct LesionScore {
  std::string stratum;
  double dice = 0.0;
  std::optional<double> hausdorff_mm;
};

std::map<LesionKey, LesionScore> lesion_scores(const json& report, const char* label) {
  std::map<LesionKey, LesionScore> out;
  try {
    for (const auto& s : report.at("studies")) {
      const auto pid = s.at("patient_id").get<std::string>();
      const int order = s.at("study_order").get<int>();
      for (const auto& l : s.at("lesions")) {
        LesionScore score;
        score.stratum = l.at("stratum").get<std::string>();
        if (!l.at("dice").is_null()) {
          score.dice = l.at("dice").get<double>();
          score.hausdorff_mm = l.at("hausdorff_mm").get<double>();
        }
        out.emplace(LesionKey{pid, order, l.at("gt_id").get<int>()}, score);
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report ") + label + ": " + e.what());
  }
  return out;
}

std::optional<stats::TestResult> friedman_by_visit(const json& report) {
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> per_patient;
  for (const auto& s : report.at("studies")) {
    const auto pid = s.at("patient_id").get<std::string>();
    if (per_patient.empty() || per_patient.back().first != pid) per_patient.emplace_back(pid, std::vector<std::optional<double>>{});
    std::vector<double> values;
    for (const auto& l : s.at("lesions"))
      if (!l.at("dice").is_null()) values.push_back(l.at("dice").get<double>());
    per_patient.back().second.push_back(values.empty() ? std::nullopt : std::optional<double>(stats::mean(values)));
  }
  const auto blocks = visit_block_design(per_patient);
  if (blocks.size() < 2) return std::nullopt;
  return stats::friedman(blocks);
}

}  // namespace

CompareResult run_compare(const json& report_a, const json& report_b) {
  const auto a = lesion_scores(report_a, "A");
  const auto b = lesion_scores(report_b, "B");
  if (a.empty() && b.empty()) throw Error("no ground-truth lesions to compare");
  for (const auto* side : {&a, &b}) {
    const auto& other = (side == &a) ? b : a;
    for (const auto& [key, score] : *side) {
      if (other.count(key)) continue;
      throw Error("lesion universes differ: patient " + std::get<0>(key) + " study " +
                  std::to_string(std::get<1>(key)) + " lesion " + std::to_string(std::get<2>(key)) +
                  " is only in report " + (side == &a ? "A" : "B"));
    }
  }

  CompareResult result;
  result.paired_lesions = a.size();
  for (const char* stratum : kCohortStrata) {
    const std::string name(stratum);
    std::vector<double> dice_a, dice_b, hd_a, hd_b;
    for (const auto& [key, sa] : a) {
      if (name != "all" && sa.stratum != name) continue;
      const LesionScore& sb = b.at(key);
      dice_a.push_back(sa.dice);
      dice_b.push_back(sb.dice);
      if (sa.hausdorff_mm && sb.hausdorff_mm) {
        hd_a.push_back(*sa.hausdorff_mm);
        hd_b.push_back(*sb.hausdorff_mm);
      }
    }
    if (!dice_a.empty()) {
      for (auto alt : {stats::Alternative::two_sided, stats::Alternative::greater})
        result.tests.push_back({"dice_wilcoxon", name, alt, stats::wilcoxon_signed_rank(dice_a, dice_b, alt)});
    }
    if (!hd_a.empty())
      result.tests.push_back({"hd_wilcoxon", name, stats::Alternative::two_sided,
                              stats::wilcoxon_signed_rank(hd_a, hd_b, stats::Alternative::two_sided)});
  }
  if (auto f = friedman_by_visit(report_a)) result.tests.push_back({"dice_friedman_by_visit", "report_a", stats::Alternative::two_sided, *f});
  if (auto f = friedman_by_visit(report_b)) result.tests.push_back({"dice_friedman_by_visit", "report_b", stats::Alternative::two_sided, *f});
  return result;
}

ordered_json to_json(const CompareResult& result) {
  ordered_json j;
  j["paired_lesions"] = result.paired_lesions;
  j["tests"] = ordered_json::array();
  for (const auto& t : result.tests) {
    ordered_json tj;
    tj["name"] = t.name;
    tj["stratum"] = t.stratum;
    tj["alternative"] = std::string(stats::to_string(t.alternative));
    tj["statistic"] = quantize(t.result.statistic);
    tj["p_value"] = quantize(t.result.p_value);
    tj["n_effective"] = t.result.n_effective;
    tj["effect_size_r"] = t.result.effect_size_r ? ordered_json(quantize(*t.result.effect_size_r)) : ordered_json(nullptr);
    tj["method"] = std::string(stats::to_string(t.result.method));
    j["tests"].push_back(std::move(tj));
  }
  return j;
}

}  // namespace lesionmetrics
