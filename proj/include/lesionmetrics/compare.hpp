#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lesionmetrics/stats.hpp"

namespace lesionmetrics {

struct NamedTest {
  std::string name;     // e.g. "dice_wilcoxon"
  std::string stratum;  // all | small | significant | report_a | report_b
  stats::Alternative alternative = stats::Alternative::two_sided;
  stats::TestResult result;
};

struct CompareResult {
  std::size_t paired_lesions = 0;
  std::vector<NamedTest> tests;
};

/// Pairs per-lesion scores of two reports by (patient, study, gt lesion id)
/// and tests A against B per stratum: Dice with two-sided and "greater"
/// Wilcoxon (a missed lesion scores Dice 0), HD two-sided over lesions
/// matched in both. Also runs the visit Friedman test on each report's
/// per-study mean Dice. Throws Error when the lesion universes differ.
CompareResult run_compare(const nlohmann::json& report_a, const nlohmann::json& report_b);

nlohmann::ordered_json to_json(const CompareResult& result);

}  // namespace lesionmetrics
