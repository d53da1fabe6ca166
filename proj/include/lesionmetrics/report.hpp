#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lesionmetrics/burden.hpp"
#include "lesionmetrics/detection.hpp"
#include "lesionmetrics/instance_extraction.hpp"
#include "lesionmetrics/manifest.hpp"
#include "lesionmetrics/morphometry.hpp"
#include "lesionmetrics/overlap_metrics.hpp"
#include "lesionmetrics/stats.hpp"

namespace lesionmetrics {

inline constexpr int kReportSchemaVersion = 1;

struct AnalyzeOptions {
  Connectivity connectivity = Connectivity::twenty_six;
  double min_diameter_mm = kMicroUpperMm;
  std::size_t min_cluster_voxels = 2;
  int repair_gap = 0;
  double min_match_dice = 0.0;
  bool keep_going = false;
  unsigned threads = 1;
};

/// Rounds to 6 significant digits. Every number that reaches a report goes
/// through this first, so reports are stable and recomputable.
double quantize(double value);

struct LesionRecord {
  int gt_id = 0;
  std::optional<int> pred_id;
  Morphometry gt;
  std::optional<OverlapScores> scores;
};

struct FalsePositiveRecord {
  int pred_id = 0;
  Morphometry pred;
};

struct MaskSummary {
  StudyBurden burden;
  std::size_t satellites_removed = 0;
  std::size_t micro_excluded = 0;
};

struct StudyMetrics {
  std::string patient_id;
  int study_order = 0;
  std::string gt_path;
  std::string pred_path;
  MaskSummary gt;
  MaskSummary pred;
  DetectionScores detection;
  std::vector<LesionRecord> lesions;
  std::vector<FalsePositiveRecord> false_positives;
  double signed_diff_cc = 0.0;
};

struct StudyFailure {
  std::string patient_id;
  int study_order = 0;
  std::string message;
};

struct SegmentationSummary {
  std::size_t n = 0;
  std::optional<double> dice_mean, dice_sd, hd_mean, hd_sd;
};

/// Cohort rows. "all" pools every lesion that survived filtering, which with
/// the default 3 mm cut-off means small and significant ones.
inline constexpr std::array<const char*, 3> kCohortStrata{"all", "small", "significant"};

struct CohortAggregates {
  std::array<DetectionCounts, 3> detection;  // indexed as kCohortStrata
  std::array<SegmentationSummary, 3> segmentation;
  std::optional<stats::QuantileSummary> gt_burden;
  std::optional<stats::QuantileSummary> pred_burden;
  std::optional<stats::QuantileSummary> signed_diff;
  std::optional<stats::RegressionFit> regression;
  std::optional<stats::AgreementSummary> bland_altman;
  std::optional<stats::TestResult> burden_wilcoxon;
  std::optional<stats::TestResult> dice_friedman_by_visit;
};

struct CohortReport {
  AnalyzeOptions options;
  std::vector<StudyMetrics> studies;  // sorted by (patient_id, study_order)
  std::vector<PatientTrajectory> trajectories;
  CohortAggregates aggregates;
  std::vector<StudyFailure> failures;
};

/// Runs one manifest row: load, optional repair, extraction, satellite
/// removal, morphometry, micro-nodule exclusion, matching, scoring, burden.
StudyMetrics analyze_study(const ManifestRow& row, const AnalyzeOptions& options);

/// Analyzes every row on a pool of `options.threads` workers. A failing row
/// aborts the run (rethrowing its Error) unless keep_going is set, in which
/// case it is recorded in `failures`.
CohortReport run_analyze(const CohortManifest& manifest, const AnalyzeOptions& options);

/// Fills aggregates and trajectories from the per-study records.
void compute_aggregates(CohortReport& report);

/// Builds the Friedman design over visits: blocks are patients with a
/// per-study value at every one of the first k visits, where k is the
/// smallest visit count among patients with >= 2 visits.
std::vector<std::vector<double>> visit_block_design(
    const std::vector<std::pair<std::string, std::vector<std::optional<double>>>>& per_patient);

nlohmann::ordered_json to_json(const CohortReport& report);

/// Writes report.json plus the CSV plot bundle into `out_dir`.
void write_report(const CohortReport& report, const std::filesystem::path& out_dir);

std::string dump_report(const nlohmann::ordered_json& report);

/// Writes dice_by_stratum.csv, hd_by_stratum.csv, regression_pairs.csv,
/// bland_altman_pairs.csv and trajectories.csv from a report document.
void emit_plot_data(const nlohmann::json& report, const std::filesystem::path& out_dir);

/// Recomputes every aggregate from the per-study records of a report
/// document and returns one message per disagreement (empty when consistent).
std::vector<std::string> check_report_consistency(const nlohmann::json& report);

/// Formats a number the way the CSV bundle does (%.6g, "-0" as "0").
std::string format_number(double value);

}  // namespace lesionmetrics
