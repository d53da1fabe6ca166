#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lesionmetrics/compare.hpp"
#include "lesionmetrics/error.hpp"
#include "lesionmetrics/phantom.hpp"
#include "lesionmetrics/report.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace fs = std::filesystem;
using namespace lesionmetrics;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

int cmd_analyze(const fs::path& manifest_path, const fs::path& out_dir, const AnalyzeOptions& options) {
  const CohortReport report = run_analyze(load_manifest(manifest_path), options);
  write_report(report, out_dir);
  for (const auto& f : report.failures)
    std::cerr << "warning: skipped " << f.patient_id << " study " << f.study_order << ": " << f.message << "\n";
  std::cout << "analyzed " << report.studies.size() << " studies, " << report.failures.size() << " failed; wrote "
            << (out_dir / "report.json").string() << "\n";
  return 0;
}

int cmd_compare(const fs::path& a, const fs::path& b, const std::string& out) {
  const std::string text = to_json(run_compare(read_json(a), read_json(b))).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

int cmd_plot_data(const fs::path& report_path, const fs::path& out_dir) {
  emit_plot_data(read_json(report_path), out_dir);
  return 0;
}

int cmd_verify(const fs::path& report_path) {
  const auto problems = check_report_consistency(read_json(report_path));
  for (const auto& p : problems) std::cerr << p << "\n";
  if (!problems.empty()) throw Error(std::to_string(problems.size()) + " inconsistencies in " + report_path.string());
  std::cout << "consistent\n";
  return 0;
}

int cmd_phantom(const fs::path& spec_path, const fs::path& out_dir) {
  const phantom::PhantomSpec spec = phantom::spec_from_json(read_json(spec_path));
  const phantom::GeneratedPhantom gt = phantom::generate(spec);
  const phantom::PerturbedPhantom pred = phantom::perturb(gt.gt, spec);
  fs::create_directories(out_dir);
  save_label_volume(gt.gt, out_dir / "gt.nii.gz");
  save_label_volume(pred.pred, out_dir / "pred.nii.gz");

  nlohmann::ordered_json truth;
  truth["spec"] = phantom::to_json(spec);
  truth["lesions"] = nlohmann::ordered_json::array();
  for (const auto& e : gt.expected)
    truth["lesions"].push_back({{"id", e.id},
                                {"volume_cc", e.volume_cc},
                                {"diameter_mm", e.diameter_mm},
                                {"stratum", std::string(to_string(e.stratum))}});
  truth["expected_match"] = {{"tp", pred.expected.tp}, {"fp", pred.expected.fp}, {"fn", pred.expected.fn}};
  write_file(out_dir / "truth.json", truth.dump(2) + "\n");
  write_file(out_dir / "manifest.csv", "patient_id,study_order,gt_path,pred_path\nphantom,1,gt.nii.gz,pred.nii.gz\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lung lesion segmentation evaluation"};
  app.require_subcommand(1);

  AnalyzeOptions options;
  int connectivity = 26;
  std::string manifest, out_dir, report_a, report_b, compare_out, report_path, spec_path;

  auto* analyze = app.add_subcommand("analyze", "Evaluate a cohort manifest and write report.json and CSVs");
  analyze->add_option("manifest", manifest, "CSV or JSON manifest")->required();
  analyze->add_option("--out", out_dir, "Output directory")->required();
  analyze->add_option("--connectivity", connectivity, "6, 18 or 26")->check(CLI::IsMember({6, 18, 26}));
  analyze->add_option("--min-diameter-mm", options.min_diameter_mm, "Exclude lesions below this mean diameter")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--min-cluster-voxels", options.min_cluster_voxels, "Drop components smaller than this");
  analyze->add_option("--repair-gap", options.repair_gap, "Fill z-gaps of at most this many slices (0 = off)")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--min-match-dice", options.min_match_dice, "Minimum Dice for a TP match")
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_flag("--keep-going", options.keep_going, "Record failing studies instead of aborting");
  analyze->add_option("--threads", options.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "Paired tests between two reports on the same ground truth");
  compare->add_option("report_a", report_a)->required();
  compare->add_option("report_b", report_b)->required();
  compare->add_option("--out", compare_out, "Write JSON here instead of stdout");

  auto* plot = app.add_subcommand("plot-data", "Regenerate the CSV plot bundle from a report");
  plot->add_option("report", report_path)->required();
  plot->add_option("--out", out_dir)->required();

  auto* verify = app.add_subcommand("verify", "Check that a report's aggregates match its per-study records");
  verify->add_option("report", report_path)->required();

  auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic phantom study with known truth");
  phantom_cmd->add_option("spec", spec_path, "Phantom spec JSON")->required();
  phantom_cmd->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*analyze) {
      options.connectivity = connectivity_from_int(connectivity);
      return cmd_analyze(manifest, out_dir, options);
    }
    if (*compare) return cmd_compare(report_a, report_b, compare_out);
    if (*plot) return cmd_plot_data(report_path, out_dir);
    if (*verify) return cmd_verify(report_path);
    if (*phantom_cmd) return cmd_phantom(spec_path, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
