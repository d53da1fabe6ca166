#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lesionmetrics {

struct ManifestRow {
  std::string patient_id;
  int study_order = 0;
  std::filesystem::path gt_path;
  std::filesystem::path pred_path;
  std::map<std::string, std::filesystem::path> region_paths;
};

struct CohortManifest {
  std::vector<ManifestRow> rows;
};

/// Parses a CSV (header: patient_id, study_order, gt_path, pred_path and
/// optional region:<name> columns) or a JSON manifest ({"studies": [...]}).
/// Relative paths resolve against the manifest's directory. Throws Error on
/// malformed input, an empty manifest ("no studies") or duplicate
/// (patient_id, study_order).
CohortManifest load_manifest(const std::filesystem::path& path);

CohortManifest parse_manifest_csv(const std::string& text, const std::filesystem::path& base_dir);
CohortManifest parse_manifest_json(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace lesionmetrics
