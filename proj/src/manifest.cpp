#include "lesionmetrics/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "lesionmetrics/error.hpp"

namespace lesionmetrics {
namespace {

constexpr std::string_view kRegionPrefix = "region:";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// RFC 4180-style field splitting: commas, double-quoted fields, "" escapes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t n = 0; n < line.size(); ++n) {
    const char c = line[n];
    if (quoted) {
      if (c == '"' && n + 1 < line.size() && line[n + 1] == '"') {
        field += '"';
        ++n;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw Error("manifest line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(trim(field));
  return fields;
}

int parse_order(const std::string& text, const std::string& where) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0)
    throw Error(where + ": study_order must be a non-negative integer (got '" + text + "')");
  return value;
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base_dir) {
  std::filesystem::path path(p);
  return path.is_relative() ? base_dir / path : path;
}

void finish(CohortManifest& m) {
  if (m.rows.empty()) throw Error("no studies");
  std::set<std::pair<std::string, int>> seen;
  for (const auto& row : m.rows) {
    if (row.patient_id.empty()) throw Error("manifest row with empty patient_id");
    if (!seen.insert({row.patient_id, row.study_order}).second)
      throw Error("duplicate manifest entry for patient '" + row.patient_id + "' study_order " +
                  std::to_string(row.study_order));
  }
}

}  // namespace

CohortManifest parse_manifest_csv(const std::string& text, const std::filesystem::path& base_dir) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_csv_line(line, line_no);
  }
  if (header.empty()) throw Error("no studies");

  int col_patient = -1, col_order = -1, col_gt = -1, col_pred = -1;
  std::vector<std::pair<int, std::string>> region_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    const int ci = static_cast<int>(c);
    if (h == "patient_id") col_patient = ci;
    else if (h == "study_order") col_order = ci;
    else if (h == "gt_path") col_gt = ci;
    else if (h == "pred_path") col_pred = ci;
    else if (h.starts_with(kRegionPrefix) && h.size() > kRegionPrefix.size())
      region_cols.emplace_back(ci, h.substr(kRegionPrefix.size()));
    else throw Error("manifest: unknown column '" + h + "'");
  }
  if (col_patient < 0 || col_order < 0 || col_gt < 0 || col_pred < 0)
    throw Error("manifest header must contain patient_id, study_order, gt_path and pred_path");

  CohortManifest m;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (fields.size() != header.size())
      throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    ManifestRow row;
    row.patient_id = fields[col_patient];
    row.study_order = parse_order(fields[col_order], where);
    if (fields[col_gt].empty() || fields[col_pred].empty()) throw Error(where + ": empty mask path");
    row.gt_path = resolve(fields[col_gt], base_dir);
    row.pred_path = resolve(fields[col_pred], base_dir);
    for (const auto& [c, name] : region_cols)
      if (!fields[c].empty()) row.region_paths[name] = resolve(fields[c], base_dir);
    m.rows.push_back(std::move(row));
  }
  finish(m);
  return m;
}

CohortManifest parse_manifest_json(const std::string& text, const std::filesystem::path& base_dir) {
  CohortManifest m;
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto& studies = doc.is_array() ? doc : doc.at("studies");
    for (const auto& s : studies) {
      ManifestRow row;
      const auto& pid = s.at("patient_id");
      row.patient_id = pid.is_string() ? pid.get<std::string>() : pid.dump();
      const auto& order = s.at("study_order");
      if (!order.is_number_integer() || order.get<long long>() < 0)
        throw Error("manifest: study_order must be a non-negative integer");
      row.study_order = order.get<int>();
      row.gt_path = resolve(s.at("gt_path").get<std::string>(), base_dir);
      row.pred_path = resolve(s.at("pred_path").get<std::string>(), base_dir);
      if (s.contains("regions"))
        for (const auto& [name, path] : s.at("regions").items())
          row.region_paths[name] = resolve(path.get<std::string>(), base_dir);
      m.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("manifest: ") + e.what());
  }
  finish(m);
  return m;
}

CohortManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto base = path.parent_path();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (path.extension() == ".json" || (first != std::string::npos && (text[first] == '{' || text[first] == '[')))
    return parse_manifest_json(text, base);
  return parse_manifest_csv(text, base);
}

}  // namespace lesionmetrics
