#include "lesionmetrics/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "lesionmetrics/error.hpp"

namespace lesionmetrics {

using nlohmann::json;
using nlohmann::ordered_json;

double quantize(double value) {
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  const double q = std::strtod(buf, nullptr);
  return q == 0.0 ? 0.0 : q;
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  std::string s(buf);
  return s == "-0" ? "0" : s;
}

namespace {

Morphometry quantized(Morphometry m) {
  m.volume_cc = quantize(m.volume_cc);
  m.long_axis_mm = quantize(m.long_axis_mm);
  m.short_axis_mm = quantize(m.short_axis_mm);
  m.mean_diameter_mm = quantize(m.mean_diameter_mm);
  return m;
}

DetectionCounts quantized_counts(long tp, long fp, long fn) {
  DetectionCounts c = score_counts(tp, fp, fn);
  c.precision = quantize(c.precision);
  c.sensitivity = quantize(c.sensitivity);
  c.f1 = quantize(c.f1);
  return c;
}

struct ProcessedMask {
  std::vector<LesionInstance> kept;
  MorphometryTable morphometry;
};

ProcessedMask process_mask(const LabelVolume& volume, MaskSource source, const AnalyzeOptions& options,
                           const std::map<std::string, LabelVolume>& regions, MaskSummary& summary) {
  const GridGeometry& geometry = volume.geometry();
  auto instances = extract_instances(volume, options.connectivity, source);
  const std::size_t extracted = instances.size();
  instances = remove_satellite_clusters(std::move(instances), options.min_cluster_voxels);
  summary.satellites_removed = extracted - instances.size();

  MorphometryTable table = measure_lesions(instances, geometry);
  MicroNoduleSplit split = filter_micro_nodules(std::move(instances), table, options.min_diameter_mm);
  summary.micro_excluded = split.excluded.size();
  for (const auto& inst : split.excluded) table.erase(inst.id);

  summary.burden = study_burden(split.kept, geometry);
  summary.burden.burden_cc = quantize(summary.burden.burden_cc);
  summary.burden.per_region_cc = region_burden(split.kept, regions, geometry);
  for (auto& [name, cc] : summary.burden.per_region_cc) cc = quantize(cc);
  return {std::move(split.kept), std::move(table)};
}

ordered_json number_or_null(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json counts_json(const DetectionCounts& c) {
  return {{"tp", c.tp},           {"fp", c.fp},
          {"fn", c.fn},           {"precision", c.precision},
          {"sensitivity", c.sensitivity}, {"f1", c.f1}};
}

ordered_json quantiles_json(const std::optional<stats::QuantileSummary>& q) {
  if (!q) return nullptr;
  return {{"median", q->median}, {"q1", q->q1}, {"q3", q->q3}};
}

ordered_json test_json(const std::optional<stats::TestResult>& t) {
  if (!t) return nullptr;
  ordered_json j;
  j["statistic"] = t->statistic;
  j["p_value"] = t->p_value;
  j["n_effective"] = t->n_effective;
  j["effect_size_r"] = number_or_null(t->effect_size_r);
  j["method"] = std::string(stats::to_string(t->method));
  return j;
}

ordered_json mask_json(const MaskSummary& m) {
  ordered_json j;
  j["burden_cc"] = m.burden.burden_cc;
  j["lesion_count"] = m.burden.lesion_count;
  j["satellites_removed"] = m.satellites_removed;
  j["micro_excluded"] = m.micro_excluded;
  j["per_region_cc"] = ordered_json::object();
  for (const auto& [name, cc] : m.burden.per_region_cc) j["per_region_cc"][name] = cc;
  return j;
}

void morph_into(ordered_json& j, const Morphometry& m) {
  j["stratum"] = std::string(to_string(m.stratum));
  j["volume_cc"] = m.volume_cc;
  j["long_axis_mm"] = m.long_axis_mm;
  j["short_axis_mm"] = m.short_axis_mm;
  j["mean_diameter_mm"] = m.mean_diameter_mm;
}

ordered_json study_json(const StudyMetrics& s) {
  ordered_json j;
  j["patient_id"] = s.patient_id;
  j["study_order"] = s.study_order;
  j["gt_path"] = s.gt_path;
  j["pred_path"] = s.pred_path;
  j["gt"] = mask_json(s.gt);
  j["pred"] = mask_json(s.pred);
  j["signed_diff_cc"] = s.signed_diff_cc;
  j["detection"]["all"] = counts_json(s.detection.overall);
  for (Stratum st : {Stratum::micro, Stratum::small, Stratum::significant})
    j["detection"][std::string(to_string(st))] = counts_json(s.detection.stratum(st));
  j["lesions"] = ordered_json::array();
  for (const auto& l : s.lesions) {
    ordered_json lj;
    lj["gt_id"] = l.gt_id;
    lj["pred_id"] = l.pred_id ? ordered_json(*l.pred_id) : ordered_json(nullptr);
    morph_into(lj, l.gt);
    lj["dice"] = l.scores ? ordered_json(l.scores->dice) : ordered_json(nullptr);
    lj["hausdorff_mm"] = l.scores ? ordered_json(l.scores->hausdorff_mm) : ordered_json(nullptr);
    j["lesions"].push_back(std::move(lj));
  }
  j["false_positives"] = ordered_json::array();
  for (const auto& fp : s.false_positives) {
    ordered_json fj;
    fj["pred_id"] = fp.pred_id;
    morph_into(fj, fp.pred);
    j["false_positives"].push_back(std::move(fj));
  }
  return j;
}

// Inverse of study_json, used to recompute aggregates from a report document.
StudyMetrics study_from_json(const json& j) {
  StudyMetrics s;
  s.patient_id = j.at("patient_id").get<std::string>();
  s.study_order = j.at("study_order").get<int>();
  s.gt_path = j.at("gt_path").get<std::string>();
  s.pred_path = j.at("pred_path").get<std::string>();
  auto mask = [&](const json& mj, MaskSummary& m) {
    m.burden.patient_id = s.patient_id;
    m.burden.study_order = s.study_order;
    m.burden.burden_cc = mj.at("burden_cc").get<double>();
    m.burden.lesion_count = mj.at("lesion_count").get<std::size_t>();
    m.satellites_removed = mj.at("satellites_removed").get<std::size_t>();
    m.micro_excluded = mj.at("micro_excluded").get<std::size_t>();
    for (const auto& [name, cc] : mj.at("per_region_cc").items()) m.burden.per_region_cc[name] = cc.get<double>();
  };
  mask(j.at("gt"), s.gt);
  mask(j.at("pred"), s.pred);
  s.signed_diff_cc = j.at("signed_diff_cc").get<double>();
  auto counts = [](const json& c) {
    return DetectionCounts{c.at("tp").get<long>(),          c.at("fp").get<long>(),
                           c.at("fn").get<long>(),          c.at("precision").get<double>(),
                           c.at("sensitivity").get<double>(), c.at("f1").get<double>()};
  };
  s.detection.overall = counts(j.at("detection").at("all"));
  for (Stratum st : {Stratum::micro, Stratum::small, Stratum::significant})
    s.detection.by_stratum[static_cast<int>(st)] = counts(j.at("detection").at(std::string(to_string(st))));
  auto morph = [](const json& mj) {
    Morphometry m;
    m.stratum = stratum_from_string(mj.at("stratum").get<std::string>());
    m.volume_cc = mj.at("volume_cc").get<double>();
    m.long_axis_mm = mj.at("long_axis_mm").get<double>();
    m.short_axis_mm = mj.at("short_axis_mm").get<double>();
    m.mean_diameter_mm = mj.at("mean_diameter_mm").get<double>();
    return m;
  };
  for (const auto& lj : j.at("lesions")) {
    LesionRecord l;
    l.gt_id = lj.at("gt_id").get<int>();
    if (!lj.at("pred_id").is_null()) l.pred_id = lj.at("pred_id").get<int>();
    l.gt = morph(lj);
    if (!lj.at("dice").is_null())
      l.scores = OverlapScores{lj.at("dice").get<double>(), lj.at("hausdorff_mm").get<double>()};
    s.lesions.push_back(std::move(l));
  }
  for (const auto& fj : j.at("false_positives")) s.false_positives.push_back({fj.at("pred_id").get<int>(), morph(fj)});
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

bool numbers_agree(double a, double b) {
  return std::abs(a - b) <= 1e-5 * std::max(std::abs(a), std::abs(b)) + 1e-12;
}

void compare_trees(const json& expected, const json& actual, const std::string& path, std::vector<std::string>& problems) {
  if (expected.is_number() && actual.is_number()) {
    if (!numbers_agree(expected.get<double>(), actual.get<double>()))
      problems.push_back(path + ": report has " + actual.dump() + ", recomputed " + expected.dump());
    return;
  }
  if (expected.type() != actual.type()) {
    problems.push_back(path + ": report has " + actual.dump() + ", recomputed " + expected.dump());
    return;
  }
  if (expected.is_object()) {
    for (const auto& [key, value] : expected.items()) {
      if (!actual.contains(key)) {
        problems.push_back(path + "." + key + ": missing from report");
        continue;
      }
      compare_trees(value, actual.at(key), path + "." + key, problems);
    }
  } else if (expected.is_array()) {
    if (expected.size() != actual.size()) {
      problems.push_back(path + ": length " + std::to_string(actual.size()) + ", recomputed " +
                         std::to_string(expected.size()));
      return;
    }
    for (std::size_t n = 0; n < expected.size(); ++n)
      compare_trees(expected[n], actual[n], path + "[" + std::to_string(n) + "]", problems);
  } else if (expected != actual) {
    problems.push_back(path + ": report has " + actual.dump() + ", recomputed " + expected.dump());
  }
}

}  // namespace

StudyMetrics analyze_study(const ManifestRow& row, const AnalyzeOptions& options) {
  LabelVolume gt = load_label_volume(row.gt_path);
  LabelVolume pred = load_label_volume(row.pred_path);
  try {
    assert_same_grid(gt, pred);
  } catch (const Error& e) {
    throw Error(std::string("ground truth vs prediction: ") + e.what());
  }
  std::map<std::string, LabelVolume> regions;
  for (const auto& [name, path] : row.region_paths) {
    LabelVolume region = load_label_volume(path);
    try {
      assert_same_grid(gt, region);
    } catch (const Error& e) {
      throw Error("region '" + name + "': " + e.what());
    }
    regions.emplace(name, std::move(region));
  }
  if (options.repair_gap > 0) {
    gt = repair_split_lesions(gt, options.repair_gap);
    pred = repair_split_lesions(pred, options.repair_gap);
  }

  StudyMetrics s;
  s.patient_id = row.patient_id;
  s.study_order = row.study_order;
  s.gt_path = row.gt_path.string();
  s.pred_path = row.pred_path.string();
  const GridGeometry& geometry = gt.geometry();
  ProcessedMask g = process_mask(gt, MaskSource::ground_truth, options, regions, s.gt);
  ProcessedMask p = process_mask(pred, MaskSource::predicted, options, regions, s.pred);
  for (MaskSummary* m : {&s.gt, &s.pred}) {
    m->burden.patient_id = s.patient_id;
    m->burden.study_order = s.study_order;
  }

  const MatchResult match = match_lesions(g.kept, p.kept, options.min_match_dice);
  const DetectionScores raw = detection_scores(match, g.morphometry, p.morphometry);
  s.detection.overall = quantized_counts(raw.overall.tp, raw.overall.fp, raw.overall.fn);
  for (int st = 0; st < 3; ++st)
    s.detection.by_stratum[st] = quantized_counts(raw.by_stratum[st].tp, raw.by_stratum[st].fp, raw.by_stratum[st].fn);

  std::map<int, PairScores> scored;
  for (const PairScores& ps : per_pair_scores(match, g.kept, p.kept, geometry)) scored.emplace(ps.gt_id, ps);
  for (const auto& inst : g.kept) {
    LesionRecord rec;
    rec.gt_id = inst.id;
    rec.gt = quantized(g.morphometry.at(inst.id));
    if (const auto it = scored.find(inst.id); it != scored.end()) {
      rec.pred_id = it->second.pred_id;
      rec.scores = OverlapScores{quantize(it->second.scores.dice), quantize(it->second.scores.hausdorff_mm)};
    }
    s.lesions.push_back(rec);
  }
  for (int id : match.unmatched_pred) s.false_positives.push_back({id, quantized(p.morphometry.at(id))});
  s.signed_diff_cc = quantize(s.pred.burden.burden_cc - s.gt.burden.burden_cc);
  return s;
}

CohortReport run_analyze(const CohortManifest& manifest, const AnalyzeOptions& options) {
  if (manifest.rows.empty()) throw Error("no studies");
  const std::size_t n = manifest.rows.size();
  std::vector<std::optional<StudyMetrics>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = analyze_study(manifest.rows[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = manifest.rows[a];
    const auto& rb = manifest.rows[b];
    return std::tie(ra.patient_id, ra.study_order) < std::tie(rb.patient_id, rb.study_order);
  });

  CohortReport report;
  report.options = options;
  for (std::size_t i : order) {
    if (errors[i]) {
      if (!options.keep_going) std::rethrow_exception(errors[i]);
      std::string message;
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        message = e.what();
      }
      report.failures.push_back({manifest.rows[i].patient_id, manifest.rows[i].study_order, message});
      continue;
    }
    report.studies.push_back(std::move(*results[i]));
  }
  compute_aggregates(report);
  return report;
}

std::vector<std::vector<double>> visit_block_design(
    const std::vector<std::pair<std::string, std::vector<std::optional<double>>>>& per_patient) {
  std::size_t k = 0;
  for (const auto& [id, values] : per_patient)
    if (values.size() >= 2) k = (k == 0) ? values.size() : std::min(k, values.size());
  std::vector<std::vector<double>> blocks;
  if (k < 2) return blocks;
  for (const auto& [id, values] : per_patient) {
    if (values.size() < k) continue;
    std::vector<double> row;
    for (std::size_t v = 0; v < k; ++v) {
      if (!values[v]) break;
      row.push_back(*values[v]);
    }
    if (row.size() == k) blocks.push_back(std::move(row));
  }
  return blocks;
}

void compute_aggregates(CohortReport& report) {
  CohortAggregates& agg = report.aggregates;
  agg = {};
  report.trajectories.clear();

  // Trajectories: studies are sorted by (patient_id, study_order).
  for (std::size_t s = 0; s < report.studies.size();) {
    std::size_t e = s;
    std::vector<std::pair<StudyBurden, StudyBurden>> visits;
    while (e < report.studies.size() && report.studies[e].patient_id == report.studies[s].patient_id) {
      visits.emplace_back(report.studies[e].gt.burden, report.studies[e].pred.burden);
      ++e;
    }
    PatientTrajectory t = build_trajectory(std::move(visits));
    for (auto& v : t.visits) v.signed_diff_cc = quantize(v.signed_diff_cc);
    for (auto& d : t.gt_deltas_cc) d = quantize(d);
    for (auto& d : t.pred_deltas_cc) d = quantize(d);
    report.trajectories.push_back(std::move(t));
    s = e;
  }

  std::array<long, 3> tp{}, fp{}, fn{};
  std::array<std::vector<double>, 3> dice, hd;
  std::vector<double> gt_cc, pred_cc, diffs;
  for (const auto& study : report.studies) {
    tp[0] += study.detection.overall.tp;
    fp[0] += study.detection.overall.fp;
    fn[0] += study.detection.overall.fn;
    for (Stratum st : {Stratum::small, Stratum::significant}) {
      const int row = static_cast<int>(st);  // small -> 1, significant -> 2
      tp[row] += study.detection.stratum(st).tp;
      fp[row] += study.detection.stratum(st).fp;
      fn[row] += study.detection.stratum(st).fn;
    }
    for (const auto& l : study.lesions) {
      if (!l.scores) continue;
      dice[0].push_back(l.scores->dice);
      hd[0].push_back(l.scores->hausdorff_mm);
      if (l.gt.stratum != Stratum::micro) {
        dice[static_cast<int>(l.gt.stratum)].push_back(l.scores->dice);
        hd[static_cast<int>(l.gt.stratum)].push_back(l.scores->hausdorff_mm);
      }
    }
    gt_cc.push_back(study.gt.burden.burden_cc);
    pred_cc.push_back(study.pred.burden.burden_cc);
    diffs.push_back(study.signed_diff_cc);
  }
  for (int row = 0; row < 3; ++row) {
    agg.detection[row] = quantized_counts(tp[row], fp[row], fn[row]);
    SegmentationSummary& seg = agg.segmentation[row];
    seg.n = dice[row].size();
    if (seg.n >= 1) {
      seg.dice_mean = quantize(stats::mean(dice[row]));
      seg.hd_mean = quantize(stats::mean(hd[row]));
    }
    if (seg.n >= 2) {
      seg.dice_sd = quantize(stats::sample_sd(dice[row]));
      seg.hd_sd = quantize(stats::sample_sd(hd[row]));
    }
  }

  auto quantize_summary = [](stats::QuantileSummary q) {
    return stats::QuantileSummary{quantize(q.median), quantize(q.q1), quantize(q.q3)};
  };
  if (!report.studies.empty()) {
    agg.gt_burden = quantize_summary(stats::median_iqr(gt_cc));
    agg.pred_burden = quantize_summary(stats::median_iqr(pred_cc));
    agg.signed_diff = quantize_summary(stats::median_iqr(diffs));
    stats::TestResult w = stats::wilcoxon_signed_rank(pred_cc, gt_cc, stats::Alternative::two_sided);
    w.statistic = quantize(w.statistic);
    w.p_value = quantize(w.p_value);
    if (w.effect_size_r) w.effect_size_r = quantize(*w.effect_size_r);
    agg.burden_wilcoxon = w;
  }
  try {
    stats::RegressionFit fit = stats::linear_regression(gt_cc, pred_cc);
    for (double* v : {&fit.slope, &fit.intercept, &fit.r_squared, &fit.x_mean, &fit.sxx, &fit.residual_se,
                      &fit.slope_se, &fit.intercept_se, &fit.t_critical})
      *v = quantize(*v);
    agg.regression = fit;
  } catch (const Error&) {
    agg.regression.reset();
  }
  if (report.studies.size() >= 2) {
    stats::AgreementSummary ba = stats::bland_altman(gt_cc, pred_cc);
    for (double* v : {&ba.bias, &ba.sd_diff, &ba.loa_lower, &ba.loa_upper}) *v = quantize(*v);
    for (auto& [m, d] : ba.pairs) {
      m = quantize(m);
      d = quantize(d);
    }
    agg.bland_altman = ba;
  }

  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> per_patient;
  for (const auto& study : report.studies) {
    if (per_patient.empty() || per_patient.back().first != study.patient_id)
      per_patient.emplace_back(study.patient_id, std::vector<std::optional<double>>{});
    std::vector<double> values;
    for (const auto& l : study.lesions)
      if (l.scores) values.push_back(l.scores->dice);
    per_patient.back().second.push_back(values.empty() ? std::nullopt
                                                       : std::optional<double>(quantize(stats::mean(values))));
  }
  const auto blocks = visit_block_design(per_patient);
  if (blocks.size() >= 2) {
    stats::TestResult f = stats::friedman(blocks);
    f.statistic = quantize(f.statistic);
    f.p_value = quantize(f.p_value);
    agg.dice_friedman_by_visit = f;
  }
}

ordered_json to_json(const CohortReport& report) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  const AnalyzeOptions& o = report.options;
  j["options"] = {{"connectivity", static_cast<int>(o.connectivity)},
                  {"min_diameter_mm", o.min_diameter_mm},
                  {"min_cluster_voxels", o.min_cluster_voxels},
                  {"repair_gap", o.repair_gap},
                  {"min_match_dice", o.min_match_dice}};
  j["studies"] = ordered_json::array();
  for (const auto& s : report.studies) j["studies"].push_back(study_json(s));
  j["failures"] = ordered_json::array();
  for (const auto& f : report.failures)
    j["failures"].push_back({{"patient_id", f.patient_id}, {"study_order", f.study_order}, {"error", f.message}});

  j["trajectories"] = ordered_json::array();
  for (const auto& t : report.trajectories) {
    ordered_json tj;
    tj["patient_id"] = t.patient_id;
    tj["visits"] = ordered_json::array();
    for (const auto& v : t.visits)
      tj["visits"].push_back({{"study_order", v.study_order},
                              {"gt_cc", v.gt_burden_cc},
                              {"pred_cc", v.pred_burden_cc},
                              {"signed_diff_cc", v.signed_diff_cc}});
    tj["gt_deltas_cc"] = t.gt_deltas_cc;
    tj["pred_deltas_cc"] = t.pred_deltas_cc;
    j["trajectories"].push_back(std::move(tj));
  }

  const CohortAggregates& a = report.aggregates;
  ordered_json& aj = j["aggregates"];
  for (std::size_t row = 0; row < kCohortStrata.size(); ++row) aj["detection"][kCohortStrata[row]] = counts_json(a.detection[row]);
  for (std::size_t row = 0; row < kCohortStrata.size(); ++row) {
    const SegmentationSummary& seg = a.segmentation[row];
    aj["segmentation"][kCohortStrata[row]] = {{"n", seg.n},
                                              {"dice_mean", number_or_null(seg.dice_mean)},
                                              {"dice_sd", number_or_null(seg.dice_sd)},
                                              {"hd_mean", number_or_null(seg.hd_mean)},
                                              {"hd_sd", number_or_null(seg.hd_sd)}};
  }
  aj["burden"] = {{"gt", quantiles_json(a.gt_burden)},
                  {"pred", quantiles_json(a.pred_burden)},
                  {"signed_diff", quantiles_json(a.signed_diff)}};
  if (a.regression) {
    const auto& r = *a.regression;
    const bool band = r.n > 2;
    aj["regression"] = {{"n", r.n},
                        {"slope", r.slope},
                        {"intercept", r.intercept},
                        {"r_squared", r.r_squared},
                        {"x_mean", r.x_mean},
                        {"sxx", r.sxx},
                        {"residual_se", band ? ordered_json(r.residual_se) : ordered_json(nullptr)},
                        {"slope_se", band ? ordered_json(r.slope_se) : ordered_json(nullptr)},
                        {"intercept_se", band ? ordered_json(r.intercept_se) : ordered_json(nullptr)},
                        {"t_critical", band ? ordered_json(r.t_critical) : ordered_json(nullptr)}};
  } else {
    aj["regression"] = nullptr;
  }
  if (a.bland_altman) {
    const auto& b = *a.bland_altman;
    ordered_json pairs = ordered_json::array();
    for (const auto& [m, d] : b.pairs) pairs.push_back({{"mean", m}, {"diff", d}});
    aj["bland_altman"] = {{"bias", b.bias},
                          {"sd_diff", b.sd_diff},
                          {"loa_lower", b.loa_lower},
                          {"loa_upper", b.loa_upper},
                          {"pairs", std::move(pairs)}};
  } else {
    aj["bland_altman"] = nullptr;
  }
  aj["tests"] = {{"burden_wilcoxon", test_json(a.burden_wilcoxon)},
                 {"dice_friedman_by_visit", test_json(a.dice_friedman_by_visit)}};
  return j;
}

std::string dump_report(const ordered_json& report) { return report.dump(2) + "\n"; }

void write_report(const CohortReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  const ordered_json j = to_json(report);
  write_text(out_dir / "report.json", dump_report(j));
  emit_plot_data(json::parse(j.dump()), out_dir);
}

void emit_plot_data(const json& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  try {
    std::string dice = "patient_id,study_order,gt_id,pred_id,stratum,dice\n";
    std::string hd = "patient_id,study_order,gt_id,pred_id,stratum,hausdorff_mm\n";
    std::string regression = "patient_id,study_order,gt_cc,pred_cc\n";
    std::string bland = "patient_id,study_order,mean_cc,diff_cc\n";
    std::string traj = "patient_id,study_order,gt_cc,pred_cc,signed_diff_cc\n";

    const auto& studies = report.at("studies");
    for (const auto& s : studies) {
      const std::string key = csv_field(s.at("patient_id").get<std::string>()) + "," +
                              std::to_string(s.at("study_order").get<int>());
      for (const auto& l : s.at("lesions")) {
        if (l.at("dice").is_null()) continue;
        const std::string prefix = key + "," + std::to_string(l.at("gt_id").get<int>()) + "," +
                                   std::to_string(l.at("pred_id").get<int>()) + "," +
                                   l.at("stratum").get<std::string>() + ",";
        dice += prefix + format_number(l.at("dice").get<double>()) + "\n";
        hd += prefix + format_number(l.at("hausdorff_mm").get<double>()) + "\n";
      }
      regression += key + "," + format_number(s.at("gt").at("burden_cc").get<double>()) + "," +
                    format_number(s.at("pred").at("burden_cc").get<double>()) + "\n";
    }
    const auto& ba = report.at("aggregates").at("bland_altman");
    if (!ba.is_null()) {
      const auto& pairs = ba.at("pairs");
      if (pairs.size() != studies.size()) throw Error("Bland-Altman pairs do not match the study list");
      for (std::size_t n = 0; n < pairs.size(); ++n)
        bland += csv_field(studies[n].at("patient_id").get<std::string>()) + "," +
                 std::to_string(studies[n].at("study_order").get<int>()) + "," +
                 format_number(pairs[n].at("mean").get<double>()) + "," +
                 format_number(pairs[n].at("diff").get<double>()) + "\n";
    }
    for (const auto& t : report.at("trajectories")) {
      const std::string pid = csv_field(t.at("patient_id").get<std::string>());
      for (const auto& v : t.at("visits"))
        traj += pid + "," + std::to_string(v.at("study_order").get<int>()) + "," +
                format_number(v.at("gt_cc").get<double>()) + "," + format_number(v.at("pred_cc").get<double>()) + "," +
                format_number(v.at("signed_diff_cc").get<double>()) + "\n";
    }
    write_text(out_dir / "dice_by_stratum.csv", dice);
    write_text(out_dir / "hd_by_stratum.csv", hd);
    write_text(out_dir / "regression_pairs.csv", regression);
    write_text(out_dir / "bland_altman_pairs.csv", bland);
    write_text(out_dir / "trajectories.csv", traj);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

std::vector<std::string> check_report_consistency(const json& report) {
  std::vector<std::string> problems;
  CohortReport rebuilt;
  try {
    for (const auto& sj : report.at("studies")) rebuilt.studies.push_back(study_from_json(sj));
  } catch (const std::exception& e) {
    problems.push_back(std::string("cannot read per-study records: ") + e.what());
    return problems;
  }

  for (std::size_t n = 0; n < rebuilt.studies.size(); ++n) {
    const StudyMetrics& s = rebuilt.studies[n];
    const std::string where = "studies[" + std::to_string(n) + "]";
    std::array<long, 3> tp{}, fp{}, fn{};
    for (const auto& l : s.lesions) (l.pred_id ? tp : fn)[static_cast<int>(l.gt.stratum)]++;
    for (const auto& f : s.false_positives) fp[static_cast<int>(f.pred.stratum)]++;
    long all_tp = 0, all_fp = 0, all_fn = 0;
    for (int st = 0; st < 3; ++st) {
      const DetectionCounts expect = quantized_counts(tp[st], fp[st], fn[st]);
      compare_trees(counts_json(expect), counts_json(s.detection.by_stratum[st]),
                    where + ".detection." + std::string(to_string(static_cast<Stratum>(st))), problems);
      all_tp += tp[st];
      all_fp += fp[st];
      all_fn += fn[st];
    }
    compare_trees(counts_json(quantized_counts(all_tp, all_fp, all_fn)), counts_json(s.detection.overall),
                  where + ".detection.all", problems);
    if (s.gt.burden.lesion_count != s.lesions.size())
      problems.push_back(where + ".gt.lesion_count disagrees with the lesion list");
    if (s.pred.burden.lesion_count != static_cast<std::size_t>(all_tp + all_fp))
      problems.push_back(where + ".pred.lesion_count disagrees with matched + false-positive lesions");
    if (!numbers_agree(quantize(s.pred.burden.burden_cc - s.gt.burden.burden_cc), s.signed_diff_cc))
      problems.push_back(where + ".signed_diff_cc disagrees with the burdens");
  }

  try {
    compute_aggregates(rebuilt);
  } catch (const std::exception& e) {
    problems.push_back(std::string("cannot recompute aggregates: ") + e.what());
    return problems;
  }
  const ordered_json expected = to_json(rebuilt);
  compare_trees(json::parse(expected.at("trajectories").dump()), report.at("trajectories"), "trajectories", problems);
  compare_trees(json::parse(expected.at("aggregates").dump()), report.at("aggregates"), "aggregates", problems);
  return problems;
}

}  // namespace lesionmetrics
