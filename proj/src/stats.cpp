#include "lesionmetrics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "lesionmetrics/error.hpp"

namespace lesionmetrics::stats {

std::string_view to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::two_sided: return "two-sided";
    case Alternative::greater: return "greater";
    case Alternative::less: return "less";
  }
  return "unknown";
}

std::string_view to_string(PValueMethod method) {
  switch (method) {
    case PValueMethod::exact: return "exact";
    case PValueMethod::normal_approximation: return "normal-approximation";
    case PValueMethod::chi_squared_approximation: return "chi-squared-approximation";
  }
  return "unknown";
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw Error("normal quantile needs p in [0, 1]");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double chi_squared_upper_tail(double x, double df) {
  if (!(df > 0)) throw Error("chi-squared needs positive degrees of freedom");
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double student_t_quantile(double p, double df) {
  if (!(df > 0)) throw Error("t distribution needs positive degrees of freedom");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw Error("standard deviation needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s + 1;
    while (e < order.size() && values[order[e]] == values[order[s]]) ++e;
    const double rank = 0.5 * static_cast<double>(s + 1 + e);  // mean of s+1 .. e
    for (std::size_t t = s; t < e; ++t) ranks[order[t]] = rank;
    s = e;
  }
  return ranks;
}

namespace {

// Sizes of the groups of equal values (only groups larger than one).
std::vector<std::size_t> tie_groups(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::size_t> groups;
  for (std::size_t s = 0; s < values.size();) {
    std::size_t e = s + 1;
    while (e < values.size() && values[e] == values[s]) ++e;
    if (e - s > 1) groups.push_back(e - s);
    s = e;
  }
  return groups;
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error(std::string(what) + " contains a non-finite value");
}

}  // namespace

namespace {

TestResult wilcoxon_impl(std::span<const double> a, std::span<const double> b, Alternative alternative,
                         bool allow_exact) {
  if (a.size() != b.size())
    throw Error("Wilcoxon needs paired samples of equal length (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  if (a.empty()) throw Error("Wilcoxon needs at least one pair");
  check_finite(a, "Wilcoxon sample a");
  check_finite(b, "Wilcoxon sample b");

  std::vector<double> diffs;
  for (std::size_t n = 0; n < a.size(); ++n)
    if (a[n] - b[n] != 0.0) diffs.push_back(a[n] - b[n]);

  TestResult result;
  result.n_effective = diffs.size();
  if (diffs.empty()) {
    result.statistic = 0.0;
    result.p_value = 1.0;
    result.effect_size_r = 0.0;
    result.method = PValueMethod::exact;
    return result;
  }

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
  const std::vector<double> ranks = average_ranks(magnitudes);
  double v = 0.0;
  for (std::size_t n = 0; n < diffs.size(); ++n)
    if (diffs[n] > 0) v += ranks[n];
  result.statistic = v;

  const auto n = static_cast<double>(diffs.size());
  const std::vector<std::size_t> ties = tie_groups(magnitudes);

  if (allow_exact && ties.empty() && diffs.size() <= kWilcoxonExactMaxN) {
    // Null distribution of V: each rank 1..n enters with probability 1/2.
    const std::size_t max_sum = diffs.size() * (diffs.size() + 1) / 2;
    std::vector<std::uint64_t> counts(max_sum + 1, 0);
    counts[0] = 1;
    for (std::size_t r = 1; r <= diffs.size(); ++r)
      for (std::size_t s = max_sum; s >= r; --s) counts[s] += counts[s - r];
    const auto observed = static_cast<std::size_t>(std::llround(v));
    std::uint64_t upper = 0, lower = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s >= observed) upper += counts[s];
      if (s <= observed) lower += counts[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(diffs.size()));
    const double p_upper = static_cast<double>(upper) / total;
    const double p_lower = static_cast<double>(lower) / total;
    const double p_two = std::min(1.0, 2.0 * std::min(p_upper, p_lower));
    switch (alternative) {
      case Alternative::greater: result.p_value = p_upper; break;
      case Alternative::less: result.p_value = p_lower; break;
      case Alternative::two_sided: result.p_value = p_two; break;
    }
    const double z = std::abs(normal_quantile(p_two / 2.0));
    result.effect_size_r = std::min(1.0, z / std::sqrt(n));
    result.method = PValueMethod::exact;
    return result;
  }

  double tie_term = 0.0;
  for (std::size_t t : ties) {
    const auto tt = static_cast<double>(t);
    tie_term += tt * tt * tt - tt;
  }
  const double sigma = std::sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0);
  const double centred = v - n * (n + 1) / 4.0;
  auto corrected = [&](double correction) { return (centred - correction) / sigma; };
  const double z_two = corrected(centred > 0 ? 0.5 : (centred < 0 ? -0.5 : 0.0));
  switch (alternative) {
    case Alternative::two_sided:
      result.p_value = std::min(1.0, 2.0 * std::min(normal_cdf(z_two), normal_upper_tail(z_two)));
      break;
    case Alternative::greater: result.p_value = normal_upper_tail(corrected(0.5)); break;
    case Alternative::less: result.p_value = normal_cdf(corrected(-0.5)); break;
  }
  result.effect_size_r = std::min(1.0, std::abs(z_two) / std::sqrt(n));
  result.method = PValueMethod::normal_approximation;
  return result;
}

}  // namespace

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, Alternative alternative) {
  return wilcoxon_impl(a, b, alternative, true);
}

TestResult wilcoxon_normal_approximation(std::span<const double> a, std::span<const double> b,
                                         Alternative alternative) {
  return wilcoxon_impl(a, b, alternative, false);
}

TestResult friedman(const std::vector<std::vector<double>>& blocks) {
  if (blocks.size() < 2) throw Error("Friedman test needs at least two blocks");
  const std::size_t k = blocks.front().size();
  if (k < 2) throw Error("Friedman test needs at least two treatments");
  for (const auto& block : blocks) {
    if (block.size() != k) throw Error("Friedman test needs a complete (non-ragged) block matrix");
    check_finite(block, "Friedman block");
  }

  const auto n = static_cast<double>(blocks.size());
  const auto kd = static_cast<double>(k);
  std::vector<double> rank_sums(k, 0.0);
  double tie_term = 0.0;
  for (const auto& block : blocks) {
    const auto ranks = average_ranks(block);
    for (std::size_t j = 0; j < k; ++j) rank_sums[j] += ranks[j];
    for (std::size_t t : tie_groups(block)) {
      const auto tt = static_cast<double>(t);
      tie_term += tt * tt * tt - tt;
    }
  }
  double spread = 0.0;
  for (double r : rank_sums) spread += (r - n * (kd + 1) / 2.0) * (r - n * (kd + 1) / 2.0);
  const double denominator = n * kd * (kd + 1) - tie_term / (kd - 1);

  TestResult result;
  result.n_effective = blocks.size();
  result.method = PValueMethod::chi_squared_approximation;
  if (denominator <= 0.0) {  // every block fully tied
    result.statistic = 0.0;
    result.p_value = 1.0;
    return result;
  }
  result.statistic = 12.0 * spread / denominator;
  result.p_value = chi_squared_upper_tail(result.statistic, kd - 1);
  return result;
}

double RegressionFit::ci95_half_width(double x) const {
  if (n <= 2) return std::numeric_limits<double>::quiet_NaN();
  return t_critical * residual_se * std::sqrt(1.0 / static_cast<double>(n) + (x - x_mean) * (x - x_mean) / sxx);
}

RegressionFit linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("regression needs x and y of equal length");
  if (x.size() < 2) throw Error("regression needs at least two points");
  check_finite(x, "regression x");
  check_finite(y, "regression y");

  RegressionFit fit;
  fit.n = x.size();
  fit.x_mean = mean(x);
  const double y_mean = mean(y);
  double sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.sxx += (x[i] - fit.x_mean) * (x[i] - fit.x_mean);
    sxy += (x[i] - fit.x_mean) * (y[i] - y_mean);
    syy += (y[i] - y_mean) * (y[i] - y_mean);
  }
  if (fit.sxx == 0.0) throw Error("regression is undefined when all x are equal");
  fit.slope = sxy / fit.sxx;
  fit.intercept = y_mean - fit.slope * fit.x_mean;

  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.predict(x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 0.0;

  if (fit.n > 2) {
    const auto dof = static_cast<double>(fit.n - 2);
    fit.residual_se = std::sqrt(ss_res / dof);
    fit.slope_se = fit.residual_se / std::sqrt(fit.sxx);
    fit.intercept_se =
        fit.residual_se * std::sqrt(1.0 / static_cast<double>(fit.n) + fit.x_mean * fit.x_mean / fit.sxx);
    fit.t_critical = student_t_quantile(0.975, dof);
  }
  return fit;
}

AgreementSummary bland_altman(std::span<const double> manual, std::span<const double> automated) {
  if (manual.size() != automated.size()) throw Error("Bland-Altman needs paired samples of equal length");
  if (manual.size() < 2) throw Error("Bland-Altman needs at least two pairs");
  check_finite(manual, "Bland-Altman manual");
  check_finite(automated, "Bland-Altman automated");

  AgreementSummary s;
  std::vector<double> diffs(manual.size());
  for (std::size_t i = 0; i < manual.size(); ++i) {
    diffs[i] = automated[i] - manual[i];
    s.pairs.emplace_back(0.5 * (manual[i] + automated[i]), diffs[i]);
  }
  s.bias = mean(diffs);
  s.sd_diff = sample_sd(diffs);
  s.loa_lower = s.bias - kLimitsOfAgreementZ * s.sd_diff;
  s.loa_upper = s.bias + kLimitsOfAgreementZ * s.sd_diff;
  return s;
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw Error("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile probability must lie in [0, 1]");
  check_finite(values, "quantile sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

QuantileSummary median_iqr(std::span<const double> values) {
  return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75)};
}

}  // namespace lesionmetrics::stats
