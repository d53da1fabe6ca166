#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace lesionmetrics::stats {

inline constexpr double kAlpha = 0.05;

enum class Alternative { two_sided, greater, less };
enum class PValueMethod { exact, normal_approximation, chi_squared_approximation };

std::string_view to_string(Alternative alternative);
std::string_view to_string(PValueMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_effective = 0;
  /// |z| / sqrt(n_effective), clamped to [0, 1]. Wilcoxon only.
  std::optional<double> effect_size_r;
  PValueMethod method = PValueMethod::exact;

  bool significant(double alpha = kAlpha) const { return p_value < alpha; }
};

/// Largest tie-free sample that takes the exact sign-enumeration path.
inline constexpr std::size_t kWilcoxonExactMaxN = 12;

/// Paired Wilcoxon signed-rank test on d = a - b. Zero differences are
/// dropped. The statistic is V, the sum of ranks of positive differences.
/// Without ties and with n <= 12 the p-value is exact; otherwise the normal
/// approximation with tie and continuity corrections is used.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                Alternative alternative = Alternative::two_sided);

/// Same test, always on the normal-approximation path.
TestResult wilcoxon_normal_approximation(std::span<const double> a, std::span<const double> b,
                                         Alternative alternative = Alternative::two_sided);

/// Friedman rank test. `blocks[i][j]` is treatment j in block i.
TestResult friedman(const std::vector<std::vector<double>>& blocks);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  double x_mean = 0.0;
  double sxx = 0.0;
  /// Residual standard error; NaN-free only when n > 2.
  double residual_se = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  /// Two-sided 97.5% t quantile with n - 2 degrees of freedom (0 if n == 2).
  double t_critical = 0.0;

  double predict(double x) const { return intercept + slope * x; }
  /// Half-width of the 95% confidence band of the mean prediction at x.
  double ci95_half_width(double x) const;
};

/// Ordinary least squares of y on x. R^2 is 0 when y is constant.
RegressionFit linear_regression(std::span<const double> x, std::span<const double> y);

struct AgreementSummary {
  double bias = 0.0;
  double sd_diff = 0.0;
  double loa_lower = 0.0;
  double loa_upper = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (mean, automated - manual)
};

inline constexpr double kLimitsOfAgreementZ = 1.96;

AgreementSummary bland_altman(std::span<const double> manual, std::span<const double> automated);

struct QuantileSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation between order statistics at p * (n - 1).
double quantile(std::span<const double> values, double p);
QuantileSummary median_iqr(std::span<const double> values);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

double normal_cdf(double z);
double normal_upper_tail(double z);
double normal_quantile(double p);
double chi_squared_upper_tail(double x, double df);
double student_t_quantile(double p, double df);

}  // namespace lesionmetrics::stats
