#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace myoeval {

inline constexpr double kDefaultAlpha = 0.05;

// Survival function of the chi-square distribution.
double chi_square_sf(double x, double df);
// Two-sided p-value of Student's t via the regularized incomplete beta.
double student_t_two_sided_p(double t, double df);
// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);

// Midranks (1-based) of the pooled values; also returns sum(t^3 - t) over
// tie groups through `tie_term` when non-null.
std::vector<double> average_ranks(std::span<const double> values, double* tie_term = nullptr);

struct KWResult {
  double h = 0.0;  // tie-corrected
  std::size_t df = 0;
  // Exact permutation p when the number of group assignments is at most
  // kExactKruskalLimit, otherwise the chi-square approximation.
  double p_value = 1.0;
  double p_chi_square = 1.0;
  std::optional<double> p_exact;
  std::vector<std::size_t> sizes;
  std::vector<double> mean_ranks;
};

inline constexpr double kExactKruskalLimit = 1e6;

// Throws ParameterError for fewer than two groups or an empty group.
KWResult kruskal_wallis(std::span<const std::vector<double>> groups);

struct PairwiseComparison {
  std::size_t a = 0, b = 0;  // a < b
  double z = 0.0;
  double p = 1.0;
  double adjusted_p = 1.0;
  bool significant = false;
};

struct PosthocResult {
  std::vector<PairwiseComparison> pairs;  // (0,1), (0,2), ..., (k-2,k-1)
  std::size_t comparisons = 0;
  double alpha = kDefaultAlpha;

  // Order-insensitive lookup.
  const PairwiseComparison& between(std::size_t a, std::size_t b) const;
};

// 1 - (1 - p)^m, never below p.
double sidak_adjust(double p, std::size_t m);

// Dunn's z-test on mean ranks with tie correction, Sidak-adjusted over all
// k(k-1)/2 pairs.
PosthocResult dunn_sidak(std::span<const std::vector<double>> groups, double alpha = kDefaultAlpha);

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// ParameterError on length mismatch or n < 3; NumericalError when either
// variable has zero variance.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

}  // namespace myoeval
