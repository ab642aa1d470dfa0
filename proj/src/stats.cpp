#include "myoeval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "myoeval/error.hpp"

namespace myoeval {

double chi_square_sf(double x, double df) {
  if (!(df > 0.0)) throw ParameterError("chi-square needs positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("t distribution needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::vector<double> average_ranks(std::span<const double> values, double* tie_term) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

namespace {

struct Pooled {
  std::vector<double> ranks;
  std::vector<std::size_t> sizes;
  double tie_term = 0.0;
  std::size_t total = 0;
};

Pooled pool(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw ParameterError("at least two groups are required");
  Pooled p;
  std::vector<double> all;
  for (const auto& g : groups) {
    if (g.empty()) throw ParameterError("every group must be nonempty");
    for (double v : g) {
      if (!std::isfinite(v)) throw ParameterError("sample values must be finite");
    }
    all.insert(all.end(), g.begin(), g.end());
    p.sizes.push_back(g.size());
  }
  p.total = all.size();
  p.ranks = average_ranks(all, &p.tie_term);
  return p;
}

// log of N! / prod(n_i!)
double log_assignments(const std::vector<std::size_t>& sizes, std::size_t total) {
  double v = std::lgamma(static_cast<double>(total) + 1.0);
  for (auto n : sizes) v -= std::lgamma(static_cast<double>(n) + 1.0);
  return v;
}

// Counts assignments of the pooled ranks to groups of the given sizes whose
// sum(R_g^2 / n_g) reaches the observed value.
class ExactKruskal {
 public:
  ExactKruskal(const std::vector<double>& ranks, const std::vector<std::size_t>& sizes, double observed)
      : ranks_(ranks), sizes_(sizes), remaining_(sizes), sums_(sizes.size(), 0.0), observed_(observed) {}

  double p_value() {
    visit(0);
    return static_cast<double>(hits_) / static_cast<double>(total_);
  }

 private:
  void visit(std::size_t item) {
    if (item == ranks_.size()) {
      double s = 0.0;
      for (std::size_t g = 0; g < sizes_.size(); ++g) s += sums_[g] * sums_[g] / static_cast<double>(sizes_[g]);
      ++total_;
      if (s >= observed_ - 1e-9 * std::max(1.0, std::abs(observed_))) ++hits_;
      return;
    }
    for (std::size_t g = 0; g < sizes_.size(); ++g) {
      if (remaining_[g] == 0) continue;
      --remaining_[g];
      sums_[g] += ranks_[item];
      visit(item + 1);
      sums_[g] -= ranks_[item];
      ++remaining_[g];
    }
  }

  const std::vector<double>& ranks_;
  const std::vector<std::size_t>& sizes_;
  std::vector<std::size_t> remaining_;
  std::vector<double> sums_;
  double observed_;
  std::size_t hits_ = 0;
  std::size_t total_ = 0;
};

}  // namespace

KWResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  const Pooled p = pool(groups);
  const auto n = static_cast<double>(p.total);
  KWResult r;
  r.sizes = p.sizes;
  r.df = groups.size() - 1;
  double stat = 0.0;  // sum(R_g^2 / n_g)
  std::size_t offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.sizes[g]; ++i) sum += p.ranks[offset + i];
    offset += p.sizes[g];
    r.mean_ranks.push_back(sum / static_cast<double>(p.sizes[g]));
    stat += sum * sum / static_cast<double>(p.sizes[g]);
  }
  const double correction = p.total > 1 ? 1.0 - p.tie_term / (n * n * n - n) : 0.0;
  if (correction <= 0.0) {
    // Every value tied: no evidence of a group effect.
    r.h = 0.0;
    r.p_value = r.p_chi_square = 1.0;
    r.p_exact = 1.0;
    return r;
  }
  r.h = std::max(0.0, (12.0 / (n * (n + 1.0)) * stat - 3.0 * (n + 1.0)) / correction);
  r.p_chi_square = chi_square_sf(r.h, static_cast<double>(r.df));
  r.p_value = r.p_chi_square;
  if (log_assignments(p.sizes, p.total) <= std::log(kExactKruskalLimit)) {
    r.p_exact = ExactKruskal(p.ranks, p.sizes, stat).p_value();
    r.p_value = *r.p_exact;
  }
  return r;
}

double sidak_adjust(double p, std::size_t m) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("p-value must lie in [0, 1]");
  if (m == 0) throw ParameterError("number of comparisons must be positive");
  if (p == 1.0) return 1.0;
  const double adjusted = -std::expm1(static_cast<double>(m) * std::log1p(-p));
  return std::clamp(adjusted, p, 1.0);
}

const PairwiseComparison& PosthocResult::between(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  for (const auto& c : pairs) {
    if (c.a == a && c.b == b) return c;
  }
  throw ParameterError("no comparison between groups " + std::to_string(a) + " and " + std::to_string(b));
}

PosthocResult dunn_sidak(std::span<const std::vector<double>> groups, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  const Pooled p = pool(groups);
  const auto n = static_cast<double>(p.total);
  std::vector<double> mean_rank;
  std::size_t offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.sizes[g]; ++i) sum += p.ranks[offset + i];
    offset += p.sizes[g];
    mean_rank.push_back(sum / static_cast<double>(p.sizes[g]));
  }
  const double variance = n * (n + 1.0) / 12.0 - (p.total > 1 ? p.tie_term / (12.0 * (n - 1.0)) : 0.0);
  PosthocResult r;
  r.alpha = alpha;
  r.comparisons = groups.size() * (groups.size() - 1) / 2;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      PairwiseComparison c;
      c.a = a;
      c.b = b;
      const double se = std::sqrt(variance * (1.0 / static_cast<double>(p.sizes[a]) +
                                              1.0 / static_cast<double>(p.sizes[b])));
      c.z = se > 0.0 ? (mean_rank[a] - mean_rank[b]) / se : 0.0;
      c.p = normal_two_sided_p(c.z);
      c.adjusted_p = sidak_adjust(c.p, r.comparisons);
      c.significant = c.adjusted_p < alpha;
      r.pairs.push_back(c);
    }
  }
  return r;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("pearson needs samples of equal length");
  if (x.size() < 3) throw ParameterError("pearson needs at least 3 pairs");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericalError("correlation is undefined: a variable has zero variance");
  CorrelationResult c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  if (std::abs(c.r) == 1.0) {
    c.p_value = 0.0;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    c.p_value = student_t_two_sided_p(t, df);
  }
  return c;
}

}  // namespace myoeval
