#include <doctest.h>

#include <cmath>
#include <random>

#include "myoeval/error.hpp"
#include "myoeval/stats.hpp"
#include "oracles.hpp"

using namespace myoeval;

namespace {

using Groups = std::vector<std::vector<double>>;

Groups random_groups(std::mt19937_64& rng, std::size_t k, std::size_t max_total) {
  Groups g(k);
  std::uniform_int_distribution<int> value(0, 6);  // coarse values give ties
  std::size_t total = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t room = max_total - total - (k - 1 - j);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(room, 5))(rng);
    for (std::size_t i = 0; i < n; ++i) g[j].push_back(value(rng) + 0.5 * static_cast<double>(j));
    total += n;
  }
  return g;
}

}  // namespace

TEST_CASE("distribution tails") {
  for (int df : {2, 4, 6, 10}) {
    for (double x : {0.1, 1.0, 3.0, 7.5, 20.0}) {
      CHECK(chi_square_sf(x, df) == doctest::Approx(oracle::chi_square_sf_even(x, df)).epsilon(1e-12));
    }
  }
  CHECK(chi_square_sf(0.0, 3) == 1.0);

  for (double df : {1.0, 2.0, 5.0, 28.0}) {
    for (double t : {0.0, 0.5, 2.0, -3.0, 10.0, 50.0}) {
      CHECK(std::fabs(student_t_two_sided_p(t, df) - oracle::student_t_two_sided_p(t, df)) < 1e-10);
    }
  }
  CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(normal_two_sided_p(0.0) == 1.0);
}

TEST_CASE("midranks and tie term") {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0, 0.5};
  double ties = 0.0;
  const auto r = average_ranks(v, &ties);
  CHECK(r == oracle::midranks(v));
  CHECK(ties == 24.0);  // one group of three
}

TEST_CASE("Kruskal-Wallis examples") {
  const Groups same{{1, 2, 3}, {1, 2, 3}};
  const auto a = kruskal_wallis(same);
  CHECK(a.h == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.p_value == doctest::Approx(1.0));
  CHECK(a.df == 1);

  // Complete separation of two groups of three. The chi-square tail is just
  // below 0.05, while only 2 of the 20 ways to split six ranks are as extreme.
  const Groups apart{{1, 2, 3}, {100, 101, 102}};
  const auto b = kruskal_wallis(apart);
  CHECK(b.p_chi_square < 0.05);
  REQUIRE(b.p_exact.has_value());
  CHECK(*b.p_exact == doctest::Approx(oracle::kruskal_permutation_p(apart)).epsilon(1e-12));
  CHECK(*b.p_exact == doctest::Approx(0.1));
  CHECK(b.p_value == *b.p_exact);

  // Distinct values, so no tie correction.
  const Groups three{{1.1, 4.2, 7.3}, {2.4, 5.5}, {3.6, 6.7, 8.8, 9.9}};
  const double n = 9;
  const double r1 = 1 + 4 + 7, r2 = 2 + 5, r3 = 3 + 6 + 8 + 9;
  const double h = 12.0 / (n * (n + 1)) * (r1 * r1 / 3 + r2 * r2 / 2 + r3 * r3 / 4) - 3 * (n + 1);
  const auto c = kruskal_wallis(three);
  CHECK(std::fabs(c.h - h) < 1e-9);
  CHECK(c.df == 2);
  CHECK(c.sizes == std::vector<std::size_t>{3, 2, 4});
  CHECK(c.mean_ranks[1] == doctest::Approx(3.5));
  CHECK(c.p_chi_square == doctest::Approx(chi_square_sf(h, 2)));

  CHECK_THROWS_AS(kruskal_wallis(Groups{{1, 2}}), ParameterError);
  CHECK_THROWS_AS(kruskal_wallis(Groups{{1, 2}, {}}), ParameterError);
}

TEST_CASE("Kruskal-Wallis agrees with exhaustive permutation") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + trial % 3;
    const auto g = random_groups(rng, k, 12);
    const auto r = kruskal_wallis(g);
    CHECK(std::fabs(r.h - oracle::kruskal_h(g)) < 1e-9);
    if (r.h == 0.0) continue;
    CHECK(std::fabs(r.p_value - oracle::kruskal_permutation_p(g)) <= 0.02);
  }
}

TEST_CASE("Kruskal-Wallis ignores monotone transforms") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Groups g(3);
    for (auto& grp : g)
      for (int i = 0; i < 6; ++i) grp.push_back(noise(rng));
    Groups t = g;
    for (auto& grp : t)
      for (auto& v : grp) v = std::exp(3.0 * v) + 7.0;
    const auto a = kruskal_wallis(g);
    const auto b = kruskal_wallis(t);
    CHECK(a.h == doctest::Approx(b.h).epsilon(1e-12));
    CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-12));
  }
}

TEST_CASE("Sidak adjustment") {
  CHECK(sidak_adjust(0.03, 1) == 0.03);
  CHECK(sidak_adjust(0.01, 3) == doctest::Approx(1.0 - std::pow(0.99, 3)));
  CHECK(sidak_adjust(1e-18, 3) >= 1e-18);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(2 + trial % 10);
    for (auto& v : p) v = u(rng);
    std::sort(p.begin(), p.end());
    const std::size_t m = p.size() * (p.size() - 1) / 2;
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(sidak_adjust(p[i], m) >= p[i]);
      CHECK(sidak_adjust(p[i], m) <= 1.0);
      if (i > 0) CHECK(sidak_adjust(p[i], m) >= sidak_adjust(p[i - 1], m));
    }
  }
}

TEST_CASE("Dunn-Sidak post-hoc") {
  const Groups same{{1, 2, 3, 4}, {1, 2, 3, 4}};
  const auto a = dunn_sidak(same);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.comparisons == 1);
  CHECK(a.pairs[0].adjusted_p == doctest::Approx(1.0));
  CHECK(a.pairs[0].adjusted_p == a.pairs[0].p);
  CHECK_FALSE(a.pairs[0].significant);

  const Groups shifted{{1, 2, 3, 4, 5, 6, 7, 8}, {1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5}, {101, 102, 103, 104, 105, 106, 107, 108}};
  const auto b = dunn_sidak(shifted, 0.05);
  REQUIRE(b.pairs.size() == 3);
  CHECK(b.comparisons == 3);
  CHECK_FALSE(b.between(0, 1).significant);
  CHECK(b.between(0, 2).significant);
  CHECK(b.between(2, 1).significant);
  CHECK(&b.between(1, 2) == &b.between(2, 1));

  // The same verdicts from a permutation test on mean-rank gaps.
  for (const auto& pair : b.pairs) {
    const double p = oracle::mean_rank_gap_permutation_p(shifted, pair.a, pair.b, 20000, 7);
    CHECK((sidak_adjust(p, 3) < 0.05) == pair.significant);
    CHECK(pair.adjusted_p >= pair.p);
  }

  CHECK_THROWS_AS(dunn_sidak(Groups{{1, 2, 3}}), ParameterError);
}

TEST_CASE("Pearson correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y, neg;
  for (double v : x) {
    y.push_back(2 * v + 1);
    neg.push_back(-v);
  }
  CHECK(std::fabs(pearson(x, y).r - 1.0) < 1e-12);
  CHECK(std::fabs(pearson(x, neg).r + 1.0) < 1e-12);

  const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  const auto r = pearson(a, b);
  CHECK(std::fabs(r.r - 0.8) < 1e-12);
  CHECK(r.n == 4);
  const double t = 0.8 * std::sqrt(2.0 / (1 - 0.64));
  CHECK(std::fabs(r.p_value - oracle::student_t_two_sided_p(t, 2)) < 1e-10);

  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ParameterError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ParameterError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), NumericalError);
}

TEST_CASE("Pearson is affine invariant") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3 + trial % 20), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = noise(rng);
      y[i] = 0.5 * x[i] + noise(rng);
    }
    const double r = pearson(x, y).r;
    CHECK(std::fabs(r - oracle::pearson_r(x, y)) < 1e-12);
    CHECK(std::fabs(r) <= 1.0);
    std::vector<double> scaled = x, flipped = y;
    for (auto& v : scaled) v = 3.0 * v - 11.0;
    for (auto& v : flipped) v = -v;
    CHECK(std::fabs(pearson(scaled, y).r - r) < 1e-12);
    CHECK(std::fabs(pearson(x, flipped).r + r) < 1e-12);
  }
}
