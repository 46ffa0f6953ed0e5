#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mrlocal/error.hpp"
#include "mrlocal/estimators.hpp"
#include "mrlocal/mr_local.hpp"
#include "mrlocal/simulator.hpp"

using namespace mrlocal;

namespace {

SummaryDataset make(const std::vector<double>& gd, const std::vector<double>& sd, const std::vector<double>& gy,
                    const std::vector<double>& sy) {
  std::vector<GwasRecord> recs;
  for (std::size_t i = 0; i < gd.size(); ++i) recs.push_back({"s" + std::to_string(i), gd[i], sd[i], gy[i], sy[i]});
  return SummaryDataset(std::move(recs));
}

SummaryDataset random_dataset(std::mt19937_64& rng, std::size_t p) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<GwasRecord> recs;
  for (std::size_t i = 0; i < p; ++i) {
    const double sd = 0.01 * u(rng);
    const double gd = (n(rng) >= 0 ? 1 : -1) * (0.05 + std::abs(n(rng)) * 0.05);
    recs.push_back({"s" + std::to_string(i), gd, sd, 0.3 * gd + 0.02 * n(rng), 0.02 * u(rng)});
  }
  return SummaryDataset(std::move(recs));
}

double naive_divw(const SummaryDataset& ds) {
  long double num = 0, den = 0;
  for (const auto& r : ds) {
    num += static_cast<long double>(r.gamma_d_hat) * r.gamma_y_hat / (static_cast<long double>(r.sigma_y) * r.sigma_y);
    den += (static_cast<long double>(r.gamma_d_hat) * r.gamma_d_hat - static_cast<long double>(r.sigma_d) * r.sigma_d) /
           (static_cast<long double>(r.sigma_y) * r.sigma_y);
  }
  return static_cast<double>(num / den);
}

}  // namespace

TEST(Estimators, DivwExamples) {
  EXPECT_NEAR(divw(make({1}, {1e-9}, {2}, {1}), IndexSet{0}), 2.0, 1e-6);
  EXPECT_NEAR(divw(make({2, 2}, {1, 1}, {1, 1}, {1, 1}), IndexSet{0, 1}), 2.0 / 3.0, 1e-15);
  try {
    divw(make({1, 1}, {1, 1}, {1, 1}, {1, 1}), IndexSet{0, 1});
    FAIL();
  } catch (const DegeneracyError& e) {
    EXPECT_NE(std::string(e.what()).find("weak-instrument degeneracy"), std::string::npos);
  }
  EXPECT_THROW(divw(make({1}, {1}, {1}, {1}), IndexSet{}), ValidationError);
}

TEST(Estimators, DivwMatchesNaiveReference) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto ds = random_dataset(rng, 1 + t % 100);
    const double ref = naive_divw(ds);
    EXPECT_NEAR(divw(ds, ds.all_indices()), ref, 1e-12 * std::abs(ref));
  }
}

TEST(Estimators, DivwOutcomeEquivariance) {
  std::mt19937_64 rng(7);
  const auto ds = random_dataset(rng, 60);
  std::vector<GwasRecord> scaled(ds.begin(), ds.end());
  const double c = 2.75;
  for (auto& r : scaled) {
    r.gamma_y_hat *= c;
    r.sigma_y *= c;
  }
  const IndexSet members{1, 5, 9, 20, 33, 59};
  const double base = divw(ds, members);
  EXPECT_NEAR(divw(SummaryDataset(scaled), members), c * base, 1e-13 * std::abs(c * base));
}

TEST(Estimators, PluralityVarianceExamples) {
  // With sigma_y = 1 the single-record value is gd^2 / (gd^2 - sd^2)^2 at beta_hat = 0.
  const auto one = make({2}, {0.5}, {1}, {1});
  EXPECT_NEAR(divw_variance_plurality(one, IndexSet{0}, 0.0), 4.0 / std::pow(4.0 - 0.25, 2), 1e-15);

  // sigma_y enters as sy^2 gd^2 / sy^4 in the numerator.
  const auto scaled = make({2}, {0.5}, {1}, {3});
  const double den = (4.0 - 0.25) / 9.0;
  EXPECT_NEAR(divw_variance_plurality(scaled, IndexSet{0}, 0.0), (9.0 * 4.0 / 81.0) / (den * den), 1e-14);

  const auto two = make({2, 2}, {0.5, 0.5}, {1, 1}, {1.5, 1.5});
  for (double beta : {0.0, 0.4, -1.3}) {
    EXPECT_NEAR(divw_variance_plurality(two, IndexSet{0, 1}, beta),
                0.5 * divw_variance_plurality(two, IndexSet{0}, beta), 1e-15);
  }
}

TEST(Estimators, PluralityVarianceMatchesNaive) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto ds = random_dataset(rng, 1 + t);
    const double beta = 0.3 + 0.01 * t;
    long double num = 0, den = 0;
    for (const auto& r : ds) {
      const long double gd2 = static_cast<long double>(r.gamma_d_hat) * r.gamma_d_hat;
      const long double sd2 = static_cast<long double>(r.sigma_d) * r.sigma_d;
      const long double sy2 = static_cast<long double>(r.sigma_y) * r.sigma_y;
      num += (sy2 * gd2 + beta * beta * sd2 * (gd2 + sd2)) / (sy2 * sy2);
      den += (gd2 - sd2) / sy2;
    }
    const double ref = static_cast<double>(num / (den * den));
    EXPECT_NEAR(divw_variance_plurality(ds, ds.all_indices(), beta), ref, 1e-12 * ref);
  }
}

TEST(Estimators, PluralityVarianceOrderInvariant) {
  std::mt19937_64 rng(9);
  const auto ds = random_dataset(rng, 80);
  std::vector<GwasRecord> rev(ds.begin(), ds.end());
  std::reverse(rev.begin(), rev.end());
  const SummaryDataset r(rev);
  const double a = divw_variance_plurality(ds, ds.all_indices(), 0.3);
  EXPECT_NEAR(divw_variance_plurality(r, r.all_indices(), 0.3), a, 1e-14 * a);
}

TEST(Estimators, BalancedVarianceClampAndReduction) {
  // gy = beta_hat * gd exactly, unit SEs, beta_hat = 0: raw estimate is -1.
  const auto ds = make({1, 2, 3}, {1, 1, 1}, {0, 0, 0}, {1, 1, 1});
  const auto bal = divw_variance_balanced(ds, 0.0);
  EXPECT_NEAR(bal.sigma_pi_sq_raw, -1.0, 1e-15);
  EXPECT_EQ(bal.sigma_pi_sq, 0.0);
  EXPECT_EQ(bal.variance, divw_variance_plurality(ds, ds.all_indices(), 0.0));
}

TEST(Estimators, BalancedVarianceMonotoneInPleiotropy) {
  std::mt19937_64 rng(12);
  const auto ds = random_dataset(rng, 50);
  const auto all = ds.all_indices();
  double prev = divw_variance_with_pleiotropy(ds, all, 0.3, 0.0);
  for (double s : {1e-6, 1e-5, 1e-4, 1e-3}) {
    const double v = divw_variance_with_pleiotropy(ds, all, 0.3, s);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Estimators, BalancedVarianceMatchesNaive) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto ds = random_dataset(rng, 2 + t);
    const double beta = naive_divw(ds);
    long double wr = 0, w = 0;
    for (const auto& r : ds) {
      const long double sy2 = static_cast<long double>(r.sigma_y) * r.sigma_y;
      const long double e = r.gamma_y_hat - static_cast<long double>(beta) * r.gamma_d_hat;
      wr += (e * e - sy2 - static_cast<long double>(beta) * beta * r.sigma_d * r.sigma_d) / sy2;
      w += 1 / sy2;
    }
    const long double s2 = std::max<long double>(0, wr / w);
    long double num = 0, den = 0;
    for (const auto& r : ds) {
      const long double gd2 = static_cast<long double>(r.gamma_d_hat) * r.gamma_d_hat;
      const long double sd2 = static_cast<long double>(r.sigma_d) * r.sigma_d;
      const long double sy2 = static_cast<long double>(r.sigma_y) * r.sigma_y;
      num += ((sy2 + s2) * gd2 + static_cast<long double>(beta) * beta * sd2 * (gd2 + sd2)) / (sy2 * sy2);
      den += (gd2 - sd2) / sy2;
    }
    const auto bal = divw_variance_balanced(ds, beta);
    const double ref = static_cast<double>(num / (den * den));
    EXPECT_NEAR(bal.variance, ref, 1e-12 * ref);
    EXPECT_NEAR(bal.sigma_pi_sq, static_cast<double>(s2), 1e-12 * static_cast<double>(s2) + 1e-300);
  }
}

TEST(Estimators, PleiotropyVarianceConsistency) {
  const double s2 = 0.1 / 2000;
  double within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto setting = setting_c(0.0);
    const auto data = generate(setting, seed);
    const auto& ds = data.dataset;
    const auto bal = divw_variance_balanced(ds, divw(ds, ds.all_indices()));
    within += std::abs(bal.sigma_pi_sq - s2) <= 0.2 * s2;
  }
  EXPECT_GE(within, 95);
}

TEST(Estimators, PluralityVarianceCalibration) {
  // dIVW on the truly valid instruments of setting (b).
  std::vector<double> est, var;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto data = generate(setting_b(0.1), seed);
    const auto& v = data.truth.valid_set;
    const double b = divw(data.dataset, v);
    est.push_back(b);
    var.push_back(divw_variance_plurality(data.dataset, v, b));
  }
  double m = 0, s = 0, mv = 0;
  for (double x : est) m += x;
  m /= est.size();
  for (double x : est) s += (x - m) * (x - m);
  const double emp_sd = std::sqrt(s / (est.size() - 1));
  for (double x : var) mv += std::sqrt(x);
  mv /= var.size();
  EXPECT_NEAR(mv / emp_sd, 1.0, 0.3);
}

TEST(Estimators, MedianExamples) {
  const auto odd = make({1, 1, 1}, {1, 1, 1}, {1, 2, 9}, {1, 1, 1});
  EXPECT_EQ(cluster_median(odd, odd.all_indices()), 2.0);
  const auto even = make({1, 1}, {1, 1}, {1, 3}, {1, 1});
  EXPECT_EQ(cluster_median(even, even.all_indices()), 2.0);
  const auto zero = make({1, 0}, {1, 1}, {1, 3}, {1, 1});
  EXPECT_THROW(cluster_median(zero, zero.all_indices()), DegeneracyError);
  EXPECT_EQ(cluster_median(zero, IndexSet{0}), 1.0);
}

TEST(Estimators, MedianPermutationAndTranslation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<double> x(101);
  for (auto& v : x) v = n(rng);
  const double m = median_of(x);
  std::shuffle(x.begin(), x.end(), rng);
  EXPECT_EQ(median_of(x), m);
  for (auto& v : x) v += 4.0;
  EXPECT_NEAR(median_of(x), m + 4.0, 1e-14);
  x.pop_back();
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(median_of(x), sorted[49] + (sorted[50] - sorted[49]) / 2.0);
}

TEST(Estimators, MedianBeatsPooledInSettingE) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto data = generate(setting_e(0.0), seed);
    MrLocalConfig cfg;
    cfg.keep_grid_members = false;
    const auto est = run_mr_local(data.dataset, cfg);
    const double med = cluster_median(est.analysed, est.selected_cluster);
    const double pooled = divw(data.dataset, data.dataset.all_indices());
    wins += std::abs(med) < std::abs(pooled);
  }
  EXPECT_GE(wins, 80);
}

TEST(Estimators, IvwExamples) {
  const auto single = make({0.5}, {0.1}, {2}, {1});
  const auto out = ivw(single, IndexSet{0});
  EXPECT_NEAR(out.beta_hat, 4.0, 1e-15);
  EXPECT_EQ(out.n_used, 1u);
  EXPECT_EQ(out.method, EstimatorMethod::IVW);
  EXPECT_NEAR(out.sigma_hat, 1.0 / 0.5, 1e-15);

  std::mt19937_64 rng(8);
  auto ds = random_dataset(rng, 40);
  std::vector<GwasRecord> tiny(ds.begin(), ds.end());
  for (auto& r : tiny) r.sigma_d = 1e-300;
  const SummaryDataset t(tiny);
  const double d = divw(t, t.all_indices());
  EXPECT_NEAR(ivw(t, t.all_indices()).beta_hat, d, 1e-14 * std::abs(d));
}

TEST(Estimators, IvwApproachesDivwAsNoiseVanishes) {
  std::mt19937_64 rng(21);
  const auto base = random_dataset(rng, 50);
  double prev = INFINITY;
  for (double scale : {1.0, 0.1, 0.01, 0.001}) {
    std::vector<GwasRecord> recs(base.begin(), base.end());
    for (auto& r : recs) r.sigma_d *= scale;
    const SummaryDataset ds(recs);
    const double gap = std::abs(ivw(ds, ds.all_indices()).beta_hat - divw(ds, ds.all_indices()));
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Estimators, AverageStrength) {
  const auto zeros = make({0, 0}, {1, 2}, {1, 1}, {1, 1});
  EXPECT_EQ(avg_iv_strength(zeros, zeros.all_indices()), 0.0);
  const auto two = make({1, 2}, {1, 1}, {0, 0}, {1, 1});
  EXPECT_EQ(avg_iv_strength(two, two.all_indices()), 2.5);
  EXPECT_THROW(avg_iv_strength(two, IndexSet{}), ValidationError);

  std::mt19937_64 rng(1);
  const auto ds = random_dataset(rng, 64);
  double sum = 0;
  for (const auto& r : ds) sum += r.gamma_d_hat * r.gamma_d_hat / (r.sigma_d * r.sigma_d);
  EXPECT_NEAR(avg_iv_strength(ds, ds.all_indices()), sum / 64.0, 1e-13 * sum / 64.0);
}
