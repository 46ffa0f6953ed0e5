#include <gtest/gtest.h>

#include <cmath>

#include "mrlocal/bootstrap.hpp"
#include "mrlocal/error.hpp"
#include "mrlocal/simulator.hpp"

using namespace mrlocal;

namespace {

MrLocalConfig fast_config(std::uint64_t seed) {
  MrLocalConfig cfg;
  cfg.keep_grid_members = false;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Bootstrap, RedrawIsDeterministicPerReplicate) {
  const auto data = generate(setting_a(0.1, {.p = 200}), 1);
  const auto a = parametric_redraw(data.dataset, 5, 3);
  const auto b = parametric_redraw(data.dataset, 5, 3);
  const auto c = parametric_redraw(data.dataset, 5, 4);
  EXPECT_EQ(format_summary_tsv(a), format_summary_tsv(b));
  EXPECT_NE(format_summary_tsv(a), format_summary_tsv(c));
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a[j].sigma_d, data.dataset[j].sigma_d);
    EXPECT_EQ(a[j].snp_id, data.dataset[j].snp_id);
  }
}

TEST(Bootstrap, NoiselessDataGivesTinySe) {
  std::vector<GwasRecord> recs;
  for (int i = 0; i < 200; ++i) {
    const double gd = 0.05 + 0.0005 * i;
    const double pi = i < 120 ? 0.0 : 0.01 * ((i % 7) + 1);
    recs.push_back({"s" + std::to_string(i), gd, 1e-9, 0.2 * gd + pi, 1e-9});
  }
  const SummaryDataset ds(recs);
  const auto res = bootstrap_se(ds, fast_config(1), 20);
  EXPECT_EQ(res.n_success + res.n_failed, 20u);
  EXPECT_GE(res.n_success, 2u);
  EXPECT_LT(res.se, 1e-6);
}

TEST(Bootstrap, SameSeedSameReplicatesAnyThreads) {
  const auto data = generate(setting_a(0.1, {.p = 400}), 2);
  auto cfg = fast_config(11);
  const auto one = bootstrap_se(data.dataset, cfg, 24);
  cfg.threads = 4;
  const auto four = bootstrap_se(data.dataset, cfg, 24);
  EXPECT_EQ(one.replicate_estimates, four.replicate_estimates);
  EXPECT_EQ(one.se, four.se);
  EXPECT_EQ(one.n_failed, four.n_failed);
  EXPECT_EQ(one.replicate_estimates.size(), one.n_success);

  double m = 0;
  for (double x : one.replicate_estimates) m += x;
  m /= one.n_success;
  double s = 0;
  for (double x : one.replicate_estimates) s += (x - m) * (x - m);
  EXPECT_NEAR(one.se, std::sqrt(s / (one.n_success - 1)), 1e-15);
}

TEST(Bootstrap, DegenerateWhenEveryReplicateFallsBack) {
  std::vector<GwasRecord> recs;
  for (int i = 0; i < 60; ++i) {
    const double gd = 0.1 + 0.001 * (i % 7);
    recs.push_back({"s" + std::to_string(i), gd, 0.001, gd * (-0.9 + 0.03 * i), 0.0005});
  }
  const SummaryDataset ds(recs);
  try {
    bootstrap_se(ds, fast_config(3), 10);
    FAIL();
  } catch (const DegeneracyError& e) {
    EXPECT_NE(std::string(e.what()).find("bootstrap degenerate"), std::string::npos);
  }
  EXPECT_THROW(bootstrap_se(ds, fast_config(3), 1), ValidationError);
}

TEST(Bootstrap, SeTracksSamplingSpread) {
  // Monte Carlo SD of the estimate across fresh datasets versus the bootstrap SE.
  std::vector<double> est;
  for (std::uint64_t seed = 100; seed < 300; ++seed) {
    const auto data = generate(setting_a(0.1), seed);
    est.push_back(run_mr_local(data.dataset, fast_config(0)).beta_hat);
  }
  double m = 0;
  for (double x : est) m += x;
  m /= est.size();
  double s = 0;
  for (double x : est) s += (x - m) * (x - m);
  const double mc_sd = std::sqrt(s / (est.size() - 1));

  double boot = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    boot += bootstrap_se(generate(setting_a(0.1), seed).dataset, fast_config(seed), 200).se / 4;
  }
  EXPECT_GT(boot, mc_sd / 2);
  EXPECT_LT(boot, mc_sd * 2);
}

TEST(Bootstrap, MedianSe) {
  const auto data = generate(setting_a(0.1, {.p = 300}), 4);
  const auto all = data.dataset.all_indices();
  const double a = median_bootstrap_se(data.dataset, all, 50, 8);
  EXPECT_GT(a, 0.0);
  EXPECT_EQ(median_bootstrap_se(data.dataset, all, 50, 8), a);
  EXPECT_NE(median_bootstrap_se(data.dataset, all, 50, 9), a);
  EXPECT_THROW(median_bootstrap_se(data.dataset, IndexSet{}, 50, 8), ValidationError);
  EXPECT_THROW(median_bootstrap_se(data.dataset, all, 1, 8), ValidationError);
}
