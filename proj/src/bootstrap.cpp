#include "mrlocal/bootstrap.hpp"

#include <cmath>
#include <optional>
#include <random>

#include "mrlocal/error.hpp"
#include "mrlocal/estimators.hpp"
#include "mrlocal/numeric.hpp"
#include "mrlocal/parallel.hpp"
#include "mrlocal/rng.hpp"

namespace mrlocal {

namespace {

double sample_sd(std::span<const double> x) {
  CompensatedSum s;
  for (double v : x) s += v;
  const double mean = s.value() / static_cast<double>(x.size());
  CompensatedSum ss;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss.value() / static_cast<double>(x.size() - 1));
}

}  // namespace

SummaryDataset parametric_redraw(const SummaryDataset& ds, std::uint64_t seed, std::uint64_t replicate) {
  CounterRng rng(seed, "bootstrap", replicate);
  std::normal_distribution<double> normal;
  std::vector<GwasRecord> out(ds.begin(), ds.end());
  for (auto& r : out) {
    r.gamma_d_hat += r.sigma_d * normal(rng);
    r.gamma_y_hat += r.sigma_y * normal(rng);
  }
  return SummaryDataset(std::move(out));
}

BootstrapResult bootstrap_se(const SummaryDataset& ds, const MrLocalConfig& cfg, std::size_t reps) {
  if (reps < 2) throw ValidationError("bootstrap needs at least 2 replicates");
  MrLocalConfig inner = cfg;
  inner.bootstrap_reps = 0;
  inner.threads = 1;
  inner.compute_ks = false;
  inner.keep_grid_members = false;

  std::vector<std::optional<double>> slots(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    try {
      const auto est = run_mr_local(parametric_redraw(ds, cfg.seed, r), inner);
      if (est.path == SelectionPath::Plurality) slots[r] = est.beta_hat;
    } catch (const Error&) {
      // counted as a failed replicate
    }
  });

  BootstrapResult res;
  for (const auto& s : slots) {
    if (s) {
      res.replicate_estimates.push_back(*s);
    } else {
      ++res.n_failed;
    }
  }
  res.n_success = res.replicate_estimates.size();
  if (res.n_success < 2) throw DegeneracyError("bootstrap degenerate: fewer than two successful replicates");
  res.se = sample_sd(res.replicate_estimates);
  return res;
}

double median_bootstrap_se(const SummaryDataset& ds, std::span<const std::size_t> members, std::size_t reps,
                           std::uint64_t seed) {
  if (reps < 2) throw ValidationError("bootstrap needs at least 2 replicates");
  if (members.empty()) throw ValidationError("median bootstrap: no instruments");
  std::vector<double> estimates;
  estimates.reserve(reps);
  std::vector<double> ratios(members.size());
  for (std::size_t r = 0; r < reps; ++r) {
    CounterRng rng(seed, "median-bootstrap", r);
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& rec = ds[members[k]];
      const double d = rec.gamma_d_hat + rec.sigma_d * normal(rng);
      const double y = rec.gamma_y_hat + rec.sigma_y * normal(rng);
      ratios[k] = y / d;
    }
    estimates.push_back(median_of(ratios));
  }
  return sample_sd(estimates);
}

}  // namespace mrlocal
