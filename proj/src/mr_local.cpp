#include "mrlocal/mr_local.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrlocal/bootstrap.hpp"
#include "mrlocal/error.hpp"
#include "mrlocal/estimators.hpp"
#include "mrlocal/numeric.hpp"
#include "mrlocal/parallel.hpp"

namespace mrlocal {

void MrLocalConfig::validate() const {
  if (!(c_beta > 0.0) || !std::isfinite(c_beta)) throw ValidationError("c_beta must be > 0");
  if (tau0_mode == Tau0Mode::Fixed && (!(tau0 > 0.0) || !std::isfinite(tau0))) {
    throw ValidationError("tau0 must be > 0");
  }
  if (grid_size == 1) throw ValidationError("grid size must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  if (!(slack_scale >= 0.0) || !std::isfinite(slack_scale)) throw ValidationError("slack scale must be >= 0");
  if (bootstrap_reps == 1) throw ValidationError("bootstrap needs at least 2 replicates");
}

double resolve_tau0(const MrLocalConfig& cfg, std::size_t p) {
  if (cfg.tau0_mode == Tau0Mode::Fixed) return cfg.tau0;
  if (p < 2) throw ValidationError("theory tau0 needs at least two instruments");
  return 1.5 * std::sqrt(std::log(static_cast<double>(p)));
}

std::size_t resolve_grid_size(const MrLocalConfig& cfg, std::size_t p) {
  return cfg.grid_size != 0 ? cfg.grid_size : std::max(p, kDefaultMinGrid);
}

std::vector<double> candidate_grid(double c_beta, std::size_t m) {
  if (!(c_beta > 0.0)) throw ValidationError("c_beta must be > 0");
  if (m < 2) throw ValidationError("grid size must be >= 2");
  std::vector<double> grid(m);
  const double md = static_cast<double>(m);
  for (std::size_t j = 1; j <= m; ++j) grid[j - 1] = -c_beta + 2.0 * c_beta * static_cast<double>(j) / md;
  grid.back() = c_beta;
  return grid;
}

std::size_t ceil_sqrt(std::size_t p) noexcept {
  auto s = static_cast<std::size_t>(std::sqrt(static_cast<double>(p)));
  while (s * s < p) ++s;
  while (s > 0 && (s - 1) * (s - 1) >= p) --s;
  return s;
}

std::vector<double> CandidateSet::b_values() const {
  std::vector<double> out;
  out.reserve(b_set.size());
  for (auto i : b_set) out.push_back(grid[i].b);
  return out;
}

CandidateSet uncertainty_test(const SummaryDataset& ds, const MrLocalConfig& cfg) {
  const std::size_t p = ds.size();
  if (p < 2) throw ValidationError("uncertainty test needs at least two instruments");
  const double tau0 = cfg.tau0;
  const auto moments = trunc_normal_moments(tau0);
  const auto bs = candidate_grid(cfg.c_beta, resolve_grid_size(cfg, p));

  std::vector<double> gy(p), gd(p), sy2(p), sd2(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& r = ds[j];
    gy[j] = r.gamma_y_hat;
    gd[j] = r.gamma_d_hat;
    sy2[j] = r.sigma_y * r.sigma_y;
    sd2[j] = r.sigma_d * r.sigma_d;
  }

  const double log_p = std::log(static_cast<double>(p));
  const double slack = cfg.slack_scale / log_p;

  CandidateSet out;
  out.p = p;
  out.tau0 = tau0;
  out.size_floor = ceil_sqrt(p);
  out.grid.resize(bs.size());

  parallel_for(bs.size(), cfg.threads, [&](std::size_t i) {
    const double b = bs[i];
    ClusterEvaluation& ev = out.grid[i];
    ev.b = b;
    CompensatedSum sum2, sum3;
    std::size_t count = 0;
    for (std::size_t j = 0; j < p; ++j) {
      const double z = detail::z_value(gy[j], gd[j], sy2[j], sd2[j], b);
      if (!(std::abs(z) <= tau0)) continue;
      ++count;
      const double z2 = z * z;
      sum2 += z2;
      if (cfg.use_plus) sum3 += z2 * z;
      if (cfg.keep_grid_members || cfg.compute_ks) ev.members.push_back(j);
    }
    const double n = static_cast<double>(count);
    ev.size = count;
    ev.passed_size = count >= out.size_floor;
    if (count == 0) {
      ev.q = std::numeric_limits<double>::quiet_NaN();
      ev.passed_uncertainty = false;
      ev.passed_skew = !cfg.use_plus;
      return;
    }
    ev.q = sum2.value() / (n * moments.g);
    ev.passed_uncertainty = std::abs(ev.q - 1.0) <= moments.sigma_q * std::sqrt(log_p / n) + slack;
    if (cfg.use_plus) {
      const double skew_raw = sum3.value() / n;
      ev.skew = skew_raw / std::sqrt(moments.m6 / n);
      ev.passed_skew = std::abs(skew_raw) <= std::sqrt(moments.m6 * log_p / n) + slack;
    }
    if (cfg.compute_ks) ev.ks = ks_statistic(ds, ev.members, b, tau0);
    if (!cfg.keep_grid_members) IndexSet().swap(ev.members);
  });

  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    const auto& ev = out.grid[i];
    if (ev.passed_size && ev.passed_uncertainty && ev.passed_skew) out.b_set.push_back(i);
  }
  return out;
}

std::optional<std::size_t> select_mode_index(const CandidateSet& cand) {
  std::optional<std::size_t> best;
  for (auto i : cand.b_set) {
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = cand.grid[i];
    const auto& c = cand.grid[*best];
    const auto sa = a.size, sc = c.size;
    if (sa != sc) {
      if (sa > sc) best = i;
      continue;
    }
    const double qa = std::abs(a.q - 1.0), qc = std::abs(c.q - 1.0);
    if (qa != qc) {
      if (qa < qc) best = i;
      continue;
    }
    if (std::abs(a.b) < std::abs(c.b)) best = i;
  }
  return best;
}

std::optional<double> select_mode(const CandidateSet& cand) {
  auto i = select_mode_index(cand);
  if (!i) return std::nullopt;
  return cand.grid[*i].b;
}

std::string_view to_string(SelectionPath p) noexcept {
  return p == SelectionPath::Plurality ? "Plurality" : "BalancedFallback";
}

CausalEstimate run_mr_local(const SummaryDataset& ds, const MrLocalConfig& cfg_in) {
  cfg_in.validate();
  MrLocalConfig cfg = cfg_in;
  cfg.tau0 = resolve_tau0(cfg_in, ds.size());
  cfg.tau0_mode = Tau0Mode::Fixed;

  ScreenResult screened = cfg.screen ? screen_weak_ivs(ds, cfg.tau0) : ScreenResult{ds, ds.all_indices(), {}};
  if (screened.dataset.size() < 2) throw ValidationError("fewer than two instruments after screening");
  const SummaryDataset& work = screened.dataset;

  CandidateSet cand = uncertainty_test(work, cfg);
  const auto mode = select_mode_index(cand);

  CausalEstimate est{.selected_b = {},
                     .selected_cluster = {},
                     .sigma_pi_sq = {},
                     .bootstrap_sigma = {},
                     .analysed = work,
                     .kept = std::move(screened.kept),
                     .diagnostics = {}};
  est.tau0 = cfg.tau0;

  if (mode) {
    est.path = SelectionPath::Plurality;
    est.selected_b = cand.grid[*mode].b;
    est.selected_cluster = cluster(work, *est.selected_b, cfg.tau0);
    est.beta_hat = divw(work, est.selected_cluster);
    est.analytic_sigma = std::sqrt(divw_variance_plurality(work, est.selected_cluster, est.beta_hat));
  } else {
    est.path = SelectionPath::BalancedFallback;
    est.selected_cluster = work.all_indices();
    est.beta_hat = divw(work, est.selected_cluster);
    const auto bal = divw_variance_balanced(work, est.beta_hat);
    est.sigma_pi_sq = bal.sigma_pi_sq;
    est.analytic_sigma = std::sqrt(bal.variance);
  }
  est.kappa_selected = avg_iv_strength(work, est.selected_cluster);
  est.sigma_hat = est.analytic_sigma;

  if (est.path == SelectionPath::Plurality && cfg.bootstrap_reps >= 2) {
    MrLocalConfig inner = cfg_in;
    inner.bootstrap_reps = 0;
    inner.compute_ks = false;
    inner.keep_grid_members = false;
    try {
      const auto boot = bootstrap_se(ds, inner, cfg.bootstrap_reps);
      est.bootstrap_sigma = boot.se;
      est.bootstrap_success = boot.n_success;
      est.bootstrap_failed = boot.n_failed;
      est.sigma_hat = boot.se;
    } catch (const DegeneracyError&) {
      // Keep the analytic SE; the failure count records what happened.
      est.bootstrap_failed = cfg.bootstrap_reps;
    }
  }

  const double z = normal_upper_quantile(cfg.alpha / 2.0);
  est.ci_low = est.beta_hat - z * est.sigma_hat;
  est.ci_high = est.beta_hat + z * est.sigma_hat;

  est.diagnostics = std::move(cand);
  return est;
}

CausalEstimate run_mr_local_plus(const SummaryDataset& ds, MrLocalConfig cfg) {
  cfg.use_plus = true;
  return run_mr_local(ds, cfg);
}

}  // namespace mrlocal
