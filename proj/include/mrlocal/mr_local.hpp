#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mrlocal/local_distribution.hpp"
#include "mrlocal/summary_data.hpp"

namespace mrlocal {

enum class Tau0Mode {
  Fixed,   // use MrLocalConfig::tau0 as given
  Theory,  // tau0 = 1.5 * sqrt(log p), p = instrument count before screening
};

struct MrLocalConfig {
  double c_beta = 1.0;  // candidate effects span (-c_beta, c_beta]
  double tau0 = 1.6;
  Tau0Mode tau0_mode = Tau0Mode::Fixed;
  std::size_t grid_size = 0;  // 0 selects max(p, 2000)
  double alpha = 0.05;
  bool use_plus = false;  // add the skewness gate to the uncertainty test
  bool screen = true;     // drop instruments with |gamma_d_hat| / sigma_d < tau0
  std::size_t bootstrap_reps = 0;
  std::uint64_t seed = 0;
  double slack_scale = 1.0;  // the bias slack in the uncertainty test is slack_scale / log p
  bool compute_ks = false;   // fill ClusterEvaluation::ks for every grid point
  bool keep_grid_members = true;
  unsigned threads = 1;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

inline constexpr std::size_t kDefaultMinGrid = 2000;

double resolve_tau0(const MrLocalConfig& cfg, std::size_t p);
std::size_t resolve_grid_size(const MrLocalConfig& cfg, std::size_t p);

/// b_j = -c_beta + 2 c_beta j / m for j = 1..m.
std::vector<double> candidate_grid(double c_beta, std::size_t m);

/// Smallest integer s with s * s >= p.
std::size_t ceil_sqrt(std::size_t p) noexcept;

struct CandidateSet {
  std::vector<ClusterEvaluation> grid;
  std::vector<std::size_t> b_set;  // indexes into grid that passed every gate
  std::size_t size_floor = 0;
  double tau0 = 0.0;
  std::size_t p = 0;

  std::vector<double> b_values() const;
};

/// Evaluates every candidate effect on the (already screened) dataset and
/// applies the cluster-size floor, the Q tolerance and, with use_plus, the
/// skewness gate. Uses cfg.tau0 as given.
CandidateSet uncertainty_test(const SummaryDataset& ds, const MrLocalConfig& cfg);

/// Index into cand.grid of the selected candidate: largest cluster, then
/// smallest |Q - 1|, then smallest |b|, then smallest index.
std::optional<std::size_t> select_mode_index(const CandidateSet& cand);
std::optional<double> select_mode(const CandidateSet& cand);

enum class SelectionPath { Plurality, BalancedFallback };
std::string_view to_string(SelectionPath p) noexcept;

struct CausalEstimate {
  double beta_hat = 0.0;
  double sigma_hat = 0.0;  // reported SE: bootstrap when available, else analytic
  double ci_low = 0.0;
  double ci_high = 0.0;
  SelectionPath path = SelectionPath::BalancedFallback;
  std::optional<double> selected_b;
  IndexSet selected_cluster;  // indexes into `analysed`
  std::optional<double> sigma_pi_sq;  // balanced path only
  double analytic_sigma = 0.0;
  std::optional<double> bootstrap_sigma;
  std::size_t bootstrap_success = 0;
  std::size_t bootstrap_failed = 0;
  double tau0 = 0.0;
  double kappa_selected = 0.0;  // plug-in average IV strength of the selected cluster
  SummaryDataset analysed;      // input after screening
  IndexSet kept;                // indexes of `analysed` records in the input
  CandidateSet diagnostics;
};

/// Full pipeline: optional screening, candidate grid, uncertainty test, mode
/// selection, dIVW on the selected cluster (or on every instrument when no
/// candidate passes) with the matching variance, optional bootstrap SE.
CausalEstimate run_mr_local(const SummaryDataset& ds, const MrLocalConfig& cfg);

/// run_mr_local with the skewness gate enabled.
CausalEstimate run_mr_local_plus(const SummaryDataset& ds, MrLocalConfig cfg);

}  // namespace mrlocal
