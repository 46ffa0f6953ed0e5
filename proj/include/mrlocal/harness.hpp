#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mrlocal/mr_local.hpp"
#include "mrlocal/simulator.hpp"

namespace mrlocal {

enum class Method { MRLocal, MRLocalPlus, DIVWAll, IVWAll, ClusterMedian };

std::string_view to_string(Method m) noexcept;
/// Accepts the names printed by to_string; throws ValidationError otherwise.
Method parse_method(std::string_view name);
/// Comma-separated list of method names, e.g. "MRLocal,DIVWAll".
std::vector<Method> parse_methods(std::string_view list);

struct ReplicateResult {
  bool ok = false;
  std::string error;  // set when !ok
  double beta_hat = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  SelectionPath path = SelectionPath::BalancedFallback;
  double cluster_valid_frac = 0.0;
  std::uint64_t dataset_hash = 0;
};

struct MonteCarloReport {
  std::string setting_name;
  Method method = Method::MRLocal;
  double true_beta = 0.0;
  std::size_t n_reps = 0;
  std::size_t n_failed = 0;
  double mae = 0.0;
  double mae_se = 0.0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double mean_sd = 0.0;
  double mean_sd_se = 0.0;
  double valid_prop = 0.0;
  double valid_prop_se = 0.0;
  double empty_b_rate = 0.0;
  double empty_b_rate_se = 0.0;
  std::vector<ReplicateResult> per_rep;
};

struct MonteCarloOptions {
  std::size_t reps = 200;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;  // replicate-level workers; 0 = all hardware threads
  std::size_t median_bootstrap_reps = 100;
};

/// Seed of replicate r's dataset.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t r) noexcept;

/// FNV-1a hash of a dataset's numeric content; logged per replicate so paired
/// evaluation can be checked.
std::uint64_t dataset_hash(const SummaryDataset& ds) noexcept;

/// Runs every method on the same simulated dataset for each replicate.
/// Per-replicate estimator errors are recorded and excluded from averages.
std::map<Method, MonteCarloReport> monte_carlo(const SimulationSetting& setting, const MrLocalConfig& cfg,
                                               const std::vector<Method>& methods, const MonteCarloOptions& opts);

/// Aggregates per-replicate results; exposed for testing.
MonteCarloReport summarize(std::string setting_name, Method method, double true_beta,
                           std::vector<ReplicateResult> per_rep);

/// Report TSV: optional "# " comment lines, then `method metric value mc_se` rows.
std::string format_report(const std::map<Method, MonteCarloReport>& reports,
                          const std::vector<std::string>& comments = {});
void write_report(const std::map<Method, MonteCarloReport>& reports, const std::filesystem::path& path,
                  const std::vector<std::string>& comments = {});

/// Per-replicate detail TSV.
std::string format_per_rep(const std::map<Method, MonteCarloReport>& reports,
                           const std::vector<std::string>& comments = {});
void write_per_rep(const std::map<Method, MonteCarloReport>& reports, const std::filesystem::path& path,
                   const std::vector<std::string>& comments = {});

}  // namespace mrlocal
