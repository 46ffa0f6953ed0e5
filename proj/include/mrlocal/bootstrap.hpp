#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrlocal/mr_local.hpp"
#include "mrlocal/summary_data.hpp"

namespace mrlocal {

inline constexpr std::size_t kDefaultBootstrapReps = 200;

struct BootstrapResult {
  double se = 0.0;
  std::size_t n_success = 0;
  std::size_t n_failed = 0;  // pipeline error or fallback path
  std::vector<double> replicate_estimates;  // successful replicates, in replicate order
};

/// Parametric bootstrap of the full MR-Local pipeline. Replicate r perturbs
/// every effect by independent N(0, se^2) noise drawn from a stream keyed by
/// (cfg.seed, r) and reruns selection and estimation. Throws DegeneracyError
/// when fewer than two replicates succeed.
BootstrapResult bootstrap_se(const SummaryDataset& ds, const MrLocalConfig& cfg, std::size_t reps);

/// One parametric redraw of the dataset; deterministic in (seed, replicate).
SummaryDataset parametric_redraw(const SummaryDataset& ds, std::uint64_t seed, std::uint64_t replicate);

/// Parametric bootstrap SE of the Wald-ratio median over a fixed member set.
double median_bootstrap_se(const SummaryDataset& ds, std::span<const std::size_t> members, std::size_t reps,
                           std::uint64_t seed);

}  // namespace mrlocal
