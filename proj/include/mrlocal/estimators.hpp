#pragma once

#include <span>
#include <string_view>

#include "mrlocal/summary_data.hpp"

namespace mrlocal {

enum class EstimatorMethod { DIVW, IVW, ClusterMedian };

std::string_view to_string(EstimatorMethod m) noexcept;

struct EstimatorOutput {
  double beta_hat = 0.0;
  double sigma_hat = 0.0;
  std::size_t n_used = 0;
  EstimatorMethod method = EstimatorMethod::DIVW;
};

/// Debiased IVW: sum w gd gy / sum w (gd^2 - sd^2) with w = 1 / sy^2.
/// Throws DegeneracyError when the denominator is not positive.
double divw(const SummaryDataset& ds, std::span<const std::size_t> members);

/// Variance of divw assuming the members are valid instruments.
double divw_variance_plurality(const SummaryDataset& ds, std::span<const std::size_t> members, double beta_hat);

struct BalancedVariance {
  double variance = 0.0;      // sigma_beta^2
  double sigma_pi_sq = 0.0;   // clamped at 0
  double sigma_pi_sq_raw = 0.0;
};

/// Variance of divw over all records under balanced Gaussian pleiotropy,
/// with the pleiotropy variance estimated by weighted moments.
BalancedVariance divw_variance_balanced(const SummaryDataset& ds, double beta_hat);

/// Same variance formula evaluated with a given pleiotropy variance.
double divw_variance_with_pleiotropy(const SummaryDataset& ds, std::span<const std::size_t> members,
                                     double beta_hat, double sigma_pi_sq);

/// Median of the Wald ratios over members (even count: midpoint).
/// Throws DegeneracyError if a member has gamma_d_hat == 0.
double cluster_median(const SummaryDataset& ds, std::span<const std::size_t> members);

/// Median of a sample; the input is copied.
double median_of(std::span<const double> values);

/// First-order IVW with its fixed-effect standard error 1 / sqrt(sum w gd^2).
EstimatorOutput ivw(const SummaryDataset& ds, std::span<const std::size_t> members);

/// Plug-in average instrument strength mean(gd^2 / sd^2); no debiasing.
double avg_iv_strength(const SummaryDataset& ds, std::span<const std::size_t> members);

}  // namespace mrlocal
