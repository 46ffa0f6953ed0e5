#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "mrlocal/summary_data.hpp"

namespace mrlocal {

/// Moments of a standard normal truncated to [-tau0, tau0].
struct TruncNormalMoments {
  double tau0 = 0.0;
  double g = 0.0;        // variance (= second raw moment)
  double sigma_q = 0.0;  // SD of Z^2 / g
  double m6 = 0.0;       // sixth raw moment
};

/// Closed forms for g and sigma_q; m6 by adaptive Gauss-Kronrod quadrature.
/// Throws ValidationError unless tau0 > 0.
TruncNormalMoments trunc_normal_moments(double tau0);

namespace detail {
inline double z_value(double gamma_y, double gamma_d, double sigma_y_sq, double sigma_d_sq, double b) noexcept {
  return (gamma_y - b * gamma_d) / std::sqrt(sigma_y_sq + b * b * sigma_d_sq);
}
}  // namespace detail

/// Standardized distance of record j's Wald ratio from candidate effect b:
/// (gamma_y - b gamma_d) / sqrt(sigma_y^2 + b^2 sigma_d^2).
double z_statistic(const GwasRecord& rec, double b) noexcept;

/// Instruments whose ratio estimate lies within tau0 standard errors of b
/// (closed boundary).
IndexSet cluster(const SummaryDataset& ds, double b, double tau0);

/// Mean of z_j(b)^2 / g over the cluster. Throws ValidationError on empty members.
double q_statistic(const SummaryDataset& ds, std::span<const std::size_t> members, double b,
                   const TruncNormalMoments& moments);

/// CDF of the standard normal truncated to [-tau0, tau0], clipped outside.
double trunc_normal_cdf(double t, double tau0) noexcept;

/// Exact sup over t in [-tau0, tau0] of |ECDF(t) - F(t)| for the sample
/// {z_k(b) : k in members}.
double ks_statistic(const SummaryDataset& ds, std::span<const std::size_t> members, double b, double tau0);

/// KS distance of an arbitrary sample against the truncated normal on [-tau0, tau0].
double ks_distance(std::span<const double> sample, double tau0);

/// Standardized sample third moment of z over the cluster: mean(z^3) / sqrt(m6 / n).
/// Approximately N(0, 1) when the cluster follows the truncated normal.
double skewness_statistic(const SummaryDataset& ds, std::span<const std::size_t> members, double b,
                          const TruncNormalMoments& moments);

/// Diagnostics for one candidate effect value.
struct ClusterEvaluation {
  double b = 0.0;
  std::size_t size = 0;  // cluster size; members may be dropped to save memory
  IndexSet members;
  double q = 0.0;  // NaN when members is empty
  std::optional<double> ks;
  std::optional<double> skew;  // standardized
  bool passed_uncertainty = false;
  bool passed_size = false;
  bool passed_skew = true;  // only meaningful when the skewness gate is enabled
};

}  // namespace mrlocal
