#include "mrlocal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mrlocal/error.hpp"
#include "mrlocal/numeric.hpp"

namespace mrlocal {

namespace {

void require_members(std::span<const std::size_t> members, const char* what) {
  if (members.empty()) throw ValidationError(std::string(what) + ": no instruments");
}

double divw_denominator(const SummaryDataset& ds, std::span<const std::size_t> members) {
  CompensatedSum den;
  for (auto j : members) {
    const auto& r = ds[j];
    den += (r.gamma_d_hat * r.gamma_d_hat - r.sigma_d * r.sigma_d) / (r.sigma_y * r.sigma_y);
  }
  const double d = den.value();
  if (!(d > 0.0)) throw DegeneracyError("weak-instrument degeneracy: dIVW denominator is not positive");
  return d;
}

}  // namespace

std::string_view to_string(EstimatorMethod m) noexcept {
  switch (m) {
    case EstimatorMethod::DIVW: return "dIVW";
    case EstimatorMethod::IVW: return "IVW";
    case EstimatorMethod::ClusterMedian: return "ClusterMedian";
  }
  return "?";
}

double divw(const SummaryDataset& ds, std::span<const std::size_t> members) {
  require_members(members, "divw");
  const double den = divw_denominator(ds, members);
  CompensatedSum num;
  for (auto j : members) {
    const auto& r = ds[j];
    num += r.gamma_d_hat * r.gamma_y_hat / (r.sigma_y * r.sigma_y);
  }
  return num.value() / den;
}

double divw_variance_with_pleiotropy(const SummaryDataset& ds, std::span<const std::size_t> members,
                                     double beta_hat, double sigma_pi_sq) {
  require_members(members, "divw variance");
  const double den = divw_denominator(ds, members);
  const double b2 = beta_hat * beta_hat;
  CompensatedSum num;
  for (auto j : members) {
    const auto& r = ds[j];
    const double gd2 = r.gamma_d_hat * r.gamma_d_hat;
    const double sd2 = r.sigma_d * r.sigma_d;
    const double sy2 = r.sigma_y * r.sigma_y;
    num += ((sy2 + sigma_pi_sq) * gd2 + b2 * sd2 * (gd2 + sd2)) / (sy2 * sy2);
  }
  return num.value() / (den * den);
}

double divw_variance_plurality(const SummaryDataset& ds, std::span<const std::size_t> members, double beta_hat) {
  return divw_variance_with_pleiotropy(ds, members, beta_hat, 0.0);
}

BalancedVariance divw_variance_balanced(const SummaryDataset& ds, double beta_hat) {
  CompensatedSum num, wsum;
  for (const auto& r : ds) {
    const double w = 1.0 / (r.sigma_y * r.sigma_y);
    const double resid = r.gamma_y_hat - beta_hat * r.gamma_d_hat;
    num += (resid * resid - r.sigma_y * r.sigma_y - beta_hat * beta_hat * r.sigma_d * r.sigma_d) * w;
    wsum += w;
  }
  BalancedVariance out;
  out.sigma_pi_sq_raw = num.value() / wsum.value();
  out.sigma_pi_sq = std::max(0.0, out.sigma_pi_sq_raw);
  const auto all = ds.all_indices();
  out.variance = divw_variance_with_pleiotropy(ds, all, beta_hat, out.sigma_pi_sq);
  return out;
}

double median_of(std::span<const double> values) {
  if (values.empty()) throw ValidationError("median of empty sample");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

double cluster_median(const SummaryDataset& ds, std::span<const std::size_t> members) {
  require_members(members, "cluster_median");
  std::vector<double> ratios;
  ratios.reserve(members.size());
  for (auto j : members) {
    const auto& r = ds[j];
    if (r.gamma_d_hat == 0.0) throw DegeneracyError("cluster_median: instrument '" + r.snp_id + "' has zero exposure effect");
    ratios.push_back(r.gamma_y_hat / r.gamma_d_hat);
  }
  return median_of(ratios);
}

EstimatorOutput ivw(const SummaryDataset& ds, std::span<const std::size_t> members) {
  require_members(members, "ivw");
  CompensatedSum num, den;
  for (auto j : members) {
    const auto& r = ds[j];
    const double w = 1.0 / (r.sigma_y * r.sigma_y);
    num += w * r.gamma_d_hat * r.gamma_y_hat;
    den += w * r.gamma_d_hat * r.gamma_d_hat;
  }
  if (!(den.value() > 0.0)) throw DegeneracyError("IVW denominator is not positive");
  return {num.value() / den.value(), 1.0 / std::sqrt(den.value()), members.size(), EstimatorMethod::IVW};
}

double avg_iv_strength(const SummaryDataset& ds, std::span<const std::size_t> members) {
  require_members(members, "avg_iv_strength");
  CompensatedSum sum;
  for (auto j : members) {
    const auto& r = ds[j];
    sum += (r.gamma_d_hat * r.gamma_d_hat) / (r.sigma_d * r.sigma_d);
  }
  return sum.value() / static_cast<double>(members.size());
}

}  // namespace mrlocal
