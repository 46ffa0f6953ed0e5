#include "mrlocal/local_distribution.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "mrlocal/error.hpp"
#include "mrlocal/numeric.hpp"

namespace mrlocal {

namespace {

void require_members(std::span<const std::size_t> members, const char* what) {
  if (members.empty()) throw ValidationError(std::string(what) + ": cluster is empty");
}

}  // namespace

TruncNormalMoments trunc_normal_moments(double tau0) {
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) throw ValidationError("tau0 must be a positive finite number");
  TruncNormalMoments m;
  m.tau0 = tau0;
  const double mass = normal_central_mass(tau0);
  m.g = 1.0 - 2.0 * tau0 * normal_pdf(tau0) / mass;
  // E[Z^4 | |Z| <= tau0] = g (3 + tau0^2) - tau0^2
  const double fourth = m.g * (3.0 + tau0 * tau0) - tau0 * tau0;
  m.sigma_q = std::sqrt(fourth / (m.g * m.g) - 1.0);

  auto integrand = [](double z) {
    const double z2 = z * z;
    return z2 * z2 * z2 * normal_pdf(z);
  };
  const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, tau0, 20, 1e-14);
  m.m6 = 2.0 * half / mass;
  return m;
}

double z_statistic(const GwasRecord& rec, double b) noexcept {
  return detail::z_value(rec.gamma_y_hat, rec.gamma_d_hat, rec.sigma_y * rec.sigma_y, rec.sigma_d * rec.sigma_d, b);
}

IndexSet cluster(const SummaryDataset& ds, double b, double tau0) {
  IndexSet out;
  for (std::size_t j = 0; j < ds.size(); ++j) {
    if (std::abs(z_statistic(ds[j], b)) <= tau0) out.push_back(j);
  }
  return out;
}

double q_statistic(const SummaryDataset& ds, std::span<const std::size_t> members, double b,
                   const TruncNormalMoments& moments) {
  require_members(members, "q_statistic");
  CompensatedSum sum;
  for (auto j : members) {
    const double z = z_statistic(ds[j], b);
    sum += z * z;
  }
  return sum.value() / (static_cast<double>(members.size()) * moments.g);
}

double trunc_normal_cdf(double t, double tau0) noexcept {
  if (t <= -tau0) return 0.0;
  if (t >= tau0) return 1.0;
  const double lo = normal_cdf(-tau0);
  const double f = (normal_cdf(t) - lo) / (normal_cdf(tau0) - lo);
  return std::clamp(f, 0.0, 1.0);
}

double ks_distance(std::span<const double> sample, double tau0) {
  if (sample.empty()) throw ValidationError("ks_distance: sample is empty");
  std::vector<double> x(sample.begin(), sample.end());
  for (auto& v : x) v = std::clamp(v, -tau0, tau0);
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  // Between order statistics the ECDF is flat and F is monotone, so the
  // supremum is reached at a right value (i/n) or a left limit ((i-1)/n).
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = trunc_normal_cdf(x[i], tau0);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_statistic(const SummaryDataset& ds, std::span<const std::size_t> members, double b, double tau0) {
  require_members(members, "ks_statistic");
  std::vector<double> z;
  z.reserve(members.size());
  for (auto j : members) z.push_back(z_statistic(ds[j], b));
  return ks_distance(z, tau0);
}

double skewness_statistic(const SummaryDataset& ds, std::span<const std::size_t> members, double b,
                          const TruncNormalMoments& moments) {
  require_members(members, "skewness_statistic");
  CompensatedSum sum;
  for (auto j : members) {
    const double z = z_statistic(ds[j], b);
    sum += z * z * z;
  }
  const double n = static_cast<double>(members.size());
  return (sum.value() / n) / std::sqrt(moments.m6 / n);
}

}  // namespace mrlocal
