#pragma once

#include <cmath>
#include <numbers>

namespace mrlocal {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// erfc keeps full relative accuracy in both tails.
inline double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// P(-t <= Z <= t) for standard normal Z.
inline double normal_central_mass(double t) noexcept {
  return std::erf(t / std::numbers::sqrt2);
}

/// Upper quantile z such that P(Z > z) = tail.
double normal_upper_quantile(double tail);

}  // namespace mrlocal
