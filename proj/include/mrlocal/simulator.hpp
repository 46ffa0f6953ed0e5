#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "mrlocal/summary_data.hpp"

namespace mrlocal {

// Pleiotropy laws. Variances are absolute (not divided by p).

/// A random valid_frac share of instruments has pi = 0; the rest get
/// N(0, sigma_pi_sq) + slope * gamma_d.
struct PointNormalDirectional {
  double valid_frac = 0.5;
  double sigma_pi_sq = 0.0;
  double slope = 0.0;
};

/// pi ~ N(0, sigma_pi_sq) for every instrument.
struct Balanced {
  double sigma_pi_sq = 0.0;
};

/// A random frac share gets N(0, s1_sq), the rest N(0, s2_sq).
struct MixtureBalanced {
  double frac = 0.5;
  double s1_sq = 0.0;
  double s2_sq = 0.0;
};

/// Valid share has pi = 0; the rest get N(0, 1) * noise_scale * |gamma_d| + slope * gamma_d.
struct ScaledDirectional {
  double valid_frac = 0.25;
  double noise_scale = 1.0;
  double slope = 0.0;
};

/// Fixed pleiotropic effects; a random valid_frac share is then zeroed.
struct FromEffects {
  std::vector<double> pi;
  double valid_frac = 0.0;
};

using PleiotropyLaw = std::variant<PointNormalDirectional, Balanced, MixtureBalanced, ScaledDirectional, FromEffects>;

/// Standard errors are drawn as U[lo, hi] / sqrt(n).
struct SeLaw {
  double lo = 0.8;
  double hi = 1.0;
};

struct SimulationSetting {
  std::string name = "custom";
  std::size_t p = 2000;
  double n_d = 1e5;
  double n_y = 1e5;
  double h_d = 0.1;  // gamma_d ~ N(0, h_d / p) when not given
  double beta = 0.0;
  PleiotropyLaw pleiotropy = Balanced{};
  SeLaw se_law;
  // Fixed vectors of length p; an empty vector means "draw it".
  std::vector<double> gamma_d;
  std::vector<double> se_d;
  std::vector<double> se_y;

  /// Throws ValidationError on out-of-range fields or length mismatches.
  void validate() const;
};

/// Overrides for the sizes used by the named settings.
struct SimulationScale {
  std::size_t p = 2000;
  double n_d = 1e5;
  double n_y = 1e5;
  double h_d = 0.1;
};

SimulationSetting setting_a(double beta, const SimulationScale& scale = {});
SimulationSetting setting_b(double beta, const SimulationScale& scale = {});
SimulationSetting setting_c(double beta, const SimulationScale& scale = {});
SimulationSetting setting_d(double beta, const SimulationScale& scale = {});
SimulationSetting setting_e(double beta, const SimulationScale& scale = {});

/// Dispatches on 'a'..'e'; throws ValidationError otherwise.
SimulationSetting named_setting(char which, double beta, const SimulationScale& scale = {});

/// Tiles user-supplied effect and SE vectors `replicate` times and uses pi as
/// the fixed pleiotropic effects.
SimulationSetting setting_from_effects(const std::vector<double>& gamma_d, const std::vector<double>& se_d,
                                       const std::vector<double>& se_y, const std::vector<double>& pi, double beta,
                                       std::size_t replicate);

struct EmpiricalInputs {
  std::vector<double> gamma_d;
  std::vector<double> se_d;
  std::vector<double> se_y;
  std::vector<double> pi_observed;  // outcome-trait effects used as pleiotropy in setting b
};

/// Settings built around tiled observed effects: 'a' plurality with Gaussian
/// invalid effects, 'b' observed effects as pleiotropy, 'c' balanced,
/// 'd' balanced two-component mixture, 'e' few valid with scaled directional pleiotropy.
SimulationSetting empirical_setting(char which, const EmpiricalInputs& in, double beta, std::size_t replicate);

struct SimulationTruth {
  double beta = 0.0;
  std::vector<double> gamma_d;
  std::vector<double> pi;
  IndexSet valid_set;  // {j : pi_j == 0}
  double kappa = 0.0;  // mean gamma_d^2 / sigma_d^2 over all instruments
};

struct SimulatedData {
  SummaryDataset dataset;
  SimulationTruth truth;
};

/// Draws a dataset. Each draw family (gamma_d, sigma_d, sigma_y, valid set,
/// pi, exposure noise, outcome noise) has its own counter-based stream keyed by
/// (seed, family), so output is a pure function of (setting, seed).
SimulatedData generate(const SimulationSetting& setting, std::uint64_t seed);

/// Plain-text "key = value" form of a setting.
std::string format_setting(const SimulationSetting& setting);
SimulationSetting parse_setting(const std::string& text);
SimulationSetting load_setting(const std::filesystem::path& path);

/// Sidecar with columns snp, gamma_d, pi, valid.
std::string format_truth_tsv(const SummaryDataset& ds, const SimulationTruth& truth);
void write_truth_tsv(const SummaryDataset& ds, const SimulationTruth& truth, const std::filesystem::path& path);

}  // namespace mrlocal
