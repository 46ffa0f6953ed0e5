#include "mrlocal/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "mrlocal/error.hpp"
#include "mrlocal/numeric.hpp"
#include "mrlocal/rng.hpp"

namespace mrlocal {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_fraction(double f, const char* what) {
  if (!(f >= 0.0 && f <= 1.0)) throw ValidationError(std::string(what) + " must be in [0, 1]");
}

void check_variance(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be >= 0");
}

std::size_t share_count(double frac, std::size_t p) {
  return static_cast<std::size_t>(std::llround(frac * static_cast<double>(p)));
}

/// Uniformly random subset of {0..p-1} with k elements, sorted.
IndexSet random_subset(std::size_t p, std::size_t k, std::uint64_t seed, std::string_view tag) {
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  CounterRng rng(seed, tag);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, p - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  IndexSet out(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<bool> membership(std::size_t p, const IndexSet& set) {
  std::vector<bool> in(p, false);
  for (auto j : set) in[j] = true;
  return in;
}

std::vector<double> tile(const std::vector<double>& v, std::size_t replicate) {
  std::vector<double> out;
  out.reserve(v.size() * replicate);
  for (std::size_t r = 0; r < replicate; ++r) out.insert(out.end(), v.begin(), v.end());
  return out;
}

SimulationSetting base_setting(const char* name, double beta, const SimulationScale& scale) {
  SimulationSetting s;
  s.name = name;
  s.p = scale.p;
  s.n_d = scale.n_d;
  s.n_y = scale.n_y;
  s.h_d = scale.h_d;
  s.beta = beta;
  return s;
}

}  // namespace

void SimulationSetting::validate() const {
  if (p < 1) throw ValidationError("p must be >= 1");
  if (!(n_d > 0.0) || !(n_y > 0.0)) throw ValidationError("sample sizes must be > 0");
  if (!(h_d > 0.0 && h_d < 1.0)) throw ValidationError("h_d must be in (0, 1)");
  if (!std::isfinite(beta)) throw ValidationError("beta must be finite");
  if (!(se_law.lo > 0.0) || !(se_law.hi >= se_law.lo)) throw ValidationError("SE law needs 0 < lo <= hi");
  for (const auto* v : {&gamma_d, &se_d, &se_y}) {
    if (!v->empty() && v->size() != p) throw ValidationError("fixed effect vectors must have length p");
  }
  for (const auto* v : {&se_d, &se_y}) {
    for (double x : *v) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("fixed standard errors must be > 0");
    }
  }
  std::visit(Overloaded{
                 [](const PointNormalDirectional& l) {
                   check_fraction(l.valid_frac, "valid_frac");
                   check_variance(l.sigma_pi_sq, "sigma_pi_sq");
                 },
                 [](const Balanced& l) { check_variance(l.sigma_pi_sq, "sigma_pi_sq"); },
                 [](const MixtureBalanced& l) {
                   check_fraction(l.frac, "frac");
                   check_variance(l.s1_sq, "s1_sq");
                   check_variance(l.s2_sq, "s2_sq");
                 },
                 [](const ScaledDirectional& l) {
                   check_fraction(l.valid_frac, "valid_frac");
                   check_variance(l.noise_scale, "noise_scale");
                 },
                 [this](const FromEffects& l) {
                   check_fraction(l.valid_frac, "valid_frac");
                   if (l.pi.size() != p) throw ValidationError("pi vector must have length p");
                 },
             },
             pleiotropy);
}

SimulationSetting setting_a(double beta, const SimulationScale& scale) {
  auto s = base_setting("a", beta, scale);
  s.pleiotropy = PointNormalDirectional{0.5, 0.05 / static_cast<double>(scale.p), 2.5};
  return s;
}

SimulationSetting setting_b(double beta, const SimulationScale& scale) {
  auto s = base_setting("b", beta, scale);
  s.pleiotropy = PointNormalDirectional{0.5, 0.5 / static_cast<double>(scale.p), 2.5};
  return s;
}

SimulationSetting setting_c(double beta, const SimulationScale& scale) {
  auto s = base_setting("c", beta, scale);
  s.pleiotropy = Balanced{0.1 / static_cast<double>(scale.p)};
  return s;
}

SimulationSetting setting_d(double beta, const SimulationScale& scale) {
  auto s = base_setting("d", beta, scale);
  s.pleiotropy = Balanced{0.05 / static_cast<double>(scale.p)};
  return s;
}

SimulationSetting setting_e(double beta, const SimulationScale& scale) {
  auto s = base_setting("e", beta, scale);
  s.pleiotropy = PointNormalDirectional{0.28, 0.05 / static_cast<double>(scale.p), 2.5};
  return s;
}

SimulationSetting named_setting(char which, double beta, const SimulationScale& scale) {
  switch (which) {
    case 'a': return setting_a(beta, scale);
    case 'b': return setting_b(beta, scale);
    case 'c': return setting_c(beta, scale);
    case 'd': return setting_d(beta, scale);
    case 'e': return setting_e(beta, scale);
    default: throw ValidationError(std::string("unknown setting '") + which + "'");
  }
}

SimulationSetting setting_from_effects(const std::vector<double>& gamma_d, const std::vector<double>& se_d,
                                       const std::vector<double>& se_y, const std::vector<double>& pi, double beta,
                                       std::size_t replicate) {
  if (gamma_d.empty() || se_d.size() != gamma_d.size() || se_y.size() != gamma_d.size() ||
      pi.size() != gamma_d.size()) {
    throw ValidationError("effect vectors must be non-empty and of equal length");
  }
  if (replicate < 1) throw ValidationError("replicate must be >= 1");
  SimulationSetting s;
  s.name = "from_effects";
  s.p = gamma_d.size() * replicate;
  s.beta = beta;
  s.gamma_d = tile(gamma_d, replicate);
  s.se_d = tile(se_d, replicate);
  s.se_y = tile(se_y, replicate);
  s.pleiotropy = FromEffects{tile(pi, replicate), 0.0};
  return s;
}

SimulationSetting empirical_setting(char which, const EmpiricalInputs& in, double beta, std::size_t replicate) {
  const std::vector<double> zeros(in.gamma_d.size(), 0.0);
  const auto& pi_src = (which == 'b') ? in.pi_observed : zeros;
  auto s = setting_from_effects(in.gamma_d, in.se_d, in.se_y, pi_src, beta, replicate);
  s.name = std::string("empirical_") + which;
  CompensatedSum h;
  for (double g : s.gamma_d) h += g * g;
  const double per = h.value() / static_cast<double>(s.p);
  switch (which) {
    case 'a': s.pleiotropy = PointNormalDirectional{0.6, 0.5 * per, 2.5}; break;
    case 'b': std::get<FromEffects>(s.pleiotropy).valid_frac = 0.4; break;
    case 'c': s.pleiotropy = Balanced{per}; break;
    case 'd': s.pleiotropy = MixtureBalanced{0.4, per, 4.0 * per}; break;
    case 'e': s.pleiotropy = ScaledDirectional{0.25, 1.0, 3.0}; break;
    default: throw ValidationError(std::string("unknown empirical setting '") + which + "'");
  }
  return s;
}

SimulatedData generate(const SimulationSetting& setting, std::uint64_t seed) {
  setting.validate();
  const std::size_t p = setting.p;

  std::vector<double> gamma_d = setting.gamma_d;
  if (gamma_d.empty()) {
    CounterRng rng(seed, "gamma_d");
    std::normal_distribution<double> normal(0.0, std::sqrt(setting.h_d / static_cast<double>(p)));
    gamma_d.resize(p);
    for (auto& g : gamma_d) g = normal(rng);
  }

  auto draw_se = [&](const std::vector<double>& fixed, double n, const char* tag) {
    if (!fixed.empty()) return fixed;
    CounterRng rng(seed, tag);
    std::uniform_real_distribution<double> unif(setting.se_law.lo, setting.se_law.hi);
    std::vector<double> out(p);
    const double scale = 1.0 / std::sqrt(n);
    for (auto& s : out) s = unif(rng) * scale;
    return out;
  };
  const auto sigma_d = draw_se(setting.se_d, setting.n_d, "sigma_d");
  const auto sigma_y = draw_se(setting.se_y, setting.n_y, "sigma_y");

  std::vector<double> pi(p, 0.0);
  CounterRng pi_rng(seed, "pi");
  std::normal_distribution<double> std_normal;
  std::visit(Overloaded{
                 [&](const PointNormalDirectional& l) {
                   const auto valid = membership(p, random_subset(p, share_count(l.valid_frac, p), seed, "valid_set"));
                   const double sd = std::sqrt(l.sigma_pi_sq);
                   for (std::size_t j = 0; j < p; ++j) {
                     if (!valid[j]) pi[j] = sd * std_normal(pi_rng) + l.slope * gamma_d[j];
                   }
                 },
                 [&](const Balanced& l) {
                   const double sd = std::sqrt(l.sigma_pi_sq);
                   for (auto& v : pi) v = sd * std_normal(pi_rng);
                 },
                 [&](const MixtureBalanced& l) {
                   const auto first = membership(p, random_subset(p, share_count(l.frac, p), seed, "mixture_set"));
                   const double sd1 = std::sqrt(l.s1_sq), sd2 = std::sqrt(l.s2_sq);
                   for (std::size_t j = 0; j < p; ++j) pi[j] = (first[j] ? sd1 : sd2) * std_normal(pi_rng);
                 },
                 [&](const ScaledDirectional& l) {
                   const auto valid = membership(p, random_subset(p, share_count(l.valid_frac, p), seed, "valid_set"));
                   for (std::size_t j = 0; j < p; ++j) {
                     if (!valid[j]) {
                       pi[j] = std_normal(pi_rng) * l.noise_scale * std::abs(gamma_d[j]) + l.slope * gamma_d[j];
                     }
                   }
                 },
                 [&](const FromEffects& l) {
                   pi = l.pi;
                   for (auto j : random_subset(p, share_count(l.valid_frac, p), seed, "valid_set")) pi[j] = 0.0;
                 },
             },
             setting.pleiotropy);

  CounterRng noise_d(seed, "noise_d");
  CounterRng noise_y(seed, "noise_y");
  std::normal_distribution<double> nd, ny;
  std::vector<GwasRecord> records(p);
  SimulationTruth truth;
  truth.beta = setting.beta;
  CompensatedSum kappa;
  for (std::size_t j = 0; j < p; ++j) {
    const double gy = gamma_d[j] * setting.beta + pi[j];
    auto& r = records[j];
    r.snp_id = "snp" + std::to_string(j + 1);
    r.sigma_d = sigma_d[j];
    r.sigma_y = sigma_y[j];
    r.gamma_d_hat = gamma_d[j] + sigma_d[j] * nd(noise_d);
    r.gamma_y_hat = gy + sigma_y[j] * ny(noise_y);
    if (pi[j] == 0.0) truth.valid_set.push_back(j);
    kappa += gamma_d[j] * gamma_d[j] / (sigma_d[j] * sigma_d[j]);
  }
  truth.kappa = kappa.value() / static_cast<double>(p);
  truth.gamma_d = std::move(gamma_d);
  truth.pi = std::move(pi);
  return {SummaryDataset(std::move(records)), std::move(truth)};
}

// ---------------------------------------------------------------------------
// key = value serialization

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  std::string_view sv = s;
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size()) {
    throw ValidationError("setting '" + key + "': cannot parse number '" + s + "'");
  }
  return v;
}

std::vector<double> to_vector(const std::string& key, const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(to_double(key, s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_setting(const SimulationSetting& s) {
  std::ostringstream out;
  out << "name = " << s.name << '\n';
  out << "p = " << s.p << '\n';
  out << "n_d = " << format_double(s.n_d) << '\n';
  out << "n_y = " << format_double(s.n_y) << '\n';
  out << "h_d = " << format_double(s.h_d) << '\n';
  out << "beta = " << format_double(s.beta) << '\n';
  out << "se_lo = " << format_double(s.se_law.lo) << '\n';
  out << "se_hi = " << format_double(s.se_law.hi) << '\n';
  std::visit(Overloaded{
                 [&](const PointNormalDirectional& l) {
                   out << "pleiotropy = point_normal_directional\n";
                   out << "valid_frac = " << format_double(l.valid_frac) << '\n';
                   out << "sigma_pi_sq = " << format_double(l.sigma_pi_sq) << '\n';
                   out << "slope = " << format_double(l.slope) << '\n';
                 },
                 [&](const Balanced& l) {
                   out << "pleiotropy = balanced\n";
                   out << "sigma_pi_sq = " << format_double(l.sigma_pi_sq) << '\n';
                 },
                 [&](const MixtureBalanced& l) {
                   out << "pleiotropy = mixture_balanced\n";
                   out << "frac = " << format_double(l.frac) << '\n';
                   out << "s1_sq = " << format_double(l.s1_sq) << '\n';
                   out << "s2_sq = " << format_double(l.s2_sq) << '\n';
                 },
                 [&](const ScaledDirectional& l) {
                   out << "pleiotropy = scaled_directional\n";
                   out << "valid_frac = " << format_double(l.valid_frac) << '\n';
                   out << "noise_scale = " << format_double(l.noise_scale) << '\n';
                   out << "slope = " << format_double(l.slope) << '\n';
                 },
                 [&](const FromEffects& l) {
                   out << "pleiotropy = from_effects\n";
                   out << "valid_frac = " << format_double(l.valid_frac) << '\n';
                   out << "pi = " << join(l.pi) << '\n';
                 },
             },
             s.pleiotropy);
  if (!s.gamma_d.empty()) out << "gamma_d = " << join(s.gamma_d) << '\n';
  if (!s.se_d.empty()) out << "se_d = " << join(s.se_d) << '\n';
  if (!s.se_y.empty()) out << "se_y = " << join(s.se_y) << '\n';
  return out.str();
}

SimulationSetting parse_setting(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim_copy(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError("setting line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim_copy(t.substr(0, eq));
    if (!kv.emplace(key, trim_copy(t.substr(eq + 1))).second) throw ValidationError("setting key '" + key + "' repeated");
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&](const std::string& key, double fallback) {
    auto v = take(key);
    return v ? to_double(key, *v) : fallback;
  };
  auto need = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw ValidationError("setting is missing key '" + key + "'");
    return to_double(key, *v);
  };

  SimulationSetting s;
  if (auto v = take("name")) s.name = *v;
  const double p = num("p", static_cast<double>(s.p));
  if (!(p >= 1.0) || p != std::floor(p)) throw ValidationError("setting 'p' must be a positive integer");
  s.p = static_cast<std::size_t>(p);
  s.n_d = num("n_d", s.n_d);
  s.n_y = num("n_y", s.n_y);
  s.h_d = num("h_d", s.h_d);
  s.beta = num("beta", s.beta);
  s.se_law.lo = num("se_lo", s.se_law.lo);
  s.se_law.hi = num("se_hi", s.se_law.hi);

  const auto law = take("pleiotropy").value_or("balanced");
  if (law == "point_normal_directional") {
    s.pleiotropy = PointNormalDirectional{need("valid_frac"), need("sigma_pi_sq"), need("slope")};
  } else if (law == "balanced") {
    s.pleiotropy = Balanced{num("sigma_pi_sq", 0.0)};
  } else if (law == "mixture_balanced") {
    s.pleiotropy = MixtureBalanced{need("frac"), need("s1_sq"), need("s2_sq")};
  } else if (law == "scaled_directional") {
    s.pleiotropy = ScaledDirectional{need("valid_frac"), need("noise_scale"), need("slope")};
  } else if (law == "from_effects") {
    const double vf = num("valid_frac", 0.0);
    auto pi = take("pi");
    if (!pi) throw ValidationError("setting is missing key 'pi'");
    s.pleiotropy = FromEffects{to_vector("pi", *pi), vf};
  } else {
    throw ValidationError("unknown pleiotropy law '" + law + "'");
  }
  if (auto v = take("gamma_d")) s.gamma_d = to_vector("gamma_d", *v);
  if (auto v = take("se_d")) s.se_d = to_vector("se_d", *v);
  if (auto v = take("se_y")) s.se_y = to_vector("se_y", *v);
  if (!kv.empty()) throw ValidationError("unknown setting key '" + kv.begin()->first + "'");
  s.validate();
  return s;
}

SimulationSetting load_setting(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open setting file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_setting(buf.str());
}

std::string format_truth_tsv(const SummaryDataset& ds, const SimulationTruth& truth) {
  std::string out = "snp\tgamma_d\tpi\tvalid\n";
  for (std::size_t j = 0; j < ds.size(); ++j) {
    out += ds[j].snp_id;
    out += '\t';
    out += format_double(truth.gamma_d[j]);
    out += '\t';
    out += format_double(truth.pi[j]);
    out += truth.pi[j] == 0.0 ? "\t1\n" : "\t0\n";
  }
  return out;
}

void write_truth_tsv(const SummaryDataset& ds, const SimulationTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << format_truth_tsv(ds, truth);
}

}  // namespace mrlocal
