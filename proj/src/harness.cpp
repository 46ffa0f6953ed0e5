#include "mrlocal/harness.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "mrlocal/bootstrap.hpp"
#include "mrlocal/error.hpp"
#include "mrlocal/estimators.hpp"
#include "mrlocal/numeric.hpp"
#include "mrlocal/parallel.hpp"
#include "mrlocal/rng.hpp"

namespace mrlocal {

namespace {

constexpr Method kAllMethods[] = {Method::MRLocal, Method::MRLocalPlus, Method::DIVWAll, Method::IVWAll,
                                  Method::ClusterMedian};

bool has_selection(Method m) {
  return m == Method::MRLocal || m == Method::MRLocalPlus || m == Method::ClusterMedian;
}

double valid_fraction(std::span<const std::size_t> members, std::span<const std::size_t> to_original,
                      const std::vector<bool>& valid) {
  if (members.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto j : members) hits += valid[to_original[j]] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(members.size());
}

struct MeanAndSe {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
};

MeanAndSe mean_and_se(const std::vector<double>& x) {
  MeanAndSe out;
  if (x.empty()) return out;
  CompensatedSum s;
  for (double v : x) s += v;
  const double n = static_cast<double>(x.size());
  out.mean = s.value() / n;
  if (x.size() < 2) {
    out.se = 0.0;
    return out;
  }
  CompensatedSum ss;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss.value() / (n - 1.0) / n);
  return out;
}

double binomial_se(double rate, std::size_t n) {
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(rate * (1.0 - rate) / static_cast<double>(n));
}

ReplicateResult from_estimate(const CausalEstimate& est, const std::vector<bool>& valid) {
  ReplicateResult r;
  r.ok = true;
  r.beta_hat = est.beta_hat;
  r.se = est.sigma_hat;
  r.ci_low = est.ci_low;
  r.ci_high = est.ci_high;
  r.path = est.path;
  r.cluster_valid_frac = valid_fraction(est.selected_cluster, est.kept, valid);
  return r;
}

ReplicateResult failure(const std::exception& e) {
  ReplicateResult r;
  r.ok = false;
  r.error = e.what();
  return r;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "NA";
  return format_double(x);
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::MRLocal: return "MRLocal";
    case Method::MRLocalPlus: return "MRLocalPlus";
    case Method::DIVWAll: return "DIVWAll";
    case Method::IVWAll: return "IVWAll";
    case Method::ClusterMedian: return "ClusterMedian";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto pos = list.find(',', start);
    const auto item = list.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (!item.empty()) {
      const auto m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t r) noexcept {
  return derive_key(master_seed, "replicate", r);
}

std::uint64_t dataset_hash(const SummaryDataset& ds) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : ds) {
    mix(r.snp_id.data(), r.snp_id.size());
    for (double v : {r.gamma_d_hat, r.sigma_d, r.gamma_y_hat, r.sigma_y}) mix(&v, sizeof v);
  }
  return h;
}

MonteCarloReport summarize(std::string setting_name, Method method, double true_beta,
                           std::vector<ReplicateResult> per_rep) {
  MonteCarloReport rep;
  rep.setting_name = std::move(setting_name);
  rep.method = method;
  rep.true_beta = true_beta;
  rep.n_reps = per_rep.size();

  std::vector<double> abs_err, hit, sd, valid, empty;
  for (const auto& r : per_rep) {
    if (!r.ok) {
      ++rep.n_failed;
      continue;
    }
    abs_err.push_back(std::abs(r.beta_hat - true_beta));
    hit.push_back(r.ci_low <= true_beta && true_beta <= r.ci_high ? 1.0 : 0.0);
    sd.push_back(r.se);
    valid.push_back(r.cluster_valid_frac);
    empty.push_back(r.path == SelectionPath::BalancedFallback ? 1.0 : 0.0);
  }
  const auto mae = mean_and_se(abs_err);
  rep.mae = mae.mean;
  rep.mae_se = mae.se;
  rep.coverage = mean_and_se(hit).mean;
  rep.coverage_se = binomial_se(rep.coverage, hit.size());
  const auto msd = mean_and_se(sd);
  rep.mean_sd = msd.mean;
  rep.mean_sd_se = msd.se;
  const auto vp = mean_and_se(valid);
  rep.valid_prop = vp.mean;
  rep.valid_prop_se = vp.se;
  if (has_selection(method)) {
    rep.empty_b_rate = mean_and_se(empty).mean;
    rep.empty_b_rate_se = binomial_se(rep.empty_b_rate, empty.size());
  } else {
    rep.empty_b_rate = std::numeric_limits<double>::quiet_NaN();
    rep.empty_b_rate_se = std::numeric_limits<double>::quiet_NaN();
  }
  rep.per_rep = std::move(per_rep);
  return rep;
}

std::map<Method, MonteCarloReport> monte_carlo(const SimulationSetting& setting, const MrLocalConfig& cfg,
                                               const std::vector<Method>& methods, const MonteCarloOptions& opts) {
  if (opts.reps < 1) throw ValidationError("monte carlo needs reps >= 1");
  cfg.validate();
  setting.validate();
  auto wants = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  const bool need_local = wants(Method::MRLocal) || wants(Method::ClusterMedian);

  std::map<Method, std::vector<ReplicateResult>> slots;
  for (auto m : methods) slots[m].resize(opts.reps);

  parallel_for(opts.reps, opts.threads, [&](std::size_t r) {
    const auto data = generate(setting, replicate_seed(opts.master_seed, r));
    const auto& ds = data.dataset;
    const auto hash = dataset_hash(ds);
    std::vector<bool> valid(ds.size(), false);
    for (auto j : data.truth.valid_set) valid[j] = true;
    const auto all = ds.all_indices();

    MrLocalConfig rep_cfg = cfg;
    rep_cfg.threads = 1;
    rep_cfg.keep_grid_members = false;
    rep_cfg.compute_ks = false;
    rep_cfg.seed = derive_key(opts.master_seed, "bootstrap", r);

    auto put = [&](Method m, ReplicateResult res) {
      res.dataset_hash = hash;
      slots[m][r] = std::move(res);
    };

    if (need_local) {
      try {
        const auto est = run_mr_local(ds, rep_cfg);
        if (wants(Method::MRLocal)) put(Method::MRLocal, from_estimate(est, valid));
        if (wants(Method::ClusterMedian)) {
          try {
            ReplicateResult res;
            res.ok = true;
            res.beta_hat = cluster_median(est.analysed, est.selected_cluster);
            res.se = median_bootstrap_se(est.analysed, est.selected_cluster, opts.median_bootstrap_reps,
                                         derive_key(opts.master_seed, "median", r));
            const double z = normal_upper_quantile(cfg.alpha / 2.0);
            res.ci_low = res.beta_hat - z * res.se;
            res.ci_high = res.beta_hat + z * res.se;
            res.path = est.path;
            res.cluster_valid_frac = valid_fraction(est.selected_cluster, est.kept, valid);
            put(Method::ClusterMedian, std::move(res));
          } catch (const Error& e) {
            put(Method::ClusterMedian, failure(e));
          }
        }
      } catch (const Error& e) {
        if (wants(Method::MRLocal)) put(Method::MRLocal, failure(e));
        if (wants(Method::ClusterMedian)) put(Method::ClusterMedian, failure(e));
      }
    }
    if (wants(Method::MRLocalPlus)) {
      try {
        put(Method::MRLocalPlus, from_estimate(run_mr_local_plus(ds, rep_cfg), valid));
      } catch (const Error& e) {
        put(Method::MRLocalPlus, failure(e));
      }
    }
    const double z = normal_upper_quantile(cfg.alpha / 2.0);
    const double all_valid = valid_fraction(all, all, valid);
    if (wants(Method::DIVWAll)) {
      try {
        ReplicateResult res;
        res.ok = true;
        res.beta_hat = divw(ds, all);
        res.se = std::sqrt(divw_variance_balanced(ds, res.beta_hat).variance);
        res.ci_low = res.beta_hat - z * res.se;
        res.ci_high = res.beta_hat + z * res.se;
        res.cluster_valid_frac = all_valid;
        put(Method::DIVWAll, std::move(res));
      } catch (const Error& e) {
        put(Method::DIVWAll, failure(e));
      }
    }
    if (wants(Method::IVWAll)) {
      try {
        const auto out = ivw(ds, all);
        ReplicateResult res;
        res.ok = true;
        res.beta_hat = out.beta_hat;
        res.se = out.sigma_hat;
        res.ci_low = res.beta_hat - z * res.se;
        res.ci_high = res.beta_hat + z * res.se;
        res.cluster_valid_frac = all_valid;
        put(Method::IVWAll, std::move(res));
      } catch (const Error& e) {
        put(Method::IVWAll, failure(e));
      }
    }
  });

  std::map<Method, MonteCarloReport> out;
  for (auto& [m, per_rep] : slots) out.emplace(m, summarize(setting.name, m, setting.beta, std::move(per_rep)));
  return out;
}

std::string format_report(const std::map<Method, MonteCarloReport>& reports, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "method\tmetric\tvalue\tmc_se\n";
  for (const auto& [m, rep] : reports) {
    const std::string name(to_string(m));
    auto row = [&](const char* metric, const std::string& value, const std::string& se) {
      out += name + '\t' + metric + '\t' + value + '\t' + se + '\n';
    };
    row("n_reps", std::to_string(rep.n_reps), "NA");
    row("n_failed", std::to_string(rep.n_failed), "NA");
    row("mae", fmt(rep.mae), fmt(rep.mae_se));
    row("coverage", fmt(rep.coverage), fmt(rep.coverage_se));
    row("coverage_band_low", fmt(rep.coverage - 1.96 * rep.coverage_se), "NA");
    row("coverage_band_high", fmt(rep.coverage + 1.96 * rep.coverage_se), "NA");
    row("mean_sd", fmt(rep.mean_sd), fmt(rep.mean_sd_se));
    row("valid_prop", fmt(rep.valid_prop), fmt(rep.valid_prop_se));
    if (has_selection(m)) row("empty_b_rate", fmt(rep.empty_b_rate), fmt(rep.empty_b_rate_se));
  }
  return out;
}

std::string format_per_rep(const std::map<Method, MonteCarloReport>& reports, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "method\trep\tstatus\tbeta_hat\tse\tci_low\tci_high\tpath\tcluster_valid_frac\tdataset_hash\n";
  for (const auto& [m, rep] : reports) {
    for (std::size_t r = 0; r < rep.per_rep.size(); ++r) {
      const auto& x = rep.per_rep[r];
      out += std::string(to_string(m)) + '\t' + std::to_string(r) + '\t';
      if (!x.ok) {
        out += "error\tNA\tNA\tNA\tNA\tNA\tNA\t" + std::to_string(x.dataset_hash) + '\n';
        continue;
      }
      out += "ok\t" + fmt(x.beta_hat) + '\t' + fmt(x.se) + '\t' + fmt(x.ci_low) + '\t' + fmt(x.ci_high) + '\t';
      out += has_selection(m) ? std::string(to_string(x.path)) : std::string("NA");
      out += '\t' + fmt(x.cluster_valid_frac) + '\t' + std::to_string(x.dataset_hash) + '\n';
    }
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

}  // namespace

void write_report(const std::map<Method, MonteCarloReport>& reports, const std::filesystem::path& path,
                  const std::vector<std::string>& comments) {
  write_text(path, format_report(reports, comments));
}

void write_per_rep(const std::map<Method, MonteCarloReport>& reports, const std::filesystem::path& path,
                   const std::vector<std::string>& comments) {
  write_text(path, format_per_rep(reports, comments));
}

}  // namespace mrlocal
