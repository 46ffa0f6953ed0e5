#include "mrlocal/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "mrlocal/bootstrap.hpp"
#include "mrlocal/error.hpp"
#include "mrlocal/harness.hpp"
#include "mrlocal/mr_local.hpp"
#include "mrlocal/simulator.hpp"
#include "mrlocal/summary_data.hpp"

namespace mrlocal {

namespace {

using ordered_json = nlohmann::ordered_json;

struct AnalysisFlags {
  MrLocalConfig cfg = [] {
    MrLocalConfig c;
    c.bootstrap_reps = kDefaultBootstrapReps;
    return c;
  }();
  std::string tau0_mode = "fixed";
};

struct SettingFlags {
  std::string setting = "a";
  std::string setting_file;
  double beta = 0.0;
  SimulationScale scale;
};

void add_analysis_flags(CLI::App& cmd, AnalysisFlags& f) {
  cmd.add_option("--c-beta", f.cfg.c_beta, "Candidate effects span (-c, c]")->capture_default_str();
  cmd.add_option("--tau0", f.cfg.tau0, "Cluster bandwidth in z units")->capture_default_str();
  cmd.add_option("--tau0-mode", f.tau0_mode, "fixed: use --tau0; theory: 1.5*sqrt(log p)")
      ->check(CLI::IsMember({"fixed", "theory"}))
      ->capture_default_str();
  cmd.add_option("--grid", f.cfg.grid_size, "Grid points (0 = max(p, 2000))")->capture_default_str();
  cmd.add_option("--alpha", f.cfg.alpha, "Confidence level is 1 - alpha")->capture_default_str();
  cmd.add_flag("--plus", f.cfg.use_plus, "Add the skewness gate");
  cmd.add_flag("--no-screen{false}", f.cfg.screen, "Keep weak instruments");
  cmd.add_option("--bootstrap", f.cfg.bootstrap_reps, "Bootstrap replicates for the SE (0 = off)")
      ->capture_default_str();
  cmd.add_option("--seed", f.cfg.seed, "Random seed")->capture_default_str();
  cmd.add_option("--threads", f.cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_setting_flags(CLI::App& cmd, SettingFlags& s) {
  cmd.add_option("--setting", s.setting, "Named setting a-e, or 'file'")
      ->check(CLI::IsMember({"a", "b", "c", "d", "e", "file"}))
      ->capture_default_str();
  cmd.add_option("--setting-file", s.setting_file, "Setting description used with --setting file");
  cmd.add_option("--beta", s.beta, "True causal effect")->capture_default_str();
  cmd.add_option("--p", s.scale.p, "Number of instruments")->capture_default_str();
  cmd.add_option("--nd", s.scale.n_d, "Exposure GWAS sample size")->capture_default_str();
  cmd.add_option("--ny", s.scale.n_y, "Outcome GWAS sample size")->capture_default_str();
}

MrLocalConfig finish(AnalysisFlags& f) {
  f.cfg.tau0_mode = f.tau0_mode == "theory" ? Tau0Mode::Theory : Tau0Mode::Fixed;
  f.cfg.validate();
  return f.cfg;
}

SimulationSetting resolve_setting(const CLI::App& cmd, const SettingFlags& s) {
  const bool beta_given = cmd.count("--beta") > 0;
  if (s.setting == "file") {
    if (s.setting_file.empty()) throw ValidationError("--setting file requires --setting-file");
    auto setting = load_setting(s.setting_file);
    if (beta_given) setting.beta = s.beta;
    return setting;
  }
  if (!s.setting_file.empty()) throw ValidationError("--setting-file is only used with --setting file");
  return named_setting(s.setting[0], s.beta, s.scale);
}

std::string_view mode_name(Tau0Mode m) { return m == Tau0Mode::Theory ? "theory" : "fixed"; }

ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

// Thread count is left out on purpose: output must not depend on it.
ordered_json config_json(const MrLocalConfig& cfg) {
  ordered_json j;
  j["c_beta"] = cfg.c_beta;
  j["tau0"] = cfg.tau0;
  j["tau0_mode"] = mode_name(cfg.tau0_mode);
  j["grid_size"] = cfg.grid_size;
  j["alpha"] = cfg.alpha;
  j["plus"] = cfg.use_plus;
  j["screen"] = cfg.screen;
  j["bootstrap_reps"] = cfg.bootstrap_reps;
  j["seed"] = cfg.seed;
  j["slack_scale"] = cfg.slack_scale;
  return j;
}

std::vector<std::string> config_comments(const MrLocalConfig& cfg) {
  std::vector<std::string> out;
  const auto j = config_json(cfg);
  for (const auto& [k, v] : j.items()) out.push_back(k + " = " + v.dump());
  return out;
}

std::vector<std::string> setting_comments(const SimulationSetting& s) {
  std::vector<std::string> out;
  std::string text = format_setting(s);
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) out.push_back("setting." + text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path + "'");
}

// Config with tau0 and grid size fixed to the values actually used for p inputs.
MrLocalConfig resolved(const MrLocalConfig& cfg, std::size_t p_input, std::size_t p_analysed) {
  MrLocalConfig r = cfg;
  r.tau0 = resolve_tau0(cfg, p_input);
  r.grid_size = resolve_grid_size(cfg, p_analysed);
  return r;
}

int cmd_analyze(const std::string& input, const std::string& output, const MrLocalConfig& cfg, std::ostream& out) {
  const auto loaded = load_summary_tsv(input);
  const auto est = run_mr_local(loaded.dataset, cfg);
  const auto used = resolved(cfg, loaded.dataset.size(), est.analysed.size());

  ordered_json j;
  j["config"] = config_json(used);
  j["input"] = {{"path", input},
                {"n_records", loaded.report.n_records},
                {"n_rejected", loaded.report.n_rejected},
                {"n_screened_out", loaded.dataset.size() - est.analysed.size()}};
  ordered_json rejected = ordered_json::array();
  for (const auto& r : loaded.report.rejection_reasons) rejected.push_back({{"row", r.row}, {"reason", r.reason}});
  j["input"]["rejections"] = rejected;

  const bool empty = est.path == SelectionPath::BalancedFallback;
  j["b_set_empty"] = empty;
  j["path"] = to_string(est.path);
  j["beta_hat"] = number(est.beta_hat);
  j["se"] = number(est.sigma_hat);
  j["ci_low"] = number(est.ci_low);
  j["ci_high"] = number(est.ci_high);
  j["selected_b"] = est.selected_b ? ordered_json(*est.selected_b) : ordered_json(nullptr);
  j["analytic_se"] = number(est.analytic_sigma);
  j["bootstrap_se"] = est.bootstrap_sigma ? ordered_json(*est.bootstrap_sigma) : ordered_json(nullptr);
  j["bootstrap_success"] = est.bootstrap_success;
  j["bootstrap_failed"] = est.bootstrap_failed;
  j["sigma_pi_sq"] = est.sigma_pi_sq ? ordered_json(*est.sigma_pi_sq) : ordered_json(nullptr);
  j["kappa_selected"] = number(est.kappa_selected);
  j["n_candidates"] = est.diagnostics.b_set.size();
  j["size_floor"] = est.diagnostics.size_floor;
  ordered_json members = ordered_json::array();
  for (auto k : est.selected_cluster) members.push_back(est.analysed[k].snp_id);
  j["cluster"] = members;
  if (empty) {
    j["hint"] =
        "no candidate effect passed the uncertainty test; pleiotropy may be balanced, so compare with "
        "estimators designed for balanced pleiotropy";
  }
  ordered_json profile = ordered_json::array();
  std::vector<bool> passed(est.diagnostics.grid.size(), false);
  for (auto k : est.diagnostics.b_set) passed[k] = true;
  for (std::size_t k = 0; k < est.diagnostics.grid.size(); ++k) {
    const auto& g = est.diagnostics.grid[k];
    profile.push_back({{"b", g.b}, {"size", g.size}, {"q", number(g.q)}, {"passed", passed[k]}});
  }
  j["q_profile"] = profile;

  write_file(output + ".json", j.dump(2) + "\n");

  std::string tsv;
  for (const auto& c : config_comments(used)) tsv += "# " + c + "\n";
  tsv += "key\tvalue\n";
  auto row = [&tsv](const std::string& k, const std::string& v) { tsv += k + '\t' + v + '\n'; };
  auto num = [](double x) { return std::isfinite(x) ? format_double(x) : std::string("NA"); };
  row("path", std::string(to_string(est.path)));
  row("b_set_empty", empty ? "true" : "false");
  row("beta_hat", num(est.beta_hat));
  row("se", num(est.sigma_hat));
  row("ci_low", num(est.ci_low));
  row("ci_high", num(est.ci_high));
  row("selected_b", est.selected_b ? num(*est.selected_b) : "NA");
  row("cluster_size", std::to_string(est.selected_cluster.size()));
  row("n_analysed", std::to_string(est.analysed.size()));
  write_file(output + ".summary.tsv", tsv);

  out << to_string(est.path) << " beta_hat=" << num(est.beta_hat) << " se=" << num(est.sigma_hat) << '\n';
  if (empty) out << "hint: " << j["hint"].get<std::string>() << '\n';
  return 0;
}

int cmd_simulate(const SimulationSetting& setting, std::uint64_t seed, const std::string& output, std::ostream& out) {
  const auto data = generate(setting, seed);
  write_summary_tsv(data.dataset, output + ".tsv");
  write_truth_tsv(data.dataset, data.truth, output + ".truth.tsv");
  out << "wrote " << data.dataset.size() << " instruments, " << data.truth.valid_set.size() << " valid\n";
  return 0;
}

int cmd_benchmark(const SimulationSetting& setting, const MrLocalConfig& cfg, const std::string& methods,
                  std::size_t reps, std::uint64_t seed, const std::string& output, std::ostream& out) {
  MonteCarloOptions opts;
  opts.reps = reps;
  opts.master_seed = seed;
  opts.threads = cfg.threads;
  const auto reports = monte_carlo(setting, cfg, parse_methods(methods), opts);

  auto comments = config_comments(cfg);
  comments.push_back("methods = " + methods);
  comments.push_back("reps = " + std::to_string(reps));
  for (auto& c : setting_comments(setting)) comments.push_back(std::move(c));
  write_report(reports, output + ".report.tsv", comments);
  write_per_rep(reports, output + ".per_rep.tsv", comments);
  for (const auto& [m, rep] : reports) {
    out << to_string(m) << " coverage=" << format_double(rep.coverage) << " mae=" << format_double(rep.mae)
        << " failed=" << rep.n_failed << '\n';
  }
  return 0;
}

int cmd_density(const std::string& input, const std::string& output, const MrLocalConfig& cfg_in, std::ostream& out) {
  const auto loaded = load_summary_tsv(input);
  MrLocalConfig cfg = cfg_in;
  cfg.tau0 = resolve_tau0(cfg_in, loaded.dataset.size());
  cfg.tau0_mode = Tau0Mode::Fixed;
  cfg.keep_grid_members = false;
  const auto screened =
      cfg.screen ? screen_weak_ivs(loaded.dataset, cfg.tau0) : ScreenResult{loaded.dataset, loaded.dataset.all_indices(), {}};
  const auto& ds = screened.dataset;
  const auto used = resolved(cfg_in, loaded.dataset.size(), ds.size());
  const auto comments = config_comments(used);

  std::string ratios;
  for (const auto& c : comments) ratios += "# " + c + "\n";
  ratios += "snp\tratio\tweight\n";
  const auto r = ratio_estimates(ds);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto& rec = ds[j];
    ratios += rec.snp_id + '\t' + (std::isfinite(r[j]) ? format_double(r[j]) : "NA") + '\t' +
              format_double(rec.gamma_d_hat * rec.gamma_d_hat / (rec.sigma_y * rec.sigma_y)) + '\n';
  }
  write_file(output + ".ratios.tsv", ratios);

  const auto cand = uncertainty_test(ds, cfg);
  std::string profile;
  for (const auto& c : comments) profile += "# " + c + "\n";
  profile += "b\tcluster_size\tq\n";
  for (const auto& g : cand.grid) {
    profile += format_double(g.b) + '\t' + std::to_string(g.size) + '\t' +
               (std::isfinite(g.q) ? format_double(g.q) : "NA") + '\n';
  }
  write_file(output + ".profile.tsv", profile);
  out << "wrote " << ds.size() << " ratios and " << cand.grid.size() << " grid points\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local-distribution Mendelian randomization on GWAS summary statistics", "mrlocal"};
  app.require_subcommand(1);

  std::string input, output;
  AnalysisFlags flags;
  SettingFlags setting;
  std::size_t reps = 200;
  std::string methods = "MRLocal,DIVWAll,IVWAll";
  std::uint64_t sim_seed = 1;

  auto* analyze = app.add_subcommand("analyze", "Estimate the causal effect from a summary TSV");
  analyze->add_option("--input", input, "Summary TSV")->required();
  analyze->add_option("--output", output, "Output prefix")->required();
  add_analysis_flags(*analyze, flags);

  auto* density = app.add_subcommand("density", "Write ratio estimates and the grid profile");
  density->add_option("--input", input, "Summary TSV")->required();
  density->add_option("--output", output, "Output prefix")->required();
  add_analysis_flags(*density, flags);

  auto* simulate = app.add_subcommand("simulate", "Draw a summary dataset and its truth sidecar");
  simulate->add_option("--output", output, "Output prefix")->required();
  add_setting_flags(*simulate, setting);
  simulate->add_option("--seed", sim_seed, "Random seed")->capture_default_str();

  auto* benchmark = app.add_subcommand("benchmark", "Monte Carlo comparison of methods");
  benchmark->add_option("--output", output, "Output prefix")->required();
  add_setting_flags(*benchmark, setting);
  add_analysis_flags(*benchmark, flags);
  benchmark->add_option("--reps", reps, "Monte Carlo replicates")->capture_default_str();
  benchmark->add_option("--methods", methods, "Comma list of MRLocal, MRLocalPlus, DIVWAll, IVWAll, ClusterMedian")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(input, output, finish(flags), out);
    if (density->parsed()) return cmd_density(input, output, finish(flags), out);
    if (simulate->parsed()) return cmd_simulate(resolve_setting(*simulate, setting), sim_seed, output, out);
    if (benchmark->parsed()) {
      const auto cfg = finish(flags);
      return cmd_benchmark(resolve_setting(*benchmark, setting), cfg, methods, reps, cfg.seed, output, out);
    }
  } catch (const DegeneracyError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mrlocal
