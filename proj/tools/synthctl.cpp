// synthctl: simulate factor-model panels, fit synthetic controls
// (frequentist, MLE, Bayesian), and run posterior-vs-sampling-distribution
// experiments. All randomness flows from --seed; outputs are plot-ready CSVs
// plus a manifest that records the resolved configuration.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synth/bayes_model.hpp"
#include "synth/bvm.hpp"
#include "synth/design.hpp"
#include "synth/effects.hpp"
#include "synth/errors.hpp"
#include "synth/factor_model.hpp"
#include "synth/mle.hpp"
#include "synth/panel.hpp"
#include "synth/simplex_solver.hpp"
#include "synth/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitExperiment = 4;

std::string shortest(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string config_digest(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw synth::ConfigError("cannot open config file: " + path);
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw synth::ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!config.is_object()) throw synth::ConfigError("config root must be an object");
  return config;
}

// Keys present in `overlay` win over `base` (one level of nesting merged).
json merge(json base, const json& overlay) {
  for (const auto& [key, value] : overlay.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      for (const auto& [k2, v2] : value.items()) base[key][k2] = v2;
    } else {
      base[key] = value;
    }
  }
  return base;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string profile = "desk";
  std::optional<std::uint64_t> seed;
  unsigned threads = std::thread::hardware_concurrency();
};

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& resolved, std::uint64_t seed,
                    const std::string& started,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = resolved;
  manifest["config_digest"] = config_digest(resolved);
  manifest["seed"] = seed;
  manifest["tool_version"] = SYNTHCTL_VERSION;
  manifest["started"] = started;
  manifest["finished"] = iso_now();
  manifest["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

synth::SamplerConfig sampler_from(const json& bayes, unsigned threads) {
  synth::SamplerConfig config;
  config.chains = bayes.value("chains", 4);
  config.warmup = bayes.value("warmup", 1000);
  config.draws = bayes.value("draws", 1000);
  config.target_accept = bayes.value("target_accept", 0.8);
  config.max_leapfrog = bayes.value("max_leapfrog", 32);
  config.threads = threads;
  return config;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonArgs& args) {
  const std::string started = iso_now();
  json config = load_config(args.config_path);
  if (args.seed) config["seed"] = *args.seed;
  const std::uint64_t seed = config.value("seed", 0ull);

  const std::string kind = config.value("kind", "grouped");
  const int t_total = config.value("t_total", 0);
  const int t0 = config.value("t0", 0);

  synth::Panel panel;
  if (kind == "grouped") {
    const double rho = config.value("rho", 0.5);
    if (!(std::abs(rho) < 1.0))
      throw synth::ConfigError("field 'rho' must lie in (-1, 1), got " + shortest(rho));
    panel = synth::simulate_grouped(config.value("groups", 20),
                                    config.value("group_size", 1), rho,
                                    config.value("noise_sd", 0.25), t_total, t0, seed);
  } else if (kind == "single_factor") {
    synth::FactorSpec spec;
    spec.lambda1 = config.value("lambda1", 1.0);
    const auto lambdas = config.value("lambdas", std::vector<double>{});
    if (lambdas.empty()) throw synth::ConfigError("field 'lambdas' must be a nonempty array");
    spec.lambdas = Eigen::Map<const Eigen::VectorXd>(lambdas.data(),
                                                     static_cast<long>(lambdas.size()));
    spec.sigma_f = config.value("sigma_f", 1.0);
    spec.noise_sd = config.value("noise_sd", 1.0);
    panel = synth::simulate_single_factor(spec, t_total, t0, seed);
  } else {
    throw synth::ConfigError("field 'kind' must be 'grouped' or 'single_factor'");
  }

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  synth::write_panel(panel, (dir / "panel.csv").string());
  std::ofstream((dir / "panel.json")) << synth::panel_to_json(panel) << '\n';
  write_manifest(dir, "simulate", config, seed, started, {"panel.csv", "panel.json"});
  std::cout << "wrote " << (dir / "panel.csv").string() << " (" << panel.num_units()
            << " units x " << panel.num_periods() << " periods, t0=" << panel.t0
            << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

synth::CsvSchema schema_from(const json& config) {
  synth::CsvSchema schema;
  if (config.contains("schema")) {
    const auto& s = config["schema"];
    schema.unit = s.value("unit", "unit");
    schema.time = s.value("time", "time");
    schema.outcome = s.value("outcome", "outcome");
    schema.treated = s.value("treated", "");
    schema.predictors = s.value("predictors", std::vector<std::string>{});
  }
  return schema;
}

synth::PredictorSpec design_from(const json& config) {
  synth::PredictorSpec spec;
  if (config.contains("design")) {
    const auto& d = config["design"];
    spec.all_pre_outcomes = d.value("all_pre_outcomes", true);
    spec.pre_period_mean = d.value("pre_period_mean", false);
    spec.covariates = d.value("covariates", std::vector<std::string>{});
    spec.combinations = d.value("combinations", std::vector<std::vector<double>>{});
    spec.v = d.value("v", std::vector<double>{});
  } else {
    spec.all_pre_outcomes = true;
  }
  return spec;
}

void write_effects_csv(const fs::path& path, const synth::Panel& panel,
                       const Eigen::VectorXd& counterfactual,
                       const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra) {
  std::ofstream out(path);
  out << "period,observed,counterfactual,tau";
  for (const auto& [name, _] : extra) out << ',' << name;
  out << '\n';
  const int post = panel.post_periods();
  for (int t = 0; t < post; ++t) {
    const double observed = panel.outcomes(panel.t0 + t, 0);
    out << panel.times[panel.t0 + t] << ',' << shortest(observed) << ','
        << shortest(counterfactual(t)) << ','
        << shortest(observed - counterfactual(t));
    for (const auto& [_, column] : extra) out << ',' << shortest(column(t));
    out << '\n';
  }
}

int cmd_fit(const CommonArgs& args, const std::string& panel_path,
            std::string mode, const std::string& t0_flag) {
  const std::string started = iso_now();
  json config = load_config(args.config_path);
  if (args.seed) config["seed"] = *args.seed;
  const std::uint64_t seed = config.value("seed", 0ull);
  if (!t0_flag.empty()) config["t0_marker"] = t0_flag;
  if (mode.empty()) mode = config.value("mode", "frequentist");
  config["mode"] = mode;
  if (!config.contains("t0_marker"))
    throw synth::ConfigError("t0_marker is required (flag --t0-marker or config key)");

  const synth::Panel panel =
      synth::load_panel(panel_path, schema_from(config), config["t0_marker"]);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  json results;
  results["mode"] = mode;
  results["panel"] = {{"units", panel.num_units()},
                      {"periods", panel.num_periods()},
                      {"t0", panel.t0}};

  const auto levels = config.value("levels", std::vector<double>{0.75, 0.95});

  if (mode == "frequentist") {
    const synth::DesignPair design = synth::build_design(panel, design_from(config));
    const synth::SimplexWeights fit = synth::solve_sc(design);
    const synth::EffectSeries series = synth::effects(panel, fit.w);
    results["weights"] = std::vector<double>(fit.w.data(), fit.w.data() + fit.w.size());
    results["donors"] = std::vector<std::string>(panel.units.begin() + 1, panel.units.end());
    results["objective"] = fit.objective;
    results["duality_gap"] = fit.duality_gap;
    results["iterations"] = fit.iterations;
    results["mean_effect"] = series.mean_effect;
    write_effects_csv(dir / "effects.csv", panel, series.counterfactual, {});
  } else if (mode == "mle") {
    const synth::MleFit fit = synth::fit_mle(panel);
    const synth::EffectSeries series = synth::effects(panel, fit.w_hat);
    results["weights"] =
        std::vector<double>(fit.w_hat.data(), fit.w_hat.data() + fit.w_hat.size());
    results["donors"] = std::vector<std::string>(panel.units.begin() + 1, panel.units.end());
    results["sigma_sq_hat"] = fit.sigma_sq_hat;
    results["loglik"] = fit.loglik;
    results["mean_effect"] = series.mean_effect;
    json ses = json::array();
    for (int d = 0; d < panel.num_donors(); ++d)
      ses.push_back(std::sqrt(std::max(0.0, fit.vcov(d, d) / fit.t0)));
    results["weight_se"] = ses;
    write_effects_csv(dir / "effects.csv", panel, series.counterfactual, {});
  } else if (mode == "bayes") {
    const json bayes_cfg = config.value("bayes", json::object());
    synth::Panel working = panel;
    double scale = 1.0;
    if (bayes_cfg.value("standardize", true)) {
      // Rescale to the treated pre-period spread so the half-normal sigma
      // prior is on the data's own scale.
      const Eigen::VectorXd pre = panel.outcomes.col(0).head(panel.t0);
      const double sd = std::sqrt(
          (pre.array() - pre.mean()).square().sum() / std::max(1, panel.t0 - 1));
      if (sd > 0.0) scale = sd;
      working.outcomes /= scale;
      working.predictors.resize(0, panel.num_units());
      working.predictor_names.clear();
    }
    synth::BayesModelSpec model;
    model.include_predictive_noise = bayes_cfg.value("predictive_noise", true);
    model.sigma_prior_scale = bayes_cfg.value("sigma_prior_scale", 1.0);
    model.use_predictor_weights = bayes_cfg.value("use_predictor_weights", false);
    model.gamma_prior = bayes_cfg.value("gamma_prior", std::vector<double>{});

    synth::PredictorSpec design_spec = design_from(config);
    const synth::DesignPair design = synth::build_design(working, design_spec);
    const synth::PosteriorDraws draws =
        synth::sample(model, working, design, sampler_from(bayes_cfg, args.threads), seed);
    const synth::PosteriorSummary summary = synth::summarize(draws, levels);
    const synth::BiasBoundSummary bound = synth::bias_bound(draws, working);

    results["donors"] = std::vector<std::string>(panel.units.begin() + 1, panel.units.end());
    const Eigen::VectorXd w_mean = draws.w_draws.colwise().mean();
    results["posterior_mean_weights"] =
        std::vector<double>(w_mean.data(), w_mean.data() + w_mean.size());
    results["mean_effect"] = summary.mean_effect * scale;
    json intervals = json::object();
    for (const auto& band : summary.bands)
      intervals[shortest(band.level)] = {band.lo * scale, band.hi * scale};
    results["mean_effect_intervals"] = intervals;
    results["accept_rate"] = draws.accept_rate;
    results["divergences"] = draws.divergences;
    json diag = json::object();
    for (const auto& d : draws.diagnostics)
      diag[d.name] = {{"rhat", d.rhat}, {"ess", d.ess}};
    results["diagnostics"] = diag;
    results["warnings"] = draws.warnings;
    std::vector<double> bounds(bound.per_draw_bound.data(),
                               bound.per_draw_bound.data() + bound.per_draw_bound.size());
    for (double& b : bounds) b *= scale;
    results["bias_bound_quantiles"] = {
        {"q25", synth::stats::quantile(bounds, 0.25)},
        {"q50", synth::stats::quantile(bounds, 0.50)},
        {"q75", synth::stats::quantile(bounds, 0.75)},
        {"q95", synth::stats::quantile(bounds, 0.95)}};
    results["standardize_scale"] = scale;
    for (const auto& warning : draws.warnings) std::cerr << warning << '\n';

    Eigen::VectorXd cf_mean =
        draws.counterfactual_draws.colwise().mean().transpose() * scale;
    std::vector<std::pair<std::string, Eigen::VectorXd>> extra;
    for (const auto& band : summary.bands) {
      extra.emplace_back("tau_lo" + shortest(band.level), band.period_lo * scale);
      extra.emplace_back("tau_hi" + shortest(band.level), band.period_hi * scale);
    }
    write_effects_csv(dir / "effects.csv", panel, cf_mean, extra);
  } else {
    throw synth::ConfigError("mode must be frequentist, mle, or bayes");
  }

  std::ofstream(dir / "results.json") << results.dump(2) << '\n';
  write_manifest(dir, "fit", config, seed, started, {"results.json", "effects.csv"});
  std::cout << "wrote " << (dir / "results.json").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bvm
// ---------------------------------------------------------------------------

json profile_defaults(const std::string& profile) {
  json defaults;
  defaults["design"] = "sparse";
  defaults["post_periods"] = 10;
  defaults["noise_sd"] = 0.25;
  defaults["rho"] = 0.5;
  defaults["predictive_noise"] = true;
  defaults["grid_points"] = 512;
  if (profile == "smoke") {
    defaults["t0_grid"] = {30};
    defaults["freq_reps"] = 100;
    defaults["bayes"] = {{"chains", 2}, {"warmup", 200}, {"draws", 200}};
  } else if (profile == "desk") {
    defaults["t0_grid"] = {30, 100, 500, 1000};
    defaults["freq_reps"] = 2000;
    defaults["bayes"] = {{"chains", 4}, {"warmup", 1000}, {"draws", 1000}};
  } else if (profile == "full") {
    defaults["t0_grid"] = {30, 100, 500, 1000};
    defaults["freq_reps"] = 10000;
    defaults["bayes"] = {{"chains", 4}, {"warmup", 1000}, {"draws", 1000}};
  } else {
    throw synth::ConfigError("profile must be smoke, desk, or full");
  }
  return defaults;
}

int cmd_bvm(const CommonArgs& args) {
  const std::string started = iso_now();
  json config = merge(profile_defaults(args.profile), load_config(args.config_path));
  if (args.seed) config["seed"] = *args.seed;
  const std::uint64_t seed = config.value("seed", 0ull);
  config["seed"] = seed;

  synth::BvmConfig bvm;
  const std::string design = config.value("design", "sparse");
  if (design == "sparse")
    bvm.design = synth::BvmDesign::sparse;
  else if (design == "dense")
    bvm.design = synth::BvmDesign::dense;
  else
    throw synth::ConfigError("field 'design' must be 'sparse' or 'dense'");
  bvm.t0_grid = config.value("t0_grid", std::vector<int>{});
  bvm.post_periods = config.value("post_periods", 10);
  bvm.noise_sd = config.value("noise_sd", 0.25);
  bvm.rho = config.value("rho", 0.5);
  bvm.freq_reps = config.value("freq_reps", 2000);
  bvm.predictive_noise = config.value("predictive_noise", true);
  bvm.grid_points = config.value("grid_points", 512);
  bvm.bayes = sampler_from(config.value("bayes", json::object()), args.threads);
  bvm.seed = seed;
  bvm.threads = args.threads;

  const synth::BvmReport report = synth::run_bvm(bvm);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);

  std::ofstream densities(dir / "densities.csv");
  densities << "t0,grid,freq_density,bayes_density\n";
  for (const auto& entry : report.entries) {
    for (int i = 0; i < entry.freq_density.grid.size(); ++i) {
      densities << entry.t0 << ',' << shortest(entry.freq_density.grid(i)) << ','
                << shortest(entry.freq_density.values(i)) << ",\n";
    }
    for (int i = 0; i < entry.bayes_density.grid.size(); ++i) {
      densities << entry.t0 << ',' << shortest(entry.bayes_density.grid(i)) << ",,"
                << shortest(entry.bayes_density.values(i)) << '\n';
    }
  }
  densities.close();

  std::ofstream metrics(dir / "metrics.csv");
  metrics << "t0,tv,recovery_distance,freq_failures\n";
  for (const auto& entry : report.entries)
    metrics << entry.t0 << ',' << shortest(entry.tv) << ','
            << shortest(entry.recovery_distance) << ',' << entry.freq_failures << '\n';
  metrics.close();

  write_manifest(dir, "bvm", config, seed, started, {"densities.csv", "metrics.csv"});
  for (const auto& entry : report.entries)
    std::cout << "t0=" << entry.t0 << " tv=" << entry.tv
              << " recovery=" << entry.recovery_distance << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic control estimation and experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string panel_path;
  std::string mode;
  std::string t0_marker;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--out-dir", args.out_dir, "output directory");
    cmd->add_option("--seed", [&](const CLI::results_t& values) {
      std::uint64_t value = 0;
      if (!CLI::detail::lexical_cast(values[0], value)) return false;
      args.seed = value;
      return true;
    }, "RNG seed (overrides config)")->expected(1);
    cmd->add_option("--threads", args.threads, "worker thread cap");
    cmd->add_option("--profile", args.profile, "smoke|desk|full")
        ->check(CLI::IsMember({"smoke", "desk", "full"}));
  };

  CLI::App* simulate = app.add_subcommand("simulate", "simulate a factor-model panel");
  add_common(simulate);

  CLI::App* fit = app.add_subcommand("fit", "fit a synthetic control to a panel CSV");
  add_common(fit);
  fit->add_option("--panel", panel_path, "long-format panel CSV")->required();
  fit->add_option("--mode", mode, "frequentist|mle|bayes")
      ->check(CLI::IsMember({"frequentist", "mle", "bayes"}));
  fit->add_option("--t0-marker", t0_marker, "last pre-treatment period label");

  CLI::App* bvm = app.add_subcommand("bvm", "posterior vs sampling-distribution experiment");
  add_common(bvm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (fit->parsed()) return cmd_fit(args, panel_path, mode, t0_marker);
    if (bvm->parsed()) return cmd_bvm(args);
    return kExitInternal;
  } catch (const synth::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const synth::IngestError& e) {
    std::cerr << "ingest error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const synth::ExperimentError& e) {
    std::cerr << "experiment error: " << e.what() << '\n';
    return kExitExperiment;
  } catch (const synth::Error& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
