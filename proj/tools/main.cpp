// palmfit command line: simulate / fit / cccd / palm / gof / pipeline.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "palmfit/cccd.hpp"
#include "palmfit/core.hpp"
#include "palmfit/fit.hpp"
#include "palmfit/gof.hpp"
#include "palmfit/inference.hpp"
#include "palmfit/io.hpp"
#include "palmfit/palm.hpp"
#include "palmfit/parallel.hpp"
#include "palmfit/rng.hpp"
#include "palmfit/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace palmfit;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<std::string, double> parse_kv(const std::string& spec) {
  std::map<std::string, double> out;
  std::string token;
  std::istringstream stream(spec);
  while (std::getline(stream, token, ',')) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--params expects key=value pairs, got '" + token + "'");
    out[token.substr(0, eq)] = std::stod(token.substr(eq + 1));
  }
  return out;
}

ProcessParams params_from_kv(ModelKind model, const std::map<std::string, double>& kv) {
  const auto need = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw std::invalid_argument(std::string("--params is missing '") + key + "'");
    return it->second;
  };
  switch (model) {
    case ModelKind::poisson: return ProcessParams{PoissonParams{need("lambda")}};
    case ModelKind::thomas:
      return ProcessParams{ThomasParams{need("D"), need("nu"), need("sigma")}};
    case ModelKind::matern:
      return ProcessParams{MaternParams{need("D"), need("nu"), need("R")}};
    case ModelKind::void_process:
      return ProcessParams{VoidParams{need("D"), need("R"), need("lambda")}};
  }
  throw std::invalid_argument("unknown model");
}

Window window_from_flags(const std::string& window_spec, const std::string& window_json) {
  if (!window_spec.empty() && !window_json.empty())
    throw std::invalid_argument("give either --window or --window-json, not both");
  if (!window_spec.empty()) return parse_window_spec(window_spec);
  if (!window_json.empty()) {
    const auto windows = read_windows_json(window_json);
    const auto it = windows.find("");
    if (it == windows.end())
      throw std::invalid_argument(window_json + ": sidecar has no 'default' window");
    return it->second;
  }
  throw std::invalid_argument("a window is required (--window or --window-json)");
}

void ensure_parent(const fs::path& path) {
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

struct CommonState {
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::vector<fs::path> inputs;
};

void finish(const CommonState& state, const fs::path& out, bool directory = false) {
  const fs::path manifest =
      directory ? out / "manifest.json" : fs::path(out.string() + ".manifest.json");
  write_manifest(manifest, state.argv, state.seed, state.inputs);
}

int run_simulate(const std::string& model_name, const std::string& params_spec,
                 const std::string& window_spec, const std::string& window_json,
                 std::uint64_t seed, double buffer, const fs::path& out,
                 CommonState& state) {
  const ModelKind model = model_kind_from_string(model_name);
  const ProcessParams params = params_from_kv(model, parse_kv(params_spec));
  const Window window = window_from_flags(window_spec, window_json);
  RngStream rng(seed);
  const PointPattern pattern = simulate({params, window, buffer}, rng);
  ensure_parent(out);
  write_pattern_csv(out, pattern);
  finish(state, out);
  std::cout << "wrote " << pattern.size() << " points to " << out.string() << "\n";
  return 0;
}

int run_fit(const std::string& model_name, const fs::path& in,
            const std::string& window_spec, const std::string& window_json,
            const std::string& trunc_spec, const std::string& class_name,
            const fs::path& out, CommonState& state) {
  const ModelKind model = model_kind_from_string(model_name);
  const Window window = window_from_flags(window_spec, window_json);
  PointPattern pattern = read_pattern_csv(in, window);
  state.inputs.push_back(in);

  auto classes = split_by_mark(pattern);
  PointPattern target;
  std::optional<PointPattern> other;  // second class, for the CCCD truncation
  if (classes.size() == 1) {
    if (!class_name.empty() && !classes.count(class_name))
      throw std::invalid_argument("class '" + class_name + "' not present in " + in.string());
    target = classes.begin()->second;
  } else {
    if (class_name.empty()) {
      std::string known;
      for (const auto& [name, unused] : classes) {
        (void)unused;
        known += (known.empty() ? "" : ", ") + name;
      }
      throw std::invalid_argument("input has classes (" + known +
                                  "); pick one with --class");
    }
    const auto it = classes.find(class_name);
    if (it == classes.end())
      throw std::invalid_argument("class '" + class_name + "' not present in " + in.string());
    target = it->second;
    for (auto& [name, p] : classes)
      if (name != class_name && (!other || p.size() > other->size())) other = p;
  }

  FitConfig cfg;
  cfg.model = model;

  FitResult fit;
  if (trunc_spec == "auto") {
    if (model == ModelKind::void_process) {
      fit = fit_void_auto(target, cfg);
    } else {
      cfg.truncation = other ? cccd_radii(target, *other).suggested_t
                             : cluster_truncation(target);
      fit = fit_model(target, cfg);
    }
  } else {
    cfg.truncation = std::stod(trunc_spec);
    fit = fit_model(target, cfg);
  }

  ensure_parent(out);
  write_fit_json(out, model, fit);
  finish(state, out);
  std::cout << "model " << to_string(model) << " loglik " << fit.loglik << " t "
            << fit.truncation << (fit.converged ? "" : " (not converged)") << "\n";
  for (const auto& warning : fit.warnings) std::cerr << "warning: " << warning << "\n";
  return 0;
}

int run_cccd(const fs::path& in, const std::string& window_spec,
             const std::string& window_json, double quantile, const fs::path& out,
             CommonState& state) {
  const Window window = window_from_flags(window_spec, window_json);
  const PointPattern pattern = read_pattern_csv(in, window);
  state.inputs.push_back(in);
  const auto classes = split_by_mark(pattern);
  if (classes.size() != 2)
    throw std::invalid_argument("cccd needs exactly two classes, found " +
                                std::to_string(classes.size()));
  const auto first = classes.begin();
  const auto second = std::next(first);
  const CccdSummary summary = cccd_radii(first->second, second->second, quantile);

  json j;
  j["schema"] = kCccdSchema;
  j["class_x"] = first->first;
  j["class_y"] = second->first;
  j["radii_x"] = summary.radii_x;
  j["radii_y"] = summary.radii_y;
  j["quantile"] = quantile;
  j["suggested_t"] = summary.suggested_t;
  ensure_parent(out);
  std::ofstream stream(out);
  stream << j.dump(2) << "\n";
  finish(state, out);
  std::cout << "suggested_t " << summary.suggested_t << "\n";
  return 0;
}

int run_palm(const fs::path& in, const std::string& window_spec,
             const std::string& window_json, const fs::path& fit_path, double trunc,
             int bins, const fs::path& out, CommonState& state) {
  const Window window = window_from_flags(window_spec, window_json);
  const PointPattern pattern = read_pattern_csv(in, window);
  state.inputs.push_back(in);
  state.inputs.push_back(fit_path);
  const auto [model, fit] = read_fit_json(fit_path);
  if (trunc <= 0.0) trunc = 2.0 * fit.truncation;

  const PalmCurve empirical = empirical_palm(pattern, trunc, bins);
  const PalmCurve fitted = fitted_palm_curve(fit.params, empirical.radii, pattern.dim());
  (void)model;
  ensure_parent(out);
  std::ofstream stream(out);
  if (!stream) throw std::invalid_argument("cannot write " + out.string());
  stream << "r,empirical,fitted\n";
  for (std::size_t i = 0; i < empirical.radii.size(); ++i)
    stream << format_double(empirical.radii[i]) << ","
           << format_double(empirical.intensity[i]) << ","
           << format_double(fitted.intensity[i]) << "\n";
  finish(state, out);
  return 0;
}

int run_gof(const fs::path& in, const std::string& window_spec,
            const std::string& window_json, const fs::path& fit_path, int nsim,
            std::uint64_t seed, int grid, double rmax, int nradii, const fs::path& out,
            CommonState& state) {
  const Window window = window_from_flags(window_spec, window_json);
  const PointPattern pattern = read_pattern_csv(in, window);
  state.inputs.push_back(in);
  state.inputs.push_back(fit_path);
  const auto [model, fit] = read_fit_json(fit_path);
  (void)model;

  if (rmax <= 0.0) rmax = window.min_side() / 8.0;
  std::vector<double> radii(nradii);
  for (int i = 0; i < nradii; ++i) radii[i] = rmax * (i + 1) / nradii;

  RngStream rng(seed);
  const GofEnvelope envelope = gof_envelope(pattern, fit.params, nsim, radii, rng, grid);

  ensure_parent(out);
  std::ofstream stream(out);
  if (!stream) throw std::invalid_argument("cannot write " + out.string());
  stream << "r,observed,lo,hi\n";
  for (std::size_t i = 0; i < radii.size(); ++i)
    stream << format_double(radii[i]) << "," << format_double(envelope.observed.F[i])
           << "," << format_double(envelope.lo.F[i]) << ","
           << format_double(envelope.hi.F[i]) << "\n";
  finish(state, out);
  std::cout << "inside_fraction " << envelope.inside_fraction << "\n";
  return 0;
}

int run_pipeline_cmd(const fs::path& cohort_path, const fs::path& windows_path,
                     const std::string& models_spec, int boot, std::uint64_t seed,
                     double cccd_quantile, const fs::path& out_dir, CommonState& state) {
  state.inputs.push_back(cohort_path);
  state.inputs.push_back(windows_path);
  const auto windows = read_windows_json(windows_path);
  const CohortDataset cohort = read_cohort_csv(cohort_path, windows);

  PipelineConfig cfg;
  cfg.models.clear();
  std::string token;
  std::istringstream stream(models_spec);
  while (std::getline(stream, token, ',')) cfg.models.push_back(model_kind_from_string(token));
  cfg.bootstrap_replicates = boot;
  cfg.seed = seed;
  cfg.cccd_quantile = cccd_quantile;

  const PipelineResult result = run_pipeline(cohort, cfg);

  fs::create_directories(out_dir);
  {
    json j;
    j["schema"] = kTablesSchema;
    json rows = json::array();
    for (const auto& table : result.tables) {
      rows.push_back({{"statistic", table.statistic},
                      {"median", table.median},
                      {"q025", table.q025},
                      {"q975", table.q975},
                      {"replicates", table.replicates}});
    }
    j["tables"] = rows;
    std::ofstream f(out_dir / "tables.json");
    f << j.dump(2) << "\n";
  }
  {
    json j;
    j["schema"] = kReportsSchema;
    json rows = json::array();
    for (const auto& report : result.reports) {
      rows.push_back({{"predictor", report.predictor},
                      {"auroc", report.roc.auroc},
                      {"cv", report.cv},
                      {"intercept", report.coefficients.intercept},
                      {"slope", report.coefficients.slope},
                      {"converged", report.coefficients.converged},
                      {"separated", report.coefficients.separated},
                      {"patients", report.patient_ids},
                      {"means", report.patient_means},
                      {"outcomes", report.outcomes}});
    }
    j["reports"] = rows;
    std::ofstream f(out_dir / "reports.json");
    f << j.dump(2) << "\n";
  }
  for (const auto& report : result.reports) {
    std::ofstream f(out_dir / ("roc_" + report.predictor + ".csv"));
    f << "fpr,tpr\n";
    for (const auto& point : report.roc.points)
      f << format_double(point.fpr) << "," << format_double(point.tpr) << "\n";
  }
  {
    std::ofstream f(out_dir / "warnings.txt");
    for (const auto& warning : result.warnings) f << warning << "\n";
  }
  finish(state, out_dir, true);
  std::cout << "wrote " << result.reports.size() << " reports, " << result.tables.size()
            << " bootstrap tables, " << result.warnings.size() << " warnings to "
            << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster and void point process fitting by maximum Palm likelihood"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker-pool size (0 = library default)");

  CommonState state;
  for (int i = 0; i < argc; ++i) state.argv.emplace_back(argv[i]);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "draw a pattern from a model");
  std::string sim_model, sim_params, sim_window, sim_window_json, sim_out;
  std::uint64_t sim_seed = 0;
  double sim_buffer = -1.0;
  sim_cmd->add_option("--model", sim_model, "poisson|thomas|matern|void")->required();
  sim_cmd->add_option("--params", sim_params, "key=value list, e.g. lambda=300,D=10,R=0.075")
      ->required();
  sim_cmd->add_option("--window", sim_window, "lower,upper corners, e.g. 0,0,1,1");
  sim_cmd->add_option("--window-json", sim_window_json, "windows sidecar JSON");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed (required; no wall-clock seeding)")
      ->required();
  sim_cmd->add_option("--buffer", sim_buffer, "parent margin (default: model specific)");
  sim_cmd->add_option("--out", sim_out, "output CSV")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "maximum Palm likelihood fit");
  std::string fit_model_name, fit_in, fit_window, fit_window_json, fit_trunc = "auto",
              fit_class, fit_out;
  std::uint64_t fit_seed = 0;
  fit_cmd->add_option("--model", fit_model_name, "poisson|thomas|matern|void")->required();
  fit_cmd->add_option("--in", fit_in, "input pattern CSV")->required();
  fit_cmd->add_option("--window", fit_window, "lower,upper corners");
  fit_cmd->add_option("--window-json", fit_window_json, "windows sidecar JSON");
  fit_cmd->add_option("--trunc", fit_trunc, "truncation distance or 'auto'");
  fit_cmd->add_option("--class", fit_class, "class label to fit (marked input)");
  fit_cmd->add_option("--seed", fit_seed, "recorded in the manifest; fitting is deterministic");
  fit_cmd->add_option("--out", fit_out, "output JSON")->required();

  // cccd
  auto* cccd_cmd = app.add_subcommand("cccd", "class cover catch digraph summary");
  std::string cccd_in, cccd_window, cccd_window_json, cccd_out;
  double cccd_quantile = 0.9;
  cccd_cmd->add_option("--in", cccd_in, "input CSV with a class column")->required();
  cccd_cmd->add_option("--window", cccd_window, "lower,upper corners");
  cccd_cmd->add_option("--window-json", cccd_window_json, "windows sidecar JSON");
  cccd_cmd->add_option("--quantile", cccd_quantile, "pooled radii quantile for suggested_t");
  cccd_cmd->add_option("--out", cccd_out, "output JSON")->required();

  // palm
  auto* palm_cmd = app.add_subcommand("palm", "empirical vs fitted Palm intensity CSV");
  std::string palm_in, palm_window, palm_window_json, palm_fit, palm_out;
  double palm_trunc = 0.0;
  int palm_bins = 40;
  palm_cmd->add_option("--in", palm_in, "input pattern CSV")->required();
  palm_cmd->add_option("--window", palm_window, "lower,upper corners");
  palm_cmd->add_option("--window-json", palm_window_json, "windows sidecar JSON");
  palm_cmd->add_option("--fit", palm_fit, "fit JSON from the fit subcommand")->required();
  palm_cmd->add_option("--trunc", palm_trunc, "curve range (default 2x fit truncation)");
  palm_cmd->add_option("--bins", palm_bins, "histogram bins");
  palm_cmd->add_option("--out", palm_out, "output CSV")->required();

  // gof
  auto* gof_cmd = app.add_subcommand("gof", "empty space function envelope");
  std::string gof_in, gof_window, gof_window_json, gof_fit, gof_out;
  int gof_nsim = 100, gof_grid = 128, gof_nradii = 20;
  double gof_rmax = 0.0;
  std::uint64_t gof_seed = 0;
  gof_cmd->add_option("--in", gof_in, "input pattern CSV")->required();
  gof_cmd->add_option("--window", gof_window, "lower,upper corners");
  gof_cmd->add_option("--window-json", gof_window_json, "windows sidecar JSON");
  gof_cmd->add_option("--fit", gof_fit, "fit JSON")->required();
  gof_cmd->add_option("--nsim", gof_nsim, "number of simulated envelopes");
  gof_cmd->add_option("--seed", gof_seed, "RNG seed")->required();
  gof_cmd->add_option("--grid", gof_grid, "test grid per side");
  gof_cmd->add_option("--rmax", gof_rmax, "largest radius (default min side / 8)");
  gof_cmd->add_option("--nradii", gof_nradii, "number of radii");
  gof_cmd->add_option("--out", gof_out, "output CSV")->required();

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "cohort fits, bootstrap and ROC reports");
  std::string pipe_cohort, pipe_windows, pipe_models = "thomas,void", pipe_out;
  int pipe_boot = 1000;
  std::uint64_t pipe_seed = 0;
  double pipe_quantile = 0.9;
  pipe_cmd->add_option("--cohort", pipe_cohort, "cohort CSV")->required();
  pipe_cmd->add_option("--windows", pipe_windows, "windows sidecar JSON")->required();
  pipe_cmd->add_option("--models", pipe_models, "comma list: thomas,void");
  pipe_cmd->add_option("--boot", pipe_boot, "bootstrap replicates");
  pipe_cmd->add_option("--seed", pipe_seed, "RNG seed")->required();
  pipe_cmd->add_option("--cccd-quantile", pipe_quantile, "pooled radii quantile");
  pipe_cmd->add_option("--out", pipe_out, "output directory")->required();

  // Global options like --threads may appear after the subcommand.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  set_max_threads(threads);

  try {
    if (sim_cmd->parsed()) {
      state.seed = sim_seed;
      return run_simulate(sim_model, sim_params, sim_window, sim_window_json, sim_seed,
                          sim_buffer, sim_out, state);
    }
    if (fit_cmd->parsed()) {
      state.seed = fit_seed;
      return run_fit(fit_model_name, fit_in, fit_window, fit_window_json, fit_trunc,
                     fit_class, fit_out, state);
    }
    if (cccd_cmd->parsed())
      return run_cccd(cccd_in, cccd_window, cccd_window_json, cccd_quantile, cccd_out,
                      state);
    if (palm_cmd->parsed())
      return run_palm(palm_in, palm_window, palm_window_json, palm_fit, palm_trunc,
                      palm_bins, palm_out, state);
    if (gof_cmd->parsed()) {
      state.seed = gof_seed;
      return run_gof(gof_in, gof_window, gof_window_json, gof_fit, gof_nsim, gof_seed,
                     gof_grid, gof_rmax, gof_nradii, gof_out, state);
    }
    if (pipe_cmd->parsed()) {
      state.seed = pipe_seed;
      return run_pipeline_cmd(pipe_cohort, pipe_windows, pipe_models, pipe_boot,
                              pipe_seed, pipe_quantile, pipe_out, state);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    try {
      json j;
      j["error"] = e.what();
      std::string command;
      for (const auto& arg : state.argv) command += (command.empty() ? "" : " ") + arg;
      j["command"] = command;
      std::ofstream f("palmfit.diagnostics.json");
      f << j.dump(2) << "\n";
      std::cerr << "diagnostics written to palmfit.diagnostics.json\n";
    } catch (...) {
    }
    return 2;
  }
  return 1;
}
