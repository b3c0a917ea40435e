// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sik/sik.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit code contract, stable for scripting.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

sik::Boundary boundary_from_string(const std::string& s) {
  if (s == "zero_pad") return sik::Boundary::zero_pad;
  if (s == "replicate") return sik::Boundary::replicate;
  if (s == "circular") return sik::Boundary::circular;
  throw std::invalid_argument("unknown boundary '" + s + "' (want zero_pad|replicate|circular)");
}

void ensure_parent_dir(const std::string& prefix) {
  const fs::path parent = fs::path(prefix).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_manifest(const std::string& path, const ordered_json& manifest) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw sik::io_error("cannot open for writing: " + path);
  f << manifest.dump(2) << '\n';
  if (!f) throw sik::io_error("write failed: " + path);
}

// Worker cap resolution: explicit flag, then SIK_WORKERS, then config value.
int resolve_workers(int flag_value, bool flag_given, int config_value) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("SIK_WORKERS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("SIK_WORKERS must be an integer, got '" + std::string(env) + "'");
    }
  }
  return config_value;
}

struct PhantomArgs {
  int size = 64;
  std::string variant = "standard";
  std::string out;
};

int cmd_phantom(const PhantomArgs& a) {
  const sik::PhantomVariant variant = a.variant == "modified" ? sik::PhantomVariant::modified
                                                              : sik::PhantomVariant::standard;
  const sik::ImageGrid img = sik::shepp_logan(a.size, a.size, variant);

  ensure_parent_dir(a.out);
  const std::string csv = a.out + ".csv", pgm = a.out + ".pgm", man = a.out + ".manifest.json";
  sik::write_image_csv(csv, img);
  const sik::PgmScale scale = sik::write_pgm(pgm, img);

  ordered_json manifest{
      {"command", "phantom"},
      {"version", std::string(sik::kVersion)},
      {"timestamp", iso_timestamp()},
      {"config", {{"size", a.size}, {"variant", a.variant}}},
      {"outputs", {{"csv", csv}, {"pgm", pgm}}},
      {"pgm_scale", {{"lo", scale.lo}, {"hi", scale.hi}}},
  };
  write_manifest(man, manifest);

  std::cout << "csv=" << csv << "\npgm=" << pgm << "\nmanifest=" << man << "\n";
  return kExitOk;
}

struct DegradeArgs {
  std::string in, out;
  double sigma = 1e-2;
  int kernel = 5;
  std::string boundary = "circular";
  std::uint64_t seed = 7;
};

int cmd_degrade(const DegradeArgs& a) {
  const sik::ImageGrid img = sik::read_image_any(a.in);
  const sik::DegradationSpec spec{a.kernel, boundary_from_string(a.boundary), a.sigma, a.seed};
  const sik::ImageGrid out = sik::degrade(img, spec);

  ensure_parent_dir(a.out);
  const std::string csv = a.out + ".csv", pgm = a.out + ".pgm", man = a.out + ".manifest.json";
  sik::write_image_csv(csv, out);
  const sik::PgmScale scale = sik::write_pgm(pgm, out);

  ordered_json manifest{
      {"command", "degrade"},
      {"version", std::string(sik::kVersion)},
      {"timestamp", iso_timestamp()},
      {"inputs", {{"in", a.in}}},
      {"config",
       {{"sigma", a.sigma}, {"kernel", a.kernel}, {"boundary", a.boundary}, {"seed", a.seed}}},
      {"outputs", {{"csv", csv}, {"pgm", pgm}}},
      {"pgm_scale", {{"lo", scale.lo}, {"hi", scale.hi}}},
  };
  write_manifest(man, manifest);

  std::cout << "csv=" << csv << "\npgm=" << pgm << "\nmanifest=" << man << "\n";
  return kExitOk;
}

struct RestoreArgs {
  std::string in, truth, out;
  std::string strategy = "ista";
  double beta = 0.0, gamma = 0.0, delta = 0.0, p = 0.5;
  bool gamma_given = false, delta_given = false, p_given = false;
  int iters = 100;
  double tol = 0.0;
  int kernel = 5;
  std::string boundary = "circular";
  int levels = 2;
  std::string init = "zero";
  std::uint64_t seed = 1;
  double step_safety = 1.01;
  int trace_stride = 1;
  bool pin_timings = false;
};

int cmd_restore(const RestoreArgs& a) {
  const auto strategy = sik::strategy_from_string(a.strategy);
  if (!strategy) throw std::invalid_argument("unknown strategy '" + a.strategy + "'");

  // Hyperparameter flags must match the strategy: required ones present,
  // inapplicable ones absent.
  if (sik::uses_gamma(*strategy) && !a.gamma_given) {
    throw std::invalid_argument("--gamma is required for strategy " + a.strategy);
  }
  if (!sik::uses_gamma(*strategy) && a.gamma_given) {
    throw std::invalid_argument("--gamma does not apply to strategy " + a.strategy);
  }
  if (sik::uses_delta(*strategy) && !a.delta_given) {
    throw std::invalid_argument("--delta is required for strategy " + a.strategy);
  }
  if (!sik::uses_delta(*strategy) && a.delta_given) {
    throw std::invalid_argument("--delta does not apply to strategy " + a.strategy);
  }
  if (!sik::uses_p(*strategy) && a.p_given) {
    throw std::invalid_argument("--p does not apply to strategy " + a.strategy);
  }

  const sik::ImageGrid degraded = sik::read_image_any(a.in);
  const int h = degraded.height, w = degraded.width;

  sik::SolverConfig cfg;
  cfg.strategy = *strategy;
  cfg.beta = a.beta;
  if (a.gamma_given) cfg.gamma = a.gamma;
  if (a.delta_given) cfg.delta = a.delta;
  cfg.p = a.p;
  cfg.max_iters = a.iters;
  cfg.rel_change_tol = a.tol;
  cfg.step_safety = a.step_safety;
  cfg.seed = a.seed;
  cfg.trace_stride = a.trace_stride;
  sik::validate(cfg);

  const sik::LinearOperator blur =
      sik::make_blur_operator(h, w, a.kernel, boundary_from_string(a.boundary));
  const sik::LinearOperator synthesis = sik::make_haar_operator(h, w, a.levels);
  const sik::LinearOperator A = sik::compose(blur, synthesis);
  const sik::SpectralBound bound = sik::estimate_spectral_bound(A, 1e-9, 10000, a.seed);
  const sik::Problem problem{A, degraded.pixels, bound.value};

  const sik::SignalVector x0 =
      a.init == "atb" ? A.adjoint(degraded.pixels) : sik::SignalVector(A.in_dim(), 0.0);

  sik::ProgressMetric metric;
  sik::ImageGrid truth;
  if (!a.truth.empty()) {
    truth = sik::read_image_any(a.truth);
    if (truth.height != h || truth.width != w) {
      throw std::invalid_argument("truth dimensions do not match the degraded image");
    }
    metric = [&](const sik::SignalVector& x) {
      return sik::mae(sik::restore_image(x, synthesis, h, w), truth);
    };
  }

  const sik::SolveResult result = sik::solve(problem, cfg, x0, metric);
  const sik::ImageGrid restored = sik::restore_image(result.x_final, synthesis, h, w);

  ensure_parent_dir(a.out);
  const std::string csv = a.out + ".csv", pgm = a.out + ".pgm";
  const std::string trace_csv = a.out + ".trace.csv", profiles_csv = a.out + ".profiles.csv";
  const std::string man = a.out + ".manifest.json";
  sik::write_image_csv(csv, restored);
  const sik::PgmScale scale = sik::write_pgm(pgm, restored);
  sik::write_trace_csv(trace_csv, result.trace, a.pin_timings);
  sik::write_profiles_csv(profiles_csv, sik::extract_profiles(restored));

  // Final cost under the strategy's own objective, defined even for a
  // zero-iteration run.
  const sik::WeightVector w_final = sik::weights_for(result.x_final, cfg);
  const double cost_gamma = sik::uses_gamma(cfg.strategy) ? cfg.gamma : 0.0;
  const sik::CostBreakdown cost =
      sik::evaluate_cost(result.x_final, w_final, problem, cfg.beta, cost_gamma);

  ordered_json config_json{
      {"strategy", a.strategy}, {"beta", a.beta},
      {"iters", a.iters},       {"tol", a.tol},
      {"kernel", a.kernel},     {"boundary", a.boundary},
      {"levels", a.levels},     {"init", a.init},
      {"seed", a.seed},         {"step_safety", a.step_safety},
      {"trace_stride", a.trace_stride},
  };
  if (a.gamma_given) config_json["gamma"] = a.gamma;
  if (a.delta_given) config_json["delta"] = a.delta;
  if (sik::uses_p(*strategy)) config_json["p"] = a.p;

  ordered_json manifest{
      {"command", "restore"},
      {"version", std::string(sik::kVersion)},
      {"timestamp", iso_timestamp()},
      {"inputs", {{"in", a.in}, {"truth", a.truth}}},
      {"config", config_json},
      {"outputs",
       {{"csv", csv}, {"pgm", pgm}, {"trace", trace_csv}, {"profiles", profiles_csv}}},
      {"pgm_scale", {{"lo", scale.lo}, {"hi", scale.hi}}},
      {"lipschitz", result.lipschitz},
      {"diverged", result.diverged},
  };
  write_manifest(man, manifest);

  std::cout << "final_cost=" << sik::format_double(cost.total) << "\n"
            << "final_fidelity=" << sik::format_double(cost.fidelity) << "\n";
  if (metric) {
    std::cout << "final_mae=" << sik::format_double(sik::mae(restored, truth)) << "\n";
  }
  std::cout << "iters_run=" << (result.trace.empty() ? 0 : result.trace.back().iter) << "\n"
            << "diverged=" << (result.diverged ? 1 : 0) << "\n"
            << "lipschitz=" << sik::format_double(result.lipschitz) << "\n"
            << "csv=" << csv << "\nmanifest=" << man << "\n";
  return result.diverged ? kExitDiverged : kExitOk;
}

struct SweepArgs {
  std::string config, out;
  int workers = 0;
  bool workers_given = false;
  bool pin_timings = false;
};

int cmd_sweep(const SweepArgs& a) {
  sik::SweepFileConfig cfg = sik::parse_sweep_config(a.config);
  if (a.pin_timings) cfg.pin_timings = true;
  const int workers = resolve_workers(a.workers, a.workers_given, cfg.workers);

  const sik::ExperimentSetup setup = sik::make_experiment(cfg);
  const sik::ExperimentResult result =
      sik::run_sweep(setup.problem, setup.grid, setup.truth, workers);

  fs::create_directories(fs::path(a.out) / "traces");
  const std::string results_csv = (fs::path(a.out) / "results.csv").string();
  const std::string man = (fs::path(a.out) / "manifest.json").string();
  sik::write_results_csv(results_csv, result, cfg.pin_timings);

  ordered_json trace_files = ordered_json::array();
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "cell_%04zu.csv", i);
    const std::string path = (fs::path(a.out) / "traces" / name).string();
    sik::write_trace_csv(path, result.cells[i].trace, cfg.pin_timings);
    trace_files.push_back(path);
  }

  ordered_json strategies_json = ordered_json::array();
  for (sik::Strategy s : cfg.strategies) strategies_json.push_back(std::string(sik::to_string(s)));
  ordered_json manifest{
      {"command", "sweep"},
      {"version", std::string(sik::kVersion)},
      {"timestamp", iso_timestamp()},
      {"inputs", {{"config", a.config}}},
      {"config",
       {{"phantom_size", cfg.phantom_size},
        {"phantom_variant", cfg.phantom_variant == sik::PhantomVariant::modified ? "modified" : "standard"},
        {"sigma", cfg.sigma},
        {"kernel", cfg.kernel},
        {"boundary", std::string(sik::to_string(cfg.boundary))},
        {"noise_seed", cfg.noise_seed},
        {"levels", cfg.levels},
        {"init", cfg.init},
        {"iters", cfg.iters},
        {"p", cfg.p},
        {"workers", workers},
        {"strategies", strategies_json},
        {"beta", cfg.beta},
        {"gamma", cfg.gamma},
        {"delta", cfg.delta},
        {"solver_seed", cfg.solver_seed},
        {"step_safety", cfg.step_safety},
        {"pin_timings", cfg.pin_timings},
        {"trace_stride", cfg.trace_stride}}},
      {"outputs", {{"results", results_csv}, {"traces", trace_files}}},
      {"cells", result.cells.size()},
  };
  write_manifest(man, manifest);

  for (sik::Strategy s : cfg.strategies) {
    const sik::CellResult* best = sik::best_cell(result, s);
    const std::string name(sik::to_string(s));
    if (!best) {
      std::cout << "best_" << name << "=none\n";
      continue;
    }
    std::cout << "best_" << name << "_mae=" << sik::format_double(best->final_mae) << "\n"
              << "best_" << name << "_beta=" << sik::format_double(best->beta) << "\n";
    if (best->gamma) {
      std::cout << "best_" << name << "_gamma=" << sik::format_double(*best->gamma) << "\n";
    }
    if (best->delta) {
      std::cout << "best_" << name << "_delta=" << sik::format_double(*best->delta) << "\n";
    }
  }
  std::cout << "results=" << results_csv << "\nmanifest=" << man << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sik: sparse inverse problem toolkit (deblurring via shrinkage-thresholding)"};
  app.set_version_flag("--version", std::string(sik::kVersion));
  app.require_subcommand(1);

  PhantomArgs pa;
  auto* phantom = app.add_subcommand("phantom", "Render a Shepp-Logan head phantom");
  phantom->add_option("--size", pa.size, "Image side length (>= 16)")->required();
  phantom->add_option("--variant", pa.variant, "standard|modified")
      ->check(CLI::IsMember({"standard", "modified"}));
  phantom->add_option("--out", pa.out, "Output prefix")->required();

  DegradeArgs da;
  auto* degrade = app.add_subcommand("degrade", "Blur an image and add Gaussian noise");
  degrade->add_option("--in", da.in, "Input image (.csv or .pgm)")->required();
  degrade->add_option("--sigma", da.sigma, "Noise standard deviation");
  degrade->add_option("--kernel", da.kernel, "Uniform kernel size (odd)");
  degrade->add_option("--boundary", da.boundary, "zero_pad|replicate|circular");
  degrade->add_option("--seed", da.seed, "Noise seed");
  degrade->add_option("--out", da.out, "Output prefix")->required();

  RestoreArgs ra;
  auto* restore = app.add_subcommand("restore", "Deblur via shrinkage-thresholding");
  restore->add_option("--in", ra.in, "Degraded image (.csv or .pgm)")->required();
  restore->add_option("--truth", ra.truth, "Ground truth for MAE reporting");
  restore->add_option("--strategy", ra.strategy, "ista|eriwsta|irl1|wlp|nw4")->required();
  restore->add_option("--beta", ra.beta, "Sparsity tradeoff (> 0)")->required();
  auto* gamma_opt = restore->add_option("--gamma", ra.gamma, "Entropy weight (eriwsta)");
  auto* delta_opt = restore->add_option("--delta", ra.delta, "Smoothing (irl1/wlp/nw4)");
  auto* p_opt = restore->add_option("--p", ra.p, "Exponent in (0,1) (wlp/nw4)");
  restore->add_option("--iters", ra.iters, "Iteration budget");
  restore->add_option("--tol", ra.tol, "Relative-change stop (0 disables)");
  restore->add_option("--kernel", ra.kernel, "Blur kernel size used by the forward model");
  restore->add_option("--boundary", ra.boundary, "zero_pad|replicate|circular");
  restore->add_option("--levels", ra.levels, "Haar decomposition levels");
  restore->add_option("--init", ra.init, "zero|atb")->check(CLI::IsMember({"zero", "atb"}));
  restore->add_option("--seed", ra.seed, "Solver seed (power iteration start)");
  restore->add_option("--step-safety", ra.step_safety, "Margin on the spectral bound (>= 1)");
  restore->add_option("--trace-stride", ra.trace_stride, "Record every k-th iteration");
  restore->add_flag("--pin-timings", ra.pin_timings, "Write wall_ms as 0 for reproducible files");
  restore->add_option("--out", ra.out, "Output prefix")->required();

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Hyperparameter sweep from a config file");
  sweep->add_option("--config", sa.config, "key = value config file")->required();
  auto* workers_opt = sweep->add_option("--workers", sa.workers, "Worker cap (0 = hardware)");
  sweep->add_flag("--pin-timings", sa.pin_timings, "Write wall_ms as 0 for reproducible files");
  sweep->add_option("--out", sa.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kExitUsage;
  }

  ra.gamma_given = gamma_opt->count() > 0;
  ra.delta_given = delta_opt->count() > 0;
  ra.p_given = p_opt->count() > 0;
  sa.workers_given = workers_opt->count() > 0;

  try {
    if (phantom->parsed()) return cmd_phantom(pa);
    if (degrade->parsed()) return cmd_degrade(da);
    if (restore->parsed()) return cmd_restore(ra);
    if (sweep->parsed()) return cmd_sweep(sa);
  } catch (const sik::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const sik::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const sik::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
