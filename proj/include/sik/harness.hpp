// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include <atomic>
#include <optional>
#include <thread>
#include <tuple>

#include "sik/common.hpp"
#include "sik/operators.hpp"
#include "sik/simulation.hpp"
#include "sik/solvers.hpp"

namespace sik {

/// Mean absolute error between two images of the same shape.
inline double mae(const ImageGrid& restored, const ImageGrid& truth) {
  if (restored.height != truth.height || restored.width != truth.width) {
    throw std::invalid_argument("mae: dimension mismatch");
  }
  std::vector<double> diffs(restored.pixels.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    diffs[i] = std::abs(restored.pixels[i] - truth.pixels[i]);
  }
  return sum(diffs) / static_cast<double>(diffs.size());
}

/// Synthesizes an image from wavelet coefficients. All quality metrics in
/// solve traces are taken in the image domain after this step.
inline ImageGrid restore_image(const SignalVector& coeffs, const LinearOperator& synthesis,
                               int height, int width) {
  if (synthesis.out_dim() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw std::invalid_argument("restore_image: dimension mismatch");
  }
  return ImageGrid{height, width, synthesis.forward(coeffs)};
}

struct SweepGrid {
  std::vector<Strategy> strategies;
  std::vector<double> beta_values;
  std::vector<double> gamma_values;  // eriwsta axis
  std::vector<double> delta_values;  // irl1/wlp/nw4 axis
  int iters_per_cell = 30;
  double p = 0.5;
};

inline void validate(const SweepGrid& g) {
  auto positive = [](const std::vector<double>& v) {
    for (double x : v) {
      if (!(x > 0.0)) return false;
    }
    return !v.empty();
  };
  if (g.strategies.empty()) throw std::invalid_argument("SweepGrid: strategies empty");
  if (!positive(g.beta_values)) throw std::invalid_argument("SweepGrid: beta axis empty or nonpositive");
  if (!positive(g.gamma_values)) throw std::invalid_argument("SweepGrid: gamma axis empty or nonpositive");
  if (!positive(g.delta_values)) throw std::invalid_argument("SweepGrid: delta axis empty or nonpositive");
  if (g.iters_per_cell < 0) throw std::invalid_argument("SweepGrid: iters_per_cell must be >= 0");
  if (!(g.p > 0.0 && g.p < 1.0)) throw std::invalid_argument("SweepGrid: p must be in (0,1)");
}

/// Everything the cells share: the forward model, the observation, the
/// synthesis map for image-domain metrics, and the common start point.
struct SweepProblem {
  LinearOperator A;          // blur o synthesis
  LinearOperator synthesis;  // wavelet synthesis, for metrics and output images
  SignalVector b;            // degraded image, flattened row-major
  int height = 0;
  int width = 0;
  SignalVector x0;
  std::optional<double> lambda_max_hint;
  double step_safety = 1.01;
  std::uint64_t solver_seed = 0;
};

struct CellResult {
  Strategy strategy = Strategy::ista;
  double beta = 0.0;
  std::optional<double> gamma;
  std::optional<double> delta;
  double final_mae = 0.0;
  bool diverged = false;
  double wall_ms = 0.0;
  IterationTrace trace;
  SignalVector x_final;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
};

namespace detail {

inline std::vector<CellResult> build_cells(const SweepGrid& grid) {
  std::vector<CellResult> cells;
  for (Strategy s : grid.strategies) {
    for (double beta : grid.beta_values) {
      if (uses_gamma(s)) {
        for (double gamma : grid.gamma_values) {
          CellResult c;
          c.strategy = s;
          c.beta = beta;
          c.gamma = gamma;
          cells.push_back(c);
        }
      } else if (uses_delta(s)) {
        for (double delta : grid.delta_values) {
          CellResult c;
          c.strategy = s;
          c.beta = beta;
          c.delta = delta;
          cells.push_back(c);
        }
      } else {
        CellResult c;
        c.strategy = s;
        c.beta = beta;
        cells.push_back(c);
      }
    }
  }
  auto key = [](const CellResult& c) {
    return std::make_tuple(static_cast<int>(c.strategy), c.beta, c.gamma.value_or(0.0),
                           c.delta.value_or(0.0));
  };
  std::sort(cells.begin(), cells.end(),
            [&](const CellResult& a, const CellResult& b) { return key(a) < key(b); });
  return cells;
}

}  // namespace detail

/// Runs one solve per cell from the shared start point and records the final
/// image-domain MAE plus the full trace. Cells are independent; `workers`
/// bounds the thread count (0 picks hardware concurrency). Results are
/// ordered by (strategy, beta, gamma, delta) regardless of scheduling, and a
/// diverged cell is recorded rather than fatal.
inline ExperimentResult run_sweep(const SweepProblem& problem, const SweepGrid& grid,
                                  const ImageGrid& truth, int workers = 0) {
  validate(grid);
  if (truth.height != problem.height || truth.width != problem.width) {
    throw std::invalid_argument("run_sweep: truth dimensions mismatch");
  }

  ExperimentResult result;
  result.cells = detail::build_cells(grid);

  auto run_cell = [&](CellResult& cell) {
    SolverConfig cfg;
    cfg.strategy = cell.strategy;
    cfg.beta = cell.beta;
    if (cell.gamma) cfg.gamma = *cell.gamma;
    if (cell.delta) cfg.delta = *cell.delta;
    cfg.p = grid.p;
    cfg.max_iters = grid.iters_per_cell;
    cfg.rel_change_tol = 0.0;  // fixed iteration budget
    cfg.step_safety = problem.step_safety;
    cfg.seed = problem.solver_seed;

    Problem p{problem.A, problem.b, problem.lambda_max_hint};
    ProgressMetric metric = [&](const SignalVector& x) {
      return mae(restore_image(x, problem.synthesis, problem.height, problem.width), truth);
    };
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult sr = solve(p, cfg, problem.x0, metric);
    cell.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0).count();
    cell.diverged = sr.diverged;
    cell.trace = std::move(sr.trace);
    cell.x_final = std::move(sr.x_final);
    cell.final_mae =
        mae(restore_image(cell.x_final, problem.synthesis, problem.height, problem.width), truth);
  };

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(result.cells.size())));

  if (n_workers == 1) {
    for (auto& cell : result.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= result.cells.size()) return;
          run_cell(result.cells[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return result;
}

/// Best (lowest final MAE) non-diverged cell of a strategy, or nullptr.
inline const CellResult* best_cell(const ExperimentResult& result, Strategy s) {
  const CellResult* best = nullptr;
  for (const auto& c : result.cells) {
    if (c.strategy != s || c.diverged) continue;
    if (!best || c.final_mae < best->final_mae) best = &c;
  }
  return best;
}

struct Profiles {
  std::vector<double> central_row;
  std::vector<double> central_col;
};

/// Central row floor(h/2) and central column floor(w/2) of an image.
inline Profiles extract_profiles(const ImageGrid& img) {
  Profiles p;
  const int ci = img.height / 2;
  const int cj = img.width / 2;
  p.central_row.resize(static_cast<std::size_t>(img.width));
  p.central_col.resize(static_cast<std::size_t>(img.height));
  for (int j = 0; j < img.width; ++j) {
    p.central_row[static_cast<std::size_t>(j)] = img.pixels[static_cast<std::size_t>(ci) * img.width + j];
  }
  for (int i = 0; i < img.height; ++i) {
    p.central_col[static_cast<std::size_t>(i)] = img.pixels[static_cast<std::size_t>(i) * img.width + cj];
  }
  return p;
}

}  // namespace sik
