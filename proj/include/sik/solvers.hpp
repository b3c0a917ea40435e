// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "sik/common.hpp"
#include "sik/operators.hpp"

namespace sik {

/// Per-coordinate weighting rule applied between shrinkage steps.
///
/// ista keeps unit weights. eriwsta solves the entropy-regularized weight
/// subproblem exactly (a softmax over coefficient magnitudes). irl1, wlp and
/// nw4 are classic reweighting rules; their weights are unnormalized and can
/// span many orders of magnitude.
enum class Strategy { ista, eriwsta, irl1, wlp, nw4 };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::ista: return "ista";
    case Strategy::eriwsta: return "eriwsta";
    case Strategy::irl1: return "irl1";
    case Strategy::wlp: return "wlp";
    case Strategy::nw4: return "nw4";
  }
  return "?";
}

inline std::optional<Strategy> strategy_from_string(std::string_view name) {
  if (name == "ista") return Strategy::ista;
  if (name == "eriwsta") return Strategy::eriwsta;
  if (name == "irl1") return Strategy::irl1;
  if (name == "wlp") return Strategy::wlp;
  if (name == "nw4") return Strategy::nw4;
  return std::nullopt;
}

inline bool uses_gamma(Strategy s) { return s == Strategy::eriwsta; }
inline bool uses_delta(Strategy s) {
  return s == Strategy::irl1 || s == Strategy::wlp || s == Strategy::nw4;
}
inline bool uses_p(Strategy s) { return s == Strategy::wlp || s == Strategy::nw4; }

/// Nonnegative per-coordinate penalty weights. normalized marks weights that
/// live on the probability simplex (sum one), as eriwsta's do.
struct WeightVector {
  std::vector<double> weights;
  bool normalized = false;
};

struct SolverConfig {
  Strategy strategy = Strategy::ista;
  double beta = 1e-3;           // sparsity tradeoff
  double gamma = 1e-2;          // entropy weight (eriwsta)
  double delta = 1e-3;          // smoothing (irl1/wlp/nw4)
  double p = 0.5;               // exponent in (0,1) (wlp/nw4)
  int max_iters = 100;
  double rel_change_tol = 0.0;  // 0 disables early stopping
  double step_safety = 1.01;    // multiplies the spectral bound to get L
  std::uint64_t seed = 0;       // drives the power-iteration start
  int trace_stride = 1;
};

inline void validate(const SolverConfig& c) {
  if (!(c.beta > 0.0)) throw std::invalid_argument("SolverConfig: beta must be > 0");
  if (uses_gamma(c.strategy) && !(c.gamma > 0.0)) {
    throw std::invalid_argument("SolverConfig: gamma must be > 0 for eriwsta");
  }
  if (uses_delta(c.strategy) && !(c.delta > 0.0)) {
    throw std::invalid_argument("SolverConfig: delta must be > 0 for irl1/wlp/nw4");
  }
  if (uses_p(c.strategy) && !(c.p > 0.0 && c.p < 1.0)) {
    throw std::invalid_argument("SolverConfig: p must be in (0,1) for wlp/nw4");
  }
  if (c.max_iters < 0) throw std::invalid_argument("SolverConfig: max_iters must be >= 0");
  if (c.rel_change_tol < 0.0) throw std::invalid_argument("SolverConfig: rel_change_tol must be >= 0");
  if (!(c.step_safety >= 1.0)) throw std::invalid_argument("SolverConfig: step_safety must be >= 1");
  if (c.trace_stride < 1) throw std::invalid_argument("SolverConfig: trace_stride must be >= 1");
}

struct Problem {
  LinearOperator A;
  SignalVector b;
  // Optional precomputed lambda_max(A^T A) estimate; solve() applies the
  // safety margin on top. When absent, solve() runs power iteration.
  std::optional<double> lambda_max_hint;
};

struct TraceRecord {
  int iter = 0;
  double cost = 0.0;
  double fidelity = 0.0;
  std::optional<double> mae;
  double wall_ms = 0.0;  // elapsed since solve start
};
using IterationTrace = std::vector<TraceRecord>;

struct CostBreakdown {
  double total = 0.0;
  double fidelity = 0.0;
  double penalty = 0.0;
};

/// Elementwise prox of theta_i |x_i|: out_i = sign(v_i) * max(|v_i| - theta_i, 0).
inline SignalVector soft_threshold(const SignalVector& v, const std::vector<double>& thresholds) {
  if (thresholds.size() != v.size()) {
    throw std::invalid_argument("soft_threshold: threshold length mismatch");
  }
  SignalVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double th = thresholds[i];
    if (th < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
    const double mag = std::abs(v[i]) - th;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

/// Exact minimizer of sum_i w_i |x_i| + gamma * sum_i w_i ln w_i over the
/// probability simplex: w_i = exp(-|x_i|/gamma) / sum_l exp(-|x_l|/gamma).
///
/// Shifting by min |x_i| keeps every exponent <= 0, so the result is finite
/// for magnitudes up to 1e300 and gamma down to 1e-12.
inline WeightVector entropy_weights(const SignalVector& x, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("entropy_weights: gamma must be > 0");
  if (x.empty()) throw std::invalid_argument("entropy_weights: empty input");
  double m = std::abs(x[0]);
  for (double v : x) m = std::min(m, std::abs(v));
  WeightVector w;
  w.weights.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    w.weights[i] = std::exp(-(std::abs(x[i]) - m) / gamma);
  }
  const double s = sum(w.weights);  // >= 1, the shifted minimum contributes exp(0)
  for (double& v : w.weights) v /= s;
  w.normalized = true;
  return w;
}

/// Reweighting rules of the classic variants. Returned unnormalized.
inline WeightVector baseline_weights(const SignalVector& x, Strategy strategy, double delta,
                                     double p) {
  WeightVector w;
  w.weights.resize(x.size());
  w.normalized = false;
  switch (strategy) {
    case Strategy::ista:
      std::fill(w.weights.begin(), w.weights.end(), 1.0);
      return w;
    case Strategy::irl1:
      if (!(delta > 0.0)) throw std::invalid_argument("baseline_weights: delta must be > 0");
      for (std::size_t i = 0; i < x.size(); ++i) w.weights[i] = 1.0 / (std::abs(x[i]) + delta);
      return w;
    case Strategy::wlp:
      if (!(delta > 0.0)) throw std::invalid_argument("baseline_weights: delta must be > 0");
      if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("baseline_weights: p must be in (0,1)");
      for (std::size_t i = 0; i < x.size(); ++i) {
        w.weights[i] = std::pow(std::abs(x[i]) + delta, p - 1.0);
      }
      return w;
    case Strategy::nw4:
      if (!(delta > 0.0)) throw std::invalid_argument("baseline_weights: delta must be > 0");
      if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("baseline_weights: p must be in (0,1)");
      for (std::size_t i = 0; i < x.size(); ++i) {
        w.weights[i] = 1.0 / (1.0 + std::pow(std::abs(x[i]) + delta, p + 1.0));
      }
      return w;
    default:
      throw std::invalid_argument("baseline_weights: unknown strategy");
  }
}

/// Weight update for one iteration under the given configuration.
inline WeightVector weights_for(const SignalVector& x, const SolverConfig& c) {
  if (c.strategy == Strategy::eriwsta) return entropy_weights(x, c.gamma);
  return baseline_weights(x, c.strategy, c.delta, c.p);
}

/// fidelity = 0.5 ||Ax-b||^2; penalty = sum w_i |x_i| + gamma * sum w_i ln w_i;
/// total = fidelity + beta * penalty. Pass gamma = 0 for strategies whose
/// objective carries no entropy term. w_i ln w_i is taken as 0 at w_i = 0.
inline CostBreakdown evaluate_cost(const SignalVector& x, const WeightVector& w,
                                   const Problem& problem, double beta, double gamma) {
  if (x.size() != problem.A.in_dim() || problem.b.size() != problem.A.out_dim()) {
    throw std::invalid_argument("evaluate_cost: dimension mismatch");
  }
  if (w.weights.size() != x.size()) {
    throw std::invalid_argument("evaluate_cost: weight length mismatch");
  }
  SignalVector r = problem.A.forward(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= problem.b[i];
  const double fidelity = 0.5 * dot(r, r);

  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) terms[i] = w.weights[i] * std::abs(x[i]);
  double penalty = sum(terms);
  if (gamma != 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double wi = w.weights[i];
      terms[i] = wi > 0.0 ? wi * std::log(wi) : 0.0;
    }
    penalty += gamma * sum(terms);
  }
  return {fidelity + beta * penalty, fidelity, penalty};
}

/// One proximal-gradient step: gradient descent on 0.5||Ax-b||^2 with step
/// 1/L followed by weighted soft-thresholding at beta * w_i / L. Exactly
/// minimizes the separable quadratic majorizer, so the weighted objective
/// cannot increase when L dominates lambda_max(A^T A).
inline SignalVector iwsta_step(const SignalVector& x, const WeightVector& w,
                               const Problem& problem, double L, double beta) {
  if (!(L > 0.0)) throw std::invalid_argument("iwsta_step: L must be > 0");
  if (x.size() != problem.A.in_dim() || w.weights.size() != x.size()) {
    throw std::invalid_argument("iwsta_step: dimension mismatch");
  }
  SignalVector r = problem.A.forward(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= problem.b[i];
  SignalVector g = problem.A.adjoint(r);
  SignalVector v(x.size());
  std::vector<double> th(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    v[i] = x[i] - g[i] / L;
    th[i] = beta * w.weights[i] / L;
  }
  return soft_threshold(v, th);
}

/// Optional per-iteration quality metric (the harness plugs in image-domain
/// MAE against the ground truth).
using ProgressMetric = std::function<double(const SignalVector&)>;

struct SolveResult {
  SignalVector x_final;
  IterationTrace trace;
  bool diverged = false;
  double lipschitz = 0.0;  // L actually used (margin included)
};

/// Alternating loop: update weights from the current iterate, take one
/// shrinkage step, log cost under the strategy's own objective. Stops early
/// on small relative change when enabled; a non-finite iterate or cost marks
/// the run diverged and returns the trace collected so far.
inline SolveResult solve(const Problem& problem, const SolverConfig& config,
                         const SignalVector& x0, const ProgressMetric& metric = {}) {
  validate(config);
  if (x0.size() != problem.A.in_dim()) {
    throw std::invalid_argument("solve: x0 length must equal A.in_dim");
  }

  double bound = problem.lambda_max_hint
                     ? *problem.lambda_max_hint
                     : estimate_spectral_bound(problem.A, 1e-9, 10000, config.seed).value;
  double L = bound * config.step_safety;
  if (!(L > 0.0)) L = 1.0;  // zero operator: any positive L majorizes

  SolveResult result;
  result.lipschitz = L;
  SignalVector x = x0;
  const double cost_gamma = uses_gamma(config.strategy) ? config.gamma : 0.0;
  const auto t0 = std::chrono::steady_clock::now();

  for (int k = 1; k <= config.max_iters; ++k) {
    const WeightVector w = weights_for(x, config);
    SignalVector x_next = iwsta_step(x, w, problem, L, config.beta);
    const CostBreakdown cost = evaluate_cost(x_next, w, problem, config.beta, cost_gamma);
    if (!all_finite(x_next) || !std::isfinite(cost.total)) {
      result.diverged = true;
      break;
    }

    double rel_change = std::numeric_limits<double>::infinity();
    if (config.rel_change_tol > 0.0) {
      SignalVector d(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = x_next[i] - x[i];
      rel_change = norm2(d) / std::max(norm2(x), std::numeric_limits<double>::epsilon());
    }
    const bool stopping = (config.rel_change_tol > 0.0 && rel_change < config.rel_change_tol);

    if (k % config.trace_stride == 0 || k == config.max_iters || stopping) {
      TraceRecord rec;
      rec.iter = k;
      rec.cost = cost.total;
      rec.fidelity = cost.fidelity;
      if (metric) rec.mae = metric(x_next);
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
      result.trace.push_back(rec);
    }
    x = std::move(x_next);
    if (stopping) break;
  }
  result.x_final = std::move(x);
  return result;
}

}  // namespace sik
