// SPDX-License-Identifier: Apache-2.0
//
// Relay power allocation: unimodal line search, exact weighted-sum and
// approximate min-max solves, threshold-based node silencing, and Pareto
// frontier tracing (weighted sum and epsilon-constraint).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "relayec/capacity.hpp"
#include "relayec/channel.hpp"
#include "relayec/link.hpp"

namespace relayec {

struct LineSearchResult {
  double argmax = 0.0;
  double max = 0.0;
  int iterations = 0;
  std::size_t evals = 0;
};

struct LineSearchOptions {
  double tol = 1e-8;
  /// Keep shrinking while the central-difference slope at the midpoint
  /// exceeds this in magnitude (infinity disables the check).
  double gradient_tol = std::numeric_limits<double>::infinity();
};

namespace detail {

inline constexpr double kInvPhi = 0.6180339887498948482;  // 1/golden ratio

// Golden-section search on [lo, hi] assuming f is unimodal there.
template <class F>
LineSearchResult golden_section(F&& f, double lo, double hi, const LineSearchOptions& opt, LineSearchResult acc) {
  const double floor_width = 1e-14 * std::max(1.0, std::abs(hi) + std::abs(lo));
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  acc.evals += 2;
  for (;;) {
    const double width = hi - lo;
    if (width <= opt.tol || width <= floor_width) {
      if (std::isinf(opt.gradient_tol) || width <= floor_width) break;
      const double slope = (f2 - f1) / (x2 - x1);
      if (std::abs(slope) <= opt.gradient_tol) break;
    }
    ++acc.iterations;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
    ++acc.evals;
  }
  acc.iterations = std::max(acc.iterations, 1);
  acc.argmax = 0.5 * (lo + hi);
  acc.max = f(acc.argmax);
  ++acc.evals;
  return acc;
}

}  // namespace detail

/// Golden-section maximization of a unimodal f on [lo, hi]. Stops when the
/// bracket is no wider than `tol` and returns its midpoint with f there.
template <class F>
LineSearchResult maximize_unimodal(F&& f, double lo, double hi, const LineSearchOptions& opt) {
  if (!(lo < hi)) throw std::domain_error("maximize_unimodal: need lo < hi");
  if (!(opt.tol > 0.0)) throw std::domain_error("maximize_unimodal: tol must be > 0");
  return detail::golden_section(f, lo, hi, opt, LineSearchResult{});
}

template <class F>
LineSearchResult maximize_unimodal(F&& f, double lo, double hi, double tol) {
  return maximize_unimodal(f, lo, hi, LineSearchOptions{tol});
}

/// Same search, but the bracket is first located by stepping outward from
/// `start` with doubling steps. A good start shrinks the initial bracket; the
/// converged answer does not depend on it for unimodal f.
template <class F>
LineSearchResult maximize_unimodal_from(F&& f, double lo, double hi, double start, const LineSearchOptions& opt) {
  if (!(lo < hi)) throw std::domain_error("maximize_unimodal: need lo < hi");
  if (!(opt.tol > 0.0)) throw std::domain_error("maximize_unimodal: tol must be > 0");
  start = std::clamp(start, lo, hi);
  LineSearchResult acc;
  double step = (hi - lo) / 64.0;
  double x0 = start;
  double f0 = f(x0);
  double xr = std::min(hi, x0 + step);
  double fr = f(xr);
  acc.evals += 2;
  double dir = 1.0;
  double prev = x0;
  double cur = xr;
  double fcur = fr;
  if (!(fr > f0)) {
    // Uphill is to the left, or the start already sits on the peak.
    const double xl = std::max(lo, x0 - step);
    const double fl = f(xl);
    ++acc.evals;
    if (!(fl > f0)) return detail::golden_section(f, xl, xr, opt, acc);
    dir = -1.0;
    cur = xl;
    fcur = fl;
  }
  // Invariant: `prev` is behind `cur` in direction dir and f(cur) > f(prev).
  for (;;) {
    const double edge = dir > 0 ? hi : lo;
    if (cur == edge) return detail::golden_section(f, std::min(prev, cur), std::max(prev, cur), opt, acc);
    step *= 2.0;
    const double next = dir > 0 ? std::min(hi, cur + step) : std::max(lo, cur - step);
    const double fnext = f(next);
    ++acc.evals;
    if (!(fnext > fcur)) {
      return detail::golden_section(f, std::min(prev, next), std::max(prev, next), opt, acc);
    }
    prev = cur;
    cur = next;
    fcur = fnext;
  }
}

enum class SolveMethod { Exact, Approximate, EpsilonConstraint };
enum class Silenced { None, A, B };

struct SolveReport {
  PowerAllocation alloc;
  EcPoint ec;
  SolveMethod method = SolveMethod::Exact;
  Silenced silenced = Silenced::None;
  /// Both nodes fall below their thresholds; the unsilenced solution is kept.
  bool degenerate = false;
  /// The runtime unimodality check failed and a grid scan was used.
  bool grid_fallback = false;
  double warm_start = 0.0;
  int iterations = 0;
  /// Objective function calls made by the line search.
  std::size_t objective_evals = 0;
  /// Per-sample term evaluations behind those calls.
  std::size_t sample_evals = 0;
  double wall_time = 0.0;  ///< seconds
};

struct SolverOptions {
  double tol_rel = 1e-6;  ///< line-search tolerance as a fraction of p_tot
  double gradient_tol = 0.1;
  bool warm_start = true;
  bool apply_thresholds = true;
  bool verify_unimodal = true;  ///< FD only
  int verify_points = 33;
  int fallback_points = 1024;
  SurrogateForm surrogate = SurrogateForm::PerNode;
};

/// Relay-power search interval: open (0, p_tot) shrunk by a relative margin.
inline double search_lo(const SystemParams& p) { return 1e-9 * p.p_tot; }
inline double search_hi(const SystemParams& p) { return p.p_tot * (1.0 - 1e-9); }

/// w P_R*A + (1 - w) P_R*B at the sample-mean gains.
inline double warm_start_power(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& params) {
  const ChannelSample g = mean_gains(std::vector<ChannelSample>(samples.begin(), samples.end()));
  const double pa = optimal_relay_power(mode, g, params.p_tot, params.omega, Node::A);
  const double pb = optimal_relay_power(mode, g, params.p_tot, params.omega, Node::B);
  return params.w * pa + (1.0 - params.w) * pb;
}

namespace detail {

// True when the sampled values rise then fall (either part may be empty).
inline bool is_unimodal(const std::vector<double>& ys) {
  int transitions = 0;  // sign changes in the slope sequence
  int last_sign = 0;
  for (std::size_t i = 1; i < ys.size(); ++i) {
    const double d = ys[i] - ys[i - 1];
    const int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) {
      if (last_sign < 0) return false;  // a valley
      ++transitions;
    }
    last_sign = sign;
  }
  return transitions <= 1;
}

template <class F>
LineSearchResult grid_then_refine(F&& f, double lo, double hi, int points, const LineSearchOptions& opt) {
  LineSearchResult acc;
  const double h = (hi - lo) / (points - 1);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double v = f(lo + h * i);
    ++acc.evals;
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = lo + h * std::max(0, best - 1);
  const double b = lo + h * std::min(points - 1, best + 1);
  return golden_section(f, a, b, opt, acc);
}

// Shared driver for the exact and approximate solves. `objective` is
// maximized; `per_call` is the number of sample terms one call costs, or 0 when
// the objective reports its own count through `sample_evals`.
template <class F>
LineSearchResult run_line_search(RelayMode mode, F&& objective, const SystemParams& params, double start,
                                 const SolverOptions& opt, bool& fallback) {
  const double lo = search_lo(params);
  const double hi = search_hi(params);
  const LineSearchOptions ls{opt.tol_rel * params.p_tot, opt.gradient_tol};
  fallback = false;
  LineSearchResult res = opt.warm_start ? maximize_unimodal_from(objective, lo, hi, start, ls)
                                        : maximize_unimodal_from(objective, lo, hi, 0.5 * (lo + hi), ls);
  if (mode == RelayMode::FD && opt.verify_unimodal) {
    std::vector<double> ys;
    ys.reserve(opt.verify_points);
    const double h = (hi - lo) / (opt.verify_points - 1);
    for (int i = 0; i < opt.verify_points; ++i) ys.push_back(objective(lo + h * i));
    res.evals += opt.verify_points;
    if (!is_unimodal(ys)) {
      fallback = true;
      LineSearchResult g = grid_then_refine(objective, lo, hi, opt.fallback_points, ls);
      g.evals += res.evals;
      g.iterations += res.iterations;
      res = g;
    }
  }
  return res;
}

}  // namespace detail

/// Silences a node whose SNR at the solved allocation (sample-mean gains) does
/// not exceed its threshold; the relay then uses the other node's closed-form
/// optimum. A silenced node's effective capacity is reported as zero.
inline SolveReport apply_threshold_policy(SolveReport report, RelayMode mode, std::span<const ChannelSample> samples,
                                          const SystemParams& params) {
  const ChannelSample g = mean_gains(std::vector<ChannelSample>(samples.begin(), samples.end()));
  const double p_r = report.alloc.p_r();
  const double p = report.alloc.p_node();
  const bool a_fails = link_snr(mode, p_r, p, params.omega, g, Node::A) <= params.gamma_t_a;
  const bool b_fails = link_snr(mode, p_r, p, params.omega, g, Node::B) <= params.gamma_t_b;
  report.silenced = Silenced::None;
  report.degenerate = a_fails && b_fails;
  if (a_fails == b_fails) return report;

  const Node served = a_fails ? Node::B : Node::A;
  const double relay = optimal_relay_power(mode, g, params.p_tot, params.omega, served);
  const EcEstimator est(mode, samples, params);
  report.alloc = PowerAllocation(params.p_tot, relay);
  report.ec = est.ec_point(report.alloc);
  if (a_fails) {
    report.silenced = Silenced::A;
    report.ec.r_ea = 0.0;
  } else {
    report.silenced = Silenced::B;
    report.ec.r_eb = 0.0;
  }
  return report;
}

/// Maximizes w R_EA + (1 - w) R_EB (minimizes the weighted objective J) over
/// the relay power.
inline SolveReport solve_exact(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& params,
                               const SolverOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const EcEstimator est(mode, samples, params);
  std::size_t calls = 0;
  auto objective = [&](double p_r) {
    ++calls;
    return -est.weighted_objective(p_r);
  };
  SolveReport rep;
  rep.method = SolveMethod::Exact;
  rep.warm_start = warm_start_power(mode, samples, params);
  const LineSearchResult res = detail::run_line_search(mode, objective, params, rep.warm_start, opt, rep.grid_fallback);
  rep.alloc = PowerAllocation(params.p_tot, res.argmax);
  rep.ec = est.ec_point(rep.alloc);
  rep.iterations = res.iterations;
  rep.objective_evals = calls;
  const std::size_t nodes = (params.w > 0.0 ? 1 : 0) + (params.w < 1.0 ? 1 : 0);
  rep.sample_evals = calls * samples.size() * nodes;
  if (opt.apply_thresholds) rep = apply_threshold_policy(rep, mode, samples, params);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Minimizes the worst-sample surrogate over the relay power; the reported
/// capacities are the exact estimators at the resulting allocation.
inline SolveReport solve_approx(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& params,
                                const SolverOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const EcEstimator est(mode, samples, params);
  const SurrogateEvaluator tau(est, opt.surrogate);
  std::size_t calls = 0;
  std::size_t sample_evals = 0;
  auto objective = [&](double p_r) {
    ++calls;
    return -tau(p_r, &sample_evals);
  };
  SolveReport rep;
  rep.method = SolveMethod::Approximate;
  rep.warm_start = warm_start_power(mode, samples, params);
  const LineSearchResult res = detail::run_line_search(mode, objective, params, rep.warm_start, opt, rep.grid_fallback);
  rep.alloc = PowerAllocation(params.p_tot, res.argmax);
  rep.ec = est.ec_point(rep.alloc);
  rep.iterations = res.iterations;
  rep.objective_evals = calls;
  rep.sample_evals = sample_evals;
  if (opt.apply_thresholds) rep = apply_threshold_policy(rep, mode, samples, params);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Allocation and capacities at the equal split P_R = P = P_tot / 3.
inline EcPoint equal_allocation_point(RelayMode mode, std::span<const ChannelSample> samples,
                                      const SystemParams& params) {
  return EcEstimator(mode, samples, params).ec_point(PowerAllocation::equal(params.p_tot));
}

struct FrontierPoint {
  double param = 0.0;  ///< w or mu that produced the point
  EcPoint ec;
};

struct ParetoFrontier {
  std::vector<FrontierPoint> points;
  SolveMethod method = SolveMethod::Exact;
  std::vector<double> parameter_grid;
  std::vector<double> infeasible;  ///< mu values with no feasible allocation
};

/// True when `a` beats `b` in both capacities by more than tol.
inline bool strictly_dominates(const EcPoint& a, const EcPoint& b, double tol = 1e-6) {
  return a.r_ea > b.r_ea + tol && a.r_eb > b.r_eb + tol;
}

inline std::vector<FrontierPoint> remove_dominated(const std::vector<FrontierPoint>& pts, double tol = 1e-6) {
  std::vector<FrontierPoint> out;
  for (const auto& p : pts) {
    const bool dominated =
        std::any_of(pts.begin(), pts.end(), [&](const FrontierPoint& q) { return strictly_dominates(q.ec, p.ec, tol); });
    if (!dominated) out.push_back(p);
  }
  return out;
}

struct ParetoOptions {
  SolveMethod method = SolveMethod::Approximate;  ///< Exact or Approximate
  SolverOptions solver;
};

/// Weighted-sum frontier: one solve per weight, dominated points removed.
inline ParetoFrontier pareto_weighted(RelayMode mode, std::span<const ChannelSample> samples, SystemParams params,
                                      const std::vector<double>& w_grid, const ParetoOptions& opt = {}) {
  if (w_grid.empty()) throw std::domain_error("pareto_weighted: empty weight grid");
  ParetoFrontier f;
  f.method = opt.method;
  f.parameter_grid = w_grid;
  std::vector<FrontierPoint> raw;
  for (double w : w_grid) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::domain_error("pareto_weighted: weights must lie in [0, 1]");
    params.w = w;
    const SolveReport r = opt.method == SolveMethod::Exact ? solve_exact(mode, samples, params, opt.solver)
                                                           : solve_approx(mode, samples, params, opt.solver);
    raw.push_back(FrontierPoint{w, r.ec});
  }
  f.points = remove_dominated(raw);
  return f;
}

/// Epsilon-constraint frontier: for each floor mu, maximize R_EA subject to
/// R_EB >= mu. R_EB is unimodal in the relay power, so the feasible set is an
/// interval around its maximizer, located by bisection; R_EA is unimodal too,
/// so the constrained optimum is its unconstrained maximizer clamped to that
/// interval.
inline ParetoFrontier pareto_epsilon_constraint(RelayMode mode, std::span<const ChannelSample> samples,
                                                const SystemParams& params, const std::vector<double>& mu_grid,
                                                const SolverOptions& opt = {}) {
  if (mu_grid.empty()) throw std::domain_error("pareto_epsilon_constraint: empty floor grid");
  const EcEstimator est(mode, samples, params);
  const double lo = search_lo(params);
  const double hi = search_hi(params);
  const double tol = opt.tol_rel * params.p_tot;
  auto rea = [&](double x) { return est.effective_capacity(x, Node::A); };
  auto reb = [&](double x) { return est.effective_capacity(x, Node::B); };
  const ChannelSample g = mean_gains(std::vector<ChannelSample>(samples.begin(), samples.end()));
  const LineSearchOptions ls{tol};
  const auto best_a =
      maximize_unimodal_from(rea, lo, hi, optimal_relay_power(mode, g, params.p_tot, params.omega, Node::A), ls);
  const auto best_b =
      maximize_unimodal_from(reb, lo, hi, optimal_relay_power(mode, g, params.p_tot, params.omega, Node::B), ls);

  // Returns the feasible end of the crossing bracket between `in` (R_EB >= mu)
  // and `out` (R_EB < mu).
  auto crossing = [&](double in, double out, double mu) {
    while (std::abs(out - in) > tol) {
      const double mid = 0.5 * (in + out);
      if (reb(mid) >= mu) in = mid;
      else out = mid;
    }
    return in;
  };

  ParetoFrontier f;
  f.method = SolveMethod::EpsilonConstraint;
  f.parameter_grid = mu_grid;
  for (double mu : mu_grid) {
    if (best_b.max < mu) {
      f.infeasible.push_back(mu);
      continue;
    }
    const double left = reb(lo) >= mu ? lo : crossing(best_b.argmax, lo, mu);
    const double right = reb(hi) >= mu ? hi : crossing(best_b.argmax, hi, mu);
    const double x = std::clamp(best_a.argmax, left, right);
    f.points.push_back(FrontierPoint{mu, est.ec_point(PowerAllocation(params.p_tot, x))});
  }
  return f;
}

}  // namespace relayec
