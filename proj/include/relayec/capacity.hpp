// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo effective capacity of each node, the weighted-sum objective and
// the worst-sample (min-max) surrogate used by the fast solver.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "relayec/channel.hpp"
#include "relayec/fbl.hpp"
#include "relayec/link.hpp"

namespace relayec {

/// Per-node effective capacities (bits per channel use) at one allocation.
struct EcPoint {
  double r_ea = 0.0;
  double r_eb = 0.0;
  PowerAllocation alloc;

  double weighted(double w) const { return w * r_ea + (1.0 - w) * r_eb; }
};

/// How the per-sample worst case is taken in the surrogate objective.
enum class SurrogateForm {
  /// max_k(-(w/2) r_A) + max_k(-((1-w)/2) r_B): each node's log-moment is
  /// replaced by its own worst sample.
  PerNode,
  /// max_k(-(w/2) r_A - ((1-w)/2) r_B): one worst sample for the pair.
  Joint,
};

/// Order-stable pairwise summation. Values are summed serially in blocks of
/// kBlock and block sums are merged as a binary tree whose shape depends only
/// on the number of values.
class PairwiseSum {
 public:
  void add(double x) {
    block_ += x;
    if (++in_block_ == kBlock) {
      push(block_);
      block_ = 0.0;
      in_block_ = 0;
    }
  }

  double result() const {
    double total = in_block_ > 0 ? block_ : 0.0;
    bool have = in_block_ > 0;
    for (int level = 0; level < kLevels; ++level) {
      if (!occupied_[level]) continue;
      total = have ? levels_[level] + total : levels_[level];
      have = true;
    }
    return total;
  }

 private:
  static constexpr int kBlock = 16;
  static constexpr int kLevels = 48;

  void push(double s) {
    for (int level = 0; level < kLevels; ++level) {
      if (!occupied_[level]) {
        levels_[level] = s;
        occupied_[level] = true;
        return;
      }
      s = levels_[level] + s;
      occupied_[level] = false;
    }
    throw std::length_error("PairwiseSum: too many terms");
  }

  double block_ = 0.0;
  int in_block_ = 0;
  double levels_[kLevels] = {};
  bool occupied_[kLevels] = {};
};

/// Effective-capacity machinery bound to one channel sample set and scenario.
///
/// HD: r_i is evaluated with blocklength m/2 (or m, per
/// SystemParams::hd_rate_blocklength) and the exponent uses m/2 channel uses.
/// FD: blocklength m, exponent m. In both modes
///   R_E,i = -1/(m theta_i) ln( mean_k[ exp(-r_i,k c theta_i) (1 - eps_i) + eps_i ] ).
///
/// The sample set is referenced, not copied; it must outlive the estimator.
class EcEstimator {
 public:
  EcEstimator(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& params)
      : mode_(mode),
        samples_(samples),
        params_(params),
        rate_a_(rate_blocklength(mode, params), params.eps_a),
        rate_b_(rate_blocklength(mode, params), params.eps_b) {
    if (samples.empty()) throw std::domain_error("effective capacity: empty sample set");
    params.validate();
    exponent_uses_ = mode == RelayMode::HD ? 0.5 * params.m : static_cast<double>(params.m);
  }

  static double rate_blocklength(RelayMode mode, const SystemParams& p) {
    if (mode == RelayMode::FD || p.hd_rate_blocklength == HdRateBlocklength::Full) return p.m;
    return 0.5 * p.m;
  }

  RelayMode mode() const { return mode_; }
  const SystemParams& params() const { return params_; }
  std::span<const ChannelSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  /// Channel uses in the exponent: m/2 (HD) or m (FD).
  double exponent_uses() const { return exponent_uses_; }

  const FblRate& rate_of(Node n) const { return n == Node::A ? rate_a_ : rate_b_; }

  double node_power(double p_r) const { return 0.5 * (params_.p_tot - p_r); }

  double snr(double p_r, const ChannelSample& s, Node n) const {
    return link_snr(mode_, p_r, node_power(p_r), params_.omega, s, n);
  }

  double sample_rate(double p_r, const ChannelSample& s, Node n) const { return rate_of(n)(snr(p_r, s, n)); }

  std::vector<double> sample_rates(double p_r, Node n) const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(sample_rate(p_r, s, n));
    return out;
  }

  /// ln mean_k[exp(-r_k c theta)(1 - eps) + eps].
  double log_moment(double p_r, Node n) const {
    const FblRate& rate = rate_of(n);
    const double k = -exponent_uses_ * params_.theta(n);
    PairwiseSum sum;
    for (const auto& s : samples_) sum.add(std::exp(k * rate(snr(p_r, s, n))));
    return log_moment_from_mean(sum.result() / static_cast<double>(samples_.size()), params_.eps(n));
  }

  /// ln(mean (1 - eps) + eps), accurate both for mean near 1 (small theta)
  /// and for mean near 0 (large theta).
  static double log_moment_from_mean(double mean_exp, double eps) {
    if (mean_exp < 0.5) return std::log(mean_exp * (1.0 - eps) + eps);
    return std::log1p((mean_exp - 1.0) * (1.0 - eps));
  }

  double effective_capacity(double p_r, Node n) const {
    return -log_moment(p_r, n) / (params_.m * params_.theta(n));
  }

  EcPoint ec_point(const PowerAllocation& alloc) const {
    return EcPoint{effective_capacity(alloc.p_r(), Node::A), effective_capacity(alloc.p_r(), Node::B), alloc};
  }

  /// J = w L_A / (m theta_A) + (1 - w) L_B / (m theta_B); equals -(w R_EA + (1-w) R_EB).
  double weighted_objective(double p_r) const {
    const double w = params_.w;
    const double m = params_.m;
    double j = 0.0;
    if (w > 0.0) j += w * log_moment(p_r, Node::A) / (m * params_.theta_a);
    if (w < 1.0) j += (1.0 - w) * log_moment(p_r, Node::B) / (m * params_.theta_b);
    return j;
  }

  /// Rate on its increasing branch: r(max(gamma, g0)). The normal
  /// approximation dips below g0 and climbs back to log2(m)/m at gamma = 0,
  /// which would let a vanishing allocation look like a good worst case.
  double monotone_rate(double p_r, const ChannelSample& s, Node n) const {
    const FblRate& rate = rate_of(n);
    return rate(std::max(snr(p_r, s, n), rate.turning_snr()));
  }

  /// Worst-sample surrogate over the full sample set. Additive constants of
  /// the log-sum-exp bound are dropped, so values are only comparable within
  /// one parameter set. With `monotone` the rates are taken on their
  /// increasing branch (see monotone_rate).
  double surrogate(double p_r, SurrogateForm form, bool monotone = false) const {
    const double ca = 0.5 * params_.w;
    const double cb = 0.5 * (1.0 - params_.w);
    auto r = [&](const ChannelSample& s, Node n) {
      return monotone ? monotone_rate(p_r, s, n) : sample_rate(p_r, s, n);
    };
    if (form == SurrogateForm::Joint) {
      double tau = -std::numeric_limits<double>::infinity();
      for (const auto& s : samples_) tau = std::max(tau, -ca * r(s, Node::A) - cb * r(s, Node::B));
      return tau;
    }
    double min_a = std::numeric_limits<double>::infinity();
    double min_b = std::numeric_limits<double>::infinity();
    for (const auto& s : samples_) {
      if (ca > 0.0) min_a = std::min(min_a, r(s, Node::A));
      if (cb > 0.0) min_b = std::min(min_b, r(s, Node::B));
    }
    return (ca > 0.0 ? -ca * min_a : 0.0) + (cb > 0.0 ? -cb * min_b : 0.0);
  }

 private:
  RelayMode mode_;
  std::span<const ChannelSample> samples_;
  SystemParams params_;
  FblRate rate_a_;
  FblRate rate_b_;
  double exponent_uses_ = 1.0;
};

/// Surrogate evaluation restricted to the samples that can attain the worst case.
///
/// Both link SNRs are nondecreasing in each channel gain and the monotone rate
/// is nondecreasing in the SNR, so the worst sample is always one that no other
/// sample undercuts in both gains: the lower-left staircase of the sample
/// cloud, O(log n) points for i.i.d. gains. The result equals
/// EcEstimator::surrogate(p_r, form, true) exactly.
class SurrogateEvaluator {
 public:
  SurrogateEvaluator(const EcEstimator& est, SurrogateForm form) : est_(est), form_(form) {
    std::vector<ChannelSample> sorted(est.samples().begin(), est.samples().end());
    std::sort(sorted.begin(), sorted.end(), [](const ChannelSample& x, const ChannelSample& y) {
      return x.h_a < y.h_a || (x.h_a == y.h_a && x.h_b < y.h_b);
    });
    double min_b = std::numeric_limits<double>::infinity();
    for (const auto& s : sorted) {
      if (s.h_b < min_b) {
        candidates_.push_back(s);
        min_b = s.h_b;
      }
    }
  }

  std::size_t candidate_count() const { return candidates_.size(); }
  const std::vector<ChannelSample>& candidates() const { return candidates_; }

  /// Surrogate value; `sample_evals` is incremented by the samples visited.
  double operator()(double p_r, std::size_t* sample_evals = nullptr) const {
    const auto& p = est_.params();
    const double ca = 0.5 * p.w;
    const double cb = 0.5 * (1.0 - p.w);
    double tau = -std::numeric_limits<double>::infinity();
    double min_a = std::numeric_limits<double>::infinity();
    double min_b = std::numeric_limits<double>::infinity();
    for (const auto& s : candidates_) {
      const double ra = est_.monotone_rate(p_r, s, Node::A);
      const double rb = est_.monotone_rate(p_r, s, Node::B);
      if (form_ == SurrogateForm::Joint) {
        tau = std::max(tau, -ca * ra - cb * rb);
      } else {
        min_a = std::min(min_a, ra);
        min_b = std::min(min_b, rb);
      }
    }
    if (sample_evals) *sample_evals += candidates_.size();
    if (form_ == SurrogateForm::Joint) return tau;
    return (ca > 0.0 ? -ca * min_a : 0.0) + (cb > 0.0 ? -cb * min_b : 0.0);
  }

 private:
  const EcEstimator& est_;
  SurrogateForm form_;
  std::vector<ChannelSample> candidates_;
};

inline double effective_capacity(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& params,
                                 const PowerAllocation& alloc, Node node) {
  return EcEstimator(mode, samples, params).effective_capacity(alloc.p_r(), node);
}

inline double weighted_objective_exact(RelayMode mode, std::span<const ChannelSample> samples,
                                       const SystemParams& params, const PowerAllocation& alloc) {
  return EcEstimator(mode, samples, params).weighted_objective(alloc.p_r());
}

/// tau = max_k [-(w/2) r_A,k - ((1-w)/2) r_B,k] on the unmodified rates by
/// default.
inline double surrogate_objective(RelayMode mode, std::span<const ChannelSample> samples, const SystemParams& params,
                                  const PowerAllocation& alloc, SurrogateForm form = SurrogateForm::Joint) {
  return EcEstimator(mode, samples, params).surrogate(alloc.p_r(), form);
}

}  // namespace relayec
