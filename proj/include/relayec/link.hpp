// SPDX-License-Identifier: Apache-2.0
//
// Per-sample end-to-end SNR of the two-way amplify-and-forward relay, the
// relay powers that maximize it, and the HD threshold crossings.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "relayec/channel.hpp"

namespace relayec {

enum class RelayMode { HD, FD };
enum class Node { A, B };

/// Blocklength used inside the rate formula for HD links.
enum class HdRateBlocklength { Half, Full };

inline constexpr Node other(Node n) { return n == Node::A ? Node::B : Node::A; }

inline constexpr std::string_view to_string(RelayMode m) { return m == RelayMode::HD ? "hd" : "fd"; }

/// Scenario constants. Both nodes share the packet length and transmit power;
/// node, relay and residual self-interference coefficients are all `omega`.
struct SystemParams {
  int m = 100;             ///< packet length in channel uses
  double p_tot = 1000.0;   ///< total power budget P_R + 2P
  double omega = 0.1;      ///< mean residual self-interference coefficient (FD only)
  double eps_a = 1e-4;
  double eps_b = 1e-4;
  double theta_a = 1e-3;   ///< QoS exponents
  double theta_b = 1e-3;
  Geometry geom{0.5, 4.0};
  double gamma_t_a = 1.0;  ///< SNR thresholds (linear)
  double gamma_t_b = 1.0;
  double w = 0.5;          ///< priority of node A
  HdRateBlocklength hd_rate_blocklength = HdRateBlocklength::Half;

  double eps(Node n) const { return n == Node::A ? eps_a : eps_b; }
  double theta(Node n) const { return n == Node::A ? theta_a : theta_b; }
  double gamma_t(Node n) const { return n == Node::A ? gamma_t_a : gamma_t_b; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;

  void validate() const {
    if (m < 1) throw std::domain_error("params: m must be >= 1");
    if (!(p_tot > 0.0)) throw std::domain_error("params: p_tot must be > 0");
    if (!(omega >= 0.0 && omega <= 1.0)) throw std::domain_error("params: omega must lie in [0, 1]");
    for (double e : {eps_a, eps_b})
      if (!(e > 0.0 && e <= 0.5)) throw std::domain_error("params: eps must lie in (0, 0.5]");
    for (double t : {theta_a, theta_b})
      if (!(t > 0.0)) throw std::domain_error("params: theta must be > 0");
    for (double g : {gamma_t_a, gamma_t_b})
      if (!(g >= 0.0)) throw std::domain_error("params: SNR thresholds must be >= 0");
    if (!(w >= 0.0 && w <= 1.0)) throw std::domain_error("params: w must lie in [0, 1]");
  }
};

/// Split of the total power: relay gets p_r, each node (P_tot - p_r) / 2.
class PowerAllocation {
 public:
  PowerAllocation() = default;
  PowerAllocation(double p_tot, double p_r) : p_r_(p_r), p_node_((p_tot - p_r) / 2.0) {
    if (!(p_r >= 0.0 && p_r < p_tot)) throw std::domain_error("allocation: need 0 <= p_r < p_tot");
  }

  /// Equal three-way split P_R = P = P_tot / 3.
  static PowerAllocation equal(double p_tot) { return PowerAllocation(p_tot, p_tot / 3.0); }

  double p_r() const { return p_r_; }
  double p_node() const { return p_node_; }

 private:
  double p_r_ = 0.0;
  double p_node_ = 0.0;
};

namespace detail {

// SINR received at node A; node B is obtained by exchanging the gains. With
// omega == 0 every omega-dependent term is an exact zero or one, so the result
// is bitwise identical to the HD expression.
inline double sinr_at_a(double p_r, double p, double omega, double h_a, double h_b) {
  const double base = p * h_a + p * h_b + 1.0;
  const double den = p_r * h_a + (p * omega + 1.0) * (base + p_r * omega) + p_r * p_r * h_a * omega;
  return p * p_r * h_a * h_b / den;
}

inline void require_positive_gains(double h_a, double h_b) {
  if (!(h_a > 0.0 && h_b > 0.0)) throw std::domain_error("link: channel gains must be > 0");
}

}  // namespace detail

/// HD end-to-end SNR at `node` for relay power p_r and node power p.
inline double snr_hd(double p_r, double p, const ChannelSample& s, Node node) {
  const double base_a = p * s.h_a + p * s.h_b + 1.0;
  const double base_b = p * s.h_b + p * s.h_a + 1.0;
  return node == Node::A ? p * p_r * s.h_a * s.h_b / (p_r * s.h_a + base_a)
                         : p * p_r * s.h_b * s.h_a / (p_r * s.h_b + base_b);
}

inline double snr_hd(const PowerAllocation& alloc, const ChannelSample& s, Node node) {
  return snr_hd(alloc.p_r(), alloc.p_node(), s, node);
}

/// FD end-to-end SINR at `node` with residual self-interference `omega`.
inline double sinr_fd(double p_r, double p, double omega, const ChannelSample& s, Node node) {
  return node == Node::A ? detail::sinr_at_a(p_r, p, omega, s.h_a, s.h_b)
                         : detail::sinr_at_a(p_r, p, omega, s.h_b, s.h_a);
}

inline double sinr_fd(const PowerAllocation& alloc, double omega, const ChannelSample& s, Node node) {
  return sinr_fd(alloc.p_r(), alloc.p_node(), omega, s, node);
}

/// Mode dispatch: HD ignores omega.
inline double link_snr(RelayMode mode, double p_r, double p, double omega, const ChannelSample& s, Node node) {
  return mode == RelayMode::HD ? snr_hd(p_r, p, s, node) : sinr_fd(p_r, p, omega, s, node);
}

/// Relay power maximizing the FD SINR at `node` (omega = 0 gives the HD case).
///
/// The stationary point of the SINR is the root
///   x = [-(S)(q+2) + 2 sqrt(u (q+1)(q+2) S)] / D,
///   S = (H_A + H_B) P_tot + 2, u = H_i P_tot + 1, q = omega P_tot,
///   D = (H_A - H_B)(q+2) + 2 omega u,
/// which is evaluated here in the rationalized form x = S (q+2) P_tot / (S (q+2) + 2 sqrt(...)),
/// free of the removable singularity at D = 0 (H_A = H_B when omega = 0).
inline double optimal_relay_power_fd(double h_a, double h_b, double p_tot, double omega, Node node) {
  detail::require_positive_gains(h_a, h_b);
  if (!(p_tot > 0.0)) throw std::domain_error("link: p_tot must be > 0");
  if (!(omega >= 0.0 && omega <= 1.0)) throw std::domain_error("link: omega must lie in [0, 1]");
  const double h_i = node == Node::A ? h_a : h_b;
  const double s = (h_a + h_b) * p_tot + 2.0;
  const double u = h_i * p_tot + 1.0;
  const double q = omega * p_tot;
  const double lead = s * (q + 2.0);
  return lead * p_tot / (lead + 2.0 * std::sqrt(u * (q + 1.0) * (q + 2.0) * s));
}

/// Relay power maximizing the HD SNR at `node`: S P_tot / (S + sqrt(2 u S)).
inline double optimal_relay_power_hd(double h_a, double h_b, double p_tot, Node node) {
  detail::require_positive_gains(h_a, h_b);
  if (!(p_tot > 0.0)) throw std::domain_error("link: p_tot must be > 0");
  const double h_i = node == Node::A ? h_a : h_b;
  const double s = (h_a + h_b) * p_tot + 2.0;
  const double u = h_i * p_tot + 1.0;
  return s * p_tot / (s + std::sqrt(2.0 * u * s));
}

inline double optimal_relay_power(RelayMode mode, const ChannelSample& s, double p_tot, double omega, Node node) {
  return mode == RelayMode::HD ? optimal_relay_power_hd(s.h_a, s.h_b, p_tot, node)
                               : optimal_relay_power_fd(s.h_a, s.h_b, p_tot, omega, node);
}

struct ThresholdRoots {
  double lower = 0.0;
  double upper = 0.0;
};

/// Relay powers where the HD SNR at `node` crosses gamma_t, or nullopt when
/// the peak SNR stays below gamma_t.
///
/// With P = (P_tot - x)/2, SNR_i(x) = gamma_t is the quadratic
///   H_i H_j x^2 + (gamma_t (H_i - H_j) - H_i H_j P_tot) x + gamma_t ((H_i + H_j) P_tot + 2) = 0,
/// The SNR is zero at both ends of [0, P_tot], so the threshold is reachable
/// exactly when both roots fall inside (0, P_tot). Real roots outside that
/// interval belong to the branch with negative node power.
inline std::optional<ThresholdRoots> threshold_roots_hd(double h_a, double h_b, double p_tot, double gamma_t,
                                                        Node node) {
  detail::require_positive_gains(h_a, h_b);
  if (!(gamma_t > 0.0)) throw std::domain_error("threshold_roots_hd: gamma_t must be > 0");
  const double h_i = node == Node::A ? h_a : h_b;
  const double h_j = node == Node::A ? h_b : h_a;
  const double a = h_i * h_j;
  const double b = gamma_t * (h_i - h_j) - a * p_tot;
  const double c = gamma_t * ((h_i + h_j) * p_tot + 2.0);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = c / q;
  if (r1 > r2) std::swap(r1, r2);
  if (!(r1 > 0.0 && r2 < p_tot)) return std::nullopt;
  return ThresholdRoots{r1, r2};
}

}  // namespace relayec
