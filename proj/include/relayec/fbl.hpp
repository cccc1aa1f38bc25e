// SPDX-License-Identifier: Apache-2.0
//
// Finite-blocklength (normal approximation) achievable rate and the Gaussian
// tail inverse it needs.

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace relayec {

/// Operating point of a short-packet link.
struct FblPoint {
  double gamma = 0.0;  ///< linear SNR, >= 0
  int m_cu = 1;        ///< channel uses (blocklength), >= 1
  double eps = 0.5;    ///< packet error probability, in (0, 0.5]
};

inline void validate(const FblPoint& p) {
  if (!(p.gamma >= 0.0)) throw std::domain_error("fbl: gamma must be >= 0");
  if (p.m_cu < 1) throw std::domain_error("fbl: blocklength must be >= 1");
  if (!(p.eps > 0.0 && p.eps <= 0.5)) throw std::domain_error("fbl: eps must lie in (0, 0.5]");
}

/// Gaussian tail probability Q(x) = P{N(0,1) > x}.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace detail {

// Acklam's rational approximation of the lower-tail standard normal quantile,
// relative error about 1.15e-9 before refinement.
inline double normal_quantile_seed(double p) {
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                          1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                          6.680131188771972e+01,  -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                          -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                          3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Inverse of the Gaussian tail: returns x with Q(x) = p.
///
/// The seed comes from a rational approximation of the normal quantile and is
/// polished by two Halley steps on Q. For p > 0.5 the result is the exact
/// negation of inverse_q(1 - p) (the subtraction is exact there).
inline double inverse_q(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_q: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -inverse_q(1.0 - p);

  // Upper tail p < 0.5  <=>  x > 0; Q(x) = p  <=>  Phi(-x) = p.
  double x = -detail::normal_quantile_seed(p);
  constexpr double sqrt_2pi = 2.50662827463100050242;
  for (int step = 0; step < 2; ++step) {
    const double e = q_function(x) - p;
    const double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x += u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// Normal-approximation achievable rate in bits per channel use:
///   log2(1+g) - sqrt(g(g+2) / (m (g+1)^2)) Q^-1(eps) log2(e) + log2(m)/m.
///
/// The value is not clamped; it can be negative for small g with a strict eps.
inline double fbl_rate(const FblPoint& p) {
  validate(p);
  const double g = p.gamma;
  const double m = static_cast<double>(p.m_cu);
  const double dispersion = std::sqrt(g * (g + 2.0) / (m * (g + 1.0) * (g + 1.0)));
  return std::log2(1.0 + g) - dispersion * inverse_q(p.eps) * std::numbers::log2e + std::log2(m) / m;
}

/// Rate evaluator with Q^-1(eps) and the blocklength terms hoisted out.
///
/// This is what the Monte-Carlo estimators call per sample; it performs no
/// validation and must agree with fbl_rate to rounding.
class FblRate {
 public:
  /// `m_cu` may be fractional (half of an odd frame length in HD mode).
  FblRate(double m_cu, double eps) {
    if (!(m_cu >= 1.0)) throw std::domain_error("fbl: blocklength must be >= 1");
    validate(FblPoint{0.0, 1, eps});
    const double m = m_cu;
    inv_m_ = 1.0 / m;
    penalty_ = inverse_q(eps) * std::numbers::log2e;
    offset_ = std::log2(m) / m;
  }

  double operator()(double gamma) const {
    const double gp1 = gamma + 1.0;
    const double dispersion = std::sqrt(gamma * (gamma + 2.0) * inv_m_ / (gp1 * gp1));
    return std::log2(gp1) - dispersion * penalty_ + offset_;
  }

  /// SNR below which the rate decreases in gamma. The rate is decreasing on
  /// [0, g0] and strictly increasing on [g0, inf).
  double turning_snr() const {
    // r'(g) > 0  <=>  (g+1) sqrt(g(g+2)) > Q^-1(eps)/sqrt(m). With u = (g+1)^2
    // the boundary is u^2 - u = k^2.
    const double k = penalty_ / std::numbers::log2e * std::sqrt(inv_m_);
    if (k <= 0.0) return 0.0;
    const double u = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * k * k));
    return std::sqrt(u) - 1.0;
  }

 private:
  double inv_m_ = 1.0;
  double penalty_ = 0.0;
  double offset_ = 0.0;
};

struct RegimeFlags {
  bool increasing = false;
  bool concave = false;
};

/// Finite-difference check that the rate is increasing and concave in gamma
/// around p.gamma (central differences with spacing `step`).
inline RegimeFlags lemma1_regime_check(const FblPoint& p, double step) {
  if (!(step > 0.0)) throw std::domain_error("lemma1_regime_check: step must be > 0");
  validate(p);
  if (p.gamma - step < 0.0) throw std::domain_error("lemma1_regime_check: step reaches below gamma = 0");
  auto at = [&](double g) { return fbl_rate(FblPoint{g, p.m_cu, p.eps}); };
  const double lo = at(p.gamma - step);
  const double mid = at(p.gamma);
  const double hi = at(p.gamma + step);
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(mid) + 1.0);
  return RegimeFlags{hi - lo > 0.0, hi - 2.0 * mid + lo <= noise};
}

}  // namespace relayec
