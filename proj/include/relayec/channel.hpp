// SPDX-License-Identifier: Apache-2.0
//
// Rayleigh flat-fading channel power gains with distance path loss.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayec {

/// One fading realization: power gains of the A-relay and B-relay links.
struct ChannelSample {
  double h_a = 1.0;
  double h_b = 1.0;

  friend bool operator==(const ChannelSample&, const ChannelSample&) = default;
};

/// Node placement on the unit segment A--R--B. d_b = 1 - d_a is derived.
class Geometry {
 public:
  Geometry() = default;
  Geometry(double d_a, double alpha) : d_a_(d_a), alpha_(alpha) {
    if (!(d_a > 0.0 && d_a < 1.0)) throw std::domain_error("geometry: d_a must lie in (0, 1)");
    if (!(alpha > 0.0)) throw std::domain_error("geometry: path-loss exponent must be > 0");
  }

  double d_a() const { return d_a_; }
  double d_b() const { return 1.0 - d_a_; }
  double alpha() const { return alpha_; }

  friend bool operator==(const Geometry&, const Geometry&) = default;

  /// Mean power gains d^-alpha.
  double mean_gain_a() const { return std::pow(d_a(), -alpha_); }
  double mean_gain_b() const { return std::pow(d_b(), -alpha_); }

 private:
  double d_a_ = 0.5;
  double alpha_ = 4.0;
};

/// Seeded source of unit-mean exponential variates.
///
/// Algorithm (fixed so that streams are reproducible across platforms):
///   engine  = std::mt19937_64 seeded with std::seed_seq{seed_lo, seed_hi, stream}
///   U       = 1 - (x >> 11) * 2^-53          (U in (0, 1])
///   E       = -ln U, and E == 0 is replaced by the smallest positive double.
class ExponentialSource {
 public:
  explicit ExponentialSource(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double operator()() {
    const double u = 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double e = -std::log(u);
    return e > 0.0 ? e : std::numeric_limits<double>::denorm_min();
  }

 private:
  std::mt19937_64 engine_;
};

/// Draws n independent samples. For each sample the A gain is drawn before
/// the B gain: H_A = E d_a^-alpha, H_B = E' (1 - d_a)^-alpha.
inline std::vector<ChannelSample> sample_channels(const Geometry& geom, std::size_t n, std::uint64_t seed,
                                                  std::uint64_t stream = 0) {
  if (n == 0) throw std::domain_error("sample_channels: n must be >= 1");
  ExponentialSource source(seed, stream);
  const double ga = geom.mean_gain_a();
  const double gb = geom.mean_gain_b();
  std::vector<ChannelSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ea = source();
    const double eb = source();
    out.push_back(ChannelSample{ea * ga, eb * gb});
  }
  return out;
}

/// Sample-mean gains, used as the representative state for closed forms.
inline ChannelSample mean_gains(const std::vector<ChannelSample>& samples) {
  if (samples.empty()) throw std::domain_error("mean_gains: empty sample set");
  double a = 0.0, b = 0.0;
  for (const auto& s : samples) {
    a += s.h_a;
    b += s.h_b;
  }
  const double n = static_cast<double>(samples.size());
  return ChannelSample{a / n, b / n};
}

// CSV exchange format: header "h_a,h_b", one sample per line, shortest
// round-trip decimal representation.

inline void write_samples_csv(std::ostream& os, const std::vector<ChannelSample>& samples) {
  os << "h_a,h_b\n";
  char buf[64];
  for (const auto& s : samples) {
    auto r = std::to_chars(buf, buf + sizeof buf, s.h_a);
    *r.ptr++ = ',';
    r = std::to_chars(r.ptr, buf + sizeof buf, s.h_b);
    os.write(buf, r.ptr - buf);
    os.put('\n');
  }
}

inline std::vector<ChannelSample> read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("samples csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "h_a,h_b") throw std::runtime_error("samples csv: expected header 'h_a,h_b'");

  std::vector<ChannelSample> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    ChannelSample s;
    const char* end = line.data() + line.size();
    bool ok = comma != std::string::npos;
    if (ok) {
      auto ra = std::from_chars(line.data(), line.data() + comma, s.h_a);
      auto rb = std::from_chars(line.data() + comma + 1, end, s.h_b);
      ok = ra.ec == std::errc{} && ra.ptr == line.data() + comma && rb.ec == std::errc{} && rb.ptr == end;
    }
    if (!ok || !(s.h_a > 0.0) || !(s.h_b > 0.0)) {
      throw std::runtime_error("samples csv: bad row at line " + std::to_string(lineno));
    }
    out.push_back(s);
  }
  if (out.empty()) throw std::runtime_error("samples csv: no rows");
  return out;
}

}  // namespace relayec
