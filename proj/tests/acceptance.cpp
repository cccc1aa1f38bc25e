// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, INFO lines for context.
// Exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "relayec/experiment.hpp"

using namespace relayec;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(int id, const std::string& detail) {
  std::printf("INFO criterion %d: %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SystemParams base(double d_a = 0.5) {
  SystemParams p;
  p.geom = Geometry(d_a, 4.0);
  return p;
}

std::vector<ChannelSample> draw(const SystemParams& p, std::uint64_t seed = 7, std::size_t n = 1000) {
  return sample_channels(p.geom, n, seed);
}

double best_weighted(RelayMode mode, const SystemParams& p, std::uint64_t seed = 7) {
  return solve_exact(mode, draw(p, seed), p).ec.weighted(p.w);
}

// Counts up-then-down transitions and any down-then-up on a sampled curve.
// Differences below `noise` (relative) are ignored.
bool single_peak(const std::vector<double>& y, double noise = 1e-12) {
  int last = 0;
  bool fell = false;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double d = y[i] - y[i - 1];
    const double tol = noise * (std::abs(y[i]) + std::abs(y[i - 1]));
    const int sign = d > tol ? 1 : (d < -tol ? -1 : 0);
    if (sign == 0) continue;
    if (sign < 0) fell = true;
    if (sign > 0 && fell) return false;
    last = sign;
  }
  (void)last;
  return true;
}

// ---------------------------------------------------------------------------

void closed_form_vs_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  constexpr int kGrid = 1000000;
  int bad = 0;
  double worst_steps = 0;
  for (int i = 0; i < 200; ++i) {
    const double ha = std::pow(10, -1 + 4 * u(rng)), hb = std::pow(10, -1 + 4 * u(rng));
    const double pt = std::pow(10, 4 * u(rng) - 1), om = std::pow(10, -3 + 3 * u(rng));
    const ChannelSample s{ha, hb};
    const double step = pt / (kGrid - 1);
    for (RelayMode mode : {RelayMode::HD, RelayMode::FD})
      for (Node n : {Node::A, Node::B}) {
        auto f = [&](double x) { return link_snr(mode, x, (pt - x) / 2, om, s, n); };
        // Grid points whose value ties the maximum to rounding all count as argmax.
        std::vector<double> v(kGrid);
        double mx = -1;
        for (int k = 0; k < kGrid; ++k) {
          v[k] = f(step * k);
          mx = std::max(mx, v[k]);
        }
        const double tie = 4 * std::numeric_limits<double>::epsilon() * mx;
        int lo = kGrid, hi = -1;
        for (int k = 0; k < kGrid; ++k)
          if (v[k] >= mx - tie) {
            lo = std::min(lo, k);
            hi = std::max(hi, k);
          }
        const double x = optimal_relay_power(mode, s, pt, om, n) / step;
        const double off = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
        worst_steps = std::max(worst_steps, off);
        if (off > 1.0) ++bad;
      }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(1, bad == 0 && secs < 30,
         fmt("200 scenarios x {hd,fd} x {A,B}: %d outside one grid step (worst %.3g steps), %.1f s", bad, worst_steps,
             secs));
}

void fd_reduces_to_hd() {
  double worst = 0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const ChannelSample s{std::pow(10, -2 + 5 * u(rng)), std::pow(10, -2 + 5 * u(rng))};
    const double pr = std::pow(10, -2 + 5 * u(rng)), p = std::pow(10, -2 + 5 * u(rng));
    for (Node n : {Node::A, Node::B}) worst = std::max(worst, std::abs(sinr_fd(pr, p, 0.0, s, n) - snr_hd(pr, p, s, n)));
  }
  report(2, worst == 0.0, fmt("max |sinr_fd(omega=0) - snr_hd| over 10^4 points = %g", worst));
}

void shape_suite() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  int v1 = 0, v2 = 0, v3 = 0, v4 = 0, v5 = 0, unresolved = 0;

  for (int i = 0; i < 200; ++i) {
    const double g = 1.0 + std::pow(10, -2 + 6 * u(rng));
    const double m = 101 + std::floor(3000 * u(rng));
    const double eps = std::pow(10, -22 * u(rng) - 0.5);
    const auto f = lemma1_regime_check({g, static_cast<int>(m), eps}, std::min(1e-3 * g, 0.5 * (g - 1.0) + 1e-6));
    if (!f.increasing || !f.concave) ++v1;
  }

  for (int i = 0; i < 200; ++i) {
    const ChannelSample s{std::pow(10, -1 + 4 * u(rng)), std::pow(10, -1 + 4 * u(rng))};
    const double pt = std::pow(10, 4 * u(rng) - 1);
    for (Node n : {Node::A, Node::B}) {
      const double h = pt / 1024;
      for (int k = 1; k < 1023; ++k) {
        const double x = h * k;
        const double a = snr_hd(x - h, (pt - x + h) / 2, s, n), b = snr_hd(x, (pt - x) / 2, s, n),
                     c = snr_hd(x + h, (pt - x - h) / 2, s, n);
        if (a - 2 * b + c > 1e-9 * (1 + b)) ++v2;
      }
    }
  }

  for (int i = 0; i < 200; ++i) {
    const double theta = std::pow(10, -4 + 4 * u(rng)), eps = std::pow(10, -8 + 7 * u(rng));
    const double m = 50 + std::floor(2000 * u(rng)), c = u(rng) < 0.5 ? m / 2 : m;
    const double r = 0.01 + 10 * u(rng);
    // Step on the exponent's own scale.
    const double h = std::min(0.05 / (c * theta), 0.5 * r);
    // Shifted by the constant -ln(eps)/(m theta) so differences stay resolvable
    // once exp(-r c theta) falls far below eps.
    auto re = [&](double x) { return -std::log1p(std::exp(-x * c * theta) * (1 - eps) / eps) / (m * theta); };
    const double a = re(r - h), b = re(r), d = re(r + h);
    const double noise = 64 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b) + std::abs(d));
    const double slope = d - a, curve = a - 2 * b + d;
    if (std::abs(slope) <= noise || std::abs(curve) <= noise) {
      ++unresolved;
      continue;
    }
    if (!(slope > 0) || !(curve < 0)) ++v3;
  }

  // Effective capacity is checked where every channel draw has SNR above 1,
  // the region where the rate is increasing and concave. Curves checked on
  // the wider mean-gain SNR > 1 region are tallied separately.
  int checked = 0, mean_only = 0;
  for (int i = 0; i < 200; ++i) {
    SystemParams p = base(0.1 + 0.8 * u(rng));
    p.eps_a = p.eps_b = std::pow(10, -8 + 6 * u(rng));
    p.theta_a = p.theta_b = std::pow(10, -4 + 3 * u(rng));
    p.omega = std::pow(10, -2 + 1.7 * u(rng));
    const auto s = sample_channels(p.geom, 200, 1000 + i);
    const ChannelSample g = mean_gains(s);
    for (RelayMode mode : {RelayMode::HD, RelayMode::FD}) {
      const EcEstimator est(mode, s, p);
      for (Node n : {Node::A, Node::B}) {
        std::vector<double> ec, ec_mean, snr;
        for (int k = 1; k < 256; ++k) {
          const double x = p.p_tot * k / 256;
          const double mean_snr = link_snr(mode, x, (p.p_tot - x) / 2, p.omega, g, n);
          snr.push_back(mean_snr);
          double worst = std::numeric_limits<double>::infinity();
          for (const auto& c : s) worst = std::min(worst, link_snr(mode, x, (p.p_tot - x) / 2, p.omega, c, n));
          const double v = est.effective_capacity(x, n);
          if (worst > 1.0) ec.push_back(v);
          if (mean_snr > 1.0) ec_mean.push_back(v);
        }
        checked += ec.size() > 2;
        mean_only += !single_peak(ec_mean);
        if (mode == RelayMode::HD && !single_peak(ec)) ++v4;
        if (mode == RelayMode::FD && (!single_peak(ec) || !single_peak(snr))) ++v5;
      }
    }
  }
  report(3, v1 + v2 + v3 + v4 + v5 == 0,
         fmt("violations: rate %d, hd snr concavity %d, ec in rate %d, hd ec unimodal %d, fd single peak %d "
             "(200 scenarios each; %d ec-in-rate points flat to rounding)",
             v1, v2, v3, v4, v5, unresolved));
  info(3, fmt("ec curves with >2 points with every draw above SNR 1: %d of 800; curves that ripple when only the mean-gain SNR "
              "exceeds 1: %d of 800",
              checked, mean_only));
}

struct GapStats {
  double hd = 0, fd = 0;
};

GapStats approx_gaps(std::uint64_t seed) {
  GapStats g;
  SystemParams p = base();
  const auto s = draw(p, seed);
  for (double eps : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    SystemParams q = p;
    q.eps_a = q.eps_b = eps;
    const double e = solve_exact(RelayMode::HD, s, q).ec.weighted(0.5);
    const double a = solve_approx(RelayMode::HD, s, q).ec.weighted(0.5);
    g.hd = std::max(g.hd, (e - a) / e);
  }
  for (double om : {0.01, 0.05, 0.1}) {
    SystemParams q = p;
    q.omega = om;
    const double e = solve_exact(RelayMode::FD, s, q).ec.weighted(0.5);
    const double a = solve_approx(RelayMode::FD, s, q).ec.weighted(0.5);
    g.fd = std::max(g.fd, (e - a) / e);
  }
  return g;
}

void approx_vs_exact() {
  const GapStats g = approx_gaps(7);
  report(4, g.hd <= 0.05 && g.fd <= 0.05,
         fmt("seed 7 worst relative shortfall of approx allocation: hd %.2f%%, fd %.2f%% (limit 5%%)", 100 * g.hd,
             100 * g.fd));
  int pass = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const GapStats x = approx_gaps(seed);
    pass += x.hd <= 0.05 && x.fd <= 0.05;
  }
  info(4, fmt("seeds 1..12 meeting the 5%% bound: %d of 12", pass));
}

void optimal_vs_equal() {
  bool all = true, larger = true;
  double m2 = 0, m5 = 0;
  const std::vector<std::pair<RelayMode, std::vector<double>>> sweeps = {
      {RelayMode::HD, {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}}, {RelayMode::FD, {0.01, 0.05, 0.1}}};
  for (const auto& [mode, grid] : sweeps)
    for (double x : grid) {
      double margin[2];
      int k = 0;
      for (double d_a : {0.5, 0.2}) {
        SystemParams p = base(d_a);
        if (mode == RelayMode::HD) p.eps_a = p.eps_b = x;
        else p.omega = x;
        const auto s = draw(p);
        const double opt = solve_exact(mode, s, p).ec.weighted(0.5);
        const double eq = equal_allocation_point(mode, s, p).weighted(0.5);
        all = all && opt > eq;
        margin[k++] = (opt - eq) / eq;
      }
      larger = larger && margin[1] > margin[0];
      m5 = std::max(m5, margin[0]);
      m2 = std::max(m2, margin[1]);
    }
  report(5, all && larger,
         fmt("optimum beats equal split at every point: %s; margin larger at d_a=0.2 everywhere: %s "
             "(max margin %.1f%% at 0.2, %.1f%% at 0.5)",
             all ? "yes" : "no", larger ? "yes" : "no", 100 * m2, 100 * m5));
}

double fd_hd_ratio(double p_tot) {
  SystemParams p = base();
  p.p_tot = p_tot;
  p.omega = 0.01;
  return best_weighted(RelayMode::FD, p) / best_weighted(RelayMode::HD, p);
}

void fd_twice_hd() {
  const double r = fd_hd_ratio(1000);
  report(6, r >= 1.7 && r <= 2.05, fmt("fd/hd weighted EC ratio at omega=0.01 = %.3f (target [1.7, 2.05])", r));
  info(6, fmt("same ratio with p_tot=100: %.3f", fd_hd_ratio(100)));
}

void anchors() {
  auto mean_ec = [](RelayMode mode, double p_tot) {
    SystemParams p = base(0.3);
    p.p_tot = p_tot;
    return best_weighted(mode, p);
  };
  const double fd = mean_ec(RelayMode::FD, 1000), hd = mean_ec(RelayMode::HD, 1000);
  SystemParams p = base(0.3);
  const auto s = draw(p);
  double best = 0;
  for (double w : linspace(0, 1, 21)) {
    SystemParams q = p;
    q.w = w;
    best = std::max(best, solve_exact(RelayMode::FD, s, q).ec.weighted(w));
  }
  const bool fd_ok = std::abs(fd - 3.46) <= 0.12 * 3.46, hd_ok = std::abs(hd - 2.61) <= 0.12 * 2.61;
  const double gain = best / fd - 1;
  report(7, fd_ok && hd_ok && gain >= 0.15,
         fmt("fd %.3f (3.46 +-12%%: %s), hd %.3f (2.61 +-12%%: %s), max-over-w gain %.1f%% (>= 15%%: %s)", fd,
             fd_ok ? "ok" : "out", hd, hd_ok ? "ok" : "out", 100 * gain, gain >= 0.15 ? "ok" : "out"));
  info(7, fmt("with p_tot=100: fd %.3f, hd %.3f", mean_ec(RelayMode::FD, 100), mean_ec(RelayMode::HD, 100)));
}

struct FrontierCheck {
  double worst_gap = 0;
  double ea_lo = 1e300, ea_hi = -1e300, eb_lo = 1e300, eb_hi = -1e300;
};

FrontierCheck frontier(double d_a, double omega, double p_tot) {
  SystemParams p = base(d_a);
  p.omega = omega;
  p.p_tot = p_tot;
  const auto s = draw(p);
  const auto pair = run_pareto_pair(RelayMode::FD, s, p, linspace(0, 1, 21), SolveMethod::Exact);
  FrontierCheck c;
  for (const auto& w : pair.weighted.points) {
    c.ea_lo = std::min(c.ea_lo, w.ec.r_ea);
    c.ea_hi = std::max(c.ea_hi, w.ec.r_ea);
    c.eb_lo = std::min(c.eb_lo, w.ec.r_eb);
    c.eb_hi = std::max(c.eb_hi, w.ec.r_eb);
    const FrontierPoint* near = nullptr;
    for (const auto& e : pair.epsilon.points)
      if (!near || std::abs(e.ec.r_eb - w.ec.r_eb) < std::abs(near->ec.r_eb - w.ec.r_eb)) near = &e;
    if (!near) {
      c.worst_gap = 1e300;
      continue;
    }
    c.worst_gap = std::max({c.worst_gap, std::abs(near->ec.r_ea - w.ec.r_ea) / w.ec.r_ea,
                            std::abs(near->ec.r_eb - w.ec.r_eb) / w.ec.r_eb});
  }
  return c;
}

bool within(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

void pareto() {
  double worst = 0;
  for (auto [d, om] : {std::pair{0.5, 0.01}, {0.2, 0.01}, {0.2, 0.1}}) worst = std::max(worst, frontier(d, om, 1000).worst_gap);
  const FrontierCheck c = frontier(0.2, 0.01, 1000);
  const bool ranges = within(c.ea_lo, 2.1, 0.15) && within(c.ea_hi, 3.7, 0.15) && within(c.eb_lo, 4.9, 0.15) &&
                      within(c.eb_hi, 6.0, 0.15);
  report(8, worst <= 0.03 && ranges,
         fmt("worst weighted vs epsilon gap %.2f%% (limit 3%%); d_a=0.2 omega=0.01 spans R_EA [%.2f, %.2f] R_EB "
             "[%.2f, %.2f] (target [2.1, 3.7] x [4.9, 6.0] +-15%%: %s)",
             100 * worst, c.ea_lo, c.ea_hi, c.eb_lo, c.eb_hi, ranges ? "ok" : "out"));
  const FrontierCheck small = frontier(0.2, 0.01, 100);
  info(8, fmt("with p_tot=100: R_EA [%.2f, %.2f] R_EB [%.2f, %.2f], gap %.2f%%", small.ea_lo, small.ea_hi,
              small.eb_lo, small.eb_hi, 100 * small.worst_gap));
}

void timing() {
  ExperimentConfig c = default_config(Command::Bench);
  c.repeats = 100;
  double worst = 1e300;
  std::string cells;
  for (const auto& b : run_bench_cells(c)) {
    worst = std::min(worst, b.ratio());
    cells += fmt(" %s/%s=%.2f", std::string(to_string(b.scenario.mode)).c_str(), b.scenario.label.c_str(), b.ratio());
  }
  report(9, worst > 1.5, fmt("smallest exact/approx wall-time ratio %.2f (limit 1.5);%s", worst, cells.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() / "relayec_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (const char* cmd : {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "bench"}) {
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (std::string(cmd) + std::to_string(k) + ".csv");
      const std::string line = std::string(RELAYEC_CLI_PATH) + " " + cmd + " --seed 7 --out " + out.string() +
                               (std::string(cmd) == "bench" ? " --repeats 5" : "") + " >/dev/null 2>&1";
      const int st = std::system(line.c_str());
      if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) ok = false;
      outputs[k] = slurp(out);
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    ok = ok && same;
    detail += fmt(" %s:%s", cmd, same ? "same" : "DIFF");
  }
  fs::remove_all(dir);
  report(10, ok, "two runs per subcommand byte-identical:" + detail);
}

}  // namespace

int main() {
  closed_form_vs_grid();
  fd_reduces_to_hd();
  shape_suite();
  approx_vs_exact();
  optimal_vs_equal();
  fd_twice_hd();
  anchors();
  pareto();
  timing();
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
