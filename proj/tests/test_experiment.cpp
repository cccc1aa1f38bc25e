// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <sstream>

#include "relayec/experiment.hpp"

using namespace relayec;

namespace {

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

}  // namespace

TEST(Config, CommandNames) {
  for (Command c : {Command::Fig2, Command::Fig3, Command::Fig4, Command::Fig5, Command::Fig6, Command::Fig7,
                    Command::Fig8, Command::Bench})
    EXPECT_EQ(parse_command(to_string(c)), c);
  EXPECT_THROW(parse_command("fig9"), ConfigError);
}

TEST(Config, SerializeRoundTrips) {
  for (Command cmd : {Command::Fig2, Command::Fig5, Command::Fig7, Command::Fig8, Command::Bench}) {
    ExperimentConfig c = default_config(cmd);
    c.params.m = 250;
    c.params.eps_a = 3e-5;
    c.params.theta_b = 0.02;
    c.params.gamma_t_a = 0.7;
    c.params.hd_rate_blocklength = HdRateBlocklength::Full;
    c.samples = 321;
    c.seed = 99;
    c.threads = 3;
    c.timing = true;
    c.format = TableFormat::Json;
    c.out = "x.json";
    c.method = SolveMethod::Approximate;
    ExperimentConfig back = default_config(cmd);
    parse_config_text(back, serialize_config(c));
    EXPECT_EQ(back, c) << serialize_config(c);
  }
}

TEST(Config, CommentsAndWhitespace) {
  ExperimentConfig c = default_config(Command::Fig4);
  parse_config_text(c, "# header\n  samples =  50  # inline\n\nomega=0.2\n");
  EXPECT_EQ(c.samples, 50u);
  EXPECT_EQ(c.params.omega, 0.2);
}

TEST(Config, Errors) {
  ExperimentConfig c = default_config(Command::Fig4);
  EXPECT_THROW(parse_config_text(c, "bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text(c, "samples = many\n"), ConfigError);
  EXPECT_THROW(parse_config_text(c, "samples = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_text(c, "omega 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config_text(c, "mode = xd\n"), ConfigError);
  EXPECT_THROW(parse_config_text(c, "format = xml\n"), ConfigError);
  EXPECT_THROW(parse_config_text(c, "series = d_a\n"), ConfigError);
  EXPECT_THROW(load_config_file(c, "/nonexistent/relayec.cfg"), ConfigIoError);
  try {
    parse_config_text(c, "samples = 5\nwat = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, RateBlocklengthSpellings) {
  ExperimentConfig c = default_config(Command::Fig4);
  parse_config_text(c, "hd-rate-blocklength = m\n");
  EXPECT_EQ(c.params.hd_rate_blocklength, HdRateBlocklength::Full);
  parse_config_text(c, "hd_rate_blocklength = m/2\n");
  EXPECT_EQ(c.params.hd_rate_blocklength, HdRateBlocklength::Half);
  EXPECT_THROW(parse_config_text(c, "hd_rate_blocklength = 2m\n"), ConfigError);
}

TEST(Config, OutputOnlyParsingSkipsScenario) {
  ExperimentConfig c = default_config(Command::Fig4);
  parse_config_text(c, "samples = 5\nomega = 0.3\nformat = json\n", false);
  EXPECT_EQ(c.samples, 1000u);
  EXPECT_EQ(c.params.omega, 0.1);
  EXPECT_EQ(c.format, TableFormat::Json);
}

TEST(Config, PinningRemovesSeriesKey) {
  ExperimentConfig c = default_config(Command::Fig8);
  pin_setting(c, "omega", "0.05");
  EXPECT_EQ(c.params.omega, 0.05);
  ASSERT_EQ(c.series.size(), 2u);
  for (const auto& s : scenarios(c)) EXPECT_EQ(s.params.omega, 0.05);

  ExperimentConfig f = default_config(Command::Fig7);
  pin_setting(f, "mode", "fd");
  EXPECT_EQ(f.series.size(), 3u);
  for (const auto& s : scenarios(f)) EXPECT_EQ(s.mode, RelayMode::FD);
}

TEST(Config, SeriesResolution) {
  ExperimentConfig c = default_config(Command::Fig6);
  const auto s = scenarios(c);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].mode, RelayMode::HD);
  EXPECT_EQ(s[2].mode, RelayMode::FD);
  EXPECT_EQ(s[2].params.omega, 0.05);
  EXPECT_EQ(s[2].label, "mode=fd,omega=0.05");
  c.series.clear();
  EXPECT_EQ(scenarios(c).front().label, "base");
}

TEST(Validate, DefaultsAreValid) {
  for (Command cmd : {Command::Fig2, Command::Fig3, Command::Fig4, Command::Fig5, Command::Fig6, Command::Fig7,
                      Command::Fig8, Command::Bench})
    EXPECT_NO_THROW(validate(default_config(cmd))) << to_string(cmd);
}

TEST(Validate, RejectsBadSweeps) {
  ExperimentConfig c = default_config(Command::Fig4);
  c.axis = "p_r";
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(Command::Fig2);
  c.axis = "eps";
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(Command::Fig4);
  c.grid = {1e-3, 1e-4};
  EXPECT_THROW(validate(c), ConfigError);
  c.grid = {1e-4, 0.7};
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(Command::Fig2);
  c.grid = {0.0, 10.0};
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(Command::Fig8);
  c.axis = "theta";
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(Command::Fig7);
  c.grid = {0.0, 1.2};
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(Command::Fig5);
  c.series = parse_series("omega=-1");
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Validate, AutoRelayGrid) {
  const ExperimentConfig c = default_config(Command::Fig2);
  const auto g = sweep_grid(c, c.params);
  ASSERT_EQ(g.size(), 199u);
  EXPECT_DOUBLE_EQ(g.front(), 5.0);
  EXPECT_DOUBLE_EQ(g.back(), 995.0);
}

TEST(Pool, KeepsIndexOrderAndRethrows) {
  for (unsigned t : {1u, 2u, 7u, 0u}) {
    const auto v = parallel_map<int>(100, t, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  }
  EXPECT_TRUE(parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
  EXPECT_THROW(parallel_map<int>(20, 4,
                                 [](std::size_t i) -> int {
                                   if (i == 13) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
}

TEST(Run, SweepShapeAndDeterminism) {
  ExperimentConfig c = default_config(Command::Fig4);
  c.samples = 100;
  c.grid = {1e-6, 1e-3};
  c.threads = 1;
  const Table a = run_experiment(c);
  EXPECT_EQ(a.columns, detail::sweep_columns(false));
  EXPECT_EQ(a.rows.size(), 2u * 2u * 3u);
  c.threads = 4;
  EXPECT_EQ(csv(run_experiment(c)), csv(a));
  c.timing = true;
  EXPECT_EQ(run_experiment(c).columns.back(), "wall_time_s");
}

TEST(Run, FixedRelaySweep) {
  ExperimentConfig c = default_config(Command::Fig3);
  c.samples = 50;
  c.grid = {100, 500, 900};
  const Table t = run_experiment(c);
  ASSERT_EQ(t.rows.size(), 9u);
  EXPECT_EQ(std::get<std::string>(t.rows[0][2]), "fixed");
  EXPECT_EQ(std::get<double>(t.rows[1][12]), 500.0);
}

TEST(Run, ParetoRowsAndThreads) {
  ExperimentConfig c = default_config(Command::Fig8);
  c.samples = 100;
  c.grid = linspace(0, 1, 5);
  c.method = SolveMethod::Approximate;
  c.threads = 1;
  const Table a = run_experiment(c);
  c.threads = 3;
  EXPECT_EQ(csv(run_experiment(c)), csv(a));
  std::size_t weighted = 0, eps = 0;
  for (const auto& r : a.rows) {
    const auto& m = std::get<std::string>(r[4]);
    if (m == "weighted_approx") ++weighted;
    if (m == "epsilon") ++eps;
  }
  // Dominated weighted points are dropped.
  EXPECT_LE(weighted, 15u);
  EXPECT_GE(weighted, 6u);
  EXPECT_GT(eps, weighted);
}

TEST(Run, BenchWithoutTimingIsDeterministic) {
  ExperimentConfig c = default_config(Command::Bench);
  c.samples = 100;
  c.repeats = 2;
  const Table a = run_experiment(c);
  EXPECT_EQ(a.rows.size(), 6u);
  EXPECT_EQ(csv(run_experiment(c)), csv(a));
  c.timing = true;
  EXPECT_EQ(run_experiment(c).columns.back(), "ratio");
}
