#include <gtest/gtest.h>

#include <sstream>

#include "spinamp/io.hpp"

namespace spinamp::io {
namespace {

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.1, 123456789.125}) {
    EXPECT_EQ(parse_double(format_double(v), "x"), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_THROW(parse_double("1.5x", "eps1"), parse_error);
  try {
    parse_uint("-3", "trials");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.field(), "trials");
  }
}

TEST(Csv, QuotingAndLineEnds) {
  std::ostringstream os;
  write_csv_row(os, {"a", "b,c", "say \"hi\""});
  EXPECT_EQ(os.str(), "a,\"b,c\",\"say \"\"hi\"\"\"\n");
  std::istringstream is("x,y,z\r\n" + os.str());
  const CsvTable t = read_csv(is);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(t.column("z"), 2u);
  EXPECT_THROW(t.column("w"), parse_error);
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), parse_error);
}

TEST(Trace, RoundTrip) {
  PyramidLattice lat(12);
  const auto run = run_ideal(lat, +1, 9);
  std::ostringstream os;
  run.trace.write_csv(os);
  EXPECT_EQ(os.str().find('\r'), std::string::npos);
  std::istringstream is(os.str());
  const RunTrace back = read_trace_csv(is);
  ASSERT_EQ(back.records.size(), run.trace.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    EXPECT_EQ(back.records[i].phase, run.trace.records[i].phase);
    EXPECT_EQ(back.records[i].species, run.trace.records[i].species);
    EXPECT_EQ(back.records[i].flips, run.trace.records[i].flips);
    EXPECT_EQ(back.records[i].up_count, run.trace.records[i].up_count);
    EXPECT_EQ(back.records[i].magnetization, run.trace.records[i].magnetization);
  }
}

ExperimentResult small_result(SeedChoice seeds) {
  ExperimentConfig c;
  c.layers = 15;
  c.phases = 13;
  c.noise = {0.05, 0.02, 0.0, 4};
  c.seed_value = seeds;
  c.trials = 3;
  return run_experiment(c, 1);
}

TEST(ExperimentCsv, RoundTripAndColumns) {
  const std::vector<ExperimentRow> rows{experiment_row(small_result(SeedChoice::both)),
                                        experiment_row(small_result(SeedChoice::plus))};
  std::ostringstream os;
  write_experiment_csv(os, rows);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "size,L,eps0,eps1,rule_set,diffusion_steps,trials,mean_signal,std_err,contrast");
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text.substr(text.size() - 2), ",\n");  // no contrast without paired seeds
  std::istringstream is(text);
  EXPECT_EQ(read_experiment_csv(is), rows);
}

TEST(ExperimentJson, RoundTrip) {
  const ExperimentResult r = small_result(SeedChoice::both);
  const json j = to_json(r);
  const ExperimentResult back = experiment_result_from_json(json::parse(j.dump()));
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.up_plus, r.up_plus);
  EXPECT_EQ(*back.contrast, *r.contrast);
  EXPECT_EQ(back.config.noise.rng_seed, 4u);
  EXPECT_EQ(j.dump(), json::parse(j.dump()).dump());
}

TEST(ExperimentJson, KeysAreSorted) {
  const std::string text = to_json(small_result(SeedChoice::plus)).dump();
  EXPECT_LT(text.find("\"config\""), text.find("\"contrast\""));
  EXPECT_LT(text.find("\"contrast\""), text.find("\"error_histogram\""));
  EXPECT_LT(text.find("\"signal\""), text.find("\"sites\""));
}

TEST(SweepConfig, ParsesAndExpands) {
  const json j = json::parse(R"({
    "schema_version": 1,
    "sizes": [100000, 1000000, 10000000],
    "eps1": [0.01, 0.05],
    "polarization": 0.9,
    "trials": 20
  })");
  const SweepConfig c = sweep_config_from_json(j);
  const auto configs = c.expand();
  ASSERT_EQ(configs.size(), 6u);
  EXPECT_EQ(configs[0].layers, 84);
  EXPECT_EQ(configs[0].phases, 83);
  EXPECT_DOUBLE_EQ(configs[0].noise.eps0, 0.1);
  EXPECT_EQ(configs[1].noise.eps1, 0.05);
  EXPECT_EQ(configs[0].seed_value, SeedChoice::both);
  // Defaults are materialized and re-parse to the same sweep.
  const json echo = to_json(c);
  EXPECT_TRUE(echo.contains("exchange_probability"));
  EXPECT_EQ(to_json(sweep_config_from_json(echo)), echo);
}

TEST(SweepConfig, ErrorsNameTheField) {
  auto field_of = [](const std::string& text) {
    try {
      sweep_config_from_json(json::parse(text));
    } catch (const parse_error& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"layers": [10]})"), "schema_version");
  EXPECT_EQ(field_of(R"({"schema_version": 2, "layers": [10]})"), "schema_version");
  EXPECT_EQ(field_of(R"({"schema_version": 1})"), "sizes");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "eps1": "high"})"), "eps1");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "eps0": 1.5})"), "eps0");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "trials": 0})"), "trials");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "seed_value": 3})"), "seed_value");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "boundary": "periodic"})"), "boundary");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "tirals": 3})"), "tirals");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10], "geometry": "hcp"})"), "geometry");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "layers": [10]})"), "<none>");
}

TEST(Spectrum, StickJsonAndCurveCsvRoundTrip) {
  PyramidLattice lat(6);
  const auto s = stick_spectrum(LatticeGeometry::cubic(), lat, {1, 0, 0}, SpectrumConfig{});
  const StickSpectrum back = stick_spectrum_from_json(json::parse(to_json(s).dump()));
  EXPECT_EQ(back.sticks, s.sticks);
  EXPECT_EQ(back.by_field, s.by_field);
  EXPECT_EQ(back.partners, s.partners);

  const auto curve = broaden(s.sticks, grid_for(s.max_abs_frequency(), 50.0, 64), 50.0);
  std::ostringstream os;
  write_curve_csv(os, curve);
  std::istringstream is(os.str());
  const BroadenedCurve c2 = read_curve_csv(is);
  EXPECT_EQ(c2.intensity, curve.intensity);
  EXPECT_EQ(c2.grid.points, curve.grid.points);
  EXPECT_DOUBLE_EQ(c2.grid.lo, curve.grid.lo);
  EXPECT_DOUBLE_EQ(c2.grid.hi, curve.grid.hi);
}

TEST(Manifest, RoundTrip) {
  RunManifest m;
  m.command = "mc";
  m.config = {{"layers", {10, 20}}};
  m.seeds = {7};
  m.started_at = utc_timestamp();
  m.finished_at = m.started_at;
  m.outputs = {"mc_results.csv", "mc_results.json"};
  const json j = m.to_json();
  EXPECT_EQ(j.at("version"), version);
  EXPECT_EQ(RunManifest::from_json(j).to_json(), j);
  EXPECT_EQ(m.started_at.size(), 20u);
  EXPECT_EQ(m.started_at.back(), 'Z');
}

TEST(Files, UnwritablePathIsAnIoError) {
  EXPECT_THROW(write_json_file("/nonexistent-dir/x.json", json::object()), io_error);
  EXPECT_THROW(read_json_file("/nonexistent-dir/x.json"), io_error);
}

}  // namespace
}  // namespace spinamp::io
