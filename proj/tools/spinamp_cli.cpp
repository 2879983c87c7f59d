// spinamp: ideal runs, noisy Monte Carlo sweeps and probe spectra.
//
// Exit status: 0 success, 1 verification mismatch or internal error,
// 2 usage, 3 I/O, 4 capacity or sizing, 5 malformed configuration.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spinamp/io.hpp"

namespace fs = std::filesystem;
using namespace spinamp;
using io::json;

namespace {

enum exit_code : int { ok = 0, failure = 1, usage = 2, io_failure = 3, capacity = 4, malformed = 5 };

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir = ".";
  bool verify = false;
};

fs::path prepare_out_dir(const Common& common) {
  const fs::path dir(common.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw io_error("cannot create output directory " + dir.string());
  return dir;
}

int parse_seed_value(const std::string& s) {
  if (s == "+1" || s == "1") return +1;
  if (s == "-1") return -1;
  throw usage_error("--seed-value must be +1 or -1");
}

// ---------------------------------------------------------------- ideal

struct IdealArgs {
  int layers = 10;
  int phases = 4;
  std::string seed_value = "+1";
  std::string boundary = "embedded";
  bool plus_one = false;
};

int cmd_ideal(const IdealArgs& a, const Common& common) {
  if (a.layers < 1) throw usage_error("--layers must be at least 1");
  if (a.phases < 0 || a.phases > a.layers - 1)
    throw usage_error("--phases must lie in [0, L-1] = [0, " + std::to_string(a.layers - 1) + "]");
  const int seed = parse_seed_value(a.seed_value);
  BoundaryMode mode;
  try {
    mode = boundary_mode_from_string(a.boundary);
  } catch (const domain_error& e) {
    throw usage_error(e.what());
  }
  const fs::path dir = prepare_out_dir(common);
  io::RunManifest manifest;
  manifest.command = "ideal";
  manifest.started_at = io::utc_timestamp();
  const FieldSet targets = a.plus_one ? FieldSet::with_plus_one() : FieldSet::standard();
  manifest.config = {{"layers", a.layers},
                     {"phases", a.phases},
                     {"seed_value", seed},
                     {"boundary", to_string(mode)},
                     {"rule_set", targets.label()},
                     {"scan", common.verify ? "full" : "incremental"}};

  const PyramidLattice lattice(a.layers);
  const auto result = run_ideal(lattice, seed, a.phases, {mode, common.verify ? ScanMode::full : ScanMode::incremental, targets});
  if (common.verify) {
    const auto fast = run_ideal(lattice, seed, a.phases, {mode, ScanMode::incremental, targets});
    if (!(fast.state == result.state)) {
      std::cerr << "verify: incremental scan disagrees with the full scan\n";
      return failure;
    }
  }

  const fs::path trace_path = dir / "ideal_trace.csv";
  io::write_file(trace_path, [&](std::ostream& os) { result.trace.write_csv(os); });
  manifest.outputs = {trace_path.filename().string()};
  manifest.finished_at = io::utc_timestamp();
  io::write_json_file(dir / "ideal_manifest.json", manifest.to_json());

  const auto& last = result.trace.records;
  std::cout << "L=" << a.layers << " sites=" << lattice.size() << " phases=" << a.phases
            << " up_count=" << (last.empty() ? result.state.up_count() : last.back().up_count)
            << " flips=" << result.trace.total_flips() << '\n';
  return ok;
}

// ---------------------------------------------------------------- mc

int cmd_mc(const std::string& config_path, const Common& common) {
  const json raw = io::read_json_file(config_path);
  io::SweepConfig sweep = io::sweep_config_from_json(raw);
  if (common.seed) sweep.rng_seed = *common.seed;
  auto configs = sweep.expand();
  for (auto& c : configs) {
    if (common.verify) c.scan = ScanMode::full;
    try {
      c.validate();
    } catch (const domain_error& e) {
      throw parse_error("", "configuration L=" + std::to_string(c.layers) + ": " + e.what());
    }
  }
  const fs::path dir = prepare_out_dir(common);
  io::RunManifest manifest;
  manifest.command = "mc";
  manifest.started_at = io::utc_timestamp();
  manifest.config = io::to_json(sweep);
  manifest.seeds = {sweep.rng_seed};

  std::vector<io::ExperimentRow> rows;
  json bundle{{"tool", "spinamp"}, {"version", version}, {"config", io::to_json(sweep)}, {"seeds", {sweep.rng_seed}}};
  bundle["results"] = json::array();
  for (const auto& c : configs) {
    const ExperimentResult r = run_experiment(c, common.threads);
    rows.push_back(io::experiment_row(r));
    bundle["results"].push_back(io::to_json(r));
    std::cout << "L=" << c.layers << " sites=" << r.sites << " eps0=" << c.noise.eps0 << " eps1=" << c.noise.eps1
              << " signal=" << r.signal.mean << " +- " << r.signal.std_err;
    if (r.contrast) std::cout << " contrast=" << *r.contrast;
    std::cout << '\n';
  }

  const fs::path csv_path = dir / "mc_results.csv";
  const fs::path json_path = dir / "mc_results.json";
  io::write_file(csv_path, [&](std::ostream& os) { io::write_experiment_csv(os, rows); });
  io::write_json_file(json_path, bundle);
  manifest.outputs = {csv_path.filename().string(), json_path.filename().string()};
  manifest.finished_at = io::utc_timestamp();
  io::write_json_file(dir / "mc_manifest.json", manifest.to_json());
  return ok;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  std::string geometry = "rhombo60";
  std::vector<double> angles;
  std::string orientation = "body-diagonal";
  std::string probe = "layer2";
  int layers = 8;
  std::string model = "compare";
  bool suppress = false;
  double cutoff = 2.5;
  double width = 50.0;
  std::uint64_t samples = 1'000'000;
  unsigned exhaustive_limit = 20;
  bool no_monte_carlo = false;
};

LatticeGeometry make_geometry(const SpectrumArgs& a) {
  if (a.orientation != "body-diagonal") throw usage_error("only --orientation body-diagonal is supported");
  try {
    if (!a.angles.empty()) {
      if (a.angles.size() != 3) throw usage_error("--angles takes alpha,beta,gamma in radians");
      return LatticeGeometry({a.angles[0], a.angles[1], a.angles[2]});
    }
    return LatticeGeometry::preset(a.geometry);
  } catch (const domain_error& e) {
    throw usage_error(e.what());
  }
}

// "layer2" is (1,0,0) inside the pyramid, "bulk" a site far from every
// surface, "x,y,z" an explicit pyramid site.
std::pair<Site, bool> parse_probe(const std::string& s, int layers) {
  if (s == "layer2") return {{1, 0, 0}, true};
  if (s == "bulk") return {{layers, layers, layers}, false};
  Site site;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> site.x >> c1 >> site.y >> c2 >> site.z) || c1 != ',' || c2 != ',' || !in.eof())
    throw usage_error("--probe must be layer2, bulk or x,y,z");
  return {site, true};
}

int cmd_spectrum(const SpectrumArgs& a, const Common& common) {
  const LatticeGeometry geometry = make_geometry(a);
  const auto [probe, in_pyramid] = parse_probe(a.probe, a.layers);
  std::optional<PyramidLattice> lattice;
  if (in_pyramid) {
    lattice.emplace(a.layers);
    if (!lattice->contains(probe)) throw usage_error("probe " + PyramidLattice::describe(probe) + " is outside the pyramid");
  }
  SpectrumConfig config;
  config.cutoff = a.cutoff;
  config.broadening_hz = a.width;
  config.samples = a.samples;
  config.exhaustive_limit = a.exhaustive_limit;
  config.allow_monte_carlo = !a.no_monte_carlo;
  config.rng_seed = common.seed.value_or(0);
  config.suppress_homonuclear = a.suppress;

  const fs::path dir = prepare_out_dir(common);
  io::RunManifest manifest;
  manifest.command = "spectrum";
  manifest.started_at = io::utc_timestamp();
  manifest.seeds = {config.rng_seed};
  manifest.config = {{"geometry", a.angles.empty() ? a.geometry : "custom"},
                     {"angles", {geometry.angles().alpha, geometry.angles().beta, geometry.angles().gamma}},
                     {"orientation", a.orientation},
                     {"probe", {probe.x, probe.y, probe.z}},
                     {"pyramid_layers", in_pyramid ? json(a.layers) : json(nullptr)},
                     {"model", a.model},
                     {"suppress_homonuclear", a.suppress},
                     {"cutoff", a.cutoff},
                     {"broadening_hz", a.width},
                     {"samples", a.samples},
                     {"exhaustive_limit", a.exhaustive_limit},
                     {"monte_carlo", !a.no_monte_carlo}};

  auto emit = [&](const std::string& name, const StickSpectrum& sticks, const BroadenedCurve& curve, double score) {
    const fs::path stick_path = dir / ("spectrum_" + name + "_sticks.json");
    const fs::path curve_path = dir / ("spectrum_" + name + ".csv");
    json j = io::to_json(sticks);
    j["model"] = name;
    j["addressability"] = score;
    io::write_json_file(stick_path, j);
    io::write_file(curve_path, [&](std::ostream& os) { io::write_curve_csv(os, curve); });
    manifest.outputs.push_back(stick_path.filename().string());
    manifest.outputs.push_back(curve_path.filename().string());
    std::cout << name << ": partners=" << sticks.partners << " sticks=" << sticks.sticks.size()
              << " addressability=" << score << '\n';
  };

  if (a.model == "compare") {
    const auto r = compare_models(geometry, probe, lattice ? &*lattice : nullptr, config);
    for (const auto* m : {&r.ideal, &r.full, &r.suppressed}) emit(m->name, m->sticks, m->curve, m->score);
  } else {
    try {
      config.model = coupling_model_from_string(a.model);
    } catch (const domain_error& e) {
      throw usage_error(e.what());
    }
    const auto sticks = lattice ? stick_spectrum(geometry, *lattice, probe, config) : stick_spectrum(geometry, probe, config);
    const auto grid = grid_for(sticks.max_abs_frequency(), config.broadening_hz, config.grid_points);
    std::string name = to_string(config.model);
    if (a.suppress) name += "-suppressed";
    emit(name, sticks, broaden(sticks.sticks, grid, config.broadening_hz),
         addressability_score(sticks, grid, config.broadening_hz));
  }
  manifest.finished_at = io::utc_timestamp();
  io::write_json_file(dir / "spectrum_manifest.json", manifest.to_json());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-driven spin lattice amplification: ideal runs, Monte Carlo sweeps and spectra"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "RNG seed (overrides the configuration)");
    sub->add_option("--threads", common.threads, "Worker threads for trials (0 = all cores)");
    sub->add_option("--out-dir", common.out_dir, "Directory for output files")->capture_default_str();
    sub->add_flag("--verify", common.verify, "Use the full-scan engine and cross-check where possible");
  };

  IdealArgs ideal;
  auto* ideal_cmd = app.add_subcommand("ideal", "Noiseless run from a single seeded apex");
  ideal_cmd->add_option("-L,--layers", ideal.layers, "Pyramid layers")->capture_default_str();
  ideal_cmd->add_option("-p,--phases", ideal.phases, "Number of phases (at most L-1)")->capture_default_str();
  ideal_cmd->add_option("--seed-value", ideal.seed_value, "Apex value, +1 or -1")->capture_default_str();
  ideal_cmd->add_option("--boundary", ideal.boundary, "embedded or open")->capture_default_str();
  ideal_cmd->add_flag("--plus-one", ideal.plus_one, "Also flip sites with neighbor field +1");
  add_common(ideal_cmd);

  std::string config_path;
  auto* mc_cmd = app.add_subcommand("mc", "Noisy Monte Carlo sweep from a JSON configuration");
  mc_cmd->add_option("config", config_path, "Sweep configuration (JSON)")->required();
  add_common(mc_cmd);

  SpectrumArgs spec;
  auto* spec_cmd = app.add_subcommand("spectrum", "Secular stick spectra of a probed spin");
  spec_cmd->add_option("--geometry", spec.geometry, "cubic or rhombo60")->capture_default_str();
  spec_cmd->add_option("--angles", spec.angles, "Custom Bravais angles alpha,beta,gamma (radians)")->delimiter(',');
  spec_cmd->add_option("--orientation", spec.orientation, "Crystal orientation")->capture_default_str();
  spec_cmd->add_option("--probe", spec.probe, "layer2, bulk or x,y,z")->capture_default_str();
  spec_cmd->add_option("-L,--layers", spec.layers, "Pyramid layers around a pyramid probe")->capture_default_str();
  spec_cmd->add_option("--model", spec.model, "compare, ideal-NN, dipolar-NN (full-NN) or full-dipolar")->capture_default_str();
  spec_cmd->add_flag("--suppress", spec.suppress, "Drop homonuclear couplings");
  spec_cmd->add_option("--cutoff", spec.cutoff, "Coupling cutoff in edge lengths")->capture_default_str();
  spec_cmd->add_option("--width", spec.width, "Gaussian broadening sigma in Hz")->capture_default_str();
  spec_cmd->add_option("--samples", spec.samples, "Monte Carlo samples")->capture_default_str();
  spec_cmd->add_option("--exhaustive-limit", spec.exhaustive_limit, "Largest partner count to enumerate")->capture_default_str();
  spec_cmd->add_flag("--no-monte-carlo", spec.no_monte_carlo, "Fail instead of sampling when enumeration is too large");
  add_common(spec_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*ideal_cmd) return cmd_ideal(ideal, common);
    if (*mc_cmd) return cmd_mc(config_path, common);
    if (*spec_cmd) return cmd_spectrum(spec, common);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return usage;
  } catch (const io_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return io_failure;
  } catch (const parse_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return malformed;
  } catch (const sizing_error& e) {
    std::cerr << "sizing error: " << e.what() << '\n';
    return capacity;
  } catch (const capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return capacity;
  } catch (const domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return failure;
}
