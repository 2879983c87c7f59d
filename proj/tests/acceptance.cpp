// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance            run criteria 1-10
//   acceptance 3 7        run the listed criteria
//   acceptance full-scale run the optional 1e8-site check (hours)

#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "reference_sim.hpp"
#include "spinamp/io.hpp"
#include "spinamp/spectrum.hpp"

using namespace spinamp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool same_state(const PyramidLattice& lat, const SpinState& s, const reference::Cube& c) {
  for (SiteId id = 0; id < lat.size(); ++id) {
    const Site site = lat.site(id);
    if (s.value(id) != c.at(site.x, site.y, site.z)) return false;
  }
  return true;
}

// 1. Every phase prefix of every run with L <= 20, p <= L-2 matches the
// brute-force cube, for both seeds, both rule sets, both boundary modes and
// both scan modes.
Outcome wavefront_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t comparisons = 0;
  for (int l = 2; l <= 20; ++l) {
    const PyramidLattice lat(l);
    for (int seed : {+1, -1})
      for (bool plus_one : {false, true})
        for (BoundaryMode mode : {BoundaryMode::embedded, BoundaryMode::open}) {
          const FieldSet targets = plus_one ? FieldSet::with_plus_one() : FieldSet::standard();
          const std::vector<int> ref_targets = plus_one ? std::vector<int>{-2, -1, 0, 1} : std::vector<int>{-2, -1, 0};
          const bool embedded = mode == BoundaryMode::embedded;
          reference::Cube cube(l);
          cube.at(0, 0, 0) = static_cast<std::int8_t>(seed);
          SpinState inc(lat), full(lat);
          seed_apex(inc, seed);
          seed_apex(full, seed);
          Automaton a(lat, mode, ScanMode::incremental), b(lat, mode, ScanMode::full);
          for (int p = 1; p <= l - 2; ++p) {
            const int parity = (p % 2 == 1) ? 1 : 0;
            for (int t : ref_targets) cube.pulse(parity, t, embedded);
            a.run_phase(inc, PulsePhase{phase_species(p), targets});
            b.run_phase(full, PulsePhase{phase_species(p), targets});
            comparisons += 2;
            if (!same_state(lat, inc, cube) || !same_state(lat, full, cube))
              return {false, fmt("mismatch at L=%d p=%d seed=%+d rule=%s boundary=%s", l, p, seed,
                                 plus_one ? "+1" : "default", to_string(mode))};
          }
        }
  }
  const double t = seconds_since(t0);
  return {t < 60.0, fmt("%llu phase states identical for L<=20, p<=L-2 (%.1f s, limit 60 s)",
                        static_cast<unsigned long long>(comparisons), t)};
}

// 2. A down seed never triggers a flip in the noiseless, embedded run.
Outcome down_seed_silence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t runs = 0;
  for (int l = 1; l <= 200; ++l) {
    const PyramidLattice lat(l);
    for (const FieldSet& targets : {FieldSet::standard(), FieldSet::with_plus_one()}) {
      IdealRunOptions opt;
      opt.targets = targets;
      const auto r = run_ideal(lat, -1, l - 1, opt);
      ++runs;
      if (r.trace.total_flips() != 0 || r.state.up_count() != 0)
        return {false, fmt("L=%d produced %llu flips", l, static_cast<unsigned long long>(r.trace.total_flips()))};
    }
  }
  return {true, fmt("%llu runs with L<=200, p=L-1, zero flips (%.1f s)", static_cast<unsigned long long>(runs),
                    seconds_since(t0))};
}

// 3. Closed form at n = 200 and the up-count of an L=202, p=200 run.
Outcome flip_count_formula() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t predicted = predicted_flip_count(200);
  const PyramidLattice lat(202);
  const auto r = run_ideal(lat, +1, 200);
  const std::uint64_t up = r.state.up_count();
  const double t = seconds_since(t0);
  const bool ok = predicted == 1'333'300 && up >= 1'330'000 && t < 10.0;
  return {ok, fmt("predicted_flip_count(200)=%llu (expect 1333300); L=202 p=200 up-count=%llu (expect >=1.33e6); "
                  "%.2f s (limit 10 s)",
                  static_cast<unsigned long long>(predicted), static_cast<unsigned long long>(up), t)};
}

// 4. Exact integer check of the 800-stage count against the stated value.
Outcome scaling_consistency() {
  const std::uint64_t stated = 85'226'800;
  const std::uint64_t got = predicted_flip_count(800);
  return {got == stated, fmt("predicted_flip_count(800)=%llu, stated value %llu", static_cast<unsigned long long>(got),
                             static_cast<unsigned long long>(stated))};
}

// 5. Cubic cell, body diagonal along the field: every NN coupling vanishes.
Outcome magic_angle_null() {
  const auto geom = LatticeGeometry::cubic();
  double worst = 0.0;
  for (const auto& s : unit_steps) {
    const Offset n(s[0], s[1], s[2]);
    for (Species sp : {Species::A, Species::B}) {
      const double g = geom.g(sp, opposite(sp));
      worst = std::max(worst, std::abs(geom.coupling(sp, n)) / g);
    }
  }
  return {worst < 1e-12, fmt("max |d|/g over the 6 NN bonds = %.3e (limit 1e-12)", worst)};
}

// 6. Second-layer probe, NN model, uniform partners: 2^4 enumeration.
Outcome ideal_spectrum() {
  const PyramidLattice lat(6);
  SpectrumConfig c;
  c.model = CouplingModel::ideal_nn;
  const auto s = stick_spectrum(LatticeGeometry::cubic(), lat, {1, 0, 0}, c);
  const double d0 = c.ideal_coupling_hz;
  // Oracle: count partner configurations by number of up partners.
  std::map<int, double> expected;
  for (unsigned mask = 0; mask < 16; ++mask) {
    int sum = 0;
    for (int j = 0; j < 4; ++j) sum += (mask >> j) & 1u ? 1 : -1;
    expected[sum] += 1.0 / 16.0;
  }
  bool ok = s.sticks.size() == expected.size();
  double worst = 0.0;
  if (ok) {
    std::size_t i = 0;
    for (const auto& [k, w] : expected) {
      worst = std::max(worst, std::abs(s.sticks[i].frequency_hz - 2.0 * d0 * k) / d0);
      worst = std::max(worst, std::abs(s.sticks[i].weight - w));
      ++i;
    }
    ok = worst <= 1e-9;
  }
  return {ok, fmt("%zu sticks at 2*d0*{-4,-2,0,2,4}, weights (1,4,6,4,1)/16, max deviation %.2e (limit 1e-9)",
                  s.sticks.size(), worst)};
}

// 7. Rhombohedral cell, bulk probe: suppression improves addressability and
// keeps each field cluster within one line width of its ideal position.
Outcome suppression_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = compare_models(LatticeGeometry::rhombo60(), {5, 5, 5}, nullptr);
  const double width = SpectrumConfig{}.broadening_hz;
  const auto ideal = cluster_centers(r.ideal.sticks);
  const auto suppressed = cluster_centers(r.suppressed.sticks);
  double worst = 0.0;
  bool fields_match = !suppressed.empty();
  for (const auto& [field, center] : suppressed) {
    const auto it = ideal.find(field);
    if (it == ideal.end()) {
      fields_match = false;
      continue;
    }
    worst = std::max(worst, std::abs(center - it->second));
  }
  const bool ok = r.suppressed.score < r.full.score && fields_match && worst <= width;
  return {ok, fmt("score suppressed=%.4f < full=%.4f; worst cluster offset %.1f Hz (limit %.0f Hz); %.1f s",
                  r.suppressed.score, r.full.score, worst, width, seconds_since(t0))};
}

ExperimentConfig desk_config(std::uint64_t sites, double eps1) {
  ExperimentConfig c;
  c.layers = layers_for_site_count(sites);
  c.phases = c.layers - 1;
  c.seed_value = SeedChoice::both;
  c.noise.eps0 = eps0_for_polarization(0.9, PolarizationConvention::population);
  c.noise.eps1 = eps1;
  c.noise.rng_seed = 2024;
  c.trials = 20;
  return c;
}

// 8. Signal versus size at 90% polarization for 1% and 5% gate errors.
Outcome desk_scale_signal() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::uint64_t> sizes{100'000, 1'000'000, 10'000'000};
  std::map<double, std::vector<ExperimentResult>> curves;
  for (double eps1 : {0.01, 0.05})
    for (auto n : sizes) curves[eps1].push_back(run_experiment(desk_config(n, eps1)));

  bool increasing = true, ordered = true;
  std::ostringstream table;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& lo = curves[0.01][i];
    const auto& hi = curves[0.05][i];
    for (const auto* curve : {&curves[0.01], &curves[0.05]})
      if (i > 0 && !((*curve)[i].signal.mean > (*curve)[i - 1].signal.mean)) increasing = false;
    const double slack = 3.0 * std::hypot(lo.signal.std_err, hi.signal.std_err);
    if (lo.signal.mean + slack < hi.signal.mean) ordered = false;
    table << fmt(" N=%llu: %.0f+-%.0f vs %.0f+-%.0f (contrast %.0f+-%.0f / %.0f+-%.0f);",
                 static_cast<unsigned long long>(lo.sites), lo.signal.mean, lo.signal.std_err, hi.signal.mean,
                 hi.signal.std_err, *lo.contrast, *lo.contrast_std_err, *hi.contrast, *hi.contrast_std_err);
  }
  return {increasing && ordered,
          fmt("eps0=%.2f, R=20, signal 1%% vs 5%%:", desk_config(1, 0.01).noise.eps0) + table.str() +
              fmt(" increasing=%s, 1%%>=5%% within 3 sigma=%s; %.0f s", increasing ? "yes" : "no",
                  ordered ? "yes" : "no", seconds_since(t0))};
}

// 8 (optional). One 1e8-site, ~800-phase noisy trial within a time budget and
// 64 MB of state memory.
Outcome full_scale() {
  double budget_hours = 4.0;
  if (const char* b = std::getenv("SPINAMP_FULL_SCALE_BUDGET_HOURS")) budget_hours = std::atof(b);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = desk_config(100'000'000, 0.01);
  c.trials = 1;
  const auto r = run_experiment(c, 1);
  const double hours = seconds_since(t0) / 3600.0;
  // Three site bitsets live at once: the trial state, the scan's pending set
  // and the noiseless reference.
  const double state_mb = 3.0 * static_cast<double>((r.sites + 63) / 64 * 8) / (1024.0 * 1024.0);
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double rss_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
  const double signal = r.signal.mean;
  const bool ok = hours <= budget_hours && state_mb <= 64.0 && signal >= 1e5 && signal <= 1e7;
  return {ok, fmt("N=%llu, %d phases, %.2f h (budget %.1f h), state %.1f MB (peak RSS %.1f MB, limit 64 MB), "
                  "signal %.3e (expect 1e5..1e7), contrast %.3e",
                  static_cast<unsigned long long>(r.sites), c.phases, hours, budget_hours, state_mb, rss_mb, signal,
                  *r.contrast)};
}

// 9. Planted single omissions, every site of every flipped layer for
// L <= 12 with p = L-2. Edge sites must cost more than interior sites of the
// same layer; this is compared only where at least one phase follows the
// omission, since an omission in the last phase costs exactly one site
// wherever it is. The +1 rule must never cost more than the default rule.
Outcome error_criticality() {
  std::uint64_t placements = 0, compared_layers = 0, worse = 0;
  std::string first_worse, first_tie;
  for (int l = 4; l <= 12; ++l) {
    const PyramidLattice lat(l);
    const int p = l - 2;
    for (int layer = 2; layer <= p + 1; ++layer) {
      const int depth = layer - 1;
      std::int64_t worst_interior = -1, best_edge = -1;
      for (int x = 0; x <= depth; ++x)
        for (int y = 0; x + y <= depth; ++y) {
          const Site s{x, y, depth - x - y};
          const auto d = planted_error_deficit(lat, s, p);
          const auto d1 = planted_error_deficit(lat, s, p, FieldSet::with_plus_one());
          ++placements;
          if (d1 > d && worse++ == 0)
            first_worse = fmt("L=%d %s: %lld > %lld", l, PyramidLattice::describe(s).c_str(),
                              static_cast<long long>(d1), static_cast<long long>(d));
          const auto cls = classify_site(lat, s);
          if (cls == SiteClass::interior) worst_interior = std::max(worst_interior, d);
          if (cls == SiteClass::edge) best_edge = best_edge < 0 ? d : std::min(best_edge, d);
        }
      if (layer - 1 == p || worst_interior < 0 || best_edge < 0) continue;
      ++compared_layers;
      if (best_edge <= worst_interior && first_tie.empty())
        first_tie = fmt("L=%d layer %d: edge %lld <= interior %lld", l, layer, static_cast<long long>(best_edge),
                        static_cast<long long>(worst_interior));
    }
  }
  std::string detail = fmt("%llu placements, %llu layers compared; ", static_cast<unsigned long long>(placements),
                           static_cast<unsigned long long>(compared_layers));
  detail += first_tie.empty() ? "edge > interior in every layer; " : "edge not worse: " + first_tie + "; ";
  detail += worse == 0 ? std::string("+1 rule never worse")
                       : fmt("+1 rule worse on %llu placements (first: %s)", static_cast<unsigned long long>(worse),
                             first_worse.c_str());
  return {first_tie.empty() && worse == 0, detail};
}

std::string csv_body(const ExperimentResult& r) {
  std::ostringstream os;
  io::write_experiment_csv(os, {io::experiment_row(r)});
  return os.str() + io::to_json(r).dump();
}

// 10. Identical seeds give byte-identical CSV and JSON for any thread count.
Outcome determinism() {
  std::vector<ExperimentConfig> configs(3);
  configs[0].layers = 30;
  configs[0].phases = 28;
  configs[0].seed_value = SeedChoice::both;
  configs[0].noise = {0.02, 0.05, 0.0, 11};
  configs[0].trials = 8;
  configs[1].layers = 25;
  configs[1].phases = 23;
  configs[1].noise = {0.1, 0.01, 0.001, 12};
  configs[1].plus_one_rule = true;
  configs[1].diffusion_steps = 3;
  configs[1].trials = 6;
  configs[2].layers = 40;
  configs[2].phases = 30;
  configs[2].seed_value = SeedChoice::both;
  configs[2].noise = {0.05, 0.05, 0.0, 13};
  configs[2].boundary = BoundaryMode::open;
  configs[2].trials = 5;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string first = csv_body(run_experiment(configs[i], 1));
    for (unsigned threads : {1u, 2u, 4u, 7u})
      if (csv_body(run_experiment(configs[i], threads)) != first)
        return {false, fmt("config %zu differs with %u threads", i, threads)};
  }
  return {true, "3 configurations x threads {1,1,2,4,7}: CSV and JSON bodies byte-identical"};
}

const std::map<std::string, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> table{
      {"1", {"ideal wavefront equals brute-force reference", wavefront_equivalence}},
      {"2", {"down seed stays silent", down_seed_silence}},
      {"3", {"flip-count formula at 200 stages", flip_count_formula}},
      {"4", {"flip-count scaling at 800 stages", scaling_consistency}},
      {"5", {"magic-angle null couplings", magic_angle_null}},
      {"6", {"ideal second-layer spectrum", ideal_spectrum}},
      {"7", {"homonuclear suppression restores addressability", suppression_reproduction}},
      {"8", {"signal grows with size at desk scale", desk_scale_signal}},
      {"9", {"edge errors are critical, +1 rule mitigates", error_criticality}},
      {"10", {"deterministic output across thread counts", determinism}},
      {"full-scale", {"1e8-site noisy run", full_scale}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty())
    for (int i = 1; i <= 10; ++i) selected.push_back(std::to_string(i));
  int failures = 0;
  for (const auto& key : selected) {
    const auto it = criteria().find(key);
    if (it == criteria().end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", key.c_str());
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %-10s %s  %s: %s\n", key.c_str(), o.pass ? "PASS" : "FAIL", it->second.first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
