#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spinamp/automaton.hpp"
#include "spinamp/errors.hpp"
#include "spinamp/geometry.hpp"
#include "spinamp/lattice.hpp"
#include "spinamp/rng.hpp"
#include "spinamp/spin_state.hpp"

namespace spinamp {

// How a quoted "initial polarization P" maps to the per-site flip probability.
enum class PolarizationConvention {
  population,     // P is the down-population fraction: eps0 = 1 - P
  magnetization,  // P is (N_down - N_up) / N:           eps0 = (1 - P) / 2
};

inline const char* to_string(PolarizationConvention c) noexcept {
  return c == PolarizationConvention::population ? "population" : "magnetization";
}

inline PolarizationConvention polarization_convention_from_string(const std::string& s) {
  if (s == "population") return PolarizationConvention::population;
  if (s == "magnetization") return PolarizationConvention::magnetization;
  throw domain_error("unknown polarization convention '" + s + "' (expected population or magnetization)");
}

inline double eps0_for_polarization(double polarization, PolarizationConvention c) {
  if (polarization < 0.0 || polarization > 1.0) throw domain_error("polarization must lie in [0, 1]");
  return c == PolarizationConvention::population ? 1.0 - polarization : 0.5 * (1.0 - polarization);
}

struct NoiseModel {
  double eps0 = 0.0;  // initial flip probability per site
  double eps1 = 0.0;  // probability that a pulse fails to flip a targeted site
  // Probability per phase that an untargeted site of the pulsed species
  // flips anyway. Not part of the omission-only model; off by default.
  double spurious = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    auto check = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw domain_error(std::string(name) + " must lie in [0, 1]");
    };
    check(eps0, "eps0");
    check(eps1, "eps1");
    check(spurious, "spurious");
  }
};

// Keys for the counter-based streams of one trial. Seed value does not enter
// the key, so +1 and -1 trials with the same index share their noise.
struct TrialKeys {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  std::uint64_t initial() const noexcept { return hash_key({seed, trial, static_cast<std::uint64_t>(Stream::initial)}); }
  std::uint64_t gate(int phase) const noexcept {
    return hash_key({seed, trial, static_cast<std::uint64_t>(Stream::gate), static_cast<std::uint64_t>(phase)});
  }
  std::uint64_t diffusion(int sweep) const noexcept {
    return hash_key({seed, trial, static_cast<std::uint64_t>(Stream::diffusion), static_cast<std::uint64_t>(sweep)});
  }
};

// Flip each site independently with probability eps0.
inline void randomize_initial(SpinState& state, double eps0, std::uint64_t key) {
  if (eps0 <= 0.0) return;
  for (SiteId id = 0; id < state.size(); ++id)
    if (bernoulli(key, id, eps0)) state.flip(id);
}

// Omission errors: each targeted site misses its flip with probability eps1.
struct GateNoise {
  std::uint64_t key = 0;
  double eps1 = 0.0;

  std::uint64_t operator()(std::uint64_t first, unsigned m, std::uint64_t targeted) const noexcept {
    return targeted & ~bernoulli_mask(key, first, m, eps1);
  }
};

// A pulse that misses each targeted site with probability eps1. Sites outside
// the target set never change.
inline std::uint64_t noisy_pulse(const PyramidLattice& lattice, SpinState& state, Species species, int field,
                                 double eps1, std::uint64_t key, BoundaryMode mode = BoundaryMode::embedded) {
  if (field < -6 || field > 6) return 0;
  Automaton engine(lattice, mode, ScanMode::full);
  return engine.run_phase(state, PulsePhase{species, FieldSet{field}}, GateNoise{key, eps1}).flips;
}

// Classical surrogate of homonuclear spin diffusion. A sweep makes P random
// pair updates, P being the number of same-species pairs inside the lattice
// that are separated by a homonuclear-shell offset; each update picks one such
// pair uniformly and swaps it with probability `exchange` if anti-aligned.
class Diffuser {
 public:
  Diffuser(const PyramidLattice& lattice, std::vector<Offset> shell, double exchange = 0.5)
      : lattice_(&lattice), exchange_(exchange) {
    if (exchange < 0.0 || exchange > 1.0) throw domain_error("exchange probability must lie in [0, 1]");
    // Keep one offset of every +-n pair.
    for (const auto& n : shell) {
      const bool canonical = n.x() > 0 || (n.x() == 0 && (n.y() > 0 || (n.y() == 0 && n.z() > 0)));
      if (canonical) half_shell_.push_back(n);
    }
    for (SiteId id = 0; id < lattice.size(); ++id) {
      const Site s = lattice.site(id);
      for (const auto& n : half_shell_)
        if (lattice.contains(partner(s, n))) ++pairs_;
    }
  }

  Diffuser(const PyramidLattice& lattice, const LatticeGeometry& geometry, double exchange = 0.5)
      : Diffuser(lattice, homonuclear_shell(geometry), exchange) {}

  std::uint64_t pair_count() const noexcept { return pairs_; }
  const std::vector<Offset>& half_shell() const noexcept { return half_shell_; }

  // Returns the number of exchanges performed.
  std::uint64_t sweep(SpinState& state, std::uint64_t key) const {
    if (pairs_ == 0 || half_shell_.empty()) return 0;
    const auto n_sites = lattice_->size();
    const auto n_offsets = static_cast<std::uint64_t>(half_shell_.size());
    std::uint64_t counter = 0;
    std::uint64_t swaps = 0;
    for (std::uint64_t done = 0; done < pairs_;) {
      const std::uint64_t r = mix64(key ^ mix64(counter++));
      const auto id = static_cast<SiteId>(uniform_below(r, n_sites));
      const auto& off = half_shell_[static_cast<std::size_t>(uniform_below(mix64(r), n_offsets))];
      const Site s = lattice_->site(id);
      const Site t = partner(s, off);
      if (!lattice_->contains(t)) continue;
      ++done;
      const SiteId other = lattice_->unchecked_id(t);
      if (state.up(id) == state.up(other)) continue;
      if (!bernoulli(key ^ 0x5bd1e995u, counter, exchange_)) continue;
      state.flip(id);
      state.flip(other);
      ++swaps;
    }
    return swaps;
  }

  void diffuse(SpinState& state, int steps, const TrialKeys& keys) const {
    for (int step = 0; step < steps; ++step) sweep(state, keys.diffusion(step));
  }

 private:
  static Site partner(const Site& s, const Offset& n) { return {s.x + n.x(), s.y + n.y(), s.z + n.z()}; }

  static std::uint64_t uniform_below(std::uint64_t r, std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(r) * n) >> 64);
  }

  const PyramidLattice* lattice_;
  double exchange_;
  std::vector<Offset> half_shell_;
  std::uint64_t pairs_ = 0;
};

inline void diffuse(const PyramidLattice& lattice, const LatticeGeometry& geometry, SpinState& state, int steps,
                    const TrialKeys& keys, double exchange = 0.5) {
  if (steps < 0) throw domain_error("diffusion steps must be non-negative");
  if (steps == 0) return;
  Diffuser(lattice, geometry, exchange).diffuse(state, steps, keys);
}

enum class SiteClass { corner, edge, face, interior };

inline const char* to_string(SiteClass c) noexcept {
  switch (c) {
    case SiteClass::corner: return "corner";
    case SiteClass::edge: return "edge";
    case SiteClass::face: return "face";
    case SiteClass::interior: return "interior";
  }
  return "?";
}

// Number of bounding planes (x=0, y=0, z=0, bottom layer) the site lies on.
inline SiteClass classify_site(const PyramidLattice& lattice, const Site& site) {
  if (!lattice.contains(site)) throw domain_error("site " + PyramidLattice::describe(site) + " is outside the pyramid");
  const int planes = (site.x == 0) + (site.y == 0) + (site.z == 0) + (site.layer() == lattice.layers());
  switch (planes) {
    case 0: return SiteClass::interior;
    case 1: return SiteClass::face;
    case 2: return SiteClass::edge;
    default: return SiteClass::corner;
  }
}

// Up-count lost, relative to the noiseless +1 run, when `site` misses the
// flip of the phase that should turn it up (phase = layer - 1). Rows are
// scanned in id order, so the failing lane is found by id.
inline std::int64_t planted_error_deficit(const PyramidLattice& lattice, const Site& site, int phases,
                                          FieldSet targets = FieldSet::standard(),
                                          BoundaryMode mode = BoundaryMode::embedded) {
  if (!lattice.contains(site)) throw domain_error("site " + PyramidLattice::describe(site) + " is outside the pyramid");
  const int fail_phase = site.layer() - 1;
  if (fail_phase < 1 || fail_phase > phases) throw domain_error("site is not flipped within the given phases");
  const std::uint64_t bad = lattice.unchecked_id(site);
  auto run = [&](bool plant) {
    SpinState state(lattice);
    seed_apex(state, +1);
    Automaton engine(lattice, mode, ScanMode::incremental);
    for (int p = 1; p <= phases; ++p) {
      const PulsePhase phase{phase_species(p), targets};
      if (plant && p == fail_phase) {
        engine.run_phase(state, phase, [bad](std::uint64_t first, unsigned m, std::uint64_t t) {
          return bad >= first && bad < first + m ? t & ~(std::uint64_t{1} << (bad - first)) : t;
        });
      } else {
        engine.run_phase(state, phase);
      }
    }
    return static_cast<std::int64_t>(state.up_count());
  };
  return run(false) - run(true);
}

enum class SeedChoice { plus, minus, both };

inline const char* to_string(SeedChoice s) noexcept {
  switch (s) {
    case SeedChoice::plus: return "+1";
    case SeedChoice::minus: return "-1";
    case SeedChoice::both: return "both";
  }
  return "?";
}

struct ExperimentConfig {
  int layers = 10;
  int phases = 8;
  SeedChoice seed_value = SeedChoice::plus;
  NoiseModel noise;
  bool plus_one_rule = false;
  int diffusion_steps = 0;
  double exchange_probability = 0.5;
  std::string geometry = "rhombo60";  // sets the homonuclear shell for diffusion
  int trials = 1;
  BoundaryMode boundary = BoundaryMode::embedded;
  ScanMode scan = ScanMode::incremental;
  std::uint64_t max_sites = default_max_sites;

  FieldSet rule_set() const { return plus_one_rule ? FieldSet::with_plus_one() : FieldSet::standard(); }

  void validate() const {
    if (layers < 1) throw sizing_error("layers must be at least 1");
    if (phases < 0) throw domain_error("phases must be non-negative");
    if (phases > layers - 1)
      throw domain_error("phases (" + std::to_string(phases) + ") exceeds layers - 1 (" + std::to_string(layers - 1) + ")");
    if (trials < 1) throw domain_error("trials must be at least 1");
    if (diffusion_steps < 0) throw domain_error("diffusion_steps must be non-negative");
    noise.validate();
    if (exchange_probability < 0.0 || exchange_probability > 1.0)
      throw domain_error("exchange_probability must lie in [0, 1]");
  }
};

struct TrialResult {
  SpinState state;
  RunTrace trace;
  std::uint64_t up_count = 0;
};

// One trial on a prebuilt lattice. Deterministic in (rng_seed, trial_index).
inline TrialResult run_trial(const PyramidLattice& lattice, const ExperimentConfig& config, std::uint64_t trial_index,
                             int seed_value, const Diffuser* diffuser = nullptr) {
  const TrialKeys keys{config.noise.rng_seed, trial_index};
  TrialResult out{SpinState(lattice), {}, 0};
  randomize_initial(out.state, config.noise.eps0, keys.initial());
  seed_apex(out.state, seed_value);
  if (config.diffusion_steps > 0) {
    if (diffuser) {
      diffuser->diffuse(out.state, config.diffusion_steps, keys);
    } else {
      Diffuser local(lattice, LatticeGeometry::preset(config.geometry), config.exchange_probability);
      local.diffuse(out.state, config.diffusion_steps, keys);
    }
  }

  const FieldSet targets = config.rule_set();
  out.trace.sites = lattice.size();
  out.trace.pulses_per_phase = targets.size();
  out.trace.records.reserve(static_cast<std::size_t>(config.phases));
  Automaton engine(lattice, config.boundary, config.scan);
  auto up = static_cast<std::int64_t>(out.state.up_count());
  const auto n = static_cast<std::int64_t>(lattice.size());
  const double eps1 = config.noise.eps1;
  for (int p = 1; p <= config.phases; ++p) {
    const PulsePhase phase{phase_species(p), targets};
    const std::uint64_t gate_key = keys.gate(p);
    PhaseOutcome o;
    if (eps1 > 0.0) o = engine.run_phase(out.state, phase, GateNoise{gate_key, eps1});
    else o = engine.run_phase(out.state, phase);
    up += o.up_delta;
    if (config.noise.spurious > 0.0) {
      // Spurious flips bypass the engine's candidate tracking.
      const std::uint64_t spurious_key = hash_key({gate_key, 0x7370757269ull});
      const int parity = phase.species == Species::A ? 0 : 1;
      bool touched = false;
      for (int layer = 1 + parity; layer <= lattice.layers(); layer += 2)
        for (SiteId id = lattice.layer_begin(layer); id < lattice.layer_end(layer); ++id)
          if (bernoulli(spurious_key, id, config.noise.spurious)) {
            up += out.state.up(id) ? -1 : 1;
            out.state.flip(id);
            ++o.flips;
            touched = true;
          }
      if (touched) engine.invalidate();
    }
    out.trace.records.push_back({p, phase.species, o.flips, static_cast<std::uint64_t>(up), 2 * up - n});
  }
  out.up_count = static_cast<std::uint64_t>(up);
  return out;
}

inline TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_index, int seed_value) {
  config.validate();
  PyramidLattice lattice(config.layers, config.max_sites);
  return run_trial(lattice, config, trial_index, seed_value);
}

struct SampleStats {
  double mean = 0.0;
  double std_err = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline SampleStats summarize(const std::vector<double>& xs) {
  SampleStats s;
  if (xs.empty()) return s;
  const auto n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std_err = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

struct ExperimentResult {
  ExperimentConfig config;
  std::uint64_t sites = 0;
  std::vector<std::uint64_t> up_plus;   // final up-count per trial, seed +1
  std::vector<std::uint64_t> up_minus;  // final up-count per trial, seed -1
  SampleStats signal;                   // over up_plus, or up_minus for a -1-only run
  std::optional<double> contrast;       // mean(up_plus - up_minus), paired trials
  std::optional<double> contrast_std_err;
  std::vector<double> layer_profile;    // mean up-count per layer (signal trials)
  // Mean number of sites per class whose final value differs from the
  // noiseless run with the same seed (signal trials).
  std::array<double, 4> error_histogram{};
};

// Fold per-trial results of `trials` independent trials run on up to
// `threads` worker threads. Output does not depend on the thread count.
inline ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0) {
  config.validate();
  const PyramidLattice lattice(config.layers, config.max_sites);
  std::optional<Diffuser> diffuser;
  if (config.diffusion_steps > 0)
    diffuser.emplace(lattice, LatticeGeometry::preset(config.geometry), config.exchange_probability);

  const bool want_plus = config.seed_value != SeedChoice::minus;
  const bool want_minus = config.seed_value != SeedChoice::plus;
  const int signal_seed = want_plus ? +1 : -1;
  const auto trials = static_cast<std::size_t>(config.trials);

  // Noiseless reference for the error census.
  IdealRunOptions ideal_opt{config.boundary, ScanMode::incremental, config.rule_set()};
  const SpinState reference = run_ideal(lattice, signal_seed, config.phases, ideal_opt).state;

  ExperimentResult result;
  result.config = config;
  result.sites = lattice.size();
  if (want_plus) result.up_plus.assign(trials, 0);
  if (want_minus) result.up_minus.assign(trials, 0);
  std::vector<std::vector<std::uint64_t>> layer_counts(trials);
  std::vector<std::array<std::uint64_t, 4>> errors(trials);

  auto work = [&](std::size_t t) {
    for (int seed : {+1, -1}) {
      if ((seed > 0 && !want_plus) || (seed < 0 && !want_minus)) continue;
      TrialResult r = run_trial(lattice, config, t, seed, diffuser ? &*diffuser : nullptr);
      (seed > 0 ? result.up_plus : result.up_minus)[t] = r.up_count;
      if (seed != signal_seed) continue;
      auto& counts = layer_counts[t];
      counts.resize(static_cast<std::size_t>(lattice.layers()));
      for (int layer = 1; layer <= lattice.layers(); ++layer)
        counts[static_cast<std::size_t>(layer - 1)] = r.state.up_count(lattice.layer_begin(layer), lattice.layer_end(layer));
      auto& hist = errors[t];
      hist.fill(0);
      const auto& a = r.state.words();
      const auto& b = reference.words();
      for (std::size_t w = 0; w < a.size(); ++w) {
        std::uint64_t diff = a[w] ^ b[w];
        while (diff) {
          const auto id = static_cast<SiteId>((w << 6) + static_cast<std::size_t>(std::countr_zero(diff)));
          diff &= diff - 1;
          ++hist[static_cast<std::size_t>(classify_site(lattice, lattice.site(id)))];
        }
      }
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));
  if (workers <= 1) {
    for (std::size_t t = 0; t < trials; ++t) work(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < trials; t = next++) {
          try {
            work(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  const auto& signal_counts = want_plus ? result.up_plus : result.up_minus;
  std::vector<double> xs(signal_counts.begin(), signal_counts.end());
  result.signal = summarize(xs);
  if (want_plus && want_minus) {
    std::vector<double> diffs(trials);
    for (std::size_t t = 0; t < trials; ++t)
      diffs[t] = static_cast<double>(result.up_plus[t]) - static_cast<double>(result.up_minus[t]);
    const SampleStats c = summarize(diffs);
    result.contrast = c.mean;
    result.contrast_std_err = c.std_err;
  }
  result.layer_profile.assign(static_cast<std::size_t>(lattice.layers()), 0.0);
  for (const auto& counts : layer_counts)
    for (std::size_t l = 0; l < counts.size(); ++l) result.layer_profile[l] += static_cast<double>(counts[l]);
  for (auto& v : result.layer_profile) v /= static_cast<double>(trials);
  for (const auto& h : errors)
    for (std::size_t c = 0; c < 4; ++c) result.error_histogram[c] += static_cast<double>(h[c]);
  for (auto& v : result.error_histogram) v /= static_cast<double>(trials);
  return result;
}

}  // namespace spinamp
