#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/geometry.hpp"
#include "spinamp/lattice.hpp"
#include "spinamp/rng.hpp"

namespace spinamp {

// Secular stick spectra of a probed spin. A partner configuration s_j = +-1
// shifts the probe by sum_j 2 d_j s_j; each stick also remembers the probe's
// nearest-neighbor field, which is what a pulse has to resolve.

struct SpectrumConfig {
  CouplingModel model = CouplingModel::ideal_nn;
  bool suppress_homonuclear = false;
  double cutoff = 2.5;  // edge lengths, full_dipolar only
  double floor_hz = 0.0;
  double ideal_coupling_hz = nominal_coupling_hz;
  double up_probability = 0.5;  // partner polarization bias
  unsigned exhaustive_limit = 20;
  bool allow_monte_carlo = true;
  std::uint64_t samples = 1'000'000;
  std::uint64_t rng_seed = 0;
  double broadening_hz = 50.0;  // Gaussian sigma
  std::size_t grid_points = 4096;

  void validate() const {
    if (!(up_probability >= 0.0 && up_probability <= 1.0)) throw domain_error("up_probability must lie in [0, 1]");
    if (exhaustive_limit > 30) throw domain_error("exhaustive_limit above 30 is not supported");
    if (samples == 0) throw domain_error("samples must be positive");
    if (!(broadening_hz > 0.0)) throw domain_error("broadening width must be positive");
    if (grid_points < 2) throw domain_error("grid needs at least two points");
  }
};

struct Stick {
  double frequency_hz = 0.0;
  double weight = 0.0;

  friend bool operator==(const Stick&, const Stick&) = default;
};

struct StickSpectrum {
  std::vector<Stick> sticks;                   // merged by frequency, ascending
  std::map<int, std::vector<Stick>> by_field;  // nearest-neighbor field -> its sticks
  std::size_t partners = 0;
  bool exhaustive = true;
  std::uint64_t samples = 0;  // configurations drawn (Monte Carlo) or enumerated

  double max_abs_frequency() const {
    double m = 0.0;
    for (const auto& s : sticks) m = std::max(m, std::abs(s.frequency_hz));
    return m;
  }
  double total_weight() const {
    double w = 0.0;
    for (const auto& s : sticks) w += s.weight;
    return w;
  }
};

namespace detail {

struct RawStick {
  double frequency;
  double weight;
  int field;
};

inline std::vector<Stick> merge_sorted(const std::vector<RawStick>& raw, std::size_t begin, std::size_t end, double tol) {
  std::vector<Stick> out;
  for (std::size_t i = begin; i < end;) {
    const double anchor = raw[i].frequency;
    double weight = 0.0;
    double moment = 0.0;
    std::size_t j = i;
    for (; j < end && raw[j].frequency - anchor <= tol; ++j) {
      weight += raw[j].weight;
      moment += raw[j].weight * raw[j].frequency;
    }
    out.push_back({weight > 0.0 ? moment / weight : anchor, weight});
    i = j;
  }
  return out;
}

}  // namespace detail

// Sticks for an explicit coupling table.
inline StickSpectrum stick_spectrum(const CouplingTable& table, const SpectrumConfig& config) {
  config.validate();
  std::vector<double> d;
  std::vector<bool> nearest;
  double max_d = 0.0;
  for (const auto& e : table.entries) {
    if (config.suppress_homonuclear && e.homonuclear) continue;
    d.push_back(e.d);
    nearest.push_back(e.nearest);
    max_d = std::max(max_d, std::abs(e.d));
  }
  const std::size_t n = d.size();

  StickSpectrum out;
  out.partners = n;
  out.exhaustive = n <= config.exhaustive_limit;
  if (!out.exhaustive && !config.allow_monte_carlo)
    throw capacity_error(std::to_string(n) + " coupled partners exceed the exhaustive limit of " +
                         std::to_string(config.exhaustive_limit) + " and Monte Carlo sampling is disabled");

  const double p = config.up_probability;
  std::vector<detail::RawStick> raw;
  auto shift = [&](auto&& up) {
    double f = 0.0;
    int field = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const int s = up(j) ? 1 : -1;
      f += 2.0 * d[j] * s;
      if (nearest[j]) field += s;
    }
    return std::pair{f, field};
  };

  if (out.exhaustive) {
    const std::uint64_t configs = std::uint64_t{1} << n;
    out.samples = configs;
    raw.reserve(static_cast<std::size_t>(configs));
    for (std::uint64_t c = 0; c < configs; ++c) {
      const auto ups = std::popcount(c);
      const double w = std::pow(p, ups) * std::pow(1.0 - p, static_cast<int>(n) - ups);
      if (w == 0.0) continue;
      const auto [f, field] = shift([c](std::size_t j) { return (c >> j) & 1; });
      raw.push_back({f, w, field});
    }
  } else {
    out.samples = config.samples;
    raw.reserve(static_cast<std::size_t>(config.samples));
    const std::uint64_t key = hash_key({config.rng_seed, static_cast<std::uint64_t>(Stream::spectrum)});
    const double w = 1.0 / static_cast<double>(config.samples);
    const std::uint64_t blocks = (n + 63) / 64;
    std::vector<std::uint64_t> bits(static_cast<std::size_t>(blocks));
    for (std::uint64_t k = 0; k < config.samples; ++k) {
      if (p == 0.5) {
        // Unbiased partners take one random bit each.
        for (std::uint64_t b = 0; b < blocks; ++b) bits[b] = mix64(key ^ mix64(k * blocks + b));
        const auto [f, field] = shift([&](std::size_t j) { return (bits[j >> 6] >> (j & 63)) & 1; });
        raw.push_back({f, w, field});
      } else {
        const auto [f, field] = shift([&](std::size_t j) { return bernoulli(key, k * n + j, p); });
        raw.push_back({f, w, field});
      }
    }
  }

  // Couplings that vanish up to rounding still merge into one stick.
  const double tol = 1e-6 * std::max(max_d, 1.0);
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
  out.sticks = detail::merge_sorted(raw, 0, raw.size(), tol);
  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.field < b.field; });
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j].field == raw[i].field) ++j;
    out.by_field[raw[i].field] = detail::merge_sorted(raw, i, j, tol);
    i = j;
  }
  return out;
}

inline CouplingOptions coupling_options(const SpectrumConfig& config) {
  CouplingOptions opt;
  opt.model = config.model;
  opt.cutoff = config.cutoff;
  opt.floor_hz = config.floor_hz;
  opt.ideal_coupling_hz = config.ideal_coupling_hz;
  return opt;
}

// Probe in an unbounded crystal.
inline StickSpectrum stick_spectrum(const LatticeGeometry& geometry, const Site& probe, const SpectrumConfig& config) {
  return stick_spectrum(coupling_table(geometry, probe, coupling_options(config)), config);
}

// Probe inside a pyramid, keeping its truncated neighborhood.
inline StickSpectrum stick_spectrum(const LatticeGeometry& geometry, const PyramidLattice& lattice, const Site& probe,
                                    const SpectrumConfig& config) {
  return stick_spectrum(coupling_table(geometry, lattice, probe, coupling_options(config)), config);
}

struct FrequencyGrid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;

  double step() const noexcept { return (hi - lo) / static_cast<double>(points - 1); }
  double at(std::size_t i) const noexcept { return lo + step() * static_cast<double>(i); }
  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

// Symmetric grid wide enough for 1.5x the largest shift and the Gaussian tails.
inline FrequencyGrid grid_for(double max_abs_frequency, double sigma, std::size_t points = 4096) {
  if (!(sigma > 0.0)) throw domain_error("broadening width must be positive");
  if (points < 2) throw domain_error("grid needs at least two points");
  const double half = std::max(1.5 * max_abs_frequency, max_abs_frequency + 8.0 * sigma);
  return {-half, half, points};
}

struct BroadenedCurve {
  FrequencyGrid grid;
  std::vector<double> intensity;

  double integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < intensity.size(); ++i) s += 0.5 * (intensity[i - 1] + intensity[i]);
    return s * grid.step();
  }
};

namespace detail {

// Sum of weighted unit-area Gaussians, each evaluated within +-8 sigma.
inline BroadenedCurve gaussian_sum(const std::vector<Stick>& sticks, const FrequencyGrid& grid, double sigma) {
  if (!(sigma > 0.0)) throw domain_error("broadening width must be positive");
  BroadenedCurve c{grid, std::vector<double>(grid.points, 0.0)};
  const double h = grid.step();
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  for (const auto& s : sticks) {
    const double a = std::max(0.0, std::ceil((s.frequency_hz - 8.0 * sigma - grid.lo) / h));
    const double b = std::min(static_cast<double>(grid.points - 1), std::floor((s.frequency_hz + 8.0 * sigma - grid.lo) / h));
    for (auto i = static_cast<std::size_t>(a); static_cast<double>(i) <= b; ++i) {
      const double u = (grid.at(i) - s.frequency_hz) / sigma;
      c.intensity[i] += s.weight * norm * std::exp(-0.5 * u * u);
    }
  }
  return c;
}

inline void normalize(BroadenedCurve& c) {
  const double area = c.integral();
  if (area > 0.0)
    for (auto& v : c.intensity) v /= area;
}

}  // namespace detail

// Gaussian line shape of width sigma per stick, scaled to unit trapezoidal
// area. An empty stick list gives a zero curve.
inline BroadenedCurve broaden(const std::vector<Stick>& sticks, const FrequencyGrid& grid, double sigma) {
  BroadenedCurve c = detail::gaussian_sum(sticks, grid, sigma);
  detail::normalize(c);
  return c;
}

// Overlap of two unit-area curves, integral of min(p, q): 1 for identical
// curves, 0 for disjoint support.
inline double addressability_metric(const BroadenedCurve& on, const BroadenedCurve& off) {
  if (!(on.grid == off.grid) || on.intensity.size() != off.intensity.size())
    throw domain_error("addressability needs both curves on the same grid");
  BroadenedCurve m{on.grid, std::vector<double>(on.intensity.size())};
  for (std::size_t i = 0; i < m.intensity.size(); ++i) m.intensity[i] = std::min(on.intensity[i], off.intensity[i]);
  return std::clamp(m.integral(), 0.0, 1.0);
}

// Worst overlap between the sticks of one nearest-neighbor field and the
// sticks of all other fields.
inline double addressability_score(const StickSpectrum& spectrum, const FrequencyGrid& grid, double sigma) {
  if (spectrum.by_field.size() < 2) return 0.0;
  std::vector<BroadenedCurve> own;
  for (const auto& [field, sticks] : spectrum.by_field) own.push_back(detail::gaussian_sum(sticks, grid, sigma));
  BroadenedCurve total{grid, std::vector<double>(grid.points, 0.0)};
  for (const auto& c : own)
    for (std::size_t i = 0; i < grid.points; ++i) total.intensity[i] += c.intensity[i];
  double worst = 0.0;
  for (auto& on : own) {
    BroadenedCurve off{grid, std::vector<double>(grid.points)};
    for (std::size_t i = 0; i < grid.points; ++i) off.intensity[i] = std::max(0.0, total.intensity[i] - on.intensity[i]);
    detail::normalize(on);
    detail::normalize(off);
    worst = std::max(worst, addressability_metric(on, off));
  }
  return worst;
}

// Weighted mean frequency of the sticks of each nearest-neighbor field.
inline std::map<int, double> cluster_centers(const StickSpectrum& spectrum) {
  std::map<int, double> out;
  for (const auto& [field, sticks] : spectrum.by_field) {
    double w = 0.0, m = 0.0;
    for (const auto& s : sticks) {
      w += s.weight;
      m += s.weight * s.frequency_hz;
    }
    if (w > 0.0) out[field] = m / w;
  }
  return out;
}

struct ModelSpectrum {
  std::string name;
  StickSpectrum sticks;
  BroadenedCurve curve;
  double score = 0.0;
};

struct ModelComparison {
  FrequencyGrid grid;
  ModelSpectrum ideal;       // nearest neighbors at the nominal coupling
  ModelSpectrum full;        // every partner within the cutoff
  ModelSpectrum suppressed;  // same, homonuclear couplings removed
};

// The three spectra of one probe on a common grid. `lattice` may be null
// for a probe in the bulk.
inline ModelComparison compare_models(const LatticeGeometry& geometry, const Site& probe, const PyramidLattice* lattice,
                                      const SpectrumConfig& base = {}) {
  auto run = [&](CouplingModel model, bool suppress) {
    SpectrumConfig c = base;
    c.model = model;
    c.suppress_homonuclear = suppress;
    return lattice ? stick_spectrum(geometry, *lattice, probe, c) : stick_spectrum(geometry, probe, c);
  };
  ModelComparison out;
  out.ideal.name = to_string(CouplingModel::ideal_nn);
  out.ideal.sticks = run(CouplingModel::ideal_nn, false);
  out.full.name = to_string(CouplingModel::full_dipolar);
  out.full.sticks = run(CouplingModel::full_dipolar, false);
  out.suppressed.name = std::string(to_string(CouplingModel::full_dipolar)) + "-suppressed";
  out.suppressed.sticks = run(CouplingModel::full_dipolar, true);

  double widest = 0.0;
  for (const auto* m : {&out.ideal, &out.full, &out.suppressed}) widest = std::max(widest, m->sticks.max_abs_frequency());
  out.grid = grid_for(widest, base.broadening_hz, base.grid_points);
  for (auto* m : {&out.ideal, &out.full, &out.suppressed}) {
    m->curve = broaden(m->sticks.sticks, out.grid, base.broadening_hz);
    m->score = addressability_score(m->sticks, out.grid, base.broadening_hz);
  }
  return out;
}

}  // namespace spinamp
