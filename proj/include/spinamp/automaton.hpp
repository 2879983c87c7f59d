#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/lattice.hpp"
#include "spinamp/spin_state.hpp"

namespace spinamp {

// How layer-L sites see the missing half of the crystal below the cut.
enum class BoundaryMode {
  embedded,  // three virtual, always-down children per bottom site
  open,      // the bottom layer is a free surface
};

inline const char* to_string(BoundaryMode m) noexcept { return m == BoundaryMode::embedded ? "embedded" : "open"; }

inline BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "embedded") return BoundaryMode::embedded;
  if (s == "open") return BoundaryMode::open;
  throw domain_error("unknown boundary mode '" + s + "' (expected embedded or open)");
}

// Set of neighbor-field values in [-6, 6] that a pulse addresses.
class FieldSet {
 public:
  constexpr FieldSet() = default;
  FieldSet(std::initializer_list<int> fields) {
    for (int f : fields) insert(f);
  }

  static FieldSet standard() { return FieldSet{-2, -1, 0}; }
  static FieldSet with_plus_one() { return FieldSet{-2, -1, 0, 1}; }

  void insert(int field) {
    if (field < -6 || field > 6) throw domain_error("neighbor field " + std::to_string(field) + " outside [-6, 6]");
    mask_ |= static_cast<std::uint16_t>(1u << (field + 6));
  }

  constexpr bool contains(int field) const noexcept {
    return field >= -6 && field <= 6 && ((mask_ >> (field + 6)) & 1u);
  }

  std::vector<int> values() const {
    std::vector<int> out;
    for (int f = -6; f <= 6; ++f)
      if (contains(f)) out.push_back(f);
    return out;
  }

  int size() const noexcept { return std::popcount(mask_); }
  constexpr std::uint16_t mask() const noexcept { return mask_; }

  // "-2,-1,0" style label.
  std::string label() const {
    std::string s;
    for (int f : values()) s += (s.empty() ? "" : ",") + std::to_string(f);
    return s;
  }

  friend constexpr bool operator==(const FieldSet&, const FieldSet&) = default;

 private:
  std::uint16_t mask_ = 0;
};

struct PulsePhase {
  Species species = Species::B;
  FieldSet targets = FieldSet::standard();
};

// Phases alternate B, A, B, ... starting with phase 1.
inline constexpr Species phase_species(int phase) noexcept { return (phase % 2 == 1) ? Species::B : Species::A; }

// Up neighbors minus down neighbors. Bottom-layer sites in embedded mode
// also count three virtual down children.
inline int neighbor_field(const PyramidLattice& lattice, const SpinState& state, const Site& site,
                          BoundaryMode mode = BoundaryMode::embedded) {
  if (!lattice.contains(site)) throw domain_error("site " + PyramidLattice::describe(site) + " is outside the pyramid");
  int field = 0;
  lattice.for_each_neighbor(site, [&](const Site& n) { field += state.value(lattice.unchecked_id(n)); });
  if (mode == BoundaryMode::embedded && site.layer() == lattice.layers()) field -= 3;
  return field;
}

inline void seed_apex(SpinState& state, int value) { state.set(0, value > 0); }

// (n+1) n (n-1) / 6: up spins after n stages by the closed-form count.
inline std::uint64_t predicted_flip_count(std::uint64_t n) {
  if (n < 1) throw domain_error("stage count must be at least 1");
  if (n > 2'000'000) throw sizing_error("stage count " + std::to_string(n) + " exceeds 2000000 (overflow guard)");
  return (n + 1) * n * (n - 1) / 6;
}

// Sites in the first n layers, n(n+1)(n+2)/6. This exceeds
// predicted_flip_count(n) by n(n+1)/2, the size of layer n.
inline std::uint64_t layers_up_count(std::uint64_t n) {
  if (n > 2'000'000) throw sizing_error("layer count " + std::to_string(n) + " exceeds 2000000 (overflow guard)");
  return tetrahedral(n);
}

struct PhaseRecord {
  int phase = 0;
  Species species = Species::B;
  std::uint64_t flips = 0;
  std::uint64_t up_count = 0;
  std::int64_t magnetization = 0;
};

struct RunTrace {
  std::uint64_t sites = 0;
  int pulses_per_phase = 3;
  std::vector<PhaseRecord> records;

  std::size_t phases() const noexcept { return records.size(); }
  // One step is a B phase followed by an A phase.
  std::size_t steps() const noexcept { return (records.size() + 1) / 2; }
  std::size_t pulses() const noexcept { return records.size() * static_cast<std::size_t>(pulses_per_phase); }
  std::uint64_t total_flips() const noexcept {
    std::uint64_t n = 0;
    for (const auto& r : records) n += r.flips;
    return n;
  }

  void write_csv(std::ostream& os) const {
    os << "phase,species,flips,up_count,magnetization\n";
    for (const auto& r : records)
      os << r.phase << ',' << to_string(r.species) << ',' << r.flips << ',' << r.up_count << ',' << r.magnetization
         << '\n';
  }
};

enum class ScanMode {
  incremental,  // only sites whose field may have changed
  full,         // every site of the phase species, for cross-checking
};

struct PhaseOutcome {
  std::uint64_t flips = 0;
  std::uint64_t targeted = 0;
  std::int64_t up_delta = 0;
};

// Flip filters receive the targeted lanes of a run of `m` consecutive ids
// starting at `first` and return the lanes that actually flip.
struct AlwaysFlip {
  constexpr std::uint64_t operator()(std::uint64_t, unsigned, std::uint64_t targeted) const noexcept { return targeted; }
};

namespace detail {

inline constexpr std::uint64_t low_mask(unsigned m) noexcept { return m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1; }

// m (<= 64) bits starting at bit `pos`.
inline std::uint64_t load_bits(const std::vector<std::uint64_t>& w, std::uint64_t pos, unsigned m) noexcept {
  if (m == 0) return 0;
  const std::uint64_t i = pos >> 6;
  const unsigned b = static_cast<unsigned>(pos & 63);
  std::uint64_t v = w[i] >> b;
  if (b != 0 && b + m > 64) v |= w[i + 1] << (64 - b);
  return v & low_mask(m);
}

// `v` must have no bits above the field it addresses.
inline void xor_bits(std::vector<std::uint64_t>& w, std::uint64_t pos, std::uint64_t v) noexcept {
  const std::uint64_t i = pos >> 6;
  const unsigned b = static_cast<unsigned>(pos & 63);
  w[i] ^= v << b;
  if (b != 0 && (v >> (64 - b)) != 0) w[i + 1] ^= v >> (64 - b);
}

inline void or_bits(std::vector<std::uint64_t>& w, std::uint64_t pos, std::uint64_t v) noexcept {
  const std::uint64_t i = pos >> 6;
  const unsigned b = static_cast<unsigned>(pos & 63);
  w[i] |= v << b;
  if (b != 0 && (v >> (64 - b)) != 0) w[i + 1] |= v >> (64 - b);
}

inline void assign_bits(std::vector<std::uint64_t>& w, std::uint64_t pos, unsigned m, std::uint64_t v) noexcept {
  const std::uint64_t i = pos >> 6;
  const unsigned b = static_cast<unsigned>(pos & 63);
  const std::uint64_t mask = low_mask(m);
  w[i] = (w[i] & ~(mask << b)) | (v << b);
  if (b != 0 && b + m > 64) w[i + 1] = (w[i + 1] & ~(mask >> (64 - b))) | (v >> (64 - b));
}

struct Planes3 {
  std::uint64_t b0, b1, b2;
};

inline void full_add(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t& sum, std::uint64_t& carry) noexcept {
  const std::uint64_t t = a ^ b;
  sum = t ^ c;
  carry = (a & b) | (c & t);
}

// Lane-wise population count of six bit vectors.
inline Planes3 count6(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d, std::uint64_t e,
                      std::uint64_t f) noexcept {
  std::uint64_t s1, c1, s2, c2;
  full_add(a, b, c, s1, c1);
  full_add(d, e, f, s2, c2);
  const std::uint64_t b0 = s1 ^ s2;
  const std::uint64_t c3 = s1 & s2;
  std::uint64_t b1, b2;
  full_add(c1, c2, c3, b1, b2);
  return {b0, b1, b2};
}

}  // namespace detail

// Field-conditioned NOT pulses over a pyramid.
//
// A site's field depends only on opposite-species spins, so all pulses of a
// phase can be evaluated against the pre-phase state and applied in place.
// Rows of constant (layer, x) are contiguous in id space and so are their six
// neighbor rows; fields are therefore evaluated 64 sites at a time with
// bit-sliced adders. Each neighbor slot contributes 2 if up, 0 if down and 1
// if absent, so the lane sum is field + 6.
//
// Between two phases of species S, the set of S sites whose field lies in the
// target set can only grow through neighbors of spins flipped in the
// intervening phase. The engine tracks that candidate set in a bitset and
// skips 64-site chunks with no candidates.
class Automaton {
 public:
  Automaton(const PyramidLattice& lattice, BoundaryMode mode = BoundaryMode::embedded,
            ScanMode scan = ScanMode::incremental)
      : lattice_(&lattice), mode_(mode), scan_(scan), pending_(lattice.size()) {
    offsets_.resize(static_cast<std::size_t>(lattice.layers()) + 2);
    for (int s = 0; s <= lattice.layers() + 1; ++s)
      offsets_[static_cast<std::size_t>(s)] = tetrahedral(static_cast<std::uint64_t>(s));
    invalidate();
  }

  const PyramidLattice& lattice() const noexcept { return *lattice_; }
  BoundaryMode boundary() const noexcept { return mode_; }
  ScanMode scan_mode() const noexcept { return scan_; }

  // Forget candidate tracking; the next phase of each species scans fully.
  // Required after any modification of the state made outside this engine.
  void invalidate() {
    full_[0] = full_[1] = true;
    pending_.fill(false);
    lo_[0] = lo_[1] = lattice_->layers();
    hi_[0] = hi_[1] = -1;
  }

  // Apply one phase. `filter` selects which targeted sites actually flip
  // (see AlwaysFlip); it must depend only on its arguments.
  template <class Filter = AlwaysFlip>
  PhaseOutcome run_phase(SpinState& state, const PulsePhase& phase, Filter&& filter = {}) {
    if (state.size() != lattice_->size()) throw domain_error("spin state does not match the lattice size");
    const int sp = static_cast<int>(phase.species);
    const int parity = phase.species == Species::A ? 0 : 1;
    const bool full = full_[sp] || scan_ == ScanMode::full;

    int first = parity;
    int last = lattice_->layers() - 1;
    if (!full) {
      first = std::max(first, lo_[sp]);
      last = std::min(last, hi_[sp]);
    }
    lo_[sp] = lattice_->layers();
    hi_[sp] = -1;

    Targets match = compile(phase.targets);
    PhaseOutcome out;
    for (int s = first; s <= last; ++s) {
      if ((s & 1) != parity) continue;
      for (int x = 0; x <= s; ++x) scan_row(state, phase.species, match, filter, full, s, x, out);
    }
    full_[sp] = false;
    return out;
  }

 private:
  // Field + 6 values that are targeted, as 4-bit patterns.
  struct Targets {
    std::array<int, 13> values{};
    int count = 0;
  };

  static Targets compile(const FieldSet& set) {
    Targets t;
    for (int f = -6; f <= 6; ++f)
      if (set.contains(f)) t.values[static_cast<std::size_t>(t.count++)] = f + 6;
    return t;
  }

  template <class Filter>
  void scan_row(SpinState& state, Species species, const Targets& match, Filter& filter, bool full, int s, int x,
                PhaseOutcome& out) {
    using namespace detail;
    const auto depth = static_cast<std::uint64_t>(s);
    const auto ux = static_cast<std::uint64_t>(x);
    const std::uint64_t len = depth - ux + 1;
    const std::uint64_t base = offsets_[depth] + PyramidLattice::row_start(depth, ux);
    const bool has_parents = s > 0;
    const bool has_children = s < lattice_->layers() - 1;
    const bool virtual_children = !has_children && mode_ == BoundaryMode::embedded;
    std::uint64_t parent_xm = 0, parent_x = 0, child_xp = 0, child_x = 0;
    if (has_parents) {
      parent_x = offsets_[depth - 1] + PyramidLattice::row_start(depth - 1, ux);
      if (x > 0) parent_xm = offsets_[depth - 1] + PyramidLattice::row_start(depth - 1, ux - 1);
    }
    if (has_children) {
      child_x = offsets_[depth + 1] + PyramidLattice::row_start(depth + 1, ux);
      child_xp = offsets_[depth + 1] + PyramidLattice::row_start(depth + 1, ux + 1);
    }
    auto& sw = state.words();
    auto& pw = pending_.words();
    const int other = (s & 1) ^ 1;

    for (std::uint64_t y0 = 0; y0 < len; y0 += 64) {
      const auto m = static_cast<unsigned>(std::min<std::uint64_t>(64, len - y0));
      const std::uint64_t lanes = low_mask(m);
      if (!full && load_bits(pw, base + y0, m) == 0) continue;

      // Parent slots: -e1 (needs x>0), -e2 (needs y>0), -e3 (needs z>0).
      std::uint64_t p1 = 0, p2 = 0, p3 = 0, v1 = 0, v2 = 0, v3 = 0;
      if (has_parents) {
        if (x > 0) {
          v1 = lanes;
          p1 = load_bits(sw, parent_xm + y0, m);
        }
        if (y0 == 0) {
          v2 = lanes & ~std::uint64_t{1};
          p2 = m > 1 ? load_bits(sw, parent_x, m - 1) << 1 : 0;
        } else {
          v2 = lanes;
          p2 = load_bits(sw, parent_x + y0 - 1, m);
        }
        const auto m3 = static_cast<unsigned>(std::min<std::uint64_t>(m, len - 1 - y0));
        v3 = low_mask(m3);
        p3 = load_bits(sw, parent_x + y0, m3);
      }
      std::uint64_t c1 = 0, c2 = 0, c3 = 0, vc = 0;
      if (has_children) {
        vc = lanes;
        c1 = load_bits(sw, child_xp + y0, m);
        c2 = load_bits(sw, child_x + y0 + 1, m);
        c3 = load_bits(sw, child_x + y0, m);
      } else if (virtual_children) {
        vc = lanes;
      }

      const Planes3 ups = count6(p1 & v1, p2 & v2, p3 & v3, c1 & vc, c2 & vc, c3 & vc);
      const std::uint64_t absent_c = lanes & ~vc;
      const Planes3 absent = count6(lanes & ~v1, lanes & ~v2, lanes & ~v3, absent_c, absent_c, absent_c);
      // total = 2 * ups + absent, four bit planes.
      const std::uint64_t t0 = absent.b0;
      const std::uint64_t t1 = ups.b0 ^ absent.b1;
      const std::uint64_t k1 = ups.b0 & absent.b1;
      std::uint64_t t2, k2;
      full_add(ups.b1, absent.b2, k1, t2, k2);
      const std::uint64_t t3 = ups.b2 ^ k2;

      std::uint64_t targeted = 0;
      for (int i = 0; i < match.count; ++i) {
        const int v = match.values[static_cast<std::size_t>(i)];
        targeted |= ((v & 1) ? t0 : ~t0) & ((v & 2) ? t1 : ~t1) & ((v & 4) ? t2 : ~t2) & ((v & 8) ? t3 : ~t3);
      }
      targeted &= lanes;
      assign_bits(pw, base + y0, m, targeted);
      if (!targeted) continue;
      lo_[static_cast<int>(species)] = std::min(lo_[static_cast<int>(species)], s);
      hi_[static_cast<int>(species)] = std::max(hi_[static_cast<int>(species)], s);
      out.targeted += static_cast<std::uint64_t>(std::popcount(targeted));

      const std::uint64_t flips = filter(base + y0, m, targeted) & targeted;
      if (!flips) continue;
      const std::uint64_t old = load_bits(sw, base + y0, m);
      out.up_delta += std::popcount(flips & ~old) - std::popcount(flips & old);
      out.flips += static_cast<std::uint64_t>(std::popcount(flips));
      xor_bits(sw, base + y0, flips);

      // Opposite-species neighbors of flipped sites become candidates.
      if (has_parents) {
        if (x > 0) or_bits(pw, parent_xm + y0, flips);
        if (y0 == 0) or_bits(pw, parent_x, flips >> 1);
        else or_bits(pw, parent_x + y0 - 1, flips);
        or_bits(pw, parent_x + y0, flips & v3);
        lo_[other] = std::min(lo_[other], s - 1);
        hi_[other] = std::max(hi_[other], s - 1);
      }
      if (has_children) {
        or_bits(pw, child_xp + y0, flips);
        or_bits(pw, child_x + y0 + 1, flips);
        or_bits(pw, child_x + y0, flips);
        lo_[other] = std::min(lo_[other], s + 1);
        hi_[other] = std::max(hi_[other], s + 1);
      }
    }
  }

  const PyramidLattice* lattice_;
  BoundaryMode mode_;
  ScanMode scan_;
  std::vector<std::uint64_t> offsets_;
  SpinState pending_;  // candidate bits, reused as a plain bitset
  bool full_[2] = {true, true};
  int lo_[2] = {0, 0};
  int hi_[2] = {-1, -1};
};

// Flip every site of `species` whose pre-pulse neighbor field equals `field`.
// Scans all sites; intended for single pulses and verification.
inline std::uint64_t apply_pulse(const PyramidLattice& lattice, SpinState& state, Species species, int field,
                                 BoundaryMode mode = BoundaryMode::embedded) {
  if (field < -6 || field > 6) return 0;
  Automaton engine(lattice, mode, ScanMode::full);
  return engine.run_phase(state, PulsePhase{species, FieldSet{field}}).flips;
}

inline std::uint64_t run_phase(const PyramidLattice& lattice, SpinState& state, const PulsePhase& phase,
                               BoundaryMode mode = BoundaryMode::embedded) {
  Automaton engine(lattice, mode, ScanMode::full);
  return engine.run_phase(state, phase).flips;
}

struct RunResult {
  SpinState state;
  RunTrace trace;
};

struct IdealRunOptions {
  BoundaryMode boundary = BoundaryMode::embedded;
  ScanMode scan = ScanMode::incremental;
  FieldSet targets = FieldSet::standard();
};

// Noiseless run from the all-down state with the apex set to `seed`.
inline RunResult run_ideal(const PyramidLattice& lattice, int seed, int phases, const IdealRunOptions& opt = {}) {
  if (phases < 0) throw domain_error("phase count must be non-negative");
  RunResult result{SpinState(lattice), {}};
  seed_apex(result.state, seed);
  result.trace.sites = lattice.size();
  result.trace.pulses_per_phase = opt.targets.size();
  result.trace.records.reserve(static_cast<std::size_t>(phases));
  Automaton engine(lattice, opt.boundary, opt.scan);
  std::int64_t up = static_cast<std::int64_t>(result.state.up_count());
  const auto n = static_cast<std::int64_t>(lattice.size());
  for (int p = 1; p <= phases; ++p) {
    const PulsePhase phase{phase_species(p), opt.targets};
    const PhaseOutcome o = engine.run_phase(result.state, phase);
    up += o.up_delta;
    result.trace.records.push_back({p, phase.species, o.flips, static_cast<std::uint64_t>(up), 2 * up - n});
  }
  return result;
}

}  // namespace spinamp
