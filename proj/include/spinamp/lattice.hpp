#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spinamp/errors.hpp"

namespace spinamp {

using SiteId = std::uint32_t;

enum class Species : std::uint8_t { A, B };

inline constexpr Species opposite(Species s) noexcept { return s == Species::A ? Species::B : Species::A; }

inline const char* to_string(Species s) noexcept { return s == Species::A ? "A" : "B"; }

// Lattice coordinates of a pyramid site. The apex is (0,0,0); the layer
// index is the Manhattan distance from the apex plus one.
struct Site {
  int x = 0;
  int y = 0;
  int z = 0;

  constexpr int depth() const noexcept { return x + y + z; }
  constexpr int layer() const noexcept { return depth() + 1; }
  constexpr Species species() const noexcept { return (depth() % 2 == 0) ? Species::A : Species::B; }

  friend constexpr bool operator==(const Site&, const Site&) = default;
};

inline constexpr Species species_of_layer(int layer) noexcept {
  return ((layer - 1) % 2 == 0) ? Species::A : Species::B;
}

// Unit steps of the simple-cubic index lattice: +e1, +e2, +e3, -e1, -e2, -e3.
inline constexpr std::array<std::array<int, 3>, 6> unit_steps{{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}}};

// Number of sites in a pyramid of `layers` layers: L(L+1)(L+2)/6.
inline constexpr std::uint64_t tetrahedral(std::uint64_t layers) noexcept {
  return layers * (layers + 1) * (layers + 2) / 6;
}

// Sites in layer ℓ (1-based): ℓ(ℓ+1)/2.
inline constexpr std::uint64_t triangular(std::uint64_t layer) noexcept { return layer * (layer + 1) / 2; }

// Smallest layer count whose pyramid holds at least `sites` sites.
inline int layers_for_site_count(std::uint64_t sites) {
  int layers = 1;
  while (tetrahedral(static_cast<std::uint64_t>(layers)) < sites) ++layers;
  return layers;
}

inline constexpr std::uint64_t default_max_sites = std::numeric_limits<SiteId>::max();

// Corner-cut octant of the simple-cubic index lattice: all (x,y,z) >= 0 with
// x+y+z <= L-1. Ids are dense and layer-major, so every layer occupies a
// contiguous id range; inside a layer, sites are ordered by x, then y.
//
// Neighbor lists are not materialized. They follow from the coordinates in
// O(1), which keeps a 10^8-site pyramid within a few bytes of index data.
class PyramidLattice {
 public:
  explicit PyramidLattice(int layers, std::uint64_t max_sites = default_max_sites) : layers_(layers) {
    if (layers < 1) throw sizing_error("pyramid needs at least one layer (got " + std::to_string(layers) + ")");
    const std::uint64_t limit = std::min<std::uint64_t>(max_sites, default_max_sites);
    const std::uint64_t n = tetrahedral(static_cast<std::uint64_t>(layers));
    if (n > limit) {
      throw sizing_error("pyramid of " + std::to_string(layers) + " layers has " + std::to_string(n) +
                         " sites, exceeding the site budget of " + std::to_string(limit));
    }
    offsets_.resize(static_cast<std::size_t>(layers) + 1);
    for (int s = 0; s <= layers; ++s) offsets_[static_cast<std::size_t>(s)] = tetrahedral(static_cast<std::uint64_t>(s));
  }

  int layers() const noexcept { return layers_; }
  std::uint64_t size() const noexcept { return offsets_.back(); }

  std::uint64_t layer_size(int layer) const noexcept { return triangular(static_cast<std::uint64_t>(layer)); }
  // First id of a layer (1-based); layer_begin(L+1) == size().
  SiteId layer_begin(int layer) const noexcept { return static_cast<SiteId>(offsets_[static_cast<std::size_t>(layer - 1)]); }
  SiteId layer_end(int layer) const noexcept { return static_cast<SiteId>(offsets_[static_cast<std::size_t>(layer)]); }

  bool contains(const Site& s) const noexcept {
    return s.x >= 0 && s.y >= 0 && s.z >= 0 && s.depth() <= layers_ - 1;
  }

  SiteId id(const Site& s) const {
    if (!contains(s)) throw domain_error("site " + describe(s) + " is outside the pyramid");
    return unchecked_id(s);
  }

  SiteId unchecked_id(const Site& s) const noexcept {
    const auto depth = static_cast<std::uint64_t>(s.depth());
    return static_cast<SiteId>(offsets_[depth] + row_start(depth, static_cast<std::uint64_t>(s.x)) +
                               static_cast<std::uint64_t>(s.y));
  }

  Site site(SiteId id) const {
    if (id >= size()) throw domain_error("site id " + std::to_string(id) + " is outside the pyramid");
    // Layer by bisection over the offset table.
    std::size_t lo = 0;
    std::size_t hi = static_cast<std::size_t>(layers_);
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (offsets_[mid] <= id) lo = mid;
      else hi = mid;
    }
    const std::uint64_t depth = lo;
    const std::uint64_t local = id - offsets_[depth];
    std::uint64_t x = row_of(depth, local);
    const std::uint64_t y = local - row_start(depth, x);
    return Site{static_cast<int>(x), static_cast<int>(y), static_cast<int>(depth - x - y)};
  }

  template <class F>
  void for_each_neighbor(const Site& s, F&& f) const {
    for (const auto& step : unit_steps) {
      const Site n{s.x + step[0], s.y + step[1], s.z + step[2]};
      if (contains(n)) f(n);
    }
  }

  std::vector<Site> neighbors_of(const Site& s) const {
    if (!contains(s)) throw domain_error("site " + describe(s) + " is outside the pyramid");
    std::vector<Site> out;
    out.reserve(6);
    for_each_neighbor(s, [&](const Site& n) { out.push_back(n); });
    return out;
  }

  int neighbor_count(const Site& s) const noexcept {
    int parents = (s.x > 0) + (s.y > 0) + (s.z > 0);
    int children = s.depth() < layers_ - 1 ? 3 : 0;
    return parents + children;
  }

  // Offset of row x within a layer of the given depth (0-based x+y+z).
  static constexpr std::uint64_t row_start(std::uint64_t depth, std::uint64_t x) noexcept {
    return x * (depth + 1) - x * (x - 1) / 2;
  }

  static std::string describe(const Site& s) {
    return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + "," + std::to_string(s.z) + ")";
  }

 private:
  static std::uint64_t row_of(std::uint64_t depth, std::uint64_t local) noexcept {
    // Row x starts at x(2d+3-x)/2; estimate by the quadratic root and fix up.
    const double b = 2.0 * static_cast<double>(depth) + 3.0;
    const double disc = b * b - 8.0 * static_cast<double>(local);
    auto x = static_cast<std::int64_t>((b - std::sqrt(std::max(disc, 0.0))) / 2.0);
    x = std::clamp<std::int64_t>(x, 0, static_cast<std::int64_t>(depth));
    auto ux = static_cast<std::uint64_t>(x);
    while (ux > 0 && row_start(depth, ux) > local) --ux;
    while (ux < depth && row_start(depth, ux + 1) <= local) ++ux;
    return ux;
  }

  int layers_;
  std::vector<std::uint64_t> offsets_;
};

}  // namespace spinamp
