#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/lattice.hpp"

namespace spinamp {

// One bit per site: 1 = up (+1), 0 = down (-1).
class SpinState {
 public:
  SpinState() = default;
  explicit SpinState(std::uint64_t sites) : size_(sites), words_((sites + 63) / 64, 0) {}
  explicit SpinState(const PyramidLattice& lattice) : SpinState(lattice.size()) {}

  std::uint64_t size() const noexcept { return size_; }

  bool up(SiteId id) const noexcept { return (words_[id >> 6] >> (id & 63)) & 1u; }
  int value(SiteId id) const noexcept { return up(id) ? 1 : -1; }

  void set(SiteId id, bool is_up) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (id & 63);
    if (is_up) words_[id >> 6] |= mask;
    else words_[id >> 6] &= ~mask;
  }
  void set_value(SiteId id, int v) noexcept { set(id, v > 0); }
  void flip(SiteId id) noexcept { words_[id >> 6] ^= std::uint64_t{1} << (id & 63); }

  void fill(bool is_up) {
    std::fill(words_.begin(), words_.end(), is_up ? ~std::uint64_t{0} : 0);
    trim();
  }

  std::uint64_t up_count() const noexcept {
    std::uint64_t n = 0;
    for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
  }

  // Up spins in [begin, end).
  std::uint64_t up_count(SiteId begin, SiteId end) const noexcept {
    std::uint64_t n = 0;
    for (std::uint64_t i = begin; i < end;) {
      const std::uint64_t w = i >> 6;
      const unsigned lo = static_cast<unsigned>(i & 63);
      const std::uint64_t span = std::min<std::uint64_t>(64 - lo, end - i);
      std::uint64_t bits = words_[w] >> lo;
      if (span < 64) bits &= (std::uint64_t{1} << span) - 1;
      n += static_cast<std::uint64_t>(std::popcount(bits));
      i += span;
    }
    return n;
  }

  std::int64_t magnetization() const noexcept {
    return 2 * static_cast<std::int64_t>(up_count()) - static_cast<std::int64_t>(size_);
  }

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  std::vector<std::uint64_t>& words() noexcept { return words_; }

  friend bool operator==(const SpinState&, const SpinState&) = default;

  // Binary form: "SPST", u64 site count, then little-endian 64-bit words.
  void write(std::ostream& os) const {
    os.write("SPST", 4);
    put_u64(os, size_);
    for (auto w : words_) put_u64(os, w);
    if (!os) throw std::runtime_error("failed to write spin state");
  }

  static SpinState read(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SPST", 4) != 0) throw parse_error("", "not a spin state stream");
    SpinState s(get_u64(is));
    for (auto& w : s.words_) w = get_u64(is);
    if (!is) throw parse_error("", "truncated spin state stream");
    s.trim();
    return s;
  }

 private:
  void trim() noexcept {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  static void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }

  static std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8] = {};
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace spinamp
