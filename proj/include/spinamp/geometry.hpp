#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/lattice.hpp"

namespace spinamp {

using Offset = Eigen::Vector3i;

inline constexpr double nominal_coupling_hz = 1000.0;

struct BravaisAngles {
  double alpha = std::numbers::pi / 2;  // between a2 and a3
  double beta = std::numbers::pi / 2;   // between a1 and a3
  double gamma = std::numbers::pi / 2;  // between a1 and a2
};

// Dipolar prefactors g (Hz * length^3) per species pair. Unset entries are
// filled by normalization so that the strongest heteronuclear nearest-
// neighbor coupling is `nominal_coupling_hz`.
struct CouplingPrefactors {
  std::optional<double> g_ab;
  std::optional<double> g_aa;
  std::optional<double> g_bb;
};

// Second Legendre polynomial P2(cos t) = (3cos^2 t - 1)/2.
inline double legendre_p2(double cos_theta) noexcept { return 0.5 * (3.0 * cos_theta * cos_theta - 1.0); }

// Primitive Bravais cell with equal edges, rotated so that the body diagonal
// a1+a2+a3 lies along +z. Site (x,y,z) sits at x*a1 + y*a2 + z*a3.
class LatticeGeometry {
 public:
  explicit LatticeGeometry(BravaisAngles angles, double edge = 1.0, CouplingPrefactors g = {})
      : angles_(angles), edge_(edge) {
    if (!(edge > 0.0)) throw domain_error("edge length must be positive");
    const double ca = std::cos(angles.alpha);
    const double cb = std::cos(angles.beta);
    const double cg = std::cos(angles.gamma);
    const double sg = std::sin(angles.gamma);
    const double volume_term = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
    if (!(volume_term > 1e-12) || std::abs(sg) < 1e-12) {
      throw domain_error("Bravais angles do not span a three-dimensional cell");
    }
    Eigen::Matrix3d cell;
    cell.col(0) = Eigen::Vector3d(1.0, 0.0, 0.0);
    cell.col(1) = Eigen::Vector3d(cg, sg, 0.0);
    cell.col(2) = Eigen::Vector3d(cb, (ca - cb * cg) / sg, std::sqrt(volume_term) / sg);
    const Eigen::Vector3d diagonal = cell.rowwise().sum();
    const Eigen::Quaterniond to_z = Eigen::Quaterniond::FromTwoVectors(diagonal, Eigen::Vector3d::UnitZ());
    basis_ = edge * (to_z.toRotationMatrix() * cell);

    const double strongest = max_nearest_neighbor_factor();
    // A cell whose bonds all sit at the magic angle has no heteronuclear
    // coupling to normalize against; fall back to g/a^3 = nominal.
    const double scale_factor = strongest > 1e-12 ? strongest : 1.0;
    const double g_default = nominal_coupling_hz * edge * edge * edge / scale_factor;
    g_ab_ = g.g_ab.value_or(g_default);
    g_aa_ = g.g_aa.value_or(g_ab_);
    g_bb_ = g.g_bb.value_or(g_ab_);
  }

  static LatticeGeometry cubic(double edge = 1.0, CouplingPrefactors g = {}) {
    return LatticeGeometry({std::numbers::pi / 2, std::numbers::pi / 2, std::numbers::pi / 2}, edge, g);
  }

  static LatticeGeometry rhombo60(double edge = 1.0, CouplingPrefactors g = {}) {
    return LatticeGeometry({std::numbers::pi / 3, std::numbers::pi / 3, std::numbers::pi / 3}, edge, g);
  }

  // "cubic" or "rhombo60".
  static LatticeGeometry preset(const std::string& name, double edge = 1.0, CouplingPrefactors g = {}) {
    if (name == "cubic") return cubic(edge, g);
    if (name == "rhombo60") return rhombo60(edge, g);
    throw domain_error("unknown geometry preset '" + name + "' (expected cubic or rhombo60)");
  }

  const BravaisAngles& angles() const noexcept { return angles_; }
  double edge() const noexcept { return edge_; }
  const Eigen::Matrix3d& basis() const noexcept { return basis_; }
  Eigen::Vector3d primitive(int i) const { return basis_.col(i); }

  Eigen::Vector3d position(const Offset& n) const { return basis_ * n.cast<double>(); }
  Eigen::Vector3d position(const Site& s) const { return position(Offset(s.x, s.y, s.z)); }

  double g(Species a, Species b) const noexcept {
    if (a != b) return g_ab_;
    return a == Species::A ? g_aa_ : g_bb_;
  }

  // Largest |P2| among the nearest-neighbor bond directions +-a_i.
  double max_nearest_neighbor_factor() const {
    double best = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d v = basis_.col(i);
      best = std::max(best, std::abs(legendre_p2(v.z() / v.norm())));
    }
    return best;
  }

  // Coupling between a site of species `from` and the site displaced by `n`.
  double coupling(Species from, const Offset& n) const {
    if (n.isZero()) throw domain_error("dipolar coupling of coincident sites");
    const Eigen::Vector3d r = position(n);
    const double dist = r.norm();
    const bool same = ((n.x() + n.y() + n.z()) % 2) == 0;
    const Species to = same ? from : opposite(from);
    return g(from, to) / (dist * dist * dist) * legendre_p2(r.z() / dist);
  }

  // Smallest eigenvalue of the metric, in units of edge^2: |position(n)|^2 >= lambda |n|^2.
  double metric_floor() const {
    const Eigen::Matrix3d metric = basis_.transpose() * basis_;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(metric, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

 private:
  BravaisAngles angles_;
  double edge_;
  Eigen::Matrix3d basis_;
  double g_ab_ = 0.0;
  double g_aa_ = 0.0;
  double g_bb_ = 0.0;
};

// d_ij = g_ij / r^3 * (3cos^2(theta) - 1)/2, theta measured from z.
inline double dipolar_coupling(const LatticeGeometry& geometry, const Site& i, const Site& j) {
  if (i == j) throw domain_error("dipolar coupling of coincident site " + PyramidLattice::describe(i));
  return geometry.coupling(i.species(), Offset(j.x - i.x, j.y - i.y, j.z - i.z));
}

enum class CouplingModel {
  ideal_nn,      // Manhattan neighbors only, all at the nominal coupling
  dipolar_nn,    // Manhattan neighbors only, true dipolar couplings
  full_dipolar,  // every partner within the cutoff
};

inline const char* to_string(CouplingModel m) noexcept {
  switch (m) {
    case CouplingModel::ideal_nn: return "ideal-NN";
    case CouplingModel::dipolar_nn: return "dipolar-NN";
    case CouplingModel::full_dipolar: return "full-dipolar";
  }
  return "?";
}

inline CouplingModel coupling_model_from_string(const std::string& s) {
  if (s == "ideal-NN" || s == "ideal" || s == "ideal-nn") return CouplingModel::ideal_nn;
  if (s == "dipolar-NN" || s == "full-NN" || s == "dipolar-nn" || s == "full-nn") return CouplingModel::dipolar_nn;
  if (s == "full-dipolar" || s == "full") return CouplingModel::full_dipolar;
  throw domain_error("unknown coupling model '" + s + "'");
}

struct CouplingEntry {
  Offset offset;
  double d = 0.0;        // Hz
  bool homonuclear = false;
  bool nearest = false;  // Manhattan distance 1
};

struct CouplingTable {
  Site probe;
  std::vector<CouplingEntry> entries;
  // Set when the cutoff lies below the nearest-neighbor distance.
  bool cutoff_below_nearest = false;

  std::size_t size() const noexcept { return entries.size(); }
};

struct CouplingOptions {
  CouplingModel model = CouplingModel::full_dipolar;
  double cutoff = 2.5;  // in units of the edge length
  double floor_hz = 0.0;
  double ideal_coupling_hz = nominal_coupling_hz;
};

namespace detail {

inline CouplingTable build_coupling_table(const LatticeGeometry& geometry, const PyramidLattice* lattice,
                                          const Site& probe, const CouplingOptions& opt) {
  if (!(opt.cutoff > 0.0)) throw domain_error("coupling cutoff must be positive");
  if (lattice && !lattice->contains(probe)) {
    throw domain_error("probe " + PyramidLattice::describe(probe) + " is outside the pyramid");
  }
  CouplingTable table;
  table.probe = probe;
  const double cutoff = opt.cutoff * geometry.edge();
  const double nn_distance = geometry.primitive(0).norm();
  table.cutoff_below_nearest = cutoff < nn_distance * (1.0 - 1e-12);

  const Species species = probe.species();
  auto admit = [&](const Offset& n) {
    if (n.isZero()) return;
    if (lattice && !lattice->contains(Site{probe.x + n.x(), probe.y + n.y(), probe.z + n.z()})) return;
    const double dist = geometry.position(n).norm();
    if (dist > cutoff * (1.0 + 1e-12)) return;
    const int manhattan = std::abs(n.x()) + std::abs(n.y()) + std::abs(n.z());
    CouplingEntry e;
    e.offset = n;
    e.nearest = manhattan == 1;
    e.homonuclear = (manhattan % 2) == 0;
    e.d = opt.model == CouplingModel::ideal_nn ? opt.ideal_coupling_hz : geometry.coupling(species, n);
    if (std::abs(e.d) < opt.floor_hz) return;
    table.entries.push_back(e);
  };

  if (opt.model == CouplingModel::full_dipolar) {
    const int reach = static_cast<int>(std::ceil(cutoff / std::sqrt(geometry.metric_floor()))) + 1;
    for (int i = -reach; i <= reach; ++i)
      for (int j = -reach; j <= reach; ++j)
        for (int k = -reach; k <= reach; ++k) admit(Offset(i, j, k));
  } else {
    for (const auto& step : unit_steps) admit(Offset(step[0], step[1], step[2]));
  }

  std::sort(table.entries.begin(), table.entries.end(), [](const CouplingEntry& a, const CouplingEntry& b) {
    const double da = std::abs(a.d);
    const double db = std::abs(b.d);
    if (da != db) return da > db;
    return std::tie(a.offset.x(), a.offset.y(), a.offset.z()) < std::tie(b.offset.x(), b.offset.y(), b.offset.z());
  });
  return table;
}

}  // namespace detail

// Partners of a probe in an unbounded crystal; only the probe's species matters.
inline CouplingTable coupling_table(const LatticeGeometry& geometry, const Site& probe, const CouplingOptions& opt = {}) {
  return detail::build_coupling_table(geometry, nullptr, probe, opt);
}

// Partners of a probe restricted to the sites of a pyramid.
inline CouplingTable coupling_table(const LatticeGeometry& geometry, const PyramidLattice& lattice, const Site& probe,
                                    const CouplingOptions& opt = {}) {
  return detail::build_coupling_table(geometry, &lattice, probe, opt);
}

// Same-species offsets at the smallest same-species distance (the homonuclear shell).
inline std::vector<Offset> homonuclear_shell(const LatticeGeometry& geometry) {
  std::vector<std::pair<double, Offset>> candidates;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k) {
        const Offset n(i, j, k);
        if (n.isZero() || ((i + j + k) % 2) != 0) continue;
        candidates.emplace_back(geometry.position(n).norm(), n);
      }
  double best = candidates.front().first;
  for (const auto& c : candidates) best = std::min(best, c.first);
  std::vector<Offset> shell;
  for (const auto& c : candidates)
    if (c.first <= best * (1.0 + 1e-9)) shell.push_back(c.second);
  return shell;
}

}  // namespace spinamp
