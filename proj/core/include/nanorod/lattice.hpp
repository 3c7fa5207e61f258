#pragma once

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <vector>

namespace nanorod {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat38 = Eigen::Matrix<double, 3, 8>;

// Integer point in the cross-section plane. Used both for corners (x2, x3)
// and for cell midpoints, where {i, j} stands for (i + 1/2, j + 1/2).
struct IPoint {
  int a = 0;
  int b = 0;
  auto operator<=>(const IPoint&) const = default;
};

// Columns are the eight corner directions z^1..z^8 of a unit cell.
const Mat38& reference_cell();

// Integer offset of corner m from the lower corner of its cell, in {0,1}^3.
const std::array<std::array<int, 3>, 8>& corner_offsets();

struct CellBond {
  int i;
  int j;
  bool nearest;  // true: |z^i - z^j| = 1, false: |z^i - z^j| = sqrt(2)
};

// The 12 cube edges followed by the 12 face diagonals, each unordered pair once.
const std::vector<CellBond>& cell_bonds();

class CrossSection {
 public:
  const std::vector<IPoint>& midpoints() const { return midpoints_; }
  const std::vector<IPoint>& corners() const { return corners_; }
  const std::vector<IPoint>& ext_corners() const { return ext_corners_; }
  const std::vector<IPoint>& ext_midpoints() const { return ext_midpoints_; }

  bool has_midpoint(IPoint m) const;
  // Index into corners(), or -1 when p is not a corner.
  int corner_index(IPoint p) const;
  // Ordered in-plane pairs of corners at distance 1.
  int ordered_inplane_neighbour_pairs() const;

 private:
  friend CrossSection build_cross_section(const std::vector<IPoint>& midpoints);

  std::vector<IPoint> midpoints_;
  std::vector<IPoint> corners_;
  std::vector<IPoint> ext_corners_;
  std::vector<IPoint> ext_midpoints_;
  std::map<IPoint, int> corner_lookup_;
};

CrossSection build_cross_section(const std::vector<IPoint>& midpoints);

enum class CellClass { Interior, Surface, End };
const char* to_string(CellClass cls);

// Cell with axial midpoint (axial + 1/2) in layer coordinates and in-plane
// midpoint encoded as in IPoint.
struct CellIndex {
  int axial = 0;
  IPoint mid;
  auto operator<=>(const CellIndex&) const = default;
};

struct Cell {
  CellIndex index;
  CellClass cls;
  std::array<int, 8> corners;  // atom ids, -1 for ghosts
  std::uint8_t real_mask;      // bit m set iff corner m is a real atom
};

struct CellCorners {
  std::array<int, 8> atoms;
  std::array<bool, 8> ghost;
};

// Atoms occupy layers 0..layers() along the axis and the corners of the
// cross-section in the plane. Hatted axial coordinate of layer j is
// j + axial_offset(); physical coordinates are hatted / k.
//
// Atom ids follow the lexicographic order of (x1, x2, x3) in hatted units.
class RodLattice {
 public:
  RodLattice(CrossSection cs, int layers, int k, double length, int axial_offset, bool end_cells);

  const CrossSection& cross_section() const { return cs_; }
  int k() const { return k_; }
  int layers() const { return layers_; }
  double length() const { return length_; }
  double effective_length() const { return static_cast<double>(layers_) / k_; }
  int axial_offset() const { return axial_offset_; }
  bool has_end_cells() const { return end_cells_; }

  int atoms_per_layer() const { return static_cast<int>(cs_.corners().size()); }
  int num_atoms() const { return (layers_ + 1) * atoms_per_layer(); }
  int atom_id(int layer, IPoint p) const;
  int atom_layer(int id) const { return id / atoms_per_layer(); }
  IPoint atom_inplane(int id) const { return cs_.corners()[id % atoms_per_layer()]; }
  Vec3 hatted_position(int id) const;
  Vec3 reference_position(int id) const { return hatted_position(id) / k_; }
  Eigen::Matrix3Xd reference_positions() const;

  const std::vector<Cell>& cells() const { return cells_; }
  // Index into cells(), or -1.
  int find_cell(const CellIndex& idx) const;
  int first_axial() const { return end_cells_ ? -1 : 0; }
  int last_axial() const { return end_cells_ ? layers_ : layers_ - 1; }
  int num_slices() const { return last_axial() - first_axial() + 1; }

 private:
  CrossSection cs_;
  int layers_;
  int k_;
  double length_;
  int axial_offset_;
  bool end_cells_;
  std::vector<Cell> cells_;
  std::map<CellIndex, int> cell_lookup_;
};

// Rod lattice on [0, L_k] with L_k = floor(kL)/k, including both end layers.
RodLattice build_rod_lattice(const CrossSection& cs, double L, int k);

// Blown-up crack lattice: layers -half..half (hatted), no end cells.
RodLattice build_block_lattice(const CrossSection& cs, int half_layers, int k);

CellCorners cell_corners(const RodLattice& lat, const CellIndex& cell);

}  // namespace nanorod
