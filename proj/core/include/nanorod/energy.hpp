#pragma once

#include "nanorod/geometry.hpp"
#include "nanorod/lattice.hpp"
#include "nanorod/potentials.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace nanorod {

// Atom positions y^(k) in physical units, indexed like the lattice atoms.
struct Deformation {
  std::shared_ptr<const RodLattice> lattice;
  Eigen::Matrix3Xd positions;

  Deformation() = default;
  Deformation(std::shared_ptr<const RodLattice> lat, Eigen::Matrix3Xd pos);

  // Hatted corner positions of cell c (ghost slots hold the reference position).
  Mat38 cell_positions(int c) const;
};

Deformation identity_deformation(std::shared_ptr<const RodLattice> lat);

struct EnergyResult {
  double energy = 0.0;              // E^(k)
  std::vector<double> per_cell;     // in lattice cell order
  double interior = 0.0;
  double surface = 0.0;
  double end = 0.0;
};

EnergyResult total_energy(const CellEnergyModel& model, const Deformation& def);
double pair_sum_energy(const CellEnergyModel& model, const Deformation& def);
// dE^(k)/dy in physical units.
Eigen::Matrix3Xd energy_gradient(const CellEnergyModel& model, const Deformation& def);

struct SliceEnergyProfile {
  std::vector<int> axial;       // cell layer index of each slice
  std::vector<double> mass;     // k * sum of cell energies in the slice
  std::vector<bool> broken;
  std::vector<double> max_dist; // largest dist to the rigid set over interior cells
  double threshold = 0.0;
  int broken_count() const;
  double total_mass() const;
};

SliceEnergyProfile slice_profile(const CellEnergyModel& model, const Deformation& def, double c_e = 1.0);

// Piecewise affine interpolant with 24 simplices per interior cell, at a
// point given in physical reference coordinates.
Vec3 interpolate_value(const Deformation& def, const Vec3& point);

// Deformation file: "nanorod-deformation 1", then "L <real>", "k <int>",
// "cross_section <n> i1 j1 ... in jn", "atoms <N>", then N lines
// "x1 x2 x3 y1 y2 y3" with hatted integer coordinates and physical positions.
void write_deformation(std::ostream& os, const Deformation& def);
Deformation read_deformation(std::istream& is);
void write_deformation_file(const std::string& path, const Deformation& def);
Deformation read_deformation_file(const std::string& path);

// Shortest decimal representation that round-trips.
std::string format_double(double v);

}  // namespace nanorod
