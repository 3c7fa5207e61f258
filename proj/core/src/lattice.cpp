#include "nanorod/lattice.hpp"

#include "nanorod/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace nanorod {

namespace {

constexpr std::array<std::array<int, 3>, 8> kOffsets = {{
    {0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {0, 1, 0},
    {1, 0, 0}, {1, 0, 1}, {1, 1, 1}, {1, 1, 0},
}};

std::string str(IPoint p) { return "(" + std::to_string(p.a) + "," + std::to_string(p.b) + ")"; }

}  // namespace

const Mat38& reference_cell() {
  static const Mat38 id = [] {
    Mat38 m;
    for (int c = 0; c < 8; ++c)
      for (int r = 0; r < 3; ++r) m(r, c) = kOffsets[c][r] - 0.5;
    return m;
  }();
  return id;
}

const std::array<std::array<int, 3>, 8>& corner_offsets() { return kOffsets; }

const std::vector<CellBond>& cell_bonds() {
  static const std::vector<CellBond> bonds = [] {
    std::vector<CellBond> nn, nnn;
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) {
        int d2 = 0;
        for (int r = 0; r < 3; ++r) d2 += (kOffsets[i][r] - kOffsets[j][r]) * (kOffsets[i][r] - kOffsets[j][r]);
        if (d2 == 1) nn.push_back({i, j, true});
        if (d2 == 2) nnn.push_back({i, j, false});
      }
    nn.insert(nn.end(), nnn.begin(), nnn.end());
    return nn;
  }();
  return bonds;
}

bool CrossSection::has_midpoint(IPoint m) const {
  return std::binary_search(midpoints_.begin(), midpoints_.end(), m);
}

int CrossSection::corner_index(IPoint p) const {
  auto it = corner_lookup_.find(p);
  return it == corner_lookup_.end() ? -1 : it->second;
}

int CrossSection::ordered_inplane_neighbour_pairs() const {
  int count = 0;
  for (const IPoint& p : corners_) {
    if (corner_index({p.a + 1, p.b}) >= 0) ++count;
    if (corner_index({p.a, p.b + 1}) >= 0) ++count;
  }
  return 2 * count;
}

CrossSection build_cross_section(const std::vector<IPoint>& midpoints) {
  if (midpoints.empty()) throw Error(ErrorCode::EmptyCrossSection, "no midpoints given");
  CrossSection cs;
  std::set<IPoint> mids(midpoints.begin(), midpoints.end());
  cs.midpoints_.assign(mids.begin(), mids.end());

  // 4-neighbour flood fill on the midpoints.
  std::set<IPoint> seen{cs.midpoints_.front()};
  std::vector<IPoint> stack{cs.midpoints_.front()};
  while (!stack.empty()) {
    IPoint p = stack.back();
    stack.pop_back();
    for (IPoint q : {IPoint{p.a + 1, p.b}, IPoint{p.a - 1, p.b}, IPoint{p.a, p.b + 1}, IPoint{p.a, p.b - 1}})
      if (mids.count(q) && seen.insert(q).second) stack.push_back(q);
  }
  if (seen.size() != mids.size())
    throw Error(ErrorCode::DisconnectedCrossSection,
                std::to_string(mids.size() - seen.size()) + " midpoints not reachable from " +
                    str(cs.midpoints_.front()));

  std::set<IPoint> corners;
  for (IPoint m : mids)
    for (int da = 0; da <= 1; ++da)
      for (int db = 0; db <= 1; ++db) corners.insert({m.a + da, m.b + db});
  cs.corners_.assign(corners.begin(), corners.end());
  for (std::size_t i = 0; i < cs.corners_.size(); ++i) cs.corner_lookup_[cs.corners_[i]] = static_cast<int>(i);

  // A square with four corners in the set must itself be present.
  for (IPoint p : corners) {
    IPoint m{p.a, p.b};
    if (mids.count(m)) continue;
    if (corners.count({m.a + 1, m.b}) && corners.count({m.a, m.b + 1}) && corners.count({m.a + 1, m.b + 1}))
      throw Error(ErrorCode::MissingMidpoint,
                  "all corners of midpoint (" + std::to_string(m.a) + ".5," + std::to_string(m.b) +
                      ".5) present but midpoint missing");
  }

  std::set<IPoint> ext_c, ext_m;
  for (IPoint p : corners)
    for (int da = -1; da <= 1; ++da)
      for (int db = -1; db <= 1; ++db) ext_c.insert({p.a + da, p.b + db});
  for (IPoint m : mids)
    for (int da = -1; da <= 1; ++da)
      for (int db = -1; db <= 1; ++db) ext_m.insert({m.a + da, m.b + db});
  cs.ext_corners_.assign(ext_c.begin(), ext_c.end());
  cs.ext_midpoints_.assign(ext_m.begin(), ext_m.end());
  return cs;
}

const char* to_string(CellClass cls) {
  switch (cls) {
    case CellClass::Interior: return "interior";
    case CellClass::Surface: return "surface";
    case CellClass::End: return "end";
  }
  return "unknown";
}

RodLattice::RodLattice(CrossSection cs, int layers, int k, double length, int axial_offset, bool end_cells)
    : cs_(std::move(cs)), layers_(layers), k_(k), length_(length), axial_offset_(axial_offset), end_cells_(end_cells) {
  if (k_ < 1) throw Error(ErrorCode::InvalidParameters, "refinement k must be >= 1");
  if (layers_ < 1) throw Error(ErrorCode::DegenerateRod, "fewer than one axial cell layer");
  for (int a = first_axial(); a <= last_axial(); ++a) {
    bool end_layer = a < 0 || a >= layers_;
    for (IPoint m : cs_.ext_midpoints()) {
      Cell cell;
      cell.index = {a, m};
      cell.cls = end_layer ? CellClass::End : (cs_.has_midpoint(m) ? CellClass::Interior : CellClass::Surface);
      cell.real_mask = 0;
      for (int c = 0; c < 8; ++c) {
        const auto& off = kOffsets[c];
        int id = atom_id(a + off[0], {m.a + off[1], m.b + off[2]});
        cell.corners[c] = id;
        if (id >= 0) cell.real_mask |= static_cast<std::uint8_t>(1u << c);
      }
      cell_lookup_[cell.index] = static_cast<int>(cells_.size());
      cells_.push_back(cell);
    }
  }
}

int RodLattice::atom_id(int layer, IPoint p) const {
  if (layer < 0 || layer > layers_) return -1;
  int idx = cs_.corner_index(p);
  return idx < 0 ? -1 : layer * atoms_per_layer() + idx;
}

Vec3 RodLattice::hatted_position(int id) const {
  IPoint p = atom_inplane(id);
  return {static_cast<double>(atom_layer(id) + axial_offset_), static_cast<double>(p.a), static_cast<double>(p.b)};
}

Eigen::Matrix3Xd RodLattice::reference_positions() const {
  Eigen::Matrix3Xd y(3, num_atoms());
  for (int i = 0; i < num_atoms(); ++i) y.col(i) = reference_position(i);
  return y;
}

int RodLattice::find_cell(const CellIndex& idx) const {
  auto it = cell_lookup_.find(idx);
  return it == cell_lookup_.end() ? -1 : it->second;
}

RodLattice build_rod_lattice(const CrossSection& cs, double L, int k) {
  if (!(L > 0) || k < 1) throw Error(ErrorCode::InvalidParameters, "need L > 0 and k >= 1");
  // Small relative slack so that e.g. L = 0.3, k = 10 gives 3 layers.
  double kl = static_cast<double>(k) * L;
  int layers = static_cast<int>(std::floor(kl * (1.0 + 1e-12)));
  if (layers < 1) throw Error(ErrorCode::DegenerateRod, "floor(kL) = " + std::to_string(layers));
  return RodLattice(cs, layers, k, L, 0, true);
}

RodLattice build_block_lattice(const CrossSection& cs, int half_layers, int k) {
  if (half_layers < 1) throw Error(ErrorCode::DegenerateRod, "block lattice needs at least one layer per side");
  return RodLattice(cs, 2 * half_layers, k, 2.0 * half_layers / k, -half_layers, false);
}

CellCorners cell_corners(const RodLattice& lat, const CellIndex& cell) {
  int c = lat.find_cell(cell);
  if (c < 0)
    throw Error(ErrorCode::UnknownCell,
                "axial " + std::to_string(cell.axial) + ", in-plane " + str(cell.mid));
  CellCorners out;
  out.atoms = lat.cells()[c].corners;
  for (int m = 0; m < 8; ++m) out.ghost[m] = out.atoms[m] < 0;
  return out;
}

}  // namespace nanorod
