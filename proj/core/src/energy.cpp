#include "nanorod/energy.hpp"

#include "nanorod/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace nanorod {

Deformation::Deformation(std::shared_ptr<const RodLattice> lat, Eigen::Matrix3Xd pos)
    : lattice(std::move(lat)), positions(std::move(pos)) {
  if (positions.cols() != lattice->num_atoms())
    throw Error(ErrorCode::InvalidParameters, "position count " + std::to_string(positions.cols()) +
                                                  " does not match atom count " +
                                                  std::to_string(lattice->num_atoms()));
}

Mat38 Deformation::cell_positions(int c) const {
  const Cell& cell = lattice->cells()[c];
  const double k = lattice->k();
  Mat38 y;
  for (int m = 0; m < 8; ++m) {
    if (cell.corners[m] >= 0) {
      y.col(m) = k * positions.col(cell.corners[m]);
    } else {
      const auto& off = corner_offsets()[m];
      y.col(m) = Vec3(cell.index.axial + off[0] + lattice->axial_offset(), cell.index.mid.a + off[1],
                      cell.index.mid.b + off[2]);
    }
  }
  return y;
}

Deformation identity_deformation(std::shared_ptr<const RodLattice> lat) {
  Eigen::Matrix3Xd y = lat->reference_positions();
  return Deformation(std::move(lat), std::move(y));
}

namespace {

void require_finite(const Deformation& def) {
  if (!def.positions.allFinite()) throw Error(ErrorCode::NonFinitePosition, "deformation has non-finite positions");
}

}  // namespace

EnergyResult total_energy(const CellEnergyModel& model, const Deformation& def) {
  require_finite(def);
  const RodLattice& lat = *def.lattice;
  EnergyResult res;
  res.per_cell.resize(lat.cells().size());
  for (std::size_t c = 0; c < lat.cells().size(); ++c) {
    const Cell& cell = lat.cells()[c];
    double e = cell_energy(model, cell.cls, cell.real_mask, def.cell_positions(static_cast<int>(c)), lat.k());
    res.per_cell[c] = e;
    res.energy += e;
    switch (cell.cls) {
      case CellClass::Interior: res.interior += e; break;
      case CellClass::Surface: res.surface += e; break;
      case CellClass::End: res.end += e; break;
    }
  }
  return res;
}

double pair_sum_energy(const CellEnergyModel& model, const Deformation& def) {
  if (!model.is_pairwise()) throw Error(ErrorCode::ModelNotPairwise, "pair sum needs a pair model");
  require_finite(def);
  const RodLattice& lat = *def.lattice;
  const double k = lat.k();
  static const std::array<std::array<int, 3>, 3> nn = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  static const std::array<std::array<int, 3>, 6> nnn = {
      {{1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}}};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double e = 0.0;
  for (int i = 0; i < lat.num_atoms(); ++i) {
    int layer = lat.atom_layer(i);
    IPoint p = lat.atom_inplane(i);
    for (const auto& o : nn) {
      int j = lat.atom_id(layer + o[0], {p.a + o[1], p.b + o[2]});
      if (j >= 0) e += pair_energy(model.nn(), k * (def.positions.col(i) - def.positions.col(j)).norm(), lat.k());
    }
    for (const auto& o : nnn) {
      int j = lat.atom_id(layer + o[0], {p.a + o[1], p.b + o[2]});
      if (j >= 0)
        e += pair_energy(model.nnn(), k * (def.positions.col(i) - def.positions.col(j)).norm() * inv_sqrt2,
                         lat.k());
    }
  }
  for (std::size_t c = 0; c < lat.cells().size(); ++c)
    if (lat.cells()[c].cls == CellClass::Interior)
      e += orientation_penalty(model, def.cell_positions(static_cast<int>(c)), lat.k());
  return e;
}

Eigen::Matrix3Xd energy_gradient(const CellEnergyModel& model, const Deformation& def) {
  if (!model.is_pairwise()) throw Error(ErrorCode::ModelNotPairwise, "gradient needs a pair model");
  require_finite(def);
  const RodLattice& lat = *def.lattice;
  const int k = lat.k();
  const double sqrt2 = std::sqrt(2.0);
  Eigen::Matrix3Xd grad = Eigen::Matrix3Xd::Zero(3, lat.num_atoms());
  for (const Cell& cell : lat.cells()) {
    std::uint8_t mask = cell.cls == CellClass::Interior ? kAllCorners : cell.real_mask;
    for (const CellBond& b : cell_bonds()) {
      if (!((mask >> b.i) & 1u) || !((mask >> b.j) & 1u)) continue;
      int ai = cell.corners[b.i], aj = cell.corners[b.j];
      Vec3 d = k * (def.positions.col(ai) - def.positions.col(aj));
      double r = d.norm();
      double len = b.nearest ? 1.0 : sqrt2;
      double dw = pair_derivative(b.nearest ? model.nn() : model.nnn(), r / len, k);
      if (dw == 0.0 || r == 0.0) continue;
      // d/dy = k d/dyhat.
      Vec3 g = (bond_weight(b.nearest) * dw / len * k / r) * d;
      grad.col(ai) += g;
      grad.col(aj) -= g;
    }
  }
  return grad;
}

int SliceEnergyProfile::broken_count() const { return static_cast<int>(std::count(broken.begin(), broken.end(), true)); }

double SliceEnergyProfile::total_mass() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

SliceEnergyProfile slice_profile(const CellEnergyModel& model, const Deformation& def, double c_e) {
  const RodLattice& lat = *def.lattice;
  EnergyResult er = total_energy(model, def);
  ElasticThresholds th = elastic_threshold(model, lat.k());
  SliceEnergyProfile prof;
  prof.threshold = th.c_frac / (std::sqrt(3.0 * lat.cross_section().midpoints().size()) * c_e);
  const int n = lat.num_slices();
  prof.axial.resize(n);
  prof.mass.assign(n, 0.0);
  prof.broken.assign(n, false);
  prof.max_dist.assign(n, 0.0);
  std::vector<double> sums(n, 0.0);
  for (int s = 0; s < n; ++s) prof.axial[s] = lat.first_axial() + s;
  for (std::size_t c = 0; c < lat.cells().size(); ++c) {
    const Cell& cell = lat.cells()[c];
    int s = cell.index.axial - lat.first_axial();
    sums[s] += er.per_cell[c];
    if (cell.cls == CellClass::Interior) {
      double d = dist_so3bar(discrete_gradient(def.cell_positions(static_cast<int>(c))));
      prof.max_dist[s] = std::max(prof.max_dist[s], d);
      if (d > prof.threshold) prof.broken[s] = true;
    }
  }
  for (int s = 0; s < n; ++s) prof.mass[s] = lat.k() * sums[s];
  return prof;
}

Vec3 interpolate_value(const Deformation& def, const Vec3& point) {
  const RodLattice& lat = *def.lattice;
  const double eps = 1e-12;
  Vec3 xh = lat.k() * point;
  xh(0) -= lat.axial_offset();
  // Candidate lower corners along each axis (two when on a grid plane).
  std::array<std::vector<int>, 3> cand;
  for (int d = 0; d < 3; ++d) {
    int f = static_cast<int>(std::floor(xh(d) + eps));
    cand[d].push_back(f);
    if (std::abs(xh(d) - f) <= eps) cand[d].push_back(f - 1);
  }
  for (int a : cand[0])
    for (int i : cand[1])
      for (int j : cand[2]) {
        int c = lat.find_cell({a, {i, j}});
        if (c < 0 || lat.cells()[c].cls != CellClass::Interior) continue;
        Vec3 xi = xh - Vec3(a + 0.5, i + 0.5, j + 0.5);
        if (xi.cwiseAbs().maxCoeff() > 0.5 + 1e-9) continue;
        const Cell& cell = lat.cells()[c];
        const Mat38& z = reference_cell();
        Vec3 centre_val = Vec3::Zero();
        for (int m = 0; m < 8; ++m) centre_val += def.positions.col(cell.corners[m]);
        centre_val /= 8.0;
        int dir = 0;
        xi.cwiseAbs().maxCoeff(&dir);
        if (std::abs(xi(dir)) < 1e-15) return centre_val;
        double sgn = xi(dir) > 0 ? 0.5 : -0.5;
        // Face corners in cyclic order around the face.
        std::vector<int> face;
        for (int m = 0; m < 8; ++m)
          if (z(dir, m) == sgn) face.push_back(m);
        int p = (dir + 1) % 3, q = (dir + 2) % 3;
        std::sort(face.begin(), face.end(), [&](int u, int v) {
          return std::atan2(z(q, u), z(p, u)) < std::atan2(z(q, v), z(p, v));
        });
        Vec3 fpos = Vec3::Zero();
        fpos(dir) = sgn;
        Vec3 fval = Vec3::Zero();
        for (int m : face) fval += def.positions.col(cell.corners[m]);
        fval /= 4.0;
        for (int e = 0; e < 4; ++e) {
          int u = face[e], v = face[(e + 1) % 4];
          Mat3 B;
          B.col(0) = fpos;
          B.col(1) = z.col(u);
          B.col(2) = z.col(v);
          Vec3 lam = B.partialPivLu().solve(xi);
          if (lam.minCoeff() < -1e-10 || lam.sum() > 1.0 + 1e-10) continue;
          return (1.0 - lam.sum()) * centre_val + lam(0) * fval + lam(1) * def.positions.col(cell.corners[u]) +
                 lam(2) * def.positions.col(cell.corners[v]);
        }
      }
  throw Error(ErrorCode::OutOfDomain, "point outside the interior cells of the rod");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_deformation(std::ostream& os, const Deformation& def) {
  const RodLattice& lat = *def.lattice;
  os << "nanorod-deformation 1\n";
  os << "L " << format_double(lat.length()) << "\n";
  os << "k " << lat.k() << "\n";
  const auto& mids = lat.cross_section().midpoints();
  os << "cross_section " << mids.size();
  for (IPoint m : mids) os << " " << m.a << " " << m.b;
  os << "\n";
  os << "atoms " << lat.num_atoms() << "\n";
  for (int i = 0; i < lat.num_atoms(); ++i) {
    Vec3 h = lat.hatted_position(i);
    os << static_cast<int>(h(0)) << " " << static_cast<int>(h(1)) << " " << static_cast<int>(h(2));
    for (int r = 0; r < 3; ++r) os << " " << format_double(def.positions(r, i));
    os << "\n";
  }
}

namespace {

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, int line) {
  int v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": bad integer '" + tok + "'");
  return v;
}

std::vector<std::string> next_tokens(std::istream& is, int& line) {
  std::string s;
  while (std::getline(is, s)) {
    ++line;
    if (s.empty() || s[0] == '#') continue;
    std::istringstream ss(s);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (!toks.empty()) return toks;
  }
  throw Error(ErrorCode::IoError, "unexpected end of deformation file after line " + std::to_string(line));
}

void expect_key(const std::vector<std::string>& toks, const std::string& key, std::size_t n, int line) {
  if (toks[0] != key || toks.size() < n)
    throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": expected '" + key + "'");
}

}  // namespace

Deformation read_deformation(std::istream& is) {
  int line = 0;
  auto t = next_tokens(is, line);
  if (t.size() != 2 || t[0] != "nanorod-deformation" || t[1] != "1")
    throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": not a deformation file");
  t = next_tokens(is, line);
  expect_key(t, "L", 2, line);
  double L = parse_double(t[1], line);
  t = next_tokens(is, line);
  expect_key(t, "k", 2, line);
  int k = parse_int(t[1], line);
  t = next_tokens(is, line);
  expect_key(t, "cross_section", 2, line);
  int nm = parse_int(t[1], line);
  if (static_cast<int>(t.size()) != 2 + 2 * nm)
    throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": cross_section count mismatch");
  std::vector<IPoint> mids;
  for (int i = 0; i < nm; ++i) mids.push_back({parse_int(t[2 + 2 * i], line), parse_int(t[3 + 2 * i], line)});
  auto lat = std::make_shared<const RodLattice>(build_rod_lattice(build_cross_section(mids), L, k));
  t = next_tokens(is, line);
  expect_key(t, "atoms", 2, line);
  int n = parse_int(t[1], line);
  if (n != lat->num_atoms())
    throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": atom count " + std::to_string(n) +
                                        ", lattice has " + std::to_string(lat->num_atoms()));
  Eigen::Matrix3Xd y(3, n);
  for (int i = 0; i < n; ++i) {
    t = next_tokens(is, line);
    if (t.size() != 6) throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": expected 6 fields");
    Vec3 h = lat->hatted_position(i);
    for (int r = 0; r < 3; ++r)
      if (parse_int(t[r], line) != static_cast<int>(h(r)))
        throw Error(ErrorCode::IoError, "line " + std::to_string(line) + ": atom out of lexicographic order");
    for (int r = 0; r < 3; ++r) y(r, i) = parse_double(t[3 + r], line);
  }
  return Deformation(lat, std::move(y));
}

void write_deformation_file(const std::string& path, const Deformation& def) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  write_deformation(os, def);
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path);
}

Deformation read_deformation_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_deformation(is);
}

}  // namespace nanorod
