#include "nanorod/geometry.hpp"
#include "nanorod/potentials.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nanorod {

namespace {

struct Sampler {
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> unit{0.0, 1.0};

  explicit Sampler(std::uint64_t seed) : rng(seed) {}

  double u() { return unit(rng); }
  double n() { return normal(rng); }
  Vec3 vec() { return {n(), n(), n()}; }

  Mat3 rotation() {
    Eigen::Quaterniond q(n(), n(), n(), n());
    q.normalize();
    return q.toRotationMatrix();
  }

  Mat38 noise() {
    Mat38 h;
    for (int c = 0; c < 8; ++c) h.col(c) = vec();
    return h;
  }

  // Rigid cell with noise of log-uniform amplitude in [1e-4, 1].
  Mat38 near_rigid() {
    double amp = std::pow(10.0, -4.0 + 4.0 * u());
    Mat38 y = rotation() * reference_cell() + amp * noise();
    return y.colwise() + 3.0 * vec();
  }

  Mat38 wild() {
    Mat38 y;
    for (int c = 0; c < 8; ++c)
      for (int r = 0; r < 3; ++r) y(r, c) = -2.0 + 4.0 * u();
    return y;
  }

  Mat38 cell() { return u() < 0.7 ? near_rigid() : wild(); }

  // Class and mask of a random cell slot: interior or a random real subset.
  std::pair<CellClass, std::uint8_t> slot() {
    if (u() < 0.5) return {CellClass::Interior, kAllCorners};
    auto mask = static_cast<std::uint8_t>(rng() & 0xFFu);
    return {u() < 0.5 ? CellClass::Surface : CellClass::End, mask};
  }
};

std::string matrix_str(const Mat38& y) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (int c = 0; c < 8; ++c) {
    os << (c ? "; " : "") << y(0, c) << " " << y(1, c) << " " << y(2, c);
  }
  os << "]";
  return os.str();
}

void record(AssumptionCheck& chk, double margin, const std::string& what) {
  ++chk.samples;
  if (margin > chk.worst || chk.samples == 1) {
    chk.worst = margin;
    chk.witness = what;
  }
  if (margin > 0.0) chk.passed = false;
}

double safe_energy(const CellEnergyModel& m, CellClass cls, std::uint8_t mask, const Mat38& y, int k) {
  return cell_energy(m, cls, mask, y, k);
}

bool has_coincident_corners(const Mat38& y) {
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      if ((y.col(i) - y.col(j)).norm() < 1e-3) return true;
  return false;
}

}  // namespace

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

AssumptionReport check_assumptions(const CellEnergyModel& model, const std::vector<int>& k_list, long samples,
                                   std::uint64_t seed, double c_far) {
  Sampler s(seed);
  AssumptionCheck w1{"W1", true, 0.0, "", 0, "random cells and slots, random rigid motion"};
  AssumptionCheck w2{"W2", true, 0.0, "", 0, "rigid cells in every slot"};
  AssumptionCheck w4{"W4", true, 0.0, "", 0, "random cells, (k+1)W^(k+1) - kW^(k)"};
  AssumptionCheck w5{"W5", true, 0.0, "", 0, "interior cells with dist > c_frac"};
  AssumptionCheck w8{"W8", true, 0.0, "", 0, "tensile cells (every bond at or above rest length)"};
  AssumptionCheck w9{"W9", true, 0.0, "", 0, "two far-apart rigid corner groups, n_C = 2"};

  for (int k : k_list) {
    ElasticThresholds th = elastic_threshold(model, k);
    double pen = model.penalty().strength / k;
    double sup_nn = model.is_pairwise() ? pair_tensile_sup(model.nn(), k) : model.simplified().cbar1 / k;
    double sup_nnn = model.is_pairwise() ? pair_tensile_sup(model.nnn(), k) : model.simplified().cbar1 / k;
    double cbar_upper = model.is_pairwise() ? 12 * bond_weight(true) * sup_nn + 12 * bond_weight(false) * sup_nnn + pen
                                            : model.simplified().cbar1 / k + pen;
    double range = model.is_pairwise() ? pair_range(model.nn(), k) : 1.0 / std::sqrt(static_cast<double>(k));
    double sep = range * k;

    for (long i = 0; i < samples; ++i) {
      Mat38 y = s.cell();
      if (has_coincident_corners(y)) continue;
      auto [cls, mask] = s.slot();
      double e = safe_energy(model, cls, mask, y, k);

      // W1
      Mat3 R = s.rotation();
      Vec3 c = 5.0 * s.vec();
      Mat38 moved = (R * y).colwise() + c;
      double e_moved = safe_energy(model, cls, mask, moved, k);
      record(w1, std::abs(e_moved - e) - 1e-9 * (1.0 + std::abs(e)),
             "k=" + std::to_string(k) + " slot=" + to_string(cls) + " y=" + matrix_str(y));

      // W2
      Mat38 rigid = (s.rotation() * reference_cell()).colwise() + 5.0 * s.vec();
      auto [cls2, mask2] = s.slot();
      record(w2, safe_energy(model, cls2, mask2, rigid, k) - 1e-12, "k=" + std::to_string(k) + " rigid cell");

      // W4
      double lhs = (k + 1) * safe_energy(model, cls, mask, y, k + 1);
      record(w4, k * e - lhs - 1e-12,
             "k=" + std::to_string(k) + " slot=" + to_string(cls) + " y=" + matrix_str(y));

      // W5: walk away from the rigid set along a random direction.
      {
        Mat38 h = discrete_gradient(s.noise());
        h /= h.norm();
        double scale = th.c_frac * (1.0 + 20.0 * s.u() * s.u());
        Mat38 yy = reference_cell() + scale * 1.5 * h;
        if (s.u() < 0.2) yy = s.wild();
        if (!has_coincident_corners(yy)) {
          Mat38 G = discrete_gradient(yy);
          if (dist_so3bar(G) > th.c_frac) {
            Mat38 placed = (s.rotation() * yy).colwise() + s.vec();
            record(w5, th.cbar1 - safe_energy(model, CellClass::Interior, kAllCorners, placed, k),
                   "k=" + std::to_string(k) + " dist=" + std::to_string(dist_so3bar(G)) + " y=" + matrix_str(yy));
          }
        }
      }

      // W8 on tensile cells: stretched reference cells and separated groups.
      {
        Vec3 st(1.0 + 9.0 * s.u(), 1.0 + 9.0 * s.u(), 1.0 + 9.0 * s.u());
        Mat38 yy = s.rotation() * st.asDiagonal() * reference_cell();
        auto [cls3, mask3] = s.slot();
        record(w8, safe_energy(model, cls3, mask3, yy, k) - cbar_upper - 1e-15,
               "k=" + std::to_string(k) + " stretch=(" + std::to_string(st(0)) + "," + std::to_string(st(1)) + "," +
                   std::to_string(st(2)) + ")");
      }

      // W9 with two groups of corners.
      {
        auto part = static_cast<unsigned>(1 + s.rng() % 254);  // nonempty proper subset
        Vec3 dir = s.vec().normalized();
        Mat38 base = reference_cell() + 0.05 * s.noise();
        auto place = [&](double gap, const Mat3& r1, const Mat3& r2, const Vec3& c1, const Vec3& c2) {
          Mat38 out;
          for (int m = 0; m < 8; ++m) {
            bool second = (part >> m) & 1u;
            Vec3 local = base.col(m) + (second ? Vec3(gap * dir) : Vec3::Zero());
            out.col(m) = second ? Vec3(r2 * local + c2) : Vec3(r1 * local + c1);
          }
          return out;
        };
        // Group diameter is below 2, so a gap of sep + 4 keeps every
        // inter-group distance above sep before and after the motions.
        double gap = sep + 4.0 + 4.0 * s.u();
        Mat38 ya = place(gap, Mat3::Identity(), Mat3::Identity(), Vec3::Zero(), Vec3::Zero());
        Mat3 q1 = s.rotation();
        Vec3 c1 = s.vec();
        // Both groups move rigidly with different rotations; the second is
        // pushed further out along dir so the gap only grows.
        Mat3 q2 = q1 * rotation_from_axis_angle(dir, 2.0 * M_PI * s.u());
        Vec3 c2 = c1 + q1 * (gap * dir) - q2 * (gap * dir) + q1 * (2.0 * s.u() * gap * dir);
        Mat38 yb = place(gap, q1, q2, c1, c2);
        double ea = safe_energy(model, CellClass::Interior, kAllCorners, ya, k);
        double eb = safe_energy(model, CellClass::Interior, kAllCorners, yb, k);
        double bound = c_far / (range * k * static_cast<double>(k));
        record(w9, std::abs(ea - eb) - bound,
               "k=" + std::to_string(k) + " partition=" + std::to_string(part) + " |dW|=" + std::to_string(std::abs(ea - eb)));
      }
    }
  }
  AssumptionReport rep;
  rep.checks = {w1, w2, w4, w5, w8, w9};
  return rep;
}

}  // namespace nanorod
