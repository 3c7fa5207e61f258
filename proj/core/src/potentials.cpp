#include "nanorod/potentials.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nanorod {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double lj(double d, double r) {
  double r6 = 1.0 / std::pow(r, 6);
  return d * (r6 * r6 - 2.0 * r6) + d;
}

double lj_d1(double d, double r) {
  double r6 = 1.0 / std::pow(r, 6);
  return d * 12.0 * (r6 - r6 * r6) / r;
}

double spline_plateau(const SplinedPair& s, int k) { return s.omega / std::pow(static_cast<double>(k), s.plateau_power); }

double saturate(double s) { return s <= 0.5 ? s : 1.0 - 0.25 / s; }
double saturate_d1(double s) { return s <= 0.5 ? 1.0 : 0.25 / (s * s); }

// Largest t in [0, tmax] such that core(1 + sign*t) <= level for all smaller t.
double core_window(const ElasticCore& core, double level, double sign, double tmax) {
  if (core.value(1.0 + sign * tmax) <= level) return tmax;
  double lo = 0.0, hi = tmax;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    (core.value(1.0 + sign * mid) <= level ? lo : hi) = mid;
  }
  return lo;
}

void check_finite(const Mat38& y) {
  if (!y.allFinite()) throw Error(ErrorCode::NonFinitePosition, "cell positions contain non-finite entries");
}

}  // namespace

ElasticCore ElasticCore::harmonic(double stiffness) {
  ElasticCore c;
  c.value = [stiffness](double r) { return stiffness * (r - 1.0) * (r - 1.0); };
  c.d1 = [stiffness](double r) { return 2.0 * stiffness * (r - 1.0); };
  c.d2 = [stiffness](double) { return 2.0 * stiffness; };
  std::ostringstream os;
  os.precision(17);
  os << "harmonic(" << stiffness << ")";
  c.tag = os.str();
  return c;
}

double pair_energy(const PairPotentialModel& p, double r, int k) {
  if (!std::isfinite(r)) throw Error(ErrorCode::NonFinitePosition, "non-finite bond length");
  const double kk = static_cast<double>(k);
  return std::visit(Overloaded{
                        [&](const LJTS& m) {
                          if (r <= 0.0) throw Error(ErrorCode::NonpositiveSeparation, "LJTS at r <= 0");
                          double w = lj(m.depth, r);
                          return r < 1.0 ? w : std::min(w, 1.0 / kk);
                        },
                        [&](const TruncHarmonic& m) {
                          double w = m.stiffness * (r - 1.0) * (r - 1.0);
                          return std::min(w, (r >= 1.0 ? m.plateau_plus : m.plateau_minus) / kk);
                        },
                        [&](const SplinedPair& m) {
                          double wk = spline_plateau(m, k);
                          return wk * saturate(m.core.value(r) / wk);
                        },
                    },
                    p.kind);
}

double pair_derivative(const PairPotentialModel& p, double r, int k) {
  const double kk = static_cast<double>(k);
  return std::visit(Overloaded{
                        [&](const LJTS& m) {
                          if (r <= 0.0) throw Error(ErrorCode::NonpositiveSeparation, "LJTS at r <= 0");
                          if (r < 1.0 || lj(m.depth, r) < 1.0 / kk) return lj_d1(m.depth, r);
                          return 0.0;
                        },
                        [&](const TruncHarmonic& m) {
                          double w = m.stiffness * (r - 1.0) * (r - 1.0);
                          double cap = (r >= 1.0 ? m.plateau_plus : m.plateau_minus) / kk;
                          return w < cap ? 2.0 * m.stiffness * (r - 1.0) : 0.0;
                        },
                        [&](const SplinedPair& m) {
                          double wk = spline_plateau(m, k);
                          return saturate_d1(m.core.value(r) / wk) * m.core.d1(r);
                        },
                    },
                    p.kind);
}

double pair_core_curvature(const PairPotentialModel& p) {
  return std::visit(Overloaded{
                        [](const LJTS& m) { return 72.0 * m.depth; },
                        [](const TruncHarmonic& m) { return 2.0 * m.stiffness; },
                        [](const SplinedPair& m) { return m.core.d2(1.0); },
                    },
                    p.kind);
}

double pair_elastic_window(const PairPotentialModel& p, int k) {
  const double kk = static_cast<double>(k);
  return std::visit(Overloaded{
                        [&](const LJTS& m) {
                          if (m.depth <= 1.0 / kk) throw Error(ErrorCode::InvalidParameters, "LJTS needs d > 1/k");
                          // W_LJ(r) = 1/k on r >= 1 at r^-6 = 1 - 1/sqrt(dk).
                          return std::pow(1.0 - 1.0 / std::sqrt(m.depth * kk), -1.0 / 6.0) - 1.0;
                        },
                        [&](const TruncHarmonic& m) {
                          return std::sqrt(std::min(m.plateau_plus, m.plateau_minus) / (kk * m.stiffness));
                        },
                        [&](const SplinedPair& m) {
                          double level = 0.5 * spline_plateau(m, k);
                          return std::min(core_window(m.core, level, 1.0, 1e3), core_window(m.core, level, -1.0, 1.0));
                        },
                    },
                    p.kind);
}

double pair_c_frac(const PairPotentialModel& p, int k) {
  if (const auto* m = std::get_if<LJTS>(&p.kind)) {
    const double d = m->depth, kk = static_cast<double>(k);
    if (!(d > 1.0 / kk)) throw Error(ErrorCode::InvalidParameters, "LJTS threshold undefined for d <= 1/k");
    double lo = std::cbrt(std::sqrt(d - 1.0 / kk));
    double hi = std::cbrt(std::sqrt(d + std::sqrt(d / kk)));
    return (hi - lo) / (2.0 * lo);
  }
  // A bond's length deviates from its rest value by at most sqrt(2) times the
  // cell's distance to the rigid set.
  return pair_elastic_window(p, k) / std::sqrt(2.0);
}

double pair_min_off_window(const PairPotentialModel& p, int k) {
  const double kk = static_cast<double>(k);
  return std::visit(Overloaded{
                        [&](const LJTS& m) {
                          double w = pair_elastic_window(p, k);
                          return std::min(lj(m.depth, 1.0 - w), 1.0 / kk);
                        },
                        [&](const TruncHarmonic& m) { return std::min(m.plateau_plus, m.plateau_minus) / kk; },
                        [&](const SplinedPair& m) { return 0.5 * spline_plateau(m, k); },
                    },
                    p.kind);
}

double pair_tensile_sup(const PairPotentialModel& p, int k) {
  const double kk = static_cast<double>(k);
  return std::visit(Overloaded{
                        [&](const LJTS&) { return 1.0 / kk; },
                        [&](const TruncHarmonic& m) { return m.plateau_plus / kk; },
                        [&](const SplinedPair& m) { return spline_plateau(m, k); },
                    },
                    p.kind);
}

double pair_omega(const PairPotentialModel& p) {
  return std::visit(Overloaded{
                        [](const LJTS&) { return 1.0; },
                        [](const TruncHarmonic& m) { return m.plateau_plus; },
                        [](const SplinedPair& m) {
                          if (m.plateau_power == 1.0) return m.omega;
                          return m.plateau_power > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
                        },
                    },
                    p.kind);
}

double pair_range(const PairPotentialModel& p, int k) {
  if (const auto* m = std::get_if<SplinedPair>(&p.kind)) return std::pow(static_cast<double>(k), -m->range_power);
  return 1.0 / std::sqrt(static_cast<double>(k));
}

std::string describe(const PairPotentialModel& p) {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const LJTS& m) { os << "ljts(d=" << m.depth << ")"; },
                 [&](const TruncHarmonic& m) {
                   os << "trunc_harmonic(K=" << m.stiffness << ",c+=" << m.plateau_plus << ",c-=" << m.plateau_minus
                      << ")";
                 },
                 [&](const SplinedPair& m) {
                   os << "splined(" << m.core.tag << ",omega=" << m.omega << ",p=" << m.plateau_power
                      << ",m=" << m.range_power << ")";
                 },
             },
             p.kind);
  return os.str();
}

CellEnergyModel CellEnergyModel::pair(PairPotentialModel nn, PairPotentialModel nnn, OrientationPenalty pen) {
  CellEnergyModel m;
  m.kind_ = Kind::Pair;
  m.nn_ = std::move(nn);
  m.nnn_ = std::move(nnn);
  m.penalty_ = pen;
  return m;
}

CellEnergyModel CellEnergyModel::pair(PairPotentialModel both, OrientationPenalty pen) {
  return pair(both, both, pen);
}

CellEnergyModel CellEnergyModel::simplified_min(SimplifiedMin params, OrientationPenalty pen) {
  CellEnergyModel m;
  m.kind_ = Kind::SimplifiedMin;
  m.simplified_ = params;
  PairPotentialModel h{SplinedPair{ElasticCore::harmonic(params.stiffness), 1.0, 1.0, 0.5}};
  m.nn_ = h;
  m.nnn_ = h;
  m.penalty_ = pen;
  return m;
}

std::string CellEnergyModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::Pair)
    os << "pair{nn=" << nanorod::describe(nn_) << ",nnn=" << nanorod::describe(nnn_);
  else
    os << "simplified_min{K=" << simplified_.stiffness << ",cbar1=" << simplified_.cbar1;
  os << ",penalty=" << penalty_.strength << "/" << penalty_.radius << "}";
  return os.str();
}

double orientation_penalty(const CellEnergyModel& model, const Mat38& ybar, int k) {
  if (model.penalty().strength <= 0.0) return 0.0;
  Mat38 G = discrete_gradient(ybar);
  return dist_reflected(G) < model.penalty().radius ? model.penalty().strength / k : 0.0;
}

namespace {

double harmonic_cell(double K, std::uint8_t mask, const Mat38& y) {
  double e = 0.0;
  for (const CellBond& b : cell_bonds()) {
    if (!((mask >> b.i) & 1u) || !((mask >> b.j) & 1u)) continue;
    double r = (y.col(b.i) - y.col(b.j)).norm() / (b.nearest ? 1.0 : std::sqrt(2.0));
    e += bond_weight(b.nearest) * K * (r - 1.0) * (r - 1.0);
  }
  return e;
}

}  // namespace

double pair_core_energy(const PairPotentialModel& p, double r) {
  return std::visit(Overloaded{
                        [&](const LJTS& m) {
                          if (r <= 0.0) throw Error(ErrorCode::NonpositiveSeparation, "LJ core at r <= 0");
                          return lj(m.depth, r);
                        },
                        [&](const TruncHarmonic& m) { return m.stiffness * (r - 1.0) * (r - 1.0); },
                        [&](const SplinedPair& m) { return m.core.value(r); },
                    },
                    p.kind);
}

double cell_core_energy(const CellEnergyModel& model, std::uint8_t real_mask, const Mat38& ybar) {
  if (!model.is_pairwise()) return harmonic_cell(model.simplified().stiffness, real_mask, ybar);
  double e = 0.0;
  for (const CellBond& b : cell_bonds()) {
    if (!((real_mask >> b.i) & 1u) || !((real_mask >> b.j) & 1u)) continue;
    double r = (ybar.col(b.i) - ybar.col(b.j)).norm();
    e += b.nearest ? bond_weight(true) * pair_core_energy(model.nn(), r)
                   : bond_weight(false) * pair_core_energy(model.nnn(), r / std::sqrt(2.0));
  }
  return e;
}

double cell_energy(const CellEnergyModel& model, CellClass cls, std::uint8_t real_mask, const Mat38& ybar, int k) {
  check_finite(ybar);
  if (cls == CellClass::Interior) real_mask = kAllCorners;
  double e = 0.0;
  if (model.kind() == CellEnergyModel::Kind::Pair) {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const CellBond& b : cell_bonds()) {
      if (!((real_mask >> b.i) & 1u) || !((real_mask >> b.j) & 1u)) continue;
      double r = (ybar.col(b.i) - ybar.col(b.j)).norm();
      e += b.nearest ? bond_weight(true) * pair_energy(model.nn(), r, k)
                     : bond_weight(false) * pair_energy(model.nnn(), r * inv_sqrt2, k);
    }
  } else {
    e = std::min(harmonic_cell(model.simplified().stiffness, real_mask, ybar), model.simplified().cbar1 / k);
  }
  if (cls == CellClass::Interior) e += orientation_penalty(model, ybar, k);
  return e;
}

double cell_energy(const CellEnergyModel& model, CellClass cls, const Mat38& ybar, int k) {
  return cell_energy(model, cls, kAllCorners, ybar, k);
}

Eigen::Matrix<double, 24, 24> cell_hessian_at_reference(const CellEnergyModel& model, std::uint8_t real_mask) {
  Eigen::Matrix<double, 24, 24> H = Eigen::Matrix<double, 24, 24>::Zero();
  const Mat38& id = reference_cell();
  for (const CellBond& b : cell_bonds()) {
    if (!((real_mask >> b.i) & 1u) || !((real_mask >> b.j) & 1u)) continue;
    double curv = model.kind() == CellEnergyModel::Kind::Pair
                      ? pair_core_curvature(b.nearest ? model.nn() : model.nnn())
                      : 2.0 * model.simplified().stiffness;
    // d^2/dd^2 of W(|d|/l) at |d| = l is W''(1)/l^2 n n^T.
    double len2 = b.nearest ? 1.0 : 2.0;
    Vec3 n = (id.col(b.i) - id.col(b.j)).normalized();
    Mat3 block = bond_weight(b.nearest) * curv / len2 * n * n.transpose();
    H.block<3, 3>(3 * b.i, 3 * b.i) += block;
    H.block<3, 3>(3 * b.j, 3 * b.j) += block;
    H.block<3, 3>(3 * b.i, 3 * b.j) -= block;
    H.block<3, 3>(3 * b.j, 3 * b.i) -= block;
  }
  return H;
}

namespace {

// Smallest eigenvalue of the interior Hessian on the complement of the
// translations and infinitesimal rotations, and the largest eigenvalue.
std::pair<double, double> interior_spectrum(const CellEnergyModel& model) {
  Eigen::Matrix<double, 24, 24> H = cell_hessian_at_reference(model, kAllCorners);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 24, 24>> es(H);
  // The six rigid modes are exactly the six smallest (zero) eigenvalues.
  return {es.eigenvalues()(6), es.eigenvalues()(23)};
}

}  // namespace

ElasticThresholds elastic_threshold(const CellEnergyModel& model, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidParameters, "k must be >= 1");
  ElasticThresholds t{};
  auto [lmin, lmax] = interior_spectrum(model);
  if (model.kind() == CellEnergyModel::Kind::SimplifiedMin) {
    double level = model.simplified().cbar1 / k;
    t.cbar1 = level;
    t.c_frac = std::sqrt(level / lmax);
    t.omega_nn = t.omega_nnn = model.simplified().cbar1;
    return t;
  }
  t.c_frac = std::min(pair_c_frac(model.nn(), k), pair_c_frac(model.nnn(), k));
  t.omega_nn = pair_omega(model.nn());
  t.omega_nnn = pair_omega(model.nnn());
  // Off the elastic regime either one bond leaves its window (cell weight at
  // least 1/8 per ordered pair) or the quadratic lower bound applies.
  double plateau = std::min(pair_min_off_window(model.nn(), k), pair_min_off_window(model.nnn(), k));
  t.cbar1 = std::min(plateau / 8.0, 0.25 * lmin * t.c_frac * t.c_frac);
  return t;
}

}  // namespace nanorod
