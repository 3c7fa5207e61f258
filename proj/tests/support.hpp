#pragma once

#include "nanorod/energy.hpp"
#include "nanorod/geometry.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>

namespace testing_support {

using namespace nanorod;

// Values frozen by tests/oracles/derive.py.
inline const nlohmann::json& oracle() {
  static const nlohmann::json j = [] {
    std::ifstream is(NANOROD_ORACLE_FILE);
    return nlohmann::json::parse(is);
  }();
  return j;
}

inline CrossSection unit_square() { return build_cross_section({{0, 0}}); }
inline CrossSection block2x2() { return build_cross_section({{0, 0}, {1, 0}, {0, 1}, {1, 1}}); }

inline CellEnergyModel trunc_model(double plateau = 0.3) {
  return CellEnergyModel::pair(PairPotentialModel{TruncHarmonic{1.0, plateau, plateau}});
}
inline CellEnergyModel ljts_model() { return CellEnergyModel::pair(PairPotentialModel{LJTS{1.0}}); }

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

// Identity plus independent displacements of size `amp` (physical units).
inline Deformation jittered(std::shared_ptr<const RodLattice> lat, std::mt19937_64& rng, double amp) {
  Deformation d = identity_deformation(lat);
  for (int a = 0; a < d.positions.cols(); ++a) d.positions.col(a) += random_vec(rng, amp);
  return d;
}

}  // namespace testing_support
