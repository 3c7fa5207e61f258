#pragma once

#include "nanorod/lattice.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace nanorod {

// Twice differentiable elastic core W0 with minimum 0 at r = 1.
struct ElasticCore {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::string tag;  // identifies the core in model hashes

  static ElasticCore harmonic(double stiffness);
};

struct LJTS {
  double depth = 1.0;
};

struct TruncHarmonic {
  double stiffness = 1.0;
  double plateau_plus = 0.3;
  double plateau_minus = 0.3;
};

// W(r) = w_k S(W0(r) / w_k) with plateau w_k = omega / k^plateau_power and
// S(s) = s for s <= 1/2, 1 - 1/(4s) beyond. Interaction range M_k = k^-range_power.
struct SplinedPair {
  ElasticCore core = ElasticCore::harmonic(1.0);
  double omega = 0.3;
  double plateau_power = 1.0;
  double range_power = 0.5;
};

struct PairPotentialModel {
  std::variant<LJTS, TruncHarmonic, SplinedPair> kind;
};

double pair_energy(const PairPotentialModel& p, double r, int k);
// One-sided derivative of the active branch.
double pair_derivative(const PairPotentialModel& p, double r, int k);
// W0''(1) of the elastic core.
double pair_core_curvature(const PairPotentialModel& p);
// Half-width of the window around r = 1 on which W = W0.
double pair_elastic_window(const PairPotentialModel& p, int k);
// Strain threshold implied by this potential alone.
double pair_c_frac(const PairPotentialModel& p, int k);
// Smallest value taken outside the elastic window.
double pair_min_off_window(const PairPotentialModel& p, int k);
// Supremum over r >= 1.
double pair_tensile_sup(const PairPotentialModel& p, int k);
// lim k * W(r_k) for r_k -> infinity.
double pair_omega(const PairPotentialModel& p);
double pair_range(const PairPotentialModel& p, int k);
std::string describe(const PairPotentialModel& p);

struct OrientationPenalty {
  double strength = 1.0;  // cbar, penalty value cbar / k
  double radius = 0.1;    // delta0
};

// W = min{W0, cbar1 / k} with W0 the harmonic pair cell energy of the given stiffness.
struct SimplifiedMin {
  double stiffness = 1.0;
  double cbar1 = 0.3;
};

class CellEnergyModel {
 public:
  enum class Kind { Pair, SimplifiedMin };

  static CellEnergyModel pair(PairPotentialModel nn, PairPotentialModel nnn, OrientationPenalty pen = {});
  static CellEnergyModel pair(PairPotentialModel both, OrientationPenalty pen = {});
  static CellEnergyModel simplified_min(SimplifiedMin params, OrientationPenalty pen = {});

  Kind kind() const { return kind_; }
  bool is_pairwise() const { return kind_ == Kind::Pair; }
  const PairPotentialModel& nn() const { return nn_; }
  const PairPotentialModel& nnn() const { return nnn_; }
  const SimplifiedMin& simplified() const { return simplified_; }
  const OrientationPenalty& penalty() const { return penalty_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Pair;
  PairPotentialModel nn_;
  PairPotentialModel nnn_;
  SimplifiedMin simplified_;
  OrientationPenalty penalty_;
};

// Weight of one unordered cell bond; each lattice bond lies in 4 (NN) or 2
// (NNN) cells, so the weights of all cells containing it sum to 1.
constexpr double bond_weight(bool nearest) { return nearest ? 0.25 : 0.5; }

constexpr std::uint8_t kAllCorners = 0xFF;

// Cell energy from hatted corner positions. Bonds with a ghost endpoint are
// skipped; the orientation penalty applies to interior cells only.
double cell_energy(const CellEnergyModel& model, CellClass cls, std::uint8_t real_mask, const Mat38& ybar, int k);
double cell_energy(const CellEnergyModel& model, CellClass cls, const Mat38& ybar, int k);
// Elastic-core cell energy W0 (no truncation, no penalty).
double cell_core_energy(const CellEnergyModel& model, std::uint8_t real_mask, const Mat38& ybar);
double pair_core_energy(const PairPotentialModel& p, double r);
// Orientation penalty of a cell (0 or cbar / k).
double orientation_penalty(const CellEnergyModel& model, const Mat38& ybar, int k);

// Hessian at the reference cell, 24x24 acting on column-major vec of 3x8 matrices.
Eigen::Matrix<double, 24, 24> cell_hessian_at_reference(const CellEnergyModel& model, std::uint8_t real_mask);

struct ElasticThresholds {
  double c_frac;
  double cbar1;
  double omega_nn;
  double omega_nnn;
};

ElasticThresholds elastic_threshold(const CellEnergyModel& model, int k);

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;     // largest violation margin observed (<= 0 means satisfied)
  std::string witness;    // description of the worst sample
  long samples = 0;
  std::string domain;     // what was sampled
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
};

AssumptionReport check_assumptions(const CellEnergyModel& model, const std::vector<int>& k_list, long samples,
                                   std::uint64_t seed, double c_far = 1.0);

}  // namespace nanorod
