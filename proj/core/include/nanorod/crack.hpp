#pragma once

#include "nanorod/energy.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace nanorod {

struct ScheduleEntry {
  double r = 0.5;
  int k = 16;
};

// Cell problem on the window [-r, r] around a break at x1 = 0, in physical
// units: 2N + 1 layers of spacing 1/k with N = floor(rk). Atoms with
// |hatted x1| >= boundary_fraction * N are frozen to x (left) and
// R_rel x + u (right).
struct CrackProblem {
  Vec3 u = Vec3::Zero();
  Mat3 R_rel = Mat3::Identity();
  CellEnergyModel model = CellEnergyModel::pair(PairPotentialModel{TruncHarmonic{}});
  CrossSection cs;
  std::vector<ScheduleEntry> schedule;
  double boundary_fraction = 0.75;
};

// Throws InvalidParameters or NonRotation when the problem violates its invariants.
void validate(const CrackProblem& p);
int half_layers(const ScheduleEntry& e);
std::shared_ptr<const RodLattice> crack_lattice(const CrackProblem& p, const ScheduleEntry& e);
bool is_boundary_atom(const CrackProblem& p, const RodLattice& lat, int atom);
// Rigid boundary target of an atom (left map for hatted x1 <= 0, right map otherwise).
Vec3 boundary_target(const CrackProblem& p, const RodLattice& lat, int atom);

// Left half (hatted x1 <= 0) at its rigid target, right half at R_rel x + u.
Deformation clean_break_config(const CrackProblem& p, const ScheduleEntry& e);

struct KinkResult {
  Deformation config;
  double t0 = 0.0;
  int anchor = 0;                      // corner index of x0'
  Vec3 auxiliary_jump = Vec3::Zero();  // jump of the clean break that is shifted back
  Vec3 effective_jump = Vec3::Zero();  // translation of the right half after the shift
  double energy = 0.0;                 // E_k of the contact configuration
};

// Shifted-contact construction. anchor < 0 tries every x0' and keeps the
// lowest-energy contact configuration.
KinkResult kink_config(const CrackProblem& p, const ScheduleEntry& e, int anchor = -1);

// (#L) omega_NN + #{ordered in-plane pairs at distance 1} omega_NNN.
double phi_explicit_masspring(const Vec3& u, const CellEnergyModel& model, const CrossSection& cs);

// E_k = sum over cells of k W_cell.
double crack_energy(const CrackProblem& p, const Deformation& def);

struct PhiOptions {
  int starts = 8;
  std::uint64_t seed = 1;
  int max_iterations = 3000;
  double gradient_tolerance = 1e-10;  // max-norm, hatted units
  double perturbation = 0.25;         // seed noise, in units of the nearest-neighbour elastic window
  int reactivation_rounds = 2;
  int reactivation_attempts = 24;     // per round
  int threads = 1;
};

struct SeedResult {
  std::string name;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct CrackEntryResult {
  ScheduleEntry entry;
  double energy = 0.0;
  std::string best_seed;
  std::vector<SeedResult> seeds;
  Deformation best;
  SliceEnergyProfile profile;
  int full_gap_fibres = 0;  // fibres with at least one nearest-neighbour bond beyond its elastic window
  bool clean_break_dominant = false;
  bool boundary_exact = true;
};

struct CrackSolution {
  std::vector<CrackEntryResult> entries;
  double estimate = 0.0;
  bool monotone = true;  // per-entry energies nonincreasing along the schedule
  std::vector<std::string> diagnostics;
};

CrackSolution phi_numeric(const CrackProblem& p, const PhiOptions& opts = {});

// {u, R_rel, schedule, energies, estimate, diagnostics}.
std::string phi_report_json(const CrackProblem& p, const CrackSolution& sol);

// Components of the graph joining cell-sharing atoms whose deformed distance
// (physical units) is below threshold, ordered by their smallest axial layer.
std::vector<std::vector<int>> component_decomposition(const Deformation& def, double threshold);

}  // namespace nanorod
