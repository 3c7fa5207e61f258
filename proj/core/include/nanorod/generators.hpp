#pragma once

#include "nanorod/crack.hpp"
#include "nanorod/elastic_limit.hpp"
#include "nanorod/energy.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace nanorod {

// y(x) = R x + c at every atom.
Deformation rigid_config(std::shared_ptr<const RodLattice> lat, const Mat3& R, const Vec3& c);

// y(x) = ytilde(x1) + (x2 d2 + x3 d3)/k + q(x1)/k + beta(x1, x')/k^2 with
// (d_ytilde | d2 | d3) = R. Missing correctors are zero.
struct RecoveryAnsatz {
  FrameCurve frame;
  int k = 16;
  std::function<Vec3(double)> q;
  std::function<Vec3(double, IPoint)> beta;
};

// Correctors q' = R g and beta = R alpha from the Q3rel minimizer of each
// segment's constant generator (q(0) = 0, q restarts at 0 after a jump).
void attach_optimal_correctors(RecoveryAnsatz& ansatz, const CrossSection& cs, const QuadraticFormTable& Q);

// Lattice evaluation of the ansatz on [0, floor(kL)/k]. The frame must be
// continuous (no nontrivial jumps).
Deformation smooth_frame_config(const RecoveryAnsatz& ansatz, const CrossSection& cs);

// Jump data in the frame of the left segment, for a break placed between
// layers floor(k sigma) and floor(k sigma) + 1.
struct LocalJump {
  double sigma = 0.0;
  int layer = 0;  // floor(k sigma)
  Vec3 u = Vec3::Zero();
  Mat3 R_rel = Mat3::Identity();
};

// Nontrivial jumps of fc. With k > 0 the translation includes the offset
// (sigma_k - sigma)(R_rel - Id) e1 from placing the break on the lattice.
std::vector<LocalJump> local_jumps(const FrameCurve& fc, int k = 0);

// A crack-lattice configuration in the jump's local frame (left zone x,
// right zone R_rel x + u), with its frozen-zone fraction.
struct JumpProfile {
  Deformation config;
  double boundary_fraction = 0.75;
};

struct SpliceWindow {
  int first_layer = 0;
  int last_layer = 0;
};

std::vector<SpliceWindow> splice_windows(const FrameCurve& fc, int k, double r);

// Default window half-width k^(-1/2).
double default_splice_radius(int k);

// Replaces the frame within `width` of each nontrivial jump by the straight
// continuation with the frame held at its value at distance `width`, so the
// frame is constant next to every jump. Straight segments are unchanged.
FrameCurve freeze_near_jumps(const FrameCurve& fc, double width);

// Smooth ansatz on the frozen frame freeze_near_jumps(fc, r + 2/k), with a
// crack profile spliced into each window floor(k sigma) +- floor(rk) by the
// rigid map of the left frame. Missing profiles default to
// clean_break_config; r <= 0 selects the default radius. With a form table,
// optimal correctors are added away from the jumps (q restarts at each jump).
// Profiles are checked against the jump data of the frozen, corrected frame.
Deformation jump_frame_config(const FrameCurve& fc, const CrossSection& cs, int k, double r = 0.0,
                              const std::vector<std::optional<JumpProfile>>& profiles = {},
                              const QuadraticFormTable* correctors = nullptr);

}  // namespace nanorod
