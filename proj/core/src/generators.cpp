#include "nanorod/generators.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace nanorod {

Deformation rigid_config(std::shared_ptr<const RodLattice> lat, const Mat3& R, const Vec3& c) {
  if (!is_rotation(R, 1e-9)) throw Error(ErrorCode::NonRotation, "rigid motion needs R in SO(3)");
  Eigen::Matrix3Xd y = (R * lat->reference_positions()).colwise() + c;
  return Deformation(std::move(lat), std::move(y));
}

namespace {

int break_layer(double sigma, int k) { return static_cast<int>(std::floor(k * sigma + 1e-9)); }

// Segment owning lattice layer j: layers up to floor(k sigma) stay left of each breakpoint.
int segment_of_layer(const FrameCurve& fc, int j, int k) {
  for (std::size_t i = 0; i + 1 < fc.segments.size(); ++i)
    if (j <= break_layer(fc.segments[i].s1, k)) return static_cast<int>(i);
  return static_cast<int>(fc.segments.size()) - 1;
}

Vec3 ansatz_position(const FrameCurve& fc, int seg, double s, IPoint x, int k) {
  const FrameSegment& sg = fc.segments[seg];
  Mat3 R = sg.rotation(s);
  return sg.position(s) + R * Vec3(0.0, x.a, x.b) / k;
}

}  // namespace

namespace {

// Optimal correctors per constant-generator segment. q restarts at 0 after
// every nontrivial jump and is continuous in between.
struct CorrectorPieces {
  struct Piece {
    double s0;
    Mat3 R0;
    Mat3 A;
    Vec3 g;
    Vec3 q0;
    Eigen::Matrix3Xd alpha;
  };
  std::vector<Piece> pieces;
  std::vector<IPoint> ext;

  CorrectorPieces(const FrameCurve& fc, const CrossSection& cs, const QuadraticFormTable& Q) : ext(cs.ext_corners()) {
    std::vector<FrameJump> jumps = fc.jumps();
    Vec3 q0 = Vec3::Zero();
    for (std::size_t i = 0; i < fc.segments.size(); ++i) {
      const FrameSegment& seg = fc.segments[i];
      if (!seg.constant_generator)
        throw Error(ErrorCode::InvalidParameters, "optimal correctors need constant-generator segments");
      if (i > 0 && !jumps[i - 1].trivial()) q0.setZero();
      Q3relResult r = q3rel_solve(seg.generator, cs, Q);
      Mat3 R0 = seg.rotation(seg.s0);
      pieces.push_back({seg.s0, R0, seg.generator, r.g, q0, r.alpha});
      q0 += R0 * integral_exp_skew(seg.generator, seg.s1 - seg.s0) * r.g;
    }
  }

  Vec3 q(int seg, double s) const {
    const Piece& p = pieces[seg];
    return p.q0 + p.R0 * integral_exp_skew(p.A, s - p.s0) * p.g;
  }

  Vec3 beta(int seg, double s, IPoint x) const {
    const Piece& p = pieces[seg];
    auto it = std::lower_bound(ext.begin(), ext.end(), x);
    if (it == ext.end() || *it != x) return Vec3::Zero();
    return p.R0 * exp_skew((s - p.s0) * p.A) * p.alpha.col(it - ext.begin());
  }
};

}  // namespace

void attach_optimal_correctors(RecoveryAnsatz& ansatz, const CrossSection& cs, const QuadraticFormTable& Q) {
  auto pieces = std::make_shared<const CorrectorPieces>(ansatz.frame, cs, Q);
  FrameCurve frame = ansatz.frame;
  ansatz.q = [pieces, frame](double s) { return pieces->q(frame.segment_at(s), s); };
  ansatz.beta = [pieces, frame](double s, IPoint x) { return pieces->beta(frame.segment_at(s), s, x); };
}

Deformation smooth_frame_config(const RecoveryAnsatz& ansatz, const CrossSection& cs) {
  const FrameCurve& fc = ansatz.frame;
  check_admissible(fc);
  for (const FrameJump& j : fc.jumps())
    if (!j.trivial())
      throw Error(ErrorCode::InadmissibleFrame, "smooth ansatz needs a frame without jumps; use jump_frame_config");
  const int k = ansatz.k;
  auto lat = std::make_shared<const RodLattice>(build_rod_lattice(cs, fc.length(), k));
  Eigen::Matrix3Xd y(3, lat->num_atoms());
  for (int a = 0; a < lat->num_atoms(); ++a) {
    int j = lat->atom_layer(a);
    double s = static_cast<double>(j) / k;
    IPoint x = lat->atom_inplane(a);
    Vec3 p = ansatz_position(fc, segment_of_layer(fc, j, k), s, x, k);
    if (ansatz.q) p += ansatz.q(s) / k;
    if (ansatz.beta) p += ansatz.beta(s, x) / (static_cast<double>(k) * k);
    y.col(a) = p;
  }
  return Deformation(lat, std::move(y));
}

std::vector<LocalJump> local_jumps(const FrameCurve& fc, int k) {
  std::vector<LocalJump> out;
  for (const FrameJump& j : fc.jumps()) {
    if (j.trivial()) continue;
    LocalJump lj;
    lj.sigma = j.sigma;
    lj.R_rel = j.rel_rotation;
    lj.u = j.left_rotation.transpose() * j.du;
    if (k > 0) {
      lj.layer = break_layer(j.sigma, k);
      double sk = static_cast<double>(lj.layer) / k;
      lj.u += (sk - j.sigma) * (lj.R_rel - Mat3::Identity()) * Vec3::UnitX();
    }
    out.push_back(lj);
  }
  return out;
}

double default_splice_radius(int k) { return 1.0 / std::sqrt(static_cast<double>(k)); }

std::vector<SpliceWindow> splice_windows(const FrameCurve& fc, int k, double r) {
  if (r <= 0.0) r = default_splice_radius(k);
  int n = half_layers({r, k});
  std::vector<SpliceWindow> out;
  for (const LocalJump& lj : local_jumps(fc, k)) out.push_back({lj.layer - n, lj.layer + n});
  return out;
}

FrameCurve freeze_near_jumps(const FrameCurve& fc, double width) {
  std::vector<FrameJump> jumps = fc.jumps();
  FrameCurve out;
  for (std::size_t i = 0; i < fc.segments.size(); ++i) {
    const FrameSegment& seg = fc.segments[i];
    bool curved = !seg.constant_generator || !seg.generator.isZero(0.0);
    bool cut_left = curved && i > 0 && !jumps[i - 1].trivial();
    bool cut_right = curved && i + 1 < fc.segments.size() && !jumps[i].trivial();
    if (!cut_left && !cut_right) {
      out.segments.push_back(seg);
      continue;
    }
    if (!seg.constant_generator)
      throw Error(ErrorCode::InvalidParameters, "frozen frames need constant-generator segments");
    double a = seg.s0 + (cut_left ? width : 0.0);
    double b = seg.s1 - (cut_right ? width : 0.0);
    if (!(b > a)) throw Error(ErrorCode::JumpTooClose, "segment shorter than the frozen zones around its jumps");
    if (cut_left) {
      Mat3 R = seg.rotation(a);
      out.segments.push_back(
          FrameSegment::constant(seg.s0, a, R, Vec3(seg.position(a) - width * (R * Vec3::UnitX())), Mat3::Zero()));
    }
    out.segments.push_back(FrameSegment::constant(a, b, seg.rotation(a), seg.position(a), seg.generator));
    if (cut_right) out.segments.push_back(FrameSegment::constant(b, seg.s1, seg.rotation(b), seg.position(b), Mat3::Zero()));
  }
  return out;
}

Deformation jump_frame_config(const FrameCurve& original, const CrossSection& cs, int k, double r,
                              const std::vector<std::optional<JumpProfile>>& profiles,
                              const QuadraticFormTable* correctors) {
  check_admissible(original);
  if (r <= 0.0) r = default_splice_radius(k);
  const FrameCurve fc = freeze_near_jumps(original, r + 2.0 / k);
  std::optional<CorrectorPieces> corr;
  if (correctors) corr.emplace(fc, cs, *correctors);

  // Ansatz point of segment seg at arclength s.
  auto point = [&](int seg, double s, IPoint x) -> Vec3 {
    Vec3 p = ansatz_position(fc, seg, s, x, k);
    if (corr) p += corr->q(seg, s) / k + corr->beta(seg, s, x) / (static_cast<double>(k) * k);
    return p;
  };

  auto lat = std::make_shared<const RodLattice>(build_rod_lattice(cs, fc.length(), k));
  Eigen::Matrix3Xd y(3, lat->num_atoms());
  for (int a = 0; a < lat->num_atoms(); ++a) {
    int j = lat->atom_layer(a);
    y.col(a) = point(segment_of_layer(fc, j, k), static_cast<double>(j) / k, lat->atom_inplane(a));
  }

  std::vector<FrameJump> jumps;
  for (const FrameJump& j : fc.jumps())
    if (!j.trivial()) jumps.push_back(j);
  if (!profiles.empty() && profiles.size() != jumps.size())
    throw Error(ErrorCode::InvalidParameters, "need one profile slot per nontrivial jump");
  const int n = half_layers({r, k});
  if (n < 1) throw Error(ErrorCode::InvalidParameters, "splice window holds no layer");
  for (std::size_t i = 0; i + 1 < jumps.size(); ++i)
    if (jumps[i + 1].sigma - jumps[i].sigma < 4.0 * r)
      throw Error(ErrorCode::JumpTooClose, "jumps at " + std::to_string(jumps[i].sigma) + " and " +
                                               std::to_string(jumps[i + 1].sigma) + " are closer than 4r");
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const FrameJump& fj = jumps[i];
    const int layer = break_layer(fj.sigma, k);
    if (layer - n < 0 || layer + n > lat->layers())
      throw Error(ErrorCode::JumpTooClose, "splice window around " + std::to_string(fj.sigma) + " leaves the rod");

    // Near the jump both sides are rigid: x -> R(sigma+-) (x1 - sigma, x'/k) + ytilde_eff(sigma+-).
    const Mat3& O = fj.left_rotation;
    const double shift = static_cast<double>(layer) / k - fj.sigma;
    Vec3 left = point(fj.segment, fj.sigma, {0, 0});
    Vec3 right = point(fj.segment + 1, fj.sigma, {0, 0});
    CrackProblem cp;
    cp.u = O.transpose() * (right - left) + shift * (fj.rel_rotation - Mat3::Identity()) * Vec3::UnitX();
    cp.R_rel = fj.rel_rotation;
    cp.cs = cs;
    cp.schedule = {{r, k}};
    JumpProfile prof;
    if (!profiles.empty() && profiles[i]) {
      prof = *profiles[i];
      cp.boundary_fraction = prof.boundary_fraction;
      const RodLattice& pl = *prof.config.lattice;
      if (pl.k() != k || pl.layers() != 2 * n || pl.axial_offset() != -n || pl.cross_section().corners() != cs.corners())
        throw Error(ErrorCode::ProfileBoundaryMismatch, "profile lattice does not fit the splice window");
      for (int a = 0; a < pl.num_atoms(); ++a)
        if (is_boundary_atom(cp, pl, a) &&
            (prof.config.positions.col(a) - boundary_target(cp, pl, a)).norm() > 1e-10)
          throw Error(ErrorCode::ProfileBoundaryMismatch,
                      "profile boundary zone is not at the rigid data of the jump at " + std::to_string(fj.sigma));
    } else {
      prof.config = clean_break_config(cp, {r, k});
    }

    Vec3 c = left + shift * (O * Vec3::UnitX());
    const RodLattice& pl = *prof.config.lattice;
    for (int a = 0; a < pl.num_atoms(); ++a) {
      int j = layer - n + pl.atom_layer(a);
      y.col(lat->atom_id(j, pl.atom_inplane(a))) = O * prof.config.positions.col(a) + c;
    }
  }
  return Deformation(lat, std::move(y));
}

}  // namespace nanorod
