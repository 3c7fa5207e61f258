#include "nanorod/elastic_limit.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"

#include <cmath>
#include <numbers>

namespace nanorod {

FrameSegment FrameSegment::constant(double s0, double s1, const Mat3& R0, const Vec3& y0, const Mat3& A) {
  FrameSegment seg;
  seg.s0 = s0;
  seg.s1 = s1;
  seg.constant_generator = true;
  seg.generator = A;
  seg.rotation = [=](double s) -> Mat3 { return R0 * exp_skew((s - s0) * A); };
  seg.rotation_derivative = [=](double s) -> Mat3 { return R0 * exp_skew((s - s0) * A) * A; };
  seg.position = [=](double s) -> Vec3 { return y0 + R0 * integral_exp_skew(A, s - s0) * Vec3::UnitX(); };
  return seg;
}

bool FrameJump::trivial() const {
  return du.norm() <= 1e-12 && (rel_rotation - Mat3::Identity()).norm() <= 1e-12;
}

int FrameCurve::segment_at(double s) const {
  if (segments.empty()) throw Error(ErrorCode::InadmissibleFrame, "frame curve has no segments");
  for (std::size_t i = 0; i + 1 < segments.size(); ++i)
    if (s < segments[i].s1) return static_cast<int>(i);
  return static_cast<int>(segments.size()) - 1;
}

Mat3 FrameCurve::rotation(double s) const { return segments[segment_at(s)].rotation(s); }

Vec3 FrameCurve::position(double s) const { return segments[segment_at(s)].position(s); }

std::vector<FrameJump> FrameCurve::jumps() const {
  std::vector<FrameJump> out;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    const FrameSegment& l = segments[i];
    const FrameSegment& r = segments[i + 1];
    FrameJump j;
    j.segment = static_cast<int>(i);
    j.sigma = l.s1;
    j.left_rotation = l.rotation(l.s1);
    j.du = r.position(r.s0) - l.position(l.s1);
    j.rel_rotation = j.left_rotation.transpose() * r.rotation(r.s0);
    out.push_back(j);
  }
  return out;
}

Mat3 segment_generator(const SegmentSpec& spec) {
  Mat3 A = Mat3::Zero();
  if (spec.kind == SegmentSpec::Kind::Straight) return A;
  if (spec.plane != 2 && spec.plane != 3)
    throw Error(ErrorCode::InvalidParameters, "arc plane must be 2 or 3");
  int p = spec.plane - 1;
  A(p, 0) = spec.kappa;
  A(0, p) = -spec.kappa;
  if (spec.kind == SegmentSpec::Kind::Helix) {
    A(2, 1) += spec.tau;
    A(1, 2) -= spec.tau;
  }
  return A;
}

FrameCurve build_frame_curve(const std::vector<SegmentSpec>& segments, const std::vector<JumpSpec>& jumps,
                             const Mat3& R0, const Vec3& y0) {
  if (segments.empty()) throw Error(ErrorCode::InvalidParameters, "frame curve needs at least one segment");
  if (!is_rotation(R0, 1e-8)) throw Error(ErrorCode::InadmissibleFrame, "initial frame is not a rotation");
  std::vector<bool> used(jumps.size(), false);
  FrameCurve fc;
  Mat3 R = R0;
  Vec3 y = y0;
  double s = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const SegmentSpec& spec = segments[i];
    if (!(spec.length > 0.0) || !std::isfinite(spec.length))
      throw Error(ErrorCode::InvalidParameters, "segment length must be positive");
    FrameSegment seg = FrameSegment::constant(s, s + spec.length, R, y, segment_generator(spec));
    s = seg.s1;
    R = seg.rotation(s);
    y = seg.position(s);
    fc.segments.push_back(std::move(seg));
    if (i + 1 == segments.size()) break;
    for (std::size_t j = 0; j < jumps.size(); ++j) {
      if (used[j] || std::abs(jumps[j].sigma - s) > 1e-9) continue;
      used[j] = true;
      R = R * rotation_from_axis_angle(jumps[j].axis, jumps[j].angle);
      y = y + jumps[j].u;
    }
  }
  for (std::size_t j = 0; j < jumps.size(); ++j)
    if (!used[j])
      throw Error(ErrorCode::InvalidParameters,
                  "jump at sigma = " + std::to_string(jumps[j].sigma) + " is not at an interior segment breakpoint");
  return fc;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error(ErrorCode::InvalidParameters, "quadrature needs at least one point");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

void check_admissible(const FrameCurve& fc, double tol) {
  if (fc.segments.empty()) throw Error(ErrorCode::InadmissibleFrame, "frame curve has no segments");
  if (std::abs(fc.segments.front().s0) > 1e-12) throw Error(ErrorCode::InadmissibleFrame, "frame curve must start at 0");
  std::vector<double> nodes, weights;
  gauss_legendre(5, nodes, weights);
  for (std::size_t i = 0; i < fc.segments.size(); ++i) {
    const FrameSegment& seg = fc.segments[i];
    if (!(seg.s1 > seg.s0)) throw Error(ErrorCode::InadmissibleFrame, "empty frame segment");
    if (i > 0 && std::abs(seg.s0 - fc.segments[i - 1].s1) > 1e-12)
      throw Error(ErrorCode::InadmissibleFrame, "frame segments are not contiguous");
    std::vector<double> samples{seg.s0, seg.s1};
    for (double t : nodes) samples.push_back(0.5 * (seg.s0 + seg.s1) + 0.5 * (seg.s1 - seg.s0) * t);
    for (double s : samples) {
      Mat3 R = seg.rotation(s);
      if (!R.allFinite() || (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > tol ||
          std::abs(R.determinant() - 1.0) > tol)
        throw Error(ErrorCode::InadmissibleFrame, "frame leaves SO(3) at s = " + std::to_string(s));
    }
  }
}

double elastic_energy_of_frame(const FrameCurve& fc, const Mat3& K, int quadrature_points) {
  check_admissible(fc);
  std::vector<double> nodes, weights;
  gauss_legendre(quadrature_points, nodes, weights);
  auto density = [&](const FrameSegment& seg, double s) {
    Vec3 a = axial_vector(skew_part(seg.rotation(s).transpose() * seg.rotation_derivative(s)));
    return 0.5 * a.dot(K * a);
  };
  auto composite = [&](const FrameSegment& seg, int parts) {
    double h = (seg.s1 - seg.s0) / parts;
    double sum = 0.0;
    for (int p = 0; p < parts; ++p) {
      double mid = seg.s0 + (p + 0.5) * h;
      for (int q = 0; q < quadrature_points; ++q) sum += 0.5 * h * weights[q] * density(seg, mid + 0.5 * h * nodes[q]);
    }
    return sum;
  };
  double total = 0.0;
  for (const FrameSegment& seg : fc.segments) {
    int parts = 1;
    double prev = composite(seg, parts);
    for (int it = 0; it < 12; ++it) {
      parts *= 2;
      double cur = composite(seg, parts);
      bool done = std::abs(cur - prev) <= 1e-8 * std::max(std::abs(cur), 1e-300);
      prev = cur;
      if (done) break;
    }
    total += prev;
  }
  return total;
}

double elastic_energy_of_frame(const FrameCurve& fc, const CrossSection& cs, const QuadraticFormTable& Q,
                               int quadrature_points) {
  return elastic_energy_of_frame(fc, q3rel_matrix(cs, Q), quadrature_points);
}

}  // namespace nanorod
