#include "nanorod/geometry.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace nanorod {

namespace {

// Orthogonal R with det R = sign closest to G in the sense of |G - R Id|.
Mat3 procrustes(const Mat38& G, double sign) {
  Eigen::JacobiSVD<Mat3> svd(G * reference_cell().transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  D(2, 2) = (sign * (U * V.transpose()).determinant() >= 0) ? 1.0 : -1.0;
  return U * D * V.transpose();
}

// Evaluated directly rather than through |G|^2 + |Id|^2 - 2 tr, which loses
// half the digits near the rigid set.
double dist_to(const Mat38& G, double sign) { return (G - procrustes(G, sign) * reference_cell()).norm(); }

}  // namespace

Mat38 discrete_gradient(const Mat38& ybar) {
  Vec3 mean = ybar.rowwise().mean();
  return ybar.colwise() - mean;
}

double dist_so3bar(const Mat38& G) { return dist_to(G, 1.0); }

double dist_reflected(const Mat38& G) { return dist_to(G, -1.0); }

Mat3 nearest_rotation(const Mat38& G) { return procrustes(G, 1.0); }

Mat3 skew(const Vec3& a) {
  Mat3 A;
  A << 0, -a(2), a(1), a(2), 0, -a(0), -a(1), a(0), 0;
  return A;
}

Vec3 axial_vector(const Mat3& A) { return {A(2, 1), A(0, 2), A(1, 0)}; }

Mat3 skew_part(const Mat3& M) { return 0.5 * (M - M.transpose()); }

Mat3 rotation_from_axis_angle(const Vec3& axis, double angle) {
  double n = axis.norm();
  if (n == 0.0) return Mat3::Identity();
  return exp_skew(skew(axis / n * angle));
}

Mat3 exp_skew(const Mat3& A) {
  double th = axial_vector(A).norm();
  if (th < 1e-8) return Mat3::Identity() + A + 0.5 * A * A;
  return Mat3::Identity() + std::sin(th) / th * A + (1.0 - std::cos(th)) / (th * th) * A * A;
}

Mat3 integral_exp_skew(const Mat3& A, double s) {
  double th = axial_vector(A).norm();
  if (th * std::abs(s) < 1e-6) return s * Mat3::Identity() + 0.5 * s * s * A + s * s * s / 6.0 * A * A;
  double ts = th * s;
  return s * Mat3::Identity() + (1.0 - std::cos(ts)) / (th * th) * A + (ts - std::sin(ts)) / (th * th * th) * A * A;
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  return (R.transpose() * R - Mat3::Identity()).norm() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

}  // namespace nanorod
