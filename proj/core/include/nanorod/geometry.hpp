#pragma once

#include "nanorod/lattice.hpp"

namespace nanorod {

// ybar minus its column mean.
Mat38 discrete_gradient(const Mat38& ybar);

// min over R in SO(3) of |G - R Id|_F for mean-zero G (closed-form Procrustes).
double dist_so3bar(const Mat38& G);

// Same distance to the reflected set {R Id : R in O(3), det R = -1}.
double dist_reflected(const Mat38& G);

// Rotation attaining dist_so3bar.
Mat3 nearest_rotation(const Mat38& G);

Mat3 skew(const Vec3& a);
Vec3 axial_vector(const Mat3& A);
Mat3 skew_part(const Mat3& M);
Mat3 rotation_from_axis_angle(const Vec3& axis, double angle);
// Matrix exponential of a skew-symmetric matrix (Rodrigues).
Mat3 exp_skew(const Mat3& A);
// Integral of exp(tA) over t in [0, s].
Mat3 integral_exp_skew(const Mat3& A, double s);
bool is_rotation(const Mat3& R, double tol = 1e-10);

}  // namespace nanorod
