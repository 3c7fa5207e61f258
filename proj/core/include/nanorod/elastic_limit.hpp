#pragma once

#include "nanorod/lattice.hpp"
#include "nanorod/potentials.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nanorod {

using Mat24 = Eigen::Matrix<double, 24, 24>;

// vec(M)^T Q vec(M) with column-major vec.
double quadratic_value(const Mat24& Q, const Mat38& M);

struct QuadraticFormTable {
  std::vector<IPoint> midpoints;  // the extended midpoint set, in cross-section order
  std::vector<Mat24> forms;       // Q_3 on the cross-section, Q_surf elsewhere
  std::vector<bool> interior;
  Eigen::VectorXd complement_spectrum;  // eigenvalues of Q_3 off the rigid modes
  double kernel_residual = 0.0;         // max |Q v| over unit rigid-mode vectors, relative to |Q|
  bool finite_difference = false;

  const Mat24& q3() const;
};

enum class HessianMethod { Analytic, FiniteDifference };

// Central second differences with step h, Richardson-extrapolated with h/2.
Mat24 finite_difference_hessian(const std::function<double(const Mat38&)>& f, double h = 1e-5);

QuadraticFormTable hessian_forms(const CellEnergyModel& model, const CrossSection& cs,
                                 HessianMethod method = HessianMethod::Analytic);

struct Q3relResult {
  double value = 0.0;
  Eigen::Matrix3Xd alpha;  // corrector on cs.ext_corners()
  Vec3 g = Vec3::Zero();
  double stationarity = 0.0;  // |H z + b| at the returned minimizer
};

// The 3x8 matrix M(x'; A, g, alpha) for the extended midpoint m.
Mat38 q3rel_cell_matrix(const Mat3& A, const Vec3& g, const Eigen::Matrix3Xd& alpha, const CrossSection& cs,
                        IPoint m);

Q3relResult q3rel_solve(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q);
double q3rel(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q);
// Plain gradient descent from random starts; independent check of q3rel.
double q3rel_oracle(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q, std::uint64_t seed = 7,
                    int starts = 20);
// Symmetric K with q3rel(skew(a)) = a^T K a.
Mat3 q3rel_matrix(const CrossSection& cs, const QuadraticFormTable& Q);

// Stores q3rel values keyed by model hash and A rounded to 1e-12.
class Q3relCache {
 public:
  explicit Q3relCache(std::string model_hash) : hash_(std::move(model_hash)) {}
  double get(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q);
  std::size_t size() const { return values_.size(); }
  void load(const std::string& path);  // entries of other hashes are ignored
  void save(const std::string& path) const;

 private:
  std::string hash_;
  std::map<std::array<long long, 9>, double> values_;
};

std::string model_hash(const CellEnergyModel& model, const CrossSection& cs);

struct FrameSegment {
  double s0 = 0.0;
  double s1 = 0.0;
  std::function<Mat3(double)> rotation;
  std::function<Mat3(double)> rotation_derivative;
  std::function<Vec3(double)> position;
  bool constant_generator = false;
  Mat3 generator = Mat3::Zero();

  // R(s) = R0 exp((s - s0) A), y(s) = y0 + R0 int_0^{s-s0} exp(tA) e1 dt.
  static FrameSegment constant(double s0, double s1, const Mat3& R0, const Vec3& y0, const Mat3& A);
};

struct FrameJump {
  int segment = 0;  // jump between segment and segment + 1
  double sigma = 0.0;
  Vec3 du = Vec3::Zero();              // y(sigma+) - y(sigma-)
  Mat3 rel_rotation = Mat3::Identity();  // R(sigma-)^T R(sigma+)
  Mat3 left_rotation = Mat3::Identity();
  bool trivial() const;
};

struct FrameCurve {
  std::vector<FrameSegment> segments;
  double length() const { return segments.empty() ? 0.0 : segments.back().s1; }
  int segment_at(double s) const;  // right-continuous
  Mat3 rotation(double s) const;
  Vec3 position(double s) const;
  std::vector<FrameJump> jumps() const;  // every interior breakpoint
};

struct SegmentSpec {
  enum class Kind { Straight, Arc, Helix };
  Kind kind = Kind::Straight;
  double length = 1.0;
  double kappa = 0.0;
  double tau = 0.0;
  int plane = 2;  // arc bends in the (e1, e_plane) plane
};

struct JumpSpec {
  double sigma = 0.0;
  Vec3 u = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
};

Mat3 segment_generator(const SegmentSpec& spec);
FrameCurve build_frame_curve(const std::vector<SegmentSpec>& segments, const std::vector<JumpSpec>& jumps,
                             const Mat3& R0 = Mat3::Identity(), const Vec3& y0 = Vec3::Zero());

// Throws InadmissibleFrame when R leaves SO(3) by more than tol at sample points.
void check_admissible(const FrameCurve& fc, double tol = 1e-8);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

double elastic_energy_of_frame(const FrameCurve& fc, const CrossSection& cs, const QuadraticFormTable& Q,
                               int quadrature_points = 5);
// Same integral with a precomputed q3rel matrix.
double elastic_energy_of_frame(const FrameCurve& fc, const Mat3& q3rel_K, int quadrature_points = 5);

}  // namespace nanorod
