#include "nanorod/elastic_limit.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace nanorod {

double quadratic_value(const Mat24& Q, const Mat38& M) {
  Eigen::Map<const Eigen::Matrix<double, 24, 1>> v(M.data());
  return v.dot(Q * v);
}

const Mat24& QuadraticFormTable::q3() const {
  for (std::size_t i = 0; i < forms.size(); ++i)
    if (interior[i]) return forms[i];
  throw Error(ErrorCode::InvalidParameters, "quadratic form table has no interior midpoint");
}

Mat24 finite_difference_hessian(const std::function<double(const Mat38&)>& f, double h) {
  const Mat38& id = reference_cell();
  auto eval = [&](int i, double si, int j, double sj) {
    Mat38 y = id;
    y.data()[i] += si;
    y.data()[j] += sj;
    return f(y);
  };
  auto second = [&](double step) {
    Mat24 D;
    for (int i = 0; i < 24; ++i)
      for (int j = i; j < 24; ++j) {
        double v = (eval(i, step, j, step) - eval(i, step, j, -step) - eval(i, -step, j, step) +
                    eval(i, -step, j, -step)) /
                   (4.0 * step * step);
        D(i, j) = D(j, i) = v;
      }
    return D;
  };
  Mat24 d1 = second(h);
  Mat24 d2 = second(0.5 * h);
  double scale = std::max(1.0, d2.cwiseAbs().maxCoeff());
  if ((d1 - d2).cwiseAbs().maxCoeff() > 1e-3 * scale || !d1.allFinite())
    throw Error(ErrorCode::NotTwiceDifferentiable, "finite-difference Hessian estimates disagree at the reference cell");
  return (4.0 * d2 - d1) / 3.0;
}

namespace {

std::uint8_t inplane_mask(const CrossSection& cs, IPoint m) {
  std::uint8_t mask = 0;
  for (int c = 0; c < 8; ++c) {
    const auto& off = corner_offsets()[c];
    if (cs.corner_index({m.a + off[1], m.b + off[2]}) >= 0) mask |= static_cast<std::uint8_t>(1u << c);
  }
  return mask;
}

// Orthonormal basis of translations and infinitesimal rotations of the cell.
Eigen::Matrix<double, 24, 6> rigid_modes() {
  Eigen::Matrix<double, 24, 6> U;
  for (int r = 0; r < 3; ++r) {
    Mat38 t = Mat38::Zero();
    t.row(r).setOnes();
    U.col(r) = Eigen::Map<Eigen::Matrix<double, 24, 1>>(t.data());
    Mat38 w = skew(Vec3::Unit(r)) * reference_cell();
    U.col(3 + r) = Eigen::Map<Eigen::Matrix<double, 24, 1>>(w.data());
  }
  Eigen::HouseholderQR<Eigen::Matrix<double, 24, 6>> qr(U);
  return qr.householderQ() * Eigen::Matrix<double, 24, 6>::Identity();
}

}  // namespace

QuadraticFormTable hessian_forms(const CellEnergyModel& model, const CrossSection& cs, HessianMethod method) {
  QuadraticFormTable t;
  t.finite_difference = method == HessianMethod::FiniteDifference;
  t.midpoints = cs.ext_midpoints();
  const Eigen::Matrix<double, 24, 6> U = rigid_modes();
  for (IPoint m : t.midpoints) {
    bool interior = cs.has_midpoint(m);
    std::uint8_t mask = interior ? kAllCorners : inplane_mask(cs, m);
    Mat24 Q;
    if (t.finite_difference)
      Q = finite_difference_hessian([&](const Mat38& y) { return cell_core_energy(model, mask, y); });
    else
      Q = cell_hessian_at_reference(model, mask);
    double qn = std::max(Q.norm(), 1e-300);
    double res = (Q * U).colwise().norm().maxCoeff() / qn;
    t.kernel_residual = std::max(t.kernel_residual, res);
    if (res > 1e-9)
      throw Error(ErrorCode::KernelViolation, "form does not vanish on rigid modes (relative residual " +
                                                  std::to_string(res) + ")");
    t.forms.push_back(Q);
    t.interior.push_back(interior);
  }
  // Spectrum of Q_3 on the orthogonal complement of the rigid modes.
  Eigen::Matrix<double, 24, 24> full = Eigen::HouseholderQR<Eigen::Matrix<double, 24, 6>>(U).householderQ();
  Eigen::Matrix<double, 24, 18> C = full.rightCols<18>();
  Eigen::Matrix<double, 18, 18> R = C.transpose() * t.q3() * C;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 18, 18>> es(R);
  t.complement_spectrum = es.eigenvalues();
  if (!(t.complement_spectrum(0) > 1e-12 * t.complement_spectrum(17)))
    throw Error(ErrorCode::KernelViolation, "Q_3 is not positive definite off the rigid modes");
  return t;
}

namespace {

struct CellLayout {
  std::vector<std::array<int, 4>> corners;  // ext-corner indices of the four in-plane corners
  int n_ext = 0;
};

CellLayout layout(const CrossSection& cs, const QuadraticFormTable& Q) {
  std::map<IPoint, int> idx;
  for (std::size_t i = 0; i < cs.ext_corners().size(); ++i) idx[cs.ext_corners()[i]] = static_cast<int>(i);
  CellLayout L;
  L.n_ext = static_cast<int>(cs.ext_corners().size());
  for (IPoint m : Q.midpoints) {
    std::array<int, 4> c{};
    for (int l = 0; l < 4; ++l) {
      const auto& off = corner_offsets()[l];
      c[l] = idx.at({m.a + off[1], m.b + off[2]});
    }
    L.corners.push_back(c);
  }
  return L;
}

// Sign of the axial component of z^c, times 1.
double axial_sign(int c) { return 2.0 * reference_cell()(0, c); }

Mat38 fixed_part(const Mat3& A, const Vec3& g, IPoint m) {
  const Mat38& z = reference_cell();
  Vec3 v = A * Vec3(0.0, m.a + 0.5, m.b + 0.5) + g;
  Mat38 M;
  for (int c = 0; c < 8; ++c) M.col(c) = 0.5 * axial_sign(c) * v + z(0, c) * (A * Vec3(0.0, z(1, c), z(2, c)));
  return M;
}

Mat38 corrector_part(const Eigen::Matrix3Xd& alpha, const std::array<int, 4>& corners) {
  Vec3 mean = Vec3::Zero();
  for (int l = 0; l < 4; ++l) mean += alpha.col(corners[l]);
  mean /= 4.0;
  Mat38 M;
  for (int c = 0; c < 8; ++c) M.col(c) = alpha.col(corners[c % 4]) - mean;
  return M;
}

void check_skew(const Mat3& A) {
  if (!A.allFinite() || (A + A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NonSkewInput, "generator is not skew-symmetric");
}

}  // namespace

Mat38 q3rel_cell_matrix(const Mat3& A, const Vec3& g, const Eigen::Matrix3Xd& alpha, const CrossSection& cs,
                        IPoint m) {
  std::array<int, 4> corners{};
  for (int l = 0; l < 4; ++l) {
    const auto& off = corner_offsets()[l];
    IPoint p{m.a + off[1], m.b + off[2]};
    auto it = std::lower_bound(cs.ext_corners().begin(), cs.ext_corners().end(), p);
    if (it == cs.ext_corners().end() || *it != p) throw Error(ErrorCode::InvalidParameters, "midpoint outside the extended set");
    corners[l] = static_cast<int>(it - cs.ext_corners().begin());
  }
  return fixed_part(A, g, m) + corrector_part(alpha, corners);
}

Q3relResult q3rel_solve(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q) {
  check_skew(A);
  CellLayout L = layout(cs, Q);
  const int nz = 3 * L.n_ext + 3;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nz);
  for (std::size_t i = 0; i < Q.midpoints.size(); ++i) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(24, nz);
    for (int c = 0; c < 8; ++c)
      for (int r = 0; r < 3; ++r) {
        B(3 * c + r, 3 * L.n_ext + r) += 0.5 * axial_sign(c);
        for (int l = 0; l < 4; ++l) B(3 * c + r, 3 * L.corners[i][l] + r) += (c % 4 == l ? 1.0 : 0.0) - 0.25;
      }
    Mat38 M0 = fixed_part(A, Vec3::Zero(), Q.midpoints[i]);
    Eigen::Map<const Eigen::Matrix<double, 24, 1>> m0(M0.data());
    Eigen::MatrixXd QB = Q.forms[i] * B;
    H.noalias() += B.transpose() * QB;
    b.noalias() += QB.transpose() * m0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::VectorXd& lam = es.eigenvalues();
  double tol = 1e-11 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd coef = es.eigenvectors().transpose() * b;
  for (int i = 0; i < nz; ++i) coef(i) = lam(i) > tol ? coef(i) / lam(i) : 0.0;
  Eigen::VectorXd z = -(es.eigenvectors() * coef);

  Q3relResult res;
  res.alpha = Eigen::Map<Eigen::Matrix3Xd>(z.data(), 3, L.n_ext);
  res.g = z.tail<3>();
  res.stationarity = (H * z + b).norm();
  double v = 0.0;
  for (std::size_t i = 0; i < Q.midpoints.size(); ++i)
    v += quadratic_value(Q.forms[i], fixed_part(A, res.g, Q.midpoints[i]) + corrector_part(res.alpha, L.corners[i]));
  res.value = std::max(v, 0.0);
  return res;
}

double q3rel(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q) {
  return q3rel_solve(A, cs, Q).value;
}

double q3rel_oracle(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q, std::uint64_t seed,
                    int starts) {
  check_skew(A);
  CellLayout L = layout(cs, Q);
  const int n = L.n_ext;

  // Objective and gradient by direct summation over cells.
  auto eval = [&](const Mat3& AA, const Eigen::Matrix3Xd& alpha, const Vec3& g, Eigen::Matrix3Xd* ga, Vec3* gg) {
    double f = 0.0;
    if (ga) ga->setZero(3, n);
    if (gg) gg->setZero();
    for (std::size_t i = 0; i < Q.midpoints.size(); ++i) {
      Mat38 M = fixed_part(AA, g, Q.midpoints[i]) + corrector_part(alpha, L.corners[i]);
      Eigen::Map<const Eigen::Matrix<double, 24, 1>> v(M.data());
      Eigen::Matrix<double, 24, 1> qv = Q.forms[i] * v;
      f += v.dot(qv);
      if (!ga) continue;
      Mat38 W = 2.0 * Eigen::Map<const Mat38>(qv.data());
      Vec3 total = W.rowwise().sum();
      for (int l = 0; l < 4; ++l) ga->col(L.corners[i][l]) += W.col(l) + W.col(l + 4) - 0.25 * total;
      for (int c = 0; c < 8; ++c) *gg += 0.5 * axial_sign(c) * W.col(c);
    }
    return f;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Eigen::Matrix3Xd alpha(3, n);
    Vec3 g;
    for (int i = 0; i < alpha.size(); ++i) alpha.data()[i] = nd(rng);
    for (int r = 0; r < 3; ++r) g(r) = nd(rng);
    Eigen::Matrix3Xd ga(3, n), ga_prev(3, n), alpha_prev;
    Vec3 gg, gg_prev, g_prev;
    double f = eval(A, alpha, g, &ga, &gg);
    double g0 = std::sqrt(ga.squaredNorm() + gg.squaredNorm());
    for (int it = 0; it < 200000; ++it) {
      double gn2 = ga.squaredNorm() + gg.squaredNorm();
      if (std::sqrt(gn2) <= 1e-11 * std::max(g0, 1e-300)) break;
      double step;
      if (it == 0 || it % 50 == 0) {
        // Exact line search along -grad: the quadratic part is the objective
        // at A = 0 evaluated on the direction.
        double curv = eval(Mat3::Zero(), ga, gg, nullptr, nullptr);
        step = curv > 0 ? 0.5 * gn2 / curv : 1e-3;
      } else {
        // Barzilai-Borwein step.
        double sy = (alpha - alpha_prev).cwiseProduct(ga - ga_prev).sum() + (g - g_prev).dot(gg - gg_prev);
        double ss = (alpha - alpha_prev).squaredNorm() + (g - g_prev).squaredNorm();
        step = sy > 0 ? ss / sy : 1e-3;
      }
      alpha_prev = alpha;
      g_prev = g;
      ga_prev = ga;
      gg_prev = gg;
      alpha -= step * ga;
      g -= step * gg;
      f = eval(A, alpha, g, &ga, &gg);
    }
    best = std::min(best, f);
  }
  return std::max(best, 0.0);
}

Mat3 q3rel_matrix(const CrossSection& cs, const QuadraticFormTable& Q) {
  Mat3 K;
  Vec3 d;
  for (int i = 0; i < 3; ++i) d(i) = q3rel(skew(Vec3::Unit(i)), cs, Q);
  for (int i = 0; i < 3; ++i) {
    K(i, i) = d(i);
    for (int j = i + 1; j < 3; ++j) {
      double v = q3rel(skew(Vec3::Unit(i) + Vec3::Unit(j)), cs, Q);
      K(i, j) = K(j, i) = 0.5 * (v - d(i) - d(j));
    }
  }
  return K;
}

std::string model_hash(const CellEnergyModel& model, const CrossSection& cs) {
  std::ostringstream os;
  os << model.describe() << "|";
  for (IPoint m : cs.midpoints()) os << m.a << "," << m.b << ";";
  std::ostringstream hex;
  hex << std::hex << std::hash<std::string>{}(os.str());
  return hex.str();
}

namespace {

std::array<long long, 9> cache_key(const Mat3& A) {
  std::array<long long, 9> key{};
  for (int i = 0; i < 9; ++i) key[i] = std::llround(A.data()[i] * 1e12);
  return key;
}

}  // namespace

double Q3relCache::get(const Mat3& A, const CrossSection& cs, const QuadraticFormTable& Q) {
  auto key = cache_key(A);
  auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  double v = q3rel(A, cs, Q);
  values_[key] = v;
  return v;
}

void Q3relCache::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) return;
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, "cannot parse cache " + path + ": " + e.what());
  }
  if (j.value("model_hash", std::string()) != hash_) return;
  for (const auto& e : j.at("entries")) {
    std::array<long long, 9> key{};
    for (int i = 0; i < 9; ++i) key[i] = e.at("key").at(i).get<long long>();
    values_[key] = e.at("value").get<double>();
  }
}

void Q3relCache::save(const std::string& path) const {
  nlohmann::json j;
  j["model_hash"] = hash_;
  j["entries"] = nlohmann::json::array();
  for (const auto& [key, value] : values_) j["entries"].push_back({{"key", key}, {"value", value}});
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write cache " + path);
  os << j.dump(1) << "\n";
}

}  // namespace nanorod
