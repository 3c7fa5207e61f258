#include "../support.hpp"

#include "nanorod/elastic_limit.hpp"
#include "nanorod/errors.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace nanorod;
using testing_support::oracle;

namespace {

Mat38 unvec(const Eigen::Matrix<double, 24, 1>& v) { return Eigen::Map<const Mat38>(v.data()); }

Mat3 oracle_K() {
  Mat3 K;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K(i, j) = oracle()["q3rel_unit_K"][i][j].get<double>();
  return K;
}

}  // namespace

TEST_SUITE("elastic_limit") {
  TEST_CASE("Q3 kernel and positivity") {
    CrossSection cs = testing_support::unit_square();
    for (const CellEnergyModel& m : {testing_support::trunc_model(), testing_support::ljts_model()}) {
      QuadraticFormTable Q = hessian_forms(m, cs);
      const Mat24& q3 = Q.q3();
      std::mt19937_64 rng(1);
      for (int i = 0; i < 10; ++i) {
        Mat38 V = testing_support::random_vec(rng).replicate<1, 8>();
        CHECK(std::abs(quadratic_value(q3, V)) <= 1e-9);
        Mat38 S = skew(testing_support::random_vec(rng)) * reference_cell();
        CHECK(std::abs(quadratic_value(q3, S)) <= 1e-9);
      }
      CHECK(Q.kernel_residual <= 1e-9);
      REQUIRE(Q.complement_spectrum.size() == 18);
      CHECK(Q.complement_spectrum.minCoeff() > 1e-6);
    }
  }

  TEST_CASE("analytic Hessian matches finite differences") {
    CellEnergyModel m = testing_support::trunc_model();
    QuadraticFormTable a = hessian_forms(m, testing_support::unit_square());
    QuadraticFormTable f = hessian_forms(m, testing_support::unit_square(), HessianMethod::FiniteDifference);
    CHECK(f.finite_difference);
    CHECK((a.q3() - f.q3()).cwiseAbs().maxCoeff() <= 1e-7 * a.q3().cwiseAbs().maxCoeff());
  }

  TEST_CASE("kinks are not twice differentiable") {
    // Kink exactly at the reference cell, where M(0, 0) = -1/2.
    auto f = [](const Mat38& M) { return std::abs(M(0, 0) + 0.5); };
    try {
      finite_difference_hessian(f);
      FAIL("expected NotTwiceDifferentiable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotTwiceDifferentiable);
    }
  }

  TEST_CASE("Q3rel at zero and homogeneity") {
    CrossSection cs = testing_support::unit_square();
    QuadraticFormTable Q = hessian_forms(testing_support::trunc_model(), cs);
    Q3relResult z = q3rel_solve(Mat3::Zero(), cs, Q);
    CHECK(z.value == 0.0);
    CHECK(z.alpha.norm() == 0.0);
    CHECK(z.g.norm() == 0.0);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5; ++i) {
      Mat3 A = skew(testing_support::random_vec(rng));
      double v = q3rel(A, cs, Q);
      for (double t : {2.0, -1.0, 0.5}) CHECK(q3rel(t * A, cs, Q) == doctest::Approx(t * t * v).epsilon(1e-9));
    }
  }

  TEST_CASE("Q3rel agrees with the descent oracle and the numpy oracle") {
    CrossSection cs = testing_support::unit_square();
    QuadraticFormTable Q = hessian_forms(testing_support::trunc_model(), cs);
    Mat3 bend = skew(Vec3::UnitZ());
    CHECK(q3rel(bend, cs, Q) == doctest::Approx(q3rel_oracle(bend, cs, Q)).epsilon(1e-6));
    CHECK(q3rel_oracle(Mat3::Zero(), cs, Q) <= 1e-12);
    Mat3 A = skew(Vec3(0.3, -0.7, 0.2));
    CHECK(q3rel_oracle(A, cs, Q) == doctest::Approx(q3rel_oracle(-A, cs, Q)).epsilon(1e-6));
    Mat3 K = q3rel_matrix(cs, Q);
    CHECK((K - oracle_K()).cwiseAbs().maxCoeff() <= 1e-9);
    Q3relResult r = q3rel_solve(A, cs, Q);
    CHECK(r.stationarity <= 1e-9);
    CHECK(q3rel_cell_matrix(A, r.g, r.alpha, cs, {0, 0}).allFinite());
  }

  TEST_CASE("Q3rel rejects non-skew input") {
    CrossSection cs = testing_support::unit_square();
    QuadraticFormTable Q = hessian_forms(testing_support::trunc_model(), cs);
    try {
      q3rel(Mat3::Identity(), cs, Q);
      FAIL("expected NonSkewInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonSkewInput);
    }
  }

  TEST_CASE("cache stores values by model hash") {
    CrossSection cs = testing_support::unit_square();
    CellEnergyModel m = testing_support::trunc_model();
    QuadraticFormTable Q = hessian_forms(m, cs);
    Q3relCache cache(model_hash(m, cs));
    Mat3 A = skew(Vec3(0.1, 0.2, 0.3));
    double v = cache.get(A, cs, Q);
    cache.get(A, cs, Q);
    CHECK(cache.size() == 1);
    auto path = std::filesystem::temp_directory_path() / "nanorod_q3rel_cache_test.json";
    cache.save(path.string());
    Q3relCache same(model_hash(m, cs));
    same.load(path.string());
    CHECK(same.size() == 1);
    CHECK(same.get(A, cs, Q) == v);
    Q3relCache other(model_hash(testing_support::ljts_model(), cs));
    other.load(path.string());
    CHECK(other.size() == 0);
    std::filesystem::remove(path);
    CHECK(model_hash(m, cs) != model_hash(m, testing_support::block2x2()));
  }

  TEST_CASE("elastic energy of frames") {
    CrossSection cs = testing_support::unit_square();
    QuadraticFormTable Q = hessian_forms(testing_support::trunc_model(), cs);
    FrameCurve straight = build_frame_curve({SegmentSpec{SegmentSpec::Kind::Straight, 2.0}}, {});
    CHECK(elastic_energy_of_frame(straight, cs, Q) == 0.0);
    FrameCurve arc = build_frame_curve({SegmentSpec{SegmentSpec::Kind::Arc, 2.0, 0.2}}, {});
    CHECK(elastic_energy_of_frame(arc, cs, Q) == doctest::Approx(oracle()["arc_elastic"].get<double>()).epsilon(1e-9));
    CHECK(elastic_energy_of_frame(arc, cs, Q) == doctest::Approx(0.5 * 2.0 * q3rel(arc.segments[0].generator, cs, Q)));
    FrameCurve twist = build_frame_curve({SegmentSpec{SegmentSpec::Kind::Helix, 2.0, 0.0, 0.2}}, {});
    CHECK(elastic_energy_of_frame(twist, cs, Q) ==
          doctest::Approx(oracle()["twist_elastic"].get<double>()).epsilon(1e-9));
  }

  TEST_CASE("frames with jumps") {
    std::vector<SegmentSpec> segs{{SegmentSpec::Kind::Straight, 1.0}, {SegmentSpec::Kind::Arc, 1.0, 0.3}};
    FrameCurve fc = build_frame_curve(segs, {JumpSpec{1.0, Vec3(0.2, 0.0, 0.0), Vec3::UnitY(), 0.5}});
    std::vector<FrameJump> j = fc.jumps();
    REQUIRE(j.size() == 1);
    CHECK_FALSE(j[0].trivial());
    CHECK(std::abs((j[0].du - Vec3(0.2, 0.0, 0.0)).norm()) <= 1e-14);
    CHECK(is_rotation(j[0].rel_rotation));
    CHECK(fc.segment_at(1.0) == 1);
    CHECK_THROWS_AS(build_frame_curve(segs, {JumpSpec{0.7, Vec3::Zero()}}), Error);
  }

  TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(5, x, w);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 8);
    CHECK(s == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  }
}
