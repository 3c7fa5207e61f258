#include "../support.hpp"

#include "nanorod/crack.hpp"
#include "nanorod/energy.hpp"
#include "nanorod/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace nanorod;
using testing_support::oracle;

TEST_SUITE("energy") {
  TEST_CASE("discrete gradient") {
    CHECK((discrete_gradient(reference_cell()) - reference_cell()).norm() == doctest::Approx(0.0));
    Mat38 shifted = reference_cell().colwise() + Vec3(1.0, -2.0, 3.0);
    CHECK(std::abs((discrete_gradient(shifted) - reference_cell()).norm()) <= 1e-14);
    std::mt19937_64 rng(1);
    Mat38 y = Mat38::Random();
    CHECK(std::abs(discrete_gradient(y).rowwise().sum().norm()) <= 1e-14);
  }

  TEST_CASE("distance to the rotations") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i)
      CHECK(std::abs(dist_so3bar(testing_support::random_rotation(rng) * reference_cell())) <= 1e-12);
    CHECK(dist_so3bar(2.0 * reference_cell()) == doctest::Approx(oracle()["dist_2id"].get<double>()).epsilon(1e-12));
    Mat3 refl = Vec3(-1.0, 1.0, 1.0).asDiagonal();
    CHECK(dist_so3bar(refl * reference_cell()) > 0.5);
  }

  TEST_CASE("identity and rigid motions have zero energy") {
    auto lat = std::make_shared<const RodLattice>(build_rod_lattice(testing_support::block2x2(), 1.0, 8));
    std::mt19937_64 rng(3);
    Deformation id = identity_deformation(lat);
    CellEnergyModel m = testing_support::ljts_model();
    CHECK(std::abs(total_energy(m, id).energy) <= 1e-14);
    Deformation moved = id;
    moved.positions = (testing_support::random_rotation(rng) * id.positions).colwise() + Vec3(1.0, 2.0, 3.0);
    CHECK(std::abs(total_energy(m, moved).energy) <= 1e-12);
    CHECK(std::abs(pair_sum_energy(m, id)) <= 1e-14);
    CHECK(std::abs(energy_gradient(m, id).norm()) <= 1e-10);
    SliceEnergyProfile prof = slice_profile(m, id);
    CHECK(std::abs(prof.total_mass()) <= 1e-14);
    CHECK(prof.broken_count() == 0);
  }

  TEST_CASE("clean break energy and its slice") {
    CrackProblem p;
    p.u = Vec3(0.5, 0.0, 0.0);
    p.cs = testing_support::unit_square();
    ScheduleEntry e{0.5, 16};
    Deformation def = clean_break_config(p, e);
    EnergyResult r = total_energy(p.model, def);
    const double expected = oracle()["clean_break"]["unit_k16"].get<double>();
    CHECK(16 * r.energy == doctest::Approx(expected).epsilon(1e-12));
    CHECK(16 * pair_sum_energy(p.model, def) == doctest::Approx(expected).epsilon(1e-12));
    SliceEnergyProfile prof = slice_profile(p.model, def);
    REQUIRE(prof.broken_count() == 1);
    for (std::size_t s = 0; s < prof.mass.size(); ++s)
      if (prof.broken[s]) CHECK(prof.mass[s] == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("one stretched bond is counted once") {
    // Two layers, unit square: pull one atom of the top layer far along e1.
    auto lat = std::make_shared<const RodLattice>(build_rod_lattice(testing_support::unit_square(), 1.0, 1));
    Deformation d = identity_deformation(lat);
    CellEnergyModel m = CellEnergyModel::pair(PairPotentialModel{TruncHarmonic{1.0, 0.3, 0.3}}, OrientationPenalty{0.0, 0.1});
    int a = lat->atom_id(1, {0, 0});
    d.positions.col(a) += Vec3(100.0, 0.0, 0.0);
    // Its bonds: one axial and two in-plane nearest, three face diagonals.
    CHECK(pair_sum_energy(m, d) == doctest::Approx(6 * 0.3));
    CHECK(total_energy(m, d).energy == doctest::Approx(6 * 0.3));
  }

  TEST_CASE("decomposition identity on random deformations") {
    std::mt19937_64 rng(4);
    for (const CellEnergyModel& m : {testing_support::ljts_model(), testing_support::trunc_model()})
      for (int k : {4, 8}) {
        auto lat = std::make_shared<const RodLattice>(build_rod_lattice(testing_support::block2x2(), 2.0, k));
        Deformation d = testing_support::jittered(lat, rng, 0.3 / k);
        double e = total_energy(m, d).energy;
        CHECK(std::abs(e - pair_sum_energy(m, d)) <= 1e-10 * (1.0 + e));
      }
  }

  TEST_CASE("gradient matches finite differences") {
    std::mt19937_64 rng(6);
    const int k = 8;
    auto lat = std::make_shared<const RodLattice>(build_rod_lattice(testing_support::block2x2(), 1.0, k));
    CellEnergyModel m = testing_support::trunc_model();
    Deformation d = testing_support::jittered(lat, rng, 0.02 * elastic_threshold(m, k).c_frac / k);
    d.positions = testing_support::random_rotation(rng) * d.positions;
    Eigen::Matrix3Xd g = energy_gradient(m, d);
    const double h = 1e-6;
    double worst = 0.0;
    for (int a = 0; a < d.positions.cols(); ++a)
      for (int r = 0; r < 3; ++r) {
        Deformation p = d, q = d;
        p.positions(r, a) += h;
        q.positions(r, a) -= h;
        double fd = (total_energy(m, p).energy - total_energy(m, q).energy) / (2 * h);
        worst = std::max(worst, std::abs(fd - g(r, a)));
      }
    CHECK(worst <= 1e-6 * std::max(g.cwiseAbs().maxCoeff(), 1e-12));
  }

  TEST_CASE("plateau bonds carry no force") {
    CrackProblem p;
    p.u = Vec3(0.5, 0.0, 0.0);
    p.cs = testing_support::unit_square();
    Deformation def = clean_break_config(p, {0.5, 16});
    CHECK(std::abs(energy_gradient(p.model, def).cwiseAbs().maxCoeff()) <= 1e-12);
  }

  TEST_CASE("interpolation at atoms, cell midpoints and face centres") {
    std::mt19937_64 rng(7);
    const int k = 4;
    auto lat = std::make_shared<const RodLattice>(build_rod_lattice(testing_support::unit_square(), 1.0, k));
    Deformation d = testing_support::jittered(lat, rng, 0.05);
    int a = lat->atom_id(2, {1, 0});
    CHECK((interpolate_value(d, lat->reference_position(a)) - d.positions.col(a)).norm() ==
          doctest::Approx(0.0).scale(1e-12));
    int c = lat->find_cell({1, {0, 0}});
    Mat38 y = d.cell_positions(c) / k;  // hatted to physical
    Vec3 mid = Vec3(1.5, 0.5, 0.5) / k;
    CHECK(std::abs((interpolate_value(d, mid) - y.rowwise().mean()).norm()) <= 1e-12);
    // Face x2 = 1 of that cell: corners with z2 = +1/2.
    Vec3 face_mean = Vec3::Zero();
    for (int i = 0; i < 8; ++i)
      if (reference_cell()(1, i) > 0) face_mean += y.col(i) / 4.0;
    CHECK(std::abs((interpolate_value(d, Vec3(1.5, 1.0, 0.5) / k) - face_mean).norm()) <= 1e-12);
  }

  TEST_CASE("deformation files round-trip") {
    std::mt19937_64 rng(8);
    auto lat = std::make_shared<const RodLattice>(build_rod_lattice(testing_support::block2x2(), 1.0, 4));
    Deformation d = testing_support::jittered(lat, rng, 0.1);
    std::stringstream ss;
    write_deformation(ss, d);
    Deformation back = read_deformation(ss);
    CHECK(back.lattice->k() == 4);
    CHECK((back.positions - d.positions).norm() == 0.0);
    std::stringstream bad("nanorod-deformation 1\nL 1\nk 4\n");
    CHECK_THROWS_AS(read_deformation(bad), Error);
  }
}
