#include "../support.hpp"

#include "nanorod/crack.hpp"
#include "nanorod/errors.hpp"

#include <doctest.h>

using namespace nanorod;
using testing_support::oracle;

namespace {

CrackProblem tension(std::vector<ScheduleEntry> schedule = {{0.5, 16}}) {
  CrackProblem p;
  p.u = Vec3(0.5, 0.0, 0.0);
  p.cs = testing_support::unit_square();
  p.schedule = std::move(schedule);
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidParameters;
}

}  // namespace

TEST_SUITE("crack") {
  TEST_CASE("clean break energy for every schedule entry") {
    CrackProblem p = tension({{0.5, 16}, {0.25, 64}, {0.125, 256}});
    for (const ScheduleEntry& e : p.schedule)
      CHECK(crack_energy(p, clean_break_config(p, e)) ==
            doctest::Approx(oracle()["clean_break"]["unit_k16"].get<double>()).epsilon(1e-12));
  }

  TEST_CASE("clean break with no jump is stress free") {
    CrackProblem p = tension();
    p.u.setZero();
    CHECK(std::abs(crack_energy(p, clean_break_config(p, {0.5, 16}))) <= 1e-14);
  }

  TEST_CASE("tiny jumps would interpenetrate") {
    CrackProblem p = tension({{0.5, 100}});
    p.u = Vec3(1e-9, 0.0, 0.0);
    CHECK(code_of([&] { clean_break_config(p, {0.5, 100}); }) == ErrorCode::Interpenetration);
  }

  TEST_CASE("problem validation") {
    CrackProblem p = tension({{1.5, 16}});
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParameters);
    p.schedule = {{0.25, 16}};
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParameters);
    p.schedule = {{0.5, 16}};
    p.R_rel = Vec3(-1.0, 1.0, 1.0).asDiagonal();
    CHECK(code_of([&] { validate(p); }) == ErrorCode::NonRotation);
  }

  TEST_CASE("boundary zones") {
    CrackProblem p = tension();
    auto lat = crack_lattice(p, {0.5, 16});
    CHECK(lat->layers() == 16);
    int frozen = 0;
    for (int a = 0; a < lat->num_atoms(); ++a) frozen += is_boundary_atom(p, *lat, a);
    // |hatted x1| >= 6 out of -8..8: layers -8..-6 and 6..8.
    CHECK(frozen == 6 * 4);
  }

  TEST_CASE("kink construction") {
    CrackProblem p;
    p.cs = testing_support::unit_square();
    p.R_rel = rotation_from_axis_angle(Vec3::UnitY(), M_PI / 2);
    KinkResult k90 = kink_config(p, {0.5, 16});
    CHECK(k90.energy <= 3.6 - 0.3 + 1e-9);
    CHECK(k90.t0 >= 0.0);
    CHECK(k90.t0 <= 1.0);
    p.R_rel = rotation_from_axis_angle(Vec3::UnitY(), 5.0 * M_PI / 180.0);
    CHECK(kink_config(p, {0.5, 16}).energy < 3.6);
    p.R_rel = Mat3::Identity();
    CHECK(code_of([&] { kink_config(p, {0.5, 16}); }) == ErrorCode::InvalidParameters);
  }

  TEST_CASE("explicit crack energy") {
    Vec3 u(0.5, 0.0, 0.0);
    CHECK(phi_explicit_masspring(u, testing_support::trunc_model(), testing_support::unit_square()) ==
          doctest::Approx(oracle()["phi_explicit"]["unit_omega0.3"].get<double>()).epsilon(1e-14));
    CHECK(phi_explicit_masspring(u, testing_support::trunc_model(1.0), testing_support::block2x2()) ==
          doctest::Approx(oracle()["phi_explicit"]["block_omega1"].get<double>()).epsilon(1e-14));
    CHECK(code_of([&] {
            phi_explicit_masspring(Vec3::Zero(), testing_support::trunc_model(), testing_support::unit_square());
          }) == ErrorCode::ModelNotApplicable);
    CellEnergyModel sm = CellEnergyModel::simplified_min({1.0, 0.3});
    CHECK(code_of([&] { phi_explicit_masspring(u, sm, testing_support::unit_square()); }) ==
          ErrorCode::ModelNotMassSpring);
  }

  TEST_CASE("explicit value matches a direct lattice sum on a larger section") {
    CrackProblem p = tension();
    p.cs = testing_support::block2x2();
    p.model = testing_support::trunc_model(1.0);
    CHECK(crack_energy(p, clean_break_config(p, {0.5, 16})) ==
          doctest::Approx(oracle()["clean_break"]["block_k16_plateau1"].get<double>()).epsilon(1e-12));
  }

  TEST_CASE("numeric crack energy under tension") {
    CrackProblem p = tension();
    PhiOptions o;
    o.starts = 3;
    CrackSolution s = phi_numeric(p, o);
    REQUIRE(s.entries.size() == 1);
    CHECK(s.estimate == doctest::Approx(3.6).epsilon(1e-9));
    CHECK(s.entries[0].clean_break_dominant);
    CHECK(s.entries[0].boundary_exact);
    CHECK(phi_report_json(p, s).find("\"estimate\"") != std::string::npos);
  }

  TEST_CASE("no jump, no crack energy") {
    CrackProblem p = tension();
    p.u.setZero();
    PhiOptions o;
    o.starts = 2;
    CHECK(std::abs(phi_numeric(p, o).estimate) <= 1e-12);
  }

  TEST_CASE("numeric crack energy needs a pair model") {
    CrackProblem p = tension();
    p.model = CellEnergyModel::simplified_min({1.0, 0.3});
    CHECK(code_of([&] { phi_numeric(p); }) == ErrorCode::ModelNotPairwise);
  }

  TEST_CASE("components") {
    CrackProblem p = tension();
    auto lat = crack_lattice(p, {0.5, 16});
    Deformation id = identity_deformation(lat);
    CHECK(component_decomposition(id, 2.0 / 16).size() == 1);
    auto two = component_decomposition(clean_break_config(p, {0.5, 16}), 2.0 / 16);
    REQUIRE(two.size() == 2);
    for (int a : two[0]) CHECK(lat->atom_layer(a) <= 8);
    Deformation three = id;
    for (int a = 0; a < lat->num_atoms(); ++a) {
      int j = lat->atom_layer(a);
      if (j > 4) three.positions(0, a) += 0.5;
      if (j > 11) three.positions(0, a) += 0.5;
    }
    CHECK(component_decomposition(three, 2.0 / 16).size() == 3);
  }
}
