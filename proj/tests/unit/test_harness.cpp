#include "../support.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nanorod;
using testing_support::oracle;

namespace {

const char* kBend = R"({
  "frame": {"segments": [{"kind": "arc", "length": 2, "kappa": 0.2}]},
  "k_list": [8, 16, 32],
  "correctors": "optimal"
})";

const char* kCrack = R"({
  "frame": {
    "segments": [{"kind": "straight", "length": 1}, {"kind": "straight", "length": 1}],
    "jumps": [{"sigma": 1, "u": [0.5, 0, 0]}]
  },
  "k_list": [16, 32, 64]
})";

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  FAIL("no ConfigError");
  return "";
}

std::string strip_wall_ms(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::vector<StudyRow> three_rows() {
  return {{8, 1.5, 0.1, 1.4, 0.01, 0, 1.0}, {16, 1.25, 0.1, 1.4, 0.001, 1, 2.0}, {32, 1.0 / 3.0, 0.1, 1.4, 1e-20, 2, 3.5}};
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("configuration errors name the field and line") {
    std::string e = config_error("{\n  \"cross_section\": [[0, 0], [4, 4]]\n}");
    CHECK(e.find("cross_section") != std::string::npos);
    CHECK(e.find("cfg.json:2") != std::string::npos);
    CHECK(config_error("{\"k_list\": [8, 8]}").find("k_list") != std::string::npos);
    CHECK(config_error("{\"kappa\": 1}").find("unknown key") != std::string::npos);
    CHECK(config_error("{\"frame\": {\"segments\": [{\"kind\": \"spiral\"}]}}").find("frame.segments[0].kind") !=
          std::string::npos);
    CHECK(config_error("{\"model\": {\"pair\": {\"type\": \"ljts\", \"depth\": -1}}}").find("model.pair.depth") !=
          std::string::npos);
    CHECK(config_error("{\n\n  \"seed\": 1,\n}").find("cfg.json:4") != std::string::npos);
  }

  TEST_CASE("configuration defaults and overrides") {
    StudyConfig c = parse_config(R"({"model": {"nn": {"type": "ljts", "depth": 2}, "nnn": {"type": "trunc_harmonic"}},
                                    "cross_section": [[0,0],[1,0]], "seed": 9, "threads": 2,
                                    "phi": {"schedule": [{"r": 0.5, "k": 32}], "u": [0.5, 0, 0],
                                            "rotation": {"axis": [0, 1, 0], "angle": 1.5707963267948966}}})");
    CHECK(c.cs.midpoints().size() == 2);
    CHECK(c.seed == 9);
    CHECK(c.phi_options.seed == 9);
    CHECK(c.threads == 2);
    REQUIRE(c.phi_schedule.size() == 1);
    CHECK(c.phi_schedule[0].k == 32);
    CHECK(c.phi_rotation(0, 2) == doctest::Approx(1.0));
    CHECK(c.model.describe() != testing_support::trunc_model().describe());
    CHECK(frame_of(c).length() == doctest::Approx(1.0));
  }

  TEST_CASE("limit functional") {
    CrossSection cs = testing_support::unit_square();
    CellEnergyModel m = testing_support::trunc_model();
    QuadraticFormTable Q = hessian_forms(m, cs);
    PhiEvaluator phi(m, cs, {{0.5, 16}}, PhiOptions{});
    LimitValue flat = evaluate_limit_functional(build_frame_curve({{SegmentSpec::Kind::Straight, 2.0}}, {}), cs, Q, phi);
    CHECK(flat.total == 0.0);

    FrameCurve jump = build_frame_curve({{SegmentSpec::Kind::Straight, 1.0}, {SegmentSpec::Kind::Straight, 1.0}},
                                        {JumpSpec{1.0, Vec3(0.5, 0.0, 0.0)}});
    LimitValue one = evaluate_limit_functional(jump, cs, Q, phi);
    CHECK(one.total == doctest::Approx(3.6).epsilon(1e-12));
    REQUIRE(one.jumps.size() == 1);
    CHECK(one.jumps[0].method == "explicit");

    FrameCurve arc = build_frame_curve({{SegmentSpec::Kind::Arc, 1.0, 0.2}, {SegmentSpec::Kind::Arc, 1.0, 0.2}},
                                       {JumpSpec{1.0, Vec3(0.5, 0.0, 0.0)}});
    LimitValue both = evaluate_limit_functional(arc, cs, Q, phi);
    CHECK(both.total == doctest::Approx(oracle()["arc_elastic"].get<double>() + 3.6).epsilon(1e-9));
    // The arc rotates the jump into a new local frame, so it is a second explicit evaluation.
    CHECK(phi.explicit_calls() == 2);
    CHECK(phi.numeric_calls() == 0);

    FrameSegment broken = FrameSegment::constant(0.0, 1.0, 2.0 * Mat3::Identity(), Vec3::Zero(), Mat3::Zero());
    LimitValue inf = evaluate_limit_functional(FrameCurve{{broken}}, cs, Q, phi);
    CHECK_FALSE(inf.admissible);
    CHECK(std::isinf(inf.total));
    CHECK_FALSE(inf.reason.empty());
  }

  TEST_CASE("numeric crack energies are memoized") {
    CrossSection cs = testing_support::unit_square();
    PhiOptions o;
    o.starts = 2;
    PhiEvaluator phi(testing_support::trunc_model(), cs, {{0.5, 16}}, o);
    std::string method;
    double a = phi(Vec3::Zero(), Mat3::Identity(), &method);
    double b = phi(Vec3::Zero(), Mat3::Identity());
    CHECK(method == "numeric");
    CHECK(a == b);
    CHECK(phi.numeric_calls() == 1);
  }

  TEST_CASE("bend study converges") {
    StudyResult r = run_convergence_study(parse_config(kBend));
    REQUIRE(r.rows.size() == 3);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].rel_err < r.rows[i - 1].rel_err);
    for (const StudyRow& row : r.rows) CHECK(row.broken_slices == 0);
  }

  TEST_CASE("crack study is exact") {
    StudyResult r = run_convergence_study(parse_config(kCrack));
    for (const StudyRow& row : r.rows) {
      CHECK(row.kE == doctest::Approx(3.6).epsilon(1e-9));
      CHECK(row.E_lim_crack == doctest::Approx(3.6).epsilon(1e-12));
      CHECK(row.broken_slices == 1);
    }
  }

  TEST_CASE("studies are reproducible") {
    StudyConfig c = parse_config(kBend);
    std::string a = format_report(run_convergence_study(c).rows, ReportFormat::Csv);
    c.threads = 3;
    std::string b = format_report(run_convergence_study(c).rows, ReportFormat::Csv);
    CHECK(strip_wall_ms(a) == strip_wall_ms(b));
  }

  TEST_CASE("reports") {
    std::string csv = format_report(three_rows(), ReportFormat::Csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind("k,kE,E_lim_elastic,E_lim_crack,rel_err,broken_slices,wall_ms\n", 0) == 0);
    std::vector<StudyRow> back = parse_report_json(format_report(three_rows(), ReportFormat::Json));
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].k == three_rows()[i].k);
      CHECK(back[i].kE == three_rows()[i].kE);
      CHECK(back[i].rel_err == three_rows()[i].rel_err);
      CHECK(back[i].broken_slices == three_rows()[i].broken_slices);
    }
    CHECK_THROWS_AS(format_report({}, ReportFormat::Csv), Error);
    CHECK(parse_report_format("json") == ReportFormat::Json);
    CHECK_THROWS_AS(parse_report_format("xml"), Error);
  }

  TEST_CASE("report files") {
    auto path = std::filesystem::temp_directory_path() / "nanorod_report_test.csv";
    emit_report(three_rows(), ReportFormat::Csv, path.string());
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    CHECK(ss.str() == format_report(three_rows(), ReportFormat::Csv));
    std::filesystem::remove(path);
    try {
      emit_report(three_rows(), ReportFormat::Csv, "/nonexistent-dir/report.csv");
      FAIL("expected IoError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoError);
    }
  }
}
