#pragma once

#include "nanorod/crack.hpp"
#include "nanorod/elastic_limit.hpp"
#include "nanorod/generators.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace nanorod {

// Parsed run configuration. See README.md for the JSON schema.
struct StudyConfig {
  CellEnergyModel model = CellEnergyModel::pair(PairPotentialModel{TruncHarmonic{}});
  std::vector<IPoint> midpoints{{0, 0}};
  CrossSection cs;
  std::vector<SegmentSpec> segments;
  std::vector<JumpSpec> jumps;
  std::vector<int> k_list;
  std::string correctors = "none";  // "none" or "optimal"
  double splice_radius = 0.0;       // <= 0: k^(-1/2)
  double c_e = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output;
  std::string format = "csv";

  // phi
  std::vector<ScheduleEntry> phi_schedule;
  PhiOptions phi_options;
  Vec3 phi_u = Vec3::Zero();
  Mat3 phi_rotation = Mat3::Identity();

  // qrel
  std::vector<Vec3> qrel_generators;  // axial vectors a, A = skew(a)

  // check
  std::vector<int> check_k_list{10, 20};
  long check_samples = 10000;

  // energy
  std::string deformation;
};

// Throws ConfigError naming the offending field and, when it can be located,
// its line in the source text.
StudyConfig parse_config(const std::string& text, const std::string& origin = "<config>");
StudyConfig parse_config_file(const std::string& path);

FrameCurve frame_of(const StudyConfig& cfg);

// Memoized crack energies with call counters.
class PhiEvaluator {
 public:
  PhiEvaluator(CellEnergyModel model, CrossSection cs, std::vector<ScheduleEntry> schedule, PhiOptions opts);
  // phi(u, R_rel) for u in the frame of the left segment.
  double operator()(const Vec3& u, const Mat3& R_rel, std::string* method = nullptr);
  int explicit_calls() const { return explicit_calls_; }
  int numeric_calls() const { return numeric_calls_; }

 private:
  CellEnergyModel model_;
  CrossSection cs_;
  std::vector<ScheduleEntry> schedule_;
  PhiOptions opts_;
  std::map<std::array<long long, 12>, double> memo_;
  std::mutex mutex_;
  int explicit_calls_ = 0;
  int numeric_calls_ = 0;
};

struct JumpTerm {
  double sigma = 0.0;
  Vec3 u = Vec3::Zero();  // R(sigma-)^T (ytilde(sigma+) - ytilde(sigma-))
  Mat3 R_rel = Mat3::Identity();
  double phi = 0.0;
  std::string method;  // "explicit" or "numeric"
};

struct LimitValue {
  double total = 0.0;
  double elastic = 0.0;
  double crack = 0.0;
  bool admissible = true;
  std::string reason;
  std::vector<JumpTerm> jumps;
};

// Elastic part plus the crack energies of the nontrivial jumps; +inf with a
// reason when the frame is inadmissible.
LimitValue evaluate_limit_functional(const FrameCurve& fc, const CrossSection& cs, const QuadraticFormTable& Q,
                                     PhiEvaluator& phi);

struct StudyRow {
  int k = 0;
  double kE = 0.0;
  double E_lim_elastic = 0.0;
  double E_lim_crack = 0.0;
  double rel_err = 0.0;
  int broken_slices = 0;
  double wall_ms = 0.0;
};

struct StudyResult {
  LimitValue limit;
  std::vector<StudyRow> rows;
};

StudyResult run_convergence_study(const StudyConfig& cfg);

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(const std::string& s);
std::string format_report(const std::vector<StudyRow>& rows, ReportFormat format);
// Inverse of the JSON report.
std::vector<StudyRow> parse_report_json(const std::string& text);
void emit_report(const std::vector<StudyRow>& rows, ReportFormat format, const std::string& path);

}  // namespace nanorod
