#include "nanorod/harness.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/parallel.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace nanorod {

PhiEvaluator::PhiEvaluator(CellEnergyModel model, CrossSection cs, std::vector<ScheduleEntry> schedule,
                           PhiOptions opts)
    : model_(std::move(model)), cs_(std::move(cs)), schedule_(std::move(schedule)), opts_(opts) {}

double PhiEvaluator::operator()(const Vec3& u, const Mat3& R_rel, std::string* method) {
  const bool expl = model_.is_pairwise() && u.norm() > 1e-12;
  if (method) *method = expl ? "explicit" : "numeric";
  std::array<long long, 12> key;
  for (int i = 0; i < 3; ++i) key[i] = std::llround(u(i) * 1e12);
  for (int i = 0; i < 9; ++i) key[3 + i] = std::llround(R_rel(i % 3, i / 3) * 1e12);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  double value;
  if (expl) {
    value = phi_explicit_masspring(u, model_, cs_);
    ++explicit_calls_;
  } else {
    CrackProblem p;
    p.u = u;
    p.R_rel = R_rel;
    p.model = model_;
    p.cs = cs_;
    p.schedule = schedule_;
    value = phi_numeric(p, opts_).estimate;
    ++numeric_calls_;
  }
  memo_.emplace(key, value);
  return value;
}

LimitValue evaluate_limit_functional(const FrameCurve& fc, const CrossSection& cs, const QuadraticFormTable& Q,
                                     PhiEvaluator& phi) {
  LimitValue out;
  try {
    check_admissible(fc);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InadmissibleFrame) throw;
    out.admissible = false;
    out.reason = e.what();
    out.total = std::numeric_limits<double>::infinity();
    return out;
  }
  out.elastic = elastic_energy_of_frame(fc, q3rel_matrix(cs, Q));
  for (const LocalJump& lj : local_jumps(fc)) {
    JumpTerm t;
    t.sigma = lj.sigma;
    t.u = lj.u;
    t.R_rel = lj.R_rel;
    t.phi = phi(lj.u, lj.R_rel, &t.method);
    out.crack += t.phi;
    out.jumps.push_back(t);
  }
  out.total = out.elastic + out.crack;
  return out;
}

StudyResult run_convergence_study(const StudyConfig& cfg) {
  if (cfg.k_list.empty()) throw Error(ErrorCode::ConfigError, "field 'k_list': a convergence study needs k values");
  const QuadraticFormTable Q = hessian_forms(cfg.model, cfg.cs);
  const FrameCurve fc = frame_of(cfg);
  PhiEvaluator phi(cfg.model, cfg.cs, cfg.phi_schedule, cfg.phi_options);
  StudyResult res;
  res.limit = evaluate_limit_functional(fc, cfg.cs, Q, phi);
  if (!res.limit.admissible) throw Error(ErrorCode::InadmissibleFrame, res.limit.reason);
  const bool optimal = cfg.correctors == "optimal";
  const bool has_jumps = !res.limit.jumps.empty();

  res.rows.resize(cfg.k_list.size());
  parallel_for(static_cast<int>(cfg.k_list.size()), cfg.threads, [&](int i) {
    auto t0 = std::chrono::steady_clock::now();
    const int k = cfg.k_list[i];
    Deformation def;
    if (has_jumps) {
      def = jump_frame_config(fc, cfg.cs, k, cfg.splice_radius, {}, optimal ? &Q : nullptr);
    } else {
      RecoveryAnsatz ans{fc, k, {}, {}};
      if (optimal) attach_optimal_correctors(ans, cfg.cs, Q);
      def = smooth_frame_config(ans, cfg.cs);
    }
    StudyRow& row = res.rows[i];
    row.k = k;
    row.kE = k * total_energy(cfg.model, def).energy;
    row.E_lim_elastic = res.limit.elastic;
    row.E_lim_crack = res.limit.crack;
    row.rel_err = std::abs(row.kE - res.limit.total) / std::max(res.limit.total, 1e-12);
    row.broken_slices = slice_profile(cfg.model, def, cfg.c_e).broken_count();
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });
  return res;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw Error(ErrorCode::ConfigError, "field 'format': expected csv or json, got '" + s + "'");
}

std::string format_report(const std::vector<StudyRow>& rows, ReportFormat format) {
  if (rows.empty()) throw Error(ErrorCode::InvalidParameters, "report needs at least one row");
  std::ostringstream os;
  if (format == ReportFormat::Csv) {
    os << "k,kE,E_lim_elastic,E_lim_crack,rel_err,broken_slices,wall_ms\n";
    for (const StudyRow& r : rows)
      os << r.k << ',' << format_double(r.kE) << ',' << format_double(r.E_lim_elastic) << ','
         << format_double(r.E_lim_crack) << ',' << format_double(r.rel_err) << ',' << r.broken_slices << ','
         << format_double(r.wall_ms) << '\n';
    return os.str();
  }
  nlohmann::json j = nlohmann::json::array();
  for (const StudyRow& r : rows)
    j.push_back({{"k", r.k},
                 {"kE", r.kE},
                 {"E_lim_elastic", r.E_lim_elastic},
                 {"E_lim_crack", r.E_lim_crack},
                 {"rel_err", r.rel_err},
                 {"broken_slices", r.broken_slices},
                 {"wall_ms", r.wall_ms}});
  return nlohmann::json{{"rows", j}}.dump(2) + "\n";
}

std::vector<StudyRow> parse_report_json(const std::string& text) {
  std::vector<StudyRow> rows;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& r : j.at("rows")) {
      StudyRow s;
      s.k = r.at("k").get<int>();
      s.kE = r.at("kE").get<double>();
      s.E_lim_elastic = r.at("E_lim_elastic").get<double>();
      s.E_lim_crack = r.at("E_lim_crack").get<double>();
      s.rel_err = r.at("rel_err").get<double>();
      s.broken_slices = r.at("broken_slices").get<int>();
      s.wall_ms = r.at("wall_ms").get<double>();
      rows.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed report: ") + e.what());
  }
  return rows;
}

void emit_report(const std::vector<StudyRow>& rows, ReportFormat format, const std::string& path) {
  const std::string text = format_report(rows, format);
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  os << text;
  os.flush();
  if (!os) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace nanorod
