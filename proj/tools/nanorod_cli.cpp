#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"
#include "nanorod/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace nanorod;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

StudyConfig load(const Flags& f) {
  StudyConfig cfg = f.config.empty() ? parse_config("{}") : parse_config_file(f.config);
  if (!f.format.empty()) cfg.format = f.format;
  parse_report_format(cfg.format);
  if (f.seed) cfg.seed = cfg.phi_options.seed = *f.seed;
  if (f.threads) {
    if (*f.threads < 1) throw Error(ErrorCode::ConfigError, "--threads must be at least 1");
    cfg.threads = cfg.phi_options.threads = *f.threads;
  }
  return cfg;
}

void write_text(const std::string& text, const Flags& f, const StudyConfig& cfg) {
  const std::string& path = f.out.empty() ? cfg.output : f.out;
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

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

bool is_json(const StudyConfig& cfg) { return cfg.format == "json"; }

std::string vec_text(const Vec3& v) {
  return format_double(v(0)) + " " + format_double(v(1)) + " " + format_double(v(2));
}

int cmd_energy(const Flags& f) {
  StudyConfig cfg = load(f);
  if (cfg.deformation.empty()) throw Error(ErrorCode::ConfigError, "field 'deformation': energy needs a deformation file");
  Deformation def = read_deformation_file(cfg.deformation);
  EnergyResult e = total_energy(cfg.model, def);
  const int k = def.lattice->k();
  SliceEnergyProfile prof = slice_profile(cfg.model, def, cfg.c_e);
  if (is_json(cfg)) {
    json j{{"k", k},           {"energy", e.energy},   {"kE", k * e.energy},
           {"interior", e.interior}, {"surface", e.surface}, {"end", e.end},
           {"broken_slices", prof.broken_count()}};
    write_text(j.dump(2) + "\n", f, cfg);
  } else {
    std::ostringstream os;
    os << "k,energy,kE,interior,surface,end,broken_slices\n"
       << k << ',' << format_double(e.energy) << ',' << format_double(k * e.energy) << ','
       << format_double(e.interior) << ',' << format_double(e.surface) << ',' << format_double(e.end) << ','
       << prof.broken_count() << '\n';
    write_text(os.str(), f, cfg);
  }
  return 0;
}

int cmd_qrel(const Flags& f) {
  StudyConfig cfg = load(f);
  QuadraticFormTable Q = hessian_forms(cfg.model, cfg.cs);
  std::vector<Vec3> gens = cfg.qrel_generators;
  if (gens.empty()) gens = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Mat3 K = q3rel_matrix(cfg.cs, Q);
  if (is_json(cfg)) {
    json rows = json::array();
    for (const Vec3& a : gens) rows.push_back({{"a", {a(0), a(1), a(2)}}, {"q3rel", q3rel(skew(a), cfg.cs, Q)}});
    json k = json::array();
    for (int r = 0; r < 3; ++r) k.push_back({K(r, 0), K(r, 1), K(r, 2)});
    write_text(json{{"model_hash", model_hash(cfg.model, cfg.cs)}, {"K", k}, {"values", rows}}.dump(2) + "\n", f, cfg);
  } else {
    std::ostringstream os;
    os << "a1,a2,a3,q3rel\n";
    for (const Vec3& a : gens)
      os << format_double(a(0)) << ',' << format_double(a(1)) << ',' << format_double(a(2)) << ','
         << format_double(q3rel(skew(a), cfg.cs, Q)) << '\n';
    write_text(os.str(), f, cfg);
  }
  return 0;
}

int cmd_phi(const Flags& f) {
  StudyConfig cfg = load(f);
  CrackProblem p;
  p.u = cfg.phi_u;
  p.R_rel = cfg.phi_rotation;
  p.model = cfg.model;
  p.cs = cfg.cs;
  p.schedule = cfg.phi_schedule;
  CrackSolution sol = phi_numeric(p, cfg.phi_options);
  for (const std::string& d : sol.diagnostics) std::cerr << "phi: " << d << "\n";
  if (is_json(cfg)) {
    write_text(phi_report_json(p, sol), f, cfg);
  } else {
    std::ostringstream os;
    os << "r,k,energy,best_seed,full_gap_fibres,clean_break_dominant,boundary_exact\n";
    for (const CrackEntryResult& e : sol.entries)
      os << format_double(e.entry.r) << ',' << e.entry.k << ',' << format_double(e.energy) << ','
         << csv_field(e.best_seed) << ',' << e.full_gap_fibres << ',' << e.clean_break_dominant << ','
         << e.boundary_exact << '\n';
    write_text(os.str(), f, cfg);
  }
  return 0;
}

int cmd_limit(const Flags& f) {
  StudyConfig cfg = load(f);
  QuadraticFormTable Q = hessian_forms(cfg.model, cfg.cs);
  PhiEvaluator phi(cfg.model, cfg.cs, cfg.phi_schedule, cfg.phi_options);
  LimitValue v = evaluate_limit_functional(frame_of(cfg), cfg.cs, Q, phi);
  if (is_json(cfg)) {
    json jumps = json::array();
    for (const JumpTerm& t : v.jumps)
      jumps.push_back({{"sigma", t.sigma}, {"u", {t.u(0), t.u(1), t.u(2)}}, {"phi", t.phi}, {"method", t.method}});
    json j{{"admissible", v.admissible}, {"elastic", v.elastic}, {"crack", v.crack}, {"jumps", jumps}};
    j["total"] = v.admissible ? json(v.total) : json("inf");
    if (!v.admissible) j["reason"] = v.reason;
    write_text(j.dump(2) + "\n", f, cfg);
  } else {
    std::ostringstream os;
    os << "term,sigma,u,phi,method\n";
    for (const JumpTerm& t : v.jumps)
      os << "jump," << format_double(t.sigma) << ',' << vec_text(t.u) << ',' << format_double(t.phi) << ','
         << t.method << '\n';
    os << "elastic,,," << format_double(v.elastic) << ",\n";
    os << "total,,," << (v.admissible ? format_double(v.total) : std::string("inf")) << ','
       << csv_field(v.reason) << '\n';
    write_text(os.str(), f, cfg);
  }
  return 0;
}

int cmd_converge(const Flags& f) {
  StudyConfig cfg = load(f);
  StudyResult res = run_convergence_study(cfg);
  write_text(format_report(res.rows, parse_report_format(cfg.format)), f, cfg);
  return 0;
}

int cmd_check(const Flags& f) {
  StudyConfig cfg = load(f);
  AssumptionReport rep = check_assumptions(cfg.model, cfg.check_k_list, cfg.check_samples, cfg.seed);
  if (is_json(cfg)) {
    json rows = json::array();
    for (const AssumptionCheck& c : rep.checks)
      rows.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"worst", c.worst},
                      {"samples", c.samples},
                      {"domain", c.domain},
                      {"witness", c.witness}});
    write_text(json{{"all_passed", rep.all_passed()}, {"checks", rows}}.dump(2) + "\n", f, cfg);
  } else {
    std::ostringstream os;
    os << "name,passed,worst,samples,domain,witness\n";
    for (const AssumptionCheck& c : rep.checks)
      os << csv_field(c.name) << ',' << c.passed << ',' << format_double(c.worst) << ',' << c.samples << ','
         << csv_field(c.domain) << ',' << csv_field(c.witness) << '\n';
    write_text(os.str(), f, cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-to-continuum nanorod energies"};
  app.require_subcommand(1);
  Flags flags;
  int (*handler)(const Flags&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const Flags&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--out", flags.out, "output path (default: stdout)");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--threads", flags.threads, "worker threads");
    sub->callback([&handler, fn] { handler = fn; });
  };
  add("energy", "energy of a deformation file", cmd_energy);
  add("qrel", "relaxed quadratic form over generators", cmd_qrel);
  add("phi", "crack energy estimate", cmd_phi);
  add("limit", "limit energy of a frame curve", cmd_limit);
  add("converge", "convergence study over k", cmd_converge);
  add("check", "assumption validators", cmd_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return handler(flags);
  } catch (const Error& e) {
    std::cerr << "nanorod: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "nanorod: " << e.what() << "\n";
    return 3;
  }
}
