#include "nanorod/crack.hpp"

#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"
#include "nanorod/parallel.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace nanorod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int hatted_axial(const RodLattice& lat, int atom) { return lat.atom_layer(atom) + lat.axial_offset(); }

bool is_identity(const Mat3& R) { return (R - Mat3::Identity()).norm() <= 1e-12; }

// Matrix logarithm of a rotation, as a skew matrix.
Mat3 log_rotation(const Mat3& R) {
  Eigen::AngleAxisd aa(R);
  return skew(aa.angle() * aa.axis());
}

}  // namespace

int half_layers(const ScheduleEntry& e) { return static_cast<int>(std::floor(e.r * e.k + 1e-9)); }

void validate(const CrackProblem& p) {
  if (p.schedule.empty()) throw Error(ErrorCode::InvalidParameters, "crack schedule is empty");
  if (!p.u.allFinite()) throw Error(ErrorCode::InvalidParameters, "jump is not finite");
  if (!is_rotation(p.R_rel, 1e-9)) throw Error(ErrorCode::NonRotation, "relative rotation is not in SO(3)");
  if (!(p.boundary_fraction > 0.0 && p.boundary_fraction < 1.0))
    throw Error(ErrorCode::InvalidParameters, "boundary fraction must lie in (0, 1)");
  if (p.cs.corners().empty()) throw Error(ErrorCode::EmptyCrossSection, "crack problem has no cross-section");
  for (const ScheduleEntry& e : p.schedule) {
    if (!(e.r > 0.0 && e.r < 1.0)) throw Error(ErrorCode::InvalidParameters, "schedule r must lie in (0, 1)");
    if (e.k < 1) throw Error(ErrorCode::InvalidParameters, "schedule k must be positive");
    if (half_layers(e) < 8) throw Error(ErrorCode::InvalidParameters, "schedule entry needs rk >= 8");
  }
}

std::shared_ptr<const RodLattice> crack_lattice(const CrackProblem& p, const ScheduleEntry& e) {
  return std::make_shared<const RodLattice>(build_block_lattice(p.cs, half_layers(e), e.k));
}

bool is_boundary_atom(const CrackProblem& p, const RodLattice& lat, int atom) {
  int n = -lat.axial_offset();
  return std::abs(hatted_axial(lat, atom)) >= p.boundary_fraction * n - 1e-12;
}

Vec3 boundary_target(const CrackProblem& p, const RodLattice& lat, int atom) {
  Vec3 x = lat.reference_position(atom);
  if (hatted_axial(lat, atom) <= 0) return x;
  return p.R_rel * x + p.u;
}

Deformation clean_break_config(const CrackProblem& p, const ScheduleEntry& e) {
  double un = p.u.norm();
  if (un > 0.0 && un < 2.0 / e.k)
    throw Error(ErrorCode::Interpenetration, "jump " + std::to_string(un) + " is shorter than 2/k; halves interpenetrate");
  auto lat = crack_lattice(p, e);
  Eigen::Matrix3Xd y(3, lat->num_atoms());
  for (int a = 0; a < lat->num_atoms(); ++a) y.col(a) = boundary_target(p, *lat, a);
  return Deformation(lat, std::move(y));
}

double crack_energy(const CrackProblem& p, const Deformation& def) {
  return def.lattice->k() * total_energy(p.model, def).energy;
}

KinkResult kink_config(const CrackProblem& p, const ScheduleEntry& e, int anchor) {
  if (is_identity(p.R_rel)) throw Error(ErrorCode::InvalidParameters, "kink needs a relative rotation other than Id");
  if (!is_rotation(p.R_rel, 1e-9)) throw Error(ErrorCode::NonRotation, "relative rotation is not in SO(3)");
  const double k = e.k;
  const auto& corners = p.cs.corners();
  double diam = 0.0;
  for (IPoint a : corners)
    for (IPoint b : corners) diam = std::max(diam, std::hypot(a.a - b.a, a.b - b.b));
  Vec3 aux = p.u.norm() >= 2.0 / k ? p.u : Vec3((diam + 3.0) / k, 0.0, 0.0);

  auto right0 = [&](IPoint x) -> Vec3 { return p.R_rel * Vec3(1.0 / k, x.a / k, x.b / k) + aux; };
  auto left0 = [&](IPoint x) -> Vec3 { return Vec3(0.0, x.a / k, x.b / k); };

  // Smallest t in [0, 1] with |q + t d| = len, q = right - left.
  auto first_root = [](const Vec3& q, const Vec3& d, double len) {
    double a = d.squaredNorm(), b = 2.0 * q.dot(d), c = q.squaredNorm() - len * len;
    if (a <= 0.0) return kInf;
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return kInf;
    double sq = std::sqrt(disc);
    double best = kInf;
    for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)})
      if (t >= 0.0 && t <= 1.0) best = std::min(best, t);
    return best;
  };

  std::vector<int> anchors;
  if (anchor >= 0) {
    if (anchor >= static_cast<int>(corners.size())) throw Error(ErrorCode::InvalidParameters, "kink anchor out of range");
    anchors.push_back(anchor);
  } else {
    anchors.resize(corners.size());
    std::iota(anchors.begin(), anchors.end(), 0);
  }

  KinkResult best;
  best.energy = kInf;
  bool found = false;
  for (int an : anchors) {
    IPoint x0 = corners[an];
    Vec3 d = right0(x0) - left0(x0);
    double t0 = kInf;
    for (IPoint xr : corners)
      for (IPoint xl : corners) {
        int dd = std::abs(xr.a - xl.a) + std::abs(xr.b - xl.b);
        if (dd > 1) continue;
        double len = dd == 0 ? 1.0 / k : std::sqrt(2.0) / k;
        t0 = std::min(t0, first_root(right0(xr) - left0(xl), -d, len));
      }
    if (!(t0 <= 1.0)) continue;
    CrackProblem shifted = p;
    shifted.u = aux - t0 * d;
    auto lat = crack_lattice(p, e);
    Eigen::Matrix3Xd y(3, lat->num_atoms());
    for (int a = 0; a < lat->num_atoms(); ++a) y.col(a) = boundary_target(shifted, *lat, a);
    Deformation def(lat, std::move(y));
    double en = crack_energy(p, def);
    if (!found || en < best.energy) {
      found = true;
      best.config = std::move(def);
      best.t0 = t0;
      best.anchor = an;
      best.auxiliary_jump = aux;
      best.effective_jump = shifted.u;
      best.energy = en;
    }
  }
  if (!found) throw Error(ErrorCode::NoContactFound, "no contact time in [0, 1] for any anchor");
  return best;
}

double phi_explicit_masspring(const Vec3& u, const CellEnergyModel& model, const CrossSection& cs) {
  if (!model.is_pairwise()) throw Error(ErrorCode::ModelNotMassSpring, "explicit crack energy needs a pair model");
  if (u.norm() <= 1e-12) throw Error(ErrorCode::ModelNotApplicable, "explicit crack energy holds only for u != 0");
  return static_cast<double>(cs.corners().size()) * pair_omega(model.nn()) +
         cs.ordered_inplane_neighbour_pairs() * pair_omega(model.nnn());
}

namespace {

// Local minimizer over the free atoms in hatted coordinates.
class LocalSolver {
 public:
  LocalSolver(const CrackProblem& p, Deformation base, const PhiOptions& opts)
      : p_(p), def_(std::move(base)), opts_(opts) {
    const RodLattice& lat = *def_.lattice;
    for (int a = 0; a < lat.num_atoms(); ++a)
      if (!is_boundary_atom(p_, lat, a)) free_.push_back(a);
  }

  const std::vector<int>& free_atoms() const { return free_; }
  const Deformation& deformation() const { return def_; }

  Eigen::VectorXd state() const {
    Eigen::VectorXd x(3 * free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) x.segment<3>(3 * i) = def_.lattice->k() * def_.positions.col(free_[i]);
    return x;
  }

  void set_state(const Eigen::VectorXd& x) {
    for (std::size_t i = 0; i < free_.size(); ++i) def_.positions.col(free_[i]) = x.segment<3>(3 * i) / def_.lattice->k();
  }

  // E_k, its gradient in hatted free coordinates, and the number of penalized cells.
  double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* g, int* penalized) {
    set_state(x);
    const RodLattice& lat = *def_.lattice;
    double sum = 0.0;
    int pen = 0;
    for (std::size_t c = 0; c < lat.cells().size(); ++c) {
      const Cell& cell = lat.cells()[c];
      Mat38 yb = def_.cell_positions(static_cast<int>(c));
      if (cell.cls == CellClass::Interior) {
        // Same summation as cell_energy, with the penalty evaluated once.
        double chi = orientation_penalty(p_.model, yb, lat.k());
        sum += cell_energy(p_.model, CellClass::Surface, kAllCorners, yb, lat.k()) + chi;
        if (chi > 0.0) ++pen;
      } else {
        sum += cell_energy(p_.model, cell.cls, cell.real_mask, yb, lat.k());
      }
    }
    if (penalized) *penalized = pen;
    if (g) {
      Eigen::Matrix3Xd full = energy_gradient(p_.model, def_);
      g->resize(x.size());
      for (std::size_t i = 0; i < free_.size(); ++i) g->segment<3>(3 * i) = full.col(free_[i]);
    }
    return lat.k() * sum;
  }

  struct Outcome {
    double energy;
    int iterations;
    bool converged;
  };

  Outcome minimize() {
    Eigen::VectorXd x = state();
    if (x.size() == 0) return {evaluate(x, nullptr, nullptr), 0, true};
    Eigen::VectorXd g, gn;
    int pen = 0, pen_n = 0;
    double f = evaluate(x, &g, &pen);
    std::deque<Eigen::VectorXd> S, Y;
    const int memory = 8;
    int it = 0;
    bool converged = false;
    for (; it < opts_.max_iterations; ++it) {
      if (g.lpNorm<Eigen::Infinity>() <= opts_.gradient_tolerance) {
        converged = true;
        break;
      }
      // Two-loop recursion.
      Eigen::VectorXd q = g;
      std::vector<double> alpha(S.size());
      for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
        alpha[i] = S[i].dot(q) / Y[i].dot(S[i]);
        q -= alpha[i] * Y[i];
      }
      if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
      for (std::size_t i = 0; i < S.size(); ++i) q += (alpha[i] - Y[i].dot(q) / Y[i].dot(S[i])) * S[i];
      Eigen::VectorXd d = -q;
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        S.clear();
        Y.clear();
        d = -g;
        slope = -g.squaredNorm();
      }
      double step = 1.0;
      double dmax = d.lpNorm<Eigen::Infinity>();
      if (dmax * step > 0.5) step = 0.5 / dmax;
      bool accepted = false;
      Eigen::VectorXd xn;
      double fn = f;
      for (int ls = 0; ls < 60; ++ls) {
        xn = x + step * d;
        fn = evaluate(xn, &gn, &pen_n);
        if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope && pen_n <= pen) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        set_state(x);
        if (!S.empty()) {
          S.clear();
          Y.clear();
          continue;
        }
        break;  // stagnated along steepest descent
      }
      Eigen::VectorXd s = xn - x, y = gn - g;
      x = std::move(xn);
      g = gn;
      bool tiny = f - fn <= 1e-15 * std::max(1.0, std::abs(f)) && s.lpNorm<Eigen::Infinity>() < 1e-13;
      f = fn;
      pen = pen_n;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        S.push_back(s);
        Y.push_back(y);
        if (static_cast<int>(S.size()) > memory) {
          S.pop_front();
          Y.pop_front();
        }
      }
      if (tiny) break;
    }
    set_state(x);
    return {f, it, converged};
  }

 private:
  const CrackProblem& p_;
  Deformation def_;
  const PhiOptions& opts_;
  std::vector<int> free_;
};

struct CutBond {
  int a;
  int b;
  double len;  // rest length, hatted
};

std::vector<CutBond> cut_bonds(const CrackProblem& p, const Deformation& def) {
  const RodLattice& lat = *def.lattice;
  double wn = pair_elastic_window(p.model.nn(), lat.k());
  double wd = pair_elastic_window(p.model.nnn(), lat.k());
  std::set<std::pair<int, int>> seen;
  std::vector<CutBond> out;
  for (const Cell& cell : lat.cells()) {
    for (const CellBond& b : cell_bonds()) {
      int ai = cell.corners[b.i], aj = cell.corners[b.j];
      if (ai < 0 || aj < 0) continue;
      if (is_boundary_atom(p, lat, ai) && is_boundary_atom(p, lat, aj)) continue;
      auto key = std::minmax(ai, aj);
      if (!seen.insert(key).second) continue;
      double len = b.nearest ? 1.0 : std::sqrt(2.0);
      double r = lat.k() * (def.positions.col(ai) - def.positions.col(aj)).norm() / len;
      if (std::abs(r - 1.0) > (b.nearest ? wn : wd)) out.push_back({key.first, key.second, len});
    }
  }
  return out;
}

int count_full_gap_fibres(const CrackProblem& p, const Deformation& def) {
  const RodLattice& lat = *def.lattice;
  double w = pair_elastic_window(p.model.nn(), lat.k());
  int fibres = 0;
  for (IPoint x : p.cs.corners()) {
    for (int l = 0; l < lat.layers(); ++l) {
      int a = lat.atom_id(l, x), b = lat.atom_id(l + 1, x);
      double r = lat.k() * (def.positions.col(a) - def.positions.col(b)).norm();
      if (std::abs(r - 1.0) > w) {
        ++fibres;
        break;
      }
    }
  }
  return fibres;
}

struct SeedJob {
  std::string name;
  Deformation config;
};

struct LocalResult {
  SeedResult summary;
  Deformation best;
};

LocalResult run_seed(const CrackProblem& p, const SeedJob& job, const PhiOptions& opts) {
  LocalSolver solver(p, job.config, opts);
  LocalResult res;
  res.summary.name = job.name;
  res.summary.initial_energy = solver.evaluate(solver.state(), nullptr, nullptr);
  auto out = solver.minimize();
  res.summary.iterations = out.iterations;
  res.summary.converged = out.converged;
  double best = out.energy;
  Deformation best_def = solver.deformation();

  // Bond reactivation: close one cut bond, re-minimize, keep if lower.
  for (int round = 0; round < opts.reactivation_rounds; ++round) {
    std::vector<CutBond> cuts = cut_bonds(p, best_def);
    bool improved = false;
    int attempts = 0;
    for (const CutBond& cb : cuts) {
      if (attempts++ >= opts.reactivation_attempts) break;
      const RodLattice& lat = *best_def.lattice;
      Deformation trial = best_def;
      Vec3 ya = trial.positions.col(cb.a), yb = trial.positions.col(cb.b);
      Vec3 dir = yb - ya;
      double n = dir.norm();
      dir = n > 0.0 ? Vec3(dir / n) : Vec3::UnitX();
      double len = cb.len / lat.k();
      bool fa = !is_boundary_atom(p, lat, cb.a), fb = !is_boundary_atom(p, lat, cb.b);
      if (fa && fb) {
        Vec3 mid = 0.5 * (ya + yb);
        trial.positions.col(cb.a) = mid - 0.5 * len * dir;
        trial.positions.col(cb.b) = mid + 0.5 * len * dir;
      } else if (fb) {
        trial.positions.col(cb.b) = ya + len * dir;
      } else {
        trial.positions.col(cb.a) = yb - len * dir;
      }
      LocalSolver s2(p, std::move(trial), opts);
      auto o2 = s2.minimize();
      res.summary.iterations += o2.iterations;
      if (o2.energy < best - 1e-12) {
        best = o2.energy;
        best_def = s2.deformation();
        res.summary.converged = o2.converged;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  res.summary.final_energy = best;
  res.best = std::move(best_def);
  return res;
}

Deformation with_targets(const CrackProblem& p, std::shared_ptr<const RodLattice> lat,
                         const std::function<Vec3(int)>& interior_map) {
  Eigen::Matrix3Xd y(3, lat->num_atoms());
  for (int a = 0; a < lat->num_atoms(); ++a)
    y.col(a) = is_boundary_atom(p, *lat, a) ? boundary_target(p, *lat, a) : interior_map(a);
  return Deformation(lat, std::move(y));
}

std::vector<SeedJob> make_seeds(const CrackProblem& p, const ScheduleEntry& e, const PhiOptions& opts,
                                std::uint64_t seed, std::vector<std::string>& diag) {
  auto lat = crack_lattice(p, e);
  const int n = half_layers(e);
  const double bstart = p.boundary_fraction * n;
  std::vector<SeedJob> base;

  try {
    base.push_back({"clean_break", clean_break_config(p, e)});
  } catch (const Error& err) {
    diag.push_back("clean_break seed skipped: " + std::string(err.what()));
  }

  if (p.u.norm() <= 1e-12 && !is_identity(p.R_rel)) {
    try {
      KinkResult kr = kink_config(p, e);
      // Ramp the residual translation of the kink to the exact boundary data.
      Vec3 resid = p.u - kr.effective_jump;
      base.push_back({"kink", with_targets(p, lat, [&](int a) -> Vec3 {
                        int ax = hatted_axial(*lat, a);
                        if (ax <= 0) return kr.config.positions.col(a);
                        double lam = std::clamp((ax - 1.0) / std::max(bstart - 1.0, 1.0), 0.0, 1.0);
                        return Vec3(kr.config.positions.col(a) + lam * resid);
                      })});
    } catch (const Error& err) {
      diag.push_back("kink seed skipped: " + std::string(err.what()));
    }
  }

  Mat3 logR = log_rotation(p.R_rel);
  base.push_back({"elastic_interpolation", with_targets(p, lat, [&](int a) -> Vec3 {
                    int ax = hatted_axial(*lat, a);
                    double lam = std::clamp((ax + bstart) / (2.0 * bstart), 0.0, 1.0);
                    return exp_skew(lam * logR) * lat->reference_position(a) + lam * p.u;
                  })});

  std::vector<SeedJob> seeds;
  for (std::size_t i = 0; i < base.size() && static_cast<int>(seeds.size()) < opts.starts; ++i) seeds.push_back(base[i]);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, opts.perturbation * pair_elastic_window(p.model.nn(), e.k) / e.k);
  for (int i = 0; static_cast<int>(seeds.size()) < opts.starts; ++i) {
    const SeedJob& src = base[i % base.size()];
    SeedJob job{src.name + "_perturbed_" + std::to_string(i), src.config};
    for (int a = 0; a < lat->num_atoms(); ++a)
      if (!is_boundary_atom(p, *lat, a))
        for (int r = 0; r < 3; ++r) job.config.positions(r, a) += nd(rng);
    seeds.push_back(std::move(job));
  }
  return seeds;
}

}  // namespace

CrackSolution phi_numeric(const CrackProblem& p, const PhiOptions& opts) {
  validate(p);
  if (!p.model.is_pairwise()) throw Error(ErrorCode::ModelNotPairwise, "phi_numeric descends along energy_gradient");
  if (opts.starts < 1) throw Error(ErrorCode::InvalidParameters, "phi_numeric needs at least one start");
  CrackSolution sol;
  const int ne = static_cast<int>(p.schedule.size());
  std::vector<std::vector<SeedJob>> seeds(ne);
  std::vector<std::vector<std::string>> diags(ne);
  for (int i = 0; i < ne; ++i) seeds[i] = make_seeds(p, p.schedule[i], opts, opts.seed + 7919u * i, diags[i]);

  std::vector<std::pair<int, int>> jobs;
  for (int i = 0; i < ne; ++i)
    for (int s = 0; s < static_cast<int>(seeds[i].size()); ++s) jobs.emplace_back(i, s);
  std::vector<std::vector<LocalResult>> results(ne);
  for (int i = 0; i < ne; ++i) results[i].resize(seeds[i].size());
  parallel_for(static_cast<int>(jobs.size()), opts.threads, [&](int j) {
    auto [i, s] = jobs[j];
    results[i][s] = run_seed(p, seeds[i][s], opts);
  });

  for (int i = 0; i < ne; ++i) {
    CrackEntryResult er;
    er.entry = p.schedule[i];
    er.energy = kInf;
    int best = -1;
    for (std::size_t s = 0; s < results[i].size(); ++s) {
      er.seeds.push_back(results[i][s].summary);
      double fe = results[i][s].summary.final_energy;
      if (std::isfinite(fe) && fe < er.energy) {
        er.energy = fe;
        best = static_cast<int>(s);
      }
    }
    if (best < 0) throw Error(ErrorCode::NonConvergent, "no seed produced a finite energy");
    er.best_seed = results[i][best].summary.name;
    er.best = results[i][best].best;
    er.profile = slice_profile(p.model, er.best);
    er.full_gap_fibres = count_full_gap_fibres(p, er.best);
    er.clean_break_dominant = er.full_gap_fibres == static_cast<int>(p.cs.corners().size());
    const RodLattice& lat = *er.best.lattice;
    for (int a = 0; a < lat.num_atoms(); ++a)
      if (is_boundary_atom(p, lat, a)) {
        Vec3 t = boundary_target(p, lat, a);
        for (int r = 0; r < 3; ++r)
          if (er.best.positions(r, a) != t(r)) er.boundary_exact = false;
      }
    std::ostringstream os;
    os << "entry r=" << er.entry.r << " k=" << er.entry.k << ": best seed " << er.best_seed;
    if (!results[i][best].summary.converged) os << " (stopped before gradient tolerance)";
    sol.diagnostics.push_back(os.str());
    for (const std::string& d : diags[i]) sol.diagnostics.push_back("entry k=" + std::to_string(er.entry.k) + ": " + d);
    sol.entries.push_back(std::move(er));
  }
  for (int i = 1; i < ne; ++i)
    if (sol.entries[i].energy > sol.entries[i - 1].energy + 1e-9) sol.monotone = false;
  if (!sol.monotone) sol.diagnostics.push_back("per-entry energies are not monotone along the schedule");
  sol.estimate = sol.entries.back().energy;
  return sol;
}

std::string phi_report_json(const CrackProblem& p, const CrackSolution& sol) {
  nlohmann::json j;
  j["u"] = {p.u(0), p.u(1), p.u(2)};
  j["R_rel"] = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) j["R_rel"].push_back({p.R_rel(r, 0), p.R_rel(r, 1), p.R_rel(r, 2)});
  j["schedule"] = nlohmann::json::array();
  j["entries"] = nlohmann::json::array();
  for (const ScheduleEntry& e : p.schedule) j["schedule"].push_back({{"r", e.r}, {"k", e.k}});
  for (const CrackEntryResult& er : sol.entries) {
    nlohmann::json e;
    e["r"] = er.entry.r;
    e["k"] = er.entry.k;
    e["energy"] = er.energy;
    e["best_seed"] = er.best_seed;
    e["broken_slices"] = er.profile.broken_count();
    e["full_gap_fibres"] = er.full_gap_fibres;
    e["clean_break_dominant"] = er.clean_break_dominant;
    e["boundary_exact"] = er.boundary_exact;
    e["seeds"] = nlohmann::json::array();
    for (const SeedResult& s : er.seeds)
      e["seeds"].push_back({{"name", s.name},
                            {"initial_energy", s.initial_energy},
                            {"final_energy", s.final_energy},
                            {"iterations", s.iterations},
                            {"converged", s.converged}});
    j["entries"].push_back(e);
  }
  j["estimate"] = sol.estimate;
  j["diagnostics"] = {{"monotone", sol.monotone}, {"messages", sol.diagnostics}};
  return j.dump(2);
}

std::vector<std::vector<int>> component_decomposition(const Deformation& def, double threshold) {
  const RodLattice& lat = *def.lattice;
  std::vector<int> parent(lat.num_atoms());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const Cell& cell : lat.cells())
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) {
        int a = cell.corners[i], b = cell.corners[j];
        if (a < 0 || b < 0) continue;
        if ((def.positions.col(a) - def.positions.col(b)).norm() < threshold) {
          int ra = find(a), rb = find(b);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
  // Atom ids increase with the axial layer, so the root order is the axial order.
  std::map<int, std::vector<int>> groups;
  for (int a = 0; a < lat.num_atoms(); ++a) groups[find(a)].push_back(a);
  std::vector<std::vector<int>> out;
  for (auto& [root, atoms] : groups) out.push_back(std::move(atoms));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

}  // namespace nanorod
