// Command-line front door: configuration, orchestration, persistence and
// reporting for the spectral lab.  Subcommands: reference, solve, sweep,
// bounds, verify, report.
//
// Exit codes: 0 success, 1 usage/validation/IO error, 2 non-convergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "boostedgs/boostedgs.hpp"

namespace fs = std::filesystem;
using bgs::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConverge = 2;

// --- strict config parsing ----------------------------------------------------

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: " + path + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("config: unknown key '" + path + it.key() + "'");
  }
}

bgs::Grid parse_grid(const json& cfg) {
  if (!cfg.contains("grid")) throw std::invalid_argument("config: missing 'grid'");
  const json& g = cfg.at("grid");
  check_keys(g, "grid.", {"dim", "half_width", "points_per_dim", "smoke"});
  return bgs::Grid::make(g.at("dim").get<int>(), g.at("half_width").get<double>(),
                         g.at("points_per_dim").get<int>(), g.value("smoke", false));
}

struct ParsedParams {
  bgs::Params p;
  bool mass_is_relative = false;
  double mass_factor = 1.0;
};

ParsedParams parse_params(const json& cfg, int dim) {
  if (!cfg.contains("params")) throw std::invalid_argument("config: missing 'params'");
  const json& pj = cfg.at("params");
  check_keys(pj, "params.",
             {"mass", "velocity", "mu", "q_exp", "target_mass", "target_mass_factor"});
  ParsedParams out;
  out.p.dim = dim;
  out.p.mass = pj.value("mass", 0.0);
  out.p.mu = pj.value("mu", 0.0);
  out.p.q_exp = pj.value("q_exp", 0.5);
  if (pj.contains("velocity")) {
    const auto& v = pj.at("velocity");
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
      throw std::invalid_argument("config: params.velocity must have dim entries");
    for (int a = 0; a < dim; ++a) out.p.velocity[static_cast<std::size_t>(a)] = v[a].get<double>();
  }
  const bool has_abs = pj.contains("target_mass");
  const bool has_rel = pj.contains("target_mass_factor");
  if (has_abs == has_rel)
    throw std::invalid_argument("config: give exactly one of target_mass / target_mass_factor");
  if (has_abs) {
    out.p.target_mass = pj.at("target_mass").get<double>();
  } else {
    out.mass_is_relative = true;
    out.mass_factor = pj.at("target_mass_factor").get<double>();
    out.p.target_mass = 1.0;  // resolved later against a*_v
  }
  return out;
}

bgs::SolverOpts parse_solver(const json& cfg, unsigned long long seed_override, bool has_seed) {
  bgs::SolverOpts o;
  if (cfg.contains("solver")) {
    const json& s = cfg.at("solver");
    check_keys(s, "solver.",
               {"max_iters", "tol", "dt", "precond_shift", "stabilization_exp", "seed", "jitter",
                "boost_phase", "boundary_tol", "energy_floor", "sigma_frac"});
    o.max_iters = s.value("max_iters", o.max_iters);
    o.tol = s.value("tol", o.tol);
    o.dt = s.value("dt", o.dt);
    o.precond_shift = s.value("precond_shift", o.precond_shift);
    o.stabilization_exp = s.value("stabilization_exp", o.stabilization_exp);
    o.seed = s.value("seed", o.seed);
    o.jitter = s.value("jitter", o.jitter);
    o.boost_phase = s.value("boost_phase", o.boost_phase);
    o.boundary_tol = s.value("boundary_tol", o.boundary_tol);
    if (s.contains("energy_floor")) o.energy_floor = s.at("energy_floor").get<double>();
    o.sigma_frac = s.value("sigma_frac", o.sigma_frac);
  }
  if (has_seed) o.seed = seed_override;
  o.validate();
  return o;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  return json::parse(in);
}

// resolved config (with overrides applied) is embedded in every report
json resolved_config(const json& cfg, const bgs::SolverOpts& o) {
  json c = cfg;
  json s = json::object();
  s["max_iters"] = o.max_iters;
  s["tol"] = o.tol;
  s["dt"] = o.dt;
  s["precond_shift"] = o.precond_shift;
  s["stabilization_exp"] = o.stabilization_exp;
  s["seed"] = o.seed;
  s["jitter"] = o.jitter;
  s["boost_phase"] = o.boost_phase;
  s["boundary_tol"] = o.boundary_tol;
  s["energy_floor"] = bgs::finite_or_flag(o.energy_floor);
  s["sigma_frac"] = o.sigma_frac;
  c["solver"] = s;
  return c;
}

// --- serialization helpers ------------------------------------------------------

json params_json(const bgs::Params& p) {
  json j;
  j["dim"] = p.dim;
  j["mass"] = p.mass;
  j["velocity"] = {p.velocity[0], p.velocity[1], p.velocity[2]};
  j["mu"] = p.mu;
  j["q_exp"] = p.q_exp;
  j["target_mass"] = p.target_mass;
  return j;
}

json solve_json(const bgs::SolveResult& r) {
  json j;
  j["converged"] = r.converged;
  j["verdict"] = bgs::verdict_name(r.verdict);
  j["iters"] = r.iters;
  j["residual"] = r.residual;
  j["multiplier"] = r.multiplier;
  j["mass"] = r.ground_state_mass;
  j["boundary_mass_frac"] = r.boundary_mass_frac;
  j["collapse_detected"] = r.collapse_detected;
  json e;
  e["kinetic"] = r.energy.kinetic;
  e["power_crit"] = r.energy.power_crit;
  e["power_sub"] = r.energy.power_sub;
  e["total"] = r.energy.total;
  j["energy"] = e;
  return j;
}

void write_trace_csv(const bgs::SolveResult& r, const std::string& path) {
  bgs::CsvWriter csv({"iter", "energy", "residual", "multiplier"});
  for (const auto& t : r.trace)
    csv.row({static_cast<double>(t.iter), t.energy, t.residual, t.multiplier});
  csv.save(path);
}

void write_table_csv(const bgs::SweepTable& t, const std::string& path) {
  bgs::CsvWriter csv({"mass", "m", "mu", "q", "vx", "half_width", "points", "scale", "e", "tv",
                      "hhalf", "crit_norm", "sub_norm", "multiplier", "residual", "boundary",
                      "profile_dist", "converged"});
  for (const auto& r : t.rows)
    csv.row({r.params.target_mass, r.params.mass, r.params.mu, r.params.q_exp,
             r.params.velocity[0], r.half_width, static_cast<double>(r.points), r.scale, r.e,
             r.tv, r.hhalf, r.crit_norm, r.sub_norm, r.multiplier, r.residual, r.boundary,
             r.profile_dist, r.converged ? 1.0 : 0.0});
  csv.save(path);
}

json fit_json(const bgs::ScalingFit& f) {
  json j;
  j["exponent"] = f.exponent;
  j["prefactor"] = f.prefactor;
  j["r_squared"] = f.r_squared;
  j["window"] = f.window;
  return j;
}

json bundle_json(const bgs::ReferenceBundle& b) {
  json j;
  j["a_star"] = b.a_star;
  j["a_star_v"] = b.a_star_v;
  j["gn_crit_const"] = b.gn_crit_const;
  j["gn_sub_const"] = b.gn_sub_const;
  j["I_v"] = b.I_v;
  j["norm_q2"] = b.norm_q2;
  j["q"] = b.q;
  j["v"] = {b.v[0], b.v[1], b.v[2]};
  j["sub_optimizer_mass"] = b.sub_optimizer_mass;
  j["q_residual"] = b.q_residual;
  j["qv_residual"] = b.qv_residual;
  return j;
}

std::string cache_dir_or_default(const std::string& out_dir) {
  const char* env = std::getenv("BOOSTEDGS_CACHE");
  if (env != nullptr) return env;
  return out_dir + "/ref_cache";
}

// --- subcommand implementations ---------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  unsigned long long seed = 0;
  bool has_seed = false;
  int workers = 1;
  bool dump_fields = false;
};

int cmd_reference(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  check_keys(cfg, "", {"grid", "params", "solver", "reference"});
  if (cfg.contains("reference")) check_keys(cfg.at("reference"), "reference.", {});
  bgs::Grid grid = parse_grid(cfg);
  ParsedParams pp = parse_params(cfg, grid.dim());
  bgs::SolverOpts opts = parse_solver(cfg, args.seed, args.has_seed);

  bgs::ReferenceBundle b =
      bgs::build_reference_cached(grid, pp.p.velocity, pp.p.q_exp, opts,
                                  cache_dir_or_default(args.out_dir));
  fs::create_directories(args.out_dir);
  json rep = bgs::make_report(resolved_config(cfg, opts), bundle_json(b));
  bgs::write_json(args.out_dir + "/bundle.json", rep);
  bgs::dump_field(b.Q, args.out_dir + "/Q.bin", params_json(pp.p));
  bgs::dump_field(b.Qv, args.out_dir + "/Qv.bin", params_json(pp.p));
  std::cout << "reference: a*=" << b.a_star << " a*_v=" << b.a_star_v << "\n";
  return kExitOk;
}

std::pair<bgs::Params, std::optional<bgs::ReferenceBundle>> resolve_params(
    ParsedParams pp, const bgs::Grid& grid, const bgs::SolverOpts& opts,
    const std::string& cache_dir, bool need_bundle) {
  std::optional<bgs::ReferenceBundle> bundle;
  if (pp.mass_is_relative || need_bundle) {
    bundle = bgs::build_reference_cached(grid, pp.p.velocity, pp.p.q_exp, opts, cache_dir);
    if (pp.mass_is_relative) pp.p.target_mass = pp.mass_factor * bundle->a_star_v;
  }
  pp.p.validate();
  return {pp.p, std::move(bundle)};
}

int cmd_solve(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  check_keys(cfg, "", {"grid", "params", "solver", "solve"});
  if (cfg.contains("solve")) check_keys(cfg.at("solve"), "solve.", {"dump_trace"});
  bgs::Grid grid = parse_grid(cfg);
  ParsedParams pp = parse_params(cfg, grid.dim());
  bgs::SolverOpts opts = parse_solver(cfg, args.seed, args.has_seed);
  bgs::Params p =
      resolve_params(pp, grid, opts, cache_dir_or_default(args.out_dir), false).first;

  bgs::SolveResult r = bgs::constrained_minimize(grid, p, std::nullopt, opts);
  fs::create_directories(args.out_dir);
  json payload = solve_json(r);
  payload["params"] = params_json(p);
  bgs::write_json(args.out_dir + "/solve.json", bgs::make_report(resolved_config(cfg, opts), payload));
  if (cfg.contains("solve") && cfg.at("solve").value("dump_trace", true))
    write_trace_csv(r, args.out_dir + "/trace.csv");
  else
    write_trace_csv(r, args.out_dir + "/trace.csv");
  if (args.dump_fields) bgs::dump_field(r.state, args.out_dir + "/state.bin", params_json(p));
  std::cout << "solve: " << bgs::verdict_name(r.verdict) << " e=" << r.energy.total
            << " residual=" << r.residual << "\n";
  return r.converged ? kExitOk : kExitNoConverge;
}

int run_one_sweep(const json& cfg, const json& sw, const CommonArgs& args,
                  const bgs::SolverOpts& opts, const std::string& tag) {
  check_keys(sw, "sweep.",
             {"kind", "deltas", "ms", "mus", "betas", "sweep_half_width", "sweep_points",
              "include_mu0_row"});
  const std::string kind = sw.at("kind").get<std::string>();
  bgs::Grid grid = parse_grid(cfg);
  ParsedParams pp = parse_params(cfg, grid.dim());
  const std::string cache = cache_dir_or_default(args.out_dir);

  bgs::Grid start = grid;
  if (sw.contains("sweep_half_width") || sw.contains("sweep_points"))
    start = bgs::Grid::make(grid.dim(), sw.value("sweep_half_width", grid.half_width()),
                            sw.value("sweep_points", grid.points()), grid.dim() == 1);

  auto vecarg = [&](const char* key) {
    if (!sw.contains(key))
      throw std::invalid_argument(std::string("config: sweep needs '") + key + "'");
    return sw.at(key).get<std::vector<double>>();
  };

  fs::create_directories(args.out_dir);
  const std::string base = args.out_dir + "/" + tag;
  json fits = json::object();
  bgs::SweepTable table;
  bool all_converged = true;

  if (kind == "mass_to_critical") {
    auto [p, b] = resolve_params(pp, grid, opts, cache, true);
    auto res = bgs::sweep_mass_to_critical(*b, p, vecarg("deltas"), start, opts);
    table = res.table;
    fits["energy"] = fit_json(res.fit_energy);
    fits["sub_norm"] = fit_json(res.fit_sub);
    fits["tv"] = fit_json(res.fit_tv);
    fits["gamma_formula"] = res.gamma_formula;
    fits["gamma_fitted"] = res.profile.fitted_scale;
    fits["energy_limit_measured"] = res.energy_limit_measured;
    fits["energy_limit_formula"] = res.energy_limit_formula;
    fits["final_profile_distance"] = res.profile.aligned_l2_distance;
    if (args.dump_fields)
      bgs::dump_field(res.profile.rescaled_state, base + "_profile.bin", params_json(p));
  } else if (kind == "m_to_zero") {
    auto [p, b] = resolve_params(pp, grid, opts, cache, true);
    auto res = bgs::sweep_m_to_zero(*b, p, vecarg("ms"), start, opts);
    table = res.table;
    fits["h_min_bound"] = res.h_min_bound;
    fits["tv_bound"] = res.tv_bound;
  } else if (kind == "mu_to_zero_subcritical") {
    auto [p, b] = resolve_params(pp, grid, opts, cache, true);
    auto res = bgs::sweep_mu_to_zero_subcritical(*b, p, vecarg("mus"), start, opts,
                                                 sw.value("include_mu0_row", true));
    table = res.table;
    fits["e0"] = res.e0;
    fits["max_sub_norm"] = res.max_sub_norm;
    fits["final_profile_distance"] = res.profile.aligned_l2_distance;
  } else if (kind == "mu_to_zero_critical") {
    auto [p, b] = resolve_params(pp, grid, opts, cache, true);
    auto res = bgs::sweep_mu_to_zero_critical(*b, p.mass, vecarg("mus"), start, opts);
    table = res.table;
    fits["energy"] = fit_json(res.fit_energy);
    fits["sub_norm"] = fit_json(res.fit_sub);
    fits["tv"] = fit_json(res.fit_tv);
    fits["theta_formula"] = res.theta_formula;
    fits["theta_fitted"] = res.profile.fitted_scale;
    fits["energy_limit_measured"] = res.energy_limit_measured;
    fits["energy_limit_formula"] = res.energy_limit_formula;
    fits["final_profile_distance"] = res.profile.aligned_l2_distance;
  } else if (kind == "beta_to_zero") {
    auto res = bgs::sweep_beta_to_zero(pp.p.mass, pp.p.q_exp, vecarg("betas"), grid, start, opts,
                                       cache);
    table = res.table;
    fits["energy"] = fit_json(res.fit_energy);
    fits["hhalf"] = fit_json(res.fit_hhalf);
    fits["crit_norm"] = fit_json(res.fit_crit);
    fits["eta_formula"] = res.eta_formula;
    fits["eta_fitted"] = res.profile.fitted_scale;
    fits["energy_limit_measured"] = res.energy_limit_measured;
    fits["energy_limit_formula"] = res.energy_limit_formula;
    fits["a_star_beta"] = res.a_star_beta;
    fits["reflection_momentum"] = res.reflection;
    fits["final_profile_distance"] = res.profile.aligned_l2_distance;
  } else {
    throw std::invalid_argument("config: unknown sweep kind '" + kind + "'");
  }

  for (const auto& r : table.rows) all_converged = all_converged && r.converged;
  write_table_csv(table, base + "_table.csv");
  fits["axis"] = table.axis;
  fits["rows"] = table.rows.size();
  fits["all_converged"] = all_converged;
  bgs::write_json(base + "_fits.json", bgs::make_report(resolved_config(cfg, opts), fits));
  std::cout << "sweep " << kind << ": " << table.rows.size() << " rows, "
            << (all_converged ? "all converged" : "with failures") << "\n";
  return all_converged ? kExitOk : kExitNoConverge;
}

int cmd_sweep(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  check_keys(cfg, "", {"grid", "params", "solver", "sweep", "sweeps"});
  bgs::SolverOpts opts = parse_solver(cfg, args.seed, args.has_seed);
  if (cfg.contains("sweep") == cfg.contains("sweeps"))
    throw std::invalid_argument("config: give exactly one of 'sweep' / 'sweeps'");

  if (cfg.contains("sweep")) return run_one_sweep(cfg, cfg.at("sweep"), args, opts, "sweep");

  const json& arr = cfg.at("sweeps");
  if (!arr.is_array()) throw std::invalid_argument("config: 'sweeps' must be an array");
  std::vector<std::future<int>> futs;
  std::vector<int> codes(arr.size(), 0);
  const int workers = std::max(1, args.workers);
  std::size_t next = 0;
  while (next < arr.size()) {
    const std::size_t batch = std::min<std::size_t>(workers, arr.size() - next);
    futs.clear();
    for (std::size_t i = 0; i < batch; ++i) {
      const std::size_t idx = next + i;
      futs.push_back(std::async(std::launch::async, [&, idx]() {
        return run_one_sweep(cfg, arr[idx], args, opts, "sweep" + std::to_string(idx));
      }));
    }
    for (std::size_t i = 0; i < batch; ++i) codes[next + i] = futs[i].get();
    next += batch;
  }
  for (int c : codes)
    if (c != 0) return c;
  return kExitOk;
}

int cmd_bounds(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  check_keys(cfg, "", {"grid", "params", "solver", "bounds"});
  if (!cfg.contains("bounds")) throw std::invalid_argument("config: missing 'bounds'");
  const json& bj = cfg.at("bounds");
  check_keys(bj, "bounds.", {"case_id", "measure", "witness_taus"});
  const std::string case_id = bj.at("case_id").get<std::string>();

  bgs::Grid grid = parse_grid(cfg);
  ParsedParams pp = parse_params(cfg, grid.dim());
  bgs::SolverOpts opts = parse_solver(cfg, args.seed, args.has_seed);
  const std::string cache = cache_dir_or_default(args.out_dir);
  auto [p, bopt] = resolve_params(pp, grid, opts, cache, true);
  const bgs::ReferenceBundle& b = *bopt;

  bgs::BoundReport rep = bgs::theorem1_bounds(case_id, p, b);
  int code = kExitOk;
  json payload;
  payload["case_id"] = rep.case_id;
  payload["lower"] = bgs::finite_or_flag(rep.lower);
  payload["upper"] = bgs::finite_or_flag(rep.upper);
  payload["e_is_zero"] = rep.e_is_zero;
  payload["e_is_minus_infinity"] = rep.e_is_minus_infinity;

  if (bj.value("measure", false)) {
    bgs::SolveResult r = bgs::constrained_minimize(grid, p, std::nullopt, opts);
    if (!r.converged) code = kExitNoConverge;
    bgs::attach_measured_energy(rep, r.energy.total);
    payload["computed_e"] = r.energy.total;
    payload["slack_low"] = bgs::finite_or_flag(rep.slack_low);
    payload["slack_high"] = bgs::finite_or_flag(rep.slack_high);
    payload["pass"] = rep.pass;
    if (!rep.pass) code = kExitNoConverge;
  }

  if (rep.e_is_minus_infinity || rep.e_is_zero) {
    std::vector<double> taus;
    if (bj.contains("witness_taus")) {
      taus = bj.at("witness_taus").get<std::vector<double>>();
    } else if (rep.e_is_minus_infinity) {
      taus = {1.0, 2.0, 4.0, 8.0, 16.0};
    } else {
      taus = {1.0, 0.5, 0.25, 0.125, 0.0625};
    }
    if (case_id == "4i" || case_id == "4ii" || case_id == "4iii" || case_id == "4v") {
      bgs::WitnessTrace tr = bgs::nonexistence_witness(case_id, p, b, taus);
      bgs::CsvWriter csv({"tau", "energy", "resolvable"});
      for (std::size_t i = 0; i < tr.taus.size(); ++i)
        csv.row({tr.taus[i], tr.energies[i], tr.resolvable[i] ? 1.0 : 0.0});
      fs::create_directories(args.out_dir);
      csv.save(args.out_dir + "/witness.csv");
      payload["witness_verdict"] = tr.verdict;
      if (tr.verdict == "indeterminate") code = kExitNoConverge;
    }
  }

  fs::create_directories(args.out_dir);
  bgs::write_json(args.out_dir + "/bounds.json", bgs::make_report(resolved_config(cfg, opts), payload));
  std::cout << "bounds case " << case_id << ": lower=" << rep.lower << " upper=" << rep.upper
            << (rep.computed_e ? (rep.pass ? " PASS" : " FAIL") : "") << "\n";
  return code;
}

int cmd_verify(const CommonArgs& args, const std::string& bundle_path) {
  json cfg = load_config(args.config_path);
  check_keys(cfg, "", {"grid", "params", "solver", "verify"});
  json vj = cfg.contains("verify") ? cfg.at("verify") : json::object();
  check_keys(vj, "verify.", {"random_checks", "fields", "build_bundle"});
  bgs::Grid grid = parse_grid(cfg);
  bgs::SolverOpts opts = parse_solver(cfg, args.seed, args.has_seed);
  ParsedParams pp = parse_params(cfg, grid.dim());

  bool ok = true;
  json report = json::object();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Parseval round-trip on random fields
  {
    const int reps = vj.value("random_checks", 10);
    double worst = 0.0;
    bgs::Grid small = bgs::Grid::make(grid.dim(), grid.half_width(),
                                      std::min(grid.points(), 64), grid.dim() == 1);
    for (int r = 0; r < reps; ++r) {
      std::vector<bgs::cd> vals(small.size());
      for (auto& z : vals) z = bgs::cd(gauss(rng), gauss(rng));
      bgs::Field f(small, vals);
      const auto spec = bgs::fft_forward(small, vals);
      const auto back = bgs::fft_inverse(small, spec);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        num += std::norm(back[i] - vals[i]);
        den += std::norm(vals[i]);
      }
      worst = std::max(worst, std::sqrt(num / den));
      const double pd = std::abs(bgs::spectral_mass(f) - bgs::mass(f)) / bgs::mass(f);
      worst = std::max(worst, pd);
    }
    report["parseval_roundtrip_worst"] = worst;
    if (worst > 1e-12) ok = false;
  }

  // gradient versus central finite differences
  {
    bgs::Grid small = bgs::Grid::make(grid.dim(), 8.0, 32, grid.dim() == 1);
    bgs::Params p = pp.p;
    p.target_mass = 1.0;
    double worst = 0.0;
    for (int r = 0; r < 5; ++r) {
      auto bump = [&](double w) {
        std::vector<bgs::cd> vals(small.size());
        const double cx = 2.0 * gauss(rng) * 0.3, cy = 2.0 * gauss(rng) * 0.3;
        bgs::for_each_point(small, [&](std::size_t i, const double* x) {
          double xx = (x[0] - cx) * (x[0] - cx);
          if (small.dim() > 1) xx += (x[1] - cy) * (x[1] - cy);
          if (small.dim() > 2) xx += x[2] * x[2];
          vals[i] = std::exp(-xx / (2.0 * w * w)) * bgs::cd(gauss(rng) * 0.1 + 1.0, gauss(rng) * 0.1);
        });
        return bgs::Field(small, vals);
      };
      bgs::Field f = bump(1.1);
      bgs::Field h = bump(0.9);
      bgs::Field g = bgs::energy_gradient(f, p);
      const double dir = bgs::inner_real(g, h);
      const double eps = 1e-5;
      auto shifted = [&](double s) {
        std::vector<bgs::cd> vals(f.values());
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] += s * h.values()[i];
        return bgs::energy(bgs::Field(small, vals), p).total;
      };
      const double fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
      worst = std::max(worst, std::abs(fd - dir) / std::max(1.0, std::abs(dir)));
    }
    report["gradient_fd_worst"] = worst;
    if (worst > 1e-5) ok = false;
  }

  // bundle checks: Pohozaev, GN saturation, closed-form vs golden-section oracle CSV
  std::string bpath = bundle_path;
  if (!bpath.empty() || vj.value("build_bundle", false)) {
    bgs::ReferenceBundle b = [&]() {
      if (!bpath.empty()) {
        const auto key = bgs::bundle_cache_key(grid, pp.p.velocity, pp.p.q_exp, opts.tol);
        auto loaded = bgs::load_bundle(grid, bpath, key);
        if (loaded) return *loaded;
      }
      return bgs::build_reference_cached(grid, pp.p.velocity, pp.p.q_exp, opts,
                                         cache_dir_or_default(args.out_dir));
    }();
    auto [r1, r2] = bgs::pohozaev_residuals(b.Qv, b.v);
    report["pohozaev_r1"] = r1;
    report["pohozaev_r2"] = r2;
    if (r1 > 1e-4 || r2 > 1e-4) ok = false;
    const double ratio = bgs::verify_gn(b.Qv, b, bgs::GnKind::critical);
    report["gn_ratio_qv"] = ratio;
    if (ratio < 0.999 || ratio > 1.001) ok = false;
  }

  // field dumps: finiteness + Parseval consistency
  if (vj.contains("fields")) {
    json checks = json::array();
    for (const auto& item : vj.at("fields")) {
      const std::string path = item.get<std::string>();
      json c;
      c["path"] = path;
      try {
        bgs::Field f = bgs::load_field(path);
        bool fin = bgs::all_finite(f);
        double rel = 0.0;
        if (fin) {
          const double pm = bgs::mass(f);
          rel = pm > 0.0 ? std::abs(bgs::spectral_mass(f) - pm) / pm : 0.0;
        }
        c["finite"] = fin;
        c["parseval_rel"] = rel;
        const bool good = fin && rel <= 1e-12;
        c["ok"] = good;
        if (!good) ok = false;
      } catch (const std::exception& e) {
        c["ok"] = false;
        c["error"] = e.what();
        ok = false;
      }
      checks.push_back(c);
    }
    report["fields"] = checks;
  }

  // closed forms vs golden-section oracle
  {
    bgs::CsvWriter csv({"kind", "formula_value", "oracle_value", "diff"});
    std::uniform_real_distribution<double> unif(0.2, 3.0);
    double worst = 0.0;
    for (int kind = 1; kind <= 4; ++kind) {
      for (int r = 0; r < 25; ++r) {
        const double a = unif(rng), bb = unif(rng);
        const double e = (kind == 2 ? 0.9 : 0.8) * (2.0 / grid.dim());
        const auto cf = bgs::g_min(kind, a, bb, grid.dim(), e);
        const double ne = grid.dim() * e;
        auto g = [&](double t) {
          switch (kind) {
            case 1: return a * t - bb * std::pow(t, 0.5 * ne);
            case 2: return a / t + bb * std::pow(t, 0.5 * ne);
            case 3: return a * std::pow(t, 2.0 - 0.5 * ne) - bb * std::pow(t, 1.0 - 0.5 * ne);
            default: return a * t + bb * std::pow(t, -0.5 * ne);
          }
        };
        const auto or_ = bgs::golden_min_log(g);
        csv.row({static_cast<double>(kind), cf.value, or_.value, cf.value - or_.value});
        worst = std::max(worst, std::abs(cf.value - or_.value));
      }
    }
    fs::create_directories(args.out_dir);
    csv.save(args.out_dir + "/oracle_comparison.csv");
    report["gmin_oracle_worst_abs"] = worst;
    if (worst > 1e-10) ok = false;
  }

  report["ok"] = ok;
  bgs::write_json(args.out_dir + "/verify.json", bgs::make_report(resolved_config(cfg, opts), report));
  std::cout << "verify: " << (ok ? "all invariants hold" : "FAILURES detected") << "\n";
  return ok ? kExitOk : kExitUsage;
}

int cmd_report(const std::string& out_dir) {
  if (!fs::is_directory(out_dir)) {
    std::cerr << "report: not a directory: " << out_dir << "\n";
    return kExitUsage;
  }
  json summary = json::object();
  summary["format_version"] = bgs::kFormatVersion;
  json files = json::object();
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.path().extension() != ".json") continue;
    const std::string name = entry.path().filename().string();
    if (name == "report.json") continue;
    try {
      std::ifstream in(entry.path());
      json j = json::parse(in);
      if (j.contains("result"))
        files[name] = j.at("result");
    } catch (...) {
      files[name] = "unparseable";
    }
  }
  summary["artifacts"] = files;
  bgs::write_json(out_dir + "/report.json", summary);
  std::cout << "report: " << files.size() << " artifacts summarized into report.json\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral lab for boosted ground states"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string bundle_path;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    if (need_config)
      sub->add_option("--config", args.config_path, "JSON config path")->required();
    sub->add_option("--out", args.out_dir, "output directory");
    auto* seed_opt = sub->add_option("--seed", args.seed, "RNG seed override");
    sub->add_option("--workers", args.workers, "worker count for parallel sweeps");
    sub->add_flag("--dump-fields", args.dump_fields, "write binary field dumps");
    sub->parse_complete_callback([&args, seed_opt]() { args.has_seed = seed_opt->count() > 0; });
  };

  auto* ref = app.add_subcommand("reference", "build the canonical reference bundle");
  add_common(ref, true);
  auto* solve = app.add_subcommand("solve", "run the constrained minimization");
  add_common(solve, true);
  auto* sweep = app.add_subcommand("sweep", "run parameter sweeps with fits");
  add_common(sweep, true);
  auto* bounds = app.add_subcommand("bounds", "evaluate bound sandwiches and witnesses");
  add_common(bounds, true);
  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  add_common(verify, true);
  verify->add_option("--bundle", bundle_path, "reference bundle cache directory");
  auto* report = app.add_subcommand("report", "summarize artifacts in the output directory");
  report->add_option("--out", args.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ref->parsed()) return cmd_reference(args);
    if (solve->parsed()) return cmd_solve(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (bounds->parsed()) return cmd_bounds(args);
    if (verify->parsed()) return cmd_verify(args, bundle_path);
    if (report->parsed()) return cmd_report(args.out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string msg = e.what();
    if (msg.find("solve failed") != std::string::npos ||
        msg.find("reference") != std::string::npos)
      return kExitNoConverge;
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
