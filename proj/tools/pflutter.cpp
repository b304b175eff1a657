// pflutter command line: simulate, equilibria, flow, probe, check, sweep.
#include "pflutter/config.hpp"
#include "pflutter/diagnostics.hpp"
#include "pflutter/equilibria.hpp"
#include "pflutter/flow.hpp"
#include "pflutter/io.hpp"
#include "pflutter/probes.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include "invariants.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace pflutter;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct SimSummary {
  double t = 0.0;
  EnergyReport last;
  bool aborted = false;
  std::string error;
};

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path);
  os << text;
}

std::vector<double> energy_row(const EnergyReport& e) {
  return {e.t,  e.E_pl,       e.E_star,     e.Pi_star,        e.V,
          e.ke, e.ut_l2alpha, e.diss_accum, e.power_residual, e.u_center};
}

const std::vector<std::string> kSeriesColumns = {"t",  "E_pl",       "E_star",     "Pi_star",        "V",
                                                  "ke", "ut_l2alpha", "diss_accum", "power_residual", "u_center"};

SimSummary simulate(const SimConfig& c, const std::string& resume, bool quiet) {
  RunManifest man;
  man.start_time = utc_timestamp();
  man.config_hash = c.hash;
  man.code_version = code_version();
  man.seed = c.seed;
  const std::string dir = c.out_dir;
  fs::create_directories(dir);

  Integrator it(c.grid, c.phys, c.quad, c.dt);
  const std::string ck = !resume.empty() ? resume : c.prehistory_checkpoint;
  if (!ck.empty())
    restore_checkpoint(it, read_checkpoint(ck));
  else
    it.initialize(c.u0, c.u1, 0.0, c.prehistory);

  write_text(dir + "/config.effective.json", json::parse(c.canonical).dump(2) + "\n");
  man.outputs.push_back(dir + "/config.effective.json");
  CsvWriter csv(dir + "/timeseries.csv", kSeriesColumns);
  man.outputs.push_back(csv.path());

  SimSummary sum;
  const long nsteps = std::max(0L, std::lround((c.horizon - it.state().t) / c.dt));
  auto snap = [&](const std::string& name) {
    const std::string p = dir + "/" + name;
    write_snapshot_file(p, {c.grid, it.state().t, it.state().u});
    man.outputs.push_back(p);
  };
  auto checkpoint = [&](const std::string& name) {
    const std::string p = dir + "/" + name;
    write_checkpoint(p, make_checkpoint(it));
    man.outputs.push_back(p);
  };
  EnergyReport e = energy_report(it, c.weights);
  csv.row(energy_row(e));
  try {
    for (long n = 1; n <= nsteps; ++n) {
      it.advance();
      if (n % c.cadence == 0 || n == nsteps) {
        e = energy_report(it, c.weights);
        csv.row(energy_row(e));
        if (!quiet)
          std::fprintf(stderr, "t=%.4f E*=%.6e |u_t|=%.3e diss=%.6e\n", e.t, e.E_star, e.ut_l2alpha,
                       e.diss_accum);
      }
      if (c.snapshot_every > 0 && n % c.snapshot_every == 0)
        snap("u_" + std::to_string(it.counters().step) + ".pflb");
      if (c.checkpoint_every > 0 && n % c.checkpoint_every == 0)
        checkpoint("checkpoint_" + std::to_string(it.counters().step) + ".pfck");
    }
  } catch (const InstabilityError& ex) {
    sum.aborted = true;
    sum.error = ex.what();
    std::fprintf(stderr, "aborted: %s\n", ex.what());
  }
  e = energy_report(it, c.weights);
  snap("u_final.pflb");
  {
    const std::string p = dir + "/v_final.pflb";
    write_snapshot_file(p, {c.grid, it.state().t, it.state().v});
    man.outputs.push_back(p);
  }
  checkpoint("checkpoint.pfck");
  man.end_time = utc_timestamp();
  man.outputs.push_back(dir + "/manifest.json");
  write_manifest(dir + "/manifest.json", man);
  sum.t = it.state().t;
  sum.last = e;
  return sum;
}

// "name:from:to:steps"
struct SweepSpec {
  std::string name;
  double from = 0, to = 0;
  int steps = 0;
};

SweepSpec parse_sweep(const std::string& s) {
  SweepSpec sp;
  std::stringstream ss(s);
  std::string a, b, c, d;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c, ':') ||
      !std::getline(ss, d))
    throw std::invalid_argument("sweep must look like beta:0:3:60");
  sp.name = a;
  sp.from = std::stod(b);
  sp.to = std::stod(c);
  sp.steps = std::stoi(d);
  if (sp.name != "beta" && sp.name != "U") throw std::invalid_argument("sweep family must be beta or U");
  if (sp.steps < 1) throw std::invalid_argument("sweep steps must be >= 1");
  return sp;
}

int cmd_equilibria(const SimConfig& c, const std::string& sweep_arg) {
  const std::string sweep = sweep_arg.empty() ? c.equilibria.sweep : sweep_arg;
  fs::create_directories(c.out_dir);
  RunManifest man;
  man.start_time = utc_timestamp();
  man.config_hash = c.hash;
  man.code_version = code_version();
  man.seed = c.seed;
  if (!sweep.empty()) {
    const SweepSpec sp = parse_sweep(sweep);
    const auto pts = continuation_sweep(sp.name == "beta" ? SweepFamily::Beta : SweepFamily::U, sp.from,
                                        sp.to, sp.steps, c.phys, c.grid, c.quad, c.equilibria.newton);
    CsvWriter csv(c.out_dir + "/branches.csv",
                  {"param", "norm_u2", "residual", "iterations", "smallest_eig", "branch", "converged"});
    for (const auto& p : pts)
      csv.row({p.param, p.norm_u2, p.residual, static_cast<double>(p.iterations), p.smallest_eig,
               static_cast<double>(p.branch), p.converged ? 1.0 : 0.0});
    man.outputs.push_back(csv.path());
    std::cout << "wrote " << pts.size() << " branch points to " << csv.path() << "\n";
  } else {
    const StationaryProblem prob(c.grid, c.phys, c.quad);
    const PlateField guess = field_from_spec(c.equilibria.guess, c.grid, c.seed + 2, true, "equilibria.guess");
    EquilibriumResult r = prob.newton(guess, c.equilibria.newton);
    r.smallest_eig = prob.leftmost_eig(r.u_bar).value;
    const std::string p = c.out_dir + "/u_bar.pflb";
    write_snapshot_file(p, {c.grid, 0.0, r.u_bar});
    man.outputs.push_back(p);
    json j = {{"converged", r.converged},
              {"residual_norm", r.residual_norm},
              {"iterations", r.iterations},
              {"norm_u2", seminorm_h2(r.u_bar, c.grid)},
              {"smallest_eig", *r.smallest_eig},
              {"message", r.message}};
    if (c.phys.U == 0.0) {
      const BucklingResult b = buckling_critical_load(c.grid);
      j["buckling_lambda1"] = b.lambda1;
      j["buckling_beta0"] = b.beta0;
    }
    write_text(c.out_dir + "/equilibrium.json", j.dump(2) + "\n");
    man.outputs.push_back(c.out_dir + "/equilibrium.json");
    std::cout << j.dump(2) << "\n";
    if (!r.converged) {
      man.end_time = utc_timestamp();
      write_manifest(c.out_dir + "/manifest.json", man);
      return 1;
    }
  }
  man.end_time = utc_timestamp();
  man.outputs.push_back(c.out_dir + "/manifest.json");
  write_manifest(c.out_dir + "/manifest.json", man);
  return 0;
}

std::vector<double> parse_list(const std::string& s, size_t n, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  if (v.size() != n) throw std::invalid_argument(std::string(what) + " expects " + std::to_string(n) + " values");
  return v;
}

int cmd_flow(const std::string& ckpath, const std::string& box_s, const std::string& n_s,
             double t_arg, double U, QuadratureSpec quad, const std::string& out) {
  const Checkpoint ck = read_checkpoint(ckpath);
  const HistoryBuffer h = checkpoint_history(ck);
  const double ts = escape_time(h.grid(), U);
  if (std::abs(ts - ck.t_star) > 1e-9 * ts)
    throw std::invalid_argument("--U does not match the checkpoint (t_star " + format_double(ck.t_star) + ")");
  const auto b = parse_list(box_s, 6, "--box");
  const auto n = parse_list(n_s, 3, "--n");
  const FlowHistory fh(h);
  const double t = std::isnan(t_arg) ? fh.t_newest() : t_arg;
  FlowSampleSet s = box_samples({b[0], b[1], b[2], b[3], b[4], b[5]}, static_cast<int>(n[0]),
                                static_cast<int>(n[1]), static_cast<int>(n[2]), t);
  reconstruct(fh, s, U, ts, quad);
  fs::create_directories(out);
  CsvWriter csv(out + "/flow.csv", {"x1", "x2", "x3", "phi", "phi_t", "phi_x1", "phi_x2", "phi_x3"});
  for (size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    const auto& g = s.grad_phi[i];
    csv.row({p.x1, p.x2, p.x3, s.phi[i], s.phi_t[i], g[0], g[1], g[2]});
  }
  if (s.nx >= 5 && s.ny >= 5 && b[1] > b[0] && b[3] > b[2]) {
    // one file per component, nz PFLB records (one per x3 layer, lowest first)
    const GridSpec lg = GridSpec::make(b[1] - b[0], b[3] - b[2], s.nx, s.ny);
    const char* names[] = {"phi", "phi_t", "phi_x1", "phi_x2", "phi_x3"};
    for (int c = 0; c < 5; ++c) {
      std::ofstream os(out + "/" + names[c] + ".pflb", std::ios::binary);
      for (int l = 0; l < s.nz; ++l) {
        PlateField f(lg.size());
        for (int i = 0; i < s.nx; ++i)
          for (int j = 0; j < s.ny; ++j) {
            const int k = (i * s.ny + j) * s.nz + l;
            f[lg.idx(i, j)] = c == 0 ? s.phi[k] : c == 1 ? s.phi_t[k] : s.grad_phi[k][c - 2];
          }
        write_snapshot(os, {lg, t, f});
      }
    }
  } else {
    std::cerr << "box layer smaller than 5x5: PFLB component files skipped\n";
  }
  PlateState ps{h.newest().t, h.newest().u, ck.velocity.values};
  const FlowEnergyBox e = flow_energy_box(s, ps, U, h.grid());
  std::cout << json{{"t", t}, {"points", s.points.size()}, {"E_fl_box", e.E_fl}, {"E_int_box", e.E_int}}.dump(2)
            << "\n";
  return 0;
}

json report_json(const ProbeReport& r) {
  json c = json::object();
  for (const auto& [k, v] : r.constants) c[k] = v;
  return {{"kind", r.kind},
          {"pass", r.pass},
          {"constants", c},
          {"fit_ratio", r.fit_ratio},
          {"held_out_checked", r.held_out_checked},
          {"held_out_pass", r.held_out_pass},
          {"held_out_ratio", r.held_out_ratio},
          {"note", r.note}};
}

int cmd_probe(const std::string& kind, const SimConfig& c) {
  const ProbeSettings& ps = c.probe;
  RunSpec base = c.run_spec();
  const double ts = escape_time(c.grid, c.phys.U);
  base.horizon = ps.horizon_over_tstar * ts;
  base.sample_every = ps.sample_every;
  auto pair = [&](std::uint64_t seed) {
    DataPair d;
    d.u0a = random_smooth(c.grid, ps.amp, seed);
    d.u1a = zeros(c.grid);
    d.u0b = d.u0a + random_smooth(c.grid, ps.perturb, seed + 7);
    d.u1b = random_smooth(c.grid, ps.perturb, seed + 9);
    return d;
  };
  const DataPair fit = pair(c.seed), held = pair(c.seed + ps.held_out_seed_offset);
  ProbeReport r;
  if (kind == "lipschitz") {
    r = lipschitz_probe(base, fit, &held);
  } else if (kind == "quasi") {
    r = quasistability_probe(base, fit, &held, ps.T_over_tstar * ts, ps.delta);
  } else if (kind == "lyapunov") {
    const std::pair<PlateField, PlateField> a{fit.u0a, fit.u1a}, b{held.u0a, held.u1a};
    r = lyapunov_probe(base, a, &b);
  } else {
    throw std::invalid_argument("probe kind must be lipschitz, quasi or lyapunov");
  }
  const json j = report_json(r);
  fs::create_directories(c.out_dir);
  write_text(c.out_dir + "/probe_" + kind + ".json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return r.pass && (!r.held_out_checked || r.held_out_pass) ? 0 : 1;
}

void set_path(json& root, const std::string& path, const json& value) {
  json* cur = &root;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!cur->contains(parts[i])) (*cur)[parts[i]] = json::object();
    cur = &(*cur)[parts[i]];
  }
  (*cur)[parts.back()] = value;
}

int cmd_sweep(const std::string& cfg_path, const std::string& key, const std::string& range) {
  json base = json::parse(read_text(cfg_path));
  std::stringstream ss(range);
  std::string a, b, n;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
    throw std::invalid_argument("--range must look like from:to:count");
  const double from = std::stod(a), to = std::stod(b);
  const int cnt = std::stoi(n);
  if (cnt < 1) throw std::invalid_argument("sweep count must be >= 1");
  const SimConfig c0 = parse_config(base.dump());
  fs::create_directories(c0.out_dir);
  CsvWriter csv(c0.out_dir + "/sweep.csv",
                {"value", "t_final", "E_star", "ut_l2alpha", "diss_accum", "power_residual", "aborted"});
  for (int i = 0; i < cnt; ++i) {
    const double v = cnt == 1 ? from : from + (to - from) * i / (cnt - 1);
    json j = base;
    set_path(j, key, v);
    set_path(j, "output.dir", c0.out_dir + "/run_" + std::to_string(i));
    const SimConfig c = parse_config(j.dump());
    const SimSummary s = simulate(c, "", true);
    csv.row({v, s.t, s.last.E_star, s.last.ut_l2alpha, s.last.diss_accum, s.last.power_residual,
             s.aborted ? 1.0 : 0.0});
    std::printf("%s = %.6g: E*=%.6e |u_t|=%.3e%s\n", key.c_str(), v, s.last.E_star, s.last.ut_l2alpha,
                s.aborted ? " (aborted)" : "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pflutter: subsonic panel flutter laboratory"};
  app.footer(config_help());
  app.require_subcommand(1);

  std::string cfg, resume, sweep, ckpath, box, nstr = "5,5,5", kind, key, range;
  double t_flow = std::nan(""), U_flow = 0.0;
  int n_theta = 32, n_s = 256;
  bool quiet = false;
  std::string out = "flow_out";

  auto* sim = app.add_subcommand("simulate", "integrate the reduced plate equation");
  sim->add_option("--config", cfg, "JSON config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--resume", resume, "checkpoint to resume from (horizon is the absolute final time)");
  sim->add_flag("--quiet", quiet, "no progress lines");

  auto* eq = app.add_subcommand("equilibria", "Newton equilibria or continuation sweeps");
  eq->add_option("--config", cfg, "JSON config file")->required()->check(CLI::ExistingFile);
  eq->add_option("--sweep", sweep, "continuation, e.g. beta:0:3:60 or U:0:0.9:18");

  auto* fl = app.add_subcommand("flow", "reconstruct the flow potential from a checkpoint history");
  fl->add_option("--checkpoint", ckpath, "checkpoint file")->required()->check(CLI::ExistingFile);
  fl->add_option("--box", box, "x0,x1,y0,y1,z0,z1")->required();
  fl->add_option("--n", nstr, "sample counts nx,ny,nz");
  fl->add_option("--t", t_flow, "evaluation time (default: newest history time)");
  fl->add_option("--U", U_flow, "flow speed of the run that wrote the checkpoint");
  fl->add_option("--n-theta", n_theta, "angular quadrature nodes");
  fl->add_option("--n-s", n_s, "retarded-time quadrature nodes");
  fl->add_option("--out", out, "output directory");

  auto* pr = app.add_subcommand("probe", "Lipschitz, quasi-stability and Lyapunov probes");
  pr->add_option("kind", kind, "lipschitz | quasi | lyapunov")->required();
  pr->add_option("--config", cfg, "JSON config file")->required()->check(CLI::ExistingFile);

  auto* ch = app.add_subcommand("check", "invariant suite on small grids (exit 0 when all pass)");

  auto* sw = app.add_subcommand("sweep", "simulate over a range of one config key");
  sw->add_option("--config", cfg, "base JSON config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--key", key, "dotted numeric key, e.g. phys.U")->required();
  sw->add_option("--range", range, "from:to:count")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) {
      const SimSummary s = simulate(load_config_file(cfg), resume, quiet);
      return s.aborted ? 2 : 0;
    }
    if (*eq) return cmd_equilibria(load_config_file(cfg), sweep);
    if (*fl) {
      QuadratureSpec q{n_theta, n_s};
      q.validate();
      return cmd_flow(ckpath, box, nstr, t_flow, U_flow, q, out);
    }
    if (*pr) return cmd_probe(kind, load_config_file(cfg));
    if (*ch) return run_invariant_suite(std::cout) ? 0 : 1;
    if (*sw) return cmd_sweep(cfg, key, range);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
