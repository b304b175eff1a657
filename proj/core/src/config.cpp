#include "pflutter/config.hpp"

#include "pflutter/io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace pflutter {

using nlohmann::json;

namespace {

struct KeyDoc {
  const char* path;
  const char* def;
  const char* doc;
};

// single table behind both validation and --help
const KeyDoc kKeys[] = {
    {"grid.lx", "1.0", "plate length in x1"},
    {"grid.ly", "1.0", "plate length in x2"},
    {"grid.nx", "33", "nodes in x1 including the boundary (>= 5)"},
    {"grid.ny", "33", "nodes in x2 including the boundary (>= 5)"},
    {"phys.U", "0.0", "flow speed, must lie in [0,1) (subsonic)"},
    {"phys.alpha", "0.1", "rotational inertia, > 0"},
    {"phys.k", "0.1", "structural damping, >= 0"},
    {"loads.p0", "\"zero\"", "pressure profile (see profiles below)"},
    {"loads.F0", "\"zero\"", "in-plane stress function profile"},
    {"time.dt", "0.01", "time step, > 0"},
    {"time.horizon", "10.0", "final time, >= 0"},
    {"quad.n_theta", "32", "angular nodes of the delay quadrature (even, >= 8)"},
    {"quad.n_s", "64", "retarded-time nodes on [0,t*] (>= 16)"},
    {"prehistory", "\"constant\"", "\"constant\" (u0 on [-t*,0)), \"zero\", or \"checkpoint:<path>\""},
    {"initial.u0", "\"zero\"", "initial deflection profile (clamped)"},
    {"initial.u1", "\"zero\"", "initial velocity profile (clamped)"},
    {"seed", "0", "seed for random profiles"},
    {"output.dir", "\"out\"", "output directory"},
    {"output.cadence", "10", "steps between time-series rows"},
    {"output.snapshot_every", "0", "steps between PFLB snapshots (0: final only)"},
    {"output.checkpoint_every", "0", "steps between checkpoints (0: final only)"},
    {"lyapunov.nu", "0.01", "weight of the cross terms in V"},
    {"lyapunov.mu", "0.01", "weight of the memory double integral in V"},
    {"probe.amp", "0.05", "peak amplitude of the random base data"},
    {"probe.perturb", "0.005", "peak amplitude of the random in-pair difference"},
    {"probe.held_out_seed_offset", "1000", "seed offset of the held-out pair"},
    {"probe.T_over_tstar", "4.0", "quasi-stability window T in units of t*"},
    {"probe.horizon_over_tstar", "8.0", "probe run length in units of t*"},
    {"probe.delta", "0.5", "interpolation index of the lower-order norm, in (0,1)"},
    {"probe.sample_every", "5", "steps between probe samples"},
    {"equilibria.tol", "1e-10", "Newton tolerance on ||G|| / (1 + ||p0||)"},
    {"equilibria.max_iter", "50", "Newton iteration cap"},
    {"equilibria.inner_tol", "1e-8", "GMRES relative tolerance"},
    {"equilibria.guess", "\"zero\"", "Newton initial guess profile"},
    {"equilibria.sweep", "\"\"", "continuation \"beta:from:to:steps\" or \"U:from:to:steps\""},
};

void reject_unknown(const json& j, const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    bool known = false, is_section = false;
    for (const auto& k : kKeys) {
      const std::string kp = k.path;
      if (kp == path) known = true;
      if (kp.rfind(path + ".", 0) == 0) is_section = true;
    }
    if (is_section) {
      if (!it.value().is_object()) throw ConfigError(path, "must be an object");
      reject_unknown(it.value(), path);
    } else if (!known) {
      throw ConfigError(path, "unknown key");
    }
  }
}

const json* find(const json& root, const std::string& path) {
  const json* cur = &root;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &(*cur)[part];
  }
  return cur;
}

double get_num(const json& root, const std::string& path, double def) {
  const json* v = find(root, path);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError(path, "must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

long get_int(const json& root, const std::string& path, long def) {
  const json* v = find(root, path);
  if (!v) return def;
  if (!v->is_number_integer()) throw ConfigError(path, "must be an integer");
  return v->get<long>();
}

std::string num_str(double x) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", x);
  return b;
}

// string, number or {"name": args} -> profile spec string
std::string get_profile(const json& root, const std::string& path, const std::string& def) {
  const json* v = find(root, path);
  if (!v) return def;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number()) return "constant:" + num_str(v->get<double>());
  if (v->is_object() && v->size() == 1) {
    const std::string name = v->begin().key();
    const json& a = v->begin().value();
    if (a.is_number()) return name + ":" + num_str(a.get<double>());
    if (name == "gaussian" && a.is_object()) {
      for (auto it = a.begin(); it != a.end(); ++it)
        if (it.key() != "cx" && it.key() != "cy" && it.key() != "sigma" && it.key() != "amp")
          throw ConfigError(path + ".gaussian." + it.key(), "unknown key");
      auto f = [&](const char* k) {
        if (!a.contains(k) || !a[k].is_number()) throw ConfigError(path + ".gaussian." + k, "required number");
        return num_str(a[k].get<double>());
      };
      return "gaussian:" + f("cx") + "," + f("cy") + "," + f("sigma") + "," + f("amp");
    }
    if (name == "mode" && a.is_array() && a.size() == 3) {
      return "mode:" + num_str(a[0].get<double>()) + "," + num_str(a[1].get<double>()) + "," +
             num_str(a[2].get<double>());
    }
  }
  throw ConfigError(path, "unrecognized profile");
}

std::vector<double> parse_args(const std::string& s, size_t n, const std::string& path) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(path, "bad profile argument '" + tok + "'");
    }
  }
  if (out.size() != n) throw ConfigError(path, "profile expects " + std::to_string(n) + " argument(s)");
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

PlateField random_smooth(const GridSpec& g, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double c[4][4];
  for (auto& row : c)
    for (double& x : row) x = uni(rng);
  PlateField f = sample(g, [&](double x, double y) {
    const double a = x / g.lx, b = y / g.ly;
    const double win = std::pow(4.0 * a * (1.0 - a), 2) * std::pow(4.0 * b * (1.0 - b), 2);
    double s = 0.0;
    for (int i = 1; i <= 4; ++i)
      for (int j = 1; j <= 4; ++j)
        s += c[i - 1][j - 1] / (i * i * j * j) * std::sin(i * std::numbers::pi * a) *
             std::sin(j * std::numbers::pi * b + 0.5 * j);
    return win * s;
  });
  zero_boundary(f, g);
  const double m = f.cwiseAbs().maxCoeff();
  if (m > 0.0) f *= amp / m;
  return f;
}

PlateField field_from_spec(const std::string& spec, const GridSpec& g, std::uint64_t seed,
                           bool clamped, const std::string& path) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  PlateField f;
  bool is_clamped_profile = true;
  if (spec == "zero") {
    f = zeros(g);
  } else if (name == "constant") {
    const double c = parse_args(args, 1, path)[0];
    f = PlateField::Constant(g.size(), c);
    is_clamped_profile = c == 0.0;
  } else if (name == "radial_beta") {
    f = LoadSet::radial_beta(g, parse_args(args, 1, path)[0]).F0;
    is_clamped_profile = false;
  } else if (name == "bump") {
    f = parse_args(args, 1, path)[0] * clamped_bump(g);
  } else if (name == "random") {
    f = random_smooth(g, parse_args(args, 1, path)[0], seed);
  } else if (name == "gaussian") {
    const auto a = parse_args(args, 4, path);
    if (!(a[2] > 0.0)) throw ConfigError(path, "gaussian sigma must be positive");
    f = sample(g, [&](double x, double y) {
      return a[3] * std::exp(-((x - a[0]) * (x - a[0]) + (y - a[1]) * (y - a[1])) / (2.0 * a[2] * a[2]));
    });
    is_clamped_profile = false;
  } else if (name == "mode") {
    const auto a = parse_args(args, 3, path);
    const PlateField w = clamped_bump(g);
    f = sample(g, [&](double x, double y) {
      return a[2] * std::sin(a[0] * std::numbers::pi * x / g.lx) * std::sin(a[1] * std::numbers::pi * y / g.ly);
    });
    f = f.cwiseProduct(w);
  } else {
    SnapshotRecord r;
    try {
      r = read_snapshot_file(spec);
    } catch (const std::exception& e) {
      throw ConfigError(path, "not a known profile and not a readable snapshot: " + std::string(e.what()));
    }
    if (!r.grid.same_as(g)) throw ConfigError(path, "snapshot grid differs from the configured grid");
    f = r.values;
    is_clamped_profile = is_clamped(f, g);
  }
  if (clamped && !is_clamped_profile) throw ConfigError(path, "profile must vanish on the boundary");
  if (clamped) zero_boundary(f, g);
  if (!f.allFinite()) throw ConfigError(path, "profile has non-finite values");
  return f;
}

RunSpec SimConfig::run_spec() const {
  RunSpec r;
  r.grid = grid;
  r.phys = phys;
  r.quad = quad;
  r.dt = dt;
  r.horizon = horizon;
  r.prehistory = prehistory;
  r.u0 = u0;
  r.u1 = u1;
  r.sample_every = cadence;
  r.weights = weights;
  return r;
}

SimConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<document>", "top level must be an object");
  reject_unknown(root, "");

  SimConfig c;
  const long nx = get_int(root, "grid.nx", 33), ny = get_int(root, "grid.ny", 33);
  const double lx = get_num(root, "grid.lx", 1.0), ly = get_num(root, "grid.ly", 1.0);
  if (nx < 5 || nx > 4097) throw ConfigError("grid.nx", "must lie in [5, 4097]");
  if (ny < 5 || ny > 4097) throw ConfigError("grid.ny", "must lie in [5, 4097]");
  if (!(lx > 0.0)) throw ConfigError("grid.lx", "must be positive");
  if (!(ly > 0.0)) throw ConfigError("grid.ly", "must be positive");
  c.grid = GridSpec::make(lx, ly, static_cast<int>(nx), static_cast<int>(ny));

  c.phys.U = get_num(root, "phys.U", 0.0);
  if (!(c.phys.U >= 0.0 && c.phys.U < 1.0))
    throw ConfigError("phys.U", "must lie in [0,1): the model assumes subsonic flow");
  c.phys.alpha = get_num(root, "phys.alpha", 0.1);
  if (!(c.phys.alpha > 0.0)) throw ConfigError("phys.alpha", "must be positive (rotational inertia model)");
  c.phys.k = get_num(root, "phys.k", 0.1);
  if (!(c.phys.k >= 0.0)) throw ConfigError("phys.k", "must be nonnegative");

  c.seed = static_cast<std::uint64_t>(get_int(root, "seed", 0));
  if (get_int(root, "seed", 0) < 0) throw ConfigError("seed", "must be nonnegative");

  c.p0_spec = get_profile(root, "loads.p0", "zero");
  c.F0_spec = get_profile(root, "loads.F0", "zero");
  c.phys.loads.p0 = field_from_spec(c.p0_spec, c.grid, c.seed + 11, false, "loads.p0");
  c.phys.loads.F0 = field_from_spec(c.F0_spec, c.grid, c.seed + 13, false, "loads.F0");
  try {
    c.phys.loads.validate(c.grid);
  } catch (const std::exception& e) {
    throw ConfigError("loads", e.what());
  }

  c.dt = get_num(root, "time.dt", 0.01);
  if (!(c.dt > 0.0)) throw ConfigError("time.dt", "must be positive");
  c.horizon = get_num(root, "time.horizon", 10.0);
  if (!(c.horizon >= 0.0)) throw ConfigError("time.horizon", "must be nonnegative");

  c.quad.n_theta = static_cast<int>(get_int(root, "quad.n_theta", 32));
  c.quad.n_s = static_cast<int>(get_int(root, "quad.n_s", 64));
  if (c.quad.n_theta < 8 || c.quad.n_theta % 2) throw ConfigError("quad.n_theta", "must be an even integer >= 8");
  if (c.quad.n_s < 16) throw ConfigError("quad.n_s", "must be >= 16");

  if (const json* v = find(root, "prehistory")) {
    if (!v->is_string()) throw ConfigError("prehistory", "must be a string");
    const std::string s = v->get<std::string>();
    if (s == "constant") {
      c.prehistory = Prehistory::Constant;
    } else if (s == "zero") {
      c.prehistory = Prehistory::Zero;
    } else if (s.rfind("checkpoint:", 0) == 0 && s.size() > 11) {
      c.prehistory_checkpoint = s.substr(11);
    } else {
      throw ConfigError("prehistory", "expected \"constant\", \"zero\" or \"checkpoint:<path>\"");
    }
  }

  c.u0_spec = get_profile(root, "initial.u0", "zero");
  c.u1_spec = get_profile(root, "initial.u1", "zero");
  c.u0 = field_from_spec(c.u0_spec, c.grid, c.seed, true, "initial.u0");
  c.u1 = field_from_spec(c.u1_spec, c.grid, c.seed + 1, true, "initial.u1");

  if (const json* v = find(root, "output.dir")) {
    if (!v->is_string()) throw ConfigError("output.dir", "must be a string");
    c.out_dir = v->get<std::string>();
  }
  c.cadence = static_cast<int>(get_int(root, "output.cadence", 10));
  if (c.cadence < 1) throw ConfigError("output.cadence", "must be >= 1");
  c.snapshot_every = static_cast<int>(get_int(root, "output.snapshot_every", 0));
  if (c.snapshot_every < 0) throw ConfigError("output.snapshot_every", "must be >= 0");
  c.checkpoint_every = static_cast<int>(get_int(root, "output.checkpoint_every", 0));
  if (c.checkpoint_every < 0) throw ConfigError("output.checkpoint_every", "must be >= 0");

  c.weights.nu = get_num(root, "lyapunov.nu", 0.01);
  c.weights.mu = get_num(root, "lyapunov.mu", 0.01);
  if (!(c.weights.nu > 0.0)) throw ConfigError("lyapunov.nu", "must be positive");
  if (!(c.weights.mu > 0.0)) throw ConfigError("lyapunov.mu", "must be positive");

  ProbeSettings& pr = c.probe;
  pr.amp = get_num(root, "probe.amp", pr.amp);
  pr.perturb = get_num(root, "probe.perturb", pr.perturb);
  pr.held_out_seed_offset = static_cast<std::uint64_t>(get_int(root, "probe.held_out_seed_offset", 1000));
  pr.T_over_tstar = get_num(root, "probe.T_over_tstar", pr.T_over_tstar);
  pr.horizon_over_tstar = get_num(root, "probe.horizon_over_tstar", pr.horizon_over_tstar);
  pr.delta = get_num(root, "probe.delta", pr.delta);
  pr.sample_every = static_cast<int>(get_int(root, "probe.sample_every", pr.sample_every));
  if (!(pr.amp >= 0.0)) throw ConfigError("probe.amp", "must be nonnegative");
  if (!(pr.perturb >= 0.0)) throw ConfigError("probe.perturb", "must be nonnegative");
  if (!(pr.T_over_tstar > 0.0)) throw ConfigError("probe.T_over_tstar", "must be positive");
  if (!(pr.horizon_over_tstar >= pr.T_over_tstar))
    throw ConfigError("probe.horizon_over_tstar", "must be >= probe.T_over_tstar");
  if (!(pr.delta > 0.0 && pr.delta < 1.0)) throw ConfigError("probe.delta", "must lie in (0,1)");
  if (pr.sample_every < 1) throw ConfigError("probe.sample_every", "must be >= 1");

  EquilibriaSettings& eq = c.equilibria;
  eq.newton.tol = get_num(root, "equilibria.tol", 1e-10);
  eq.newton.max_iter = static_cast<int>(get_int(root, "equilibria.max_iter", 50));
  eq.newton.inner_tol = get_num(root, "equilibria.inner_tol", 1e-8);
  if (!(eq.newton.tol > 0.0)) throw ConfigError("equilibria.tol", "must be positive");
  if (eq.newton.max_iter < 1) throw ConfigError("equilibria.max_iter", "must be >= 1");
  if (!(eq.newton.inner_tol > 0.0 && eq.newton.inner_tol < 1.0))
    throw ConfigError("equilibria.inner_tol", "must lie in (0,1)");
  eq.guess = get_profile(root, "equilibria.guess", "zero");
  field_from_spec(eq.guess, c.grid, c.seed + 2, true, "equilibria.guess");
  if (const json* v = find(root, "equilibria.sweep")) {
    if (!v->is_string()) throw ConfigError("equilibria.sweep", "must be a string");
    eq.sweep = v->get<std::string>();
  }

  // effective config with defaults filled, keys sorted by json's std::map
  json eff;
  eff["grid"] = {{"lx", lx}, {"ly", ly}, {"nx", nx}, {"ny", ny}};
  eff["phys"] = {{"U", c.phys.U}, {"alpha", c.phys.alpha}, {"k", c.phys.k}};
  eff["loads"] = {{"p0", c.p0_spec}, {"F0", c.F0_spec}};
  eff["time"] = {{"dt", c.dt}, {"horizon", c.horizon}};
  eff["quad"] = {{"n_theta", c.quad.n_theta}, {"n_s", c.quad.n_s}};
  eff["prehistory"] = c.prehistory_checkpoint.empty()
                          ? (c.prehistory == Prehistory::Constant ? "constant" : "zero")
                          : "checkpoint:" + c.prehistory_checkpoint;
  eff["initial"] = {{"u0", c.u0_spec}, {"u1", c.u1_spec}};
  eff["seed"] = c.seed;
  eff["output"] = {{"dir", c.out_dir}, {"cadence", c.cadence}, {"snapshot_every", c.snapshot_every},
                   {"checkpoint_every", c.checkpoint_every}};
  eff["lyapunov"] = {{"nu", c.weights.nu}, {"mu", c.weights.mu}};
  eff["probe"] = {{"amp", pr.amp}, {"perturb", pr.perturb},
                  {"held_out_seed_offset", pr.held_out_seed_offset},
                  {"T_over_tstar", pr.T_over_tstar}, {"horizon_over_tstar", pr.horizon_over_tstar},
                  {"delta", pr.delta}, {"sample_every", pr.sample_every}};
  eff["equilibria"] = {{"tol", eq.newton.tol}, {"max_iter", eq.newton.max_iter},
                       {"inner_tol", eq.newton.inner_tol}, {"guess", eq.guess}, {"sweep", eq.sweep}};
  c.canonical = eff.dump();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(c.canonical)));
  c.hash = hex;
  return c;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_help() {
  std::ostringstream os;
  os << "Config keys (JSON, dotted paths are nested objects; unknown keys are rejected):\n";
  for (const auto& k : kKeys) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-30s default %-12s %s\n", k.path, k.def, k.doc);
    os << line;
  }
  os << "Profiles: \"zero\", \"constant:c\", \"radial_beta:b\" (-b(x1^2+x2^2)), \"bump:a\",\n"
        "  \"random:a\" (seeded smooth clamped field), \"gaussian:cx,cy,sigma,amp\",\n"
        "  \"mode:i,j,a\" (clamped sine mode), or a PFLB snapshot path. Numbers mean\n"
        "  constant:c; objects {\"gaussian\":{cx,cy,sigma,amp}} are accepted.\n"
        "Environment: PFLUTTER_THREADS sets the worker count.\n";
  return os.str();
}

}  // namespace pflutter
