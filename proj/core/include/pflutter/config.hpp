#pragma once

#include "pflutter/diagnostics.hpp"
#include "pflutter/equilibria.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pflutter {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::invalid_argument(path + ": " + msg), path_(path) {}
  const std::string& key_path() const { return path_; }

 private:
  std::string path_;
};

struct ProbeSettings {
  double amp = 0.05;        // amplitude of the shared random base data
  double perturb = 0.005;   // amplitude of the random difference within a pair
  std::uint64_t held_out_seed_offset = 1000;
  double T_over_tstar = 4.0;
  double horizon_over_tstar = 8.0;
  double delta = 0.5;
  int sample_every = 5;
};

struct EquilibriaSettings {
  NewtonOptions newton;
  std::string guess = "zero";  // initial-field spec
  std::string sweep;           // "beta:from:to:steps" or "U:from:to:steps", empty for none
};

struct SimConfig {
  GridSpec grid;
  PhysParams phys;
  QuadratureSpec quad;
  double dt = 0.01;
  double horizon = 10.0;
  Prehistory prehistory = Prehistory::Constant;
  std::string prehistory_checkpoint;  // set for "checkpoint:<path>"
  std::string u0_spec = "zero", u1_spec = "zero";
  std::string p0_spec = "zero", F0_spec = "zero";
  PlateField u0, u1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int cadence = 10;         // steps between CSV rows
  int snapshot_every = 0;   // steps between PFLB snapshots, 0 = final only
  int checkpoint_every = 0; // steps between checkpoints, 0 = final only
  LyapunovWeights weights;
  ProbeSettings probe;
  EquilibriaSettings equilibria;
  std::string canonical;  // sorted-key dump of the effective config
  std::string hash;       // FNV-1a 64 of canonical, hex

  RunSpec run_spec() const;
};

/// Parses and validates a JSON document; missing keys take defaults,
/// unknown keys and out-of-range values throw ConfigError naming the key path.
SimConfig parse_config(const std::string& text);
SimConfig load_config_file(const std::string& path);

/// Documentation of every key with its default, for --help.
std::string config_help();

/// Field profiles: "zero", "constant:c", "radial_beta:b", "bump:a",
/// "random:a", "gaussian:cx,cy,sigma,amp", "mode:i,j,a", or a PFLB path.
/// clamped = true rejects profiles that do not vanish on the boundary.
PlateField field_from_spec(const std::string& spec, const GridSpec& g, std::uint64_t seed,
                           bool clamped, const std::string& key_path);

/// Smooth random clamped field: sine modes i, j <= 4 with 1/(i^2 j^2)
/// decay, times the clamped window, scaled to peak amplitude amp.
PlateField random_smooth(const GridSpec& g, double amp, std::uint64_t seed);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace pflutter
