#pragma once

#include "pflutter/integrator.hpp"

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace pflutter {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// One "PFLB" record: magic, version u32, nx u32, ny u32, lx, ly, t, nx*ny
/// values, all little-endian, x2 fastest.
struct SnapshotRecord {
  GridSpec grid;
  double t = 0.0;
  PlateField values;
};

void write_snapshot(std::ostream& os, const SnapshotRecord& r);
SnapshotRecord read_snapshot(std::istream& is);
void write_snapshot_file(const std::string& path, const SnapshotRecord& r);
SnapshotRecord read_snapshot_file(const std::string& path);

/// Everything the integrator needs for a bit-exact resume.
struct Checkpoint {
  double dt_hist = 0.0;
  double t_star = 0.0;
  std::vector<SnapshotRecord> history;  // oldest first
  SnapshotRecord velocity;
  SnapshotRecord n_prev;
  bool has_prev = false;
  IntegratorCounters counters;
};

/// "PFCK", version, count u32, dt_hist, t_star, count PFLB records, PFLB
/// records for v and the previous explicit force, then has_prev u32, step
/// i64 and the five counter doubles.
void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const Integrator& it);
/// Rebuilds the history and restores it into an integrator built with the
/// same grid, parameters and dt.
void restore_checkpoint(Integrator& it, const Checkpoint& c);
HistoryBuffer checkpoint_history(const Checkpoint& c);

/// CSV with a fixed header and 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns);
  void row(const std::vector<double>& values);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream os_;
  size_t ncol_;
};

std::string format_double(double x);

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  std::uint64_t seed = 0;
  std::string start_time, end_time;  // ISO 8601 UTC
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const RunManifest& m);
std::string utc_timestamp();
std::string code_version();

}  // namespace pflutter
