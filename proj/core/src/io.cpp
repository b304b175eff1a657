#include "pflutter/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>

namespace pflutter {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

void put_magic(std::ostream& os, const char* m) { os.write(m, 4); }

void expect_magic(std::istream& is, const char* m) {
  char b[4];
  if (!is.read(b, 4)) throw IoError("truncated file");
  if (std::memcmp(b, m, 4) != 0) throw IoError(std::string("bad magic, expected ") + m);
}

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

}  // namespace

void write_snapshot(std::ostream& os, const SnapshotRecord& r) {
  check_field(r.values, r.grid);
  put_magic(os, "PFLB");
  put<std::uint32_t>(os, kSnapshotVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(r.grid.nx));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(r.grid.ny));
  put<double>(os, r.grid.lx);
  put<double>(os, r.grid.ly);
  put<double>(os, r.t);
  for (int k = 0; k < r.grid.size(); ++k) put<double>(os, r.values[k]);
  if (!os) throw IoError("write failed");
}

SnapshotRecord read_snapshot(std::istream& is) {
  expect_magic(is, "PFLB");
  const auto ver = get<std::uint32_t>(is);
  if (ver != kSnapshotVersion) throw IoError("unsupported snapshot version " + std::to_string(ver));
  const auto nx = get<std::uint32_t>(is);
  const auto ny = get<std::uint32_t>(is);
  const double lx = get<double>(is), ly = get<double>(is);
  SnapshotRecord r;
  if (nx > (1u << 15) || ny > (1u << 15)) throw IoError("implausible grid size in snapshot");
  r.grid = GridSpec::make(lx, ly, static_cast<int>(nx), static_cast<int>(ny));
  r.t = get<double>(is);
  r.values.resize(r.grid.size());
  for (int k = 0; k < r.grid.size(); ++k) r.values[k] = get<double>(is);
  return r;
}

void write_snapshot_file(const std::string& path, const SnapshotRecord& r) {
  auto os = open_out(path);
  write_snapshot(os, r);
}

SnapshotRecord read_snapshot_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_snapshot(is);
}

void write_checkpoint(const std::string& path, const Checkpoint& c) {
  auto os = open_out(path);
  put_magic(os, "PFCK");
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(c.history.size()));
  put<double>(os, c.dt_hist);
  put<double>(os, c.t_star);
  for (const auto& s : c.history) write_snapshot(os, s);
  write_snapshot(os, c.velocity);
  write_snapshot(os, c.n_prev);
  put<std::uint32_t>(os, c.has_prev ? 1u : 0u);
  put<std::int64_t>(os, c.counters.step);
  put<double>(os, c.counters.diss_accum);
  put<double>(os, c.counters.power_defect);
  put<double>(os, c.counters.power_signed);
  put<double>(os, c.counters.last_power);
  put<double>(os, c.counters.estar0);
  if (!os) throw IoError("write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  expect_magic(is, "PFCK");
  const auto ver = get<std::uint32_t>(is);
  if (ver != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(ver));
  Checkpoint c;
  const auto n = get<std::uint32_t>(is);
  c.dt_hist = get<double>(is);
  c.t_star = get<double>(is);
  for (std::uint32_t k = 0; k < n; ++k) c.history.push_back(read_snapshot(is));
  c.velocity = read_snapshot(is);
  c.n_prev = read_snapshot(is);
  c.has_prev = get<std::uint32_t>(is) != 0;
  c.counters.step = get<std::int64_t>(is);
  c.counters.diss_accum = get<double>(is);
  c.counters.power_defect = get<double>(is);
  c.counters.power_signed = get<double>(is);
  c.counters.last_power = get<double>(is);
  c.counters.estar0 = get<double>(is);
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in checkpoint");
  return c;
}

Checkpoint make_checkpoint(const Integrator& it) {
  Checkpoint c;
  const HistoryBuffer& h = it.history();
  c.dt_hist = h.dt_hist();
  c.t_star = h.t_star();
  for (int k = 0; k < h.size(); ++k) c.history.push_back({it.grid(), h.at(k).t, h.at(k).u});
  c.velocity = {it.grid(), it.state().t, it.state().v};
  c.n_prev = {it.grid(), it.state().t, it.explicit_force_prev()};
  c.has_prev = it.bootstrapped();
  c.counters = it.counters();
  return c;
}

HistoryBuffer checkpoint_history(const Checkpoint& c) {
  if (c.history.empty()) throw IoError("checkpoint without history");
  HistoryBuffer h(c.history.front().grid, c.dt_hist, c.t_star);
  for (const auto& s : c.history) {
    if (!s.grid.same_as(h.grid())) throw IoError("mixed grids in checkpoint");
    h.push(s.t, s.values);
  }
  return h;
}

void restore_checkpoint(Integrator& it, const Checkpoint& c) {
  if (!c.velocity.grid.same_as(it.grid())) throw IoError("checkpoint grid differs from the run grid");
  if (c.dt_hist != it.dt()) throw IoError("checkpoint dt differs from the run dt");
  if (std::abs(c.t_star - it.t_star()) > 1e-12 * c.t_star)
    throw IoError("checkpoint t_star differs (U or grid changed)");
  it.restore(checkpoint_history(c), c.velocity.values, c.n_prev.values, c.counters, c.has_prev);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns)
    : path_(path), os_(open_out(path)), ncol_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
  os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncol_) throw IoError("CSV row width mismatch in " + path_);
  for (size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_double(values[i]);
  os_ << '\n';
  if (!os_) throw IoError("write failed: " + path_);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string code_version() {
#ifdef PFLUTTER_VERSION
  return PFLUTTER_VERSION;
#else
  return "unknown";
#endif
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["config_hash"] = m.config_hash;
  j["code_version"] = m.code_version;
  j["seed"] = m.seed;
  j["start"] = m.start_time;
  j["end"] = m.end_time;
  j["outputs"] = m.outputs;
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

}  // namespace pflutter
