#pragma once

// On-disk artifacts of a run:
//
//   frames/<field>_<step:06>.csv   ny rows of nx comma-separated values, row j = grid row j
//   run.json                       config, derived quantities, frame index, versions
//   fbs_log.csv                    iter,Err,J_total,J_terminal,J_running,J_cost
//
// Numbers are written in shortest round-trip form, so identical runs give
// byte-identical files.

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfseir/config.hpp"
#include "cfseir/control.hpp"
#include "cfseir/forward_solver.hpp"
#include "cfseir/grid.hpp"

namespace cfseir {

inline constexpr const char* kVersion = "1.0.0";

/// Raised when an output file or directory cannot be written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FrameInfo {
  std::string field;
  std::size_t step = 0;
  double time = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::string file;  // relative to the run directory
};

inline std::string format_number(double v) { return detail::format_double(v); }

inline std::string frame_file_name(const std::string& field, std::size_t step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu.csv", field.c_str(), step);
  return std::string("frames/") + buf;
}

inline std::string field_to_csv(const Field& f) {
  const GridSpec& g = f.grid();
  std::string out;
  out.reserve(g.cells() * 12);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      if (ix) out += ',';
      out += format_number(f(ix, iy));
    }
    out += '\n';
  }
  return out;
}

/// Parses a frame written by field_to_csv; returns the rows.
inline std::vector<std::vector<double>> read_csv_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, v);
      if (ec != std::errc() || ptr != line.data() + end) throw IoError("malformed number in " + path.string());
      row.push_back(v);
      pos = end + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

/// Levels written: every save_every-th step plus the final one.
inline std::vector<std::size_t> saved_steps(std::size_t steps, std::size_t save_every) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n <= steps; n += save_every) out.push_back(n);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

/// Writes S, E, I, R and u for the saved levels of `traj` under dir/frames.
inline std::vector<FrameInfo> write_frames(const std::filesystem::path& dir, const Trajectory& traj,
                                           std::size_t save_every) {
  ensure_directory(dir / "frames");
  std::vector<FrameInfo> index;
  const GridSpec& g = traj.grid();
  for (std::size_t n : saved_steps(traj.steps(), save_every)) {
    for (std::size_t c = 0; c <= kCompartments; ++c) {
      const std::string name = c < kCompartments ? kCompartmentNames[c] : "u";
      const Field& f = c < kCompartments ? traj.states[n][c] : traj.controls[n];
      FrameInfo info{name, n, traj.time(n), g.nx, g.ny, frame_file_name(name, n)};
      write_text(dir / info.file, field_to_csv(f));
      index.push_back(std::move(info));
    }
  }
  return index;
}

inline std::string fbs_log_csv(const std::vector<FbsIteration>& log) {
  std::ostringstream os;
  os << "iter,Err,J_total,J_terminal,J_running,J_cost\n";
  for (const FbsIteration& it : log) {
    os << it.iter << ',' << format_number(it.err) << ',' << format_number(it.objective.total) << ','
       << format_number(it.objective.terminal) << ',' << format_number(it.objective.running) << ','
       << format_number(it.objective.cost) << '\n';
  }
  return os.str();
}

inline nlohmann::json objective_json(const ObjectiveBreakdown& j) {
  return {{"total", j.total}, {"terminal", j.terminal}, {"running", j.running}, {"cost", j.cost}};
}

/// Flat key/value view of the configuration, parsed back from its text form.
inline nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(serialize_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

inline nlohmann::json frames_json(const std::vector<FrameInfo>& frames) {
  nlohmann::json arr = nlohmann::json::array();
  for (const FrameInfo& f : frames) {
    arr.push_back({{"field", f.field}, {"step", f.step}, {"time", f.time}, {"nx", f.nx}, {"ny", f.ny}, {"file", f.file}});
  }
  return arr;
}

inline nlohmann::json versions_json() {
  return {{"cfseir", kVersion},
          {"cxx_standard", static_cast<long>(__cplusplus)},
#if defined(__VERSION__)
          {"compiler", __VERSION__},
#endif
          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                       "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace cfseir
