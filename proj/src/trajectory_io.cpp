#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/io.hpp"
#include "io_common.hpp"

namespace coevo::io {

TrajectoryFormat parse_trajectory_format(std::string_view name) {
  if (name == "csv") return TrajectoryFormat::csv;
  if (name == "json-lines" || name == "jsonl") return TrajectoryFormat::json_lines;
  throw ValidationError("unknown trajectory format '" + std::string(name) +
                        "' (expected csv or json-lines)");
}

std::string format_trajectory(const Trajectory& traj, TrajectoryFormat format) {
  const int n = traj.states.empty() ? 0 : traj.states.front().n();
  const bool with_potential =
      !traj.states.empty() && traj.potentials.size() == traj.states.size();
  std::ostringstream os;

  if (format == TrajectoryFormat::csv) {
    os << "t,active";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    for (int i = 1; i <= n; ++i) os << ",y_" << i;
    os << ",potential\n";
  }

  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const SystemState& s = traj.states[t];
    const std::vector<int>* active =
        t > 0 && t - 1 < traj.active_sets.size() ? &traj.active_sets[t - 1] : nullptr;
    if (format == TrajectoryFormat::csv) {
      os << t << ',';
      if (active) {
        for (std::size_t k = 0; k < active->size(); ++k) os << (k ? ";" : "") << (*active)[k] + 1;
      }
      for (int v : s.x) os << ',' << v;
      for (double v : s.y) os << ',' << format_real(v);
      os << ',';
      if (with_potential) os << format_real(traj.potentials[t]);
      os << '\n';
    } else {
      // Hand-rolled so reals use the same 17-digit text as the CSV.
      os << "{\"t\":" << t << ",\"active\":[";
      if (active) {
        for (std::size_t k = 0; k < active->size(); ++k) os << (k ? "," : "") << (*active)[k] + 1;
      }
      os << "],\"x\":[";
      for (std::size_t k = 0; k < s.x.size(); ++k) os << (k ? "," : "") << s.x[k];
      os << "],\"y\":[";
      for (std::size_t k = 0; k < s.y.size(); ++k) os << (k ? "," : "") << format_real(s.y[k]);
      os << "],\"potential\":";
      if (with_potential) {
        os << format_real(traj.potentials[t]);
      } else {
        os << "null";
      }
      os << "}\n";
    }
  }
  return os.str();
}

void emit_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                     TrajectoryFormat format) {
  write_file_atomic(path, format_trajectory(traj, format));
}

Trajectory parse_trajectory_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw ValidationError("trajectory CSV is empty");
  const auto header = detail::split(detail::trim(lines[0]), ',');
  if (header.size() < 3 || header[0] != "t" || header[1] != "active" ||
      header.back() != "potential" || (header.size() - 3) % 2 != 0) {
    throw ValidationError("line 1: not a trajectory CSV header");
  }
  const std::size_t n = (header.size() - 3) / 2;

  Trajectory traj;
  bool all_potentials = true;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string_view line = detail::trim(lines[ln]);
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    const std::string where = "line " + std::to_string(ln + 1) + ": ";
    if (cells.size() != header.size()) throw ValidationError(where + "wrong number of columns");
    if (ln > 1) {
      std::vector<int> active;
      if (!detail::trim(cells[1]).empty()) {
        for (std::string_view id : detail::split(cells[1], ';')) {
          const auto v = detail::parse_int(id);
          if (!v || *v < 1) throw ValidationError(where + "bad active player id");
          active.push_back(static_cast<int>(*v) - 1);
        }
      }
      traj.active_sets.push_back(std::move(active));
    }
    SystemState s;
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = detail::parse_int(cells[2 + k]);
      if (!v) throw ValidationError(where + "bad action");
      s.x.push_back(static_cast<int>(*v));
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = detail::parse_double(cells[2 + n + k]);
      if (!v) throw ValidationError(where + "bad opinion");
      s.y.push_back(*v);
    }
    s.validate(static_cast<int>(n));
    if (const auto p = detail::parse_double(cells.back())) {
      traj.potentials.push_back(*p);
    } else {
      all_potentials = false;
    }
    traj.states.push_back(std::move(s));
  }
  if (!all_potentials) traj.potentials.clear();
  traj.steps = traj.states.empty() ? 0 : static_cast<std::int64_t>(traj.states.size()) - 1;
  if (!traj.states.empty()) traj.final_state = traj.states.back();
  return traj;
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(path);
  std::random_device rd;
  const fs::path tmp =
      target.parent_path() /
      (target.filename().string() + ".tmp" + std::to_string(rd() & 0xffffffU));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("failed writing '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace coevo::io
