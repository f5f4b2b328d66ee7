#pragma once

// File formats and configuration: network edge lists / dense CSV,
// network generators, trajectory CSV / JSON-lines, report JSON and the
// experiment config document. All external player ids are 1-indexed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coevo/analysis.hpp"
#include "coevo/dynamics.hpp"
#include "coevo/model.hpp"

namespace coevo::io {

// ---------------------------------------------------------------------------
// Networks

enum class NetworkFormat { edge_list, dense_csv };
NetworkFormat parse_network_format(std::string_view name);

// Edge list: one "i j w" per line (1-indexed, whitespace separated, '#'
// starts a comment). Missing pairs are zero; repeated pairs accumulate.
// node_count, when given, fixes n (otherwise the largest id seen).
Network parse_edge_list(std::string_view text, bool normalise,
                        std::optional<int> node_count = std::nullopt);
// Dense CSV: n lines of n comma-separated weights.
Network parse_dense_csv(std::string_view text, bool normalise);

Network load_network(const std::filesystem::path& path, NetworkFormat format, bool normalise,
                     std::optional<int> node_count = std::nullopt);
// 17 significant digits; reloads bit-exactly.
std::string format_network(const Network& net, NetworkFormat format);
void write_network(const Network& net, const std::filesystem::path& path, NetworkFormat format);

enum class RandomWeighting {
  row,         // divide each row of the adjacency by the degree
  metropolis,  // w_ij = 1 / (1 + max(d_i, d_j)); symmetric, diagonal takes the rest
};

Network complete_network(int n);
// Each node listens equally to its two ring neighbours (one neighbour when n = 2).
Network ring_network(int n);
// 4-neighbour lattice, rows normalised.
Network grid_network(int rows, int cols);
// Erdos-Renyi G(n, p). Isolated nodes get a self-loop of weight 1 under
// row weighting. With require_connected, draws are repeated (up to
// max_retries) until the graph is connected.
Network random_network(int n, double p, std::uint64_t seed, RandomWeighting weighting,
                       bool require_connected, int max_retries = 1000);

// ---------------------------------------------------------------------------
// Trajectories

enum class TrajectoryFormat { csv, json_lines };
TrajectoryFormat parse_trajectory_format(std::string_view name);

// CSV header: t,active,x_1..x_n,y_1..y_n,potential. Row t holds states[t];
// "active" lists (1-indexed, ';'-joined) the players that revised to
// produce it, empty for t = 0. potential is empty when not recorded.
std::string format_trajectory(const Trajectory& traj, TrajectoryFormat format);
void emit_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                     TrajectoryFormat format);

// Inverse of the CSV format (states, active sets and potentials).
Trajectory parse_trajectory_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Reports

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const EquilibriumReport& report);
nlohmann::json to_json(const BestResponseSet& br, int player);
nlohmann::json to_json(const StateClass& cls);
std::string format_sweep_csv(const SweepTable& table);

// ---------------------------------------------------------------------------
// Config

enum class InitialPreset { explicit_state, all_cooperation, all_defection, random };

struct InitialStateSpec {
  InitialPreset preset = InitialPreset::all_defection;
  std::uint64_t seed = 0;
  SystemState state;  // explicit_state only
};

struct OutputSpec {
  std::optional<std::filesystem::path> trajectory;
  TrajectoryFormat trajectory_format = TrajectoryFormat::csv;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> sweep;
};

struct SweepSpec {
  SweepGrid grid;
  SweepOptions options;
};

struct ExperimentConfig {
  ModelParams params;
  Network network;
  ScheduleKind schedule_kind = ScheduleKind::round_robin;
  std::uint64_t schedule_seed = 0;
  InitialStateSpec initial;
  RunOptions run;
  OutputSpec outputs;
  std::optional<SweepSpec> sweep;

  SystemState initial_state() const;
  RevisionSchedule schedule() const;
  // Replaces every seed in the document (schedule, initial state, sweep).
  void override_seed(std::uint64_t seed);
};

// Throws ValidationError whose message names the JSON location (line and
// column for syntax errors, JSON pointer and player/row for invariant
// violations). Relative paths inside the document resolve against its
// directory. A seed override replaces every seed in the document, including
// the random-network seed.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = ".",
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// %.17g
std::string format_real(double v);

}  // namespace coevo::io
