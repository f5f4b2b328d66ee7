#pragma once

// Revision schedules, the discrete-time best-response update, trajectory
// recording, consensus classification and the zero-prejudice potential.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coevo/model.hpp"

namespace coevo {

enum class ScheduleKind { synchronous, round_robin, shuffled_rounds, iid_random };

std::string_view to_string(ScheduleKind kind);
// Accepts "synchronous", "round-robin", "shuffled-rounds", "iid-random".
ScheduleKind parse_schedule_kind(std::string_view name);

// Generates the active set R(t) for every t >= 0. Stateless: active_set(t)
// is a pure function of (kind, n, seed, t), so a schedule can be shared and
// replayed freely.
class RevisionSchedule {
 public:
  RevisionSchedule(ScheduleKind kind, int n, std::uint64_t seed = 0);

  ScheduleKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Coverage window T: every T consecutive steps activate every player.
  // Empty for iid-random, which gives no such guarantee.
  std::optional<int> window() const noexcept { return window_; }
  bool covers_all_players() const noexcept { return window_.has_value(); }

  // Sorted, 0-indexed.
  std::vector<int> active_set(std::int64_t t) const;

 private:
  ScheduleKind kind_;
  int n_;
  std::uint64_t seed_;
  std::optional<int> window_;
};

inline RevisionSchedule make_schedule(ScheduleKind kind, int n, std::uint64_t seed = 0) {
  return RevisionSchedule(kind, n, seed);
}

enum class StopReason { fixed_point, max_steps, divergence_guard };
std::string_view to_string(StopReason reason);

struct Trajectory {
  std::vector<SystemState> states;              // states[0] is the initial state
  std::vector<std::vector<int>> active_sets;    // active_sets[t] maps states[t] to states[t+1]
  std::vector<double> potentials;               // one per state, empty unless recorded
  StopReason stop_reason = StopReason::max_steps;
  std::int64_t steps = 0;                       // steps actually taken
  SystemState final_state;
};

inline constexpr std::int64_t kDefaultStepGuard = 1'000'000;
inline constexpr double kDefaultFixedPointTol = 1e-10;

struct RunOptions {
  // Unset: run up to kDefaultStepGuard steps and report divergence_guard if
  // no fixed point is found. Set: report max_steps instead.
  std::optional<std::int64_t> max_steps;
  double fixed_point_tol = kDefaultFixedPointTol;
  // false keeps only the initial and final states (no per-step record).
  bool record = true;
};

// One application of the update map; players outside `active` are copied.
// All active players read the pre-step opinions.
SystemState step(const SystemState& state, const std::vector<int>& active,
                 const ModelParams& params, const Network& net);

Trajectory run(const SystemState& initial, const RevisionSchedule& schedule,
               const ModelParams& params, const Network& net, const RunOptions& options = {});

// True iff every player's (x_i, y_i) is reproduced by their own update.
bool is_fixed_point(const SystemState& state, const ModelParams& params, const Network& net,
                    double tol);

// Sum form of the potential. Requires gamma = 0 and beta > 0 for all players.
double potential(std::span<const double> y, const ModelParams& params, const Network& net);

// -1/2 y^T (I - W + Lambda) y with Lambda = diag(lambda_i / beta_i).
// Requires a symmetric W in addition to the potential() preconditions.
double potential_quadratic(std::span<const double> y, const ModelParams& params,
                           const Network& net);

// Cholesky test of I - W + Lambda (same preconditions as potential_quadratic).
bool potential_matrix_positive_definite(const ModelParams& params, const Network& net);

// Whether potential() is defined for these parameters.
bool potential_defined(const ModelParams& params) noexcept;

enum class ActionConsensus { none, all_defection, all_cooperation };
enum class FullConsensus { none, all_defection_consensus, all_cooperation_consensus };

std::string_view to_string(ActionConsensus c);
std::string_view to_string(FullConsensus c);

struct StateClass {
  ActionConsensus action_consensus = ActionConsensus::none;
  std::optional<double> opinion_consensus;  // the shared opinion value
  FullConsensus full_class = FullConsensus::none;

  bool operator==(const StateClass&) const = default;
};

inline constexpr double kDefaultOpinionTol = 1e-6;

StateClass classify_state(const SystemState& state, double opinion_tol = kDefaultOpinionTol);

}  // namespace coevo
