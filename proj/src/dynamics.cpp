#include "coevo/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "coevo/error.hpp"
#include "coevo/kernels.hpp"

namespace coevo {
namespace {

void require_compatible(const SystemState& state, const ModelParams& params,
                        const Network& net) {
  if (net.n() != params.n()) throw ValidationError("network size differs from player count");
  state.validate(params.n());
}

void require_potential_preconditions(const ModelParams& params) {
  for (int i = 0; i < params.n(); ++i) {
    const PlayerWeights& p = params.player(i);
    if (p.gamma != 0.0) {
      throw ValidationError("potential requires zero prejudice; player " +
                            std::to_string(i + 1) + " has gamma != 0");
    }
    if (!(p.beta > 0.0)) {
      throw ValidationError("potential requires beta > 0; player " + std::to_string(i + 1) +
                            " has beta = 0");
    }
  }
}

}  // namespace

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::fixed_point:
      return "fixed_point";
    case StopReason::max_steps:
      return "max_steps";
    case StopReason::divergence_guard:
      return "divergence_guard";
  }
  return "?";
}

SystemState step(const SystemState& state, const std::vector<int>& active,
                 const ModelParams& params, const Network& net) {
  require_compatible(state, params, net);
  SystemState next = state;
  for (int i : active) {
    if (i < 0 || i >= params.n()) {
      throw std::out_of_range("active player " + std::to_string(i + 1) + " outside 1.." +
                              std::to_string(params.n()));
    }
    const int action = revision_action(discriminant(i, state.y, params, net));
    next.x[i] = action;
    next.y[i] = best_response_opinion(i, action, state.y, params, net);
  }
  return next;
}

Trajectory run(const SystemState& initial, const RevisionSchedule& schedule,
               const ModelParams& params, const Network& net, const RunOptions& options) {
  require_compatible(initial, params, net);
  if (schedule.n() != params.n()) throw ValidationError("schedule size differs from player count");
  const std::int64_t limit = options.max_steps.value_or(kDefaultStepGuard);
  if (limit < 1) throw ValidationError("max_steps must be at least 1");

  const bool track_potential = potential_defined(params);
  const int n = params.n();

  Trajectory traj;
  traj.states.push_back(initial);
  if (track_potential) traj.potentials.push_back(potential(initial.y, params, net));

  SystemState current = initial;
  std::int64_t quiet = 0;
  // For schedules without a coverage window: players seen during the
  // current quiet streak.
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int seen_count = 0;
  bool settled = false;

  for (std::int64_t t = 0; t < limit; ++t) {
    std::vector<int> active = schedule.active_set(t);
    SystemState next = step(current, active, params, net);

    bool changed = false;
    for (int i : active) {
      if (next.x[i] != current.x[i] ||
          std::abs(next.y[i] - current.y[i]) > options.fixed_point_tol) {
        changed = true;
        break;
      }
    }
    if (changed) {
      quiet = 0;
      std::fill(seen.begin(), seen.end(), 0);
      seen_count = 0;
    } else {
      ++quiet;
      for (int i : active) {
        if (!seen[i]) {
          seen[i] = 1;
          ++seen_count;
        }
      }
    }

    current = std::move(next);
    traj.steps = t + 1;
    if (options.record) {
      traj.active_sets.push_back(std::move(active));
      traj.states.push_back(current);
      if (track_potential) traj.potentials.push_back(potential(current.y, params, net));
    }

    const std::optional<int> window = schedule.window();
    settled = window ? quiet >= *window : seen_count == n;
    if (settled) break;
  }

  traj.stop_reason = settled ? StopReason::fixed_point
                             : (options.max_steps ? StopReason::max_steps
                                                  : StopReason::divergence_guard);
  if (!options.record) {
    traj.states.push_back(current);
    if (track_potential) traj.potentials.push_back(potential(current.y, params, net));
  }
  traj.final_state = std::move(current);
  return traj;
}

bool is_fixed_point(const SystemState& state, const ModelParams& params, const Network& net,
                    double tol) {
  require_compatible(state, params, net);
  for (int i = 0; i < params.n(); ++i) {
    const int action = revision_action(discriminant(i, state.y, params, net));
    if (state.x[i] != action) return false;
    const double image = best_response_opinion(i, action, state.y, params, net);
    if (std::abs(state.y[i] - image) > tol) return false;
  }
  return true;
}

bool potential_defined(const ModelParams& params) noexcept {
  for (const PlayerWeights& p : params.players()) {
    if (p.gamma != 0.0 || !(p.beta > 0.0)) return false;
  }
  return true;
}

double potential(std::span<const double> y, const ModelParams& params, const Network& net) {
  require_potential_preconditions(params);
  if (y.size() != static_cast<std::size_t>(params.n()) || net.n() != params.n()) {
    throw ValidationError("opinion vector / network size differs from player count");
  }
  double total = 0.0;
  for (int i = 0; i < params.n(); ++i) {
    const PlayerWeights& p = params.player(i);
    const double disagreement = 0.5 * kernels::weighted_sq_dist(net.row(i), y[i], y);
    total += disagreement + (p.lambda / p.beta) * y[i] * y[i];
  }
  return -0.5 * total;
}

double potential_quadratic(std::span<const double> y, const ModelParams& params,
                           const Network& net) {
  require_potential_preconditions(params);
  if (!net.is_symmetric()) throw ValidationError("quadratic potential requires a symmetric W");
  const auto n = static_cast<std::size_t>(params.n());
  if (y.size() != n || net.n() != params.n()) {
    throw ValidationError("opinion vector / network size differs from player count");
  }
  std::vector<double> wy(n);
  kernels::active().matvec(net.data().data(), y.data(), wy.data(), n, n);
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PlayerWeights& p = params.player(static_cast<int>(i));
    quad += y[i] * (y[i] - wy[i]) + (p.lambda / p.beta) * y[i] * y[i];
  }
  return -0.5 * quad;
}

bool potential_matrix_positive_definite(const ModelParams& params, const Network& net) {
  require_potential_preconditions(params);
  if (!net.is_symmetric()) throw ValidationError("quadratic potential requires a symmetric W");
  const int n = params.n();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = -net.weight(i, j);
    const PlayerWeights& p = params.player(i);
    m(i, i) += 1.0 + p.lambda / p.beta;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

std::string_view to_string(ActionConsensus c) {
  switch (c) {
    case ActionConsensus::none:
      return "none";
    case ActionConsensus::all_defection:
      return "all-defection";
    case ActionConsensus::all_cooperation:
      return "all-cooperation";
  }
  return "?";
}

std::string_view to_string(FullConsensus c) {
  switch (c) {
    case FullConsensus::none:
      return "none";
    case FullConsensus::all_defection_consensus:
      return "all-defection-consensus";
    case FullConsensus::all_cooperation_consensus:
      return "all-cooperation-consensus";
  }
  return "?";
}

StateClass classify_state(const SystemState& state, double opinion_tol) {
  state.validate(state.n());
  StateClass out;
  if (state.x.empty()) return out;

  const bool all_defect = std::all_of(state.x.begin(), state.x.end(), [](int v) { return v == 0; });
  const bool all_coop = std::all_of(state.x.begin(), state.x.end(), [](int v) { return v == 1; });
  if (all_defect) out.action_consensus = ActionConsensus::all_defection;
  if (all_coop) out.action_consensus = ActionConsensus::all_cooperation;

  const auto [lo, hi] = std::minmax_element(state.y.begin(), state.y.end());
  if (*hi - *lo <= opinion_tol) out.opinion_consensus = 0.5 * (*hi + *lo);

  if (all_defect && *hi <= opinion_tol) {
    out.full_class = FullConsensus::all_defection_consensus;
  } else if (all_coop && 1.0 - *lo <= opinion_tol) {
    out.full_class = FullConsensus::all_cooperation_consensus;
  }
  return out;
}

}  // namespace coevo
