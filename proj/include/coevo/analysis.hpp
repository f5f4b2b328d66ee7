#pragma once

// Equilibrium theory made executable: the sufficient conditions for the
// all-defection / all-cooperation consensus equilibria, the opinion
// equilibrium linear solve, Nash verification, exhaustive equilibrium
// enumeration for small populations, and parameter sweeps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coevo/dynamics.hpp"
#include "coevo/model.hpp"

namespace coevo {

enum class ConditionId { all_defection_unique, all_cooperation_exists };

// "all_defection_unique" / "all_cooperation_exists"
std::string_view to_string(ConditionId id);

struct ConditionTerm {
  double lhs = 0.0;  // beta*lambda / (beta + lambda)
  double rhs = 0.0;  // 2*alpha*(1 - r/n)
  bool holds = false;
};

struct ConditionReport {
  ConditionId condition_id = ConditionId::all_defection_unique;
  std::vector<ConditionTerm> per_player;
  bool all_hold = false;
};

// lhs <= rhs for every player: (0,0) is the unique equilibrium.
// Comparisons carry the same 2*kTieTolerance band as the dynamics' tie rule,
// so exactly one of the two conditions holds for each player.
ConditionReport check_all_defection_unique(const ModelParams& params);
// lhs > rhs for every player: (1,1) is an equilibrium.
ConditionReport check_all_cooperation_exists(const ModelParams& params);

enum class SolveMethod { direct, fixed_point_iteration };

struct OpinionSolution {
  std::vector<double> y;
  double residual = 0.0;  // sup-norm of y - (phi W y + (I - phi) x)
  int iterations = 0;     // 0 for the direct solve
};

inline constexpr double kFixedPointStopTol = 1e-13;
inline constexpr int kFixedPointMaxIterations = 100'000;

// Unique opinions consistent with a frozen action profile:
// y_i = (beta_i sum_j w_ij y_j + lambda_i x_i) / (beta_i + lambda_i).
// Requires gamma = 0 and lambda_i > 0 (so every row of phi W sums below 1).
OpinionSolution solve_opinion_equilibrium(std::span<const int> x, const ModelParams& params,
                                          const Network& net,
                                          SolveMethod method = SolveMethod::direct);

struct NashWitness {
  int player = -1;          // first player not best-responding (0-indexed)
  BestResponseSet better;   // their best-response set
};

struct NashVerdict {
  bool is_nash = false;
  std::optional<NashWitness> witness;
};

// Definition-level test: each (x_i, y_i) must lie in the best-response set;
// on a tie both actions are admissible.
NashVerdict verify_nash(const SystemState& state, const ModelParams& params, const Network& net,
                        double tol);

struct Equilibrium {
  SystemState state;
  StateClass state_class;
  double residual = 0.0;
};

struct EquilibriumReport {
  std::vector<Equilibrium> equilibria;           // dynamics tie rule (tie -> defect)
  std::vector<Equilibrium> boundary_equilibria;  // Nash only: some cooperator sits on a tie
  std::int64_t action_profiles_scanned = 0;
};

inline constexpr int kDefaultMaxEnumeration = 16;
inline constexpr double kEquilibriumVerifyTol = 1e-9;

// Scans all 2^n action profiles. Requires gamma = 0 and lambda_i > 0.
// Throws ValidationError (with a cost estimate) when n > max_n.
EquilibriumReport enumerate_equilibria(const ModelParams& params, const Network& net,
                                       int max_n = kDefaultMaxEnumeration);

// Uniform-weight grid over (r, alpha, beta); lambda = 1 - alpha - beta and
// gamma = 0 for every player.
struct SweepGrid {
  std::vector<double> r;
  std::vector<double> alpha;
  std::vector<double> beta;

  std::size_t size() const noexcept { return r.size() * alpha.size() * beta.size(); }
};

struct SweepOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  std::int64_t max_steps = 100'000;
  double fixed_point_tol = kDefaultFixedPointTol;
  double opinion_tol = kDefaultOpinionTol;
  int max_enumeration_n = kDefaultMaxEnumeration;
  int threads = 0;  // 0: hardware concurrency
};

struct SweepCell {
  double r = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  bool valid = false;
  std::string error;  // set when the cell's parameters are invalid

  bool all_defection_unique = false;
  bool all_cooperation_exists = false;
  std::optional<int> equilibria_count;  // empty when n > max enumeration size
  std::optional<int> boundary_equilibria_count;

  int trials = 0;
  int to_all_defection = 0;
  int to_all_cooperation = 0;
  int to_other_fixed_point = 0;
  int not_converged = 0;
};

struct SweepTable {
  std::vector<SweepCell> cells;  // r-major, then alpha, then beta
  std::vector<std::string> warnings;
};

SweepTable sweep(const SweepGrid& grid, const Network& net, const RevisionSchedule& schedule,
                 const SweepOptions& options);

}  // namespace coevo
