#pragma once

// Domain types and the pure payoff / best-response maps of the
// public-goods + Friedkin-Johnsen coevolutionary game.
//
// Players are 0-indexed internally. Every file format and CLI surface is
// 1-indexed; conversion happens in io.

#include <span>
#include <vector>

namespace coevo {

// |alpha + beta + lambda - 1| allowed per player.
inline constexpr double kWeightSumTolerance = 1e-12;
// |row sum - 1| allowed per network row.
inline constexpr double kRowSumTolerance = 1e-9;
// |delta| <= kTieTolerance is treated as delta == 0 (two best responses).
inline constexpr double kTieTolerance = 1e-12;

struct PlayerWeights {
  double alpha = 0.0;   // weight on the public-goods payoff
  double beta = 0.0;    // weight on the opinion payoff
  double lambda = 0.0;  // action/opinion self-consistency weight
  double gamma = 0.0;   // attachment to prejudice
  double u = 0.0;       // prejudice

  bool operator==(const PlayerWeights&) const = default;
};

class ModelParams {
 public:
  // Throws ValidationError naming the offending player (1-indexed).
  ModelParams(double r, std::vector<PlayerWeights> players);

  static ModelParams uniform(int n, double r, const PlayerWeights& weights);

  int n() const noexcept { return static_cast<int>(players_.size()); }
  double r() const noexcept { return r_; }
  const PlayerWeights& player(int i) const;
  std::span<const PlayerWeights> players() const noexcept { return players_; }

  // alpha, beta, lambda in (0,1) and gamma == 0 for every player.
  bool strict_interior() const noexcept { return strict_interior_; }
  bool zero_prejudice() const noexcept { return zero_prejudice_; }

  bool operator==(const ModelParams&) const = default;

 private:
  double r_;
  std::vector<PlayerWeights> players_;
  bool strict_interior_ = false;
  bool zero_prejudice_ = false;
};

// Row-stochastic influence matrix; entry (i, j) is the influence of j on i.
class Network {
 public:
  // weights is row-major n x n. Throws ValidationError on negative or
  // non-finite entries and on rows that do not sum to 1 within
  // kRowSumTolerance.
  Network(int n, std::vector<double> weights);

  static Network from_rows(const std::vector<std::vector<double>>& rows);
  // Divides each row by its sum first; all-zero rows are rejected.
  static Network normalised(int n, std::vector<double> weights);

  int n() const noexcept { return n_; }
  double weight(int i, int j) const { return weights_[index(i, j)]; }
  std::span<const double> row(int i) const;
  std::span<const double> data() const noexcept { return weights_; }

  bool is_symmetric() const noexcept { return symmetric_; }
  bool is_irreducible() const noexcept { return irreducible_; }
  bool has_self_loops() const noexcept;

  bool operator==(const Network&) const = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_;
  std::vector<double> weights_;
  bool symmetric_ = false;
  bool irreducible_ = false;
};

// z = (x, y). Plain aggregate; call validate() at trust boundaries.
struct SystemState {
  std::vector<int> x;     // 0 = defect, 1 = cooperate
  std::vector<double> y;  // opinions in [0, 1]

  int n() const noexcept { return static_cast<int>(x.size()); }
  // Throws ValidationError on wrong lengths or out-of-range entries.
  void validate(int n) const;

  static SystemState uniform(int n, int action, double opinion);

  bool operator==(const SystemState&) const = default;
};

struct Strategy {
  int action = 0;
  double opinion = 0.0;

  bool operator==(const Strategy&) const = default;
};

struct BestResponseSet {
  std::vector<Strategy> entries;  // one entry, or two (defect first) on a tie
  double discriminant = 0.0;

  bool is_tie() const noexcept { return entries.size() == 2; }
  bool contains(int action, double opinion, double opinion_tol) const;
};

double pgg_payoff(int i, std::span<const int> x, const ModelParams& params);

double opinion_payoff(int i, std::span<const double> y, const ModelParams& params,
                      const Network& net);

double total_payoff(int i, const SystemState& state, const ModelParams& params,
                    const Network& net);

// Payoff of player i if they alone switch to `candidate` while everyone
// else keeps their strategy in `state`. A self-loop w_ii anchors the
// candidate opinion to the player's current opinion state.y[i] (the
// Friedkin-Johnsen convention under which best_response() is the exact
// maximiser). When candidate equals (x_i, y_i) this is total_payoff().
double deviation_payoff(int i, const Strategy& candidate, const SystemState& state,
                        const ModelParams& params, const Network& net);

// sum_j w_ij y_j
double social_term(int i, std::span<const double> y, const Network& net);

// Sign decides the best-response action. Depends on opinions only.
double discriminant(int i, std::span<const double> y, const ModelParams& params,
                    const Network& net);

// Maximiser of the payoff over opinions once the action is fixed.
double best_response_opinion(int i, int action, std::span<const double> y,
                             const ModelParams& params, const Network& net);

BestResponseSet best_response(int i, std::span<const double> y, const ModelParams& params,
                              const Network& net);

// Action taken by a revising player: ties go to defection.
inline int revision_action(double delta) noexcept { return delta > kTieTolerance ? 1 : 0; }

}  // namespace coevo
