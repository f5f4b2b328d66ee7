#include "coevo/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "coevo/error.hpp"
#include "coevo/kernels.hpp"

namespace coevo {
namespace {

std::string player_tag(int i) { return "player " + std::to_string(i + 1); }

void require_unit_interval(double v, const char* name, int i) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << player_tag(i) << ": " << name << " = " << v << " is outside [0, 1]";
    throw ValidationError(os.str());
  }
}

void require_player(int i, int n) {
  if (i < 0 || i >= n) {
    throw std::out_of_range("player index " + std::to_string(i + 1) + " outside 1.." +
                            std::to_string(n));
  }
}

template <typename T>
void require_length(std::span<const T> v, int n, const char* what) {
  if (v.size() != static_cast<std::size_t>(n)) {
    throw ValidationError(std::string(what) + " has length " + std::to_string(v.size()) +
                          ", expected " + std::to_string(n));
  }
}

// beta_i + lambda_i, rejecting the degenerate case.
double opinion_weight(int i, const PlayerWeights& p) {
  const double denom = p.beta + p.lambda;
  if (!(denom > 0.0)) throw DegenerateWeightsError(i);
  return denom;
}

bool strongly_connected(int n, std::span<const double> w) {
  // Reachability from node 0 along edges and along reversed edges.
  auto reach_all = [&](bool reversed) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j) {
        const double wij = reversed ? w[static_cast<std::size_t>(j) * n + i]
                                    : w[static_cast<std::size_t>(i) * n + j];
        if (wij > 0.0 && !seen[j]) {
          seen[j] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == n;
  };
  return reach_all(false) && reach_all(true);
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelParams

ModelParams::ModelParams(double r, std::vector<PlayerWeights> players)
    : r_(r), players_(std::move(players)) {
  const int count = n();
  if (count < 2) throw ValidationError("need at least 2 players, got " + std::to_string(count));
  if (!(r_ > 1.0 && r_ < static_cast<double>(count))) {
    std::ostringstream os;
    os.precision(17);
    os << "public-good multiplier r = " << r_ << " violates 1 < r < n = " << count;
    throw ValidationError(os.str());
  }
  strict_interior_ = true;
  zero_prejudice_ = true;
  for (int i = 0; i < count; ++i) {
    const PlayerWeights& p = players_[static_cast<std::size_t>(i)];
    require_unit_interval(p.alpha, "alpha", i);
    require_unit_interval(p.beta, "beta", i);
    require_unit_interval(p.lambda, "lambda", i);
    require_unit_interval(p.gamma, "gamma", i);
    require_unit_interval(p.u, "u", i);
    const double sum = p.alpha + p.beta + p.lambda;
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << player_tag(i) << ": alpha + beta + lambda = " << sum << ", must equal 1";
      throw ValidationError(os.str());
    }
    auto interior = [](double v) { return v > 0.0 && v < 1.0; };
    if (!(interior(p.alpha) && interior(p.beta) && interior(p.lambda) && p.gamma == 0.0)) {
      strict_interior_ = false;
    }
    if (p.gamma != 0.0) zero_prejudice_ = false;
  }
}

ModelParams ModelParams::uniform(int n, double r, const PlayerWeights& weights) {
  if (n < 2) throw ValidationError("need at least 2 players, got " + std::to_string(n));
  return ModelParams(r, std::vector<PlayerWeights>(static_cast<std::size_t>(n), weights));
}

const PlayerWeights& ModelParams::player(int i) const {
  require_player(i, n());
  return players_[static_cast<std::size_t>(i)];
}

// ---------------------------------------------------------------------------
// Network

Network::Network(int n, std::vector<double> weights) : n_(n), weights_(std::move(weights)) {
  if (n_ < 1) throw ValidationError("network needs at least one node");
  if (weights_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_)) {
    throw ValidationError("weight matrix has " + std::to_string(weights_.size()) +
                          " entries, expected " + std::to_string(n_) + "x" + std::to_string(n_));
  }
  for (int i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double w = weights_[index(i, j)];
      if (!std::isfinite(w) || w < 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "row " << i + 1 << ", column " << j + 1 << ": weight " << w
           << " must be finite and nonnegative";
        throw ValidationError(os.str());
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i + 1 << " sums to " << sum << ", must sum to 1 (tolerance "
         << kRowSumTolerance << ")";
      throw ValidationError(os.str());
    }
  }
  symmetric_ = true;
  for (int i = 0; i < n_ && symmetric_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (weights_[index(i, j)] != weights_[index(j, i)]) {
        symmetric_ = false;
        break;
      }
    }
  }
  irreducible_ = strongly_connected(n_, weights_);
}

Network Network::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw ValidationError("row " + std::to_string(i + 1) + " has " +
                            std::to_string(rows[i].size()) + " entries, expected " +
                            std::to_string(rows.size()));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return Network(n, std::move(flat));
}

Network Network::normalised(int n, std::vector<double> weights) {
  if (n < 1 || weights.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw ValidationError("weight matrix does not match node count " + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    auto first = weights.begin() + static_cast<std::ptrdiff_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double w = first[j];
      if (!std::isfinite(w) || w < 0.0) {
        throw ValidationError("row " + std::to_string(i + 1) + ", column " +
                              std::to_string(j + 1) + ": weight must be finite and nonnegative");
      }
      sum += w;
    }
    if (!(sum > 0.0)) {
      throw ValidationError("row " + std::to_string(i + 1) + " is all zeros, cannot normalise");
    }
    for (int j = 0; j < n; ++j) first[j] /= sum;
  }
  return Network(n, std::move(weights));
}

std::span<const double> Network::row(int i) const {
  require_player(i, n_);
  return std::span<const double>(weights_).subspan(index(i, 0), static_cast<std::size_t>(n_));
}

bool Network::has_self_loops() const noexcept {
  for (int i = 0; i < n_; ++i) {
    if (weights_[index(i, i)] > 0.0) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// SystemState / BestResponseSet

void SystemState::validate(int n) const {
  require_length<int>(x, n, "action vector");
  require_length<double>(y, n, "opinion vector");
  for (int i = 0; i < n; ++i) {
    if (x[i] != 0 && x[i] != 1) {
      throw ValidationError(player_tag(i) + ": action " + std::to_string(x[i]) +
                            " is not 0 or 1");
    }
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) {
      std::ostringstream os;
      os.precision(17);
      os << player_tag(i) << ": opinion " << y[i] << " is outside [0, 1]";
      throw ValidationError(os.str());
    }
  }
}

SystemState SystemState::uniform(int n, int action, double opinion) {
  SystemState s{std::vector<int>(static_cast<std::size_t>(n), action),
                std::vector<double>(static_cast<std::size_t>(n), opinion)};
  s.validate(n);
  return s;
}

bool BestResponseSet::contains(int action, double opinion, double opinion_tol) const {
  for (const Strategy& e : entries) {
    if (e.action == action && std::abs(e.opinion - opinion) <= opinion_tol) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Payoffs

double pgg_payoff(int i, std::span<const int> x, const ModelParams& params) {
  const int n = params.n();
  require_length<int>(x, n, "action vector");
  require_player(i, n);
  int others = 0;
  for (int j = 0; j < n; ++j) {
    if (j != i) others += x[j];
  }
  const double share = params.r() / static_cast<double>(n);
  if (x[i] == 1) return params.r() * static_cast<double>(others + 1) / n - 1.0;
  return share * static_cast<double>(others);
}

double opinion_payoff(int i, std::span<const double> y, const ModelParams& params,
                      const Network& net) {
  const PlayerWeights& p = params.player(i);
  require_length<double>(y, net.n(), "opinion vector");
  if (net.n() != params.n()) throw ValidationError("network size differs from player count");
  const double yi = y[i];
  const double disagreement = kernels::weighted_sq_dist(net.row(i), yi, y);
  const double prejudice = (yi - p.u) * (yi - p.u);
  return -0.5 * (1.0 - p.gamma) * disagreement - 0.5 * p.gamma * prejudice;
}

double total_payoff(int i, const SystemState& state, const ModelParams& params,
                    const Network& net) {
  require_player(i, params.n());
  require_length<int>(state.x, params.n(), "action vector");
  return deviation_payoff(i, Strategy{state.x[i], state.y[i]}, state, params, net);
}

double deviation_payoff(int i, const Strategy& candidate, const SystemState& state,
                        const ModelParams& params, const Network& net) {
  const PlayerWeights& p = params.player(i);
  require_length<int>(state.x, params.n(), "action vector");
  require_length<double>(state.y, params.n(), "opinion vector");
  if (net.n() != params.n()) throw ValidationError("network size differs from player count");

  std::vector<int> x = state.x;
  x[i] = candidate.action;
  const double action_part = pgg_payoff(i, x, params);

  const double o = candidate.opinion;
  const double disagreement = kernels::weighted_sq_dist(net.row(i), o, state.y);
  const double opinion_part =
      -0.5 * (1.0 - p.gamma) * disagreement - 0.5 * p.gamma * (o - p.u) * (o - p.u);

  const double gap = static_cast<double>(candidate.action) - o;
  return p.alpha * action_part + p.beta * opinion_part - 0.5 * p.lambda * gap * gap;
}

double social_term(int i, std::span<const double> y, const Network& net) {
  require_length<double>(y, net.n(), "opinion vector");
  return kernels::dot(net.row(i), y);
}

double discriminant(int i, std::span<const double> y, const ModelParams& params,
                    const Network& net) {
  const PlayerWeights& p = params.player(i);
  const double denom = opinion_weight(i, p);
  const double pull = p.gamma * p.u + (1.0 - p.gamma) * social_term(i, y, net);
  const double n = static_cast<double>(params.n());
  return p.alpha * (params.r() / n - 1.0) + (p.beta * p.lambda / denom) * (pull - 0.5);
}

double best_response_opinion(int i, int action, std::span<const double> y,
                             const ModelParams& params, const Network& net) {
  const PlayerWeights& p = params.player(i);
  const double denom = opinion_weight(i, p);
  const double s = social_term(i, y, net);
  const double value = (p.beta * (1.0 - p.gamma) * s + p.beta * p.gamma * p.u +
                        static_cast<double>(action) * p.lambda) /
                       denom;
  // Rows may miss 1 by up to kRowSumTolerance; keep the convex combination in range.
  return std::clamp(value, 0.0, 1.0);
}

BestResponseSet best_response(int i, std::span<const double> y, const ModelParams& params,
                              const Network& net) {
  BestResponseSet out;
  out.discriminant = discriminant(i, y, params, net);
  if (std::abs(out.discriminant) <= kTieTolerance) {
    out.entries.push_back({0, best_response_opinion(i, 0, y, params, net)});
    out.entries.push_back({1, best_response_opinion(i, 1, y, params, net)});
  } else {
    const int action = out.discriminant > 0.0 ? 1 : 0;
    out.entries.push_back({action, best_response_opinion(i, action, y, params, net)});
  }
  return out;
}

}  // namespace coevo
