#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "coevo/model.hpp"
#include "coevo/rng.hpp"

namespace testing {

using coevo::ModelParams;
using coevo::Network;
using coevo::PlayerWeights;
using coevo::Rng;

inline double uniform_open(Rng& rng) {
  double v;
  do {
    v = rng.uniform();
  } while (v <= 0.0);
  return v;
}

// Flat Dirichlet over (alpha, beta, lambda); all three strictly positive.
inline PlayerWeights dirichlet_weights(Rng& rng) {
  const double a = -std::log(uniform_open(rng));
  const double b = -std::log(uniform_open(rng));
  const double c = -std::log(uniform_open(rng));
  const double s = a + b + c;
  PlayerWeights w;
  w.alpha = a / s;
  w.beta = b / s;
  w.lambda = 1.0 - w.alpha - w.beta;
  if (!(w.lambda > 0.0)) return dirichlet_weights(rng);
  return w;
}

inline double random_r(Rng& rng, int n) {
  return 1.0 + (n - 1) * uniform_open(rng) * (1.0 - 1e-9);
}

inline ModelParams random_params(Rng& rng, int n) {
  std::vector<PlayerWeights> players;
  for (int i = 0; i < n; ++i) players.push_back(dirichlet_weights(rng));
  return ModelParams(random_r(rng, n), std::move(players));
}

// Like random_params but with gamma, u drawn from [0, 1].
inline ModelParams random_params_with_prejudice(Rng& rng, int n) {
  std::vector<PlayerWeights> players;
  for (int i = 0; i < n; ++i) {
    PlayerWeights w = dirichlet_weights(rng);
    w.gamma = rng.uniform_closed();
    w.u = rng.uniform_closed();
    players.push_back(w);
  }
  return ModelParams(random_r(rng, n), std::move(players));
}

inline double lhs_term(const PlayerWeights& w) { return w.beta * w.lambda / (w.beta + w.lambda); }
inline double rhs_term(const PlayerWeights& w, double r, int n) {
  return 2.0 * w.alpha * (1.0 - r / n);
}

// Rejection sampling per player until the all-defection condition holds with a margin.
inline ModelParams params_all_defection_unique(Rng& rng, int n) {
  for (;;) {
    const double r = random_r(rng, n);
    std::vector<PlayerWeights> players;
    for (int i = 0; i < n; ++i) {
      for (int tries = 0; tries < 2000; ++tries) {
        const PlayerWeights w = dirichlet_weights(rng);
        if (lhs_term(w) < rhs_term(w, r, n) - 1e-9) {
          players.push_back(w);
          break;
        }
      }
    }
    if (static_cast<int>(players.size()) == n) return ModelParams(r, std::move(players));
  }
}

inline ModelParams params_all_cooperation_exists(Rng& rng, int n) {
  for (;;) {
    const double r = random_r(rng, n);
    std::vector<PlayerWeights> players;
    for (int i = 0; i < n; ++i) {
      for (int tries = 0; tries < 2000; ++tries) {
        const PlayerWeights w = dirichlet_weights(rng);
        if (lhs_term(w) > rhs_term(w, r, n) + 1e-9) {
          players.push_back(w);
          break;
        }
      }
    }
    if (static_cast<int>(players.size()) == n) return ModelParams(r, std::move(players));
  }
}

// Random row-stochastic W; sparse rows, self-loops allowed.
inline Network random_row_stochastic(Rng& rng, int n) {
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.bernoulli(0.7)) {
        const double v = rng.uniform();
        w[static_cast<std::size_t>(i) * n + j] = v;
        sum += v;
      }
    }
    if (sum == 0.0) w[static_cast<std::size_t>(i) * n + (i + 1) % n] = 1.0;
  }
  return Network::normalised(n, std::move(w));
}

inline std::vector<int> random_derangement(Rng& rng, int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (;;) {
    std::iota(p.begin(), p.end(), 0);
    rng.shuffle(p.begin(), p.end());
    bool fixed = false;
    for (int i = 0; i < n; ++i) fixed = fixed || p[static_cast<std::size_t>(i)] == i;
    if (!fixed) return p;
  }
}

// Convex mixture of (P + P^T)/2 over derangements: symmetric, doubly
// stochastic, zero diagonal.
inline Network random_symmetric_zero_diagonal(Rng& rng, int n, int terms = 3) {
  std::vector<double> c(static_cast<std::size_t>(terms));
  for (double& v : c) v = -std::log(uniform_open(rng));
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < terms; ++k) {
    const std::vector<int> p = random_derangement(rng, n);
    const double ck = c[static_cast<std::size_t>(k)] / total;
    for (int i = 0; i < n; ++i) {
      const int j = p[static_cast<std::size_t>(i)];
      w[static_cast<std::size_t>(i) * n + j] += 0.5 * ck;
      w[static_cast<std::size_t>(j) * n + i] += 0.5 * ck;
    }
  }
  // Re-symmetrise after rounding, then pin row sums.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = w[static_cast<std::size_t>(i) * n + j];
      w[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return Network(n, std::move(w));
}

inline std::vector<double> random_opinions(Rng& rng, int n) {
  std::vector<double> y(static_cast<std::size_t>(n));
  for (double& v : y) v = rng.uniform_closed();
  return y;
}

inline std::vector<int> random_actions(Rng& rng, int n) {
  std::vector<int> x(static_cast<std::size_t>(n));
  for (int& v : x) v = rng.bernoulli(0.5) ? 1 : 0;
  return x;
}

// Payoff of player i switching to (a, o) with everyone else fixed. Written
// out term by term; shares no code with the library. Self-loop weight pulls
// toward the player's current opinion.
inline double oracle_payoff(int i, int a, double o, const std::vector<int>& x,
                            const std::vector<double>& y, const ModelParams& params,
                            const Network& net) {
  const int n = params.n();
  const PlayerWeights& p = params.players()[static_cast<std::size_t>(i)];
  int others = 0;
  for (int j = 0; j < n; ++j) {
    if (j != i) others += x[static_cast<std::size_t>(j)];
  }
  const double r = params.r();
  const double pgg = a == 1 ? r * (others + 1) / n - 1.0 : r / n * others;
  double spread = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = o - y[static_cast<std::size_t>(j)];
    spread += net.weight(i, j) * d * d;
  }
  const double opinion =
      -0.5 * (1.0 - p.gamma) * spread - 0.5 * p.gamma * (o - p.u) * (o - p.u);
  return p.alpha * pgg + p.beta * opinion - 0.5 * p.lambda * (a - o) * (a - o);
}

// Potential written as the double sum.
inline double oracle_potential(const std::vector<double>& y, const ModelParams& params,
                               const Network& net) {
  const int n = params.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const PlayerWeights& p = params.players()[static_cast<std::size_t>(i)];
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(j)];
      row += 0.5 * net.weight(i, j) * d * d;
    }
    total += row + p.lambda / p.beta * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
  }
  return -0.5 * total;
}

struct GridMax {
  double payoff = -1e300;
  int action = 0;
  double opinion = 0.0;
  double best_for_action[2] = {-1e300, -1e300};
  double opinion_for_action[2] = {0.0, 0.0};
};

// Exhaustive search over {0,1} x {k / resolution}.
inline GridMax grid_argmax(int i, const std::vector<int>& x, const std::vector<double>& y,
                           const ModelParams& params, const Network& net,
                           int resolution = 1000) {
  GridMax g;
  for (int a = 0; a <= 1; ++a) {
    for (int k = 0; k <= resolution; ++k) {
      const double o = static_cast<double>(k) / resolution;
      const double v = oracle_payoff(i, a, o, x, y, params, net);
      if (v > g.best_for_action[a]) {
        g.best_for_action[a] = v;
        g.opinion_for_action[a] = o;
      }
      if (v > g.payoff) {
        g.payoff = v;
        g.action = a;
        g.opinion = o;
      }
    }
  }
  return g;
}

inline double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace testing
