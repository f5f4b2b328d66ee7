#include "coevo/analysis.hpp"

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/kernels.hpp"
#include "coevo/rng.hpp"
#include "parallel.hpp"

namespace coevo {
namespace {

void require_strict_interior(const ModelParams& params) {
  if (!params.strict_interior()) {
    throw ValidationError(
        "consensus-equilibrium conditions need zero prejudice (gamma = 0) and alpha, beta, "
        "lambda strictly inside (0, 1) for every player");
  }
}

void require_solvable(const ModelParams& params, const Network& net) {
  if (net.n() != params.n()) throw ValidationError("network size differs from player count");
  for (int i = 0; i < params.n(); ++i) {
    const PlayerWeights& p = params.player(i);
    if (p.gamma != 0.0) {
      throw ValidationError("opinion equilibrium analysis requires gamma = 0; player " +
                            std::to_string(i + 1) + " has gamma != 0");
    }
    if (!(p.lambda > 0.0)) {
      throw ValidationError("opinion equilibrium analysis requires lambda > 0; player " +
                            std::to_string(i + 1) + " has lambda = 0");
    }
  }
}

ConditionReport check_condition(const ModelParams& params, ConditionId id) {
  require_strict_interior(params);
  ConditionReport report;
  report.condition_id = id;
  report.all_hold = true;
  const double ratio = params.r() / static_cast<double>(params.n());
  for (const PlayerWeights& p : params.players()) {
    ConditionTerm term;
    term.lhs = p.beta * p.lambda / (p.beta + p.lambda);
    term.rhs = 2.0 * p.alpha * (1.0 - ratio);
    // delta_i at unanimous full support equals (lhs - rhs) / 2.
    const bool defect_side = term.lhs - term.rhs <= 2.0 * kTieTolerance;
    term.holds = id == ConditionId::all_defection_unique ? defect_side : !defect_side;
    report.all_hold = report.all_hold && term.holds;
    report.per_player.push_back(term);
  }
  return report;
}

// phi_i = beta_i / (beta_i + lambda_i); the system is (I - phi W) y = (I - phi) x.
struct OpinionSystem {
  std::vector<double> phi;
  std::vector<double> anchor;  // lambda_i / (beta_i + lambda_i)
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  OpinionSystem(const ModelParams& params, const Network& net) {
    const int n = params.n();
    phi.resize(static_cast<std::size_t>(n));
    anchor.resize(static_cast<std::size_t>(n));
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      const PlayerWeights& p = params.player(i);
      phi[i] = p.beta / (p.beta + p.lambda);
      anchor[i] = p.lambda / (p.beta + p.lambda);
      for (int j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - phi[i] * net.weight(i, j);
    }
    lu.compute(a);
  }
};

double fixed_point_residual(std::span<const double> y, std::span<const int> x,
                            const std::vector<double>& phi, const std::vector<double>& anchor,
                            const Network& net) {
  double worst = 0.0;
  for (int i = 0; i < net.n(); ++i) {
    const double image = phi[i] * kernels::dot(net.row(i), y) + anchor[i] * x[i];
    worst = std::max(worst, std::abs(y[i] - image));
  }
  return worst;
}

std::vector<double> clamp_unit(const Eigen::VectorXd& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InternalFault("opinion system produced a non-finite value");
    out[static_cast<std::size_t>(i)] = std::clamp(v[i], 0.0, 1.0);
  }
  return out;
}

OpinionSolution solve_direct(std::span<const int> x, const OpinionSystem& sys,
                             const Network& net) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = sys.anchor[i] * x[i];
  OpinionSolution out;
  out.y = clamp_unit(sys.lu.solve(rhs));
  out.residual = fixed_point_residual(out.y, x, sys.phi, sys.anchor, net);
  if (!(out.residual <= 1e-8)) {
    throw InternalFault("opinion system is numerically singular (residual " +
                        std::to_string(out.residual) + ")");
  }
  return out;
}

OpinionSolution solve_iterative(std::span<const int> x, const ModelParams& params,
                                const Network& net) {
  const auto n = static_cast<std::size_t>(params.n());
  std::vector<double> phi(n), anchor(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PlayerWeights& p = params.player(static_cast<int>(i));
    phi[i] = p.beta / (p.beta + p.lambda);
    anchor[i] = p.lambda / (p.beta + p.lambda);
  }
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> wy(n);
  OpinionSolution out;
  for (int it = 1; it <= kFixedPointMaxIterations; ++it) {
    kernels::active().matvec(net.data().data(), y.data(), wy.data(), n, n);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = phi[i] * wy[i] + anchor[i] * x[i];
      change = std::max(change, std::abs(next - y[i]));
      y[i] = next;
    }
    out.iterations = it;
    if (change <= kFixedPointStopTol) break;
  }
  for (double& v : y) v = std::clamp(v, 0.0, 1.0);
  out.residual = fixed_point_residual(y, x, phi, anchor, net);
  out.y = std::move(y);
  return out;
}

bool cooperator_count_then_lex(const Equilibrium& a, const Equilibrium& b) {
  const auto ca = std::count(a.state.x.begin(), a.state.x.end(), 1);
  const auto cb = std::count(b.state.x.begin(), b.state.x.end(), 1);
  if (ca != cb) return ca < cb;
  return a.state.x < b.state.x;
}

}  // namespace

std::string_view to_string(ConditionId id) {
  return id == ConditionId::all_defection_unique ? "all_defection_unique"
                                                 : "all_cooperation_exists";
}

ConditionReport check_all_defection_unique(const ModelParams& params) {
  return check_condition(params, ConditionId::all_defection_unique);
}

ConditionReport check_all_cooperation_exists(const ModelParams& params) {
  return check_condition(params, ConditionId::all_cooperation_exists);
}

OpinionSolution solve_opinion_equilibrium(std::span<const int> x, const ModelParams& params,
                                          const Network& net, SolveMethod method) {
  require_solvable(params, net);
  if (x.size() != static_cast<std::size_t>(params.n())) {
    throw ValidationError("action vector has length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(params.n()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0 && x[i] != 1) {
      throw ValidationError("player " + std::to_string(i + 1) + ": action is not 0 or 1");
    }
  }
  if (method == SolveMethod::fixed_point_iteration) return solve_iterative(x, params, net);
  const OpinionSystem sys(params, net);
  return solve_direct(x, sys, net);
}

NashVerdict verify_nash(const SystemState& state, const ModelParams& params, const Network& net,
                        double tol) {
  state.validate(params.n());
  if (net.n() != params.n()) throw ValidationError("network size differs from player count");
  NashVerdict verdict;
  for (int i = 0; i < params.n(); ++i) {
    BestResponseSet br = best_response(i, state.y, params, net);
    if (!br.contains(state.x[i], state.y[i], tol)) {
      verdict.witness = NashWitness{i, std::move(br)};
      return verdict;
    }
  }
  verdict.is_nash = true;
  return verdict;
}

EquilibriumReport enumerate_equilibria(const ModelParams& params, const Network& net, int max_n) {
  require_solvable(params, net);
  const int n = params.n();
  if (n > max_n) {
    std::ostringstream os;
    os << "refusing to enumerate n = " << n << " > max_n = " << max_n << ": 2^" << n << " = "
       << (std::uint64_t{1} << std::min(n, 63)) << " action profiles, each an " << n << "x" << n
       << " triangular solve (~" << static_cast<double>(std::uint64_t{1} << std::min(n, 63)) *
                                        2.0 * n * n
       << " flops)";
    throw ValidationError(os.str());
  }

  const OpinionSystem sys(params, net);
  const std::int64_t profiles = std::int64_t{1} << n;
  struct Found {
    std::vector<Equilibrium> strict;
    std::vector<Equilibrium> boundary;
  };
  const int threads = detail::resolve_threads(0, profiles / 256 + 1);
  std::vector<Found> found(static_cast<std::size_t>(threads));

  detail::parallel_chunks(profiles, threads, [&](std::int64_t begin, std::int64_t end, int w) {
    std::vector<int> x(static_cast<std::size_t>(n));
    for (std::int64_t bits = begin; bits < end; ++bits) {
      for (int i = 0; i < n; ++i) x[i] = static_cast<int>((bits >> i) & 1);
      OpinionSolution sol = solve_direct(x, sys, net);
      bool dynamics_ok = true;
      bool nash_ok = true;
      for (int i = 0; i < n && nash_ok; ++i) {
        const double delta = discriminant(i, sol.y, params, net);
        if (revision_action(delta) != x[i]) {
          dynamics_ok = false;
          // A cooperator on a tie is still best-responding.
          if (!(x[i] == 1 && std::abs(delta) <= kTieTolerance)) nash_ok = false;
        }
      }
      if (!nash_ok) continue;
      Equilibrium eq{SystemState{x, std::move(sol.y)}, {}, sol.residual};
      eq.state_class = classify_state(eq.state, kEquilibriumVerifyTol);
      (dynamics_ok ? found[w].strict : found[w].boundary).push_back(std::move(eq));
    }
  });

  EquilibriumReport report;
  report.action_profiles_scanned = profiles;
  for (Found& f : found) {
    std::move(f.strict.begin(), f.strict.end(), std::back_inserter(report.equilibria));
    std::move(f.boundary.begin(), f.boundary.end(),
              std::back_inserter(report.boundary_equilibria));
  }
  std::sort(report.equilibria.begin(), report.equilibria.end(), cooperator_count_then_lex);
  std::sort(report.boundary_equilibria.begin(), report.boundary_equilibria.end(),
            cooperator_count_then_lex);

  for (const Equilibrium& eq : report.equilibria) {
    if (!verify_nash(eq.state, params, net, kEquilibriumVerifyTol).is_nash ||
        !is_fixed_point(eq.state, params, net, kEquilibriumVerifyTol)) {
      throw InternalFault("enumerated equilibrium failed verification");
    }
  }
  for (const Equilibrium& eq : report.boundary_equilibria) {
    if (!verify_nash(eq.state, params, net, kEquilibriumVerifyTol).is_nash) {
      throw InternalFault("enumerated boundary equilibrium failed Nash verification");
    }
  }
  return report;
}

SweepTable sweep(const SweepGrid& grid, const Network& net, const RevisionSchedule& schedule,
                 const SweepOptions& options) {
  const int n = net.n();
  if (schedule.n() != n) throw ValidationError("schedule size differs from network size");
  if (options.trials < 0) throw ValidationError("trials must be nonnegative");

  SweepTable table;
  if (!schedule.covers_all_players()) {
    table.warnings.push_back(
        "schedule '" + std::string(to_string(schedule.kind())) +
        "' does not guarantee that every player revises within a bounded window; convergence "
        "guarantees for the all-defection condition do not apply");
  }

  const auto cells = static_cast<std::int64_t>(grid.size());
  table.cells.resize(static_cast<std::size_t>(cells));
  for (std::size_t ir = 0, k = 0; ir < grid.r.size(); ++ir) {
    for (std::size_t ia = 0; ia < grid.alpha.size(); ++ia) {
      for (std::size_t ib = 0; ib < grid.beta.size(); ++ib, ++k) {
        SweepCell& c = table.cells[k];
        c.r = grid.r[ir];
        c.alpha = grid.alpha[ia];
        c.beta = grid.beta[ib];
        c.lambda = 1.0 - c.alpha - c.beta;
      }
    }
  }

  detail::parallel_chunks(cells, options.threads, [&](std::int64_t begin, std::int64_t end, int) {
    for (std::int64_t k = begin; k < end; ++k) {
      SweepCell& c = table.cells[static_cast<std::size_t>(k)];
      std::optional<ModelParams> params;
      try {
        params.emplace(ModelParams::uniform(n, c.r, {c.alpha, c.beta, c.lambda, 0.0, 0.0}));
        c.all_defection_unique = check_all_defection_unique(*params).all_hold;
        c.all_cooperation_exists = check_all_cooperation_exists(*params).all_hold;
      } catch (const ValidationError& e) {
        c.valid = false;
        c.error = e.what();
        continue;
      }
      c.valid = true;
      if (n <= options.max_enumeration_n) {
        const EquilibriumReport rep = enumerate_equilibria(*params, net, options.max_enumeration_n);
        c.equilibria_count = static_cast<int>(rep.equilibria.size());
        c.boundary_equilibria_count = static_cast<int>(rep.boundary_equilibria.size());
      }
      const std::uint64_t cell_seed = derive_seed(options.seed, static_cast<std::uint64_t>(k));
      for (int trial = 0; trial < options.trials; ++trial) {
        Rng rng(derive_seed(cell_seed, static_cast<std::uint64_t>(trial)));
        SystemState init;
        init.x.resize(static_cast<std::size_t>(n));
        init.y.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          init.x[i] = rng.bernoulli(0.5) ? 1 : 0;
          init.y[i] = rng.uniform_closed();
        }
        const RevisionSchedule trial_schedule(schedule.kind(), n,
                                              derive_seed(schedule.seed(), rng.next()));
        RunOptions ro;
        ro.max_steps = options.max_steps;
        ro.fixed_point_tol = options.fixed_point_tol;
        ro.record = false;
        const Trajectory traj = run(init, trial_schedule, *params, net, ro);
        ++c.trials;
        if (traj.stop_reason != StopReason::fixed_point) {
          ++c.not_converged;
          continue;
        }
        switch (classify_state(traj.final_state, options.opinion_tol).full_class) {
          case FullConsensus::all_defection_consensus:
            ++c.to_all_defection;
            break;
          case FullConsensus::all_cooperation_consensus:
            ++c.to_all_cooperation;
            break;
          case FullConsensus::none:
            ++c.to_other_fixed_point;
            break;
        }
      }
    }
  });
  return table;
}

}  // namespace coevo
