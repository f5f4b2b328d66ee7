#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coevo/analysis.hpp"
#include "coevo/error.hpp"
#include "coevo/io.hpp"
#include "support.hpp"

using namespace coevo;

namespace {

const PlayerWeights kThirds{1.0 / 3, 1.0 / 3, 1.0 - 2.0 / 3, 0.0, 0.0};

std::set<std::vector<int>> profiles(const std::vector<Equilibrium>& eqs) {
  std::set<std::vector<int>> out;
  for (const Equilibrium& e : eqs) out.insert(e.state.x);
  return out;
}

// Grids y over {0, h, ..., 1}^n and keeps action profiles with a grid point
// that is nearly stationary and whose discriminants have an unambiguous
// sign. The sign margin covers the distance from the grid point to the true
// opinion equilibrium, so every profile reported here is a real equilibrium.
struct GridHit {
  std::set<std::vector<int>> robust;
  double margin = 0.0;
};

GridHit grid_equilibria(const ModelParams& p, const Network& w, int steps) {
  const int n = p.n();
  const double h = 1.0 / steps;
  double phi_max = 0.0;
  for (const PlayerWeights& q : p.players()) phi_max = std::max(phi_max, q.beta / (q.beta + q.lambda));
  GridHit hit;
  hit.margin = 0.25 * h / (1.0 - phi_max) + 1e-9;

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> y(static_cast<std::size_t>(n));
  const long total = static_cast<long>(std::pow(steps + 1, n));
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (mask >> i) & 1;
    for (long code = 0; code < total; ++code) {
      long c = code;
      for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = static_cast<double>(c % (steps + 1)) * h;
        c /= steps + 1;
      }
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const PlayerWeights& q = p.players()[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += w.weight(i, j) * y[static_cast<std::size_t>(j)];
        const double target = (q.beta * s + q.lambda * x[static_cast<std::size_t>(i)]) / (q.beta + q.lambda);
        if (std::abs(y[static_cast<std::size_t>(i)] - target) > h) ok = false;
        const double delta =
            q.alpha * (p.r() / n - 1.0) + q.beta * q.lambda / (q.beta + q.lambda) * (s - 0.5);
        if (x[static_cast<std::size_t>(i)] == 1 ? delta <= hit.margin : delta >= -hit.margin) ok = false;
      }
      if (ok) {
        hit.robust.insert(x);
        break;
      }
    }
  }
  return hit;
}

}  // namespace

TEST_CASE("all-defection condition examples") {
  const ConditionReport low = check_all_defection_unique(ModelParams::uniform(4, 2.0, kThirds));
  CHECK(low.condition_id == ConditionId::all_defection_unique);
  CHECK(low.all_hold);
  REQUIRE(low.per_player.size() == 4);
  for (const ConditionTerm& t : low.per_player) {
    CHECK(t.lhs == doctest::Approx(1.0 / 6).epsilon(1e-14));
    CHECK(t.rhs == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(t.holds);
  }
  const ConditionReport high = check_all_defection_unique(ModelParams::uniform(4, 3.8, kThirds));
  CHECK_FALSE(high.all_hold);
  for (const ConditionTerm& t : high.per_player) {
    CHECK(t.rhs == doctest::Approx(1.0 / 30).epsilon(1e-12));
    CHECK_FALSE(t.holds);
  }
  const ConditionReport tiny_beta =
      check_all_defection_unique(ModelParams::uniform(4, 3.8, {0.5, 1e-12, 0.5 - 1e-12, 0.0, 0.0}));
  CHECK(tiny_beta.all_hold);
  CHECK(tiny_beta.per_player[0].lhs < 1e-11);
}

TEST_CASE("all-cooperation condition examples") {
  CHECK(check_all_cooperation_exists(ModelParams::uniform(4, 3.8, kThirds)).all_hold);
  const ConditionReport low = check_all_cooperation_exists(ModelParams::uniform(4, 2.0, kThirds));
  CHECK(low.condition_id == ConditionId::all_cooperation_exists);
  CHECK_FALSE(low.all_hold);
  for (const ConditionTerm& t : low.per_player) CHECK_FALSE(t.holds);
  // lhs = rhs = 1/6 at n=2, r=1.5 with equal weights.
  const ModelParams edge = ModelParams::uniform(2, 1.5, kThirds);
  CHECK_FALSE(check_all_cooperation_exists(edge).all_hold);
  CHECK(check_all_defection_unique(edge).all_hold);
  CHECK(to_string(ConditionId::all_cooperation_exists) == "all_cooperation_exists");
}

TEST_CASE("conditions reject non-interior params") {
  const ModelParams edge = ModelParams::uniform(4, 2.0, {0.5, 0.5, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(check_all_defection_unique(edge), ValidationError);
  CHECK_THROWS_AS(check_all_cooperation_exists(edge), ValidationError);
  const ModelParams prejudiced = ModelParams::uniform(4, 2.0, {0.3, 0.3, 0.4, 0.2, 0.1});
  CHECK_THROWS_AS(check_all_defection_unique(prejudiced), ValidationError);
}

TEST_CASE("the two conditions partition the parameter space") {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(10));
    const ModelParams p = testing::random_params(rng, n);
    const ConditionReport a = check_all_defection_unique(p);
    const ConditionReport b = check_all_cooperation_exists(p);
    for (int i = 0; i < n; ++i) {
      CHECK(a.per_player[static_cast<std::size_t>(i)].holds != b.per_player[static_cast<std::size_t>(i)].holds);
      CHECK(a.per_player[static_cast<std::size_t>(i)].lhs ==
            doctest::Approx(testing::lhs_term(p.player(i))).epsilon(1e-14));
    }
  }
}

TEST_CASE("opinion equilibrium examples") {
  const Network w = io::complete_network(4);
  const ModelParams p = ModelParams::uniform(4, 2.0, kThirds);
  for (SolveMethod m : {SolveMethod::direct, SolveMethod::fixed_point_iteration}) {
    const OpinionSolution zero = solve_opinion_equilibrium(std::vector<int>(4, 0), p, w, m);
    for (double v : zero.y) CHECK(std::abs(v) <= 1e-12);
    const OpinionSolution one = solve_opinion_equilibrium(std::vector<int>(4, 1), p, w, m);
    for (double v : one.y) CHECK(std::abs(v - 1.0) <= 1e-12);
  }
  const Network swap(2, {0.0, 1.0, 1.0, 0.0});
  const ModelParams two = ModelParams::uniform(2, 1.5, kThirds);
  for (SolveMethod m : {SolveMethod::direct, SolveMethod::fixed_point_iteration}) {
    const OpinionSolution s = solve_opinion_equilibrium(std::vector<int>{1, 0}, two, swap, m);
    CHECK(std::abs(s.y[0] - 2.0 / 3) <= 1e-12);
    CHECK(std::abs(s.y[1] - 1.0 / 3) <= 1e-12);
  }
}

TEST_CASE("opinion equilibrium preconditions") {
  const Network w = io::complete_network(3);
  CHECK_THROWS_AS(solve_opinion_equilibrium(std::vector<int>(3, 0),
                                            ModelParams::uniform(3, 2.0, {0.3, 0.3, 0.4, 0.1, 0.0}), w),
                  ValidationError);
  CHECK_THROWS_AS(solve_opinion_equilibrium(std::vector<int>(3, 0),
                                            ModelParams::uniform(3, 2.0, {0.5, 0.5, 0.0, 0.0, 0.0}), w),
                  ValidationError);
  CHECK_THROWS_AS(solve_opinion_equilibrium(std::vector<int>(2, 0),
                                            ModelParams::uniform(3, 2.0, kThirds), w),
                  ValidationError);
}

TEST_CASE("direct and iterative opinion solves agree") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(12));
    const ModelParams p = testing::random_params(rng, n);
    const Network w = testing::random_row_stochastic(rng, n);
    const auto x = testing::random_actions(rng, n);
    const OpinionSolution d = solve_opinion_equilibrium(x, p, w, SolveMethod::direct);
    const OpinionSolution f = solve_opinion_equilibrium(x, p, w, SolveMethod::fixed_point_iteration);
    double gap = 0.0;
    for (int i = 0; i < n; ++i) gap = std::max(gap, std::abs(d.y[static_cast<std::size_t>(i)] - f.y[static_cast<std::size_t>(i)]));
    CHECK(gap <= 1e-10);
    CHECK(d.iterations == 0);
    CHECK(f.iterations > 0);
    CHECK(d.residual <= 1e-12);
    for (int i = 0; i < n; ++i) {
      const PlayerWeights& q = p.player(i);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += w.weight(i, j) * d.y[static_cast<std::size_t>(j)];
      CHECK(std::abs(d.y[static_cast<std::size_t>(i)] -
                     (q.beta * s + q.lambda * x[static_cast<std::size_t>(i)]) / (q.beta + q.lambda)) <= 1e-12);
    }
  }
}

TEST_CASE("fixed-point iteration contracts at the predicted rate") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(8));
    const ModelParams p = testing::random_params(rng, n);
    const Network w = testing::random_row_stochastic(rng, n);
    const auto x = testing::random_actions(rng, n);
    const std::vector<double> star = solve_opinion_equilibrium(x, p, w).y;
    double rate = 0.0;
    for (const PlayerWeights& q : p.players()) rate = std::max(rate, q.beta / (q.beta + q.lambda));
    std::vector<double> y = testing::random_opinions(rng, n);
    for (int it = 0; it < 20; ++it) {
      std::vector<double> next(y.size());
      for (int i = 0; i < n; ++i) {
        const PlayerWeights& q = p.player(i);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += w.weight(i, j) * y[static_cast<std::size_t>(j)];
        next[static_cast<std::size_t>(i)] = (q.beta * s + q.lambda * x[static_cast<std::size_t>(i)]) / (q.beta + q.lambda);
      }
      double before = 0.0, after = 0.0;
      for (int i = 0; i < n; ++i) {
        before = std::max(before, std::abs(y[static_cast<std::size_t>(i)] - star[static_cast<std::size_t>(i)]));
        after = std::max(after, std::abs(next[static_cast<std::size_t>(i)] - star[static_cast<std::size_t>(i)]));
      }
      CHECK(after <= rate * before + 1e-14);
      y = next;
    }
  }
}

TEST_CASE("verify_nash examples") {
  const Network w = io::complete_network(4);
  const ModelParams low = ModelParams::uniform(4, 2.0, kThirds);
  const ModelParams high = ModelParams::uniform(4, 3.8, kThirds);
  CHECK(verify_nash(SystemState::uniform(4, 0, 0.0), low, w, 1e-9).is_nash);
  CHECK(verify_nash(SystemState::uniform(4, 0, 0.0), high, w, 1e-9).is_nash);

  const NashVerdict bad = verify_nash(SystemState::uniform(4, 1, 1.0), low, w, 1e-9);
  CHECK_FALSE(bad.is_nash);
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->player == 0);
  REQUIRE(bad.witness->better.entries.size() == 1);
  CHECK(bad.witness->better.entries[0].action == 0);
  CHECK(bad.witness->better.entries[0].opinion == doctest::Approx(0.5).epsilon(1e-14));

  const NashVerdict good = verify_nash(SystemState::uniform(4, 1, 1.0), high, w, 1e-9);
  CHECK(good.is_nash);
  CHECK_FALSE(good.witness.has_value());
}

TEST_CASE("enumeration examples") {
  const Network w = io::complete_network(4);
  SUBCASE("all-defection condition") {
    const EquilibriumReport r = enumerate_equilibria(ModelParams::uniform(4, 2.0, kThirds), w);
    CHECK(r.action_profiles_scanned == 16);
    REQUIRE(r.equilibria.size() == 1);
    CHECK(r.equilibria[0].state == SystemState::uniform(4, 0, 0.0));
    CHECK(r.equilibria[0].state_class.full_class == FullConsensus::all_defection_consensus);
    CHECK(r.boundary_equilibria.empty());
  }
  SUBCASE("high multiplier") {
    const EquilibriumReport r = enumerate_equilibria(ModelParams::uniform(4, 3.8, kThirds), w);
    const auto found = profiles(r.equilibria);
    CHECK(found.count(std::vector<int>{0, 0, 0, 0}) == 1);
    CHECK(found.count(std::vector<int>{1, 1, 1, 1}) == 1);
    CHECK(r.equilibria.front().state.x == std::vector<int>{0, 0, 0, 0});
    CHECK(r.equilibria.back().state.x == std::vector<int>{1, 1, 1, 1});
  }
  SUBCASE("two players on the condition boundary") {
    const Network swap(2, {0.0, 1.0, 1.0, 0.0});
    const EquilibriumReport r = enumerate_equilibria(ModelParams::uniform(2, 1.5, kThirds), swap);
    REQUIRE(r.equilibria.size() == 1);
    CHECK(r.equilibria[0].state.x == std::vector<int>{0, 0});
    REQUIRE(r.boundary_equilibria.size() == 1);
    CHECK(r.boundary_equilibria[0].state.x == std::vector<int>{1, 1});
  }
}

TEST_CASE("enumeration refuses large or prejudiced instances") {
  const ModelParams big = ModelParams::uniform(17, 2.0, kThirds);
  try {
    enumerate_equilibria(big, io::complete_network(17));
    FAIL("expected refusal");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("131072") != std::string::npos);
  }
  CHECK_NOTHROW(enumerate_equilibria(ModelParams::uniform(5, 2.0, kThirds), io::complete_network(5), 5));
  CHECK_THROWS_AS(enumerate_equilibria(ModelParams::uniform(5, 2.0, kThirds), io::complete_network(5), 4),
                  ValidationError);
  CHECK_THROWS_AS(enumerate_equilibria(ModelParams::uniform(3, 2.0, {0.3, 0.3, 0.4, 0.5, 0.2}),
                                       io::complete_network(3)),
                  ValidationError);
}

TEST_CASE("enumerated equilibria are Nash fixed points, sorted") {
  Rng rng(88);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const ModelParams p = trial % 3 ? testing::random_params(rng, n) : testing::params_all_cooperation_exists(rng, n);
    const Network w = testing::random_row_stochastic(rng, n);
    const EquilibriumReport r = enumerate_equilibria(p, w);
    CHECK(r.action_profiles_scanned == (1 << n));
    for (const Equilibrium& e : r.equilibria) {
      CHECK(is_fixed_point(e.state, p, w, 1e-9));
      CHECK(verify_nash(e.state, p, w, 1e-9).is_nash);
    }
    for (std::size_t k = 1; k < r.equilibria.size(); ++k) {
      const auto& a = r.equilibria[k - 1].state.x;
      const auto& b = r.equilibria[k].state.x;
      const int ca = std::count(a.begin(), a.end(), 1);
      const int cb = std::count(b.begin(), b.end(), 1);
      CHECK((ca < cb || (ca == cb && a < b)));
    }
    CHECK(profiles(r.equilibria).count(std::vector<int>(static_cast<std::size_t>(n), 0)) == 1);
  }
}

TEST_CASE("uniqueness under the all-defection condition") {
  Rng rng(303);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(11));
    const ModelParams p = testing::params_all_defection_unique(rng, n);
    REQUIRE(check_all_defection_unique(p).all_hold);
    const EquilibriumReport r = enumerate_equilibria(p, testing::random_row_stochastic(rng, n));
    REQUIRE(r.equilibria.size() == 1);
    CHECK(r.equilibria[0].state == SystemState::uniform(n, 0, 0.0));
  }
}

TEST_CASE("full cooperation under the all-cooperation condition") {
  Rng rng(404);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    const ModelParams p = testing::params_all_cooperation_exists(rng, n);
    REQUIRE(check_all_cooperation_exists(p).all_hold);
    const Network w = testing::random_row_stochastic(rng, n);
    const EquilibriumReport r = enumerate_equilibria(p, w);
    CHECK(profiles(r.equilibria).count(std::vector<int>(static_cast<std::size_t>(n), 1)) == 1);
    CHECK(verify_nash(SystemState::uniform(n, 1, 1.0), p, w, 1e-9).is_nash);
  }
}

TEST_CASE("enumeration matches an independent grid search on tiny instances") {
  Rng rng(909);
  int robust_profiles = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int n = trial < 18 ? 2 : 3;
    const ModelParams p = trial % 2 ? testing::random_params(rng, n) : testing::params_all_cooperation_exists(rng, n);
    const Network w = testing::random_row_stochastic(rng, n);
    const EquilibriumReport r = enumerate_equilibria(p, w);
    std::set<std::vector<int>> listed = profiles(r.equilibria);
    for (const auto& x : profiles(r.boundary_equilibria)) listed.insert(x);

    const GridHit g = grid_equilibria(p, w, 100);
    for (const auto& x : g.robust) CHECK(listed.count(x) == 1);
    robust_profiles += static_cast<int>(g.robust.size());

    // Conversely, equilibria with clear discriminant signs must show up on the grid.
    for (const Equilibrium& e : r.equilibria) {
      bool clear = true;
      for (int i = 0; i < n; ++i) {
        clear = clear && std::abs(discriminant(i, e.state.y, p, w)) > g.margin + 0.0025 + 1e-9;
      }
      if (clear) CHECK(g.robust.count(e.state.x) == 1);
    }
  }
  CHECK(robust_profiles > 24);
}

TEST_CASE("sweep examples") {
  const Network w = io::complete_network(4);
  const RevisionSchedule rr = make_schedule(ScheduleKind::round_robin, 4);
  SweepOptions opt;
  opt.trials = 25;
  opt.seed = 5;

  const SweepTable one = sweep({{2.0}, {1.0 / 3}, {1.0 / 3}}, w, rr, opt);
  REQUIRE(one.cells.size() == 1);
  const SweepCell& c = one.cells[0];
  CHECK(c.valid);
  CHECK(c.all_defection_unique);
  CHECK_FALSE(c.all_cooperation_exists);
  CHECK(c.equilibria_count == 1);
  CHECK(c.trials == 25);
  CHECK(c.to_all_defection == 25);
  CHECK(one.warnings.empty());

  const SweepTable coop = sweep({{3.8}, {1.0 / 3}, {1.0 / 3}}, w, rr, opt);
  CHECK(coop.cells[0].all_cooperation_exists);
  CHECK(coop.cells[0].equilibria_count >= 2);
  CHECK(coop.cells[0].to_all_defection + coop.cells[0].to_all_cooperation +
            coop.cells[0].to_other_fixed_point + coop.cells[0].not_converged == 25);

  CHECK(sweep({{}, {0.3}, {0.3}}, w, rr, opt).cells.empty());

  const SweepTable mixed = sweep({{2.0, 4.0}, {0.3, 0.9}, {0.3}}, w, rr, opt);
  REQUIRE(mixed.cells.size() == 4);
  CHECK(mixed.cells[0].valid);
  CHECK_FALSE(mixed.cells[1].valid);
  CHECK_FALSE(mixed.cells[1].error.empty());
  CHECK_FALSE(mixed.cells[2].valid);
  CHECK_FALSE(mixed.cells[3].valid);
  CHECK(mixed.cells[0].r == 2.0);
  CHECK(mixed.cells[1].alpha == 0.9);
}

TEST_CASE("sweep is deterministic regardless of thread count") {
  const Network w = io::ring_network(6);
  const RevisionSchedule s = make_schedule(ScheduleKind::shuffled_rounds, 6, 4);
  SweepOptions opt;
  opt.trials = 8;
  opt.seed = 99;
  const SweepGrid grid{{1.5, 3.0, 5.5}, {0.2, 0.5}, {0.2, 0.4}};
  opt.threads = 1;
  const std::string a = io::format_sweep_csv(sweep(grid, w, s, opt));
  opt.threads = 4;
  const std::string b = io::format_sweep_csv(sweep(grid, w, s, opt));
  CHECK(a == b);
  opt.seed = 100;
  CHECK(io::format_sweep_csv(sweep(grid, w, s, opt)) != a);
}

TEST_CASE("sweep warns for schedules without a revision window") {
  SweepOptions opt;
  opt.trials = 2;
  const SweepTable t = sweep({{2.0}, {0.3}, {0.3}}, io::complete_network(3),
                             make_schedule(ScheduleKind::iid_random, 3, 1), opt);
  CHECK_FALSE(t.warnings.empty());
}
