#include <sstream>

#include "coevo/io.hpp"

namespace coevo::io {

using nlohmann::json;

json to_json(const ConditionReport& report) {
  json players = json::array();
  for (std::size_t i = 0; i < report.per_player.size(); ++i) {
    const ConditionTerm& t = report.per_player[i];
    players.push_back({{"player", i + 1}, {"lhs", t.lhs}, {"rhs", t.rhs}, {"holds", t.holds}});
  }
  return {{"condition_id", std::string(to_string(report.condition_id))},
          {"all_hold", report.all_hold},
          {"per_player", std::move(players)}};
}

json to_json(const StateClass& cls) {
  json out = {{"action_consensus", std::string(to_string(cls.action_consensus))},
              {"opinion_consensus", nullptr},
              {"full_class", std::string(to_string(cls.full_class))}};
  if (cls.opinion_consensus) out["opinion_consensus"] = *cls.opinion_consensus;
  return out;
}

json to_json(const EquilibriumReport& report) {
  auto list = [](const std::vector<Equilibrium>& eqs) {
    json arr = json::array();
    for (const Equilibrium& e : eqs) {
      arr.push_back({{"x", e.state.x},
                     {"y", e.state.y},
                     {"class", to_json(e.state_class)},
                     {"residual", e.residual}});
    }
    return arr;
  };
  return {{"action_profiles_scanned", report.action_profiles_scanned},
          {"equilibria", list(report.equilibria)},
          {"boundary_equilibria", list(report.boundary_equilibria)}};
}

json to_json(const BestResponseSet& br, int player) {
  json entries = json::array();
  for (const Strategy& s : br.entries) {
    entries.push_back({{"action", s.action}, {"opinion", s.opinion}});
  }
  return {{"player", player + 1},
          {"discriminant", br.discriminant},
          {"tie", br.is_tie()},
          {"entries", std::move(entries)}};
}

std::string format_sweep_csv(const SweepTable& table) {
  std::ostringstream os;
  os << "r,alpha,beta,lambda,valid,all_defection_unique,all_cooperation_exists,equilibria,"
        "boundary_equilibria,trials,to_all_defection,to_all_cooperation,to_other_fixed_point,"
        "not_converged,error\n";
  for (const SweepCell& c : table.cells) {
    os << format_real(c.r) << ',' << format_real(c.alpha) << ',' << format_real(c.beta) << ','
       << format_real(c.lambda) << ',' << (c.valid ? 1 : 0) << ','
       << (c.all_defection_unique ? 1 : 0) << ',' << (c.all_cooperation_exists ? 1 : 0) << ',';
    if (c.equilibria_count) os << *c.equilibria_count;
    os << ',';
    if (c.boundary_equilibria_count) os << *c.boundary_equilibria_count;
    os << ',' << c.trials << ',' << c.to_all_defection << ',' << c.to_all_cooperation << ','
       << c.to_other_fixed_point << ',' << c.not_converged << ',';
    if (!c.error.empty()) {
      std::string quoted = c.error;
      for (std::size_t p = 0; (p = quoted.find('"', p)) != std::string::npos; p += 2) {
        quoted.insert(p, 1, '"');
      }
      os << '"' << quoted << '"';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace coevo::io
