#include <cmath>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/io.hpp"
#include "coevo/rng.hpp"
#include "io_common.hpp"

namespace coevo::io {
namespace {

using nlohmann::json;

// Already carries its JSON location; never re-wrapped.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Finds the 1-based line where the value at `pointer` starts. nlohmann::json
// drops source positions, so this re-scans the (already validated) text.
std::optional<std::size_t> locate_line(std::string_view text, const std::string& pointer) {
  struct Frame {
    bool is_array;
    std::size_t index;
    std::string key;
    bool expecting_key;
  };
  std::vector<Frame> stack;
  std::size_t line = 1;
  bool value_pending = true;  // the root value

  auto current_path = [&] {
    std::string p;
    for (const Frame& f : stack) p += "/" + (f.is_array ? std::to_string(f.index) : f.key);
    return p;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') continue;

    if (c == '"' && !stack.empty() && !stack.back().is_array && stack.back().expecting_key) {
      std::string key;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        key += text[i];
      }
      stack.back().key = std::move(key);
      stack.back().expecting_key = false;
      continue;
    }
    if (c == ':') {
      value_pending = true;
      continue;
    }
    if (c == ',') {
      if (!stack.empty()) {
        if (stack.back().is_array) {
          ++stack.back().index;
          value_pending = true;
        } else {
          stack.back().expecting_key = true;
        }
      }
      continue;
    }
    if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      value_pending = false;
      continue;
    }
    if (value_pending) {
      value_pending = false;
      if (current_path() == pointer) return line;
    }
    if (c == '{') {
      stack.push_back({false, 0, {}, true});
    } else if (c == '[') {
      stack.push_back({true, 0, {}, false});
      value_pending = true;
    } else if (c == '"') {
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
      }
    }
  }
  return std::nullopt;
}

class Reader {
 public:
  Reader(std::string_view text, std::filesystem::path base_dir,
         std::optional<std::uint64_t> seed_override)
      : text_(text), base_dir_(std::move(base_dir)), seed_override_(seed_override) {}

  std::optional<std::uint64_t> seed_override() const { return seed_override_; }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::ostringstream os;
    if (const auto line = locate_line(text_, pointer)) os << "line " << *line << ": ";
    os << (pointer.empty() ? "/" : pointer) << ": " << message;
    throw ConfigError(os.str());
  }

  const json& require(const json& obj, const std::string& ptr, const char* key) const {
    if (!obj.is_object() || !obj.contains(key)) fail(ptr, std::string("missing '") + key + "'");
    return obj.at(key);
  }

  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) fail(ptr, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ptr, "expected a finite number");
    return d;
  }

  std::int64_t integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) fail(ptr, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t seed(const json& v, const std::string& ptr) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(ptr, "expected a nonnegative integer seed");
  }

  bool boolean(const json& v, const std::string& ptr) const {
    if (!v.is_boolean()) fail(ptr, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::string& ptr) const {
    if (!v.is_array()) fail(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], ptr + "/" + std::to_string(k)));
    return out;
  }

  std::filesystem::path path(const json& v, const std::string& ptr) const {
    std::filesystem::path p = string(v, ptr);
    return p.is_absolute() ? p : base_dir_ / p;
  }

 private:
  std::string_view text_;
  std::filesystem::path base_dir_;
  std::optional<std::uint64_t> seed_override_;
};

// A per-player field: scalar (broadcast) or array of length n.
struct PlayerField {
  std::vector<double> values;
  bool is_array = false;
};

std::optional<PlayerField> player_field(const Reader& rd, const json& params, const char* key) {
  if (!params.contains(key)) return std::nullopt;
  const std::string ptr = std::string("/params/") + key;
  const json& v = params.at(key);
  PlayerField f;
  if (v.is_array()) {
    f.values = rd.numbers(v, ptr);
    f.is_array = true;
  } else {
    f.values = {rd.number(v, ptr)};
  }
  return f;
}

std::vector<PlayerWeights> players_from_csv(const Reader& rd, const std::filesystem::path& path,
                                            const std::string& ptr) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    rd.fail(ptr, e.what());
  }
  const auto lines = detail::split_lines(text);
  std::vector<PlayerWeights> out;
  std::vector<std::string_view> header;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = detail::trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line, ',');
    if (header.empty()) {
      header = cells;
      for (auto& h : header) h = detail::trim(h);
      continue;
    }
    const std::string where = path.string() + ": line " + std::to_string(ln + 1) + ": ";
    if (cells.size() != header.size()) rd.fail(ptr, where + "wrong number of columns");
    PlayerWeights p;
    bool has_lambda = false;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto v = detail::parse_double(cells[k]);
      if (!v) rd.fail(ptr, where + "'" + std::string(cells[k]) + "' is not a number");
      if (header[k] == "alpha") p.alpha = *v;
      else if (header[k] == "beta") p.beta = *v;
      else if (header[k] == "lambda") { p.lambda = *v; has_lambda = true; }
      else if (header[k] == "gamma") p.gamma = *v;
      else if (header[k] == "u") p.u = *v;
      else rd.fail(ptr, where + "unknown column '" + std::string(header[k]) + "'");
    }
    if (!has_lambda) p.lambda = 1.0 - p.alpha - p.beta;
    const double sum = p.alpha + p.beta + p.lambda;
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      rd.fail(ptr, where + "player " + std::to_string(out.size() + 1) +
                       ": alpha + beta + lambda = " + format_real(sum) + ", must equal 1");
    }
    out.push_back(p);
  }
  return out;
}

std::optional<int> explicit_player_count(const Reader& rd, const json& root) {
  if (!root.contains("params")) return std::nullopt;
  const json& params = root.at("params");
  if (params.contains("n")) {
    const auto n = rd.integer(params.at("n"), "/params/n");
    if (n < 2) rd.fail("/params/n", "need at least 2 players");
    return static_cast<int>(n);
  }
  for (const char* key : {"alpha", "beta", "lambda", "gamma", "u"}) {
    if (params.contains(key) && params.at(key).is_array()) {
      return static_cast<int>(params.at(key).size());
    }
  }
  return std::nullopt;
}

Network read_network(const Reader& rd, const json& root, std::optional<int> n_hint) {
  const json& spec = rd.require(root, "", "network");
  const std::string type = rd.string(rd.require(spec, "/network", "type"), "/network/type");
  auto node_count = [&](const char* key = "n") -> int {
    if (spec.contains(key)) {
      const auto n = rd.integer(spec.at(key), std::string("/network/") + key);
      if (n < 1 || n > 1'000'000) rd.fail(std::string("/network/") + key, "invalid node count");
      return static_cast<int>(n);
    }
    if (n_hint) return *n_hint;
    rd.fail("/network", std::string("missing '") + key + "' (and /params/n is not given)");
  };
  const bool normalise = spec.contains("normalise") && rd.boolean(spec.at("normalise"), "/network/normalise");

  try {
    if (type == "complete") return complete_network(node_count());
    if (type == "ring") return ring_network(node_count());
    if (type == "grid") {
      const auto rows = rd.integer(rd.require(spec, "/network", "rows"), "/network/rows");
      const auto cols = rd.integer(rd.require(spec, "/network", "cols"), "/network/cols");
      if (rows < 1 || cols < 1 || rows * cols > 1'000'000) rd.fail("/network", "invalid grid size");
      return grid_network(static_cast<int>(rows), static_cast<int>(cols));
    }
    if (type == "random") {
      const double p = rd.number(rd.require(spec, "/network", "p"), "/network/p");
      std::uint64_t seed = spec.contains("seed") ? rd.seed(spec.at("seed"), "/network/seed") : 0;
      if (rd.seed_override()) seed = *rd.seed_override();
      RandomWeighting weighting = RandomWeighting::row;
      if (spec.contains("weighting")) {
        const std::string w = rd.string(spec.at("weighting"), "/network/weighting");
        if (w == "row") weighting = RandomWeighting::row;
        else if (w == "metropolis") weighting = RandomWeighting::metropolis;
        else rd.fail("/network/weighting", "expected 'row' or 'metropolis'");
      }
      const bool connected = spec.contains("connected") && rd.boolean(spec.at("connected"), "/network/connected");
      int retries = 1000;
      if (spec.contains("max_retries")) retries = static_cast<int>(rd.integer(spec.at("max_retries"), "/network/max_retries"));
      return random_network(node_count(), p, seed, weighting, connected, retries);
    }
    if (type == "matrix") {
      const json& w = rd.require(spec, "/network", "W");
      if (!w.is_array() || w.empty()) rd.fail("/network/W", "expected a non-empty array of rows");
      const int n = static_cast<int>(w.size());
      std::vector<double> flat;
      for (int i = 0; i < n; ++i) {
        const std::string ptr = "/network/W/" + std::to_string(i);
        std::vector<double> row = rd.numbers(w[static_cast<std::size_t>(i)], ptr);
        if (static_cast<int>(row.size()) != n) {
          rd.fail(ptr, "ragged matrix: " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(n));
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
          if (row[j] < 0.0) rd.fail(ptr + "/" + std::to_string(j), "negative weight");
          sum += row[j];
        }
        if (!normalise && std::abs(sum - 1.0) > kRowSumTolerance) {
          rd.fail(ptr, "row " + std::to_string(i + 1) + " sums to " + format_real(sum) +
                           ", must sum to 1");
        }
        if (normalise && !(sum > 0.0)) rd.fail(ptr, "row " + std::to_string(i + 1) + " is all zeros");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      return normalise ? Network::normalised(n, std::move(flat)) : Network(n, std::move(flat));
    }
    if (type == "edge-list" || type == "dense-csv") {
      const auto file = rd.path(rd.require(spec, "/network", "path"), "/network/path");
      std::optional<int> count;
      if (spec.contains("n")) count = node_count();
      return load_network(file, parse_network_format(type), normalise, count);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    rd.fail("/network", e.what());
  }
  rd.fail("/network/type",
          "unknown network type '" + type +
              "' (expected complete, ring, grid, random, matrix, edge-list or dense-csv)");
}

ModelParams read_params(const Reader& rd, const json& root, int n) {
  const json& params = rd.require(root, "", "params");
  if (!params.is_object()) rd.fail("/params", "expected an object");
  const double r = rd.number(rd.require(params, "/params", "r"), "/params/r");
  if (!(r > 1.0 && r < static_cast<double>(n))) {
    rd.fail("/params/r", "r = " + format_real(r) + " violates 1 < r < n = " + std::to_string(n));
  }

  std::vector<PlayerWeights> players;
  if (params.contains("file")) {
    players = players_from_csv(rd, rd.path(params.at("file"), "/params/file"), "/params/file");
    if (static_cast<int>(players.size()) != n) {
      rd.fail("/params/file", "has " + std::to_string(players.size()) + " players, network has " +
                                  std::to_string(n));
    }
  } else {
    const auto alpha = player_field(rd, params, "alpha");
    const auto beta = player_field(rd, params, "beta");
    if (!alpha) rd.fail("/params", "missing 'alpha'");
    if (!beta) rd.fail("/params", "missing 'beta'");
    const auto lambda = player_field(rd, params, "lambda");
    const auto gamma = player_field(rd, params, "gamma");
    const auto u = player_field(rd, params, "u");
    for (const auto& [field, key] :
         {std::pair{&alpha, "alpha"}, {&beta, "beta"}, {&lambda, "lambda"}, {&gamma, "gamma"}, {&u, "u"}}) {
      if (*field && (*field)->is_array && static_cast<int>((*field)->values.size()) != n) {
        rd.fail(std::string("/params/") + key, "has " + std::to_string((*field)->values.size()) +
                                                   " entries, expected n = " + std::to_string(n));
      }
    }
    auto at = [](const std::optional<PlayerField>& f, int i, double fallback) {
      if (!f) return fallback;
      return f->is_array ? f->values[static_cast<std::size_t>(i)] : f->values.front();
    };
    auto pointer = [](const std::optional<PlayerField>& f, const char* key, int i) {
      std::string p = std::string("/params/") + key;
      if (f && f->is_array) p += "/" + std::to_string(i);
      return p;
    };
    for (int i = 0; i < n; ++i) {
      PlayerWeights p;
      p.alpha = at(alpha, i, 0.0);
      p.beta = at(beta, i, 0.0);
      p.lambda = lambda ? at(lambda, i, 0.0) : 1.0 - p.alpha - p.beta;
      p.gamma = at(gamma, i, 0.0);
      p.u = at(u, i, 0.0);
      const std::string who = "player " + std::to_string(i + 1) + ": ";
      for (const auto& [v, f, key] : {std::tuple{p.alpha, &alpha, "alpha"},
                                      {p.beta, &beta, "beta"},
                                      {p.lambda, &lambda, "lambda"},
                                      {p.gamma, &gamma, "gamma"},
                                      {p.u, &u, "u"}}) {
        if (!(v >= 0.0 && v <= 1.0)) {
          rd.fail(*f ? pointer(*f, key, i) : pointer(alpha, "alpha", i),
                  who + key + " = " + format_real(v) + " is outside [0, 1]");
        }
      }
      const double sum = p.alpha + p.beta + p.lambda;
      if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        rd.fail(pointer(alpha, "alpha", i),
                who + "alpha + beta + lambda = " + format_real(sum) + ", must equal 1");
      }
      players.push_back(p);
    }
  }
  try {
    return ModelParams(r, std::move(players));
  } catch (const ValidationError& e) {
    rd.fail("/params", e.what());
  }
}

InitialStateSpec read_initial(const Reader& rd, const json& root, int n) {
  InitialStateSpec spec;
  if (!root.contains("initial_state")) return spec;
  const json& v = root.at("initial_state");
  if (!v.is_object()) rd.fail("/initial_state", "expected an object");
  if (v.contains("preset")) {
    const std::string preset = rd.string(v.at("preset"), "/initial_state/preset");
    if (preset == "all-coop-consensus") spec.preset = InitialPreset::all_cooperation;
    else if (preset == "all-defect-consensus") spec.preset = InitialPreset::all_defection;
    else if (preset == "random") spec.preset = InitialPreset::random;
    else rd.fail("/initial_state/preset", "expected all-coop-consensus, all-defect-consensus or random");
    if (v.contains("seed")) spec.seed = rd.seed(v.at("seed"), "/initial_state/seed");
    return spec;
  }
  spec.preset = InitialPreset::explicit_state;
  const json& xs = rd.require(v, "/initial_state", "x");
  if (!xs.is_array()) rd.fail("/initial_state/x", "expected an array");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    spec.state.x.push_back(static_cast<int>(rd.integer(xs[k], "/initial_state/x/" + std::to_string(k))));
  }
  spec.state.y = rd.numbers(rd.require(v, "/initial_state", "y"), "/initial_state/y");
  try {
    spec.state.validate(n);
  } catch (const ValidationError& e) {
    rd.fail("/initial_state", e.what());
  }
  return spec;
}

}  // namespace

SystemState ExperimentConfig::initial_state() const {
  const int n = params.n();
  switch (initial.preset) {
    case InitialPreset::explicit_state:
      return initial.state;
    case InitialPreset::all_cooperation:
      return SystemState::uniform(n, 1, 1.0);
    case InitialPreset::all_defection:
      return SystemState::uniform(n, 0, 0.0);
    case InitialPreset::random: {
      Rng rng(derive_seed(initial.seed, 0x1417));
      SystemState s;
      for (int i = 0; i < n; ++i) {
        s.x.push_back(rng.bernoulli(0.5) ? 1 : 0);
        s.y.push_back(rng.uniform_closed());
      }
      return s;
    }
  }
  return initial.state;
}

RevisionSchedule ExperimentConfig::schedule() const {
  return RevisionSchedule(schedule_kind, params.n(), schedule_seed);
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  schedule_seed = seed;
  initial.seed = seed;
  if (sweep) sweep->options.seed = seed;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": JSON syntax error");
  }
  const Reader rd(text, base_dir, seed_override);
  if (!root.is_object()) rd.fail("", "config must be a JSON object");

  const std::optional<int> n_hint = explicit_player_count(rd, root);
  Network net = read_network(rd, root, n_hint);
  if (n_hint && *n_hint != net.n()) {
    rd.fail("/network", "network has " + std::to_string(net.n()) + " nodes but params describe " +
                            std::to_string(*n_hint) + " players");
  }
  ModelParams params = read_params(rd, root, net.n());

  ExperimentConfig cfg{std::move(params), std::move(net), ScheduleKind::round_robin, 0, {}, {}, {}, std::nullopt};

  if (root.contains("schedule")) {
    const json& s = root.at("schedule");
    if (!s.is_object()) rd.fail("/schedule", "expected an object");
    if (s.contains("kind")) {
      try {
        cfg.schedule_kind = parse_schedule_kind(rd.string(s.at("kind"), "/schedule/kind"));
      } catch (const ValidationError& e) {
        rd.fail("/schedule/kind", e.what());
      }
    }
    if (s.contains("seed")) cfg.schedule_seed = rd.seed(s.at("seed"), "/schedule/seed");
  }

  cfg.initial = read_initial(rd, root, cfg.params.n());

  if (root.contains("run")) {
    const json& r = root.at("run");
    if (r.contains("max_steps")) {
      const auto steps = rd.integer(r.at("max_steps"), "/run/max_steps");
      if (steps < 1) rd.fail("/run/max_steps", "must be at least 1");
      cfg.run.max_steps = steps;
    }
    if (r.contains("fixed_point_tol")) {
      const double tol = rd.number(r.at("fixed_point_tol"), "/run/fixed_point_tol");
      if (tol < 0.0) rd.fail("/run/fixed_point_tol", "must be nonnegative");
      cfg.run.fixed_point_tol = tol;
    }
  }

  if (root.contains("outputs")) {
    const json& o = root.at("outputs");
    if (o.contains("trajectory")) cfg.outputs.trajectory = rd.path(o.at("trajectory"), "/outputs/trajectory");
    if (o.contains("trajectory_format")) {
      try {
        cfg.outputs.trajectory_format =
            parse_trajectory_format(rd.string(o.at("trajectory_format"), "/outputs/trajectory_format"));
      } catch (const ValidationError& e) {
        rd.fail("/outputs/trajectory_format", e.what());
      }
    }
    if (o.contains("report")) cfg.outputs.report = rd.path(o.at("report"), "/outputs/report");
    if (o.contains("sweep")) cfg.outputs.sweep = rd.path(o.at("sweep"), "/outputs/sweep");
  }

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    SweepSpec spec;
    spec.grid.r = s.contains("r") ? rd.numbers(s.at("r"), "/sweep/r") : std::vector<double>{cfg.params.r()};
    auto uniform_or = [&](const char* key, double PlayerWeights::*field) {
      if (s.contains(key)) return rd.numbers(s.at(key), std::string("/sweep/") + key);
      const double first = cfg.params.player(0).*field;
      for (const PlayerWeights& p : cfg.params.players()) {
        if (p.*field != first) {
          rd.fail(std::string("/sweep"), std::string("missing '") + key +
                                             "' and params are not uniform across players");
        }
      }
      return std::vector<double>{first};
    };
    spec.grid.alpha = uniform_or("alpha", &PlayerWeights::alpha);
    spec.grid.beta = uniform_or("beta", &PlayerWeights::beta);
    if (s.contains("trials")) {
      const auto trials = rd.integer(s.at("trials"), "/sweep/trials");
      if (trials < 0) rd.fail("/sweep/trials", "must be nonnegative");
      spec.options.trials = static_cast<int>(trials);
    }
    if (s.contains("seed")) spec.options.seed = rd.seed(s.at("seed"), "/sweep/seed");
    if (s.contains("max_steps")) {
      spec.options.max_steps = rd.integer(s.at("max_steps"), "/sweep/max_steps");
      if (spec.options.max_steps < 1) rd.fail("/sweep/max_steps", "must be at least 1");
    }
    if (s.contains("fixed_point_tol")) spec.options.fixed_point_tol = rd.number(s.at("fixed_point_tol"), "/sweep/fixed_point_tol");
    if (s.contains("opinion_tol")) spec.options.opinion_tol = rd.number(s.at("opinion_tol"), "/sweep/opinion_tol");
    if (s.contains("max_enumeration_n")) spec.options.max_enumeration_n = static_cast<int>(rd.integer(s.at("max_enumeration_n"), "/sweep/max_enumeration_n"));
    if (s.contains("threads")) spec.options.threads = static_cast<int>(rd.integer(s.at("threads"), "/sweep/threads"));
    cfg.sweep = std::move(spec);
  }
  if (seed_override) cfg.override_seed(*seed_override);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
  const std::string text = read_file(path);
  try {
    return parse_config(text,
                        path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                        seed_override);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace coevo::io
