#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <unistd.h>

#include "coevo/cli.hpp"
#include "coevo/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "coevo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = coevo::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("coevo_cli_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string put(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
};

const char* kLow = R"({
  "params": {"r": 2, "alpha": 0.3333333333333333, "beta": 0.3333333333333333},
  "network": {"type": "complete", "n": 4},
  "schedule": {"kind": "shuffled-rounds", "seed": 3},
  "initial_state": {"preset": "random", "seed": 4}
})";

const char* kHigh = R"({
  "params": {"r": 3.8, "alpha": 0.3333333333333333, "beta": 0.3333333333333333},
  "network": {"type": "complete", "n": 4},
  "initial_state": {"preset": "all-coop-consensus"}
})";

const char* kRequalsN = R"({
  "params": {"r": 4, "alpha": 0.3333333333333333, "beta": 0.3333333333333333},
  "network": {"type": "complete", "n": 4}
})";

}  // namespace

TEST_CASE("check-conditions on the low multiplier fixture") {
  Workspace ws;
  const Result r = invoke({"check-conditions", ws.put("low.json", kLow)});
  CHECK(r.code == coevo::kExitOk);
  CHECK(r.out.find("all_defection_unique: holds for all 4 players") != std::string::npos);
  CHECK(r.out.find("all_cooperation_exists: fails for all 4 players") != std::string::npos);

  const Result j = invoke({"check-conditions", ws.put("low.json", kLow), "--json"});
  const nlohmann::json doc = nlohmann::json::parse(j.out);
  CHECK(doc.at("conditions")[0].at("all_hold") == true);
  CHECK(doc.at("conditions")[1].at("all_hold") == false);
}

TEST_CASE("enumerate on the low multiplier fixture") {
  Workspace ws;
  const Result r = invoke({"enumerate", ws.put("low.json", kLow), "--quiet"});
  CHECK(r.code == coevo::kExitOk);
  CHECK(r.err.empty());
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.at("equilibria").size() == 1);
  CHECK(doc.at("equilibria")[0].at("x") == std::vector<int>{0, 0, 0, 0});

  const Result capped = invoke({"enumerate", ws.put("low.json", kLow), "--max-n", "3"});
  CHECK(capped.code == coevo::kExitValidation);
}

TEST_CASE("validate") {
  Workspace ws;
  CHECK(invoke({"validate", ws.put("low.json", kLow)}).code == coevo::kExitOk);
  const Result bad = invoke({"validate", ws.put("rn.json", kRequalsN)});
  CHECK(bad.code == coevo::kExitValidation);
  CHECK(bad.err.find("1 < r < n") != std::string::npos);
  CHECK(invoke({"validate", (ws.dir / "absent.json").string()}).code == coevo::kExitValidation);
}

TEST_CASE("usage errors exit with code 1") {
  const Result none = invoke({});
  CHECK(none.code == coevo::kExitValidation);
  const Result unknown = invoke({"frobnicate", "x.json"});
  CHECK(unknown.code == coevo::kExitValidation);
  CHECK(unknown.err.find("simulate") != std::string::npos);
  CHECK(invoke({"--help"}).code == 0);
  Workspace ws;
  CHECK(invoke({"simulate", ws.put("low.json", kLow), "--kernel", "sse9"}).code == coevo::kExitValidation);
  CHECK(invoke({"best-response", ws.put("low.json", kLow)}).code == coevo::kExitValidation);
}

TEST_CASE("simulate is deterministic and honours --seed") {
  Workspace ws;
  const std::string cfg = ws.put("low.json", kLow);
  const std::string a = (ws.dir / "a.csv").string();
  const std::string b = (ws.dir / "b.csv").string();
  const std::string c = (ws.dir / "c.csv").string();
  REQUIRE(invoke({"simulate", cfg, "-o", a, "-q"}).code == 0);
  REQUIRE(invoke({"simulate", cfg, "-o", b, "-q"}).code == 0);
  REQUIRE(invoke({"simulate", cfg, "-o", c, "-q", "--seed", "12345"}).code == 0);
  CHECK(coevo::io::read_file(a) == coevo::io::read_file(b));
  CHECK(coevo::io::read_file(a) != coevo::io::read_file(c));

  const Result jl = invoke({"simulate", cfg, "--format", "json-lines", "-q"});
  CHECK(jl.code == 0);
  CHECK(nlohmann::json::parse(jl.out.substr(0, jl.out.find('\n'))).at("t") == 0);
}

TEST_CASE("simulate writes the configured output path and reports progress") {
  Workspace ws;
  const std::string cfg = ws.put("cfg.json", R"({
  "params": {"r": 2, "alpha": 0.3, "beta": 0.3},
  "network": {"type": "ring", "n": 5},
  "initial_state": {"preset": "all-coop-consensus"},
  "outputs": {"trajectory": "traj.csv"}
})");
  const Result r = invoke({"simulate", cfg});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(r.err.find("all-defection-consensus") != std::string::npos);
  CHECK(fs::exists(ws.dir / "traj.csv"));
  CHECK(invoke({"simulate", cfg, "-q"}).err.empty());
}

TEST_CASE("config errors leave no output behind") {
  Workspace ws;
  const std::string cfg = ws.put("rn.json", R"({
  "params": {"r": 4, "alpha": 0.3, "beta": 0.3},
  "network": {"type": "complete", "n": 4},
  "outputs": {"trajectory": "traj.csv"}
})");
  const std::string out = (ws.dir / "explicit.csv").string();
  CHECK(invoke({"simulate", cfg, "-o", out}).code == coevo::kExitValidation);
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(ws.dir / "traj.csv"));
  CHECK(invoke({"sweep", cfg, "-o", out}).code == coevo::kExitValidation);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("unwritable output is a runtime fault") {
  Workspace ws;
  const Result r = invoke({"simulate", ws.put("low.json", kLow), "-o", (ws.dir / "no/such/dir.csv").string()});
  CHECK(r.code == coevo::kExitRuntime);
}

TEST_CASE("best-response") {
  Workspace ws;
  const std::string cfg = ws.put("high.json", kHigh);
  const Result r = invoke({"best-response", cfg, "--player", "2"});
  CHECK(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("player") == 2);
  CHECK(doc.at("entries")[0].at("action") == 1);

  const Result low = invoke({"best-response", cfg, "-i", "1", "--y", "0,0,0,0"});
  CHECK(nlohmann::json::parse(low.out).at("entries")[0].at("action") == 0);
  CHECK(invoke({"best-response", cfg, "-i", "5"}).code == coevo::kExitValidation);
  CHECK(invoke({"best-response", cfg, "-i", "1", "--y", "0,0,2,0"}).code == coevo::kExitValidation);
  CHECK(invoke({"best-response", cfg, "-i", "1", "--y", "0,0"}).code == coevo::kExitValidation);
}

TEST_CASE("sweep") {
  Workspace ws;
  const std::string cfg = ws.put("sweep.json", R"({
  "params": {"r": 2, "alpha": 0.3, "beta": 0.3},
  "network": {"type": "complete", "n": 4},
  "schedule": {"kind": "round-robin"},
  "sweep": {"r": [2, 3.8], "alpha": [0.3333333333333333], "beta": [0.3333333333333333], "trials": 5, "seed": 1}
})");
  const Result a = invoke({"sweep", cfg, "-q"});
  const Result b = invoke({"sweep", cfg, "-q"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  std::istringstream lines(a.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 3);
}
