#include "fkr/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result
{
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "fkr");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = fkr::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir
{
  fs::path path;
  TempDir()
  {
    path = fs::temp_directory_path() / ("fkr_cli_" + std::to_string(std::rand()) + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
    ::unsetenv("FKR_THREADS");
    ::unsetenv("FKR_OUTPUT_DIR");
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const
  {
    fs::path p = path / name;
    std::ofstream(p) << text;
    return p;
  }
};

// The run directory printed on the "run <dir>" line.
fs::path run_dir(const std::string& out)
{
  auto pos = out.find("\nrun ");
  REQUIRE(pos != std::string::npos);
  auto end = out.find('\n', pos + 5);
  return fs::path(out.substr(pos + 5, end - pos - 5));
}

const char* kTail = R"({
  "seed": 5,
  "tail": {
    "recipe": {"generator": {"kind": "functional_ma", "q": 1, "basis": {"j_max": 4}}},
    "ladder": [[8, 8], [16, 16]],
    "eps_grid": [0.02, 0.04, 0.06, 0.08, 0.1, 0.15],
    "replicates": 500
  }
})";

// same content, keys in another order
const char* kTailReordered = R"({
  "tail": {
    "replicates": 500,
    "eps_grid": [0.02, 0.04, 0.06, 0.08, 0.1, 0.15],
    "ladder": [[8, 8], [16, 16]],
    "recipe": {"generator": {"basis": {"j_max": 4}, "q": 1, "kind": "functional_ma"}}
  },
  "seed": 5
})";

int shell(const std::string& cmd)
{
  int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("partition prints the outer intervals")
{
  auto r = cli({"partition", "--N", "1", "--A", "1", "--delta", "0.5", "--levels", "1"});
  REQUIRE(r.code == fkr::kExitOk);
  auto j = json::parse(r.out);
  auto cubes = j.at("outer_cubes");
  REQUIRE(cubes.size() == 2);
  CHECK(cubes[0][0][0] == 0.0);
  CHECK(cubes[0][0][1] == 0.25);
  CHECK(cubes[1][0][0] == 0.75);
  CHECK(cubes[1][0][1] == 1.0);

  auto bad = cli({"partition", "--N", "1", "--A", "1", "--delta", "0.7"});
  CHECK(bad.code == fkr::kExitConfig);
}

TEST_CASE("configuration errors exit with code 1 and a JSON error")
{
  TempDir tmp;
  auto r = cli({"tail", "--config", (tmp.path / "missing.json").string()});
  CHECK(r.code == 1);
  auto line = r.err.substr(r.err.find('\n') + 1);
  auto j = json::parse(line);
  CHECK(j.at("error").at("code") == 1);
  CHECK(j.at("error").at("kind") == "config");

  auto unknown = tmp.write("u.json", R"({"tail": {"replicates": 100, "colour": "red"}})");
  auto u = cli({"tail", "--config", unknown.string(), "--output-dir", tmp.path.string()});
  CHECK(u.code == 1);
  CHECK(u.err.find("colour") != std::string::npos);

  auto top = tmp.write("t.json", R"({"tial": {}})");
  CHECK(cli({"tail", "--config", top.string()}).code == 1);

  auto broken = tmp.write("b.json", "{ not json");
  CHECK(cli({"tail", "--config", broken.string()}).code == 1);

  CHECK(cli({"tail", "--bound", "nonsense", "--output-dir", tmp.path.string()}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
}

TEST_CASE("tail run writes reports whose bytes do not depend on threads")
{
  TempDir tmp;
  auto cfg = tmp.write("tail.json", kTail);
  auto a = cli({"tail", "--config", cfg.string(), "--threads", "1", "--output-dir", tmp.path.string()});
  REQUIRE(a.code == 0);
  auto dir = run_dir(a.out);
  auto csv1 = slurp(dir / "tail.csv");
  auto dom1 = slurp(dir / "dominance.csv");
  CHECK(csv1.rfind("# schema=fkr.tail/1 tool=fkr/", 0) == 0);
  CHECK(fs::exists(dir / "tail.json"));
  CHECK(fs::exists(dir / "tail.gp"));
  CHECK(fs::exists(dir / "config.json"));

  auto b = cli({"tail", "--config", cfg.string(), "--threads", "4", "--output-dir", tmp.path.string()});
  REQUIRE(b.code == 0);
  CHECK(run_dir(b.out) == dir);
  CHECK(slurp(dir / "tail.csv") == csv1);
  CHECK(slurp(dir / "dominance.csv") == dom1);

  auto meta = json::parse(slurp(dir / "tail.json"));
  CHECK(meta.at("schema") == "fkr.tail/1");
  CHECK(meta.at("seed") == 5);
}

TEST_CASE("run directory is keyed by content, not key order")
{
  TempDir tmp;
  auto c1 = tmp.write("a.json", kTail);
  auto c2 = tmp.write("b.json", kTailReordered);
  auto a = cli({"tail", "--config", c1.string(), "--replicates", "200", "--output-dir", tmp.path.string()});
  auto b = cli({"tail", "--config", c2.string(), "--replicates", "200", "--output-dir", tmp.path.string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(run_dir(a.out) == run_dir(b.out));

  // a flag seed overrides the config seed and changes the run
  auto c = cli({"tail", "--config", c1.string(), "--replicates", "200", "--seed", "6", "--output-dir", tmp.path.string()});
  REQUIRE(c.code == 0);
  CHECK(run_dir(c.out) != run_dir(a.out));
}

TEST_CASE("output directory precedence: flag over environment over config")
{
  TempDir tmp;
  auto cfg_dir = tmp.path / "from_config";
  auto env_dir = tmp.path / "from_env";
  auto flag_dir = tmp.path / "from_flag";
  auto cfg = tmp.write("p.json", R"({"output_dir": ")" + cfg_dir.string() +
                                     R"(", "laplace": {"recipe": {"summands": "iid_rademacher"}, "ladder": [[16, 16]], "replicates": 200}})");
  auto a = cli({"laplace", "--config", cfg.string()});
  REQUIRE(a.code == 0);
  CHECK(run_dir(a.out).parent_path() == cfg_dir);

  ::setenv("FKR_OUTPUT_DIR", env_dir.c_str(), 1);
  auto b = cli({"laplace", "--config", cfg.string()});
  CHECK(run_dir(b.out).parent_path() == env_dir);
  auto c = cli({"laplace", "--config", cfg.string(), "--output-dir", flag_dir.string()});
  CHECK(run_dir(c.out).parent_path() == flag_dir);
  ::unsetenv("FKR_OUTPUT_DIR");
  CHECK(fs::exists(run_dir(c.out) / "laplace.csv"));
}

TEST_CASE("simulate then estimate from the written field")
{
  TempDir tmp;
  auto sim = tmp.write("sim.json", R"({"simulate": {"generator": {"q": 1, "basis": {"j_max": 4}},
    "psi": {"kind": "linear_diag", "params": [1.0, 0.5]}, "noise_scale": 0.2, "edges": [64]}})");
  auto s = cli({"simulate", "--config", sim.string(), "--output-dir", tmp.path.string()});
  REQUIRE(s.code == 0);
  auto dir = run_dir(s.out);
  CHECK(fs::exists(dir / "field.csv"));
  CHECK(fs::exists(dir / "field.json"));
  CHECK(fs::exists(dir / "audit.json"));

  auto est = tmp.write("est.json", R"({"estimate": {"field": ")" + (dir / "field.csv").string() +
                                       R"(", "R": 0.5, "delta": 0.4, "estimator": {"h": 0.8},
    "smallball": {"source": "in_sample"}}})");
  auto e = cli({"estimate", "--config", est.string(), "--output-dir", tmp.path.string()});
  REQUIRE(e.code == 0);
  auto csv = slurp(run_dir(e.out) / "estimate.csv");
  CHECK(csv.rfind("# schema=fkr.estimate/1", 0) == 0);
  CHECK(csv.find("center,f_hat,error,underflow\n") != std::string::npos);
  auto meta = json::parse(slurp(run_dir(e.out) / "estimate.json"));
  CHECK(meta.at("summary").at("in_sample_small_ball") == true);

  auto noside = tmp.write("n.json", R"({"estimate": {"field": ")" + (dir / "field.csv").string() +
                                        R"(", "sidecar": "/nonexistent.json"}})");
  CHECK(cli({"estimate", "--config", noside.string(), "--output-dir", tmp.path.string()}).code == 1);
}

TEST_CASE("small-ball and rate subcommands")
{
  TempDir tmp;
  auto sb = tmp.write("sb.json", R"({"smallball": {"generator": {"q": 0, "innovation": "gaussian", "basis": {"j_max": 4}},
    "replicates": 500, "h_grid": [0.2, 0.5]}})");
  auto a = cli({"smallball", "--config", sb.string(), "--output-dir", tmp.path.string()});
  REQUIRE(a.code == 0);
  auto csv = slurp(run_dir(a.out) / "smallball.csv");
  CHECK(csv.find("h,F_hat,zero,F_analytic\n") != std::string::npos);

  auto rate = tmp.write("rate.json", R"({"rate": {"generator": {"q": 1, "basis": {"j_max": 4}},
    "psi": {"kind": "linear_diag", "params": [1.0, 0.5]}, "ladder": [[64], [128]],
    "seeds_per_batch": 2, "batches": 1, "smallball_replicates": 500}})");
  auto r = cli({"rate", "--config", rate.string(), "--mode", "weak", "--output-dir", tmp.path.string()});
  REQUIRE(r.code == 0);
  auto dir = run_dir(r.out);
  CHECK(fs::exists(dir / "rate.csv"));
  CHECK(fs::exists(dir / "rate_seeds.csv"));
  CHECK(slurp(dir / "rate.gp").find("rate.csv") != std::string::npos);
  CHECK(cli({"rate", "--config", rate.string(), "--mode", "gamma", "--output-dir", tmp.path.string()}).code == 1);
}

TEST_CASE("check runs a single quick criterion")
{
  auto r = cli({"check", "--only", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS 4") != std::string::npos);
}

TEST_CASE("installed binary exit codes")
{
  const char* bin = std::getenv("FKR_CLI");
  if (!bin) {
    MESSAGE("FKR_CLI not set; skipping binary checks");
    return;
  }
  TempDir tmp;
  std::string b = std::string("'") + bin + "'";
  CHECK(shell(b + " --version") == 0);
  CHECK(shell(b + " partition --N 2 --A 8 --delta 0.5 --levels 1") == 0);
  CHECK(shell(b + " tail --config '" + (tmp.path / "missing.json").string() + "'") == 1);
}
