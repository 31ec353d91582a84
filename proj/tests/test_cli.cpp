#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cantor/cli.hpp"
#include "cantor/serialize.hpp"

using namespace cantor;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cantor-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("build, verify and export through the command line") {
  TempDir dir;
  const auto s248 = dir / "s248.json", wm2 = dir / "wm2.json";

  REQUIRE(run({"build", "odometer", "--s", "2,4,8", "--depth", "3", "--out", s248}).code == kExitPass);
  std::string first = slurp(s248);
  REQUIRE(run({"build", "odometer", "--s", "2,4,8", "--depth", "3", "--out", s248}).code == kExitPass);
  CHECK(slurp(s248) == first);

  REQUIRE(run({"build", "graph", "--variant", "weakly-mixing", "--levels", "2", "--out", wm2}).code ==
          kExitPass);
  CHECK(read_json_file(wm2)["source"]["s"][1] == 18);

  auto ext = run({"build", "extension", "--scheme", s248, "--levels", "2", "--tail", "16", "--refine", "4",
                  "--out", dir / "ext.json"});
  CHECK(ext.code == kExitPass);
  CHECK(read_json_file(dir / "ext.json")["kind"] == "extension");
  CHECK(run({"verify", "lrs", "--ext", dir / "ext.json"}).code == kExitPass);

  auto der = run({"verify", "derivative", "--scheme", s248});
  CHECK(der.code == kExitPass);
  Json report = Json::parse(der.out);
  CHECK(report["pass"] == true);
  CHECK(report["depths"].size() == 2);

  // The base vertex branches: the full certificate fails, every other parent passes.
  auto lrs = run({"verify", "lrs", "--scheme", wm2, "--depth", "2"});
  CHECK(lrs.code == kExitFail);
  Json lrs_report = Json::parse(lrs.out);
  CHECK_FALSE(lrs_report["witnesses"].empty());
  for (const auto& row : lrs_report["depths"]) CHECK(row["pass_off_branch"] == true);

  auto cover = run({"verify", "cover", "--graph", wm2});
  CHECK(cover.code == kExitPass);
  Json cover_report = Json::parse(cover.out);
  CHECK(cover_report["bidirectional"] == true);
  CHECK(cover_report["edge_surjective"] == true);
  CHECK(cover_report["levels"][0]["minimality"] == true);

  auto transitive = run({"verify", "cover", "--variant", "transitive", "--levels", "3"});
  CHECK(transitive.code == kExitPass);
  CHECK(Json::parse(transitive.out)["levels"][1]["minimality"] == false);

  CHECK(run({"verify", "audit", "--scheme", s248}).code == kExitPass);

  auto csv = run({"export", "ratio", "--scheme", s248});
  CHECK(csv.code == kExitPass);
  CHECK(csv.out.rfind("depth,max_ratio_num,max_ratio_den,bound,float_approx\n", 0) == 0);

  auto svg = run({"export", "svg", "--scheme", s248, "--levels", "3"});
  CHECK(svg.out.find("<svg") != std::string::npos);
  CHECK(svg.out.find("approximate") != std::string::npos);

  CHECK(run({"export", "dot", "--graph", wm2, "--level", "1"}).out.find("digraph") == 0);

  REQUIRE(run({"build", "shift", "--depth", "4", "--out", dir / "shift.json"}).code == kExitPass);
  auto ent = run({"export", "entropy", "--sys", dir / "shift.json", "--eps", "1/3", "--n", "1,2,3"});
  CHECK(ent.out == "eps,n,count,estimate\n1/3,1,2,0.693147\n1/3,2,4,0.693147\n1/3,3,8,0.693147\n");

  REQUIRE(run({"build", "midpoint", "--scheme", s248, "--depth", "2", "--out", dir / "m.json"}).code == kExitPass);
  REQUIRE(run({"build", "product", "--sys", dir / "m.json", "--sys", dir / "m.json", "--out", dir / "p.json"})
              .code == kExitPass);
  CHECK(run({"verify", "lrs", "--sys", dir / "p.json"}).code == kExitPass);

  REQUIRE(run({"build", "fixed-point", "--scheme", s248, "--levels", "2", "--tail", "8", "--refine", "4",
               "--out", dir / "w.json"})
              .code == kExitPass);
  CHECK(run({"verify", "lrs", "--fixed-point", dir / "w.json"}).code == kExitPass);
}

TEST_CASE("oracle runs are deterministic under a seed") {
  auto a = run({"verify", "oracle", "--trials", "300", "--seed", "5"});
  auto b = run({"verify", "oracle", "--trials", "300", "--seed", "5", "--jobs", "2"});
  CHECK(a.code == kExitPass);
  CHECK(a.out == b.out);
}

TEST_CASE("usage and input errors exit with 2") {
  TempDir dir;
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"build"}).code == kExitUsage);
  CHECK(run({"build", "odometer", "--depth", "3", "--bogus"}).code == kExitUsage);
  CHECK(run({"build", "odometer", "--s", "2,5", "--depth", "2"}).code == kExitUsage);
  CHECK(run({"verify", "audit", "--scheme", dir / "missing.json"}).code == kExitUsage);
  {
    std::ofstream(dir / "junk.json") << "{\"kind\": 3}";
  }
  auto junk = run({"verify", "audit", "--scheme", dir / "junk.json"});
  CHECK(junk.code == kExitUsage);
  CHECK_FALSE(junk.err.empty());
  {
    std::ofstream(dir / "notjson.json") << "not json";
  }
  CHECK(run({"verify", "derivative", "--scheme", dir / "notjson.json"}).code == kExitUsage);
  CHECK(run({"verify", "lrs"}).code == kExitUsage);

  auto help = run({"--help"});
  CHECK(help.code == kExitPass);
  CHECK(help.out.find("verify") != std::string::npos);
}
