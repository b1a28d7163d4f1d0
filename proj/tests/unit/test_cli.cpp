#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "examini/cli/cli.hpp"
#include "examini/trace/trace.hpp"
#include "support/trace_fixtures.hpp"

using namespace examini;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = examini::cli::dispatch(args, o, e);
  return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("examini_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(); }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

json read(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("usage errors") {
  auto r = invoke({"frobnicate"});
  CHECK(r.code == 2);
  CHECK((r.out + r.err).find("Usage") != std::string::npos);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"mhd"}).code == 2);
  CHECK(invoke({"mhd", "--config", "/nonexistent/x.json"}).code == 2);
  CHECK(invoke({"trace"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"mhd", "--help"}).code == 0);
}

TEST_CASE("mhd subcommand") {
  const auto dir = scratch("mhd");
  write(dir / "ot.json", {{"cells", {8, 8, 8}}, {"max_steps", 3}});
  auto r = invoke({"mhd", "--config", (dir / "ot.json").string(), "--ranks", "2", "--out",
                (dir / "a").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"trace.jsonl", "conserved.csv", "fields.bin", "fields.json",
                        "effective_config.json", "summary.json"})
    CHECK_MESSAGE(fs::exists(dir / "a" / f), f);
  const json eff = read(dir / "a" / "effective_config.json");
  CHECK(eff.at("cfl") == 0.3);
  CHECK(eff.at("gamma") == 5.0 / 3.0);
  CHECK(eff.at("ranks") == 2);
  CHECK(trace::load_trace(dir / "a" / "trace.jsonl").ranks() == 2);

  SUBCASE("effective config reproduces the run bitwise") {
    r = invoke({"mhd", "--config", (dir / "a" / "effective_config.json").string(), "--out",
             (dir / "b").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "a" / "fields.bin") == slurp(dir / "b" / "fields.bin"));
    CHECK(slurp(dir / "a" / "conserved.csv") == slurp(dir / "b" / "conserved.csv"));
    CHECK(slurp(dir / "a" / "effective_config.json") == slurp(dir / "b" / "effective_config.json"));
  }
  SUBCASE("invalid config lists every violation") {
    write(dir / "bad.json", {{"cfl", 1.5}, {"gamma", 0.5}});
    r = invoke({"mhd", "--config", (dir / "bad.json").string(), "--out", (dir / "c").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("cfl: must lie in (0, 1)") != std::string::npos);
    CHECK(r.err.find("gamma: must exceed 1") != std::string::npos);
    CHECK(r.err.find("schema for 'mhd'") != std::string::npos);
    CHECK(!fs::exists(dir / "c"));
  }
  SUBCASE("seed override is echoed") {
    r = invoke({"mhd", "--config", (dir / "ot.json").string(), "--seed", "7", "--out",
             (dir / "d").string()});
    REQUIRE(r.code == 0);
    CHECK(read(dir / "d" / "effective_config.json").at("seed") == 7);
  }
  fs::remove_all(dir);
}

TEST_CASE("pic and gravity subcommands") {
  const auto dir = scratch("apps");
  write(dir / "pic.json", {{"nx", 8}, {"ny", 8}, {"cycles", 2}});
  auto r = invoke({"pic", "--config", (dir / "pic.json").string(), "--ranks", "2", "--out",
                (dir / "p").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto kernels = slurp(dir / "p" / "kernels.csv");
  CHECK(kernels.rfind("cycle,kernel,rank,seconds\n", 0) == 0);
  CHECK(std::count(kernels.begin(), kernels.end(), '\n') == 1 + 2 * 3 * 2);
  CHECK(fs::exists(dir / "p" / "energy.csv"));
  r = invoke({"pic", "--config", (dir / "p" / "effective_config.json").string(), "--out",
           (dir / "p2").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "p" / "energy.csv") == slurp(dir / "p2" / "energy.csv"));

  write(dir / "g.json", {{"bodies", 300}, {"check_direct", true}, {"ranks", 2}});
  r = invoke({"gravity", "--config", (dir / "g.json").string(), "--out", (dir / "g").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "g" / "forces.csv"));
  CHECK(fs::exists(dir / "g" / "bodies.bin"));
  CHECK(read(dir / "g" / "summary.json").at("median_rel_error").get<double>() < 0.01);

  SUBCASE("runtime failures exit 3") {
    write(dir / "stiff.json",
          {{"nx", 8}, {"ny", 8}, {"cycles", 1}, {"gmres", {{"tolerance", 1e-15}, {"max_iters", 1}}}});
    r = invoke({"pic", "--config", (dir / "stiff.json").string(), "--out", (dir / "s").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("GmresNoConvergence") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("trace analyze") {
  const auto dir = scratch("trace");
  trace::write_trace(dir / "run.jsonl", testing::two_rank_send_wait());
  auto r = invoke({"trace", "analyze", "--in", (dir / "run.jsonl").string(), "--ideal-replay"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json j = json::parse(r.out);
  const auto& g = j.at("global");
  CHECK(g.at("serialization_efficiency").get<double>() == doctest::Approx(0.5));
  CHECK(g.at("transfer_efficiency").get<double>() == doctest::Approx(8.0 / 9.0));
  CHECK(g.at("parallel_efficiency").get<double>() ==
        doctest::Approx(g.at("load_balance").get<double>() *
                        g.at("communication_efficiency").get<double>()));

  r = invoke({"trace", "analyze", "--in", (dir / "run.jsonl").string()});
  REQUIRE(r.code == 0);
  CHECK(!json::parse(r.out).at("global").contains("transfer_efficiency"));

  trace::write_trace(dir / "lat.jsonl", testing::barrier_bounded_sends(10));
  r = invoke({"trace", "analyze", "--in", (dir / "lat.jsonl").string(), "--out", (dir / "o").string()});
  REQUIRE(r.code == 0);
  const json f = read(dir / "o" / "efficiency.json").at("latency_findings");
  REQUIRE(f.size() == 1);
  CHECK(f[0].at("run_length") == 10);

  std::ofstream(dir / "junk.jsonl") << "not a trace\n";
  CHECK(invoke({"trace", "analyze", "--in", (dir / "junk.jsonl").string()}).code == 3);
  fs::remove_all(dir);
}

TEST_CASE("campaign and report") {
  const auto dir = scratch("campaign");
  write(dir / "spec.json", {{"name", "syn"},
                            {"app", "synthetic"},
                            {"mode", "strong"},
                            {"rank_counts", {1, 2}},
                            {"size", {40, 1, 1}},
                            {"repetitions", 3}});
  write(dir / "machine.json", {{"cpu_model", "Test CPU"}, {"workers", 2}, {"clock", "rank_cpu"}});
  const auto base = (dir / "baselines").string();
  auto run = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"campaign", "--config", (dir / "spec.json").string(), "--machine",
                               (dir / "machine.json").string(), "--out", (dir / "out").string(),
                               "--baseline-dir", base};
    a.insert(a.end(), extra.begin(), extra.end());
    return invoke(a);
  };
  auto r = run({});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("missing") != std::string::npos);
  for (const char* f : {"syn.csv", "syn.json", "regression.json", "effective_config.json",
                        "machine.json"})
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  CHECK(fs::exists(dir / "out" / "traces"));

  REQUIRE(run({"--update-baselines"}).code == 0);
  // Shrink the stored baselines so the next run looks twice as slow.
  for (const auto& e : fs::directory_iterator(base)) {
    if (e.path().string().find(".candidate.") != std::string::npos) continue;
    json b = read(e.path());
    b["walltime"] = b["walltime"].get<double>() / 2.0;
    write(e.path(), b);
  }
  r = run({"--tolerance", "10"});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAILED") != std::string::npos);
  CHECK(read(dir / "out" / "regression.json").at("passed") == false);

  r = invoke({"report", "--in", (dir / "out" / "syn.json").string(), "--out", (dir / "rep").string(),
           "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "rep" / "syn.csv") == slurp(dir / "out" / "syn.csv"));
  CHECK(!fs::exists(dir / "rep" / "syn.json"));

  write(dir / "badspec.json", {{"app", "synthetic"}, {"rank_counts", {2, 1}}});
  r = invoke({"campaign", "--config", (dir / "badspec.json").string(), "--out", (dir / "x").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("rank_counts") != std::string::npos);
  fs::remove_all(dir);
}
