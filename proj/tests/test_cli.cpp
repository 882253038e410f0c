#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "tscale/cli.hpp"
#include "tscale/planner.hpp"
#include "tscale/results.hpp"
#include "tscale/shape.hpp"
#include "tscale/text.hpp"

using namespace tscale;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tscale_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

const char* kRecords =
    "objective,heads,width,layers,context_len,mnli_m,mnli_mm,qqp,qnli,sst2,cola,total_time_s,"
    "final_val_loss,phi,glue_large\n"
    "bert,2,128,2,128,,,,,,,21358,,,78.6\n"
    "bert,2,128,2,128,,,,,,,10736,,,77.4\n"
    "bert,2,128,2,128,,,,,,,14575,,,78.2\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("size") {
  const auto r = invoke({"size", "--heads", "2", "--width", "128", "--layers", "36"});
  CHECK(r.code == cli::exit_ok);
  CHECK(r.out.find("N_model: 7,077,888") != std::string::npos);
  CHECK(r.out.find("3,972,608") != std::string::npos);
}

TEST_CASE("machine output parses back") {
  const auto size = invoke({"size", "-A", "4", "-H", "256", "-L", "3", "--bias", "--format", "machine"});
  REQUIRE(size.code == 0);
  const auto j = nlohmann::json::parse(size.out);
  CHECK(j["n_model"] == 12 * 3 * 256 * 256);
  CHECK(shape_from_json(j["shape"].dump()).shape == ShapeConfig{4, 256, 3, 128, 4});

  const auto flops = invoke({"flops", "-A", "2", "-H", "128", "-L", "2", "--objective", "gpt2",
                             "--format", "machine", "--tokens", "1000000"});
  const auto jf = nlohmann::json::parse(flops.out);
  CHECK(jf["c_forward"] == 851'968);
  CHECK(jf["total_training_flops"] == 2'359'296'000'000ull);

  const auto scale = invoke({"scale", "--alpha-from", "3,104", "--phi", "19.865", "--format", "machine"});
  auto js = nlohmann::json::parse(scale.out);
  CHECK(js["phi"] == 19.865);
  js.erase("phi");
  js.erase("policy_id");
  CHECK(shape_from_json(js.dump()).shape == ShapeConfig{7, 469, 4, 128, 4});

  const auto grid = invoke({"grid", "--target", "393216", "--depths", "2,3", "--format", "machine"});
  CHECK(nlohmann::json::parse(grid.out)["candidates"].size() == 2);
}

TEST_CASE("scale prints the scaled shape") {
  const auto r = invoke({"scale", "--alpha-from", "3,104", "--phi", "19.865"});
  CHECK(r.code == 0);
  CHECK(r.out.starts_with("A=7 H=469 L=4 N=10,558,128\n"));
}

TEST_CASE("policy file round trip through the CLI") {
  const auto path = scratch("policy.json").string();
  REQUIRE(invoke({"scale", "--alpha-from", "3,104", "--policy-out", path}).code == 0);
  const auto direct = invoke({"scale", "--alpha-from", "3,104", "--phi", "20.578"});
  const auto from_file = invoke({"scale", "--policy", path, "--phi", "20.578"});
  CHECK(from_file.code == 0);
  CHECK(from_file.out == direct.out);
}

TEST_CASE("scaled shape feeds back into size") {
  const auto path = scratch("scaled.json").string();
  REQUIRE(invoke({"scale", "--alpha-from", "3,104", "--phi", "21.716", "--format", "machine", "--out",
                  path}).code == 0);
  const auto r = invoke({"size", "--shape", path});
  CHECK(r.code == 0);
  CHECK(r.out.find("N_model: 41,533,440") != std::string::npos);
}

TEST_CASE("plan writes a manifest that reads back") {
  const auto path = scratch("manifest.json").string();
  const auto r = invoke({"plan", "-A", "2", "-H", "128", "-L", "4", "--manifest", path, "--override",
                         "dropout=0.2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("total steps: 137,694") != std::string::npos);
  const auto m = manifest_from_json(text::read_file(path));
  CHECK(m.dropout.overridden);
  CHECK(m.schedule.total_steps == 137'694);
}

TEST_CASE("plan calibrates from a run log") {
  const auto log = scratch("run.csv").string();
  text::write_file(log, "step,elapsed_seconds\n0,0\n100,5\n200,10\n");
  const auto r = invoke({"plan", "-A", "2", "-H", "128", "-L", "4", "--run-log", "128:64=" + log,
                         "--throughput", "512:16=0.1", "--format", "machine"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["wall_clock_s"].get<double>() == doctest::Approx(94'476 * 0.05 + 43'218 * 0.1));
}

TEST_CASE("verify succeeds on a small shape") {
  const auto r = invoke({"verify", "-A", "2", "-H", "32", "-L", "2", "--context-len", "16",
                         "--objective", "gpt2", "--skip-published"});
  CHECK(r.code == 0);
  CHECK(r.out.find("context-free FLOPs identity: exact") != std::string::npos);
  CHECK(r.out.find("attention FLOPs identity (N(N+1)/2 pairs): exact") != std::string::npos);
}

TEST_CASE("ingest machine output is a records file that ingests identically") {
  const auto path = scratch("records.csv").string();
  text::write_file(path, kRecords);
  const auto first = invoke({"ingest", "--records", path, "--format", "machine"});
  REQUIRE(first.code == 0);
  const auto again_path = scratch("records2.csv").string();
  text::write_file(again_path, first.out);
  const auto second = invoke({"ingest", "--records", again_path, "--format", "machine"});
  CHECK(second.out == first.out);
}

TEST_CASE("report budgets") {
  const auto path = scratch("budget.csv").string();
  text::write_file(path, kRecords);
  const auto r = invoke({"report", "--records", path, "--budgets", "--format", "machine"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["variants"][0]["delta_time_s"].get<double>() == doctest::Approx(-10'622));
  CHECK(j["variants"][1]["delta_glue_large"].get<double>() == doctest::Approx(-0.4));
}

TEST_CASE("output goes to --out") {
  const auto path = scratch("size.txt").string();
  const auto r = invoke({"size", "-L", "36", "--out", path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(text::read_file(path).find("7,077,888") != std::string::npos);
}

TEST_CASE("deterministic output") {
  const std::vector<std::string> args{"verify", "-A", "2", "-H", "32", "-L", "1", "--context-len",
                                      "8", "--format", "machine"};
  CHECK(invoke(args).out == invoke(args).out);
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == cli::exit_validation);
  CHECK(invoke({"launch"}).code == cli::exit_validation);
  CHECK(invoke({"size", "--heads", "3", "--width", "128"}).code == cli::exit_validation);
  CHECK(invoke({"size", "--format", "xml"}).code == cli::exit_validation);
  CHECK(invoke({"scale", "--phi", "3"}).code == cli::exit_validation);
  CHECK(invoke({"size", "--shape", "/nonexistent/shape.json"}).code == cli::exit_io);
  CHECK(invoke({"ingest", "--records", "/nonexistent/r.csv"}).code == cli::exit_io);
  CHECK(invoke({"size", "--out", "/nonexistent/dir/out.txt"}).code == cli::exit_io);
  const auto bad = scratch("bad.csv").string();
  text::write_file(bad, "objective,heads\nbert,2\n");
  const auto r = invoke({"ingest", "--records", bad});
  CHECK(r.code == cli::exit_validation);
  CHECK(r.err.find("missing column") != std::string::npos);
  CHECK(invoke({"--help"}).code == cli::exit_ok);
}

}
