#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "scratch_dir.hpp"
#include "tumorsynth/error.hpp"
#include "tumorsynth/hash.hpp"
#include "tumorsynth/selection.hpp"

using namespace tumorsynth;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tumorsynth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// One small phantom pool shared by the CLI tests.
const std::filesystem::path& phantom_dir() {
  static ScratchDir dir("cli-phantoms");
  static const bool made = [] {
    const Result r = run_cli({"phantom", "--out-dir", dir.path().string(), "--count", "2", "--dims", "64,64,64",
                              "--spacing", "1", "--liver-axes", "24,22,20", "--vessels", "2", "--seed", "4"});
    REQUIRE(r.code == 0);
    return true;
  }();
  (void)made;
  return dir.path();
}

std::string image0() { return (phantom_dir() / "images" / "phantom_000.nii.gz").string(); }
std::string label0() { return (phantom_dir() / "labels" / "phantom_000.nii.gz").string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes are distinct per error family") {
  CHECK(cli::exit_code(Errc::io) == 3);
  CHECK(cli::exit_code(Errc::config) == 4);
  CHECK(cli::exit_code(Errc::parse) == 5);
  CHECK(cli::exit_code(Errc::corrupt_header) == 6);
  CHECK(cli::exit_code(Errc::unsupported_datatype) == 6);
  CHECK(cli::exit_code(Errc::dimension_mismatch) == 7);
  CHECK(cli::exit_code(Errc::empty_mask) == 8);
  CHECK(cli::exit_code(Errc::placement_exhausted) == 9);
  CHECK(cli::exit_code(Errc::metric_absent) == 10);
  for (int e = 0; e <= static_cast<int>(Errc::epoch_grid_mismatch); ++e) {
    const int code = cli::exit_code(static_cast<Errc>(e));
    CHECK(code > cli::kExitUsage);
    CHECK(code != cli::kExitHashMismatch);
  }
}

TEST_CASE("unknown subcommand prints usage and exits 2") {
  const Result r = run_cli({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  const auto line = r.err.substr(0, r.err.find('\n'));
  const auto j = nlohmann::json::parse(line);
  CHECK(j["error"]["exit_code"] == 2);
  CHECK(run_cli({}).code == 2);
}

TEST_CASE("synth is byte-identical across runs") {
  ScratchDir out("cli-synth");
  for (const char* sub : {"a", "b"}) {
    const Result r = run_cli({"synth", "--volume", image0(), "--liver", label0(), "--out-dir",
                              (out / sub).string(), "--class", "small", "--seed", "5"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  for (const char* f : {"image.nii.gz", "label.nii.gz"}) {
    CHECK(sha256_file(out / "a" / f) == sha256_file(out / "b" / f));
  }
  const auto rec = nlohmann::json::parse(std::ifstream(out / "a" / "record.json"));
  CHECK(rec["command"] == "synth");
}

TEST_CASE("evaluating ground truth against itself scores 1") {
  ScratchDir out("cli-eval");
  REQUIRE(run_cli({"synth", "--volume", image0(), "--liver", label0(), "--out-dir", out.path().string(),
                   "--class", "small"}).code == 0);
  const std::string label = (out / "label.nii.gz").string();
  const Result r = run_cli({"evaluate", "--pred", label, "--gt", label, "--json", (out / "eval.json").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto j = nlohmann::json::parse(std::ifstream(out / "eval.json"));
  CHECK(j["dsc"]["mean"] == 1.0);
  CHECK(j["cases"][0]["dsc"] == 1.0);
}

TEST_CASE("validation set, regenerate and hash mismatch") {
  ScratchDir out("cli-val");
  const Result r = run_cli({"make-validation", "--pool", (phantom_dir() / "pool.json").string(), "--out-dir",
                            (out / "val").string(), "--class", "tiny", "--workers", "2"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string manifest = (out / "val" / "manifest.json").string();
  const Result re = run_cli({"regenerate", "--manifest", manifest, "--index", "1", "--out-dir", (out / "re").string()});
  CHECK(re.code == 0);
  CHECK(nlohmann::json::parse(re.out)["matches_manifest"] == true);

  auto j = nlohmann::json::parse(std::ifstream(manifest));
  j["items"][1]["image_sha256"] = std::string(64, '0');
  std::ofstream(out / "edited.json") << j.dump();
  CHECK(run_cli({"regenerate", "--manifest", (out / "edited.json").string(), "--index", "1", "--out-dir",
                 (out / "re2").string()}).code == cli::kExitHashMismatch);
}

TEST_CASE("study trajectory feeds select-checkpoint") {
  ScratchDir out("cli-study");
  const std::string traj = (out / "traj.jsonl").string();
  REQUIRE(run_cli({"simulate-study", "--trials", "20", "--seed", "3", "--trajectory", traj}).code == 0);
  const auto runs = read_trajectories(traj);
  REQUIRE_FALSE(runs.empty());
  for (const auto& t : runs) {
    const auto& s = t.series("dsc");
    REQUIRE(s.size() == 60);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(s[k].epoch == 100 * static_cast<std::int64_t>(k + 1));
  }
  const Result sel = run_cli({"select-checkpoint", traj, "--metric", "dsc", "--test-metric", "test_dsc"});
  CHECK(sel.code == 0);
  const auto first = nlohmann::json::parse(sel.out.substr(0, sel.out.find('\n')));
  CHECK(first["regret"].get<double>() >= 0.0);

  const std::string again = (out / "again.jsonl").string();
  REQUIRE(run_cli({"simulate-study", "--trials", "20", "--seed", "3", "--trajectory", again}).code == 0);
  CHECK(sha256_file(traj) == sha256_file(again));
}

TEST_CASE("select-checkpoint errors") {
  ScratchDir out("cli-select");
  std::ofstream(out / "bad.jsonl") << "{\"run\": 0}\n";
  CHECK(run_cli({"select-checkpoint", (out / "bad.jsonl").string()}).code == 5);
  std::ofstream(out / "ok.jsonl") << "{\"run\":0,\"epoch\":100,\"metric\":\"loss\",\"value\":1.0}\n";
  CHECK(run_cli({"select-checkpoint", (out / "ok.jsonl").string(), "--metric", "dsc"}).code == 10);
  const Result r = run_cli({"select-checkpoint", (out / "ok.jsonl").string(), "--metric", "loss", "--minimize"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["epoch"] == 100);
}

TEST_CASE("bad config is exit 4") {
  ScratchDir out("cli-config");
  std::ofstream(out / "c.json") << R"({"schema_version": 1, "no_such_key": 1})";
  CHECK(run_cli({"simulate-study", "--config", (out / "c.json").string(), "--trials", "1"}).code == 4);
}

TEST_CASE("preprocess, shapes, textures and report") {
  ScratchDir out("cli-misc");
  const std::string pre = (out / "pre.nii.gz").string();
  CHECK(run_cli({"preprocess", "--volume", image0(), "--out", pre, "--normalize"}).code == 0);
  CHECK(std::filesystem::exists(pre + ".record.json"));
  CHECK(run_cli({"shapes", "--out-dir", (out / "shapes").string(), "--count", "2", "--class", "small"}).code == 0);
  CHECK(std::filesystem::exists(out / "shapes" / "shape_001.nii.gz"));
  CHECK(run_cli({"textures", "--out-dir", (out / "tex").string(), "--count", "1", "--size", "16"}).code == 0);
  CHECK(run_cli({"vessels", "--volume", image0(), "--liver", label0(), "--out-dir", (out / "ves").string()}).code == 0);

  const std::string study = (out / "study.json").string();
  const std::string traj = (out / "traj.jsonl").string();
  REQUIRE(run_cli({"simulate-study", "--trials", "10", "--json", study, "--trajectory", traj}).code == 0);
  const Result r = run_cli({"report", "--study", study, "--trajectory", traj, "--out-dir", (out / "rep").string()});
  CHECK_MESSAGE(r.code == 0, r.err);
  CHECK(run_cli({"report", "--out-dir", (out / "rep2").string()}).code == 2);
}

}
