#include <filesystem>

#include "doctest.h"
#include "primtrace/error.hpp"
#include "primtrace/pipeline.hpp"

using namespace primtrace;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pt_pipeline_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string Data(const std::string& name) {
  return std::string(PRIMTRACE_TEST_DATA) + "/" + name;
}

}  // namespace

TEST_CASE("pipeline: config keys") {
  RunConfig cfg;
  cfg.set("alpha", "0.2");
  cfg.set("topk", "50");
  cfg.set("mode", "non-overlapping");
  cfg.set("exploit", "no-setup");
  cfg.set("checkpoint", "b, a");
  cfg.set("std", "sample");
  CHECK(cfg.novelty.alpha == 0.2);
  CHECK(cfg.novelty.top_k == 50);
  CHECK(cfg.mode == CountMode::kNonOverlapping);
  CHECK(cfg.exploit_no_setup);
  CHECK(cfg.checkpoints == std::vector<std::string>{"b", "a"});
  CHECK(cfg.novelty.std_kind == StdKind::kSample);
  auto code = [&](const char* k, const char* v) {
    try {
      cfg.set(k, v);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kParse;
  };
  CHECK(code("bogus", "1") == ErrorCode::kUsage);
  CHECK(code("alpha", "abc") == ErrorCode::kUsage);
  CHECK(code("topk", "-3") == ErrorCode::kUsage);
  CHECK(code("mode", "sideways") == ErrorCode::kUsage);
}

TEST_CASE("pipeline: integer lists") {
  CHECK(ParseIntList("1,2,4", {}) == std::vector<std::int64_t>{1, 2, 4});
  CHECK(ParseIntList("2-5", {}) == std::vector<std::int64_t>{2, 3, 4, 5});
  CHECK(ParseIntList("8, 1-2, 2", {}) == std::vector<std::int64_t>{1, 2, 8});
  CHECK(ParseIntList("", {7}) == std::vector<std::int64_t>{7});
  CHECK_THROWS_AS(ParseIntList("1,x", {}), Error);
  CHECK_THROWS_AS(ParseIntList("5-2", {}), Error);
}

TEST_CASE("pipeline: passk rows per checkpoint") {
  RunConfig cfg;
  cfg.k = "1,2,4,8,16,32";
  Pipeline p(cfg);
  SolveMatrix m = LoadSolves(Data("solves.csv"));
  std::string csv = p.passk_csv(m);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 6 * m.checkpoints().size());
  CHECK(csv.rfind("checkpoint,k,estimate\n", 0) == 0);
}

TEST_CASE("pipeline: subcommands write their outputs") {
  TempDir tmp;
  RunConfig cfg;
  cfg.in = Data("rollouts.jsonl");
  for (const char* sub : {"segment", "classify", "motifs", "metrics", "novelty",
                          "diagnostics"}) {
    cfg.out = tmp.file(std::string(sub) + ".out");
    Pipeline(cfg).run(sub);
    CHECK(fs::file_size(cfg.out) > 0);
  }
  cfg.in = Data("solves.csv");
  cfg.out = tmp.file("passk.csv");
  Pipeline(cfg).run("passk");
  cfg.out = tmp.file("splits.json");
  Pipeline(cfg).run("split");
  cfg.in = Data("puzzles.jsonl");
  cfg.out = tmp.file("verify.csv");
  Pipeline(cfg).run("verify");
  std::string verify = ReadFile(cfg.out);
  CHECK(verify.find(",false,") == std::string::npos);
}

TEST_CASE("pipeline: report matches individual subcommands") {
  TempDir tmp;
  RunConfig cfg;
  cfg.in = Data("rollouts.jsonl");
  cfg.seed = 5;
  cfg.bootstrap_iterations = 500;
  cfg.out = tmp.file("bundle");
  Pipeline(cfg).run("report");
  for (const char* f : {"spans.jsonl", "labels.jsonl", "motifs.csv", "metrics.csv",
                        "novelty.csv", "diagnostics.csv", "primitive_counts.csv",
                        "categories.csv", "depth_ci.csv", "mwu.csv", "traces.csv",
                        "passk.csv", "splits.json", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(fs::path(cfg.out) / f));
  }
  std::pair<const char*, const char*> pairs[] = {
      {"segment", "spans.jsonl"},   {"classify", "labels.jsonl"},
      {"motifs", "motifs.csv"},     {"metrics", "metrics.csv"},
      {"novelty", "novelty.csv"},   {"diagnostics", "diagnostics.csv"}};
  for (auto [sub, file] : pairs) {
    RunConfig one = cfg;
    one.out = tmp.file(std::string("one_") + file);
    Pipeline(one).run(sub);
    CHECK(ReadFile(one.out) == ReadFile((fs::path(cfg.out) / file).string()));
  }
  // determinism
  RunConfig again = cfg;
  again.out = tmp.file("bundle2");
  Pipeline(again).run("report");
  for (const auto& entry : fs::directory_iterator(cfg.out)) {
    auto name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    CHECK(ReadFile(entry.path().string()) ==
          ReadFile((fs::path(again.out) / name).string()));
  }
}

TEST_CASE("pipeline: rewards with and without novelty") {
  TempDir tmp;
  RunConfig cfg;
  cfg.in = Data("puzzle_rollouts.jsonl");
  cfg.puzzles = Data("puzzles.jsonl");
  cfg.out = tmp.file("rewards.csv");
  Pipeline(cfg).run("reward");
  std::string base = ReadFile(cfg.out);
  CHECK(base.find("2.1") != std::string::npos);
  cfg.shape_with_novelty = true;
  Pipeline(cfg).run("reward");
  std::string shaped = ReadFile(cfg.out);
  CHECK(shaped != base);
}

TEST_CASE("pipeline: error paths") {
  RunConfig cfg;
  CHECK_THROWS_AS(Pipeline(cfg).run("segment"), Error);
  CHECK_THROWS_AS(Pipeline(cfg).run("frobnicate"), Error);
  cfg.in = Data("rollouts.jsonl");
  cfg.out = "/nonexistent/dir/out.csv";
  try {
    Pipeline(cfg).run("segment");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  cfg.checkpoints = {"no-such-checkpoint"};
  cfg.out = "x";
  try {
    Pipeline(cfg).run("segment");
    FAIL("expected lookup error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLookup);
  }
}
