#include <filesystem>
#include <set>

#include "doctest.h"
#include "primtrace/corpus.hpp"
#include "primtrace/error.hpp"

using namespace primtrace;

namespace {

std::string Line(const std::string& p, const std::string& r,
                 const std::string& ck, const std::string& extra = "") {
  return "{\"prompt_id\":\"" + p + "\",\"rollout_id\":\"" + r +
         "\",\"checkpoint\":\"" + ck + "\",\"response\":\"hi\"" + extra + "}\n";
}

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kUsage;
}

template <typename Fn>
std::string MessageOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("corpus: two valid lines give two records") {
  Corpus c = ParseCorpus(Line("p1", "r1", "A") + Line("p1", "r2", "A"));
  CHECK(c.size() == 2);
  CHECK(c.records()[1].rollout_id == "r2");
  CHECK_FALSE(c.records()[0].correct.has_value());
}

TEST_CASE("corpus: empty file is an empty corpus") {
  CHECK(ParseCorpus("").empty());
  CHECK(ParseCorpus("\n\n").empty());
}

TEST_CASE("corpus: nll/mask length mismatch names the line") {
  std::string text = Line("p1", "r1", "A") +
                     Line("p1", "r2", "A",
                          ",\"token_nlls\":[0.1,0.2],\"response_mask\":[true]");
  CHECK(CodeOf([&] { ParseCorpus(text); }) == ErrorCode::kParse);
  CHECK(MessageOf([&] { ParseCorpus(text); }).find("line 2") != std::string::npos);
}

TEST_CASE("corpus: malformed records are parse errors") {
  CHECK(CodeOf([] { ParseCorpus("{not json\n"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { ParseCorpus("{\"prompt_id\":\"p\"}\n"); }) ==
        ErrorCode::kParse);
  CHECK(CodeOf([] {
          ParseCorpus(Line("p", "r", "A", ",\"token_nlls\":[-1.0]"));
        }) == ErrorCode::kParse);
  CHECK(CodeOf([] { ParseCorpus(Line("p", "r", "A", ",\"correct\":3")); }) ==
        ErrorCode::kParse);
  CHECK(CodeOf([] { ParseCorpus("\xEF\xBB\xBF" + Line("p", "r", "A")); }) ==
        ErrorCode::kParse);
}

TEST_CASE("corpus: duplicate key is an integrity error") {
  std::string text = Line("p1", "r1", "A") + Line("p1", "r1", "A");
  CHECK(CodeOf([&] { ParseCorpus(text); }) == ErrorCode::kIntegrity);
  // same ids under another checkpoint are distinct traces
  CHECK(ParseCorpus(Line("p1", "r1", "A") + Line("p1", "r1", "B")).size() == 2);
}

TEST_CASE("corpus: optional fields and null") {
  Corpus c = ParseCorpus(Line(
      "p", "r", "A",
      ",\"correct\":true,\"token_nlls\":[0.5,1.5],\"response_mask\":[true,false]"));
  const auto& r = c.records()[0];
  REQUIRE(r.correct.has_value());
  CHECK(*r.correct);
  CHECK(r.token_nlls->size() == 2);
  CHECK((*r.response_mask)[1] == false);
  Corpus n = ParseCorpus(
      Line("p", "r", "A", ",\"correct\":null,\"token_nlls\":null"));
  CHECK_FALSE(n.records()[0].correct.has_value());
  CHECK_FALSE(n.records()[0].token_nlls.has_value());
}

TEST_CASE("corpus: write/load round trip") {
  std::string text;
  for (int p = 0; p < 3; ++p)
    for (int r = 0; r < 4; ++r)
      text += Line("p" + std::to_string(p), "r" + std::to_string(r), "A",
                   r % 2 ? ",\"correct\":false,\"token_nlls\":[0.25,3]" : "");
  Corpus a = ParseCorpus(text);
  auto path = (std::filesystem::temp_directory_path() / "pt_roundtrip.jsonl").string();
  WriteCorpus(a, path);
  Corpus b = LoadCorpus(path);
  std::filesystem::remove(path);
  REQUIRE(a.size() == b.size());
  for (const auto& r : a.records()) {
    const RolloutRecord* other = b.find(r.key());
    REQUIRE(other != nullptr);
    CHECK(*other == r);
  }
}

TEST_CASE("corpus: grouping by prompt") {
  std::string text;
  for (int p = 0; p < 3; ++p)
    for (int r = 0; r < 8; ++r)
      text += Line("p" + std::to_string(p), "r" + std::to_string(r), "A");
  text += Line("p9", "r0", "B");
  Corpus c = ParseCorpus(text);

  auto groups = GroupByPrompt(c, "A");
  REQUIRE(groups.size() == 3);
  std::set<const RolloutRecord*> seen;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    CHECK(groups[i].prompt_id == "p" + std::to_string(i));
    CHECK(groups[i].rollouts.size() == 8);
    for (const auto* r : groups[i].rollouts) {
      CHECK(r->checkpoint == "A");
      CHECK(seen.insert(r).second);
    }
  }
  CHECK(seen.size() == c.records_for("A").size());

  auto single = GroupByPrompt(c, "B");
  REQUIRE(single.size() == 1);
  CHECK(single[0].rollouts.size() == 1);
  CHECK(CodeOf([&] { GroupByPrompt(c, "Z"); }) == ErrorCode::kLookup);
  CHECK(c.checkpoints() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("corpus: missing file is an io error") {
  CHECK(CodeOf([] { LoadCorpus("/nonexistent/dir/x.jsonl"); }) == ErrorCode::kIo);
}
