#include "doctest.h"
#include "oracles.hpp"
#include "primtrace/corpus.hpp"
#include "primtrace/error.hpp"
#include "primtrace/verifiers.hpp"

using namespace primtrace;

namespace {

BoardGrid G(std::vector<std::string> rows) { return BoardGrid{std::move(rows)}; }

PuzzleInstance Pattern2x2() {
  return ParsePuzzle(
      R"({"id":"p","kind":"PATTERN","width":2,"height":2,"initial":["..",".."],)"
      R"("gold":["#.",".#"],"clues":{"rows":[[1],[1]],"cols":[[1],[1]]}})",
      "x");
}

std::vector<PuzzleInstance> Fixtures() {
  return LoadPuzzles(std::string(PRIMTRACE_TEST_DATA) + "/puzzles.jsonl");
}

}  // namespace

TEST_CASE("verifiers: bridges 1x3") {
  auto p = ParsePuzzle(
      R"({"kind":"BRIDGES","width":3,"height":1,"initial":["1.1"]})", "b");
  CHECK(Verify(p, G({"1-1"})).ok);
  auto no_bridge = Verify(p, G({"1.1"}));
  CHECK_FALSE(no_bridge.ok);
  CHECK(no_bridge.diagnostic.find("bridges") != std::string::npos);
  CHECK_FALSE(Verify(p, G({"1=1"})).ok);
  CHECK_FALSE(Verify(p, G({"1|1"})).ok);
}

TEST_CASE("verifiers: bridges rules") {
  auto p = ParsePuzzle(
      R"({"kind":"BRIDGES","width":3,"height":3,"initial":["2.1","...","1.."]})",
      "b");
  CHECK(Verify(p, G({"2-1", "|..", "1.."})).ok);
  // dangling bridge
  CHECK_FALSE(Verify(p, G({"2-1", "|.-", "1.."})).ok);
  // two components
  auto q = ParsePuzzle(
      R"({"kind":"BRIDGES","width":3,"height":3,"initial":["1.1","...","1.1"]})",
      "b");
  auto split = Verify(q, G({"1-1", "...", "1-1"}));
  CHECK_FALSE(split.ok);
  CHECK(split.diagnostic.find("connected") != std::string::npos);
  CHECK(Verify(q, G({"1-1", "|.|", "1-1"})).ok == false);
  auto ring = ParsePuzzle(
      R"({"kind":"BRIDGES","width":3,"height":3,"initial":["2.2","...","2.2"]})",
      "b");
  CHECK(Verify(ring, G({"2-2", "|.|", "2-2"})).ok);
}

TEST_CASE("verifiers: pattern 2x2") {
  auto p = Pattern2x2();
  CHECK(Verify(p, G({"#.", ".#"})).ok);
  CHECK(Verify(p, G({".#", "#."})).ok);
  CHECK_FALSE(Verify(p, G({"##", "##"})).ok);
}

TEST_CASE("verifiers: undead 1x1 zombie") {
  auto p = ParsePuzzle(
      R"({"kind":"UNDEAD","width":1,"height":1,"initial":["."],)"
      R"("clues":{"totals":{"Z":1,"G":0,"V":0},"top":[1],"bottom":[1],"left":[1],"right":[1]}})",
      "u");
  CHECK(Verify(p, G({"Z"})).ok);
  CHECK_FALSE(Verify(p, G({"G"})).ok);
  CHECK_FALSE(Verify(p, G({"."})).ok);
}

TEST_CASE("verifiers: undead mirrors split visibility") {
  // From the left the vampire is seen before the mirror; from the top the
  // ray turns left at the mirror and passes it afterwards, unseen.
  auto p = ParsePuzzle(
      R"({"kind":"UNDEAD","width":2,"height":1,"initial":["./"],)"
      R"("clues":{"totals":{"V":1},"left":[1],"right":[null],"top":[1,0],"bottom":[1,0]}})",
      "u");
  CHECK(Verify(p, G({"V/"})).ok);
  auto q = ParsePuzzle(
      R"({"kind":"UNDEAD","width":2,"height":1,"initial":["./"],)"
      R"("clues":{"totals":{"V":1},"top":[null,1]}})",
      "u");
  CHECK_FALSE(Verify(q, G({"V/"})).ok);
}

TEST_CASE("verifiers: galaxies") {
  auto p = ParsePuzzle(
      R"({"kind":"GALAXIES","width":2,"height":2,"initial":["..",".."],)"
      R"("clues":{"dots":[[2,2]]}})",
      "g");
  CHECK(Verify(p, G({"AA", "AA"})).ok);
  CHECK_FALSE(Verify(p, G({"AA", "A."})).ok);
  auto two = ParsePuzzle(
      R"({"kind":"GALAXIES","width":2,"height":2,"initial":["..",".."],)"
      R"("clues":{"dots":[[1,2],[3,2]]}})",
      "g");
  CHECK(Verify(two, G({"AB", "AB"})).ok);
  CHECK_FALSE(Verify(two, G({"AA", "BB"})).ok);
}

TEST_CASE("verifiers: structural errors are distinct from rule failures") {
  auto p = Pattern2x2();
  auto code = [&](const BoardGrid& g) {
    try {
      Verify(p, g);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kUsage;
  };
  CHECK(code(G({"#."})) == ErrorCode::kStructure);
  CHECK(code(G({"#x", ".#"})) == ErrorCode::kStructure);
  CHECK_THROWS_AS(
      ParsePuzzle(R"({"kind":"PATTERN","width":2,"height":2,"initial":[".."],)"
                  R"("clues":{"rows":[[1],[1]],"cols":[[1],[1]]}})",
                  "x"),
      Error);
  CHECK_THROWS_AS(ParsePuzzle(R"({"kind":"SUDOKU","width":1,"height":1})", "x"),
                  Error);
}

TEST_CASE("verifiers: completion reward") {
  auto p = Pattern2x2();
  const BoardGrid& gold = *p.gold;
  CHECK(CompletionReward(p, gold, gold) == 1.0);
  // gold differs from the blank initial board at the two '#' cells
  CHECK(CompletionReward(p, gold, G({"..", ".."})) ==
        doctest::Approx(1.0 / 27.0).epsilon(1e-12));
  CHECK(CompletionReward(p, gold, G({"#.", ".."})) ==
        doctest::Approx(std::pow(4.0 / 6.0, 3)));
  CHECK(CompletionReward(p, gold, G({"#."})) == 0.0);
  CHECK(CompletionReward(p, gold, G({"##", "##"})) ==
        doctest::Approx(std::pow(4.0 / 6.0, 3)));
}

TEST_CASE("verifiers: format truth table") {
  for (const auto& f : oracle::FormatTruthTable()) {
    std::string r = oracle::BuildFormatResponse(f);
    CAPTURE(r);
    CHECK(FormatReward(r) == f.expected);
  }
  CHECK(FormatReward("<reasoning>r</reasoning><answer>a</answer>") == 1.0);
  CHECK(FormatReward("") == 0.0);
}

TEST_CASE("verifiers: answer parsing") {
  auto g = ParseAnswerGrid("<answer>\n```\n# .\n. #\n```\n</answer>");
  REQUIRE(g.has_value());
  CHECK(g->rows == std::vector<std::string>{"#.", ".#"});
  CHECK_FALSE(ParseAnswerGrid("<answer>#.").has_value());
  CHECK_FALSE(ParseAnswerGrid("nothing").has_value());
}

TEST_CASE("verifiers: base reward") {
  auto p = Pattern2x2();
  auto full = BaseReward(p, *p.gold,
                         "<reasoning>think</reasoning><answer>\n#.\n.#\n</answer>");
  CHECK(full.exact == 1.0);
  CHECK(full.completion == 1.0);
  CHECK(full.total == doctest::Approx(2.1));
  auto empty = BaseReward(p, *p.gold, "");
  CHECK(empty.total == 0.0);
  auto no_reasoning = BaseReward(p, *p.gold, "<answer>\n#.\n.#\n</answer>");
  CHECK(no_reasoning.exact == 1.0);
  CHECK(no_reasoning.format < 1.0);
  CHECK(no_reasoning.total == doctest::Approx(2.0 + 0.1 * no_reasoning.format));
  auto junk = BaseReward(p, *p.gold, "<reasoning>r</reasoning><answer>zz</answer>");
  CHECK(junk.exact == 0.0);
  CHECK(junk.completion == 0.0);
  CHECK(junk.format == 1.0);
}

TEST_CASE("verifiers: shipped fixtures are uniquely solvable") {
  auto puzzles = Fixtures();
  std::map<PuzzleKind, int> per_kind;
  for (const auto& p : puzzles) {
    CAPTURE(p.id);
    REQUIRE(p.gold.has_value());
    CHECK(Verify(p, *p.gold).ok);
    CHECK(oracle::CountSolutions(p) == 1);
    ++per_kind[p.kind];
  }
  CHECK(per_kind.size() == 4);
  for (auto [k, n] : per_kind) CHECK(n >= 3);
}

TEST_CASE("verifiers: completion is monotone in matched cells") {
  for (const auto& p : Fixtures()) {
    const BoardGrid& gold = *p.gold;
    BoardGrid cand = gold;
    double prev = CompletionReward(p, gold, cand);
    CHECK(prev == 1.0);
    const std::string alphabet = Alphabet(p);
    for (int r = 0; r < p.height; ++r) {
      for (int c = 0; c < p.width; ++c) {
        char other = alphabet[0] == gold.at(r, c) ? alphabet[1] : alphabet[0];
        cand.rows[r][c] = other;
        double now = CompletionReward(p, gold, cand);
        CHECK(now < prev);
        prev = now;
      }
    }
  }
}
