#include "doctest.h"
#include "oracles.hpp"
#include "primtrace/error.hpp"
#include "primtrace/segmenter.hpp"

using namespace primtrace;

namespace {

std::string Filler(std::size_t chars) {
  std::string s;
  while (s.size() < chars) s += "lorem ipsum ";
  s.resize(chars);
  return s;
}

}  // namespace

TEST_CASE("segmenter: token estimate is floor(len/4)") {
  CHECK(EstimateTokens("") == 0);
  CHECK(EstimateTokens(std::string(400, 'a')) == 100);
  CHECK(EstimateTokens("abcdefg") == 1);
}

TEST_CASE("segmenter: reasoning block extraction") {
  auto b = ExtractReasoningBlock("<reasoning>abc</reasoning><answer>x</answer>");
  CHECK(b.text == "abc");
  CHECK(b.offset == 11);
  auto none = ExtractReasoningBlock("no tags here");
  CHECK(none.text == "no tags here");
  CHECK(none.offset == 0);
  auto open = ExtractReasoningBlock("<reasoning>abc");
  CHECK(open.text == "<reasoning>abc");
  CHECK(open.offset == 0);
}

TEST_CASE("segmenter: short block is one span") {
  std::string block = Filler(100);
  auto spans = Segment(block, SegmenterConfig::Defaults());
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].start == 0);
  CHECK(spans[0].end == 100);
  CHECK(spans[0].est_tokens == 25);
}

TEST_CASE("segmenter: empty block gives no spans") {
  CHECK(Segment("", SegmenterConfig::Defaults()).empty());
}

TEST_CASE("segmenter: two paragraphs split at the blank line") {
  std::string p = Filler(399) + ".";
  std::string block = p + "\n\n" + p;
  auto spans = Segment(block, SegmenterConfig::Defaults());
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].end == 402);
  CHECK(block.substr(spans[1].start, 3) == "lor");
  CHECK(oracle::SegmentLawViolations(block, spans, SegmenterConfig::Defaults())
            .empty());
}

TEST_CASE("segmenter: long fragment re-split at sentence boundaries") {
  std::string block;
  for (int i = 0; i < 7; ++i) block += Filler(298) + ". ";
  block.resize(2000);
  auto spans = Segment(block, SegmenterConfig::Defaults());
  CHECK(spans.size() >= 2);
  for (const auto& s : spans) CHECK(s.est_tokens <= 250);
  CHECK(oracle::SegmentLawViolations(block, spans, SegmenterConfig::Defaults())
            .empty());
}

TEST_CASE("segmenter: boundary-free sentence stays whole") {
  std::string block = Filler(1600);
  auto spans = Segment(block, SegmenterConfig::Defaults());
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].est_tokens == 400);
}

TEST_CASE("segmenter: markers start fragments at line starts") {
  Segmenter seg;
  std::string block = "some text here.\nWait, that is wrong.\nCase 2: next.\n"
                      "  - Therefore done. wait mid-line is ignored";
  auto starts = seg.fragment_starts(block);
  CHECK(starts.front() == 0);
  auto has = [&](std::size_t p) {
    return std::find(starts.begin(), starts.end(), p) != starts.end();
  };
  CHECK(has(block.find("Wait")));
  CHECK(has(block.find("Case 2")));
  CHECK_FALSE(has(block.find("wait mid")));
  CHECK(seg.marker_at(block, block.find("Wait")));
}

TEST_CASE("segmenter: markers are case-insensitive") {
  Segmenter seg;
  CHECK(seg.marker_at("ALTERNATIVELY yes", 0));
  CHECK(seg.marker_at("> HMMM ok", 0));
  CHECK(seg.marker_at("step 4 is", 0));
  CHECK_FALSE(seg.marker_at("stepping", 0));
}

TEST_CASE("segmenter: small fragments accumulate and the tail merges") {
  std::string block;
  for (int i = 0; i < 30; ++i) block += "Then we add 1 and 2 and get 3 again.\n\n";
  auto cfg = SegmenterConfig::Defaults();
  auto spans = Segment(block, cfg);
  CHECK(spans.size() >= 2);
  CHECK(oracle::SegmentLawViolations(block, spans, cfg).empty());
}

TEST_CASE("segmenter: config validation") {
  SegmenterConfig cfg = SegmenterConfig::Defaults();
  cfg.tail_merge_tokens = 0;
  CHECK_THROWS_AS(Segmenter{cfg}, Error);
  cfg = SegmenterConfig::Defaults();
  cfg.min_tokens = 300;
  CHECK_THROWS_AS(Segmenter{cfg}, Error);
  cfg = SegmenterConfig::Defaults();
  cfg.marker_patterns = {"(unclosed"};
  CHECK_THROWS_AS(Segmenter{cfg}, Error);
}

TEST_CASE("segmenter: deterministic and law-abiding on random blocks") {
  oracle::TraceTextGenerator gen(11);
  auto cfg = SegmenterConfig::Defaults();
  Segmenter seg(cfg);
  for (int i = 0; i < 300; ++i) {
    std::string block = gen.block();
    auto a = seg.segment(block);
    CHECK(a == seg.segment(block));
    auto bad = oracle::SegmentLawViolations(block, a, cfg);
    if (!bad.empty()) {
      MESSAGE("block " << i << ": " << bad.front());
      CHECK(bad.empty());
      break;
    }
  }
}

TEST_CASE("segmenter: tighter thresholds also hold the law") {
  oracle::TraceTextGenerator gen(5);
  SegmenterConfig cfg = SegmenterConfig::Defaults();
  cfg.min_tokens = 20;
  cfg.max_tokens = 60;
  cfg.tail_merge_tokens = 10;
  Segmenter seg(cfg);
  std::size_t violations = 0;
  for (int i = 0; i < 200; ++i) {
    // sentences stay well under max - min so every block has a legal split
    std::string block = gen.block(12);
    violations += oracle::SegmentLawViolations(block, seg.segment(block), cfg).size();
  }
  CHECK(violations == 0);
}
