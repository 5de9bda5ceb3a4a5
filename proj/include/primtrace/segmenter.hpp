#ifndef PRIMTRACE_SEGMENTER_HPP
#define PRIMTRACE_SEGMENTER_HPP

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace primtrace {

// Offsets are byte offsets into the segmented text. One "character" of the
// token estimate is one byte.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t est_tokens = 0;
  std::optional<std::size_t> final_tokens;

  bool operator==(const Span&) const = default;
};

struct SegmenterConfig {
  std::size_t min_tokens = 80;
  std::size_t max_tokens = 250;
  std::size_t tail_merge_tokens = 40;
  // ECMAScript, matched case-insensitively at the start of a line (after
  // optional indentation or markdown emphasis).
  std::vector<std::string> marker_patterns;

  static SegmenterConfig Defaults();
  // Throws Error(kParameter) unless 0 < tail <= min < max.
  void validate() const;
};

std::vector<std::string> DefaultMarkerPatterns();

// Final per-span token count; the default mirrors the character estimate.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

class CharEstimateCounter : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
};

std::size_t EstimateTokens(std::string_view text);

struct ReasoningBlock {
  std::string_view text;
  std::size_t offset = 0;
};

// Content of the first closed <reasoning>...</reasoning> pair, or the whole
// response when there is none.
ReasoningBlock ExtractReasoningBlock(std::string_view response);

class Segmenter {
 public:
  explicit Segmenter(SegmenterConfig cfg = SegmenterConfig::Defaults());

  // Spans exactly cover `block`; empty block gives no spans.
  std::vector<Span> segment(std::string_view block,
                            const TokenCounter* counter = nullptr) const;

  // Fragment starts produced by paragraph and marker splitting (always
  // includes 0 for a non-empty block).
  std::vector<std::size_t> fragment_starts(std::string_view block) const;

  // Positions just after sentence-ending punctuation plus whitespace,
  // restricted to (begin, end).
  static std::vector<std::size_t> sentence_boundaries(std::string_view text,
                                                      std::size_t begin,
                                                      std::size_t end);

  // True when a discourse marker opens the line starting at `pos`.
  bool marker_at(std::string_view text, std::size_t pos) const;

  const SegmenterConfig& config() const { return cfg_; }

 private:
  SegmenterConfig cfg_;
  std::vector<std::regex> markers_;
};

std::vector<Span> Segment(std::string_view block, const SegmenterConfig& cfg);

}  // namespace primtrace

#endif  // PRIMTRACE_SEGMENTER_HPP
