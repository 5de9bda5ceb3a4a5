#include "primtrace/segmenter.hpp"

#include <algorithm>

#include "primtrace/error.hpp"

namespace primtrace {

namespace {

constexpr std::string_view kOpenTag = "<reasoning>";
constexpr std::string_view kCloseTag = "</reasoning>";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Apostrophe, ASCII or U+2019.
constexpr const char* kApos = "(?:'|\xE2\x80\x99)";

}  // namespace

std::vector<std::string> DefaultMarkerPatterns() {
  const std::string apos = kApos;
  return {
      // numbered steps
      R"((?:case|step|option)\s+\d+\b)",
      // sequential connectives
      R"((?:first|second|then)\b)",
      // hypothetical openers
      "(?:suppose|assume|let" + apos + "s)\\b",
      // verification openers
      R"((?:check|verify|confirm)\b)",
      // self-correction
      R"((?:wait|actually|hmm+)\b)",
      // redirection
      R"((?:instead|alternatively|going\s+back)\b)",
      // conclusion
      R"((?:therefore|hence|thus)\b)",
      // failure
      "(?:contradiction|this\\s+doesn" + apos + "t\\s+work)\\b",
  };
}

SegmenterConfig SegmenterConfig::Defaults() {
  SegmenterConfig cfg;
  cfg.marker_patterns = DefaultMarkerPatterns();
  return cfg;
}

void SegmenterConfig::validate() const {
  if (!(tail_merge_tokens > 0 && tail_merge_tokens <= min_tokens &&
        min_tokens < max_tokens)) {
    Fail(ErrorCode::kParameter,
         "segmenter thresholds must satisfy 0 < tail_merge <= min < max "
         "(got tail=" +
             std::to_string(tail_merge_tokens) +
             ", min=" + std::to_string(min_tokens) +
             ", max=" + std::to_string(max_tokens) + ")");
  }
}

std::size_t EstimateTokens(std::string_view text) { return text.size() / 4; }

std::size_t CharEstimateCounter::count(std::string_view text) const {
  return EstimateTokens(text);
}

ReasoningBlock ExtractReasoningBlock(std::string_view response) {
  std::size_t open = response.find(kOpenTag);
  if (open != std::string_view::npos) {
    std::size_t body = open + kOpenTag.size();
    std::size_t close = response.find(kCloseTag, body);
    if (close != std::string_view::npos) {
      return {response.substr(body, close - body), body};
    }
  }
  return {response, 0};
}

Segmenter::Segmenter(SegmenterConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  markers_.reserve(cfg_.marker_patterns.size());
  for (const auto& p : cfg_.marker_patterns) {
    try {
      markers_.emplace_back(p, std::regex::ECMAScript | std::regex::icase |
                                   std::regex::optimize);
    } catch (const std::regex_error& e) {
      Fail(ErrorCode::kParameter,
           "invalid marker pattern '" + p + "': " + e.what());
    }
  }
}

bool Segmenter::marker_at(std::string_view text, std::size_t pos) const {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                               text[pos] == '*' || text[pos] == '#' ||
                               text[pos] == '>')) {
    ++pos;
  }
  if (pos >= text.size()) return false;
  const char* first = text.data() + pos;
  const char* last = text.data() + text.size();
  for (const auto& re : markers_) {
    if (std::regex_search(first, last, re,
                          std::regex_constants::match_continuous)) {
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> Segmenter::fragment_starts(
    std::string_view block) const {
  std::vector<std::size_t> starts;
  if (block.empty()) return starts;

  // Paragraph starts: just past a blank-line run.
  std::vector<std::size_t> paragraphs{0};
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (block[i] != '\n') continue;
    std::size_t j = i + 1;
    while (j < block.size() &&
           (block[j] == ' ' || block[j] == '\t' || block[j] == '\r')) {
      ++j;
    }
    if (j >= block.size() || block[j] != '\n') continue;
    while (j < block.size() && IsSpace(block[j])) ++j;
    if (j < block.size()) paragraphs.push_back(j);
    i = j - 1;
  }
  paragraphs.push_back(block.size());

  for (std::size_t p = 0; p + 1 < paragraphs.size(); ++p) {
    std::size_t begin = paragraphs[p];
    std::size_t end = paragraphs[p + 1];
    starts.push_back(begin);
    for (std::size_t i = begin; i < end; ++i) {
      if (block[i] != '\n' || i + 1 >= end) continue;
      if (marker_at(block.substr(0, end), i + 1)) starts.push_back(i + 1);
    }
  }
  return starts;
}

std::vector<std::size_t> Segmenter::sentence_boundaries(std::string_view text,
                                                        std::size_t begin,
                                                        std::size_t end) {
  std::vector<std::size_t> out;
  for (std::size_t i = begin; i + 1 < end; ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && IsSpace(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < end && IsSpace(text[j])) ++j;
      if (j < end) out.push_back(j);
      i = j - 1;
    }
  }
  return out;
}

namespace {

class SpanBuilder {
 public:
  SpanBuilder(std::string_view text, const SegmenterConfig& cfg)
      : text_(text), cfg_(cfg) {}

  void fragment(std::size_t a, std::size_t b) {
    if (est(a, b) <= cfg_.max_tokens) {
      piece(a, b, false);
      return;
    }
    // Long fragment: pack sentences greedily into pieces of at most max.
    std::vector<std::size_t> bounds{a};
    for (std::size_t cut : atom_cuts(a, b)) bounds.push_back(cut);
    bounds.push_back(b);
    std::size_t cur = a;
    for (std::size_t i = 1; i + 1 < bounds.size(); ++i) {
      if (cur < bounds[i] && est(cur, bounds[i + 1]) > cfg_.max_tokens) {
        piece(cur, bounds[i], false);
        cur = bounds[i];
      }
    }
    piece(cur, b, false);
  }

  std::vector<Span> finish(const std::vector<std::size_t>& all_cuts) {
    if (buffered()) close_tail(all_cuts);
    return std::move(spans_);
  }

 private:
  std::size_t est(std::size_t a, std::size_t b) const { return (b - a) / 4; }
  bool buffered() const { return buf_start_ < buf_end_; }

  std::vector<std::size_t> atom_cuts(std::size_t a, std::size_t b) const {
    return Segmenter::sentence_boundaries(text_, a, b);
  }

  void emit(std::size_t a, std::size_t b) {
    spans_.push_back(Span{a, b, est(a, b), std::nullopt});
    last_oversized_ = false;
    buf_start_ = buf_end_ = b;
  }

  void piece(std::size_t a, std::size_t b, bool atomic) {
    if (!buffered()) {
      buf_start_ = a;
      buf_end_ = b;
      if (est(a, b) >= cfg_.min_tokens) emit(a, b);
      if (est(a, b) > cfg_.max_tokens) last_oversized_ = true;
      return;
    }
    if (est(buf_start_, b) <= cfg_.max_tokens) {
      buf_end_ = b;
      if (est(buf_start_, b) >= cfg_.min_tokens) emit(buf_start_, b);
      return;
    }
    std::vector<std::size_t> cuts = atomic ? std::vector<std::size_t>{}
                                           : atom_cuts(a, b);
    if (cuts.empty()) {
      // A boundary-free stretch cannot be shared; it absorbs the buffer.
      emit(buf_start_, b);
      last_oversized_ = est(a, b) > cfg_.max_tokens;
      return;
    }
    std::size_t cur = a;
    for (std::size_t cut : cuts) {
      piece(cur, cut, true);
      cur = cut;
    }
    piece(cur, b, true);
  }

  void close_tail(const std::vector<std::size_t>& all_cuts) {
    std::size_t bs = buf_start_, be = buf_end_;
    if (spans_.empty()) {
      emit(bs, be);
      return;
    }
    Span& last = spans_.back();
    auto merge = [&] {
      last.end = be;
      last.est_tokens = est(last.start, be);
    };
    if (est(bs, be) < cfg_.tail_merge_tokens ||
        est(last.start, be) <= cfg_.max_tokens) {
      merge();
      return;
    }
    // Rebalance the last span and the tail at the latest cut that leaves
    // both halves inside [min, max].
    for (auto it = all_cuts.rbegin(); it != all_cuts.rend(); ++it) {
      std::size_t cut = *it;
      if (cut <= last.start || cut >= be) continue;
      std::size_t head = est(last.start, cut), tail = est(cut, be);
      if (head >= cfg_.min_tokens && head <= cfg_.max_tokens &&
          tail >= cfg_.min_tokens && tail <= cfg_.max_tokens) {
        last.end = cut;
        last.est_tokens = head;
        emit(cut, be);
        return;
      }
    }
    // An over-long sentence span is already outside the bounds.
    if (last_oversized_ ||
        est(last.start, be) <= cfg_.max_tokens + cfg_.tail_merge_tokens) {
      merge();
      return;
    }
    emit(bs, be);
  }

  std::string_view text_;
  const SegmenterConfig& cfg_;
  std::vector<Span> spans_;
  std::size_t buf_start_ = 0;
  std::size_t buf_end_ = 0;
  bool last_oversized_ = false;
};

}  // namespace

std::vector<Span> Segmenter::segment(std::string_view block,
                                     const TokenCounter* counter) const {
  if (block.empty()) return {};
  std::vector<std::size_t> starts = fragment_starts(block);
  std::vector<std::size_t> all_cuts = starts;
  SpanBuilder builder(block, cfg_);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    std::size_t a = starts[i];
    std::size_t b = i + 1 < starts.size() ? starts[i + 1] : block.size();
    auto inner = sentence_boundaries(block, a, b);
    all_cuts.insert(all_cuts.end(), inner.begin(), inner.end());
    builder.fragment(a, b);
  }
  std::sort(all_cuts.begin(), all_cuts.end());
  all_cuts.erase(std::unique(all_cuts.begin(), all_cuts.end()),
                 all_cuts.end());
  std::vector<Span> spans = builder.finish(all_cuts);
  if (counter != nullptr) {
    for (auto& s : spans) {
      s.final_tokens = counter->count(block.substr(s.start, s.end - s.start));
    }
  }
  return spans;
}

std::vector<Span> Segment(std::string_view block, const SegmenterConfig& cfg) {
  return Segmenter(cfg).segment(block);
}

}  // namespace primtrace
