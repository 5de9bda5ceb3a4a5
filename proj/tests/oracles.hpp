// Independent reference implementations and generators shared by the unit
// and acceptance suites. Deliberately naive.
#ifndef PRIMTRACE_TESTS_ORACLES_HPP
#define PRIMTRACE_TESTS_ORACLES_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "primtrace/metrics.hpp"
#include "primtrace/motifs.hpp"
#include "primtrace/primitives.hpp"
#include "primtrace/segmenter.hpp"
#include "primtrace/verifiers.hpp"

namespace oracle {

using primtrace::Primitive;

inline std::vector<Primitive> RandomLabels(std::mt19937_64& rng,
                                           std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> lab(0, 8);
  std::vector<Primitive> out(len(rng));
  for (auto& p : out) p = static_cast<Primitive>(lab(rng));
  return out;
}

// Every window of the raw labels that avoids OTHER, counted one by one.
inline std::map<primtrace::Motif, std::size_t> OverlappingKgrams(
    const std::vector<Primitive>& labels, int k) {
  std::map<primtrace::Motif, std::size_t> out;
  const std::size_t uk = static_cast<std::size_t>(k);
  for (std::size_t i = 0; i + uk <= labels.size(); ++i) {
    primtrace::Motif w(labels.begin() + i, labels.begin() + i + uk);
    if (std::find(w.begin(), w.end(), Primitive::kOther) != w.end()) continue;
    ++out[w];
  }
  return out;
}

// Left-to-right scan that jumps past each accepted match.
inline std::size_t NonOverlappingCount(const std::vector<Primitive>& labels,
                                       const primtrace::Motif& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + m.size() <= labels.size();) {
    if (std::equal(m.begin(), m.end(), labels.begin() + i)) {
      ++n;
      i += m.size();
    } else {
      ++i;
    }
  }
  return n;
}

// pass@k by enumerating every k-subset of n rollouts, the first c correct.
inline primtrace::Rational PassAtKBySubsets(int n, int c, int k) {
  std::uint64_t hit = 0, total = 0;
  const std::uint32_t correct_mask = (1u << c) - 1u;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    if (__builtin_popcount(s) != k) continue;
    ++total;
    if (s & correct_mask) ++hit;
  }
  return primtrace::Rational(hit) / primtrace::Rational(total);
}

// Boundaries after [.!?] followed by whitespace, restricted to [0, n].
inline std::vector<std::size_t> SentenceCuts(const std::string& text) {
  std::vector<std::size_t> cuts{0};
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t j = i + 1;
      while (j < text.size() &&
             std::isspace(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
      if (cuts.back() != j) cuts.push_back(j);
    }
  }
  if (cuts.back() != text.size()) cuts.push_back(text.size());
  return cuts;
}

// Human-readable violations of coverage and the size law; empty when clean.
inline std::vector<std::string> SegmentLawViolations(
    const std::string& block, const std::vector<primtrace::Span>& spans,
    const primtrace::SegmenterConfig& cfg) {
  std::vector<std::string> bad;
  if (block.empty()) {
    if (!spans.empty()) bad.push_back("spans for an empty block");
    return bad;
  }
  if (spans.empty()) {
    bad.push_back("no spans for a non-empty block");
    return bad;
  }
  std::string joined;
  std::size_t pos = 0;
  for (const auto& s : spans) {
    if (s.start != pos) bad.push_back("gap or overlap at " + std::to_string(pos));
    if (s.start >= s.end) bad.push_back("empty span at " + std::to_string(s.start));
    if (s.end > block.size()) {
      bad.push_back("span past end");
      return bad;
    }
    if (s.est_tokens != (s.end - s.start) / 4) bad.push_back("bad est_tokens");
    joined += block.substr(s.start, s.end - s.start);
    pos = s.end;
  }
  if (joined != block) bad.push_back("concatenation differs from block");

  auto cuts = SentenceCuts(block);
  auto long_sentence_inside = [&](const primtrace::Span& s) {
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      std::size_t a = std::max(cuts[i], s.start), b = std::min(cuts[i + 1], s.end);
      if (a < b && (b - a) / 4 > cfg.max_tokens) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    const bool last = i + 1 == spans.size();
    if (s.est_tokens < cfg.min_tokens) {
      bool whole_short = spans.size() == 1 && block.size() / 4 < cfg.min_tokens;
      if (!whole_short) {
        bad.push_back("span " + std::to_string(i) + " has " +
                      std::to_string(s.est_tokens) + " < min");
      }
    } else if (s.est_tokens > cfg.max_tokens) {
      bool ok = long_sentence_inside(s) ||
                (last && s.est_tokens <= cfg.max_tokens + cfg.tail_merge_tokens);
      if (!ok) {
        bad.push_back("span " + std::to_string(i) + " has " +
                      std::to_string(s.est_tokens) + " > max");
      }
    }
  }
  return bad;
}

// Trace-like text: paragraphs of short sentences, marker openers at line
// starts, single newlines, and the occasional run-on sentence.
class TraceTextGenerator {
 public:
  explicit TraceTextGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string sentence(std::size_t min_words, std::size_t max_words) {
    static const char* kWords[] = {
        "the", "grid", "row", "column", "cell", "must", "be", "filled",
        "so", "we", "get", "value", "island", "bridge", "count", "equals",
        "x", "3", "12", "+", "=", "clue", "mirror", "ghost", "zombie",
        "region", "and", "not", "which", "leaves", "only", "one", "option"};
    static const char* kOpeners[] = {
        "Wait, ", "Case 2: ", "Step 3: ", "Let me check ", "Let's try ",
        "Suppose ", "Therefore ", "Hence ", "Actually ", "Alternatively, ",
        "First, ", "Then ", "Verify ", "Hmm, ", "Thus "};
    static const char* kEnds[] = {". ", "! ", "? ", ".\n", ". "};
    std::uniform_int_distribution<std::size_t> nw(min_words, max_words);
    std::uniform_int_distribution<std::size_t> wi(0, std::size(kWords) - 1);
    std::string s;
    if (coin(0.25)) {
      std::uniform_int_distribution<std::size_t> oi(0, std::size(kOpeners) - 1);
      s += kOpeners[oi(rng_)];
    }
    std::size_t n = nw(rng_);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += coin(0.03) ? "\t" : " ";
      s += kWords[wi(rng_)];
    }
    std::uniform_int_distribution<std::size_t> ei(0, std::size(kEnds) - 1);
    return s + kEnds[ei(rng_)];
  }

  // Run-on sentence of roughly `tokens` estimated tokens, no terminator
  // inside.
  std::string run_on(std::size_t tokens) {
    std::string s;
    while (s.size() < tokens * 4) s += "and the value keeps going ";
    s.back() = '.';
    return s + " ";
  }

  std::string block(std::size_t max_words = 40) {
    std::uniform_int_distribution<int> paragraphs(0, 9);
    std::string out;
    int np = paragraphs(rng_);
    for (int p = 0; p < np; ++p) {
      std::uniform_int_distribution<int> ns(1, 14);
      int n = ns(rng_);
      for (int i = 0; i < n; ++i) {
        if (coin(0.01)) {
          std::uniform_int_distribution<std::size_t> rt(260, 400);
          out += run_on(rt(rng_));
        } else {
          out += sentence(2, max_words);
        }
        if (coin(0.1)) out += "\n";
      }
      out += coin(0.5) ? "\n\n" : "\n\n\n";
    }
    if (coin(0.3) && !out.empty()) out.resize(out.size() - 1);
    return out;
  }

 private:
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64 rng_;
};

// ------------------------------------------------------ puzzle solutions

inline std::size_t CountUndeadSolutions(const primtrace::PuzzleInstance& p,
                                        std::size_t limit) {
  std::vector<std::pair<int, int>> free;
  for (int r = 0; r < p.height; ++r)
    for (int c = 0; c < p.width; ++c)
      if (p.initial.at(r, c) == '.') free.push_back({r, c});
  std::size_t found = 0, combos = 1;
  for (std::size_t i = 0; i < free.size(); ++i) combos *= 3;
  primtrace::BoardGrid g = p.initial;
  for (std::size_t code = 0; code < combos && found < limit; ++code) {
    std::size_t x = code;
    for (auto [r, c] : free) {
      g.rows[r][c] = "GVZ"[x % 3];
      x /= 3;
    }
    if (primtrace::Verify(p, g).ok) ++found;
  }
  return found;
}

inline std::size_t CountPatternSolutions(const primtrace::PuzzleInstance& p,
                                         std::size_t limit) {
  const auto& cl = std::get<primtrace::PatternClues>(p.clues);
  auto runs = [](const std::string& s) {
    std::vector<int> r;
    int cur = 0;
    for (char ch : s) {
      if (ch == '#') {
        ++cur;
      } else if (cur) {
        r.push_back(cur);
        cur = 0;
      }
    }
    if (cur) r.push_back(cur);
    return r;
  };
  auto norm = [](std::vector<int> v) {
    v.erase(std::remove(v.begin(), v.end(), 0), v.end());
    return v;
  };
  std::vector<std::vector<std::string>> options(p.height);
  for (int r = 0; r < p.height; ++r) {
    for (std::uint32_t m = 0; m < (1u << p.width); ++m) {
      std::string row(p.width, '.');
      for (int c = 0; c < p.width; ++c)
        if (m >> c & 1u) row[c] = '#';
      if (runs(row) == norm(cl.rows[r])) options[r].push_back(row);
    }
  }
  std::size_t found = 0;
  primtrace::BoardGrid g = p.initial;
  std::vector<std::size_t> idx(p.height, 0);
  for (auto& o : options)
    if (o.empty()) return 0;
  while (found < limit) {
    for (int r = 0; r < p.height; ++r) g.rows[r] = options[r][idx[r]];
    if (primtrace::Verify(p, g).ok) ++found;
    int r = 0;
    while (r < p.height && ++idx[r] == options[r].size()) idx[r++] = 0;
    if (r == p.height) break;
  }
  return found;
}

inline std::size_t CountGalaxiesSolutions(const primtrace::PuzzleInstance& p,
                                          std::size_t limit) {
  const auto& cl = std::get<primtrace::GalaxiesClues>(p.clues);
  const std::size_t n = cl.dots.size();
  const std::size_t cells = static_cast<std::size_t>(p.width * p.height);
  std::size_t found = 0;
  primtrace::BoardGrid g = p.initial;
  std::vector<std::size_t> lab(cells, 0);
  while (found < limit) {
    for (std::size_t i = 0; i < cells; ++i)
      g.rows[i / p.width][i % p.width] = primtrace::GalaxyChar(lab[i]);
    if (primtrace::Verify(p, g).ok) ++found;
    std::size_t i = 0;
    while (i < cells && ++lab[i] == n) lab[i++] = 0;
    if (i == cells) break;
  }
  return found;
}

inline std::size_t CountBridgesSolutions(const primtrace::PuzzleInstance& p,
                                         std::size_t limit) {
  const auto& cl = std::get<primtrace::BridgesClues>(p.clues);
  auto is_island = [&](int r, int c) {
    for (const auto& is : cl.islands)
      if (is.row == r && is.col == c) return true;
    return false;
  };
  struct Slot {
    std::vector<std::pair<int, int>> path;
    bool horizontal;
  };
  std::vector<Slot> slots;
  for (const auto& is : cl.islands) {
    for (int d = 0; d < 2; ++d) {
      int dr = d == 0 ? 0 : 1, dc = d == 0 ? 1 : 0;
      Slot s{{}, d == 0};
      int r = is.row + dr, c = is.col + dc;
      while (r < p.height && c < p.width && !is_island(r, c)) {
        s.path.push_back({r, c});
        r += dr;
        c += dc;
      }
      if (r < p.height && c < p.width && !s.path.empty()) slots.push_back(s);
    }
  }
  std::size_t combos = 1;
  for (std::size_t i = 0; i < slots.size(); ++i) combos *= 3;
  std::size_t found = 0;
  for (std::size_t code = 0; code < combos && found < limit; ++code) {
    primtrace::BoardGrid g = p.initial;
    bool clash = false;
    std::size_t x = code;
    for (const auto& s : slots) {
      int m = static_cast<int>(x % 3);
      x /= 3;
      if (!m) continue;
      char ch = s.horizontal ? (m == 1 ? '-' : '=') : (m == 1 ? '|' : 'H');
      for (auto [r, c] : s.path) {
        if (g.rows[r][c] != '.') clash = true;
        g.rows[r][c] = ch;
      }
    }
    if (!clash && primtrace::Verify(p, g).ok) ++found;
  }
  return found;
}

inline std::size_t CountSolutions(const primtrace::PuzzleInstance& p,
                                  std::size_t limit = 2) {
  switch (p.kind) {
    case primtrace::PuzzleKind::kBridges:
      return CountBridgesSolutions(p, limit);
    case primtrace::PuzzleKind::kPattern:
      return CountPatternSolutions(p, limit);
    case primtrace::PuzzleKind::kUndead:
      return CountUndeadSolutions(p, limit);
    case primtrace::PuzzleKind::kGalaxies:
      return CountGalaxiesSolutions(p, limit);
  }
  return 0;
}

// Format truth table: which tag pairs are present, whether <reasoning>
// comes first, and whether a stray "<reasoning>" is prepended.
struct FormatCase {
  bool reasoning, answer, reasoning_first, dup;
  double expected;
};

inline std::string BuildFormatResponse(const FormatCase& f) {
  std::string r = f.reasoning ? "<reasoning>think</reasoning>" : "";
  std::string a = f.answer ? "<answer>x</answer>" : "";
  std::string body = f.reasoning_first ? r + a : a + r;
  return (f.dup ? "<reasoning>" : "") + body;
}

inline std::vector<FormatCase> FormatTruthTable() {
  return {
      {true, true, true, false, 1.0},    {true, true, true, true, 0.5},
      {true, true, false, false, 0.75},  {true, true, false, true, 0.5},
      {true, false, true, false, 0.5},   {true, false, true, true, 0.0},
      {true, false, false, false, 0.5},  {true, false, false, true, 0.0},
      {false, true, true, false, 0.5},   {false, true, true, true, 0.75},
      {false, true, false, false, 0.5},  {false, true, false, true, 0.75},
      {false, false, true, false, 0.0},  {false, false, true, true, 0.25},
      {false, false, false, false, 0.0}, {false, false, false, true, 0.25},
  };
}

}  // namespace oracle

#endif  // PRIMTRACE_TESTS_ORACLES_HPP
