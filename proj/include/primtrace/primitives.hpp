#ifndef PRIMTRACE_PRIMITIVES_HPP
#define PRIMTRACE_PRIMITIVES_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "primtrace/corpus.hpp"
#include "primtrace/segmenter.hpp"

namespace primtrace {

enum class Primitive : std::uint8_t {
  kPlan,
  kSetup,
  kEnumerate,
  kHypothesize,
  kCompute,
  kCheck,
  kBacktrack,
  kSummarize,
  kOther,
};

inline constexpr std::size_t kNumPrimitives = 9;
inline constexpr std::array<Primitive, kNumPrimitives> kAllPrimitives = {
    Primitive::kPlan,        Primitive::kSetup,   Primitive::kEnumerate,
    Primitive::kHypothesize, Primitive::kCompute, Primitive::kCheck,
    Primitive::kBacktrack,   Primitive::kSummarize, Primitive::kOther,
};

// Uppercase serialization name, e.g. "CHECK".
std::string_view Name(Primitive p);
std::optional<Primitive> ParsePrimitive(std::string_view name);

struct PrimitiveSequence {
  TraceKey key;
  std::vector<Primitive> labels;
};

enum class LabelSource { kHeuristic, kImported };
std::string_view Name(LabelSource s);

using LabelMap = std::map<TraceKey, PrimitiveSequence>;

// Rule-table baseline. Not a substitute for a trained span classifier.
class HeuristicClassifier {
 public:
  struct Options {
    // Operator/digit characters per 100 characters at or above which an
    // unmarked span counts as COMPUTE.
    double compute_density = 8.0;
  };

  HeuristicClassifier();
  explicit HeuristicClassifier(Options opts);

  Primitive classify(std::string_view span_text,
                     std::string_view preceding_text) const;

  static double SymbolDensity(std::string_view text);

 private:
  struct Rule {
    std::regex pattern;
    Primitive label;
  };
  Options opts_;
  std::vector<Rule> rules_;
  std::regex connective_;
  std::regex strategy_;
};

Primitive ClassifyHeuristic(std::string_view span_text,
                            std::string_view preceding_text);

// Segments and labels every record of the corpus.
LabelMap ClassifyCorpus(const Corpus& corpus, const Segmenter& segmenter,
                        const HeuristicClassifier& classifier);

// Reads labels.jsonl and checks each trace's label count against its span
// count under `segmenter`. Throws Error(kAlignment) on mismatch.
LabelMap ImportLabels(const std::string& path, const Corpus& corpus,
                      const Segmenter& segmenter);
LabelMap ParseLabels(std::string_view text, const Corpus& corpus,
                     const Segmenter& segmenter);

std::string SerializeLabels(const PrimitiveSequence& seq, LabelSource source);

}  // namespace primtrace

#endif  // PRIMTRACE_PRIMITIVES_HPP
