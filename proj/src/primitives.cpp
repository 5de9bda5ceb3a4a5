#include "primtrace/primitives.hpp"

#include "json.hpp"
#include "primtrace/error.hpp"

namespace primtrace {

namespace {

constexpr std::array<std::string_view, kNumPrimitives> kNames = {
    "PLAN",    "SETUP", "ENUMERATE", "HYPOTHESIZE", "COMPUTE",
    "CHECK", "BACKTRACK", "SUMMARIZE", "OTHER",
};

const std::string kApos = "(?:'|\xE2\x80\x99)";

std::regex Compile(const std::string& pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase |
                                 std::regex::optimize);
}

bool LeadingMatch(std::string_view text, const std::regex& re) {
  return std::regex_search(text.begin(), text.end(), re,
                           std::regex_constants::match_continuous);
}

std::string_view SkipLeading(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() &&
         (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' ||
          text[i] == '\r' || text[i] == '*' || text[i] == '#' ||
          text[i] == '>' || text[i] == '-' || text[i] == '_')) {
    ++i;
  }
  return text.substr(i);
}

}  // namespace

std::string_view Name(Primitive p) {
  return kNames[static_cast<std::size_t>(p)];
}

std::optional<Primitive> ParsePrimitive(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Primitive>(i);
  }
  return std::nullopt;
}

std::string_view Name(LabelSource s) {
  return s == LabelSource::kHeuristic ? "heuristic" : "imported";
}

HeuristicClassifier::HeuristicClassifier() : HeuristicClassifier(Options{}) {}

HeuristicClassifier::HeuristicClassifier(Options opts) : opts_(opts) {
  const std::string let = "let(?:" + kApos + "s|\\s+me|\\s+us)\\s+";
  // First match wins; more specific openers precede the general families.
  rules_.push_back(
      {Compile(let + "(?:check|verify|confirm|double[- ]check)\\b"),
       Primitive::kCheck});
  rules_.push_back(
      {Compile("(?:suppose|assume|let" + kApos +
               "s|what\\s+if|if\\s+we\\s+assume|hypothetically)\\b"),
       Primitive::kHypothesize});
  rules_.push_back({Compile("(?:check|verify|confirm|double[- ]check|sanity\\s+"
                            "check|plugging\\s+back|substituting\\s+back)\\b"),
                    Primitive::kCheck});
  rules_.push_back(
      {Compile("(?:wait|actually|hmm+|instead|alternatively|going\\s+back|on\\s+"
               "second\\s+thought|contradiction|this\\s+doesn" +
               kApos + "t\\s+work|that" + kApos +
               "s\\s+(?:wrong|not\\s+right)|scratch\\s+that)\\b"),
       Primitive::kBacktrack});
  rules_.push_back({Compile("(?:case|subcase|option|possibility)\\s+\\d+\\b"),
                    Primitive::kEnumerate});
  rules_.push_back(
      {Compile("(?:therefore|hence|thus|in\\s+summary|to\\s+summarize|so\\s+the\\s+"
               "(?:answer|final)|so\\s+far|overall|putting\\s+(?:it\\s+|this\\s+)?"
               "(?:all\\s+)?together)\\b"),
       Primitive::kSummarize});
  rules_.push_back(
      {Compile("(?:let\\s+\\S+\\s+(?:be|denote)|let\\s+[a-z]\\s*(?:=|\\\\in)|"
               "define|denote|we\\s+(?:define|denote|label)|notation|set\\s+up|"
               "label\\s+the)\\b"),
       Primitive::kSetup});
  rules_.push_back(
      {Compile("(?:plan|approach|strategy|my\\s+plan|the\\s+goal|our\\s+goal|to\\s+"
               "solve|(?:we|i)\\s+need\\s+to|step\\s+\\d+|first,?\\s+(?:we|i|let))\\b"),
       Primitive::kPlan});
  connective_ = Compile("(?:first|second|third|then|next|now|and)\\b[,:]?\\s*");
}

double HeuristicClassifier::SymbolDensity(std::string_view text) {
  if (text.empty()) return 0.0;
  std::size_t n = 0;
  for (char c : text) {
    if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '*' ||
        c == '/' || c == '=' || c == '^' || c == '<' || c == '>' ||
        c == '%' || c == '|') {
      ++n;
    }
  }
  return 100.0 * static_cast<double>(n) / static_cast<double>(text.size());
}

Primitive HeuristicClassifier::classify(std::string_view span_text,
                                        std::string_view preceding_text) const {
  std::string_view head = SkipLeading(span_text);
  for (const auto& rule : rules_) {
    if (LeadingMatch(head, rule.pattern)) return rule.label;
  }
  if (SymbolDensity(span_text) >= opts_.compute_density) {
    return Primitive::kCompute;
  }
  // A bare continuation ("Then ...", "Next ...") carries on whatever the
  // preceding text was doing.
  std::match_results<std::string_view::const_iterator> m;
  if (!preceding_text.empty() &&
      std::regex_search(head.begin(), head.end(), m, connective_,
                        std::regex_constants::match_continuous)) {
    std::string_view rest = head.substr(static_cast<std::size_t>(m.length(0)));
    for (const auto& rule : rules_) {
      if (LeadingMatch(rest, rule.pattern)) return rule.label;
    }
    constexpr std::size_t kContext = 400;
    std::string_view tail =
        preceding_text.size() > kContext
            ? preceding_text.substr(preceding_text.size() - kContext)
            : preceding_text;
    if (SymbolDensity(tail) >= opts_.compute_density) {
      return Primitive::kCompute;
    }
  }
  return Primitive::kOther;
}

Primitive ClassifyHeuristic(std::string_view span_text,
                            std::string_view preceding_text) {
  static const HeuristicClassifier classifier;
  return classifier.classify(span_text, preceding_text);
}

LabelMap ClassifyCorpus(const Corpus& corpus, const Segmenter& segmenter,
                        const HeuristicClassifier& classifier) {
  LabelMap out;
  for (const auto& r : corpus.records()) {
    ReasoningBlock block = ExtractReasoningBlock(r.response);
    PrimitiveSequence seq{r.key(), {}};
    for (const Span& s : segmenter.segment(block.text)) {
      seq.labels.push_back(
          classifier.classify(block.text.substr(s.start, s.end - s.start),
                              block.text.substr(0, s.start)));
    }
    out.emplace(r.key(), std::move(seq));
  }
  return out;
}

LabelMap ParseLabels(std::string_view text, const Corpus& corpus,
                     const Segmenter& segmenter) {
  using nlohmann::json;
  LabelMap out;
  auto lines = SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::string tag = "line " + std::to_string(i + 1) + ": ";
    json obj;
    try {
      obj = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
      Fail(ErrorCode::kParse, tag + "malformed JSON: " + e.what());
    }
    PrimitiveSequence seq;
    try {
      seq.key = {obj.at("prompt_id").get<std::string>(),
                 obj.at("rollout_id").get<std::string>(),
                 obj.at("checkpoint").get<std::string>()};
      for (const auto& v : obj.at("labels")) {
        auto p = ParsePrimitive(v.get<std::string>());
        if (!p) {
          Fail(ErrorCode::kParse,
               tag + "unknown primitive '" + v.get<std::string>() + "'");
        }
        seq.labels.push_back(*p);
      }
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, tag + "bad label record: " + e.what());
    }
    const RolloutRecord* rec = corpus.find(seq.key);
    if (rec == nullptr) {
      Fail(ErrorCode::kLookup,
           tag + "trace " + ToString(seq.key) + " is not in the corpus");
    }
    std::size_t spans =
        segmenter.segment(ExtractReasoningBlock(rec->response).text).size();
    if (spans != seq.labels.size()) {
      Fail(ErrorCode::kAlignment,
           tag + "trace " + ToString(seq.key) + " has " +
               std::to_string(seq.labels.size()) + " labels but " +
               std::to_string(spans) + " spans");
    }
    TraceKey key = seq.key;
    if (!out.emplace(key, std::move(seq)).second) {
      Fail(ErrorCode::kIntegrity,
           tag + "duplicate labels for trace " + ToString(key));
    }
  }
  return out;
}

LabelMap ImportLabels(const std::string& path, const Corpus& corpus,
                      const Segmenter& segmenter) {
  try {
    return ParseLabels(ReadFile(path), corpus, segmenter);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string SerializeLabels(const PrimitiveSequence& seq, LabelSource source) {
  nlohmann::json obj;
  obj["prompt_id"] = seq.key.prompt_id;
  obj["rollout_id"] = seq.key.rollout_id;
  obj["checkpoint"] = seq.key.checkpoint;
  auto& labels = obj["labels"] = nlohmann::json::array();
  for (Primitive p : seq.labels) labels.push_back(std::string(Name(p)));
  obj["source"] = std::string(Name(source));
  return obj.dump();
}

}  // namespace primtrace
