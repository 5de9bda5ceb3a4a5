#ifndef PRIMTRACE_CORPUS_HPP
#define PRIMTRACE_CORPUS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace primtrace {

// Identifies one trace across every artifact (spans, labels, rewards).
struct TraceKey {
  std::string prompt_id;
  std::string rollout_id;
  std::string checkpoint;

  auto operator<=>(const TraceKey&) const = default;
  bool operator==(const TraceKey&) const = default;
};

std::string ToString(const TraceKey& key);

struct RolloutRecord {
  std::string prompt_id;
  std::string rollout_id;
  std::string checkpoint;
  std::string response;
  // Absent when no verifier ran; distinct from false.
  std::optional<bool> correct;
  // Nats per response token under the frozen reference.
  std::optional<std::vector<double>> token_nlls;
  std::optional<std::vector<bool>> response_mask;

  TraceKey key() const { return {prompt_id, rollout_id, checkpoint}; }
  bool operator==(const RolloutRecord&) const = default;
};

// All rollouts of one checkpoint answering one prompt.
struct RolloutGroup {
  std::string prompt_id;
  std::vector<const RolloutRecord*> rollouts;
};

// Immutable once built; safe for concurrent readers.
class Corpus {
 public:
  Corpus() = default;
  // Validates every record; throws Error on invariant violations.
  Corpus(std::vector<RolloutRecord> records, std::string source = {});

  const std::vector<RolloutRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::string& source() const { return source_; }

  // Sorted, distinct.
  std::vector<std::string> checkpoints() const;
  bool has_checkpoint(std::string_view checkpoint) const;
  // Records of one checkpoint in file order.
  std::vector<const RolloutRecord*> records_for(
      std::string_view checkpoint) const;
  const RolloutRecord* find(const TraceKey& key) const;

 private:
  std::vector<RolloutRecord> records_;
  std::string source_;
  // checkpoint -> prompt_id -> indices into records_
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>,
           std::less<>>
      index_;
  std::map<TraceKey, std::size_t> by_key_;

  friend std::vector<RolloutGroup> GroupByPrompt(const Corpus&,
                                                 std::string_view);
};

// Parses one JSONL line; `line_no` is used in error messages only.
RolloutRecord ParseRolloutLine(std::string_view line, std::size_t line_no);
std::string SerializeRollout(const RolloutRecord& record);

Corpus LoadCorpus(const std::string& path);
Corpus ParseCorpus(std::string_view text, const std::string& source = {});
void WriteCorpus(const Corpus& corpus, const std::string& path);

// Groups sorted by prompt_id; rollouts keep file order.
std::vector<RolloutGroup> GroupByPrompt(const Corpus& corpus,
                                        std::string_view checkpoint);

// Line-oriented file helpers shared by the readers and writers.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);
std::vector<std::string_view> SplitLines(std::string_view text);

}  // namespace primtrace

#endif  // PRIMTRACE_CORPUS_HPP
