#ifndef PRIMTRACE_PIPELINE_HPP
#define PRIMTRACE_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "primtrace/corpus.hpp"
#include "primtrace/metrics.hpp"
#include "primtrace/motifs.hpp"
#include "primtrace/novelty.hpp"
#include "primtrace/primitives.hpp"
#include "primtrace/segmenter.hpp"
#include "primtrace/verifiers.hpp"

namespace primtrace {

inline constexpr std::string_view kSubcommands[] = {
    "segment", "classify", "passk",  "split",       "verify", "reward",
    "motifs",  "metrics",  "novelty", "diagnostics", "report",
};

bool IsSubcommand(std::string_view name);

struct RunConfig {
  std::string in;
  std::string out;
  std::string labels;   // imported labels.jsonl; heuristic when empty
  std::string puzzles;  // puzzles.jsonl for reward/report
  std::string answers;  // answers.jsonl for verify
  std::string solves;   // solves.csv for report
  std::vector<std::string> checkpoints;
  std::string k;  // raw list/range text, e.g. "2-15" or "1,2,4"
  CountMode mode = CountMode::kOverlapping;
  bool exploit_no_setup = false;
  SegmenterConfig segmenter = SegmenterConfig::Defaults();
  MotifFilter motif_filter;
  double compute_density = 8.0;
  NoveltyConfig novelty;
  bool shape_with_novelty = false;
  std::uint64_t seed = 0;
  std::size_t bootstrap_iterations = 10000;
  double bootstrap_level = 0.95;

  // Key names match the long CLI flags without dashes. Throws
  // Error(kUsage) for unknown keys or unparseable values.
  void set(std::string_view key, std::string_view value);

  ExploitSet exploit() const;
};

// "1,2,8-10" -> {1,2,8,9,10}; sorted, distinct. Empty text gives `fallback`.
std::vector<std::int64_t> ParseIntList(std::string_view text,
                                       const std::vector<std::int64_t>& fallback);

// Each table renderer is shared by its subcommand and by `report`, so the
// bundle matches the per-command outputs byte for byte.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }

  std::string spans_jsonl(const Corpus& corpus) const;
  std::string labels_jsonl(const LabelMap& labels, LabelSource source) const;
  std::string motifs_csv(const Corpus& corpus, const LabelMap& labels) const;
  std::string categories_csv(const Corpus& corpus, const LabelMap& labels) const;
  std::string primitive_counts_csv(const Corpus& corpus,
                                   const LabelMap& labels) const;
  std::string traces_csv(const Corpus& corpus, const LabelMap& labels) const;
  std::string metrics_csv(const Corpus& corpus, const LabelMap& labels) const;
  std::string depth_ci_csv(const Corpus& corpus, const LabelMap& labels) const;
  std::string mwu_csv(const Corpus& corpus, const LabelMap& labels) const;
  std::string passk_csv(const SolveMatrix& solves) const;
  std::string splits_json(const SolveMatrix& solves) const;
  std::string verify_csv(const std::vector<PuzzleInstance>& puzzles,
                         const std::string& answers_path) const;
  std::string rewards_csv(const Corpus& corpus,
                          const std::vector<PuzzleInstance>& puzzles) const;
  std::string novelty_csv(const Corpus& corpus) const;
  std::string diagnostics_csv(const Corpus& corpus) const;

  // Heuristic labels unless cfg.labels names a file to import.
  LabelMap labels_for(const Corpus& corpus, LabelSource* source) const;
  SolveMatrix solves_from(const std::string& path) const;

  // Reads the declared inputs and writes the declared outputs.
  void run(std::string_view subcommand) const;

 private:
  std::vector<std::string> selected_checkpoints(const Corpus& corpus) const;
  Corpus load_filtered(const std::string& path) const;
  void report() const;

  RunConfig cfg_;
  Segmenter segmenter_;
  HeuristicClassifier classifier_;
};

}  // namespace primtrace

#endif  // PRIMTRACE_PIPELINE_HPP
