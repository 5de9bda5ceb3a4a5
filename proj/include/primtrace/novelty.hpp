#ifndef PRIMTRACE_NOVELTY_HPP
#define PRIMTRACE_NOVELTY_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "primtrace/corpus.hpp"
#include "primtrace/verifiers.hpp"

namespace primtrace {

enum class StdKind { kPopulation, kSample };

struct NoveltyConfig {
  double alpha = 0.1;
  std::size_t top_k = 100;
  double z_clip = 2.0;
  std::size_t min_group = 2;
  double std_epsilon = 1e-6;
  StdKind std_kind = StdKind::kPopulation;

  void validate() const;
};

enum class SkipReason { kNone, kTooFewCorrect, kZeroVariance };
std::string_view Name(SkipReason reason);

// Mean of the k largest masked-in NLLs; all valid tokens when fewer than k.
// An empty mask means every token is valid. Throws Error(kParameter) when
// no token is valid or lengths differ.
double TopKNllScore(std::span<const double> nlls,
                    const std::vector<bool>& mask, std::size_t k);
double MeanNll(std::span<const double> nlls, const std::vector<bool>& mask);

struct GroupMember {
  double score = 0.0;  // s(r); ignored for incorrect members
  bool correct = false;
};

struct MemberBonus {
  std::optional<double> z_raw;  // unclipped, correct members of kept groups
  std::optional<double> z;      // clipped
  double bonus = 0.0;
};

struct GroupBonusReport {
  SkipReason skip = SkipReason::kNone;
  double mean = 0.0, stddev = 0.0;  // over correct members
  std::vector<MemberBonus> members;
};

GroupBonusReport GroupBonus(std::span<const GroupMember> group,
                            const NoveltyConfig& cfg);

// Adds the bonus at sequence level. A token-level trainer should add the
// same amount to the reward of the last valid response token.
RewardBreakdown ShapedReward(RewardBreakdown base, double bonus);

struct NoveltyRow {
  std::string checkpoint, prompt_id, rollout_id;
  std::optional<bool> correct;
  std::optional<double> score;
  std::optional<double> z;
  double bonus = 0.0;
  SkipReason skip = SkipReason::kNone;
};

// One row per rollout of the checkpoint, grouped by prompt. Correct rollouts
// need token_nlls (Error(kData) otherwise); incorrect ones are scored when
// NLLs are present.
std::vector<NoveltyRow> NoveltyForCheckpoint(const Corpus& corpus,
                                             const std::string& checkpoint,
                                             const NoveltyConfig& cfg);

struct SignalDiagnostics {
  std::string checkpoint;
  std::size_t n_prompts = 0;
  double mean_nll_std = 0.0;
  std::vector<std::size_t> k_list;
  std::vector<double> topk_std;  // parallel to k_list
};

// Within-prompt population std of mean NLL and top-k NLL, averaged over
// prompts with at least two rollouts.
SignalDiagnostics ComputeSignalDiagnostics(const Corpus& corpus,
                                           const std::string& checkpoint,
                                           const std::vector<std::size_t>& k_list);

double PopulationStd(std::span<const double> values);

}  // namespace primtrace

#endif  // PRIMTRACE_NOVELTY_HPP
