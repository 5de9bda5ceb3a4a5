#include "primtrace/novelty.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "primtrace/error.hpp"

namespace primtrace {

void NoveltyConfig::validate() const {
  if (!(alpha > 0.0)) Fail(ErrorCode::kParameter, "alpha must be > 0");
  if (top_k < 1) Fail(ErrorCode::kParameter, "top_k must be >= 1");
  if (!(z_clip > 0.0)) Fail(ErrorCode::kParameter, "z_clip must be > 0");
  if (min_group < 2) Fail(ErrorCode::kParameter, "min_group must be >= 2");
  if (!(std_epsilon >= 0.0)) {
    Fail(ErrorCode::kParameter, "std_epsilon must be >= 0");
  }
}

std::string_view Name(SkipReason reason) {
  switch (reason) {
    case SkipReason::kNone:
      return "none";
    case SkipReason::kTooFewCorrect:
      return "too-few-correct";
    case SkipReason::kZeroVariance:
      return "zero-variance";
  }
  return "none";
}

namespace {

std::vector<double> ValidTokens(std::span<const double> nlls,
                                const std::vector<bool>& mask) {
  if (!mask.empty() && mask.size() != nlls.size()) {
    Fail(ErrorCode::kParameter, "mask length " + std::to_string(mask.size()) +
                                    " != NLL length " +
                                    std::to_string(nlls.size()));
  }
  std::vector<double> valid;
  valid.reserve(nlls.size());
  for (std::size_t i = 0; i < nlls.size(); ++i) {
    if (mask.empty() || mask[i]) valid.push_back(nlls[i]);
  }
  if (valid.empty()) {
    Fail(ErrorCode::kParameter, "no valid response tokens to score");
  }
  return valid;
}

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double Std(std::span<const double> v, double mean, StdKind kind) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double denom = static_cast<double>(v.size());
  if (kind == StdKind::kSample) denom -= 1.0;
  return denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
}

}  // namespace

double TopKNllScore(std::span<const double> nlls,
                    const std::vector<bool>& mask, std::size_t k) {
  if (k < 1) Fail(ErrorCode::kParameter, "top-k needs k >= 1");
  std::vector<double> valid = ValidTokens(nlls, mask);
  std::size_t take = std::min(k, valid.size());
  std::nth_element(valid.begin(), valid.begin() + (take - 1), valid.end(),
                   std::greater<>());
  std::sort(valid.begin(), valid.begin() + take, std::greater<>());
  return Mean(std::span<const double>(valid.data(), take));
}

double MeanNll(std::span<const double> nlls, const std::vector<bool>& mask) {
  return Mean(ValidTokens(nlls, mask));
}

double PopulationStd(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return Std(values, Mean(values), StdKind::kPopulation);
}

GroupBonusReport GroupBonus(std::span<const GroupMember> group,
                            const NoveltyConfig& cfg) {
  cfg.validate();
  GroupBonusReport rep;
  rep.members.resize(group.size());
  std::vector<double> scores;
  for (const auto& m : group) {
    if (m.correct) scores.push_back(m.score);
  }
  if (scores.size() < cfg.min_group) {
    rep.skip = SkipReason::kTooFewCorrect;
    return rep;
  }
  rep.mean = Mean(scores);
  rep.stddev = Std(scores, rep.mean, cfg.std_kind);
  if (rep.stddev < cfg.std_epsilon) {
    rep.skip = SkipReason::kZeroVariance;
    return rep;
  }
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (!group[i].correct) continue;
    double z = (group[i].score - rep.mean) / rep.stddev;
    auto& out = rep.members[i];
    out.z_raw = z;
    out.z = std::clamp(z, -cfg.z_clip, cfg.z_clip);
    out.bonus = cfg.alpha * *out.z;
  }
  return rep;
}

RewardBreakdown ShapedReward(RewardBreakdown base, double bonus) {
  base.novelty = bonus;
  base.update_total();
  return base;
}

std::vector<NoveltyRow> NoveltyForCheckpoint(const Corpus& corpus,
                                             const std::string& checkpoint,
                                             const NoveltyConfig& cfg) {
  cfg.validate();
  std::vector<NoveltyRow> rows;
  for (const auto& g : GroupByPrompt(corpus, checkpoint)) {
    std::vector<GroupMember> members;
    std::vector<NoveltyRow> group_rows;
    for (const RolloutRecord* r : g.rollouts) {
      NoveltyRow row{checkpoint, r->prompt_id, r->rollout_id, r->correct,
                     std::nullopt, std::nullopt, 0.0, SkipReason::kNone};
      bool correct = r->correct.value_or(false);
      if (r->token_nlls) {
        try {
          row.score = TopKNllScore(*r->token_nlls,
                                   r->response_mask.value_or(std::vector<bool>{}),
                                   cfg.top_k);
        } catch (const Error& e) {
          if (correct) {
            Fail(ErrorCode::kData, "rollout " + ToString(r->key()) + ": " +
                                       e.what());
          }
        }
      } else if (correct) {
        Fail(ErrorCode::kData,
             "rollout " + ToString(r->key()) + " is correct but has no "
                                               "token_nlls");
      }
      members.push_back({row.score.value_or(0.0), correct});
      group_rows.push_back(std::move(row));
    }
    GroupBonusReport rep = GroupBonus(members, cfg);
    for (std::size_t i = 0; i < group_rows.size(); ++i) {
      group_rows[i].z = rep.members[i].z;
      group_rows[i].bonus = rep.members[i].bonus;
      group_rows[i].skip = rep.skip;
      rows.push_back(std::move(group_rows[i]));
    }
  }
  return rows;
}

SignalDiagnostics ComputeSignalDiagnostics(
    const Corpus& corpus, const std::string& checkpoint,
    const std::vector<std::size_t>& k_list) {
  SignalDiagnostics d;
  d.checkpoint = checkpoint;
  d.k_list = k_list;
  d.topk_std.assign(k_list.size(), 0.0);
  for (const auto& g : GroupByPrompt(corpus, checkpoint)) {
    std::vector<double> means;
    std::vector<std::vector<double>> topk(k_list.size());
    for (const RolloutRecord* r : g.rollouts) {
      if (!r->token_nlls) {
        Fail(ErrorCode::kData,
             "rollout " + ToString(r->key()) + " has no token_nlls");
      }
      const auto mask = r->response_mask.value_or(std::vector<bool>{});
      try {
        means.push_back(MeanNll(*r->token_nlls, mask));
        for (std::size_t i = 0; i < k_list.size(); ++i) {
          topk[i].push_back(TopKNllScore(*r->token_nlls, mask, k_list[i]));
        }
      } catch (const Error& e) {
        Fail(ErrorCode::kData,
             "rollout " + ToString(r->key()) + ": " + e.what());
      }
    }
    if (means.size() < 2) continue;
    ++d.n_prompts;
    d.mean_nll_std += PopulationStd(means);
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      d.topk_std[i] += PopulationStd(topk[i]);
    }
  }
  if (d.n_prompts > 0) {
    auto n = static_cast<double>(d.n_prompts);
    d.mean_nll_std /= n;
    for (double& v : d.topk_std) v /= n;
  }
  return d;
}

}  // namespace primtrace
