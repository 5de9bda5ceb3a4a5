#include "primtrace/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "json.hpp"
#include "primtrace/error.hpp"

namespace primtrace {

namespace {

using nlohmann::json;

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string Num(std::optional<double> v) { return v ? Num(*v) : std::string(); }

std::string Csv(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Bool(std::optional<bool> v) {
  return v ? (*v ? "true" : "false") : "";
}

template <typename... Fields>
std::string Row(const Fields&... fields) {
  std::string line;
  bool first = true;
  auto add = [&](const std::string& f) {
    if (!first) line += ',';
    line += f;
    first = false;
  };
  (add(fields), ...);
  return line + '\n';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

double ParseDouble(std::string_view key, std::string_view value) {
  std::string s(Trim(value));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    Fail(ErrorCode::kUsage, "--" + std::string(key) + " expects a number, got '" +
                                std::string(value) + "'");
  }
  return v;
}

std::uint64_t ParseUnsigned(std::string_view key, std::string_view value) {
  std::string s(Trim(value));
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s.front() != '-') v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    Fail(ErrorCode::kUsage, "--" + std::string(key) +
                                " expects a non-negative integer, got '" +
                                std::string(value) + "'");
  }
  return v;
}

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = Trim(text.substr(pos, comma - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

const std::vector<Primitive>& LabelsOf(const LabelMap& labels,
                                       const RolloutRecord& r) {
  static const std::vector<Primitive> kEmpty;
  auto it = labels.find(r.key());
  return it == labels.end() ? kEmpty : it->second.labels;
}

}  // namespace

bool IsSubcommand(std::string_view name) {
  return std::find(std::begin(kSubcommands), std::end(kSubcommands), name) !=
         std::end(kSubcommands);
}

std::vector<std::int64_t> ParseIntList(
    std::string_view text, const std::vector<std::int64_t>& fallback) {
  if (Trim(text).empty()) return fallback;
  std::set<std::int64_t> values;
  for (const auto& item : SplitList(text)) {
    auto dash = item.find('-', 1);
    try {
      if (dash == std::string::npos) {
        std::size_t used = 0;
        long long v = std::stoll(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        values.insert(v);
      } else {
        std::string lo_s = item.substr(0, dash), hi_s = item.substr(dash + 1);
        std::size_t u1 = 0, u2 = 0;
        long long lo = std::stoll(lo_s, &u1), hi = std::stoll(hi_s, &u2);
        if (u1 != lo_s.size() || u2 != hi_s.size() || lo > hi) {
          throw std::invalid_argument(item);
        }
        for (long long v = lo; v <= hi; ++v) values.insert(v);
      }
    } catch (const std::exception&) {
      Fail(ErrorCode::kUsage, "bad integer list item '" + item + "'");
    }
  }
  return {values.begin(), values.end()};
}

void RunConfig::set(std::string_view key, std::string_view value) {
  std::string v(Trim(value));
  if (key == "in") {
    in = v;
  } else if (key == "out") {
    out = v;
  } else if (key == "labels") {
    labels = v;
  } else if (key == "puzzles") {
    puzzles = v;
  } else if (key == "answers") {
    answers = v;
  } else if (key == "solves") {
    solves = v;
  } else if (key == "checkpoint") {
    checkpoints = SplitList(v);
  } else if (key == "k") {
    k = v;
  } else if (key == "mode") {
    auto m = ParseCountMode(v);
    if (!m) {
      Fail(ErrorCode::kUsage,
           "--mode expects overlapping|non-overlapping, got '" + v + "'");
    }
    mode = *m;
  } else if (key == "exploit") {
    if (v != "with-setup" && v != "no-setup") {
      Fail(ErrorCode::kUsage,
           "--exploit expects with-setup|no-setup, got '" + v + "'");
    }
    exploit_no_setup = v == "no-setup";
  } else if (key == "alpha") {
    novelty.alpha = ParseDouble(key, v);
  } else if (key == "topk") {
    novelty.top_k = ParseUnsigned(key, v);
  } else if (key == "zclip") {
    novelty.z_clip = ParseDouble(key, v);
  } else if (key == "min-group") {
    novelty.min_group = ParseUnsigned(key, v);
  } else if (key == "std") {
    if (v != "population" && v != "sample") {
      Fail(ErrorCode::kUsage, "--std expects population|sample");
    }
    novelty.std_kind = v == "sample" ? StdKind::kSample : StdKind::kPopulation;
  } else if (key == "novelty") {
    if (v != "true" && v != "false" && v != "1" && v != "0") {
      Fail(ErrorCode::kUsage, "--novelty expects a boolean");
    }
    shape_with_novelty = v == "true" || v == "1";
  } else if (key == "seed") {
    seed = ParseUnsigned(key, v);
  } else if (key == "min-tokens") {
    segmenter.min_tokens = ParseUnsigned(key, v);
  } else if (key == "max-tokens") {
    segmenter.max_tokens = ParseUnsigned(key, v);
  } else if (key == "tail-tokens") {
    segmenter.tail_merge_tokens = ParseUnsigned(key, v);
  } else if (key == "min-count-short") {
    motif_filter.min_count_short = ParseUnsigned(key, v);
  } else if (key == "min-count-long") {
    motif_filter.min_count_long = ParseUnsigned(key, v);
  } else if (key == "compute-density") {
    compute_density = ParseDouble(key, v);
  } else if (key == "bootstrap-iters") {
    bootstrap_iterations = ParseUnsigned(key, v);
  } else if (key == "level") {
    bootstrap_level = ParseDouble(key, v);
  } else {
    Fail(ErrorCode::kUsage, "unknown option '" + std::string(key) + "'");
  }
}

ExploitSet RunConfig::exploit() const {
  return exploit_no_setup ? ExploitSet::NoSetup() : ExploitSet::WithSetup();
}

Pipeline::Pipeline(RunConfig cfg)
    : cfg_(std::move(cfg)),
      segmenter_(cfg_.segmenter),
      classifier_(HeuristicClassifier::Options{cfg_.compute_density}) {
  cfg_.novelty.validate();
}

std::vector<std::string> Pipeline::selected_checkpoints(
    const Corpus& corpus) const {
  if (cfg_.checkpoints.empty()) return corpus.checkpoints();
  for (const auto& c : cfg_.checkpoints) {
    if (!corpus.has_checkpoint(c)) {
      Fail(ErrorCode::kLookup, "unknown checkpoint '" + c + "'");
    }
  }
  std::vector<std::string> out = cfg_.checkpoints;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Corpus Pipeline::load_filtered(const std::string& path) const {
  if (path.empty()) Fail(ErrorCode::kUsage, "--in is required");
  Corpus full = LoadCorpus(path);
  if (cfg_.checkpoints.empty()) return full;
  auto keep = selected_checkpoints(full);
  std::vector<RolloutRecord> records;
  for (const auto& r : full.records()) {
    if (std::binary_search(keep.begin(), keep.end(), r.checkpoint)) {
      records.push_back(r);
    }
  }
  return Corpus(std::move(records), path);
}

LabelMap Pipeline::labels_for(const Corpus& corpus, LabelSource* source) const {
  if (!cfg_.labels.empty()) {
    if (source) *source = LabelSource::kImported;
    // Labels of filtered-out checkpoints are dropped.
    Corpus full = LoadCorpus(cfg_.in);
    LabelMap all = ImportLabels(cfg_.labels, full, segmenter_);
    LabelMap out;
    for (auto& [key, seq] : all) {
      if (corpus.find(key)) out.emplace(key, std::move(seq));
    }
    return out;
  }
  if (source) *source = LabelSource::kHeuristic;
  return ClassifyCorpus(corpus, segmenter_, classifier_);
}

SolveMatrix Pipeline::solves_from(const std::string& path) const {
  if (EndsWith(path, ".jsonl")) return SolvesFromCorpus(load_filtered(path));
  SolveMatrix all = LoadSolves(path);
  if (cfg_.checkpoints.empty()) return all;
  SolveMatrix out;
  for (const auto& c : cfg_.checkpoints) {
    for (const auto& [problem, count] : all.column(c)) out.set(c, problem, count);
  }
  return out;
}

std::string Pipeline::spans_jsonl(const Corpus& corpus) const {
  std::string out;
  for (const auto& r : corpus.records()) {
    ReasoningBlock block = ExtractReasoningBlock(r.response);
    json obj;
    obj["prompt_id"] = r.prompt_id;
    obj["rollout_id"] = r.rollout_id;
    obj["checkpoint"] = r.checkpoint;
    auto& spans = obj["spans"] = json::array();
    for (const Span& s : segmenter_.segment(block.text)) {
      spans.push_back({{"start", block.offset + s.start},
                       {"end", block.offset + s.end},
                       {"est_tokens", s.est_tokens}});
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string Pipeline::labels_jsonl(const LabelMap& labels,
                                   LabelSource source) const {
  std::string out;
  for (const auto& [key, seq] : labels) {
    out += SerializeLabels(seq, source);
    out += '\n';
  }
  return out;
}

std::string Pipeline::motifs_csv(const Corpus& corpus,
                                 const LabelMap& labels) const {
  auto ks = ParseIntList(cfg_.k, {});
  int k_min = kMinMotifK, k_max = kMaxMotifK;
  if (!ks.empty()) {
    k_min = static_cast<int>(ks.front());
    k_max = static_cast<int>(ks.back());
  }
  std::string out = Row(std::string("checkpoint"), std::string("k"),
                        std::string("motif"), std::string("raw_count"),
                        std::string("mean_per_trace_count"),
                        std::string("mean_normalized_freq"), std::string("mode"));
  for (const auto& ckpt : corpus.checkpoints()) {
    MotifAccumulator acc(k_min, k_max, cfg_.mode);
    for (const auto* r : corpus.records_for(ckpt)) acc.add(LabelsOf(labels, *r));
    MotifTable table = acc.finalize(ckpt, cfg_.motif_filter);
    for (const auto& row : table.rows) {
      if (!ks.empty() && !std::binary_search(ks.begin(), ks.end(), row.k)) {
        continue;
      }
      out += Row(Csv(ckpt), std::to_string(row.k), MotifName(row.motif),
                 std::to_string(row.raw_count), Num(row.mean_per_trace_count),
                 Num(row.mean_normalized_freq), std::string(Name(cfg_.mode)));
    }
  }
  return out;
}

std::string Pipeline::categories_csv(const Corpus& corpus,
                                     const LabelMap& labels) const {
  std::string out = "checkpoint,k,category,total,mean_per_trace\n";
  for (const auto& ckpt : corpus.checkpoints()) {
    auto records = corpus.records_for(ckpt);
    for (int k : {3, 5}) {
      CategoryCounts total;
      for (const auto* r : records) {
        auto c = CountCategories(LabelsOf(labels, *r), k);
        total.recovery += c.recovery;
        total.exploitation += c.exploitation;
        total.verification += c.verification;
      }
      auto n = static_cast<double>(records.size());
      std::pair<const char*, std::size_t> cats[] = {
          {"recovery", total.recovery},
          {"exploitation", total.exploitation},
          {"verification", total.verification}};
      for (auto [name, count] : cats) {
        out += Row(Csv(ckpt), std::to_string(k), std::string(name),
                   std::to_string(count), Num(static_cast<double>(count) / n));
      }
    }
  }
  return out;
}

std::string Pipeline::primitive_counts_csv(const Corpus& corpus,
                                           const LabelMap& labels) const {
  std::string out = "checkpoint,primitive,total,mean_per_trace\n";
  for (const auto& ckpt : corpus.checkpoints()) {
    auto records = corpus.records_for(ckpt);
    std::array<std::size_t, kNumPrimitives> counts{};
    for (const auto* r : records) {
      for (Primitive p : LabelsOf(labels, *r)) {
        ++counts[static_cast<std::size_t>(p)];
      }
    }
    for (Primitive p : kAllPrimitives) {
      std::size_t c = counts[static_cast<std::size_t>(p)];
      out += Row(Csv(ckpt), std::string(Name(p)), std::to_string(c),
                 Num(static_cast<double>(c) /
                     static_cast<double>(records.size())));
    }
  }
  return out;
}

std::string Pipeline::traces_csv(const Corpus& corpus,
                                 const LabelMap& labels) const {
  std::string out =
      "checkpoint,prompt_id,rollout_id,correct,n_spans,chain_depth,"
      "mean_run_length,recovery3,exploitation3,verification3,recovery5,"
      "exploitation5,verification5\n";
  ExploitSet exploit = cfg_.exploit();
  for (const auto& r : corpus.records()) {
    const auto& seq = LabelsOf(labels, r);
    auto c3 = CountCategories(seq, 3), c5 = CountCategories(seq, 5);
    out += Row(Csv(r.checkpoint), Csv(r.prompt_id), Csv(r.rollout_id),
               Bool(r.correct), std::to_string(seq.size()),
               std::to_string(ChainDepth(seq, exploit)),
               Num(MeanExploitRun(seq, exploit)), std::to_string(c3.recovery),
               std::to_string(c3.exploitation), std::to_string(c3.verification),
               std::to_string(c5.recovery), std::to_string(c5.exploitation),
               std::to_string(c5.verification));
  }
  return out;
}

std::string Pipeline::metrics_csv(const Corpus& corpus,
                                  const LabelMap& labels) const {
  std::string out = "checkpoint,mean_depth,p90_depth,mean_run_length,n_traces\n";
  ExploitSet exploit = cfg_.exploit();
  for (const auto& ckpt : corpus.checkpoints()) {
    std::vector<double> depths, runs;
    for (const auto* r : corpus.records_for(ckpt)) {
      const auto& seq = LabelsOf(labels, *r);
      depths.push_back(static_cast<double>(ChainDepth(seq, exploit)));
      if (auto m = MeanExploitRun(seq, exploit)) runs.push_back(*m);
    }
    double mean_depth = 0.0;
    for (double d : depths) mean_depth += d;
    mean_depth /= static_cast<double>(depths.size());
    std::optional<double> mean_run;
    if (!runs.empty()) {
      double s = 0.0;
      for (double v : runs) s += v;
      mean_run = s / static_cast<double>(runs.size());
    }
    out += Row(Csv(ckpt), Num(mean_depth), Num(DepthPercentile(depths, 0.9)),
               Num(mean_run), std::to_string(depths.size()));
  }
  return out;
}

std::string Pipeline::depth_ci_csv(const Corpus& corpus,
                                   const LabelMap& labels) const {
  std::string out = "checkpoint,subset,n,mean_depth,ci_lo,ci_hi,level\n";
  ExploitSet exploit = cfg_.exploit();
  for (const auto& ckpt : corpus.checkpoints()) {
    std::vector<double> all, solved, unsolved;
    for (const auto* r : corpus.records_for(ckpt)) {
      double d = static_cast<double>(ChainDepth(LabelsOf(labels, *r), exploit));
      all.push_back(d);
      if (r->correct == true) solved.push_back(d);
      if (r->correct == false) unsolved.push_back(d);
    }
    std::pair<const char*, const std::vector<double>*> subsets[] = {
        {"all", &all}, {"solved", &solved}, {"unsolved", &unsolved}};
    for (auto [name, values] : subsets) {
      if (values->empty()) continue;
      double mean = 0.0;
      for (double v : *values) mean += v;
      mean /= static_cast<double>(values->size());
      Interval ci = BootstrapCi(*values, cfg_.bootstrap_level,
                                cfg_.bootstrap_iterations, cfg_.seed);
      out += Row(Csv(ckpt), std::string(name), std::to_string(values->size()),
                 Num(mean), Num(ci.lo), Num(ci.hi), Num(cfg_.bootstrap_level));
    }
  }
  return out;
}

std::string Pipeline::mwu_csv(const Corpus& corpus,
                              const LabelMap& labels) const {
  std::string out =
      "checkpoint,mean_depth_solved,mean_depth_unsolved,delta,U,p,method,"
      "n_solved,n_unsolved\n";
  ExploitSet exploit = cfg_.exploit();
  auto mean = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  for (const auto& ckpt : corpus.checkpoints()) {
    std::vector<double> solved, unsolved;
    for (const auto* r : corpus.records_for(ckpt)) {
      double d = static_cast<double>(ChainDepth(LabelsOf(labels, *r), exploit));
      if (r->correct == true) solved.push_back(d);
      if (r->correct == false) unsolved.push_back(d);
    }
    auto ms = mean(solved), mu = mean(unsolved);
    std::string delta, u, p, method;
    if (ms && mu) {
      delta = Num(*ms - *mu);
      MannWhitneyResult res = MannWhitneyU(solved, unsolved);
      u = Num(res.u);
      p = Num(res.p);
      method = res.exact ? "exact" : "normal";
    }
    out += Row(Csv(ckpt), Num(ms), Num(mu), delta, u, p, method,
               std::to_string(solved.size()), std::to_string(unsolved.size()));
  }
  return out;
}

std::string Pipeline::passk_csv(const SolveMatrix& solves) const {
  std::string out = "checkpoint,k,estimate\n";
  for (const auto& ckpt : solves.checkpoints()) {
    const SolveColumn& col = solves.column(ckpt);
    std::int64_t min_n = -1;
    for (const auto& [_, c] : col) {
      min_n = min_n < 0 ? c.n : std::min(min_n, c.n);
    }
    std::vector<std::int64_t> fallback;
    for (std::int64_t k = 1; k <= min_n; k *= 2) fallback.push_back(k);
    for (std::int64_t k : ParseIntList(cfg_.k, fallback)) {
      double sum = 0.0;
      for (const auto& [problem, c] : col) {
        try {
          sum += PassAtK(c.n, c.c, k);
        } catch (const Error& e) {
          throw Error(e.code(), ckpt + "/" + problem + ": " + e.what());
        }
      }
      out += Row(Csv(ckpt), std::to_string(k),
                 Num(sum / static_cast<double>(col.size())));
    }
  }
  return out;
}

std::string Pipeline::splits_json(const SolveMatrix& solves) const {
  std::vector<std::string> pair = cfg_.checkpoints;
  if (pair.empty()) pair = solves.checkpoints();
  if (pair.size() != 2) {
    Fail(ErrorCode::kUsage,
         "split needs exactly two checkpoints (pass --checkpoint A,B)");
  }
  SolveSplit s = SplitSolves(solves.column(pair[0]), solves.column(pair[1]));
  json obj;
  obj["a"] = pair[0];
  obj["b"] = pair[1];
  obj["both"] = s.both;
  obj["only_a"] = s.only_a;
  obj["only_b"] = s.only_b;
  obj["neither"] = s.neither;
  return obj.dump(2) + "\n";
}

std::string Pipeline::verify_csv(const std::vector<PuzzleInstance>& puzzles,
                                 const std::string& answers_path) const {
  std::map<std::string, BoardGrid> answers;
  if (!answers_path.empty()) {
    auto lines = SplitLines(ReadFile(answers_path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (Trim(lines[i]).empty()) continue;
      try {
        json obj = json::parse(lines[i].begin(), lines[i].end());
        BoardGrid g;
        for (const auto& row : obj.at("answer")) {
          g.rows.push_back(row.get<std::string>());
        }
        answers[obj.at("id").get<std::string>()] = std::move(g);
      } catch (const json::exception& e) {
        Fail(ErrorCode::kParse, answers_path + ": line " +
                                    std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  std::string out = "puzzle_id,kind,ok,diagnostic\n";
  for (const auto& p : puzzles) {
    const BoardGrid* candidate = nullptr;
    if (!answers_path.empty()) {
      auto it = answers.find(p.id);
      if (it == answers.end()) continue;
      candidate = &it->second;
    } else if (p.gold) {
      candidate = &*p.gold;
    } else {
      Fail(ErrorCode::kData, "puzzle '" + p.id + "' has no gold board");
    }
    VerifyResult res;
    try {
      res = Verify(p, *candidate);
    } catch (const Error& e) {
      res = {false, std::string("structure: ") + e.what()};
    }
    out += Row(Csv(p.id), std::string(Name(p.kind)), Bool(res.ok),
               Csv(res.diagnostic));
  }
  return out;
}

std::string Pipeline::rewards_csv(
    const Corpus& corpus, const std::vector<PuzzleInstance>& puzzles) const {
  std::map<std::string, const PuzzleInstance*> by_id;
  for (const auto& p : puzzles) by_id[p.id] = &p;
  std::map<TraceKey, RewardBreakdown> rewards;
  for (const auto& r : corpus.records()) {
    auto it = by_id.find(r.prompt_id);
    if (it == by_id.end()) {
      Fail(ErrorCode::kLookup, "rollout " + ToString(r.key()) +
                                   " has no puzzle with id '" + r.prompt_id +
                                   "'");
    }
    if (!it->second->gold) {
      Fail(ErrorCode::kData, "puzzle '" + r.prompt_id + "' has no gold board");
    }
    rewards[r.key()] = BaseReward(*it->second, *it->second->gold, r.response);
  }
  if (cfg_.shape_with_novelty) {
    // Correctness for the bonus is the verifier's exact term.
    for (const auto& ckpt : corpus.checkpoints()) {
      for (const auto& g : GroupByPrompt(corpus, ckpt)) {
        std::vector<GroupMember> members;
        for (const auto* r : g.rollouts) {
          bool correct = rewards[r->key()].exact == 1.0;
          double score = 0.0;
          if (correct) {
            if (!r->token_nlls) {
              Fail(ErrorCode::kData, "rollout " + ToString(r->key()) +
                                         " verifies but has no token_nlls");
            }
            score = TopKNllScore(*r->token_nlls,
                                 r->response_mask.value_or(std::vector<bool>{}),
                                 cfg_.novelty.top_k);
          }
          members.push_back({score, correct});
        }
        GroupBonusReport rep = GroupBonus(members, cfg_.novelty);
        for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
          auto& rb = rewards[g.rollouts[i]->key()];
          rb = ShapedReward(rb, rep.members[i].bonus);
        }
      }
    }
  }
  std::string out =
      "prompt_id,rollout_id,checkpoint,exact,completion,format,novelty,total\n";
  for (const auto& r : corpus.records()) {
    const RewardBreakdown& rb = rewards[r.key()];
    out += Row(Csv(r.prompt_id), Csv(r.rollout_id), Csv(r.checkpoint),
               Num(rb.exact), Num(rb.completion), Num(rb.format),
               Num(rb.novelty), Num(rb.total));
  }
  return out;
}

std::string Pipeline::novelty_csv(const Corpus& corpus) const {
  std::string out =
      "checkpoint,prompt_id,rollout_id,correct,s,z,bonus,skip_reason\n";
  for (const auto& ckpt : corpus.checkpoints()) {
    for (const auto& row : NoveltyForCheckpoint(corpus, ckpt, cfg_.novelty)) {
      out += Row(Csv(row.checkpoint), Csv(row.prompt_id), Csv(row.rollout_id),
                 Bool(row.correct), Num(row.score), Num(row.z), Num(row.bonus),
                 std::string(Name(row.skip)));
    }
  }
  return out;
}

std::string Pipeline::diagnostics_csv(const Corpus& corpus) const {
  std::vector<std::size_t> ks;
  for (auto k : ParseIntList(cfg_.k, {10, 100, 200})) {
    if (k < 1) Fail(ErrorCode::kUsage, "top-k sizes must be >= 1");
    ks.push_back(static_cast<std::size_t>(k));
  }
  std::string out = "checkpoint,n_prompts,mean_nll";
  for (auto k : ks) out += ",top" + std::to_string(k) + "_nll";
  out += '\n';
  for (const auto& ckpt : corpus.checkpoints()) {
    SignalDiagnostics d = ComputeSignalDiagnostics(corpus, ckpt, ks);
    out += Csv(ckpt) + "," + std::to_string(d.n_prompts) + "," +
           Num(d.mean_nll_std);
    for (double v : d.topk_std) out += "," + Num(v);
    out += '\n';
  }
  return out;
}

void Pipeline::run(std::string_view subcommand) const {
  if (!IsSubcommand(subcommand)) {
    Fail(ErrorCode::kUsage,
         "unknown subcommand '" + std::string(subcommand) + "'");
  }
  if (subcommand == "report") {
    report();
    return;
  }
  if (cfg_.in.empty()) Fail(ErrorCode::kUsage, "--in is required");
  if (cfg_.out.empty()) Fail(ErrorCode::kUsage, "--out is required");
  if (!std::filesystem::exists(cfg_.in)) {
    Fail(ErrorCode::kIo, "input '" + cfg_.in + "' does not exist");
  }
  std::string text;
  if (subcommand == "segment") {
    text = spans_jsonl(load_filtered(cfg_.in));
  } else if (subcommand == "classify") {
    Corpus c = load_filtered(cfg_.in);
    LabelSource src;
    LabelMap labels = labels_for(c, &src);
    text = labels_jsonl(labels, src);
  } else if (subcommand == "motifs") {
    Corpus c = load_filtered(cfg_.in);
    text = motifs_csv(c, labels_for(c, nullptr));
  } else if (subcommand == "metrics") {
    Corpus c = load_filtered(cfg_.in);
    text = metrics_csv(c, labels_for(c, nullptr));
  } else if (subcommand == "passk") {
    text = passk_csv(solves_from(cfg_.in));
  } else if (subcommand == "split") {
    text = splits_json(solves_from(cfg_.in));
  } else if (subcommand == "verify") {
    text = verify_csv(LoadPuzzles(cfg_.in), cfg_.answers);
  } else if (subcommand == "reward") {
    if (cfg_.puzzles.empty()) Fail(ErrorCode::kUsage, "--puzzles is required");
    text = rewards_csv(load_filtered(cfg_.in), LoadPuzzles(cfg_.puzzles));
  } else if (subcommand == "novelty") {
    text = novelty_csv(load_filtered(cfg_.in));
  } else if (subcommand == "diagnostics") {
    text = diagnostics_csv(load_filtered(cfg_.in));
  }
  WriteFile(cfg_.out, text);
}

void Pipeline::report() const {
  namespace fs = std::filesystem;
  if (cfg_.in.empty()) Fail(ErrorCode::kUsage, "--in is required");
  if (cfg_.out.empty()) Fail(ErrorCode::kUsage, "--out (directory) is required");
  fs::create_directories(cfg_.out);
  auto path = [&](const char* name) { return (fs::path(cfg_.out) / name).string(); };

  Corpus corpus = load_filtered(cfg_.in);
  LabelSource source;
  LabelMap labels = labels_for(corpus, &source);

  json manifest;
  manifest["input"] = cfg_.in;
  manifest["label_source"] = std::string(Name(source));
  manifest["mode"] = std::string(Name(cfg_.mode));
  manifest["exploit"] = cfg_.exploit_no_setup ? "no-setup" : "with-setup";
  manifest["seed"] = cfg_.seed;
  manifest["n_traces"] = corpus.size();
  manifest["checkpoints"] = corpus.checkpoints();
  json files = json::array();
  json skipped = json::object();
  auto write = [&](const char* name, const std::string& text) {
    WriteFile(path(name), text);
    files.push_back(name);
  };

  write("spans.jsonl", spans_jsonl(corpus));
  write("labels.jsonl", labels_jsonl(labels, source));
  write("primitive_counts.csv", primitive_counts_csv(corpus, labels));
  write("traces.csv", traces_csv(corpus, labels));
  write("motifs.csv", motifs_csv(corpus, labels));
  write("categories.csv", categories_csv(corpus, labels));
  write("metrics.csv", metrics_csv(corpus, labels));
  write("depth_ci.csv", depth_ci_csv(corpus, labels));
  write("mwu.csv", mwu_csv(corpus, labels));

  bool any_correctness = std::any_of(
      corpus.records().begin(), corpus.records().end(),
      [](const RolloutRecord& r) { return r.correct.has_value(); });
  SolveMatrix solves;
  if (!cfg_.solves.empty()) {
    solves = solves_from(cfg_.solves);
  } else if (any_correctness) {
    solves = SolvesFromCorpus(corpus);
  }
  if (!solves.empty()) {
    // --k drives motif lengths here, so pass@k uses its default ladder.
    RunConfig pk = cfg_;
    pk.k.clear();
    write("passk.csv", Pipeline(pk).passk_csv(solves));
    std::vector<std::string> pair = cfg_.checkpoints;
    if (pair.empty()) pair = solves.checkpoints();
    if (pair.size() == 2) {
      write("splits.json", splits_json(solves));
    } else {
      skipped["splits.json"] = "needs exactly two checkpoints";
    }
  } else {
    skipped["passk.csv"] = "no correctness data";
  }

  bool all_nlls = !corpus.empty() &&
                  std::all_of(corpus.records().begin(), corpus.records().end(),
                              [](const RolloutRecord& r) {
                                return r.token_nlls.has_value();
                              });
  if (all_nlls) {
    write("novelty.csv", novelty_csv(corpus));
    RunConfig dk = cfg_;
    dk.k.clear();
    write("diagnostics.csv", Pipeline(dk).diagnostics_csv(corpus));
  } else {
    skipped["novelty.csv"] = "token_nlls missing for some rollouts";
    skipped["diagnostics.csv"] = "token_nlls missing for some rollouts";
  }

  if (!cfg_.puzzles.empty()) {
    write("rewards.csv", rewards_csv(corpus, LoadPuzzles(cfg_.puzzles)));
  }

  manifest["files"] = files;
  manifest["skipped"] = skipped;
  WriteFile(path("manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace primtrace
