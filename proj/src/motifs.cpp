#include "primtrace/motifs.hpp"

#include <algorithm>

#include "primtrace/error.hpp"

namespace primtrace {

namespace {

void CheckK(int k) {
  if (k < kMinMotifK || k > kMaxMotifK) {
    Fail(ErrorCode::kParameter,
         "motif length k=" + std::to_string(k) + " outside [2, 15]");
  }
}

bool WindowHasBreak(const BreakSequence& seq, std::size_t i, int k) {
  for (int j = 0; j < k; ++j) {
    if (seq.tokens[i + j] == MotifToken::kBreak) return true;
  }
  return false;
}

Motif WindowMotif(const BreakSequence& seq, std::size_t i, int k) {
  Motif m(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    m[j] = static_cast<Primitive>(seq.tokens[i + j]);
  }
  return m;
}

// Counts every motif of length k in one trace.
std::map<Motif, std::size_t> CountAll(const BreakSequence& seq, int k,
                                      CountMode mode) {
  std::map<Motif, std::size_t> counts;
  std::size_t len = seq.tokens.size();
  if (len < static_cast<std::size_t>(k)) return counts;
  std::map<Motif, std::size_t> next_free;  // for non-overlapping
  for (std::size_t i = 0; i + k <= len; ++i) {
    if (WindowHasBreak(seq, i, k)) continue;
    Motif m = WindowMotif(seq, i, k);
    if (mode == CountMode::kNonOverlapping) {
      auto [it, fresh] = next_free.try_emplace(m, 0);
      if (!fresh && i < it->second) continue;
      it->second = i + k;
    }
    ++counts[m];
  }
  return counts;
}

}  // namespace

std::string_view Name(CountMode mode) {
  return mode == CountMode::kOverlapping ? "overlapping" : "non-overlapping";
}

std::optional<CountMode> ParseCountMode(std::string_view name) {
  if (name == "overlapping") return CountMode::kOverlapping;
  if (name == "non-overlapping" || name == "non_overlapping") {
    return CountMode::kNonOverlapping;
  }
  return std::nullopt;
}

BreakSequence ApplyBreaks(std::span<const Primitive> labels) {
  BreakSequence out;
  out.tokens.reserve(labels.size());
  for (Primitive p : labels) {
    out.tokens.push_back(p == Primitive::kOther
                             ? MotifToken::kBreak
                             : static_cast<MotifToken>(p));
  }
  return out;
}

std::vector<MotifCount> ExtractKgrams(const BreakSequence& seq, int k,
                                      CountMode mode) {
  CheckK(k);
  std::vector<MotifCount> out;
  for (auto& [m, c] : CountAll(seq, k, mode)) out.push_back({m, c});
  return out;
}

std::size_t CountMotif(const BreakSequence& seq, const Motif& motif,
                       CountMode mode) {
  std::size_t k = motif.size();
  if (k == 0 || seq.tokens.size() < k) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + k <= seq.tokens.size();) {
    bool hit = true;
    for (std::size_t j = 0; j < k && hit; ++j) {
      hit = seq.tokens[i + j] != MotifToken::kBreak &&
            static_cast<Primitive>(seq.tokens[i + j]) == motif[j];
    }
    if (hit) {
      ++n;
      i += mode == CountMode::kNonOverlapping ? k : 1;
    } else {
      ++i;
    }
  }
  return n;
}

std::optional<double> NormalizedFrequency(std::size_t count, std::size_t length,
                                          int k) {
  if (k <= 0 || length < static_cast<std::size_t>(k)) return std::nullopt;
  return static_cast<double>(count) / static_cast<double>(length - k + 1);
}

std::string MotifName(const Motif& motif) {
  std::string out;
  for (std::size_t i = 0; i < motif.size(); ++i) {
    if (i) out += '-';
    out += Name(motif[i]);
  }
  return out;
}

bool InAllowedMiddle(Primitive p) {
  switch (p) {
    case Primitive::kPlan:
    case Primitive::kSetup:
    case Primitive::kEnumerate:
    case Primitive::kCompute:
    case Primitive::kSummarize:
    case Primitive::kOther:
      return true;
    default:
      return false;
  }
}

bool IsRecoveryWindow(std::span<const Primitive> w) {
  bool hyp = std::find(w.begin(), w.end(), Primitive::kHypothesize) != w.end();
  bool btk = std::find(w.begin(), w.end(), Primitive::kBacktrack) != w.end();
  return hyp && btk;
}

bool IsExploitationWindow(std::span<const Primitive> w) {
  using P = Primitive;
  if (w.size() == 3) {
    return w[0] == P::kCompute && w[1] == P::kCheck && w[2] == P::kCompute;
  }
  if (w.size() == 5) {
    return w[0] == P::kCheck && w[1] == P::kCompute && w[2] == P::kCheck &&
           w[3] == P::kCompute && w[4] == P::kCheck;
  }
  return false;
}

bool IsVerificationWindow(std::span<const Primitive> w) {
  using P = Primitive;
  if (w.size() == 3) {
    return w[0] == P::kCheck && w[2] == P::kCheck && InAllowedMiddle(w[1]);
  }
  if (w.size() == 5) {
    // CHECK-COMPUTE-CHECK-COMPUTE-CHECK is the exploitation chain and is
    // counted there only.
    return w[0] == P::kCheck && w[2] == P::kCheck && w[4] == P::kCheck &&
           InAllowedMiddle(w[1]) && InAllowedMiddle(w[3]) &&
           !IsExploitationWindow(w);
  }
  return false;
}

CategoryCounts CountCategories(std::span<const Primitive> labels, int k) {
  if (k != 3 && k != 5) {
    Fail(ErrorCode::kParameter,
         "category window length must be 3 or 5, got " + std::to_string(k));
  }
  CategoryCounts c;
  std::size_t uk = static_cast<std::size_t>(k);
  for (std::size_t i = 0; i + uk <= labels.size(); ++i) {
    auto w = labels.subspan(i, uk);
    if (IsRecoveryWindow(w)) ++c.recovery;
    if (IsExploitationWindow(w)) ++c.exploitation;
    if (IsVerificationWindow(w)) ++c.verification;
  }
  return c;
}

MotifAccumulator::MotifAccumulator(int k_min, int k_max, CountMode mode)
    : k_min_(k_min), k_max_(k_max), mode_(mode) {
  CheckK(k_min);
  CheckK(k_max);
  if (k_min > k_max) {
    Fail(ErrorCode::kParameter, "empty motif length range");
  }
  eligible_.assign(static_cast<std::size_t>(k_max + 1), 0);
  stats_.resize(static_cast<std::size_t>(k_max + 1));
}

void MotifAccumulator::add(std::span<const Primitive> labels) {
  ++n_traces_;
  BreakSequence seq = ApplyBreaks(labels);
  std::size_t len = seq.tokens.size();
  for (int k = k_min_; k <= k_max_; ++k) {
    if (len < static_cast<std::size_t>(k)) break;
    ++eligible_[k];
    double windows = static_cast<double>(len - k + 1);
    auto& table = stats_[k];
    for (auto& [m, c] : CountAll(seq, k, mode_)) {
      Stat& s = table[m];
      s.raw += c;
      s.freq_sum += static_cast<double>(c) / windows;
    }
  }
}

void MotifAccumulator::merge(const MotifAccumulator& other) {
  if (other.k_min_ != k_min_ || other.k_max_ != k_max_ ||
      other.mode_ != mode_) {
    Fail(ErrorCode::kParameter, "cannot merge differently configured motif "
                                "accumulators");
  }
  n_traces_ += other.n_traces_;
  for (int k = k_min_; k <= k_max_; ++k) {
    eligible_[k] += other.eligible_[k];
    for (const auto& [m, s] : other.stats_[k]) {
      Stat& mine = stats_[k][m];
      mine.raw += s.raw;
      mine.freq_sum += s.freq_sum;
    }
  }
}

MotifTable MotifAccumulator::finalize(const std::string& checkpoint,
                                      const MotifFilter& filter) const {
  MotifTable table{checkpoint, mode_, filter, n_traces_, {}};
  for (int k = k_min_; k <= k_max_; ++k) {
    std::vector<MotifRow> rows;
    for (const auto& [m, s] : stats_[k]) {
      if (s.raw < filter.threshold(k)) continue;
      MotifRow row;
      row.k = k;
      row.motif = m;
      row.raw_count = s.raw;
      row.mean_per_trace_count =
          static_cast<double>(s.raw) / static_cast<double>(n_traces_);
      row.mean_normalized_freq =
          s.freq_sum / static_cast<double>(eligible_[k]);
      rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const MotifRow& a, const MotifRow& b) {
                       return a.raw_count > b.raw_count;
                     });
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

}  // namespace primtrace
