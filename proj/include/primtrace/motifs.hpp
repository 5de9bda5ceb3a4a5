#ifndef PRIMTRACE_MOTIFS_HPP
#define PRIMTRACE_MOTIFS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "primtrace/primitives.hpp"

namespace primtrace {

// The eight reasoning primitives keep their Primitive values; OTHER becomes
// the __BREAK__ boundary.
enum class MotifToken : std::uint8_t {
  kPlan,
  kSetup,
  kEnumerate,
  kHypothesize,
  kCompute,
  kCheck,
  kBacktrack,
  kSummarize,
  kBreak,
};

struct BreakSequence {
  std::vector<MotifToken> tokens;
};

using Motif = std::vector<Primitive>;

enum class CountMode { kOverlapping, kNonOverlapping };
std::string_view Name(CountMode mode);
std::optional<CountMode> ParseCountMode(std::string_view name);

inline constexpr int kMinMotifK = 2;
inline constexpr int kMaxMotifK = 15;

BreakSequence ApplyBreaks(std::span<const Primitive> labels);

struct MotifCount {
  Motif motif;
  std::size_t count = 0;
  bool operator==(const MotifCount&) const = default;
};

// Sorted by motif. Windows touching a break are dropped. Throws
// Error(kParameter) unless 2 <= k <= 15.
std::vector<MotifCount> ExtractKgrams(const BreakSequence& seq, int k,
                                      CountMode mode);

// Occurrences of one motif; non-overlapping counts greedily left to right.
std::size_t CountMotif(const BreakSequence& seq, const Motif& motif,
                       CountMode mode);

// count / (L - k + 1); nullopt when L < k.
std::optional<double> NormalizedFrequency(std::size_t count, std::size_t length,
                                          int k);

// "CHECK-COMPUTE-CHECK"
std::string MotifName(const Motif& motif);

// Window predicates over the raw sequence (OTHER intact). Windows have
// length 3 or 5.
bool IsRecoveryWindow(std::span<const Primitive> w);
bool IsExploitationWindow(std::span<const Primitive> w);
bool IsVerificationWindow(std::span<const Primitive> w);
bool InAllowedMiddle(Primitive p);

struct CategoryCounts {
  std::size_t recovery = 0;
  std::size_t exploitation = 0;
  std::size_t verification = 0;
  bool operator==(const CategoryCounts&) const = default;
};

// k must be 3 or 5.
CategoryCounts CountCategories(std::span<const Primitive> labels, int k);

struct MotifFilter {
  std::size_t min_count_short = 5;  // applies to k <= short_k_max
  std::size_t min_count_long = 10;
  int short_k_max = 5;

  std::size_t threshold(int k) const {
    return k <= short_k_max ? min_count_short : min_count_long;
  }
};

struct MotifRow {
  int k = 0;
  Motif motif;
  std::size_t raw_count = 0;
  double mean_per_trace_count = 0.0;
  double mean_normalized_freq = 0.0;
};

struct MotifTable {
  std::string checkpoint;
  CountMode mode = CountMode::kOverlapping;
  MotifFilter filter;
  std::size_t n_traces = 0;
  // Ordered by k, then raw_count descending, then motif.
  std::vector<MotifRow> rows;
};

// Per-checkpoint aggregation; merge() is associative so partial
// accumulators can be reduced in any grouping.
class MotifAccumulator {
 public:
  MotifAccumulator(int k_min, int k_max, CountMode mode);

  void add(std::span<const Primitive> labels);
  void merge(const MotifAccumulator& other);
  MotifTable finalize(const std::string& checkpoint,
                      const MotifFilter& filter) const;

 private:
  struct Stat {
    std::size_t raw = 0;
    double freq_sum = 0.0;
  };
  int k_min_, k_max_;
  CountMode mode_;
  std::size_t n_traces_ = 0;
  // traces with L >= k, indexed by k
  std::vector<std::size_t> eligible_;
  std::vector<std::map<Motif, Stat>> stats_;
};

}  // namespace primtrace

#endif  // PRIMTRACE_MOTIFS_HPP
