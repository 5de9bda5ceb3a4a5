#ifndef PRIMTRACE_METRICS_HPP
#define PRIMTRACE_METRICS_HPP

#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "primtrace/corpus.hpp"
#include "primtrace/primitives.hpp"

namespace primtrace {

class ExploitSet {
 public:
  // Throws Error(kParameter) when empty or containing OTHER.
  ExploitSet(std::initializer_list<Primitive> members);

  static ExploitSet WithSetup();  // {COMPUTE, CHECK, SETUP}
  static ExploitSet NoSetup();    // {COMPUTE, CHECK}
  // "with-setup" | "no-setup"
  static std::optional<ExploitSet> FromName(std::string_view name);

  bool contains(Primitive p) const {
    return bits_.test(static_cast<std::size_t>(p));
  }
  bool subset_of(const ExploitSet& other) const {
    return (bits_ & ~other.bits_).none();
  }

 private:
  std::bitset<kNumPrimitives> bits_;
};

// Lengths of maximal contiguous exploit blocks, in order.
std::vector<std::size_t> ExploitRuns(std::span<const Primitive> labels,
                                     const ExploitSet& exploit);
std::size_t ChainDepth(std::span<const Primitive> labels,
                       const ExploitSet& exploit);
// nullopt when the trace has no exploit run.
std::optional<double> MeanExploitRun(std::span<const Primitive> labels,
                                     const ExploitSet& exploit);

using Rational = boost::multiprecision::cpp_rational;

// 1 - C(n-c, k) / C(n, k). Throws Error(kParameter) unless 1 <= k <= n and
// 0 <= c <= n.
Rational PassAtKExact(std::int64_t n, std::int64_t c, std::int64_t k);
double PassAtK(std::int64_t n, std::int64_t c, std::int64_t k);

struct SolveCount {
  std::int64_t n = 0;  // rollouts sampled
  std::int64_t c = 0;  // rollouts verified correct
  bool solved() const { return c >= 1; }
};

// problem -> counts for one checkpoint
using SolveColumn = std::map<std::string, SolveCount>;

// checkpoint -> column
class SolveMatrix {
 public:
  void set(const std::string& checkpoint, const std::string& problem,
           SolveCount count);
  const SolveColumn& column(const std::string& checkpoint) const;
  std::vector<std::string> checkpoints() const;
  bool empty() const { return columns_.empty(); }

 private:
  std::map<std::string, SolveColumn> columns_;
};

// solves.csv: problem_id,checkpoint,n,c
SolveMatrix ParseSolves(std::string_view csv);
SolveMatrix LoadSolves(const std::string& path);
// n = rollouts per prompt, c = rollouts with correct == true.
SolveMatrix SolvesFromCorpus(const Corpus& corpus);

struct SolveSplit {
  std::vector<std::string> both, only_a, only_b, neither;
};

// "Solved" means c >= 1. Throws Error(kParameter) when the problem sets
// differ.
SolveSplit SplitSolves(const SolveColumn& a, const SolveColumn& b);

struct MannWhitneyResult {
  double u = 0.0;  // U of the first sample
  double p = 1.0;  // two-sided
  bool exact = false;
};

inline constexpr std::size_t kExactMannWhitneyMaxProduct = 400;

// Midranks for ties. Exact permutation p when |x|*|y| <= 400, otherwise
// the tie-corrected normal approximation with continuity correction.
MannWhitneyResult MannWhitneyU(std::span<const double> x,
                               std::span<const double> y);
double MannWhitneyExactP(std::span<const double> x, std::span<const double> y);
double MannWhitneyNormalP(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the mean.
Interval BootstrapCi(std::span<const double> values, double level,
                     std::size_t iterations, std::uint64_t seed);

// Nearest-rank percentile, 0 <= q <= 1.
double DepthPercentile(std::span<const double> values, double q);

}  // namespace primtrace

#endif  // PRIMTRACE_METRICS_HPP
