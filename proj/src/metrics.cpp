#include "primtrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "primtrace/error.hpp"

namespace primtrace {

ExploitSet::ExploitSet(std::initializer_list<Primitive> members) {
  for (Primitive p : members) {
    if (p == Primitive::kOther) {
      Fail(ErrorCode::kParameter, "exploit set may not contain OTHER");
    }
    bits_.set(static_cast<std::size_t>(p));
  }
  if (bits_.none()) Fail(ErrorCode::kParameter, "exploit set is empty");
}

ExploitSet ExploitSet::WithSetup() {
  return {Primitive::kCompute, Primitive::kCheck, Primitive::kSetup};
}

ExploitSet ExploitSet::NoSetup() {
  return {Primitive::kCompute, Primitive::kCheck};
}

std::optional<ExploitSet> ExploitSet::FromName(std::string_view name) {
  if (name == "with-setup") return WithSetup();
  if (name == "no-setup") return NoSetup();
  return std::nullopt;
}

std::vector<std::size_t> ExploitRuns(std::span<const Primitive> labels,
                                     const ExploitSet& exploit) {
  std::vector<std::size_t> runs;
  std::size_t cur = 0;
  for (Primitive p : labels) {
    if (exploit.contains(p)) {
      ++cur;
    } else if (cur > 0) {
      runs.push_back(cur);
      cur = 0;
    }
  }
  if (cur > 0) runs.push_back(cur);
  return runs;
}

std::size_t ChainDepth(std::span<const Primitive> labels,
                       const ExploitSet& exploit) {
  std::size_t best = 0, cur = 0;
  for (Primitive p : labels) {
    cur = exploit.contains(p) ? cur + 1 : 0;
    best = std::max(best, cur);
  }
  return best;
}

std::optional<double> MeanExploitRun(std::span<const Primitive> labels,
                                     const ExploitSet& exploit) {
  auto runs = ExploitRuns(labels, exploit);
  if (runs.empty()) return std::nullopt;
  double total = std::accumulate(runs.begin(), runs.end(), 0.0);
  return total / static_cast<double>(runs.size());
}

namespace {

using boost::multiprecision::cpp_int;

cpp_int Binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  cpp_int r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

}  // namespace

Rational PassAtKExact(std::int64_t n, std::int64_t c, std::int64_t k) {
  if (k < 1 || k > n) {
    Fail(ErrorCode::kParameter, "pass@k needs 1 <= k <= n (n=" +
                                    std::to_string(n) +
                                    ", k=" + std::to_string(k) + ")");
  }
  if (c < 0 || c > n) {
    Fail(ErrorCode::kParameter, "pass@k needs 0 <= c <= n (n=" +
                                    std::to_string(n) +
                                    ", c=" + std::to_string(c) + ")");
  }
  return Rational(1) - Rational(Binomial(n - c, k), Binomial(n, k));
}

double PassAtK(std::int64_t n, std::int64_t c, std::int64_t k) {
  return PassAtKExact(n, c, k).convert_to<double>();
}

void SolveMatrix::set(const std::string& checkpoint, const std::string& problem,
                      SolveCount count) {
  if (count.n < 0 || count.c < 0 || count.c > count.n) {
    Fail(ErrorCode::kData, "solve counts for " + checkpoint + "/" + problem +
                               " violate 0 <= c <= n");
  }
  auto [it, inserted] = columns_[checkpoint].emplace(problem, count);
  if (!inserted) {
    Fail(ErrorCode::kIntegrity,
         "duplicate solve row for " + checkpoint + "/" + problem);
  }
}

const SolveColumn& SolveMatrix::column(const std::string& checkpoint) const {
  auto it = columns_.find(checkpoint);
  if (it == columns_.end()) {
    Fail(ErrorCode::kLookup, "unknown checkpoint '" + checkpoint + "'");
  }
  return it->second;
}

std::vector<std::string> SolveMatrix::checkpoints() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : columns_) out.push_back(name);
  return out;
}

namespace {

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    std::string_view cell = line.substr(
        pos, comma == std::string_view::npos ? line.npos : comma - pos);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
      cell.remove_prefix(1);
    }
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) {
      cell.remove_suffix(1);
    }
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::int64_t ParseCount(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                ": expected an integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

SolveMatrix ParseSolves(std::string_view csv) {
  SolveMatrix m;
  auto lines = SplitLines(csv);
  std::optional<std::array<std::size_t, 4>> cols;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    auto cells = SplitCsv(lines[i]);
    if (!cols) {
      std::array<std::string, 4> want = {"problem_id", "checkpoint", "n", "c"};
      std::array<std::size_t, 4> idx{};
      for (std::size_t w = 0; w < want.size(); ++w) {
        auto it = std::find(cells.begin(), cells.end(), want[w]);
        if (it == cells.end()) {
          Fail(ErrorCode::kParse, "line " + std::to_string(i + 1) +
                                      ": header lacks column '" + want[w] +
                                      "'");
        }
        idx[w] = static_cast<std::size_t>(it - cells.begin());
      }
      cols = idx;
      continue;
    }
    std::size_t need = *std::max_element(cols->begin(), cols->end());
    if (cells.size() <= need) {
      Fail(ErrorCode::kParse,
           "line " + std::to_string(i + 1) + ": too few columns");
    }
    SolveCount count{ParseCount(cells[(*cols)[2]], i + 1),
                     ParseCount(cells[(*cols)[3]], i + 1)};
    try {
      m.set(cells[(*cols)[1]], cells[(*cols)[0]], count);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return m;
}

SolveMatrix LoadSolves(const std::string& path) {
  try {
    return ParseSolves(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

SolveMatrix SolvesFromCorpus(const Corpus& corpus) {
  SolveMatrix m;
  for (const auto& ckpt : corpus.checkpoints()) {
    for (const auto& g : GroupByPrompt(corpus, ckpt)) {
      SolveCount count{static_cast<std::int64_t>(g.rollouts.size()), 0};
      for (const auto* r : g.rollouts) {
        if (r->correct.value_or(false)) ++count.c;
      }
      m.set(ckpt, g.prompt_id, count);
    }
  }
  return m;
}

SolveSplit SplitSolves(const SolveColumn& a, const SolveColumn& b) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(),
                  [](const auto& x, const auto& y) {
                    return x.first == y.first;
                  })) {
    Fail(ErrorCode::kParameter,
         "solve split needs both checkpoints over the same problems");
  }
  SolveSplit s;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    bool sa = ia->second.solved(), sb = ib->second.solved();
    auto& bucket = sa && sb ? s.both : sa ? s.only_a : sb ? s.only_b : s.neither;
    bucket.push_back(ia->first);
  }
  return s;
}

namespace {

struct RankedSamples {
  std::vector<std::int64_t> doubled_ranks;  // 2 * midrank, pooled order
  std::size_t nx = 0, ny = 0;
  double tie_term = 0.0;  // sum(t^3 - t)
  std::int64_t doubled_rank_sum_x = 0;
};

RankedSamples Rank(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) {
    Fail(ErrorCode::kParameter, "Mann-Whitney U needs two non-empty samples");
  }
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(x.size() + y.size());
  for (std::size_t i = 0; i < x.size(); ++i) pooled.push_back({x[i], i});
  for (std::size_t i = 0; i < y.size(); ++i) {
    pooled.push_back({y[i], x.size() + i});
  }
  std::sort(pooled.begin(), pooled.end());
  RankedSamples r;
  r.nx = x.size();
  r.ny = y.size();
  r.doubled_ranks.assign(pooled.size(), 0);
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    // ranks i+1..j, midrank (i+1+j)/2
    auto doubled = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      r.doubled_ranks[pooled[t].second] = doubled;
    }
    double t = static_cast<double>(j - i);
    r.tie_term += t * t * t - t;
    i = j;
  }
  for (std::size_t i = 0; i < r.nx; ++i) {
    r.doubled_rank_sum_x += r.doubled_ranks[i];
  }
  return r;
}

double UFromRanks(const RankedSamples& r) {
  double nx = static_cast<double>(r.nx);
  return static_cast<double>(r.doubled_rank_sum_x) / 2.0 - nx * (nx + 1) / 2.0;
}

double NormalP(const RankedSamples& r) {
  double nx = static_cast<double>(r.nx), ny = static_cast<double>(r.ny);
  double n = nx + ny;
  double mean = nx * ny / 2.0;
  double var = nx * ny / 12.0 * ((n + 1) - r.tie_term / (n * (n - 1)));
  if (!(var > 0.0)) return 1.0;
  double dev = std::abs(UFromRanks(r) - mean) - 0.5;
  if (dev <= 0.0) return 1.0;
  double z = dev / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double ExactP(const RankedSamples& r) {
  // Distribution of the doubled rank sum of a random subset of size m drawn
  // from the pooled ranks, m = the smaller sample.
  bool use_x = r.nx <= r.ny;
  std::size_t m = use_x ? r.nx : r.ny;
  std::int64_t total = 0;
  for (auto v : r.doubled_ranks) total += v;
  std::int64_t observed =
      use_x ? r.doubled_rank_sum_x : total - r.doubled_rank_sum_x;

  std::size_t width = static_cast<std::size_t>(total) + 1;
  // Processing ranks in ascending order bounds the sums reachable with j
  // picks by the j largest ranks seen so far.
  std::vector<std::int64_t> ranks = r.doubled_ranks;
  std::sort(ranks.begin(), ranks.end());
  std::vector<std::int64_t> prefix(ranks.size() + 1, 0);
  for (std::size_t i = 0; i < ranks.size(); ++i) prefix[i + 1] = prefix[i] + ranks[i];
  // ways[j][s]: subsets of size j with doubled rank sum s
  std::vector<std::vector<long double>> ways(
      m + 1, std::vector<long double>(width, 0.0L));
  ways[0][0] = 1.0L;
  for (std::size_t t = 0; t < ranks.size(); ++t) {
    const std::int64_t v = ranks[t];
    for (std::size_t j = std::min(m, t + 1); j >= 1; --j) {
      auto& dst = ways[j];
      const auto& src = ways[j - 1];
      std::int64_t top = prefix[t + 1] - prefix[t + 1 - j];
      std::int64_t bottom = v + prefix[j - 1];
      for (std::int64_t s = top; s >= bottom; --s) {
        dst[s] += src[s - v];
      }
    }
  }
  long double all = 0, lo = 0, hi = 0;
  for (std::size_t s = 0; s < width; ++s) {
    long double w = ways[m][s];
    all += w;
    if (static_cast<std::int64_t>(s) <= observed) lo += w;
    if (static_cast<std::int64_t>(s) >= observed) hi += w;
  }
  long double p = 2.0L * std::min(lo, hi) / all;
  return static_cast<double>(std::min<long double>(1.0L, p));
}

}  // namespace

MannWhitneyResult MannWhitneyU(std::span<const double> x,
                               std::span<const double> y) {
  RankedSamples r = Rank(x, y);
  MannWhitneyResult out;
  out.u = UFromRanks(r);
  out.exact = r.nx * r.ny <= kExactMannWhitneyMaxProduct;
  out.p = out.exact ? ExactP(r) : NormalP(r);
  return out;
}

double MannWhitneyExactP(std::span<const double> x,
                         std::span<const double> y) {
  return ExactP(Rank(x, y));
}

double MannWhitneyNormalP(std::span<const double> x,
                          std::span<const double> y) {
  return NormalP(Rank(x, y));
}

namespace {

double NearestRank(const std::vector<double>& sorted, double q) {
  auto n = static_cast<double>(sorted.size());
  // Guard against q*n landing a hair above an integer.
  double rank = std::ceil(q * n - 1e-9);
  std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

}  // namespace

Interval BootstrapCi(std::span<const double> values, double level,
                     std::size_t iterations, std::uint64_t seed) {
  if (values.empty()) {
    Fail(ErrorCode::kParameter, "bootstrap needs a non-empty sample");
  }
  if (!(level > 0.0 && level < 1.0)) {
    Fail(ErrorCode::kParameter, "bootstrap level must lie in (0, 1)");
  }
  if (iterations == 0) {
    Fail(ErrorCode::kParameter, "bootstrap needs at least one iteration");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(iterations);
  for (auto& mean : means) {
    // Running mean keeps a constant sample exactly constant.
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      m += (values[pick(rng)] - m) / static_cast<double>(i + 1);
    }
    mean = m;
  }
  std::sort(means.begin(), means.end());
  double alpha = (1.0 - level) / 2.0;
  return {NearestRank(means, alpha), NearestRank(means, 1.0 - alpha)};
}

double DepthPercentile(std::span<const double> values, double q) {
  if (values.empty()) {
    Fail(ErrorCode::kParameter, "percentile of an empty list");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    Fail(ErrorCode::kParameter, "percentile q must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return NearestRank(sorted, q);
}

}  // namespace primtrace
