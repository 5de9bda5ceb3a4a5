#include "primtrace/primtrace.h"

#include <new>
#include <string>
#include <vector>

#include "primtrace/error.hpp"
#include "primtrace/pipeline.hpp"

struct pt_corpus {
  primtrace::Corpus corpus;
};

struct pt_config {
  primtrace::RunConfig cfg;
};

struct pt_spans {
  std::vector<primtrace::Span> spans;
};

struct pt_puzzle {
  primtrace::PuzzleInstance instance;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_diagnostic;

pt_status Ok() {
  g_last_error.clear();
  return PT_OK;
}

pt_status Bad(pt_status status, std::string what) {
  g_last_error = std::move(what);
  return status;
}

// Runs `fn`, translating exceptions to status codes.
template <typename Fn>
pt_status Guard(Fn&& fn) {
  try {
    fn();
    return Ok();
  } catch (const primtrace::Error& e) {
    return Bad(static_cast<pt_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Bad(PT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Bad(PT_ERR_INTERNAL, e.what());
  } catch (...) {
    return Bad(PT_ERR_INTERNAL, "unknown error");
  }
}

#define PT_REQUIRE(ptr)                                      \
  do {                                                       \
    if (!(ptr)) return Bad(PT_ERR_USAGE, #ptr " is NULL");   \
  } while (0)

std::vector<primtrace::Primitive> ToLabels(const int* labels, size_t n) {
  std::vector<primtrace::Primitive> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 ||
        labels[i] >= static_cast<int>(primtrace::kNumPrimitives)) {
      primtrace::Fail(primtrace::ErrorCode::kParameter,
                      "primitive label out of range: " +
                          std::to_string(labels[i]));
    }
    out.push_back(static_cast<primtrace::Primitive>(labels[i]));
  }
  return out;
}

}  // namespace

extern "C" {

const char* pt_status_name(pt_status status) {
  switch (status) {
    case PT_OK: return "ok";
    case PT_ERR_PARSE: return "parse";
    case PT_ERR_INTEGRITY: return "integrity";
    case PT_ERR_LOOKUP: return "lookup";
    case PT_ERR_PARAMETER: return "parameter";
    case PT_ERR_ALIGNMENT: return "alignment";
    case PT_ERR_DATA: return "data";
    case PT_ERR_STRUCTURE: return "structure";
    case PT_ERR_IO: return "io";
    case PT_ERR_USAGE: return "usage";
    case PT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pt_last_error_message(void) { return g_last_error.c_str(); }

const char* pt_version(void) { return "0.1.0"; }

pt_status pt_corpus_load(const char* path, pt_corpus** out) {
  PT_REQUIRE(path);
  PT_REQUIRE(out);
  *out = nullptr;
  return Guard([&] { *out = new pt_corpus{primtrace::LoadCorpus(path)}; });
}

pt_status pt_corpus_parse(const char* text, size_t len, pt_corpus** out) {
  PT_REQUIRE(text);
  PT_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    *out = new pt_corpus{primtrace::ParseCorpus(std::string_view(text, len))};
  });
}

void pt_corpus_free(pt_corpus* corpus) { delete corpus; }

pt_status pt_corpus_record_count(const pt_corpus* corpus, size_t* out) {
  PT_REQUIRE(corpus);
  PT_REQUIRE(out);
  *out = corpus->corpus.size();
  return Ok();
}

pt_status pt_corpus_checkpoint_count(const pt_corpus* corpus, size_t* out) {
  PT_REQUIRE(corpus);
  PT_REQUIRE(out);
  return Guard([&] { *out = corpus->corpus.checkpoints().size(); });
}

pt_status pt_corpus_save(const pt_corpus* corpus, const char* path) {
  PT_REQUIRE(corpus);
  PT_REQUIRE(path);
  return Guard([&] { primtrace::WriteCorpus(corpus->corpus, path); });
}

pt_status pt_config_new(pt_config** out) {
  PT_REQUIRE(out);
  *out = nullptr;
  return Guard([&] { *out = new pt_config{}; });
}

void pt_config_free(pt_config* cfg) { delete cfg; }

pt_status pt_config_set(pt_config* cfg, const char* key, const char* value) {
  PT_REQUIRE(cfg);
  PT_REQUIRE(key);
  PT_REQUIRE(value);
  return Guard([&] { cfg->cfg.set(key, value); });
}

pt_status pt_run(const char* subcommand, const pt_config* cfg) {
  PT_REQUIRE(subcommand);
  PT_REQUIRE(cfg);
  return Guard([&] { primtrace::Pipeline(cfg->cfg).run(subcommand); });
}

int pt_is_subcommand(const char* name) {
  return name && primtrace::IsSubcommand(name) ? 1 : 0;
}

size_t pt_estimate_tokens(const char* text, size_t len) {
  return text ? primtrace::EstimateTokens(std::string_view(text, len)) : 0;
}

pt_status pt_segment(const char* block, size_t len, size_t min_tokens,
                     size_t max_tokens, size_t tail_tokens, pt_spans** out) {
  PT_REQUIRE(block);
  PT_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    auto cfg = primtrace::SegmenterConfig::Defaults();
    if (min_tokens) cfg.min_tokens = min_tokens;
    if (max_tokens) cfg.max_tokens = max_tokens;
    if (tail_tokens) cfg.tail_merge_tokens = tail_tokens;
    *out = new pt_spans{primtrace::Segment(std::string_view(block, len), cfg)};
  });
}

size_t pt_spans_count(const pt_spans* spans) {
  return spans ? spans->spans.size() : 0;
}

pt_status pt_spans_get(const pt_spans* spans, size_t i, pt_span* out) {
  PT_REQUIRE(spans);
  PT_REQUIRE(out);
  if (i >= spans->spans.size()) {
    return Bad(PT_ERR_PARAMETER, "span index out of range");
  }
  const auto& s = spans->spans[i];
  *out = pt_span{s.start, s.end, s.est_tokens};
  return Ok();
}

void pt_spans_free(pt_spans* spans) { delete spans; }

pt_status pt_classify(const char* span, size_t span_len, const char* preceding,
                      size_t preceding_len, int* out) {
  PT_REQUIRE(span);
  PT_REQUIRE(out);
  return Guard([&] {
    std::string_view pre =
        preceding ? std::string_view(preceding, preceding_len) : std::string_view();
    *out = static_cast<int>(
        primtrace::ClassifyHeuristic(std::string_view(span, span_len), pre));
  });
}

pt_status pt_primitive_name(int label, const char** out) {
  PT_REQUIRE(out);
  if (label < 0 || label >= static_cast<int>(primtrace::kNumPrimitives)) {
    return Bad(PT_ERR_PARAMETER, "primitive label out of range");
  }
  *out = primtrace::Name(static_cast<primtrace::Primitive>(label)).data();
  return Ok();
}

pt_status pt_chain_depth(const int* labels, size_t n, int no_setup,
                         size_t* out) {
  PT_REQUIRE(out);
  if (n) PT_REQUIRE(labels);
  return Guard([&] {
    auto seq = ToLabels(labels, n);
    *out = primtrace::ChainDepth(seq, no_setup ? primtrace::ExploitSet::NoSetup()
                                              : primtrace::ExploitSet::WithSetup());
  });
}

pt_status pt_pass_at_k(int64_t n, int64_t c, int64_t k, double* out) {
  PT_REQUIRE(out);
  return Guard([&] { *out = primtrace::PassAtK(n, c, k); });
}

pt_status pt_mann_whitney_u(const double* x, size_t nx, const double* y,
                            size_t ny, double* u, double* p, int* exact) {
  PT_REQUIRE(x);
  PT_REQUIRE(y);
  return Guard([&] {
    auto r = primtrace::MannWhitneyU(std::span<const double>(x, nx),
                                     std::span<const double>(y, ny));
    if (u) *u = r.u;
    if (p) *p = r.p;
    if (exact) *exact = r.exact ? 1 : 0;
  });
}

pt_status pt_bootstrap_ci(const double* values, size_t n, double level,
                          size_t iterations, uint64_t seed, double* lo,
                          double* hi) {
  PT_REQUIRE(values);
  PT_REQUIRE(lo);
  PT_REQUIRE(hi);
  return Guard([&] {
    auto ci = primtrace::BootstrapCi(std::span<const double>(values, n), level,
                                     iterations, seed);
    *lo = ci.lo;
    *hi = ci.hi;
  });
}

pt_status pt_topk_nll_score(const double* nlls, const unsigned char* mask,
                            size_t n, size_t k, double* out) {
  PT_REQUIRE(nlls);
  PT_REQUIRE(out);
  return Guard([&] {
    std::vector<bool> m;
    if (mask) m.assign(mask, mask + n);
    *out = primtrace::TopKNllScore(std::span<const double>(nlls, n), m, k);
  });
}

pt_status pt_puzzle_parse(const char* json_line, pt_puzzle** out) {
  PT_REQUIRE(json_line);
  PT_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    *out = new pt_puzzle{primtrace::ParsePuzzle(json_line, "puzzle")};
  });
}

void pt_puzzle_free(pt_puzzle* puzzle) { delete puzzle; }

pt_status pt_puzzle_verify(const pt_puzzle* puzzle, const char* rows, int* ok,
                           const char** diagnostic) {
  PT_REQUIRE(puzzle);
  PT_REQUIRE(rows);
  PT_REQUIRE(ok);
  return Guard([&] {
    primtrace::BoardGrid grid;
    for (auto line : primtrace::SplitLines(rows)) {
      if (!line.empty()) grid.rows.emplace_back(line);
    }
    auto res = primtrace::Verify(puzzle->instance, grid);
    *ok = res.ok ? 1 : 0;
    g_diagnostic = res.diagnostic;
    if (diagnostic) *diagnostic = g_diagnostic.c_str();
  });
}

pt_status pt_puzzle_base_reward(const pt_puzzle* puzzle, const char* response,
                                pt_reward* out) {
  PT_REQUIRE(puzzle);
  PT_REQUIRE(response);
  PT_REQUIRE(out);
  if (!puzzle->instance.gold) {
    return Bad(PT_ERR_DATA, "puzzle has no gold board");
  }
  return Guard([&] {
    auto r = primtrace::BaseReward(puzzle->instance, *puzzle->instance.gold,
                                   response);
    *out = pt_reward{r.exact, r.completion, r.format, r.novelty, r.total};
  });
}

pt_status pt_format_reward(const char* response, size_t len, double* out) {
  PT_REQUIRE(response);
  PT_REQUIRE(out);
  return Guard(
      [&] { *out = primtrace::FormatReward(std::string_view(response, len)); });
}

}  // extern "C"
