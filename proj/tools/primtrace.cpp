// primtrace command-line front end. Talks to the library only through the
// C interface.
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "primtrace/primtrace.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

struct Flag {
  const char* name;
  const char* help;
};

// Every option is forwarded verbatim to pt_config_set under its long name.
const Flag kValueFlags[] = {
    {"in", "input file (rollouts.jsonl, solves.csv or puzzles.jsonl)"},
    {"out", "output file, or output directory for report"},
    {"checkpoint", "comma separated checkpoint filter"},
    {"k", "k list or range, e.g. 1,2,4 or 2-15"},
    {"mode", "overlapping|non-overlapping"},
    {"exploit", "with-setup|no-setup"},
    {"alpha", "novelty bonus scale"},
    {"topk", "top-k tokens for the novelty score"},
    {"zclip", "z-score clip"},
    {"seed", "bootstrap seed"},
    {"labels", "imported labels.jsonl"},
    {"puzzles", "puzzles.jsonl (reward, report)"},
    {"answers", "answers.jsonl (verify)"},
    {"solves", "solves.csv (report)"},
    {"min-group", "minimum correct rollouts per group"},
    {"std", "population|sample"},
    {"min-tokens", "segment lower bound"},
    {"max-tokens", "segment upper bound"},
    {"tail-tokens", "tail merge threshold"},
    {"min-count-short", "motif threshold for k <= 5"},
    {"min-count-long", "motif threshold for k > 5"},
    {"compute-density", "symbol density for COMPUTE"},
    {"bootstrap-iters", "bootstrap resamples"},
    {"level", "confidence level"},
};

int Fail(pt_status status) {
  std::fprintf(stderr, "primtrace: %s error: %s\n", pt_status_name(status),
               pt_last_error_message());
  return status == PT_ERR_USAGE ? kExitUsage : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"primtrace: reasoning trace analysis"};
  app.set_config("--config", "", "file of the same flags (TOML/INI)");
  app.allow_config_extras(false);

  std::string subcommand;
  app.add_option("subcommand", subcommand,
                 "segment|classify|motifs|metrics|passk|split|verify|reward|"
                 "novelty|diagnostics|report")
      ->required();

  std::vector<std::pair<const char*, std::string>> values;
  values.reserve(std::size(kValueFlags));
  for (const Flag& f : kValueFlags) {
    values.emplace_back(f.name, std::string());
    app.add_option(std::string("--") + f.name, values.back().second, f.help);
  }
  bool novelty = false;
  app.add_flag("--novelty", novelty, "add the novelty bonus to rewards");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (!pt_is_subcommand(subcommand.c_str())) {
    std::fprintf(stderr, "primtrace: unknown subcommand '%s'\n%s",
                 subcommand.c_str(), app.help().c_str());
    return kExitUsage;
  }

  pt_config* cfg = nullptr;
  if (pt_status s = pt_config_new(&cfg); s != PT_OK) return Fail(s);
  int rc = 0;
  for (const auto& [name, value] : values) {
    if (app.count(std::string("--") + name) == 0) continue;
    if (pt_status s = pt_config_set(cfg, name, value.c_str()); s != PT_OK) {
      rc = Fail(s);
      break;
    }
  }
  if (rc == 0 && novelty) {
    if (pt_status s = pt_config_set(cfg, "novelty", "true"); s != PT_OK) {
      rc = Fail(s);
    }
  }
  if (rc == 0) {
    if (pt_status s = pt_run(subcommand.c_str(), cfg); s != PT_OK) rc = Fail(s);
  }
  pt_config_free(cfg);
  return rc;
}
