#ifndef PRIMTRACE_VERIFIERS_HPP
#define PRIMTRACE_VERIFIERS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace primtrace {

enum class PuzzleKind { kBridges, kPattern, kUndead, kGalaxies };
std::string_view Name(PuzzleKind kind);
std::optional<PuzzleKind> ParsePuzzleKind(std::string_view name);

// Row-major cell grid, one character per cell.
//   BRIDGES   island digit, '.', '-' '=' (single/double horizontal),
//             '|' 'H' (single/double vertical)
//   PATTERN   '#' filled, '.' empty
//   UNDEAD    'G' 'V' 'Z' monsters, '/' '\' mirrors, '.' empty
//   GALAXIES  galaxy index via GalaxyChar(i), '.' unassigned
struct BoardGrid {
  std::vector<std::string> rows;

  int height() const { return static_cast<int>(rows.size()); }
  int width() const {
    return rows.empty() ? 0 : static_cast<int>(rows.front().size());
  }
  char at(int r, int c) const { return rows[r][c]; }
  bool has_shape(int w, int h) const;
  bool operator==(const BoardGrid&) const = default;
};

struct BridgesClues {
  struct Island {
    int row = 0, col = 0, digit = 0;
  };
  std::vector<Island> islands;
};

struct PatternClues {
  std::vector<std::vector<int>> rows, cols;
};

// Mirrors are read from the initial board. A missing border clue is
// nullopt.
struct UndeadClues {
  int ghosts = 0, vampires = 0, zombies = 0;
  std::vector<std::optional<int>> top, bottom, left, right;
};

// Dots in half-grid coordinates: the centre of cell (r, c) is
// (x2, y2) = (2c + 1, 2r + 1).
struct GalaxiesClues {
  struct Dot {
    int x2 = 0, y2 = 0;
  };
  std::vector<Dot> dots;
};

using PuzzleClues =
    std::variant<BridgesClues, PatternClues, UndeadClues, GalaxiesClues>;

struct PuzzleInstance {
  std::string id;
  PuzzleKind kind = PuzzleKind::kPattern;
  int width = 0, height = 0;
  BoardGrid initial;
  std::optional<BoardGrid> gold;
  PuzzleClues clues;

  // Throws Error(kStructure) when clues and dimensions disagree.
  void validate() const;
};

char GalaxyChar(std::size_t index);
std::optional<std::size_t> GalaxyIndex(char c);

// Symbols the kind admits for this instance.
std::string Alphabet(const PuzzleInstance& instance);

PuzzleInstance ParsePuzzle(std::string_view json_line,
                           const std::string& default_id = {});
std::vector<PuzzleInstance> ParsePuzzles(std::string_view jsonl);
std::vector<PuzzleInstance> LoadPuzzles(const std::string& path);

struct VerifyResult {
  bool ok = false;
  std::string diagnostic;  // first failed rule, empty when ok
};

// Throws Error(kStructure) on a shape or alphabet mismatch; rule failures
// come back as ok == false.
VerifyResult Verify(const PuzzleInstance& instance, const BoardGrid& candidate);

// f^3 with f the weighted matched-cell fraction; cells where gold differs
// from the initial board weigh 2. Zero on a shape mismatch.
double CompletionReward(const PuzzleInstance& instance, const BoardGrid& gold,
                        const BoardGrid& candidate);

inline constexpr double kCompletionPower = 3.0;
inline constexpr double kChangedCellWeight = 2.0;
inline constexpr double kFormatCoefficient = 0.1;

struct FormatChecks {
  bool one_reasoning_pair = false;
  bool one_answer_pair = false;
  bool reasoning_before_answer = false;
  bool no_duplicate_openers = false;

  double score() const;
};

FormatChecks CheckFormat(std::string_view response);
double FormatReward(std::string_view response);

// Rows of the first closed <answer> pair; whitespace inside a row is
// ignored, blank lines and code fences are skipped.
std::optional<BoardGrid> ParseAnswerGrid(std::string_view response);

struct RewardBreakdown {
  double exact = 0.0;
  double completion = 0.0;
  double format = 0.0;
  double novelty = 0.0;
  double total = 0.0;

  void update_total() {
    total = exact + completion + kFormatCoefficient * format + novelty;
  }
};

RewardBreakdown BaseReward(const PuzzleInstance& instance, const BoardGrid& gold,
                           std::string_view response);

}  // namespace primtrace

#endif  // PRIMTRACE_VERIFIERS_HPP
