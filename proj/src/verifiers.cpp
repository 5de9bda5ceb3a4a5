#include "primtrace/verifiers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <queue>

#include "json.hpp"
#include "primtrace/corpus.hpp"
#include "primtrace/error.hpp"

namespace primtrace {

namespace {

constexpr std::string_view kGalaxyChars =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

std::string Cell(int r, int c) {
  return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
}

VerifyResult Reject(std::string why) { return {false, std::move(why)}; }

bool IsDigit(char ch) { return ch >= '1' && ch <= '8'; }
bool IsMirror(char ch) { return ch == '/' || ch == '\\'; }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

std::string RunsText(const std::vector<int>& runs) {
  std::string s = "[";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(runs[i]);
  }
  return s + "]";
}

// Drops the "[0]" spelling of an empty line.
std::vector<int> NormalizeClue(const std::vector<int>& clue) {
  std::vector<int> out;
  for (int v : clue) {
    if (v != 0) out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------- BRIDGES

VerifyResult VerifyBridges(const PuzzleInstance& inst, const BridgesClues& cl,
                           const BoardGrid& g) {
  const int h = inst.height, w = inst.width;
  std::vector<int> island_at(static_cast<std::size_t>(w * h), -1);
  for (std::size_t i = 0; i < cl.islands.size(); ++i) {
    const auto& is = cl.islands[i];
    island_at[is.row * w + is.col] = static_cast<int>(i);
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int id = island_at[r * w + c];
      char ch = g.at(r, c);
      if (id >= 0 && ch != static_cast<char>('0' + cl.islands[id].digit)) {
        return Reject("island at " + Cell(r, c) + " altered");
      }
      if (id < 0 && IsDigit(ch)) {
        return Reject("unexpected island at " + Cell(r, c));
      }
    }
  }

  std::vector<int> degree(cl.islands.size(), 0);
  DisjointSets sets(cl.islands.size());
  // Walks one line of cells; `horizontal` picks the symbols that belong to it.
  auto scan = [&](bool horizontal) -> std::optional<VerifyResult> {
    const char single = horizontal ? '-' : '|';
    const char dbl = horizontal ? '=' : 'H';
    const int lines = horizontal ? h : w, len = horizontal ? w : h;
    for (int a = 0; a < lines; ++a) {
      auto at = [&](int b) { return horizontal ? g.at(a, b) : g.at(b, a); };
      auto id = [&](int b) {
        return horizontal ? island_at[a * w + b] : island_at[b * w + a];
      };
      auto cell = [&](int b) { return horizontal ? Cell(a, b) : Cell(b, a); };
      for (int b = 0; b < len;) {
        char ch = at(b);
        if (ch != single && ch != dbl) {
          ++b;
          continue;
        }
        int e = b;
        while (e < len && (at(e) == single || at(e) == dbl)) {
          if (at(e) != ch) {
            return Reject("bridge multiplicity changes mid-span at " +
                          cell(e));
          }
          ++e;
        }
        if (b == 0 || e == len || id(b - 1) < 0 || id(e) < 0) {
          return Reject("bridge at " + cell(b) + " does not join two islands");
        }
        int mult = ch == dbl ? 2 : 1;
        degree[id(b - 1)] += mult;
        degree[id(e)] += mult;
        sets.unite(static_cast<std::size_t>(id(b - 1)),
                   static_cast<std::size_t>(id(e)));
        b = e;
      }
    }
    return std::nullopt;
  };
  if (auto fail = scan(true)) return *fail;
  if (auto fail = scan(false)) return *fail;

  for (std::size_t i = 0; i < cl.islands.size(); ++i) {
    const auto& is = cl.islands[i];
    if (degree[i] != is.digit) {
      return Reject("island at " + Cell(is.row, is.col) + " has " +
                    std::to_string(degree[i]) + " bridges, needs " +
                    std::to_string(is.digit));
    }
  }
  for (std::size_t i = 1; i < cl.islands.size(); ++i) {
    if (sets.find(i) != sets.find(0)) {
      return Reject("islands do not form one connected group (" +
                    Cell(cl.islands[i].row, cl.islands[i].col) +
                    " is cut off)");
    }
  }
  return {true, {}};
}

// ---------------------------------------------------------------- PATTERN

std::vector<int> Runs(const BoardGrid& g, int line, bool row) {
  std::vector<int> runs;
  int len = row ? g.width() : g.height();
  int cur = 0;
  for (int i = 0; i < len; ++i) {
    char ch = row ? g.at(line, i) : g.at(i, line);
    if (ch == '#') {
      ++cur;
    } else if (cur) {
      runs.push_back(cur);
      cur = 0;
    }
  }
  if (cur) runs.push_back(cur);
  return runs;
}

VerifyResult VerifyPattern(const PatternClues& cl, const BoardGrid& g) {
  for (int r = 0; r < g.height(); ++r) {
    auto runs = Runs(g, r, true);
    auto want = NormalizeClue(cl.rows[r]);
    if (runs != want) {
      return Reject("row " + std::to_string(r) + " runs " + RunsText(runs) +
                    " != clue " + RunsText(want));
    }
  }
  for (int c = 0; c < g.width(); ++c) {
    auto runs = Runs(g, c, false);
    auto want = NormalizeClue(cl.cols[c]);
    if (runs != want) {
      return Reject("column " + std::to_string(c) + " runs " + RunsText(runs) +
                    " != clue " + RunsText(want));
    }
  }
  return {true, {}};
}

// ----------------------------------------------------------------- UNDEAD

// Monsters seen along the ray entering at (r, c) heading (dr, dc).
int SightCount(const BoardGrid& g, int r, int c, int dr, int dc) {
  int seen = 0;
  bool reflected = false;
  const int limit = 4 * g.width() * g.height() + 4;
  for (int steps = 0; steps < limit; ++steps) {
    if (r < 0 || c < 0 || r >= g.height() || c >= g.width()) break;
    char ch = g.at(r, c);
    if (ch == '/') {
      // right -> up, up -> right, left -> down, down -> left
      std::swap(dr, dc);
      dr = -dr;
      dc = -dc;
      reflected = true;
    } else if (ch == '\\') {
      // right -> down, down -> right, left -> up, up -> left
      std::swap(dr, dc);
      reflected = true;
    } else if (ch == 'Z' || (ch == 'V' && !reflected) ||
               (ch == 'G' && reflected)) {
      ++seen;
    }
    r += dr;
    c += dc;
  }
  return seen;
}

VerifyResult VerifyUndead(const PuzzleInstance& inst, const UndeadClues& cl,
                          const BoardGrid& g) {
  int counts[3] = {0, 0, 0};  // G V Z
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      char want = inst.initial.at(r, c), ch = g.at(r, c);
      if (IsMirror(want) != IsMirror(ch) || (IsMirror(want) && want != ch)) {
        return Reject("mirror layout differs at " + Cell(r, c));
      }
      if (IsMirror(ch)) continue;
      if (ch == '.') return Reject("empty cell at " + Cell(r, c));
      ++counts[ch == 'G' ? 0 : ch == 'V' ? 1 : 2];
    }
  }
  if (counts[0] != cl.ghosts || counts[1] != cl.vampires ||
      counts[2] != cl.zombies) {
    return Reject("monster totals G/V/Z = " + std::to_string(counts[0]) + "/" +
                  std::to_string(counts[1]) + "/" + std::to_string(counts[2]) +
                  ", need " + std::to_string(cl.ghosts) + "/" +
                  std::to_string(cl.vampires) + "/" +
                  std::to_string(cl.zombies));
  }
  const int h = g.height(), w = g.width();
  auto check = [&](const std::vector<std::optional<int>>& clues,
                   const char* side, auto start) -> std::optional<VerifyResult> {
    for (std::size_t i = 0; i < clues.size(); ++i) {
      if (!clues[i]) continue;
      auto [r, c, dr, dc] = start(static_cast<int>(i));
      int seen = SightCount(g, r, c, dr, dc);
      if (seen != *clues[i]) {
        return Reject(std::string(side) + " clue " + std::to_string(i) +
                      " sees " + std::to_string(seen) + ", needs " +
                      std::to_string(*clues[i]));
      }
    }
    return std::nullopt;
  };
  using Start = std::array<int, 4>;
  if (auto f = check(cl.top, "top", [&](int i) { return Start{0, i, 1, 0}; }))
    return *f;
  if (auto f = check(cl.bottom, "bottom",
                     [&](int i) { return Start{h - 1, i, -1, 0}; }))
    return *f;
  if (auto f = check(cl.left, "left", [&](int i) { return Start{i, 0, 0, 1}; }))
    return *f;
  if (auto f = check(cl.right, "right",
                     [&](int i) { return Start{i, w - 1, 0, -1}; }))
    return *f;
  return {true, {}};
}

// --------------------------------------------------------------- GALAXIES

VerifyResult VerifyGalaxies(const GalaxiesClues& cl, const BoardGrid& g) {
  const int h = g.height(), w = g.width();
  const std::size_t n = cl.dots.size();
  std::vector<std::size_t> label(static_cast<std::size_t>(w * h));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      auto idx = GalaxyIndex(g.at(r, c));
      if (!idx || *idx >= n) {
        return Reject("cell " + Cell(r, c) + " belongs to no galaxy");
      }
      label[r * w + c] = *idx;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = cl.dots[i];
    // Cells touched by the dot: one, two or four.
    std::vector<int> rows, cols;
    if (d.y2 % 2) rows = {(d.y2 - 1) / 2}; else rows = {d.y2 / 2 - 1, d.y2 / 2};
    if (d.x2 % 2) cols = {(d.x2 - 1) / 2}; else cols = {d.x2 / 2 - 1, d.x2 / 2};
    for (int r : rows) {
      for (int c : cols) {
        if (label[r * w + c] != i) {
          return Reject("galaxy " + std::string(1, GalaxyChar(i)) +
                        " does not contain its dot cell " + Cell(r, c));
        }
      }
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::size_t i = label[r * w + c];
      const auto& d = cl.dots[i];
      int r2 = d.y2 - r - 1, c2 = d.x2 - c - 1;
      if (r2 < 0 || c2 < 0 || r2 >= h || c2 >= w || label[r2 * w + c2] != i) {
        return Reject("galaxy " + std::string(1, GalaxyChar(i)) +
                      " is not symmetric about its dot at " + Cell(r, c));
      }
    }
  }
  // Edge connectivity: flood from each dot's first cell.
  std::vector<char> seen(label.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = cl.dots[i];
    int r0 = (d.y2 - 1) / 2, c0 = (d.x2 - 1) / 2;
    std::queue<int> q;
    q.push(r0 * w + c0);
    seen[r0 * w + c0] = 1;
    while (!q.empty()) {
      int cur = q.front();
      q.pop();
      int r = cur / w, c = cur % w;
      const int dr[4] = {1, -1, 0, 0}, dc[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int nr = r + dr[k], nc = c + dc[k];
        if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
        int nxt = nr * w + nc;
        if (seen[nxt] || label[nxt] != i) continue;
        seen[nxt] = 1;
        q.push(nxt);
      }
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!seen[r * w + c]) {
        return Reject("galaxy " + std::string(1, GalaxyChar(label[r * w + c])) +
                      " is disconnected at " + Cell(r, c));
      }
    }
  }
  return {true, {}};
}

// ------------------------------------------------------------------ JSON

using nlohmann::json;

BoardGrid GridFromJson(const json& j, const char* field) {
  if (!j.is_array()) {
    Fail(ErrorCode::kParse, std::string("'") + field + "' must be a list");
  }
  BoardGrid g;
  for (const auto& row : j) g.rows.push_back(row.get<std::string>());
  return g;
}

std::vector<std::optional<int>> OptionalInts(const json& obj,
                                             const char* field) {
  std::vector<std::optional<int>> out;
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return out;
  for (const auto& v : *it) {
    out.push_back(v.is_null() ? std::nullopt
                              : std::optional<int>(v.get<int>()));
  }
  return out;
}

PuzzleClues CluesFromJson(PuzzleKind kind, const json& cl,
                          const BoardGrid& initial) {
  switch (kind) {
    case PuzzleKind::kBridges: {
      BridgesClues b;
      if (cl.contains("islands")) {
        for (const auto& t : cl.at("islands")) {
          b.islands.push_back({t.at(0).get<int>(), t.at(1).get<int>(),
                               t.at(2).get<int>()});
        }
      } else {
        for (int r = 0; r < initial.height(); ++r) {
          for (int c = 0; c < initial.width(); ++c) {
            if (IsDigit(initial.at(r, c))) {
              b.islands.push_back({r, c, initial.at(r, c) - '0'});
            }
          }
        }
      }
      return b;
    }
    case PuzzleKind::kPattern:
      return PatternClues{
          cl.at("rows").get<std::vector<std::vector<int>>>(),
          cl.at("cols").get<std::vector<std::vector<int>>>()};
    case PuzzleKind::kUndead: {
      UndeadClues u;
      const json& t = cl.at("totals");
      u.ghosts = t.value("G", 0);
      u.vampires = t.value("V", 0);
      u.zombies = t.value("Z", 0);
      u.top = OptionalInts(cl, "top");
      u.bottom = OptionalInts(cl, "bottom");
      u.left = OptionalInts(cl, "left");
      u.right = OptionalInts(cl, "right");
      return u;
    }
    case PuzzleKind::kGalaxies: {
      GalaxiesClues gc;
      for (const auto& t : cl.at("dots")) {
        gc.dots.push_back({t.at(0).get<int>(), t.at(1).get<int>()});
      }
      return gc;
    }
  }
  return PatternClues{};
}

}  // namespace

std::string_view Name(PuzzleKind kind) {
  switch (kind) {
    case PuzzleKind::kBridges:
      return "BRIDGES";
    case PuzzleKind::kPattern:
      return "PATTERN";
    case PuzzleKind::kUndead:
      return "UNDEAD";
    case PuzzleKind::kGalaxies:
      return "GALAXIES";
  }
  return "?";
}

std::optional<PuzzleKind> ParsePuzzleKind(std::string_view name) {
  std::string up(name);
  for (auto& ch : up) ch = static_cast<char>(std::toupper(ch));
  for (auto k : {PuzzleKind::kBridges, PuzzleKind::kPattern,
                 PuzzleKind::kUndead, PuzzleKind::kGalaxies}) {
    if (Name(k) == up) return k;
  }
  return std::nullopt;
}

bool BoardGrid::has_shape(int w, int h) const {
  if (height() != h) return false;
  return std::all_of(rows.begin(), rows.end(), [w](const std::string& r) {
    return static_cast<int>(r.size()) == w;
  });
}

char GalaxyChar(std::size_t index) {
  return index < kGalaxyChars.size() ? kGalaxyChars[index] : '?';
}

std::optional<std::size_t> GalaxyIndex(char c) {
  auto pos = kGalaxyChars.find(c);
  if (pos == std::string_view::npos) return std::nullopt;
  return pos;
}

std::string Alphabet(const PuzzleInstance& inst) {
  switch (inst.kind) {
    case PuzzleKind::kBridges:
      return "12345678.-=|H";
    case PuzzleKind::kPattern:
      return "#.";
    case PuzzleKind::kUndead:
      return "GVZ/\\.";
    case PuzzleKind::kGalaxies: {
      std::string a;
      const auto& gc = std::get<GalaxiesClues>(inst.clues);
      for (std::size_t i = 0; i < gc.dots.size(); ++i) a += GalaxyChar(i);
      return a + ".";
    }
  }
  return {};
}

void PuzzleInstance::validate() const {
  auto bad = [&](const std::string& why) {
    Fail(ErrorCode::kStructure, "puzzle '" + id + "': " + why);
  };
  if (width <= 0 || height <= 0) bad("dimensions must be positive");
  if (!initial.has_shape(width, height)) bad("initial board shape mismatch");
  if (gold && !gold->has_shape(width, height)) bad("gold board shape mismatch");
  auto in_range = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < height && c < width;
  };
  switch (kind) {
    case PuzzleKind::kBridges: {
      const auto& b = std::get<BridgesClues>(clues);
      for (const auto& is : b.islands) {
        if (!in_range(is.row, is.col)) bad("island out of range");
        if (is.digit < 1 || is.digit > 8) bad("island digit outside 1..8");
        if (initial.at(is.row, is.col) != static_cast<char>('0' + is.digit)) {
          bad("island clue disagrees with the initial board at " +
              Cell(is.row, is.col));
        }
      }
      break;
    }
    case PuzzleKind::kPattern: {
      const auto& p = std::get<PatternClues>(clues);
      if (static_cast<int>(p.rows.size()) != height ||
          static_cast<int>(p.cols.size()) != width) {
        bad("run-length clue counts must match the dimensions");
      }
      break;
    }
    case PuzzleKind::kUndead: {
      const auto& u = std::get<UndeadClues>(clues);
      auto sized = [&](const auto& v, int n) {
        return v.empty() || static_cast<int>(v.size()) == n;
      };
      if (!sized(u.top, width) || !sized(u.bottom, width) ||
          !sized(u.left, height) || !sized(u.right, height)) {
        bad("border clue counts must match the dimensions");
      }
      if (u.ghosts < 0 || u.vampires < 0 || u.zombies < 0) {
        bad("monster totals must be non-negative");
      }
      break;
    }
    case PuzzleKind::kGalaxies: {
      const auto& g = std::get<GalaxiesClues>(clues);
      if (g.dots.empty() || g.dots.size() > kGalaxyChars.size()) {
        bad("galaxies needs 1..62 dots");
      }
      for (const auto& d : g.dots) {
        if (d.x2 < 1 || d.y2 < 1 || d.x2 > 2 * width - 1 ||
            d.y2 > 2 * height - 1) {
          bad("dot outside the grid interior");
        }
      }
      break;
    }
  }
}

PuzzleInstance ParsePuzzle(std::string_view line,
                           const std::string& default_id) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("malformed JSON: ") + e.what());
  }
  PuzzleInstance p;
  try {
    p.id = obj.contains("id") ? obj.at("id").get<std::string>() : default_id;
    auto kind = ParsePuzzleKind(obj.at("kind").get<std::string>());
    if (!kind) {
      Fail(ErrorCode::kParse,
           "unknown puzzle kind '" + obj.at("kind").get<std::string>() + "'");
    }
    p.kind = *kind;
    p.width = obj.at("width").get<int>();
    p.height = obj.at("height").get<int>();
    p.initial = GridFromJson(obj.at("initial"), "initial");
    if (obj.contains("gold") && !obj.at("gold").is_null()) {
      p.gold = GridFromJson(obj.at("gold"), "gold");
    }
    p.clues = CluesFromJson(p.kind,
                            obj.contains("clues") ? obj.at("clues") : json::object(),
                            p.initial);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad puzzle record: ") + e.what());
  }
  p.validate();
  return p;
}

std::vector<PuzzleInstance> ParsePuzzles(std::string_view jsonl) {
  std::vector<PuzzleInstance> out;
  auto lines = SplitLines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      out.push_back(ParsePuzzle(lines[i], "puzzle-" + std::to_string(i + 1)));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PuzzleInstance> LoadPuzzles(const std::string& path) {
  try {
    return ParsePuzzles(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

VerifyResult Verify(const PuzzleInstance& inst, const BoardGrid& candidate) {
  if (!candidate.has_shape(inst.width, inst.height)) {
    Fail(ErrorCode::kStructure,
         "candidate shape differs from " + std::to_string(inst.width) + "x" +
             std::to_string(inst.height));
  }
  const std::string alphabet = Alphabet(inst);
  for (int r = 0; r < candidate.height(); ++r) {
    for (int c = 0; c < candidate.width(); ++c) {
      if (alphabet.find(candidate.at(r, c)) == std::string::npos) {
        Fail(ErrorCode::kStructure, "symbol '" +
                                        std::string(1, candidate.at(r, c)) +
                                        "' at " + Cell(r, c) +
                                        " is not in the " +
                                        std::string(Name(inst.kind)) +
                                        " alphabet");
      }
    }
  }
  switch (inst.kind) {
    case PuzzleKind::kBridges:
      return VerifyBridges(inst, std::get<BridgesClues>(inst.clues), candidate);
    case PuzzleKind::kPattern:
      return VerifyPattern(std::get<PatternClues>(inst.clues), candidate);
    case PuzzleKind::kUndead:
      return VerifyUndead(inst, std::get<UndeadClues>(inst.clues), candidate);
    case PuzzleKind::kGalaxies:
      return VerifyGalaxies(std::get<GalaxiesClues>(inst.clues), candidate);
  }
  return Reject("unknown kind");
}

double CompletionReward(const PuzzleInstance& inst, const BoardGrid& gold,
                        const BoardGrid& candidate) {
  if (!candidate.has_shape(inst.width, inst.height) ||
      !gold.has_shape(inst.width, inst.height) ||
      !inst.initial.has_shape(inst.width, inst.height)) {
    return 0.0;
  }
  double matched = 0.0, total = 0.0;
  for (int r = 0; r < inst.height; ++r) {
    for (int c = 0; c < inst.width; ++c) {
      double wgt = gold.at(r, c) != inst.initial.at(r, c) ? kChangedCellWeight
                                                           : 1.0;
      total += wgt;
      if (candidate.at(r, c) == gold.at(r, c)) matched += wgt;
    }
  }
  double f = matched / total;
  return f * f * f;
}

double FormatChecks::score() const {
  return 0.25 * (static_cast<int>(one_reasoning_pair) +
                 static_cast<int>(one_answer_pair) +
                 static_cast<int>(reasoning_before_answer) +
                 static_cast<int>(no_duplicate_openers));
}

namespace {

std::size_t Occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// Exactly one opener and one closer, in that order.
bool SingleClosedPair(std::string_view text, std::string_view open,
                      std::string_view close) {
  return Occurrences(text, open) == 1 && Occurrences(text, close) == 1 &&
         text.find(open) < text.find(close);
}

}  // namespace

FormatChecks CheckFormat(std::string_view response) {
  constexpr std::string_view ro = "<reasoning>", rc = "</reasoning>";
  constexpr std::string_view ao = "<answer>", ac = "</answer>";
  FormatChecks f;
  f.one_reasoning_pair = SingleClosedPair(response, ro, rc);
  f.one_answer_pair = SingleClosedPair(response, ao, ac);
  auto r = response.find(ro), a = response.find(ao);
  f.reasoning_before_answer =
      r != std::string_view::npos && a != std::string_view::npos && r < a;
  std::size_t nr = Occurrences(response, ro), na = Occurrences(response, ao);
  f.no_duplicate_openers = nr + na >= 1 && nr <= 1 && na <= 1;
  return f;
}

double FormatReward(std::string_view response) {
  return CheckFormat(response).score();
}

std::optional<BoardGrid> ParseAnswerGrid(std::string_view response) {
  constexpr std::string_view ao = "<answer>", ac = "</answer>";
  auto open = response.find(ao);
  if (open == std::string_view::npos) return std::nullopt;
  auto body = open + ao.size();
  auto close = response.find(ac, body);
  if (close == std::string_view::npos) return std::nullopt;
  BoardGrid g;
  for (std::string_view line : SplitLines(response.substr(body, close - body))) {
    std::string row;
    for (char ch : line) {
      if (ch != ' ' && ch != '\t' && ch != '\r') row += ch;
    }
    if (row.empty() || row.rfind("```", 0) == 0) continue;
    g.rows.push_back(std::move(row));
  }
  if (g.rows.empty()) return std::nullopt;
  return g;
}

RewardBreakdown BaseReward(const PuzzleInstance& inst, const BoardGrid& gold,
                           std::string_view response) {
  RewardBreakdown out;
  out.format = FormatReward(response);
  if (auto grid = ParseAnswerGrid(response)) {
    try {
      out.exact = Verify(inst, *grid).ok ? 1.0 : 0.0;
    } catch (const Error&) {
      out.exact = 0.0;
    }
    out.completion = CompletionReward(inst, gold, *grid);
  }
  out.update_total();
  return out;
}

}  // namespace primtrace
