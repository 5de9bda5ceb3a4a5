#include "primtrace/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "primtrace/error.hpp"

namespace primtrace {

using nlohmann::json;

std::string ToString(const TraceKey& key) {
  return key.checkpoint + "/" + key.prompt_id + "/" + key.rollout_id;
}

namespace {

std::string LineTag(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

std::string RequireString(const json& obj, const char* field,
                          std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    Fail(ErrorCode::kParse,
         LineTag(line_no) + "field '" + field + "' must be a string");
  }
  return it->get<std::string>();
}

void Validate(const RolloutRecord& r, std::size_t line_no) {
  if (r.token_nlls) {
    for (std::size_t i = 0; i < r.token_nlls->size(); ++i) {
      double v = (*r.token_nlls)[i];
      if (!std::isfinite(v) || v < 0.0) {
        Fail(ErrorCode::kParse, LineTag(line_no) + "token_nlls[" +
                                    std::to_string(i) +
                                    "] must be finite and non-negative");
      }
    }
  }
  if (r.response_mask) {
    if (!r.token_nlls) {
      Fail(ErrorCode::kParse,
           LineTag(line_no) + "response_mask given without token_nlls");
    }
    if (r.response_mask->size() != r.token_nlls->size()) {
      Fail(ErrorCode::kParse,
           LineTag(line_no) + "response_mask length " +
               std::to_string(r.response_mask->size()) +
               " != token_nlls length " +
               std::to_string(r.token_nlls->size()));
    }
  }
}

}  // namespace

RolloutRecord ParseRolloutLine(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, LineTag(line_no) + "malformed JSON: " + e.what());
  }
  if (!obj.is_object()) {
    Fail(ErrorCode::kParse, LineTag(line_no) + "record must be an object");
  }
  RolloutRecord r;
  r.prompt_id = RequireString(obj, "prompt_id", line_no);
  r.rollout_id = RequireString(obj, "rollout_id", line_no);
  r.checkpoint = RequireString(obj, "checkpoint", line_no);
  r.response = RequireString(obj, "response", line_no);

  if (auto it = obj.find("correct"); it != obj.end() && !it->is_null()) {
    if (!it->is_boolean()) {
      Fail(ErrorCode::kParse, LineTag(line_no) + "'correct' must be bool|null");
    }
    r.correct = it->get<bool>();
  }
  if (auto it = obj.find("token_nlls"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) {
      Fail(ErrorCode::kParse, LineTag(line_no) + "'token_nlls' must be a list");
    }
    std::vector<double> nlls;
    nlls.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number()) {
        Fail(ErrorCode::kParse,
             LineTag(line_no) + "'token_nlls' entries must be numbers");
      }
      nlls.push_back(v.get<double>());
    }
    r.token_nlls = std::move(nlls);
  }
  if (auto it = obj.find("response_mask"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) {
      Fail(ErrorCode::kParse,
           LineTag(line_no) + "'response_mask' must be a list");
    }
    std::vector<bool> mask;
    mask.reserve(it->size());
    for (const auto& v : *it) {
      if (v.is_boolean()) {
        mask.push_back(v.get<bool>());
      } else if (v.is_number_integer() &&
                 (v.get<int>() == 0 || v.get<int>() == 1)) {
        mask.push_back(v.get<int>() == 1);
      } else {
        Fail(ErrorCode::kParse,
             LineTag(line_no) + "'response_mask' entries must be booleans");
      }
    }
    r.response_mask = std::move(mask);
  }
  Validate(r, line_no);
  return r;
}

std::string SerializeRollout(const RolloutRecord& r) {
  json obj;
  obj["prompt_id"] = r.prompt_id;
  obj["rollout_id"] = r.rollout_id;
  obj["checkpoint"] = r.checkpoint;
  obj["response"] = r.response;
  obj["correct"] = r.correct ? json(*r.correct) : json(nullptr);
  obj["token_nlls"] = r.token_nlls ? json(*r.token_nlls) : json(nullptr);
  obj["response_mask"] =
      r.response_mask ? json(*r.response_mask) : json(nullptr);
  return obj.dump();
}

Corpus::Corpus(std::vector<RolloutRecord> records, std::string source)
    : records_(std::move(records)), source_(std::move(source)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const RolloutRecord& r = records_[i];
    Validate(r, i + 1);
    auto [it, inserted] = by_key_.emplace(r.key(), i);
    if (!inserted) {
      Fail(ErrorCode::kIntegrity, "record " + std::to_string(i + 1) +
                                      ": duplicate key " + ToString(r.key()) +
                                      " (first seen at record " +
                                      std::to_string(it->second + 1) + ")");
    }
    index_[r.checkpoint][r.prompt_id].push_back(i);
  }
}

std::vector<std::string> Corpus::checkpoints() const {
  std::vector<std::string> out;
  out.reserve(index_.size());
  for (const auto& [name, _] : index_) out.push_back(name);
  return out;
}

bool Corpus::has_checkpoint(std::string_view checkpoint) const {
  return index_.find(checkpoint) != index_.end();
}

std::vector<const RolloutRecord*> Corpus::records_for(
    std::string_view checkpoint) const {
  std::vector<const RolloutRecord*> out;
  for (const auto& r : records_) {
    if (r.checkpoint == checkpoint) out.push_back(&r);
  }
  return out;
}

const RolloutRecord* Corpus::find(const TraceKey& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &records_[it->second];
}

std::vector<RolloutGroup> GroupByPrompt(const Corpus& corpus,
                                        std::string_view checkpoint) {
  auto it = corpus.index_.find(checkpoint);
  if (it == corpus.index_.end()) {
    Fail(ErrorCode::kLookup,
         "unknown checkpoint '" + std::string(checkpoint) + "'");
  }
  std::vector<RolloutGroup> groups;
  groups.reserve(it->second.size());
  for (const auto& [prompt, indices] : it->second) {
    RolloutGroup g{prompt, {}};
    g.rollouts.reserve(indices.size());
    for (std::size_t i : indices) g.rollouts.push_back(&corpus.records_[i]);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

Corpus ParseCorpus(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    Fail(ErrorCode::kParse, "line 1: byte-order mark is not allowed");
  }
  std::vector<RolloutRecord> records;
  std::map<TraceKey, std::size_t> first_line;
  auto lines = SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    RolloutRecord r = ParseRolloutLine(line, i + 1);
    auto [it, inserted] = first_line.emplace(r.key(), i + 1);
    if (!inserted) {
      Fail(ErrorCode::kIntegrity,
           LineTag(i + 1) + "duplicate key " + ToString(r.key()) +
               " (first seen on line " + std::to_string(it->second) + ")");
    }
    records.push_back(std::move(r));
  }
  return Corpus(std::move(records), source);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) Fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

Corpus LoadCorpus(const std::string& path) {
  try {
    return ParseCorpus(ReadFile(path), path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

void WriteCorpus(const Corpus& corpus, const std::string& path) {
  std::string out;
  for (const auto& r : corpus.records()) {
    out += SerializeRollout(r);
    out += '\n';
  }
  WriteFile(path, out);
}

}  // namespace primtrace
