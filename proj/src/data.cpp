#include "drel/data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace drel {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelTokens = {
    "acknowledgement", "background", "clarification_question", "comment",
    "continuation",    "contrast",   "elaboration",            "explanation",
    "narration",       "question_answer_pair", "result",       "other"};

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Acknowledgement", "Background", "Clarification Question", "Comment",
    "Continuation",    "Contrast",   "Elaboration",            "Explanation",
    "Narration",       "Question-Answer Pair", "Result",       "Other"};

constexpr std::array<std::string_view, kNumContexts> kContextTokens = {
    "single_turn", "within_speaker", "cross_speaker"};

constexpr std::array<std::string_view, kNumContexts> kContextNames = {
    "Single turn", "Within speaker", "Across speakers"};

GroupIndex build_index(const std::vector<AnnotationRecord>& recs,
                       const std::string AnnotationRecord::*field) {
  GroupIndex g;
  std::unordered_map<std::string, std::size_t> seen;
  g.of_record.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const std::string& key = recs[i].*field;
    auto [it, inserted] = seen.try_emplace(key, g.levels.size());
    if (inserted) {
      g.levels.push_back(key);
      g.members.emplace_back();
    }
    g.of_record.push_back(it->second);
    g.members[it->second].push_back(i);
  }
  return g;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("data", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string at_line(std::size_t line, const std::string& msg) {
  return "line " + std::to_string(line) + ": " + msg;
}

// Common validation path for both formats; `line` is 1-based in the file.
AnnotationRecord make_record(std::size_t line, std::string record_id, std::string annotator,
                             std::string team, std::string conversation, std::string du_pair,
                             std::string_view context, const std::vector<std::string>& labels,
                             long long confidence) {
  AnnotationRecord r;
  r.record_id = std::move(record_id);
  r.annotator_id = std::move(annotator);
  r.team_id = std::move(team);
  r.conversation_id = std::move(conversation);
  r.du_pair_id = std::move(du_pair);
  auto ctx = parse_context(context);
  if (!ctx) {
    throw ValidationError("data", at_line(line, "unknown context '" + std::string(context) + "'"));
  }
  r.context = *ctx;
  for (const auto& tok : labels) {
    auto l = parse_label(tok);
    if (!l) throw ValidationError("data", at_line(line, "unknown label '" + tok + "'"));
    r.labels.push_back(*l);
  }
  if (confidence < kMinConfidence || confidence > kMaxConfidence) {
    throw ValidationError("data", at_line(line, "record '" + r.record_id + "': confidence " +
                                                    std::to_string(confidence) +
                                                    " out of range [1,5]"));
  }
  r.confidence = static_cast<int>(confidence);
  try {
    validate(r);
  } catch (const ValidationError& e) {
    // Re-anchor the message on the file line.
    std::string what = e.what();
    throw ValidationError("data", at_line(line, what.substr(what.find(": ") + 2)));
  }
  return r;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// RFC 4180 style field splitting for a single physical line.
std::vector<std::string> csv_fields(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      if (!cur.empty() || was_quoted) {
        throw ValidationError("data", at_line(lineno, "stray quote in CSV field"));
      }
      quoted = was_quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ValidationError("data", at_line(lineno, "unterminated quoted CSV field"));
  out.push_back(std::move(cur));
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

constexpr std::array<std::string_view, 8> kColumns = {
    "record_id", "annotator", "team", "conversation", "du_pair", "context", "labels", "confidence"};

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    std::string_view l = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return lines;
}

void reject_bom(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    throw ValidationError("data", at_line(1, "UTF-8 byte order mark is not allowed"));
  }
}

}  // namespace

std::string_view token(RelationLabel l) { return kLabelTokens[index(l)]; }
std::string_view token(ContextKind c) { return kContextTokens[index(c)]; }
std::string_view display_name(RelationLabel l) { return kLabelNames[index(l)]; }
std::string_view display_name(ContextKind c) { return kContextNames[index(c)]; }

std::optional<RelationLabel> parse_label(std::string_view tok) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelTokens[i] == tok) return kAllLabels[i];
  }
  return std::nullopt;
}

std::optional<ContextKind> parse_context(std::string_view tok) {
  for (std::size_t i = 0; i < kNumContexts; ++i) {
    if (kContextTokens[i] == tok) return kAllContexts[i];
  }
  return std::nullopt;
}

bool AnnotationRecord::has(RelationLabel l) const {
  return std::find(labels.begin(), labels.end(), l) != labels.end();
}

void validate(const AnnotationRecord& r) {
  if (r.record_id.empty()) throw ValidationError("data", "empty record_id");
  if (r.labels.empty()) {
    throw ValidationError("data", "record '" + r.record_id + "': label set is empty");
  }
  std::array<bool, kNumLabels> seen{};
  for (auto l : r.labels) {
    if (index(l) >= kNumLabels) {
      throw ValidationError("data", "record '" + r.record_id + "': invalid label index");
    }
    if (seen[index(l)]) {
      throw ValidationError("data", "record '" + r.record_id + "': duplicate label '" +
                                        std::string(token(l)) + "'");
    }
    seen[index(l)] = true;
  }
  if (index(r.context) >= kNumContexts) {
    throw ValidationError("data", "record '" + r.record_id + "': invalid context index");
  }
  if (r.confidence < kMinConfidence || r.confidence > kMaxConfidence) {
    throw ValidationError("data", "record '" + r.record_id + "': confidence " +
                                      std::to_string(r.confidence) + " out of range [1,5]");
  }
}

Dataset::Dataset(std::vector<AnnotationRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("data", "dataset has no records");
  std::unordered_set<std::string> ids;
  for (const auto& r : records_) {
    validate(r);
    if (!ids.insert(r.record_id).second) {
      throw ValidationError("data", "duplicate record_id '" + r.record_id + "'");
    }
  }
  by_annotator_ = build_index(records_, &AnnotationRecord::annotator_id);
  by_du_pair_ = build_index(records_, &AnnotationRecord::du_pair_id);
  by_conversation_ = build_index(records_, &AnnotationRecord::conversation_id);
  by_team_ = build_index(records_, &AnnotationRecord::team_id);
}

std::size_t Dataset::total_label_tokens() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.labels.size();
  return n;
}

FileFormat format_from_path(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".csv") return FileFormat::Csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return FileFormat::Jsonl;
  throw ValidationError("data", "cannot infer format from extension of " + p.string());
}

Dataset parse_dataset(const std::filesystem::path& path, FileFormat fmt) {
  const std::string text = read_file(path);
  return fmt == FileFormat::Jsonl ? parse_jsonl(text) : parse_csv(text);
}

Dataset parse_dataset(const std::filesystem::path& path) {
  return parse_dataset(path, format_from_path(path));
}

Dataset parse_jsonl(std::string_view text) {
  using nlohmann::json;
  reject_bom(text);
  std::vector<AnnotationRecord> recs;
  std::unordered_map<std::string, std::size_t> first_line;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    std::string_view line = lines[ln];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("data", at_line(lineno, std::string("malformed JSON: ") + e.what()));
    }
    if (!obj.is_object()) throw ValidationError("data", at_line(lineno, "expected a JSON object"));
    auto str_field = [&](const char* name) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end() || !it->is_string()) {
        throw ValidationError("data", at_line(lineno, std::string("missing or non-string field '") +
                                                          name + "'"));
      }
      return it->get<std::string>();
    };
    auto labels_it = obj.find("labels");
    if (labels_it == obj.end() || !labels_it->is_array()) {
      throw ValidationError("data", at_line(lineno, "missing or non-array field 'labels'"));
    }
    std::vector<std::string> labels;
    for (const auto& l : *labels_it) {
      if (!l.is_string()) throw ValidationError("data", at_line(lineno, "non-string label"));
      labels.push_back(l.get<std::string>());
    }
    auto conf_it = obj.find("confidence");
    if (conf_it == obj.end() || !conf_it->is_number_integer()) {
      throw ValidationError("data", at_line(lineno, "missing or non-integer field 'confidence'"));
    }
    auto rec = make_record(lineno, str_field("record_id"), str_field("annotator"), str_field("team"),
                           str_field("conversation"), str_field("du_pair"), str_field("context"),
                           labels, conf_it->get<long long>());
    auto [it, inserted] = first_line.try_emplace(rec.record_id, lineno);
    if (!inserted) {
      throw ValidationError("data", at_line(lineno, "duplicate record_id '" + rec.record_id +
                                                        "' (first seen on line " +
                                                        std::to_string(it->second) + ")"));
    }
    recs.push_back(std::move(rec));
  }
  return Dataset(std::move(recs));
}

Dataset parse_csv(std::string_view text) {
  reject_bom(text);
  const auto lines = lines_of(text);
  std::size_t ln = 0;
  while (ln < lines.size() && lines[ln].empty()) ++ln;
  if (ln == lines.size()) throw ValidationError("data", "CSV input has no header");
  const auto header = csv_fields(lines[ln], ln + 1);
  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw ValidationError("data", at_line(ln + 1, "CSV header lacks column '" +
                                                         std::string(kColumns[c]) + "'"));
    }
    col[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<AnnotationRecord> recs;
  std::unordered_map<std::string, std::size_t> first_line;
  for (++ln; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    if (lines[ln].empty()) continue;
    const auto f = csv_fields(lines[ln], lineno);
    if (f.size() != header.size()) {
      throw ValidationError("data", at_line(lineno, "expected " + std::to_string(header.size()) +
                                                        " fields, got " + std::to_string(f.size())));
    }
    const std::string& conf = f[col[7]];
    long long confidence = 0;
    std::size_t used = 0;
    try {
      confidence = std::stoll(conf, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (conf.empty() || used != conf.size()) {
      throw ValidationError("data", at_line(lineno, "confidence '" + conf + "' is not an integer"));
    }
    std::vector<std::string> labels;
    if (!f[col[6]].empty()) labels = split(f[col[6]], '|');
    auto rec = make_record(lineno, f[col[0]], f[col[1]], f[col[2]], f[col[3]], f[col[4]],
                           f[col[5]], labels, confidence);
    auto [it, inserted] = first_line.try_emplace(rec.record_id, lineno);
    if (!inserted) {
      throw ValidationError("data", at_line(lineno, "duplicate record_id '" + rec.record_id +
                                                        "' (first seen on line " +
                                                        std::to_string(it->second) + ")"));
    }
    recs.push_back(std::move(rec));
  }
  return Dataset(std::move(recs));
}

std::string to_jsonl(const Dataset& ds) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& r : ds.records()) {
    ordered_json obj;
    obj["record_id"] = r.record_id;
    obj["annotator"] = r.annotator_id;
    obj["team"] = r.team_id;
    obj["conversation"] = r.conversation_id;
    obj["du_pair"] = r.du_pair_id;
    obj["context"] = token(r.context);
    auto labels = ordered_json::array();
    for (auto l : r.labels) labels.push_back(token(l));
    obj["labels"] = std::move(labels);
    obj["confidence"] = r.confidence;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string to_csv(const Dataset& ds) {
  std::string out = "record_id,annotator,team,conversation,du_pair,context,labels,confidence\n";
  for (const auto& r : ds.records()) {
    std::string labels;
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
      if (i) labels += '|';
      labels += token(r.labels[i]);
    }
    out += csv_escape(r.record_id) + ',' + csv_escape(r.annotator_id) + ',' +
           csv_escape(r.team_id) + ',' + csv_escape(r.conversation_id) + ',' +
           csv_escape(r.du_pair_id) + ',' + std::string(token(r.context)) + ',' + labels + ',' +
           std::to_string(r.confidence) + '\n';
  }
  return out;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path, FileFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("data", "cannot write " + path.string());
  out << (fmt == FileFormat::Jsonl ? to_jsonl(ds) : to_csv(ds));
}

LabelCounts label_frequencies(const Dataset& ds) {
  LabelCounts counts{};
  for (const auto& r : ds.records()) {
    for (auto l : r.labels) ++counts[index(l)];
  }
  return counts;
}

ConfidenceTable confidence_table(const Dataset& ds) {
  std::array<std::array<long long, kNumContexts>, kNumLabels> sum{};
  std::array<std::array<std::size_t, kNumContexts>, kNumLabels> cnt{};
  for (const auto& r : ds.records()) {
    for (auto l : r.labels) {
      sum[index(l)][index(r.context)] += r.confidence;
      ++cnt[index(l)][index(r.context)];
    }
  }
  ConfidenceTable t{};
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    for (std::size_t c = 0; c < kNumContexts; ++c) {
      if (cnt[l][c] > 0) {
        t[l][c] = ConfidenceCell{static_cast<double>(sum[l][c]) / static_cast<double>(cnt[l][c]),
                                 cnt[l][c]};
      }
    }
  }
  return t;
}

}  // namespace drel
