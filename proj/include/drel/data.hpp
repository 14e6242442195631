#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drel/error.hpp"

namespace drel {

// Canonical column order; the numeric value is the index used by every
// matrix and serialization in the project.
enum class RelationLabel : std::uint8_t {
  Acknowledgement = 0,
  Background,
  ClarificationQuestion,
  Comment,
  Continuation,
  Contrast,
  Elaboration,
  Explanation,
  Narration,
  QuestionAnswerPair,
  Result,
  Other,
};

enum class ContextKind : std::uint8_t {
  SingleTurn = 0,
  WithinSpeakerCrossTurn,
  CrossSpeaker,
};

inline constexpr std::size_t kNumLabels = 12;
inline constexpr std::size_t kNumContexts = 3;
inline constexpr int kMinConfidence = 1;
inline constexpr int kMaxConfidence = 5;

inline constexpr std::array<RelationLabel, kNumLabels> kAllLabels = {
    RelationLabel::Acknowledgement,  RelationLabel::Background,
    RelationLabel::ClarificationQuestion, RelationLabel::Comment,
    RelationLabel::Continuation,     RelationLabel::Contrast,
    RelationLabel::Elaboration,      RelationLabel::Explanation,
    RelationLabel::Narration,        RelationLabel::QuestionAnswerPair,
    RelationLabel::Result,           RelationLabel::Other};

inline constexpr std::array<ContextKind, kNumContexts> kAllContexts = {
    ContextKind::SingleTurn, ContextKind::WithinSpeakerCrossTurn,
    ContextKind::CrossSpeaker};

constexpr std::size_t index(RelationLabel l) { return static_cast<std::size_t>(l); }
constexpr std::size_t index(ContextKind c) { return static_cast<std::size_t>(c); }

/// File token, e.g. "question_answer_pair".
std::string_view token(RelationLabel l);
/// File token, e.g. "within_speaker".
std::string_view token(ContextKind c);
/// Human-readable name as used in frequency tables ("Question-Answer Pair").
std::string_view display_name(RelationLabel l);
std::string_view display_name(ContextKind c);

// Exact-match lookups; no case folding or fuzzy matching.
std::optional<RelationLabel> parse_label(std::string_view tok);
std::optional<ContextKind> parse_context(std::string_view tok);

struct AnnotationRecord {
  std::string record_id;
  std::string annotator_id;
  std::string team_id;
  std::string conversation_id;
  std::string du_pair_id;
  ContextKind context = ContextKind::SingleTurn;
  std::vector<RelationLabel> labels;  // non-empty, duplicate-free, file order
  int confidence = kMinConfidence;

  bool has(RelationLabel l) const;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Throws ValidationError describing the first violated invariant.
void validate(const AnnotationRecord& r);

// Levels of a grouping factor in first-appearance order plus, for each
// record, the level it belongs to.
struct GroupIndex {
  std::vector<std::string> levels;
  std::vector<std::size_t> of_record;
  std::vector<std::vector<std::size_t>> members;  // record indices per level
};

// Immutable, validated annotation corpus.
class Dataset {
 public:
  explicit Dataset(std::vector<AnnotationRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<AnnotationRecord>& records() const noexcept { return records_; }
  const AnnotationRecord& operator[](std::size_t i) const { return records_[i]; }

  const GroupIndex& by_annotator() const noexcept { return by_annotator_; }
  const GroupIndex& by_du_pair() const noexcept { return by_du_pair_; }
  const GroupIndex& by_conversation() const noexcept { return by_conversation_; }
  const GroupIndex& by_team() const noexcept { return by_team_; }

  std::size_t total_label_tokens() const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.records_ == b.records_; }

 private:
  std::vector<AnnotationRecord> records_;
  GroupIndex by_annotator_;
  GroupIndex by_du_pair_;
  GroupIndex by_conversation_;
  GroupIndex by_team_;
};

enum class FileFormat { Jsonl, Csv };

/// Picks the format from the extension (.jsonl/.json -> Jsonl, .csv -> Csv).
FileFormat format_from_path(const std::filesystem::path& p);

Dataset parse_dataset(const std::filesystem::path& path, FileFormat fmt);
Dataset parse_dataset(const std::filesystem::path& path);
Dataset parse_jsonl(std::string_view text);
Dataset parse_csv(std::string_view text);

std::string to_jsonl(const Dataset& ds);
std::string to_csv(const Dataset& ds);
void write_dataset(const Dataset& ds, const std::filesystem::path& path, FileFormat fmt);

using LabelCounts = std::array<std::size_t, kNumLabels>;

/// Number of records whose label set contains each label.
LabelCounts label_frequencies(const Dataset& ds);

struct ConfidenceCell {
  double mean = 0.0;
  std::size_t count = 0;
};

// (label, context) -> mean confidence; cells with no records are nullopt.
using ConfidenceTable =
    std::array<std::array<std::optional<ConfidenceCell>, kNumContexts>, kNumLabels>;

ConfidenceTable confidence_table(const Dataset& ds);

}  // namespace drel
