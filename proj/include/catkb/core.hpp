#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Domain types shared by every module. Everything here is an immutable value once built.
namespace catkb {

enum class Split { train, dev, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view s);

inline constexpr std::array<Split, 3> kAllSplits{Split::train, Split::dev, Split::test};

/// Caller-supplied event identifier, unique within a dataset.
class EventId {
 public:
  explicit EventId(std::string value);

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const EventId&, const EventId&) = default;
  friend bool operator==(const EventId&, const EventId&) = default;

 private:
  std::string value_;
};

/// Code point range [start, end) of an instance inside its event text, plus the cached slice.
struct InstanceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  friend bool operator==(const InstanceSpan&, const InstanceSpan&) = default;
};

/// Validates offsets against `event_text` and fills in the slice. Throws IntegrityError.
InstanceSpan make_span(std::string_view event_text, std::size_t start, std::size_t end);

/// Throws IntegrityError unless `span` is in range and its cached text matches the slice.
void check_span(std::string_view event_text, const InstanceSpan& span);

struct EventRecord {
  EventId id;
  std::string text;
  std::vector<InstanceSpan> spans;  // may nest or overlap
  Split split = Split::train;
};

using EventLookup = std::map<EventId, EventRecord>;

/// Canonical concept key: lowercase, interior whitespace collapsed, trimmed.
std::string canonical_concept(std::string_view raw);

class Concept {
 public:
  /// Normalizes `raw`; throws IntegrityError when the result is empty.
  explicit Concept(std::string_view raw);

  const std::string& text() const noexcept { return text_; }

  friend auto operator<=>(const Concept&, const Concept&) = default;
  friend bool operator==(const Concept&, const Concept&) = default;

 private:
  std::string text_;
};

enum class Relation : std::uint8_t {
  xEffect,
  oEffect,
  xWant,
  oWant,
  xReact,
  oReact,
  xNeed,
  xAttr,
  xIntent,
};

inline constexpr std::array<Relation, 9> kAllRelations{
    Relation::xEffect, Relation::oEffect, Relation::xWant,
    Relation::oWant,   Relation::xReact,  Relation::oReact,
    Relation::xNeed,   Relation::xAttr,   Relation::xIntent};

std::string_view to_string(Relation relation);
Relation parse_relation(std::string_view tag);

enum class Label : std::uint8_t { negative = 0, positive = 1 };

Label label_from_int(std::int64_t value);
inline int to_int(Label label) { return static_cast<int>(label); }

/// The (event, span, concept) triple that identifies a conceptualized head.
struct ConceptualizationRef {
  EventId event;
  InstanceSpan span;
  Concept concept_;

  /// Stable key "<event>|<start>|<end>|<concept>".
  std::string key() const;
};

struct Conceptualization {
  ConceptualizationRef ref;
  std::optional<Label> label;
  Split split = Split::train;

  std::string key() const { return ref.key(); }
};

struct AbstractTriple {
  ConceptualizationRef head;
  Relation relation = Relation::xEffect;
  std::string tail;
  std::optional<Label> label;
  Split split = Split::train;

  std::string key() const;
};

/// Splices the concept into the event text in place of the instance span.
std::string conceptualized_head(std::string_view event_text, const InstanceSpan& span,
                                const Concept& concept_);

/// Throws LookupError for an unknown event and IntegrityError for a span that does not fit.
std::string conceptualized_head(const ConceptualizationRef& ref, const EventLookup& events);

enum class Task { event_conceptualization, triple_conceptualization };

std::string_view to_string(Task task);
Task parse_task(std::string_view s);

enum class Band { positive, negative, discarded };
enum class Origin { teacher, student };

std::string_view to_string(Band band);
Band parse_band(std::string_view s);
std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view s);

/// score > t_plus → positive, score < t_minus → negative, otherwise discarded.
Band assign_band(double score, double t_plus, double t_minus);

struct PseudoLabelRecord {
  std::string item_key;
  Task task = Task::event_conceptualization;
  double score = 0.0;
  Band band = Band::discarded;
  Origin origin = Origin::teacher;
  int generation = 0;
};

}  // namespace catkb
