#include "catkb/core.hpp"

#include "catkb/error.hpp"
#include "catkb/text.hpp"

namespace catkb {

namespace {
constexpr char kKeySep = '|';
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  throw ParseError("unknown split '" + std::string(s) + "' (expected train, dev or test)");
}

EventId::EventId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw IntegrityError("event id must be non-empty");
}

InstanceSpan make_span(std::string_view event_text, std::size_t start, std::size_t end) {
  const std::size_t length = text::utf8_length(event_text);
  if (!(start < end && end <= length)) {
    throw IntegrityError("span [" + std::to_string(start) + ", " + std::to_string(end) +
                         ") does not fit an event of " + std::to_string(length) +
                         " characters");
  }
  return InstanceSpan{start, end, text::utf8_slice(event_text, start, end)};
}

void check_span(std::string_view event_text, const InstanceSpan& span) {
  const InstanceSpan expected = make_span(event_text, span.start, span.end);
  if (expected.text != span.text) {
    throw IntegrityError("span text '" + span.text + "' does not match event slice '" +
                         expected.text + "'");
  }
}

std::string canonical_concept(std::string_view raw) {
  return text::collapse_whitespace(text::ascii_lower(raw));
}

Concept::Concept(std::string_view raw) : text_(canonical_concept(raw)) {
  if (text_.empty()) throw IntegrityError("concept must be non-empty");
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::xEffect: return "xEffect";
    case Relation::oEffect: return "oEffect";
    case Relation::xWant: return "xWant";
    case Relation::oWant: return "oWant";
    case Relation::xReact: return "xReact";
    case Relation::oReact: return "oReact";
    case Relation::xNeed: return "xNeed";
    case Relation::xAttr: return "xAttr";
    case Relation::xIntent: return "xIntent";
  }
  return "xEffect";
}

Relation parse_relation(std::string_view tag) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == tag) return r;
  }
  throw ParseError("unknown relation '" + std::string(tag) + "'");
}

Label label_from_int(std::int64_t value) {
  if (value == 0) return Label::negative;
  if (value == 1) return Label::positive;
  throw IntegrityError("label must be 0 or 1, got " + std::to_string(value));
}

std::string ConceptualizationRef::key() const {
  std::string k = event.str();
  k += kKeySep;
  k += std::to_string(span.start);
  k += kKeySep;
  k += std::to_string(span.end);
  k += kKeySep;
  k += concept_.text();
  return k;
}

std::string AbstractTriple::key() const {
  std::string k = head.key();
  k += kKeySep;
  k += to_string(relation);
  k += kKeySep;
  k += tail;
  return k;
}

std::string conceptualized_head(std::string_view event_text, const InstanceSpan& span,
                                const Concept& concept_) {
  check_span(event_text, span);
  const std::size_t b = text::utf8_byte_offset(event_text, span.start);
  const std::size_t e = text::utf8_byte_offset(event_text, span.end);
  std::string out;
  out.reserve(event_text.size() + concept_.text().size());
  out.append(event_text.substr(0, b));
  out.append(concept_.text());
  out.append(event_text.substr(e));
  return out;
}

std::string conceptualized_head(const ConceptualizationRef& ref, const EventLookup& events) {
  const auto it = events.find(ref.event);
  if (it == events.end()) throw LookupError("unknown event id '" + ref.event.str() + "'");
  return conceptualized_head(it->second.text, ref.span, ref.concept_);
}

std::string_view to_string(Task task) {
  return task == Task::event_conceptualization ? "event_conceptualization"
                                               : "triple_conceptualization";
}

Task parse_task(std::string_view s) {
  if (s == "event_conceptualization") return Task::event_conceptualization;
  if (s == "triple_conceptualization") return Task::triple_conceptualization;
  throw ParseError("unknown task '" + std::string(s) + "'");
}

std::string_view to_string(Band band) {
  switch (band) {
    case Band::positive: return "positive";
    case Band::negative: return "negative";
    case Band::discarded: return "discarded";
  }
  return "discarded";
}

Band parse_band(std::string_view s) {
  if (s == "positive") return Band::positive;
  if (s == "negative") return Band::negative;
  if (s == "discarded") return Band::discarded;
  throw ParseError("unknown band '" + std::string(s) + "'");
}

std::string_view to_string(Origin origin) {
  return origin == Origin::teacher ? "teacher" : "student";
}

Origin parse_origin(std::string_view s) {
  if (s == "teacher") return Origin::teacher;
  if (s == "student") return Origin::student;
  throw ParseError("unknown origin '" + std::string(s) + "'");
}

Band assign_band(double score, double t_plus, double t_minus) {
  if (score > t_plus) return Band::positive;
  if (score < t_minus) return Band::negative;
  return Band::discarded;
}

}  // namespace catkb
