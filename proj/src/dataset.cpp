#include "catkb/dataset.hpp"

#include <set>
#include <sstream>
#include <utility>

#include "catkb/error.hpp"
#include "catkb/io.hpp"
#include "catkb/text.hpp"

namespace catkb {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string row_label(const std::vector<std::string>& rows, std::size_t i, const char* what) {
  if (i < rows.size()) return rows[i];
  return std::string(what) + "[" + std::to_string(i) + "]";
}

// Prefixes a library error with the row it came from, preserving its kind.
[[noreturn]] void rethrow_at(const std::string& row, const Error& e) {
  const std::string msg = row + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::parse: throw ParseError(msg);
    case ErrorKind::lookup: throw LookupError(msg);
    default: throw IntegrityError(msg);
  }
}

const json& require(const json& obj, const char* field, const std::string& row) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(row + ": missing field '" + field + "'");
  return *it;
}

std::string require_string(const json& obj, const char* field, const std::string& row) {
  const json& v = require(obj, field, row);
  if (!v.is_string()) throw ParseError(row + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

std::size_t require_offset(const json& obj, const char* field, const std::string& row) {
  const json& v = require(obj, field, row);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(row + ": field '" + field + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::optional<Label> require_label(const json& obj, const std::string& row) {
  const json& v = require(obj, "label", row);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer()) throw ParseError(row + ": field 'label' must be 0, 1 or null");
  try {
    return label_from_int(v.get<std::int64_t>());
  } catch (const Error& e) {
    rethrow_at(row, e);
  }
}

json parse_object(std::string_view line, const std::string& row) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(row + ": malformed JSON: " + e.what());
  }
  if (!obj.is_object()) throw ParseError(row + ": expected a JSON object");
  return obj;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string row_name(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

template <typename Fn>
void read_rows(const std::filesystem::path& path, Fn&& fn) {
  io::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (blank(line)) return;
    const std::string row = row_name(path, number);
    if (!text::is_valid_utf8(line)) throw ParseError(row + ": invalid UTF-8");
    fn(parse_object(line, row), row);
  });
}

ConceptualizationRef parse_ref(const json& obj, const std::string& row) {
  try {
    EventId id(require_string(obj, "event_id", row));
    InstanceSpan span{require_offset(obj, "start", row), require_offset(obj, "end", row), {}};
    Concept concept_(require_string(obj, "concept", row));
    return ConceptualizationRef{std::move(id), std::move(span), std::move(concept_)};
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    rethrow_at(row, e);
  }
}

Split parse_row_split(const json& obj, const std::string& row) {
  try {
    return parse_split(require_string(obj, "split", row));
  } catch (const ParseError& e) {
    if (std::string_view(e.what()).starts_with(row)) throw;
    throw ParseError(row + ": " + e.what());
  }
}

// Resolves a reference's span against its event: the offsets must name one of the event's
// declared spans. Fills in the span text.
void resolve_ref(ConceptualizationRef& ref, const EventLookup& events, const std::string& row) {
  const auto it = events.find(ref.event);
  if (it == events.end()) {
    throw IntegrityError(row + ": references unknown event '" + ref.event.str() + "'");
  }
  const EventRecord& event = it->second;
  InstanceSpan resolved;
  try {
    resolved = make_span(event.text, ref.span.start, ref.span.end);
  } catch (const Error& e) {
    rethrow_at(row, e);
  }
  if (!ref.span.text.empty() && ref.span.text != resolved.text) {
    throw IntegrityError(row + ": span text '" + ref.span.text + "' does not match event slice '" +
                         resolved.text + "'");
  }
  bool declared = false;
  for (const InstanceSpan& s : event.spans) {
    if (s.start == resolved.start && s.end == resolved.end) {
      declared = true;
      break;
    }
  }
  if (!declared) {
    throw IntegrityError(row + ": span [" + std::to_string(resolved.start) + ", " +
                         std::to_string(resolved.end) + ") is not declared on event '" +
                         ref.event.str() + "'");
  }
  ref.span = std::move(resolved);
}

}  // namespace

DatasetBundle DatasetBundle::build(std::vector<EventRecord> events,
                                   std::vector<Conceptualization> conceptualizations,
                                   std::vector<AbstractTriple> triples,
                                   const LoadOptions& options) {
  return build_labeled(std::move(events), {}, std::move(conceptualizations), {},
                       std::move(triples), {}, options);
}

DatasetBundle DatasetBundle::build_labeled(std::vector<EventRecord> events,
                                           std::vector<std::string> event_rows,
                                           std::vector<Conceptualization> conceptualizations,
                                           std::vector<std::string> conceptualization_rows,
                                           std::vector<AbstractTriple> triples,
                                           std::vector<std::string> triple_rows,
                                           const LoadOptions& options) {
  DatasetBundle bundle;
  LoadDiagnostics& diag = bundle.diagnostics_;

  auto duplicate = [&](const std::string& row, const std::string& what, std::size_t& counter) {
    if (options.strict_duplicates) throw IntegrityError(row + ": duplicate " + what);
    ++counter;
    diag.warnings.push_back(row + ": duplicate " + what + " dropped");
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    EventRecord& e = events[i];
    const std::string row = row_label(event_rows, i, "events");
    if (!text::is_valid_utf8(e.text)) throw ParseError(row + ": event text is not valid UTF-8");
    for (InstanceSpan& s : e.spans) {
      try {
        InstanceSpan resolved = make_span(e.text, s.start, s.end);
        if (!s.text.empty() && s.text != resolved.text) {
          throw IntegrityError("span text '" + s.text + "' does not match event slice '" +
                               resolved.text + "'");
        }
        s = std::move(resolved);
      } catch (const Error& err) {
        rethrow_at(row, err);
      }
    }
    if (bundle.events_.contains(e.id)) {
      duplicate(row, "event '" + e.id.str() + "'", diag.duplicate_events);
      continue;
    }
    EventId id = e.id;
    bundle.events_.emplace(std::move(id), std::move(e));
  }

  bundle.conceptualizations_.reserve(conceptualizations.size());
  for (std::size_t i = 0; i < conceptualizations.size(); ++i) {
    Conceptualization& c = conceptualizations[i];
    const std::string row = row_label(conceptualization_rows, i, "conceptualizations");
    resolve_ref(c.ref, bundle.events_, row);
    std::string key = c.key();
    if (bundle.concept_by_key_.contains(key)) {
      duplicate(row, "conceptualization '" + key + "'", diag.duplicate_conceptualizations);
      continue;
    }
    bundle.concept_by_key_.emplace(std::move(key), bundle.conceptualizations_.size());
    bundle.conceptualizations_.push_back(std::move(c));
  }

  bundle.triples_.reserve(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    AbstractTriple& t = triples[i];
    const std::string row = row_label(triple_rows, i, "triples");
    if (t.tail.empty()) throw IntegrityError(row + ": tail must be non-empty");
    if (!text::is_valid_utf8(t.tail)) throw ParseError(row + ": tail is not valid UTF-8");
    if (!bundle.events_.contains(t.head.event)) {
      throw IntegrityError(row + ": references unknown event '" + t.head.event.str() + "'");
    }
    const std::string head_key = t.head.key();
    const auto it = bundle.concept_by_key_.find(head_key);
    if (it == bundle.concept_by_key_.end()) {
      throw IntegrityError(row + ": triple references missing conceptualization '" + head_key +
                           "'");
    }
    t.head = bundle.conceptualizations_[it->second].ref;
    std::string key = t.key();
    if (bundle.triple_by_key_.contains(key)) {
      duplicate(row, "triple '" + key + "'", diag.duplicate_triples);
      continue;
    }
    bundle.triple_by_key_.emplace(std::move(key), bundle.triples_.size());
    bundle.triples_.push_back(std::move(t));
  }
  return bundle;
}

const EventRecord& DatasetBundle::event(const EventId& id) const {
  const auto it = events_.find(id);
  if (it == events_.end()) throw LookupError("unknown event id '" + id.str() + "'");
  return it->second;
}

const Conceptualization* DatasetBundle::find_conceptualization(const std::string& key) const {
  const auto it = concept_by_key_.find(key);
  return it == concept_by_key_.end() ? nullptr : &conceptualizations_[it->second];
}

const AbstractTriple* DatasetBundle::find_triple(const std::string& key) const {
  const auto it = triple_by_key_.find(key);
  return it == triple_by_key_.end() ? nullptr : &triples_[it->second];
}

std::vector<const Conceptualization*> DatasetBundle::labeled_conceptualizations() const {
  std::vector<const Conceptualization*> out;
  for (const auto& c : conceptualizations_) {
    if (c.label) out.push_back(&c);
  }
  return out;
}

std::vector<const Conceptualization*> DatasetBundle::unlabeled_conceptualizations() const {
  std::vector<const Conceptualization*> out;
  for (const auto& c : conceptualizations_) {
    if (!c.label) out.push_back(&c);
  }
  return out;
}

std::vector<const AbstractTriple*> DatasetBundle::labeled_triples() const {
  std::vector<const AbstractTriple*> out;
  for (const auto& t : triples_) {
    if (t.label) out.push_back(&t);
  }
  return out;
}

std::vector<const AbstractTriple*> DatasetBundle::unlabeled_triples() const {
  std::vector<const AbstractTriple*> out;
  for (const auto& t : triples_) {
    if (!t.label) out.push_back(&t);
  }
  return out;
}

std::string DatasetBundle::head_text(const ConceptualizationRef& ref) const {
  return conceptualized_head(ref, events_);
}

DatasetBundle load_bundle(const std::filesystem::path& events_path,
                          const std::filesystem::path& conceptualizations_path,
                          const std::filesystem::path& triples_path,
                          const LoadOptions& options) {
  for (const auto* p : {&events_path, &conceptualizations_path, &triples_path}) {
    if (!std::filesystem::exists(*p)) throw IoError("input file not found: '" + p->string() + "'");
  }

  std::vector<EventRecord> events;
  std::vector<std::string> event_rows;
  read_rows(events_path, [&](const json& obj, const std::string& row) {
    try {
      EventRecord e{EventId(require_string(obj, "id", row)), require_string(obj, "text", row),
                    {}, parse_row_split(obj, row)};
      const json& spans = require(obj, "spans", row);
      if (!spans.is_array()) throw ParseError(row + ": field 'spans' must be an array");
      for (const json& s : spans) {
        if (!s.is_object()) throw ParseError(row + ": span entries must be objects");
        e.spans.push_back(InstanceSpan{require_offset(s, "start", row),
                                       require_offset(s, "end", row), {}});
      }
      events.push_back(std::move(e));
      event_rows.push_back(row);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      rethrow_at(row, e);
    }
  });

  std::vector<Conceptualization> concepts;
  std::vector<std::string> concept_rows;
  read_rows(conceptualizations_path, [&](const json& obj, const std::string& row) {
    Conceptualization c{parse_ref(obj, row), require_label(obj, row), parse_row_split(obj, row)};
    concepts.push_back(std::move(c));
    concept_rows.push_back(row);
  });

  std::vector<AbstractTriple> triples;
  std::vector<std::string> triple_rows;
  read_rows(triples_path, [&](const json& obj, const std::string& row) {
    ConceptualizationRef head = parse_ref(obj, row);
    Relation relation;
    try {
      relation = parse_relation(require_string(obj, "relation", row));
    } catch (const ParseError& e) {
      if (std::string_view(e.what()).starts_with(row)) throw;
      throw ParseError(row + ": " + e.what());
    }
    AbstractTriple t{std::move(head), relation, require_string(obj, "tail", row),
                     require_label(obj, row), parse_row_split(obj, row)};
    triples.push_back(std::move(t));
    triple_rows.push_back(row);
  });

  return DatasetBundle::build_labeled(std::move(events), std::move(event_rows),
                                      std::move(concepts), std::move(concept_rows),
                                      std::move(triples), std::move(triple_rows), options);
}

namespace {

ordered_json label_json(const std::optional<Label>& label) {
  return label ? ordered_json(to_int(*label)) : ordered_json(nullptr);
}

}  // namespace

std::string to_jsonl(const EventRecord& event) {
  ordered_json spans = ordered_json::array();
  for (const auto& s : event.spans) {
    spans.push_back(ordered_json{{"start", s.start}, {"end", s.end}});
  }
  ordered_json j{{"id", event.id.str()},
                 {"text", event.text},
                 {"spans", std::move(spans)},
                 {"split", std::string(to_string(event.split))}};
  return j.dump();
}

std::string to_jsonl(const Conceptualization& c) {
  ordered_json j{{"event_id", c.ref.event.str()}, {"start", c.ref.span.start},
                 {"end", c.ref.span.end},         {"concept", c.ref.concept_.text()},
                 {"label", label_json(c.label)},  {"split", std::string(to_string(c.split))}};
  return j.dump();
}

std::string to_jsonl(const AbstractTriple& t) {
  ordered_json j{{"event_id", t.head.event.str()},
                 {"start", t.head.span.start},
                 {"end", t.head.span.end},
                 {"concept", t.head.concept_.text()},
                 {"relation", std::string(to_string(t.relation))},
                 {"tail", t.tail},
                 {"label", label_json(t.label)},
                 {"split", std::string(to_string(t.split))}};
  return j.dump();
}

void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::string events;
  for (const auto& [id, e] : bundle.events()) events += to_jsonl(e) + "\n";
  std::string concepts;
  for (const auto& c : bundle.conceptualizations()) concepts += to_jsonl(c) + "\n";
  std::string triples;
  for (const auto& t : bundle.triples()) triples += to_jsonl(t) + "\n";
  io::write_file_atomic(dir / "events.jsonl", events);
  io::write_file_atomic(dir / "conceptualizations.jsonl", concepts);
  io::write_file_atomic(dir / "triples.jsonl", triples);
}

std::size_t& SplitCounts::at(Split split) {
  switch (split) {
    case Split::train: return train;
    case Split::dev: return dev;
    case Split::test: return test;
  }
  return train;
}

std::size_t SplitCounts::at(Split split) const {
  return const_cast<SplitCounts*>(this)->at(split);
}

namespace {

struct SummaryAccumulator {
  std::set<std::string> events;
  std::set<std::pair<std::string, std::pair<std::size_t, std::size_t>>> instances;
  std::set<std::string> concepts;
  std::size_t rows = 0;

  void add(const Conceptualization& c) {
    events.insert(c.ref.event.str());
    instances.insert({c.ref.event.str(), {c.ref.span.start, c.ref.span.end}});
    concepts.insert(c.ref.concept_.text());
    ++rows;
  }

  ConceptualizationSummary finish() const {
    ConceptualizationSummary s;
    s.unique_events = events.size();
    s.unique_instances = instances.size();
    s.unique_concepts = concepts.size();
    s.conceptualizations = rows;
    s.avg_concepts_per_event =
        events.empty() ? 0.0 : static_cast<double>(rows) / static_cast<double>(events.size());
    s.avg_concepts_per_instance =
        instances.empty() ? 0.0
                          : static_cast<double>(rows) / static_cast<double>(instances.size());
    return s;
  }
};

ordered_json split_json(const SplitCounts& c) {
  return ordered_json{{"train", c.train}, {"dev", c.dev}, {"test", c.test}};
}

ordered_json summary_json(const ConceptualizationSummary& s) {
  return ordered_json{{"unique_events", s.unique_events},
                      {"unique_instances", s.unique_instances},
                      {"unique_concepts", s.unique_concepts},
                      {"conceptualizations", s.conceptualizations},
                      {"avg_concepts_per_event", s.avg_concepts_per_event},
                      {"avg_concepts_per_instance", s.avg_concepts_per_instance}};
}

}  // namespace

StatsReport compute_stats(const DatasetBundle& bundle) {
  StatsReport r;
  SummaryAccumulator labeled;
  SummaryAccumulator unlabeled;
  SummaryAccumulator total;
  std::array<std::set<std::string>, 3> labeled_ids;
  std::array<std::set<std::string>, 3> unlabeled_ids;

  for (const auto& c : bundle.conceptualizations()) {
    const auto split_index = static_cast<std::size_t>(c.split);
    total.add(c);
    if (c.label) {
      ++r.labeled_events.at(c.split);
      labeled.add(c);
      labeled_ids[split_index].insert(c.ref.event.str());
    } else {
      ++r.unlabeled_events.at(c.split);
      unlabeled.add(c);
      unlabeled_ids[split_index].insert(c.ref.event.str());
    }
  }
  for (Split s : kAllSplits) {
    r.labeled_unique_events.at(s) = labeled_ids[static_cast<std::size_t>(s)].size();
    r.unlabeled_unique_events.at(s) = unlabeled_ids[static_cast<std::size_t>(s)].size();
  }
  for (Relation rel : kAllRelations) {
    r.labeled_triples_by_relation[std::string(to_string(rel))] = 0;
    r.unlabeled_triples_by_relation[std::string(to_string(rel))] = 0;
  }
  for (const auto& t : bundle.triples()) {
    const std::string rel(to_string(t.relation));
    if (t.label) {
      ++r.labeled_triples.at(t.split);
      ++r.labeled_triples_by_relation[rel];
    } else {
      ++r.unlabeled_triples.at(t.split);
      ++r.unlabeled_triples_by_relation[rel];
    }
  }
  r.labeled = labeled.finish();
  r.unlabeled = unlabeled.finish();
  r.total = total.finish();
  r.duplicates_dropped = bundle.diagnostics().duplicate_total();
  return r;
}

ordered_json to_json(const StatsReport& r) {
  ordered_json relations = ordered_json::object();
  for (Relation rel : kAllRelations) {
    const std::string tag(to_string(rel));
    relations[tag] = ordered_json{{"labeled", r.labeled_triples_by_relation.at(tag)},
                                  {"unlabeled", r.unlabeled_triples_by_relation.at(tag)}};
  }
  return ordered_json{
      {"labeled",
       {{"events", split_json(r.labeled_events)}, {"triples", split_json(r.labeled_triples)}}},
      {"unlabeled",
       {{"events", split_json(r.unlabeled_events)},
        {"triples", split_json(r.unlabeled_triples)}}},
      {"unique_events",
       {{"labeled", split_json(r.labeled_unique_events)},
        {"unlabeled", split_json(r.unlabeled_unique_events)}}},
      {"event_conceptualization",
       {{"labeled", summary_json(r.labeled)},
        {"unlabeled", summary_json(r.unlabeled)},
        {"total", summary_json(r.total)}}},
      {"triples_by_relation", std::move(relations)},
      {"duplicates_dropped", r.duplicates_dropped}};
}

}  // namespace catkb
