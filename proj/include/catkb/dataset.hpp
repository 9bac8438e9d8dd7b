#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "catkb/core.hpp"

namespace catkb {

struct LoadOptions {
  /// Turn duplicate-row warnings into IntegrityErrors.
  bool strict_duplicates = false;
};

struct LoadDiagnostics {
  std::size_t duplicate_events = 0;
  std::size_t duplicate_conceptualizations = 0;
  std::size_t duplicate_triples = 0;
  std::vector<std::string> warnings;

  std::size_t duplicate_total() const {
    return duplicate_events + duplicate_conceptualizations + duplicate_triples;
  }
};

/// A validated dataset: events, their conceptualizations, and abstract triples.
///
/// Every conceptualization references an existing event and one of that event's declared
/// spans; every triple references an existing conceptualization. The labeled/unlabeled
/// partitions are defined by label presence, so they are disjoint and exhaustive.
class DatasetBundle {
 public:
  DatasetBundle() = default;

  /// Validates and deduplicates (first occurrence wins). Span texts are re-derived from the
  /// owning event; a non-empty cached text that disagrees is an IntegrityError.
  static DatasetBundle build(std::vector<EventRecord> events,
                             std::vector<Conceptualization> conceptualizations,
                             std::vector<AbstractTriple> triples,
                             const LoadOptions& options = {});

  /// Same as build(), with one diagnostic label per row (e.g. "triples.jsonl:12").
  static DatasetBundle build_labeled(std::vector<EventRecord> events,
                                     std::vector<std::string> event_rows,
                                     std::vector<Conceptualization> conceptualizations,
                                     std::vector<std::string> conceptualization_rows,
                                     std::vector<AbstractTriple> triples,
                                     std::vector<std::string> triple_rows,
                                     const LoadOptions& options);

  const EventLookup& events() const noexcept { return events_; }
  const std::vector<Conceptualization>& conceptualizations() const noexcept {
    return conceptualizations_;
  }
  const std::vector<AbstractTriple>& triples() const noexcept { return triples_; }
  const LoadDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  const EventRecord& event(const EventId& id) const;
  const Conceptualization* find_conceptualization(const std::string& key) const;
  const AbstractTriple* find_triple(const std::string& key) const;

  std::vector<const Conceptualization*> labeled_conceptualizations() const;
  std::vector<const Conceptualization*> unlabeled_conceptualizations() const;
  std::vector<const AbstractTriple*> labeled_triples() const;
  std::vector<const AbstractTriple*> unlabeled_triples() const;

  /// Conceptualized head text of a reference.
  std::string head_text(const ConceptualizationRef& ref) const;

 private:
  EventLookup events_;
  std::vector<Conceptualization> conceptualizations_;
  std::vector<AbstractTriple> triples_;
  std::unordered_map<std::string, std::size_t> concept_by_key_;
  std::unordered_map<std::string, std::size_t> triple_by_key_;
  LoadDiagnostics diagnostics_;
};

DatasetBundle load_bundle(const std::filesystem::path& events_path,
                          const std::filesystem::path& conceptualizations_path,
                          const std::filesystem::path& triples_path,
                          const LoadOptions& options = {});

/// Canonical one-line JSON encodings (fields in the documented order, compact).
std::string to_jsonl(const EventRecord& event);
std::string to_jsonl(const Conceptualization& c);
std::string to_jsonl(const AbstractTriple& t);

/// Writes events.jsonl, conceptualizations.jsonl and triples.jsonl into `dir`.
void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;

  std::size_t& at(Split split);
  std::size_t at(Split split) const;
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

struct ConceptualizationSummary {
  std::size_t unique_events = 0;
  std::size_t unique_instances = 0;  // distinct (event, span) pairs
  std::size_t unique_concepts = 0;
  std::size_t conceptualizations = 0;
  double avg_concepts_per_event = 0.0;
  double avg_concepts_per_instance = 0.0;
};

/// Corpus statistics. "events" counts (event, concept) rows per split as the released
/// tables do; `unique_events` counts distinct event ids per split.
struct StatsReport {
  SplitCounts labeled_events;
  SplitCounts labeled_triples;
  SplitCounts unlabeled_events;
  SplitCounts unlabeled_triples;
  SplitCounts labeled_unique_events;
  SplitCounts unlabeled_unique_events;
  ConceptualizationSummary labeled;
  ConceptualizationSummary unlabeled;
  ConceptualizationSummary total;
  std::map<std::string, std::size_t> labeled_triples_by_relation;
  std::map<std::string, std::size_t> unlabeled_triples_by_relation;
  std::size_t duplicates_dropped = 0;
};

StatsReport compute_stats(const DatasetBundle& bundle);
nlohmann::ordered_json to_json(const StatsReport& report);

}  // namespace catkb
