#pragma once

#include <map>
#include <string>
#include <vector>

#include "catkb/core.hpp"
#include "catkb/dataset.hpp"
#include "catkb/store.hpp"

namespace catkb {

enum class IndexSource { gold, pseudo };

struct IndexedConcept {
  InstanceSpan span;
  Concept concept_;
  IndexSource source = IndexSource::gold;
};

struct IndexedInstance {
  EventId event;
  InstanceSpan span;
};

/// Positive conceptualizations, searchable by event (forward) and by concept (inverse).
///
/// Forward lists are sorted by (span.start, span.end, concept); inverse lists by
/// (event, span.start, span.end). Every inverse entry has a matching forward entry.
struct ConceptIndex {
  std::map<EventId, std::vector<IndexedConcept>> forward;
  std::map<std::string, std::vector<IndexedInstance>> inverse;

  std::size_t inverse_size() const;
  const std::vector<IndexedConcept>* concepts_of(const EventId& event) const;
  const std::vector<IndexedInstance>* instances_of(const std::string& canonical_concept) const;
};

/// Indexes gold-positive conceptualizations plus, when `pseudo` is given, the positive
/// records of an event-task pseudo-label store. Negatives of either kind are left out.
/// Throws IntegrityError for a pseudo record that names an unknown conceptualization.
ConceptIndex build_index(const DatasetBundle& bundle, const PseudoLabelStore* pseudo = nullptr);

}  // namespace catkb
