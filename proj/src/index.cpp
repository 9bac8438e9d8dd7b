#include "catkb/index.hpp"

#include <algorithm>
#include <tuple>

#include "catkb/error.hpp"

namespace catkb {

std::size_t ConceptIndex::inverse_size() const {
  std::size_t n = 0;
  for (const auto& [concept_, entries] : inverse) n += entries.size();
  return n;
}

const std::vector<IndexedConcept>* ConceptIndex::concepts_of(const EventId& event) const {
  const auto it = forward.find(event);
  return it == forward.end() ? nullptr : &it->second;
}

const std::vector<IndexedInstance>* ConceptIndex::instances_of(
    const std::string& canonical_concept) const {
  const auto it = inverse.find(canonical_concept);
  return it == inverse.end() ? nullptr : &it->second;
}

ConceptIndex build_index(const DatasetBundle& bundle, const PseudoLabelStore* pseudo) {
  ConceptIndex index;
  auto add = [&](const ConceptualizationRef& ref, IndexSource source) {
    index.forward[ref.event].push_back(IndexedConcept{ref.span, ref.concept_, source});
    index.inverse[ref.concept_.text()].push_back(IndexedInstance{ref.event, ref.span});
  };

  for (const auto& c : bundle.conceptualizations()) {
    if (c.label == Label::positive) add(c.ref, IndexSource::gold);
  }

  if (pseudo != nullptr) {
    if (pseudo->task() != Task::event_conceptualization) {
      throw ContractError("concept index needs an event-conceptualization pseudo-label store");
    }
    for (const auto& [key, record] : pseudo->records()) {
      const Conceptualization* c = bundle.find_conceptualization(key);
      if (c == nullptr) {
        throw IntegrityError("pseudo-label record references unknown conceptualization '" +
                             key + "'");
      }
      if (record.band != Band::positive || c->label) continue;
      add(c->ref, IndexSource::pseudo);
    }
  }

  for (auto& [event, entries] : index.forward) {
    std::sort(entries.begin(), entries.end(), [](const IndexedConcept& a, const IndexedConcept& b) {
      return std::tie(a.span.start, a.span.end, a.concept_) <
             std::tie(b.span.start, b.span.end, b.concept_);
    });
  }
  for (auto& [concept_, entries] : index.inverse) {
    std::sort(entries.begin(), entries.end(),
              [](const IndexedInstance& a, const IndexedInstance& b) {
                return std::tie(a.event, a.span.start, a.span.end) <
                       std::tie(b.event, b.span.start, b.span.end);
              });
  }
  return index;
}

}  // namespace catkb
