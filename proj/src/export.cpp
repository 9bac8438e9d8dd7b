#include <algorithm>

#include "catkb/error.hpp"
#include "catkb/io.hpp"
#include "catkb/pipeline.hpp"

namespace catkb {

namespace {

bool selected(const PseudoLabelRecord* r, double threshold) {
  return r != nullptr && r->band != Band::negative && r->score > threshold;
}

}  // namespace

std::vector<std::string> exported_triple_keys(const DatasetBundle& bundle,
                                              const PseudoLabelStore& triple_store,
                                              double threshold) {
  std::vector<std::string> keys;
  for (const auto& t : bundle.triples()) {
    if (t.label) {
      if (*t.label == Label::positive && t.split == Split::train) keys.push_back(t.key());
    } else if (selected(triple_store.find(t.key()), threshold)) {
      keys.push_back(t.key());
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

ExportSummary export_abstract_knowledge(const DatasetBundle& bundle,
                                        const PseudoLabelStore& event_store,
                                        const PseudoLabelStore& triple_store, double threshold,
                                        const PromptForge& forge,
                                        const std::filesystem::path& dir) {
  if (event_store.task() != Task::event_conceptualization ||
      triple_store.task() != Task::triple_conceptualization) {
    throw ContractError("export needs an event store and a triple store");
  }
  ExportSummary summary;
  summary.comet_path = dir / "comet.tsv";
  summary.generative_path = dir / "generative.jsonl";

  std::string comet;
  for (const std::string& key : exported_triple_keys(bundle, triple_store, threshold)) {
    const AbstractTriple& t = *bundle.find_triple(key);
    comet += PromptForge::comet_record(bundle.head_text(t.head), t.relation, t.tail);
    comet += '\n';
    ++summary.triples;
  }

  std::vector<const Conceptualization*> concepts;
  for (const auto& c : bundle.conceptualizations()) {
    if (c.label) {
      if (*c.label == Label::positive && c.split == Split::train) concepts.push_back(&c);
    } else if (selected(event_store.find(c.key()), threshold)) {
      concepts.push_back(&c);
    }
  }
  std::sort(concepts.begin(), concepts.end(),
            [](const Conceptualization* a, const Conceptualization* b) {
              return a->key() < b->key();
            });
  std::string generative;
  for (const Conceptualization* c : concepts) {
    const GenerativePair pair = forge.generative_concept_prompt(
        bundle.event(c->ref.event).text, c->ref.span, c->ref.concept_);
    generative += nlohmann::ordered_json{{"input", pair.input}, {"target", pair.target}}.dump();
    generative += '\n';
    ++summary.conceptualizations;
  }

  io::write_file_atomic(summary.comet_path, comet);
  io::write_file_atomic(summary.generative_path, generative);
  return summary;
}

}  // namespace catkb
