#include "catkb/pipeline.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

#include "catkb/error.hpp"

namespace catkb {

using nlohmann::json;
using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (!(0.0 <= t_minus && t_minus < t_plus && t_plus <= 1.0)) {
    throw ConfigError("thresholds must satisfy 0 <= t_minus < t_plus <= 1 (got t_minus=" +
                      std::to_string(t_minus) + ", t_plus=" + std::to_string(t_plus) + ")");
  }
  if (m < 0) throw ConfigError("m must be >= 0");
  if (n < 0) throw ConfigError("n must be >= 0");
  if (refinement_rounds < 0) throw ConfigError("refinement_rounds must be >= 0");
  if (!(wrong_head_threshold >= 0.0 && wrong_head_threshold <= 1.0)) {
    throw ConfigError("wrong_head_threshold must lie in [0, 1]");
  }
  if (!(export_threshold >= 0.0 && export_threshold <= 1.0)) {
    throw ConfigError("export_threshold must lie in [0, 1]");
  }
  if (teacher_epochs < 1) throw ConfigError("teacher_epochs must be >= 1");
  if (student_epochs < 1) throw ConfigError("student_epochs must be >= 1");
  prompts.validate();
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

void take_int(const json& j, const char* key, int& field) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(std::string("config field '") + key + "' must be an integer");
  }
  field = j.at(key).get<int>();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  static const std::set<std::string> known{
      "t_plus",         "t_minus",          "m",
      "n",              "refinement_rounds", "wrong_head_threshold",
      "export_threshold", "random_seed",    "teacher_epochs",
      "student_epochs", "prompts"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  PipelineConfig c;
  take(j, "t_plus", c.t_plus);
  take(j, "t_minus", c.t_minus);
  take_int(j, "m", c.m);
  take_int(j, "n", c.n);
  take_int(j, "refinement_rounds", c.refinement_rounds);
  take(j, "wrong_head_threshold", c.wrong_head_threshold);
  take(j, "export_threshold", c.export_threshold);
  if (j.contains("random_seed")) {
    const json& seed = j.at("random_seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      throw ConfigError("config field 'random_seed' must be a non-negative integer");
    }
    c.random_seed = j.at("random_seed").get<std::uint64_t>();
  }
  take_int(j, "teacher_epochs", c.teacher_epochs);
  take_int(j, "student_epochs", c.student_epochs);
  if (j.contains("prompts")) c.prompts = PromptConfig::from_json(j.at("prompts"));
  c.validate();
  return c;
}

ordered_json PipelineConfig::to_json() const {
  return ordered_json{{"t_plus", t_plus},
                      {"t_minus", t_minus},
                      {"m", m},
                      {"n", n},
                      {"refinement_rounds", refinement_rounds},
                      {"wrong_head_threshold", wrong_head_threshold},
                      {"export_threshold", export_threshold},
                      {"random_seed", random_seed},
                      {"teacher_epochs", teacher_epochs},
                      {"student_epochs", student_epochs},
                      {"prompts", prompts.to_json()}};
}

PseudoLabelStore band_scores(Task task, const std::vector<std::string>& keys,
                             const std::vector<double>& scores, const PipelineConfig& cfg,
                             int generation, Origin origin) {
  if (keys.size() != scores.size()) {
    throw ContractError("band_scores: " + std::to_string(keys.size()) + " keys but " +
                        std::to_string(scores.size()) + " scores");
  }
  PseudoLabelStore store(task, generation);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    store.put(PseudoLabelRecord{keys[i], task, scores[i],
                                assign_band(scores[i], cfg.t_plus, cfg.t_minus), origin,
                                generation});
  }
  return store;
}

PseudoLabelStore assign_pseudo_labels(Task task, const std::vector<PromptedItem>& items,
                                      const ScorerBackend& backend, const PipelineConfig& cfg) {
  std::vector<std::string> keys;
  std::vector<std::string> prompts;
  keys.reserve(items.size());
  prompts.reserve(items.size());
  for (const auto& item : items) {
    keys.push_back(item.key);
    prompts.push_back(item.prompt);
  }
  const std::vector<double> scores = score_prompts(backend, task, std::move(prompts));
  return band_scores(task, keys, scores, cfg, 0, Origin::teacher);
}

std::vector<PromptedItem> unlabeled_teacher_items(const DatasetBundle& bundle, Task task,
                                                  const PromptForge& forge) {
  std::vector<PromptedItem> items;
  if (task == Task::event_conceptualization) {
    for (const Conceptualization* c : bundle.unlabeled_conceptualizations()) {
      items.push_back({c->key(), forge.teacher_event_prompt(bundle.event(c->ref.event).text,
                                                             c->ref)});
    }
  } else {
    for (const AbstractTriple* t : bundle.unlabeled_triples()) {
      items.push_back({t->key(), forge.teacher_triple_prompt(bundle.head_text(t->head),
                                                              t->relation, t->tail)});
    }
  }
  return items;
}

TeacherScores::TeacherScores(const DatasetBundle& bundle, const PromptForge& forge,
                             const ScorerBackend& teacher)
    : bundle_(bundle), forge_(forge), teacher_(teacher) {}

void TeacherScores::prime(const std::vector<ConceptualizationRef>& refs) {
  std::vector<std::string> keys;
  std::vector<std::string> prompts;
  std::set<std::string> pending;
  for (const auto& ref : refs) {
    std::string key = ref.key();
    if (scores_.contains(key) || !pending.insert(key).second) continue;
    prompts.push_back(forge_.teacher_event_prompt(bundle_.event(ref.event).text, ref));
    keys.push_back(std::move(key));
  }
  if (prompts.empty()) return;
  const std::vector<double> scores =
      score_prompts(teacher_, Task::event_conceptualization, std::move(prompts));
  for (std::size_t i = 0; i < keys.size(); ++i) scores_.emplace(keys[i], scores[i]);
}

double TeacherScores::get(const ConceptualizationRef& ref) {
  const std::string key = ref.key();
  auto it = scores_.find(key);
  if (it == scores_.end()) {
    prime({ref});
    it = scores_.find(key);
  }
  return it->second;
}

namespace {

template <typename T>
void rank_and_truncate(std::vector<std::pair<double, T>>& ranked, int limit,
                       const auto& text_of) {
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return text_of(a.second) < text_of(b.second);
  });
  if (ranked.size() > static_cast<std::size_t>(limit)) ranked.erase(ranked.begin() + limit, ranked.end());
}

}  // namespace

std::vector<Concept> retrieve_alternative_concepts(const ConceptualizationRef& target,
                                                   const ConceptIndex& index,
                                                   TeacherScores& teacher, int m) {
  if (m <= 0) return {};
  const auto* entries = index.concepts_of(target.event);
  if (entries == nullptr) return {};
  std::vector<ConceptualizationRef> candidates;
  std::set<std::string> seen;
  for (const auto& e : *entries) {
    if (e.span.start != target.span.start || e.span.end != target.span.end) continue;
    if (e.concept_ == target.concept_ || !seen.insert(e.concept_.text()).second) continue;
    candidates.push_back(ConceptualizationRef{target.event, e.span, e.concept_});
  }
  teacher.prime(candidates);
  std::vector<std::pair<double, Concept>> ranked;
  for (const auto& ref : candidates) ranked.emplace_back(teacher.get(ref), ref.concept_);
  rank_and_truncate(ranked, m, [](const Concept& c) -> const std::string& { return c.text(); });
  std::vector<Concept> out;
  for (auto& [score, concept_] : ranked) out.push_back(std::move(concept_));
  return out;
}

std::vector<std::string> retrieve_instantiations(const ConceptualizationRef& head,
                                                 const ConceptIndex& index,
                                                 TeacherScores& teacher, int n) {
  if (n <= 0) return {};
  const auto* entries = index.instances_of(head.concept_.text());
  if (entries == nullptr) return {};
  std::vector<ConceptualizationRef> candidates;
  for (const auto& e : *entries) {
    if (e.event == head.event || e.span.text == head.span.text) continue;
    candidates.push_back(ConceptualizationRef{e.event, e.span, head.concept_});
  }
  teacher.prime(candidates);
  std::map<std::string, double> best;
  for (const auto& ref : candidates) {
    const double s = teacher.get(ref);
    auto [it, inserted] = best.emplace(ref.span.text, s);
    if (!inserted) it->second = std::max(it->second, s);
  }
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [text, score] : best) ranked.emplace_back(score, text);
  rank_and_truncate(ranked, n, [](const std::string& s) -> const std::string& { return s; });
  std::vector<std::string> out;
  for (auto& [score, text] : ranked) out.push_back(std::move(text));
  return out;
}

std::string student_prompt(const DatasetBundle& bundle, const Conceptualization& c,
                           const ConceptIndex& index, TeacherScores& teacher,
                           const PromptForge& forge, const PipelineConfig& cfg) {
  return forge.student_event_prompt(bundle.event(c.ref.event).text, c.ref,
                                    retrieve_alternative_concepts(c.ref, index, teacher, cfg.m));
}

std::string student_prompt(const DatasetBundle& bundle, const AbstractTriple& t,
                           const ConceptIndex& index, TeacherScores& teacher,
                           const PromptForge& forge, const PipelineConfig& cfg) {
  return forge.student_triple_prompt(bundle.head_text(t.head), t.relation, t.tail,
                                     retrieve_instantiations(t.head, index, teacher, cfg.n));
}

namespace {

bool in_splits(Split s, const std::vector<Split>& splits) {
  return std::find(splits.begin(), splits.end(), s) != splits.end();
}

// Instantiations depend only on the head, which many triples share.
class TriplePrompter {
 public:
  TriplePrompter(const DatasetBundle& bundle, const ConceptIndex& index, TeacherScores& teacher,
                 const PromptForge& forge, const PipelineConfig& cfg)
      : bundle_(bundle), index_(index), teacher_(teacher), forge_(forge), cfg_(cfg) {}

  std::string operator()(const AbstractTriple& t) {
    const std::string key = t.head.key();
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, retrieve_instantiations(t.head, index_, teacher_, cfg_.n)).first;
    }
    return forge_.student_triple_prompt(bundle_.head_text(t.head), t.relation, t.tail,
                                        it->second);
  }

 private:
  const DatasetBundle& bundle_;
  const ConceptIndex& index_;
  TeacherScores& teacher_;
  const PromptForge& forge_;
  const PipelineConfig& cfg_;
  std::unordered_map<std::string, std::vector<std::string>> cache_;
};

std::optional<int> pseudo_label(const PseudoLabelRecord* r) {
  if (r == nullptr) return std::nullopt;
  if (r->band == Band::positive) return 1;
  if (r->band == Band::negative) return 0;
  return std::nullopt;
}

}  // namespace

StudentData compose_student_data(const DatasetBundle& bundle, const PseudoLabelStore& event_store,
                                 const PseudoLabelStore& triple_store, const ConceptIndex& index,
                                 TeacherScores& teacher, const PromptForge& forge,
                                 const PipelineConfig& cfg, const std::vector<Split>& splits) {
  StudentData data;
  for (const auto& c : bundle.conceptualizations()) {
    if (!in_splits(c.split, splits)) continue;
    std::optional<int> label;
    ExampleSource source = ExampleSource::gold;
    if (c.label) {
      label = to_int(*c.label);
    } else {
      label = pseudo_label(event_store.find(c.key()));
      source = ExampleSource::pseudo;
    }
    if (!label) continue;
    data.event.push_back(StudentExample{c.key(), student_prompt(bundle, c, index, teacher, forge, cfg),
                                        *label, source, c.split});
  }
  TriplePrompter prompter(bundle, index, teacher, forge, cfg);
  for (const auto& t : bundle.triples()) {
    if (!in_splits(t.split, splits)) continue;
    std::optional<int> label;
    ExampleSource source = ExampleSource::gold;
    if (t.label) {
      label = to_int(*t.label);
    } else {
      label = pseudo_label(triple_store.find(t.key()));
      source = ExampleSource::pseudo;
    }
    if (!label) continue;
    data.triple.push_back(StudentExample{t.key(), prompter(t), *label, source, t.split});
  }
  return data;
}

PseudoLabelStore propagate_negatives(const PseudoLabelStore& event_store,
                                     const PseudoLabelStore& triple_store,
                                     const DatasetBundle& bundle,
                                     const ScorerBackend& event_backend, const PromptForge& forge,
                                     const PipelineConfig& cfg) {
  if (event_store.task() != Task::event_conceptualization ||
      triple_store.task() != Task::triple_conceptualization) {
    throw ContractError("propagate_negatives needs an event store and a triple store");
  }
  std::map<std::string, double> head_scores;
  std::vector<std::string> unscored_keys;
  std::vector<std::string> unscored_prompts;
  for (const auto& [key, record] : triple_store.records()) {
    const AbstractTriple* t = bundle.find_triple(key);
    if (t == nullptr) {
      throw IntegrityError("pseudo-label record references unknown triple '" + key + "'");
    }
    const std::string head_key = t->head.key();
    if (head_scores.contains(head_key)) continue;
    if (const PseudoLabelRecord* h = event_store.find(head_key)) {
      head_scores.emplace(head_key, h->score);
      continue;
    }
    const Conceptualization* c = bundle.find_conceptualization(head_key);
    if (c != nullptr && c->label) {
      head_scores.emplace(head_key, *c->label == Label::positive ? 1.0 : 0.0);
      continue;
    }
    head_scores.emplace(head_key, 0.0);
    unscored_keys.push_back(head_key);
    unscored_prompts.push_back(
        forge.teacher_event_prompt(bundle.event(t->head.event).text, t->head));
  }
  const std::vector<double> scores =
      score_prompts(event_backend, Task::event_conceptualization, std::move(unscored_prompts));
  for (std::size_t i = 0; i < unscored_keys.size(); ++i) head_scores[unscored_keys[i]] = scores[i];

  PseudoLabelStore out(triple_store.task(), triple_store.generation());
  for (const auto& [key, record] : triple_store.records()) {
    PseudoLabelRecord r = record;
    if (head_scores.at(bundle.find_triple(key)->head.key()) < cfg.wrong_head_threshold) {
      r.band = Band::negative;
    }
    out.put(std::move(r));
  }
  return out;
}

RefinedStores refine_pseudo_labels(const PseudoLabelStore& event_store,
                                   const PseudoLabelStore& triple_store,
                                   const ScorerBackend& event_student,
                                   const ScorerBackend& triple_student,
                                   const DatasetBundle& bundle, const ConceptIndex& index,
                                   TeacherScores& teacher, const PromptForge& forge,
                                   const PipelineConfig& cfg) {
  const int generation = std::max(event_store.generation(), triple_store.generation()) + 1;

  std::vector<std::string> keys;
  std::vector<std::string> prompts;
  for (const auto& [key, record] : event_store.records()) {
    const Conceptualization* c = bundle.find_conceptualization(key);
    if (c == nullptr) {
      throw IntegrityError("pseudo-label record references unknown conceptualization '" + key +
                           "'");
    }
    keys.push_back(key);
    prompts.push_back(student_prompt(bundle, *c, index, teacher, forge, cfg));
  }
  std::vector<double> scores =
      score_prompts(event_student, Task::event_conceptualization, std::move(prompts));
  PseudoLabelStore event_next = band_scores(Task::event_conceptualization, keys, scores, cfg,
                                            generation, Origin::student);

  keys.clear();
  prompts.clear();
  TriplePrompter prompter(bundle, index, teacher, forge, cfg);
  for (const auto& [key, record] : triple_store.records()) {
    const AbstractTriple* t = bundle.find_triple(key);
    if (t == nullptr) {
      throw IntegrityError("pseudo-label record references unknown triple '" + key + "'");
    }
    keys.push_back(key);
    prompts.push_back(prompter(*t));
  }
  scores = score_prompts(triple_student, Task::triple_conceptualization, std::move(prompts));
  PseudoLabelStore triple_next = band_scores(Task::triple_conceptualization, keys, scores, cfg,
                                             generation, Origin::student);

  triple_next = propagate_negatives(event_next, triple_next, bundle, event_student, forge, cfg);
  return RefinedStores{std::move(event_next), std::move(triple_next)};
}

}  // namespace catkb
