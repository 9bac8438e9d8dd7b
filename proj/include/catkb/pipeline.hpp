#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catkb/core.hpp"
#include "catkb/dataset.hpp"
#include "catkb/index.hpp"
#include "catkb/prompt.hpp"
#include "catkb/scorer.hpp"
#include "catkb/store.hpp"

namespace catkb {

struct PipelineConfig {
  double t_plus = 0.9;
  double t_minus = 0.1;
  int m = 9;
  int n = 2;
  int refinement_rounds = 1;
  double wrong_head_threshold = 0.5;
  double export_threshold = 0.95;
  std::uint64_t random_seed = 0;
  int teacher_epochs = 400;
  int student_epochs = 400;
  PromptConfig prompts;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  /// Overrides defaults with whichever keys `j` carries; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

/// An item to be scored: its store key and the prompt the scorer sees.
struct PromptedItem {
  std::string key;
  std::string prompt;
};

/// Bands already computed scores. `keys` and `scores` must have equal length.
PseudoLabelStore band_scores(Task task, const std::vector<std::string>& keys,
                             const std::vector<double>& scores, const PipelineConfig& cfg,
                             int generation, Origin origin);

/// Scores every item with `backend` and bands it into a generation-0 teacher store.
PseudoLabelStore assign_pseudo_labels(Task task, const std::vector<PromptedItem>& items,
                                      const ScorerBackend& backend, const PipelineConfig& cfg);

/// Teacher-form prompts for every unlabeled item of a task.
std::vector<PromptedItem> unlabeled_teacher_items(const DatasetBundle& bundle, Task task,
                                                  const PromptForge& forge);

/// Teacher plausibility of conceptualizations, each prompt scored at most once.
///
/// Scores are taken once and then replayed, so a backend that is later retrained (or a
/// remote service whose model is replaced) does not shift the ranking of retrieval results.
class TeacherScores {
 public:
  TeacherScores(const DatasetBundle& bundle, const PromptForge& forge,
                const ScorerBackend& teacher);

  /// Scores, in one batch, every reference not seen before.
  void prime(const std::vector<ConceptualizationRef>& refs);
  /// Scores `ref` on a miss.
  double get(const ConceptualizationRef& ref);

  std::size_t size() const noexcept { return scores_.size(); }

 private:
  const DatasetBundle& bundle_;
  const PromptForge& forge_;
  const ScorerBackend& teacher_;
  std::map<std::string, double> scores_;
};

/// Other concepts indexed on the target's (event, span), ranked by teacher score
/// descending with ties broken by concept text, at most `m`.
std::vector<Concept> retrieve_alternative_concepts(const ConceptualizationRef& target,
                                                   const ConceptIndex& index,
                                                   TeacherScores& teacher, int m);

/// Instance texts of other events indexed under the head's concept, deduplicated (keeping
/// each text's best teacher score) and without the head's own instance, ranked like
/// retrieve_alternative_concepts(), at most `n`.
std::vector<std::string> retrieve_instantiations(const ConceptualizationRef& head,
                                                 const ConceptIndex& index,
                                                 TeacherScores& teacher, int n);

enum class ExampleSource { gold, pseudo };

struct StudentExample {
  std::string item_key;
  std::string prompt;
  int label = 0;
  ExampleSource source = ExampleSource::gold;
  Split split = Split::train;
};

struct StudentData {
  std::vector<StudentExample> event;
  std::vector<StudentExample> triple;
};

/// Student-form prompts for every gold-labeled item plus every non-discarded pseudo-labeled
/// item, restricted to `splits`. Pseudo positives get label 1, pseudo negatives label 0.
StudentData compose_student_data(const DatasetBundle& bundle, const PseudoLabelStore& event_store,
                                 const PseudoLabelStore& triple_store, const ConceptIndex& index,
                                 TeacherScores& teacher, const PromptForge& forge,
                                 const PipelineConfig& cfg,
                                 const std::vector<Split>& splits = {Split::train});

/// Student-form prompt of one conceptualization or triple.
std::string student_prompt(const DatasetBundle& bundle, const Conceptualization& c,
                           const ConceptIndex& index, TeacherScores& teacher,
                           const PromptForge& forge, const PipelineConfig& cfg);
std::string student_prompt(const DatasetBundle& bundle, const AbstractTriple& t,
                           const ConceptIndex& index, TeacherScores& teacher,
                           const PromptForge& forge, const PipelineConfig& cfg);

/// Marks as negative every triple in `triple_store` whose head scores below
/// cfg.wrong_head_threshold. A head's score is its record in `event_store`; a gold-labeled
/// head without a record scores its label, and any other head is scored by `event_backend`
/// on its teacher prompt. Items absent from the store (gold triples) are never touched.
PseudoLabelStore propagate_negatives(const PseudoLabelStore& event_store,
                                     const PseudoLabelStore& triple_store,
                                     const DatasetBundle& bundle,
                                     const ScorerBackend& event_backend, const PromptForge& forge,
                                     const PipelineConfig& cfg);

struct RefinedStores {
  PseudoLabelStore event;
  PseudoLabelStore triple;
};

/// Re-scores every pseudo-labeled item (all bands) on its student prompt, re-bands it, and
/// then propagates negatives from the refined event store. Generation is incremented.
RefinedStores refine_pseudo_labels(const PseudoLabelStore& event_store,
                                   const PseudoLabelStore& triple_store,
                                   const ScorerBackend& event_student,
                                   const ScorerBackend& triple_student,
                                   const DatasetBundle& bundle, const ConceptIndex& index,
                                   TeacherScores& teacher, const PromptForge& forge,
                                   const PipelineConfig& cfg);

struct CatBackends {
  ScorerBackend& teacher;
  ScorerBackend& student;
};

struct CatResult {
  PseudoLabelStore event_store;
  PseudoLabelStore triple_store;
  nlohmann::ordered_json report;
  nlohmann::ordered_json timings;  // wall-clock seconds per stage, kept out of the report
  std::vector<std::filesystem::path> outputs;  // files written, relative to the output dir
};

/// Runs the full loop: teacher fit, pseudo-labeling, indexing, composition, student fit and
/// refinement rounds. Backends that cannot train are used as they are. When `out_dir` is
/// set, stores and student data are written after each stage, plus report.json at the end.
/// A failing stage throws StageError naming it.
CatResult run_cat(const DatasetBundle& bundle, const PipelineConfig& cfg, CatBackends backends,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct ExportSummary {
  std::size_t triples = 0;
  std::size_t conceptualizations = 0;
  std::filesystem::path comet_path;
  std::filesystem::path generative_path;
};

/// Writes comet.tsv (gold-positive train triples plus pseudo-labeled triples scoring above
/// `threshold`) and generative.jsonl (the same rule over conceptualizations) into `dir`.
/// Pseudo records banded negative are never exported. Lines are sorted by item key.
ExportSummary export_abstract_knowledge(const DatasetBundle& bundle,
                                        const PseudoLabelStore& event_store,
                                        const PseudoLabelStore& triple_store, double threshold,
                                        const PromptForge& forge,
                                        const std::filesystem::path& dir);

/// Item keys export_abstract_knowledge() would emit for the triple task.
std::vector<std::string> exported_triple_keys(const DatasetBundle& bundle,
                                              const PseudoLabelStore& triple_store,
                                              double threshold);

}  // namespace catkb
