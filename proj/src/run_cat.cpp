#include <chrono>
#include <random>

#include "catkb/error.hpp"
#include "catkb/io.hpp"
#include "catkb/metrics.hpp"
#include "catkb/pipeline.hpp"

namespace catkb {

using nlohmann::ordered_json;

namespace {

const char* source_name(ExampleSource s) { return s == ExampleSource::gold ? "gold" : "pseudo"; }

std::string store_path(Task task, int generation) {
  return "stores/" + std::string(to_string(task)) + ".gen" + std::to_string(generation) +
         ".jsonl";
}

std::string data_path(Task task, int generation) {
  return "student_data/" + std::string(to_string(task)) + ".gen" + std::to_string(generation) +
         ".jsonl";
}

ordered_json data_counts(const std::vector<StudentExample>& examples) {
  std::size_t gold = 0, pos = 0, neg = 0;
  for (const auto& ex : examples) {
    if (ex.source == ExampleSource::gold) {
      ++gold;
    } else if (ex.label == 1) {
      ++pos;
    } else {
      ++neg;
    }
  }
  return ordered_json{{"gold", gold},
                      {"pseudo_positive", pos},
                      {"pseudo_negative", neg},
                      {"total", examples.size()}};
}

std::vector<TrainingExample> shuffled_examples(const std::vector<StudentExample>& examples,
                                               std::mt19937_64& rng) {
  std::vector<TrainingExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back({ex.prompt, ex.label});
  // Fisher-Yates by hand: std::shuffle's draw sequence is implementation-defined.
  for (std::size_t i = out.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

ordered_json auc_or_null(const std::vector<double>& scores, const std::vector<int>& labels) {
  try {
    return auc(scores, labels);
  } catch (const UndefinedMetricError&) {
    return nullptr;
  }
}

class Runner {
 public:
  Runner(const DatasetBundle& bundle, const PipelineConfig& cfg, CatBackends backends,
         const std::optional<std::filesystem::path>& out_dir)
      : bundle_(bundle),
        cfg_(cfg),
        backends_(backends),
        out_dir_(out_dir),
        forge_(cfg.prompts),
        rng_(cfg.random_seed),
        teacher_scores_(bundle, forge_, backends.teacher) {}

  CatResult run();

 private:
  template <typename Fn>
  auto stage(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record_time(name, start);
      } else {
        auto result = fn();
        record_time(name, start);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e.kind(), e.what());
    } catch (const std::exception& e) {
      throw StageError(name, ErrorKind::stage, e.what());
    }
  }

  void record_time(const std::string& name, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result_.timings[name] = elapsed.count();
  }

  void write(const std::string& relative, const std::string& content) {
    if (!out_dir_) return;
    io::write_file_atomic(*out_dir_ / relative, content);
    result_.outputs.emplace_back(relative);
  }

  void persist_store(const PseudoLabelStore& store) {
    if (!out_dir_) return;
    const std::string rel = store_path(store.task(), store.generation());
    write_store(store, *out_dir_ / rel);
    result_.outputs.emplace_back(rel);
  }

  void persist_data(Task task, int generation, const std::vector<StudentExample>& examples) {
    std::string content;
    for (const auto& ex : examples) {
      content += ordered_json{{"item_key", ex.item_key},
                              {"prompt", ex.prompt},
                              {"label", ex.label},
                              {"source", source_name(ex.source)}}
                     .dump();
      content += '\n';
    }
    write(data_path(task, generation), content);
  }

  ordered_json fit_task(ScorerBackend& backend, Task task,
                        const std::vector<TrainingExample>& examples, int epochs) {
    if (!backend.capabilities().can_train) {
      return ordered_json{{"trained", false}, {"examples", examples.size()}, {"final_loss", nullptr}};
    }
    const double loss = fit(backend, task, examples, epochs);
    return ordered_json{{"trained", true}, {"examples", examples.size()}, {"final_loss", loss}};
  }

  ordered_json fit_students(const StudentData& data) {
    ordered_json out;
    out["event_conceptualization"] =
        fit_task(backends_.student, Task::event_conceptualization,
                 shuffled_examples(data.event, rng_), cfg_.student_epochs);
    out["triple_conceptualization"] =
        fit_task(backends_.student, Task::triple_conceptualization,
                 shuffled_examples(data.triple, rng_), cfg_.student_epochs);
    return out;
  }

  const DatasetBundle& bundle_;
  const PipelineConfig& cfg_;
  CatBackends backends_;
  std::optional<std::filesystem::path> out_dir_;
  PromptForge forge_;
  std::mt19937_64 rng_;
  TeacherScores teacher_scores_;
  std::map<std::string, double> teacher_triple_scores_;
  CatResult result_;
};

CatResult Runner::run() {
  ordered_json report;
  report["config"] = cfg_.to_json();
  report["backends"] = ordered_json{{"teacher", backends_.teacher.identity()},
                                    {"student", backends_.student.identity()}};
  report["bundle"] = ordered_json{
      {"events", bundle_.events().size()},
      {"conceptualizations",
       {{"labeled", bundle_.labeled_conceptualizations().size()},
        {"unlabeled", bundle_.unlabeled_conceptualizations().size()}}},
      {"triples",
       {{"labeled", bundle_.labeled_triples().size()},
        {"unlabeled", bundle_.unlabeled_triples().size()}}}};

  report["teacher"] = stage("fit_teacher", [&] {
    std::vector<TrainingExample> event_examples;
    for (const Conceptualization* c : bundle_.labeled_conceptualizations()) {
      if (c->split != Split::train) continue;
      event_examples.push_back(
          {forge_.teacher_event_prompt(bundle_.event(c->ref.event).text, c->ref),
           to_int(*c->label)});
    }
    std::vector<TrainingExample> triple_examples;
    for (const AbstractTriple* t : bundle_.labeled_triples()) {
      if (t->split != Split::train) continue;
      triple_examples.push_back(
          {forge_.teacher_triple_prompt(bundle_.head_text(t->head), t->relation, t->tail),
           to_int(*t->label)});
    }
    ordered_json out;
    out["event_conceptualization"] = fit_task(backends_.teacher, Task::event_conceptualization,
                                              event_examples, cfg_.teacher_epochs);
    out["triple_conceptualization"] = fit_task(
        backends_.teacher, Task::triple_conceptualization, triple_examples, cfg_.teacher_epochs);
    return out;
  });

  // Everything the teacher will ever be asked is scored now, before any student training
  // can touch a shared backend.
  stage("score_teacher", [&] {
    std::vector<ConceptualizationRef> refs;
    for (const auto& c : bundle_.conceptualizations()) refs.push_back(c.ref);
    teacher_scores_.prime(refs);
    std::vector<std::string> keys;
    std::vector<std::string> prompts;
    for (const auto& t : bundle_.triples()) {
      if (t.label && t.split == Split::train) continue;
      keys.push_back(t.key());
      prompts.push_back(forge_.teacher_triple_prompt(bundle_.head_text(t.head), t.relation, t.tail));
    }
    const auto scores =
        score_prompts(backends_.teacher, Task::triple_conceptualization, std::move(prompts));
    for (std::size_t i = 0; i < keys.size(); ++i) teacher_triple_scores_.emplace(keys[i], scores[i]);
  });

  PseudoLabelStore event_store;
  PseudoLabelStore triple_store(Task::triple_conceptualization, 0);
  stage("assign_pseudo_labels", [&] {
    std::vector<std::string> keys;
    std::vector<double> scores;
    for (const Conceptualization* c : bundle_.unlabeled_conceptualizations()) {
      keys.push_back(c->key());
      scores.push_back(teacher_scores_.get(c->ref));
    }
    event_store =
        band_scores(Task::event_conceptualization, keys, scores, cfg_, 0, Origin::teacher);
    keys.clear();
    scores.clear();
    for (const AbstractTriple* t : bundle_.unlabeled_triples()) {
      keys.push_back(t->key());
      scores.push_back(teacher_triple_scores_.at(t->key()));
    }
    triple_store =
        band_scores(Task::triple_conceptualization, keys, scores, cfg_, 0, Origin::teacher);
    persist_store(event_store);
    persist_store(triple_store);
  });

  ordered_json generations = ordered_json::array();
  ConceptIndex index;
  for (int generation = 0; generation <= cfg_.refinement_rounds; ++generation) {
    const std::string suffix = ":" + std::to_string(generation);
    ordered_json gen;
    gen["generation"] = generation;
    if (generation > 0) {
      stage("refine" + suffix, [&] {
        RefinedStores refined =
            refine_pseudo_labels(event_store, triple_store, backends_.student, backends_.student,
                                 bundle_, index, teacher_scores_, forge_, cfg_);
        event_store = std::move(refined.event);
        triple_store = std::move(refined.triple);
        persist_store(event_store);
        persist_store(triple_store);
      });
    }
    std::size_t propagated = 0;
    for (const auto& [key, r] : triple_store.records()) {
      if (r.band == Band::negative && r.score >= cfg_.t_minus) ++propagated;
    }
    gen["bands"] = ordered_json{{"event_conceptualization", to_json(event_store.counts())},
                                {"triple_conceptualization", to_json(triple_store.counts())}};
    gen["propagated_negatives"] = propagated;

    index = stage("build_index" + suffix, [&] { return build_index(bundle_, &event_store); });
    gen["index_entries"] = index.inverse_size();

    const StudentData data = stage("compose_student_data" + suffix, [&] {
      StudentData d = compose_student_data(bundle_, event_store, triple_store, index,
                                           teacher_scores_, forge_, cfg_);
      persist_data(Task::event_conceptualization, generation, d.event);
      persist_data(Task::triple_conceptualization, generation, d.triple);
      return d;
    });
    gen["training_data"] = ordered_json{{"event_conceptualization", data_counts(data.event)},
                                        {"triple_conceptualization", data_counts(data.triple)}};

    gen["student"] =
        stage("fit_student" + suffix, [&] { return fit_students(data); });
    generations.push_back(std::move(gen));
  }
  report["generations"] = std::move(generations);

  report["dev_auc"] = stage("evaluate", [&] {
    ordered_json out;
    std::vector<double> teacher;
    std::vector<std::string> prompts;
    std::vector<int> labels;
    for (const Conceptualization* c : bundle_.labeled_conceptualizations()) {
      if (c->split != Split::dev) continue;
      teacher.push_back(teacher_scores_.get(c->ref));
      prompts.push_back(student_prompt(bundle_, *c, index, teacher_scores_, forge_, cfg_));
      labels.push_back(to_int(*c->label));
    }
    auto student =
        score_prompts(backends_.student, Task::event_conceptualization, std::move(prompts));
    out["event_conceptualization"] = ordered_json{{"items", labels.size()},
                                                  {"teacher", auc_or_null(teacher, labels)},
                                                  {"student", auc_or_null(student, labels)}};
    teacher.clear();
    prompts.clear();
    labels.clear();
    for (const AbstractTriple* t : bundle_.labeled_triples()) {
      if (t->split != Split::dev) continue;
      teacher.push_back(teacher_triple_scores_.at(t->key()));
      prompts.push_back(student_prompt(bundle_, *t, index, teacher_scores_, forge_, cfg_));
      labels.push_back(to_int(*t->label));
    }
    student = score_prompts(backends_.student, Task::triple_conceptualization, std::move(prompts));
    out["triple_conceptualization"] = ordered_json{{"items", labels.size()},
                                                   {"teacher", auc_or_null(teacher, labels)},
                                                   {"student", auc_or_null(student, labels)}};
    return out;
  });

  report["final_generation"] = event_store.generation();
  write("report.json", report.dump(2) + "\n");

  result_.event_store = std::move(event_store);
  result_.triple_store = std::move(triple_store);
  result_.report = std::move(report);
  return std::move(result_);
}

}  // namespace

CatResult run_cat(const DatasetBundle& bundle, const PipelineConfig& cfg, CatBackends backends,
                  const std::optional<std::filesystem::path>& out_dir) {
  cfg.validate();
  if (bundle.labeled_conceptualizations().empty() || bundle.labeled_triples().empty()) {
    throw ContractError("run_cat needs labeled items for both tasks");
  }
  Runner runner(bundle, cfg, backends, out_dir);
  return runner.run();
}

}  // namespace catkb
