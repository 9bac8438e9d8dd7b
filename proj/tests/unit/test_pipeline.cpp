#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "catkb/backends.hpp"
#include "catkb/error.hpp"
#include "catkb/io.hpp"
#include "catkb/logistic_scorer.hpp"
#include "catkb/pipeline.hpp"
#include "catkb/text.hpp"
#include "fixtures.hpp"
#include "synthetic_world.hpp"

using namespace catkb;
using namespace catkb::testing;

namespace {

// The running vacation example: one event with four gold concepts on the same span and three
// other events conceptualized as "relaxing event".
struct VacationFixture {
  EventRecord vacation = event("v", "PersonX is on vacation", {"is on vacation"});
  EventRecord party = event("p", "PersonX joins party", {"PersonX joins party"});
  EventRecord holiday = event("h", "PersonX wants to go on a holiday", {"go on a holiday"});
  EventRecord pause = event("b", "Take a break", {"Take a break"});
  DatasetBundle bundle;
  PromptForge forge;

  VacationFixture() {
    std::vector<Conceptualization> cs;
    for (const char* c : {"relaxing event", "traveling", "break", "holiday"}) {
      cs.push_back(conceptualization(vacation, "is on vacation", c, Label::positive));
    }
    cs.push_back(conceptualization(party, "PersonX joins party", "relaxing event", Label::positive));
    cs.push_back(conceptualization(holiday, "go on a holiday", "relaxing event", Label::positive));
    cs.push_back(conceptualization(pause, "Take a break", "relaxing event", Label::positive));
    std::vector<AbstractTriple> ts{
        triple(cs[0].ref, Relation::xIntent, "have fun", std::nullopt)};
    bundle = DatasetBundle::build({vacation, party, holiday, pause}, cs, ts);
  }

  std::string prompt(const EventRecord& e, const std::string& instance,
                     const std::string& c) const {
    return forge.teacher_event_prompt(e.text, ref(e, instance, c));
  }

  RecordedScorer teacher(double holiday_score = 0.7) const {
    return RecordedScorer({{prompt(vacation, "is on vacation", "traveling"), 0.9},
                           {prompt(vacation, "is on vacation", "break"), 0.8},
                           {prompt(vacation, "is on vacation", "holiday"), holiday_score},
                           {prompt(party, "PersonX joins party", "relaxing event"), 0.9},
                           {prompt(holiday, "go on a holiday", "relaxing event"), 0.8},
                           {prompt(pause, "Take a break", "relaxing event"), 0.7}},
                          "vacation-teacher", 0.5);
  }
};

std::vector<std::string> texts(const std::vector<Concept>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.text());
  return out;
}

PseudoLabelRecord rec(const std::string& key, Task task, double score, Band band,
                      int generation = 0) {
  return PseudoLabelRecord{key, task, score, band,
                           generation == 0 ? Origin::teacher : Origin::student, generation};
}

// A backend whose train() always fails.
struct BrokenTrainer final : ScorerBackend {
  Capabilities capabilities() const override { return {true}; }
  std::string identity() const override { return "broken@1"; }
  std::vector<double> score(const ScoreBatch& b) const override {
    return std::vector<double>(b.prompts.size(), 0.5);
  }
  double train(Task, const std::vector<TrainingExample>&, int) override {
    throw TransportError("trainer went away");
  }
};

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config defaults, validation and json") {
    const PipelineConfig d;
    CHECK(d.t_plus == 0.9);
    CHECK(d.t_minus == 0.1);
    CHECK(d.m == 9);
    CHECK(d.n == 2);
    CHECK(d.refinement_rounds == 1);
    CHECK(d.wrong_head_threshold == 0.5);
    CHECK(d.export_threshold == 0.95);
    CHECK_NOTHROW(d.validate());

    CHECK_THROWS_AS(PipelineConfig::from_json({{"t_minus", 0.9}, {"t_plus", 0.9}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"t_plus", 1.2}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"m", -1}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"n", 1.5}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"refinement_rounds", -1}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"T_plus", 0.8}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::array()), ConfigError);

    const PipelineConfig c = PipelineConfig::from_json({{"m", 3}, {"random_seed", 42}});
    CHECK(c.m == 3);
    CHECK(c.random_seed == 42);
    CHECK(PipelineConfig::from_json(c.to_json()).to_json() == c.to_json());
    CHECK_THROWS_AS(PipelineConfig::from_json({{"random_seed", -1}}), ConfigError);
  }

  TEST_CASE("assign_pseudo_labels bands teacher scores") {
    const RecordedScorer teacher({{"a", 0.95}, {"b", 0.05}, {"c", 0.5}});
    const PipelineConfig cfg;
    const PseudoLabelStore store = assign_pseudo_labels(
        Task::event_conceptualization, {{"ka", "a"}, {"kb", "b"}, {"kc", "c"}}, teacher, cfg);
    CHECK(store.generation() == 0);
    CHECK(store.find("ka")->band == Band::positive);
    CHECK(store.find("kb")->band == Band::negative);
    CHECK(store.find("kc")->band == Band::discarded);
    CHECK(store.find("ka")->origin == Origin::teacher);

    CHECK(assign_pseudo_labels(Task::triple_conceptualization, {}, teacher, cfg).empty());
  }

  TEST_CASE("band counts match an independent recount") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::unordered_map<std::string, double> scores;
    std::vector<PromptedItem> items;
    std::size_t pos = 0, neg = 0, mid = 0;
    for (int i = 0; i < 1000; ++i) {
      const double s = u(rng);
      const std::string p = "prompt " + std::to_string(i);
      scores.emplace(p, s);
      items.push_back({"key " + std::to_string(i), p});
      if (s > 0.9) ++pos;
      else if (s < 0.1) ++neg;
      else ++mid;
    }
    const PseudoLabelStore store = assign_pseudo_labels(
        Task::event_conceptualization, items, RecordedScorer(scores), PipelineConfig{});
    CHECK(store.counts() == BandCounts{pos, neg, mid});
    CHECK(store.size() == 1000);
  }

  TEST_CASE("alternative concepts follow teacher order") {
    const VacationFixture f;
    const RecordedScorer teacher = f.teacher();
    TeacherScores scores(f.bundle, f.forge, teacher);
    const ConceptIndex index = build_index(f.bundle);
    const auto target = ref(f.vacation, "is on vacation", "relaxing event");
    CHECK(texts(retrieve_alternative_concepts(target, index, scores, 3)) ==
          std::vector<std::string>{"traveling", "break", "holiday"});
    CHECK(texts(retrieve_alternative_concepts(target, index, scores, 2)) ==
          std::vector<std::string>{"traveling", "break"});
    CHECK(retrieve_alternative_concepts(target, index, scores, 0).empty());
    CHECK(texts(retrieve_alternative_concepts(target, index, scores, 9)).size() == 3);

    const auto other = ref(f.vacation, "is on vacation", "holiday");
    CHECK(texts(retrieve_alternative_concepts(other, index, scores, 9)) ==
          std::vector<std::string>{"traveling", "break", "relaxing event"});
  }

  TEST_CASE("equal scores fall back to concept text order") {
    const VacationFixture f;
    const RecordedScorer teacher = f.teacher(0.8);
    TeacherScores scores(f.bundle, f.forge, teacher);
    const ConceptIndex index = build_index(f.bundle);
    CHECK(texts(retrieve_alternative_concepts(ref(f.vacation, "is on vacation", "traveling"),
                                              index, scores, 3)) ==
          std::vector<std::string>{"break", "holiday", "relaxing event"});
  }

  TEST_CASE("instantiations and the filled student prompts") {
    const VacationFixture f;
    const RecordedScorer teacher = f.teacher();
    TeacherScores scores(f.bundle, f.forge, teacher);
    const ConceptIndex index = build_index(f.bundle);
    const auto head = ref(f.vacation, "is on vacation", "relaxing event");
    CHECK(retrieve_instantiations(head, index, scores, 3) ==
          std::vector<std::string>{"PersonX joins party", "go on a holiday", "Take a break"});
    CHECK(retrieve_instantiations(head, index, scores, 0).empty());
    CHECK(retrieve_instantiations(ref(f.vacation, "is on vacation", "traveling"), index, scores,
                                  3)
              .empty());

    PipelineConfig cfg;
    cfg.m = 3;
    cfg.n = 3;
    const std::string event_prompt =
        student_prompt(f.bundle, f.bundle.conceptualizations()[0], index, scores, f.forge, cfg);
    CHECK(event_prompt ==
          "[CLS] PersonX <c>is on vacation</c> [SEP] relaxing event [SEP] traveling, break, "
          "holiday");
    const std::string triple_prompt =
        student_prompt(f.bundle, f.bundle.triples()[0], index, scores, f.forge, cfg);
    CHECK(triple_prompt ==
          "[CLS] PersonX relaxing event [SEP] because PersonX wanted [SEP] have fun [SEP] PersonX "
          "joins party, go on a holiday, Take a break");
  }

  TEST_CASE("instantiations keep the top n and skip the head's own instance") {
    std::vector<EventRecord> events;
    std::vector<Conceptualization> cs;
    const std::vector<double> s{0.3, 0.9, 0.5, 0.9, 0.1};
    std::unordered_map<std::string, double> recorded;
    const PromptForge forge;
    events.push_back(event("self", "PersonX eats soup", {"soup"}));
    cs.push_back(conceptualization(events.back(), "soup", "meal", Label::positive));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string dish = "dish" + std::string(1, static_cast<char>('e' - i));
      events.push_back(event("e" + std::to_string(i), "PersonX eats " + dish, {dish}));
      cs.push_back(conceptualization(events.back(), dish, "meal", Label::positive));
      recorded[forge.teacher_event_prompt(events.back().text, cs.back().ref)] = s[i];
    }
    // Another event whose instance text equals the head's.
    events.push_back(event("twin", "PersonX likes soup", {"soup"}));
    cs.push_back(conceptualization(events.back(), "soup", "meal", Label::positive));
    recorded[forge.teacher_event_prompt(events.back().text, cs.back().ref)] = 1.0;

    const DatasetBundle bundle = DatasetBundle::build(events, cs, {});
    const RecordedScorer teacher(recorded, "fixture", 0.0);
    TeacherScores scores(bundle, forge, teacher);
    const ConceptIndex index = build_index(bundle);
    // Scores 0.9 go to "dishd" (i=1) and "dishb" (i=3); text order breaks the tie.
    CHECK(retrieve_instantiations(cs[0].ref, index, scores, 2) ==
          std::vector<std::string>{"dishb", "dishd"});
    const auto all = retrieve_instantiations(cs[0].ref, index, scores, 10);
    CHECK(all == std::vector<std::string>{"dishb", "dishd", "dishc", "dishe", "disha"});
  }

  TEST_CASE("teacher scores are taken once") {
    const VacationFixture f;
    const RecordedScorer teacher = f.teacher();
    TeacherScores scores(f.bundle, f.forge, teacher);
    std::vector<ConceptualizationRef> refs;
    for (const auto& c : f.bundle.conceptualizations()) refs.push_back(c.ref);
    scores.prime(refs);
    CHECK(scores.size() == 7);
    scores.prime(refs);
    CHECK(scores.size() == 7);
    CHECK(scores.get(refs[1]) == 0.9);
  }

  TEST_CASE("compose: 2 gold, 1 pseudo positive and 1 discarded give 3 rows") {
    const EventRecord e = event("x", "PersonX eats an apple", {"an apple"});
    std::vector<Conceptualization> cs{
        conceptualization(e, "an apple", "fruit", Label::positive),
        conceptualization(e, "an apple", "furniture", Label::negative),
        conceptualization(e, "an apple", "snack", std::nullopt),
        conceptualization(e, "an apple", "object", std::nullopt)};
    const DatasetBundle bundle = DatasetBundle::build({e}, cs, {});
    PseudoLabelStore events(Task::event_conceptualization, 0);
    events.put(rec(cs[2].key(), Task::event_conceptualization, 0.95, Band::positive));
    events.put(rec(cs[3].key(), Task::event_conceptualization, 0.5, Band::discarded));
    const PseudoLabelStore triples(Task::triple_conceptualization, 0);

    const LexicalOverlapScorer teacher;
    const PromptForge forge;
    TeacherScores scores(bundle, forge, teacher);
    const ConceptIndex index = build_index(bundle, &events);
    PipelineConfig cfg;
    const StudentData data =
        compose_student_data(bundle, events, triples, index, scores, forge, cfg);
    REQUIRE(data.event.size() == 3);
    CHECK(data.triple.empty());
    std::map<std::string, std::pair<int, ExampleSource>> by_key;
    for (const auto& ex : data.event) by_key[ex.item_key] = {ex.label, ex.source};
    CHECK(by_key.at(cs[0].key()) == std::pair{1, ExampleSource::gold});
    CHECK(by_key.at(cs[1].key()) == std::pair{0, ExampleSource::gold});
    CHECK(by_key.at(cs[2].key()) == std::pair{1, ExampleSource::pseudo});
    for (const auto& ex : data.event) {
      CHECK(ex.prompt.find(Concept(ex.item_key.substr(ex.item_key.rfind('|') + 1)).text()) !=
            std::string::npos);
    }

    cfg.m = 0;
    for (const auto& ex : compose_student_data(bundle, events, triples, index, scores, forge, cfg).event) {
      CHECK(text::split(ex.prompt, " [SEP] ").size() == 2);
    }
  }

  TEST_CASE("propagation flips exactly the triples under wrong heads") {
    const EventRecord e = event("x", "PersonX plays chess at the park", {"chess", "the park"});
    std::vector<Conceptualization> cs{
        conceptualization(e, "chess", "board game", std::nullopt),  // right head
        conceptualization(e, "chess", "sport event", std::nullopt),  // wrong head
        conceptualization(e, "the park", "outdoor place", Label::negative),  // gold-wrong head
        conceptualization(e, "the park", "public space", std::nullopt)};  // unscored head
    std::vector<AbstractTriple> ts{
        triple(cs[0].ref, Relation::xWant, "win", std::nullopt),
        triple(cs[0].ref, Relation::xAttr, "smart", std::nullopt),
        triple(cs[1].ref, Relation::xWant, "win", std::nullopt),
        triple(cs[1].ref, Relation::xAttr, "smart", std::nullopt),
        triple(cs[1].ref, Relation::xNeed, "a board", Label::positive),
        triple(cs[2].ref, Relation::xWant, "rest", std::nullopt),
        triple(cs[3].ref, Relation::xWant, "walk", std::nullopt)};
    const DatasetBundle bundle = DatasetBundle::build({e}, cs, ts);

    PseudoLabelStore events(Task::event_conceptualization, 0);
    events.put(rec(cs[0].key(), Task::event_conceptualization, 0.95, Band::positive));
    events.put(rec(cs[1].key(), Task::event_conceptualization, 0.2, Band::discarded));
    PseudoLabelStore triples(Task::triple_conceptualization, 0);
    triples.put(rec(ts[0].key(), Task::triple_conceptualization, 0.93, Band::positive));
    triples.put(rec(ts[1].key(), Task::triple_conceptualization, 0.5, Band::discarded));
    triples.put(rec(ts[2].key(), Task::triple_conceptualization, 0.93, Band::positive));
    triples.put(rec(ts[3].key(), Task::triple_conceptualization, 0.5, Band::discarded));
    triples.put(rec(ts[5].key(), Task::triple_conceptualization, 0.97, Band::positive));
    triples.put(rec(ts[6].key(), Task::triple_conceptualization, 0.97, Band::positive));

    const PromptForge forge;
    const RecordedScorer backend(
        {{forge.teacher_event_prompt(e.text, cs[3].ref), 0.3}}, "heads");
    const PseudoLabelStore out =
        propagate_negatives(events, triples, bundle, backend, forge, PipelineConfig{});
    CHECK(out.size() == triples.size());
    CHECK(out.find(ts[0].key())->band == Band::positive);
    CHECK(out.find(ts[1].key())->band == Band::discarded);
    CHECK(out.find(ts[2].key())->band == Band::negative);
    CHECK(out.find(ts[3].key())->band == Band::negative);
    CHECK(out.find(ts[2].key())->score == 0.93);
    CHECK(out.find(ts[4].key()) == nullptr);
    CHECK(out.find(ts[5].key())->band == Band::negative);  // gold-negative head
    CHECK(out.find(ts[6].key())->band == Band::negative);  // backend-scored head

    PipelineConfig lenient;
    lenient.wrong_head_threshold = 0.1;
    const PseudoLabelStore kept =
        propagate_negatives(events, triples, bundle, backend, forge, lenient);
    CHECK(kept.find(ts[2].key())->band == Band::positive);
    CHECK(kept.find(ts[5].key())->band == Band::negative);
  }

  TEST_CASE("refinement re-bands every pseudo-labeled item on its student prompt") {
    std::vector<EventRecord> events;
    std::vector<Conceptualization> cs;
    const std::vector<double> teacher_scores{0.92, 0.5, 0.05, 0.95, 0.5, 0.02};
    const std::vector<double> student_scores{0.4, 0.95, 0.5, 0.91, 0.09, 0.01};
    for (int i = 0; i < 6; ++i) {
      events.push_back(event("e" + std::to_string(i), "PersonX paints wall " + std::to_string(i),
                             {"wall"}));
      cs.push_back(conceptualization(events.back(), "wall", "surface", std::nullopt));
    }
    const DatasetBundle bundle = DatasetBundle::build(events, cs, {});
    const PipelineConfig cfg;
    std::vector<std::string> keys;
    for (const auto& c : cs) keys.push_back(c.key());
    const PseudoLabelStore gen0 =
        band_scores(Task::event_conceptualization, keys, teacher_scores, cfg, 0, Origin::teacher);
    const PseudoLabelStore no_triples(Task::triple_conceptualization, 0);

    const LexicalOverlapScorer teacher;
    const PromptForge forge;
    TeacherScores scores(bundle, forge, teacher);
    const ConceptIndex index = build_index(bundle, &gen0);
    std::unordered_map<std::string, double> recorded;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      recorded[student_prompt(bundle, cs[i], index, scores, forge, cfg)] = student_scores[i];
    }
    const RecordedScorer student(recorded, "student");
    const RefinedStores out = refine_pseudo_labels(gen0, no_triples, student, student, bundle,
                                                   index, scores, forge, cfg);
    CHECK(out.event.generation() == 1);
    CHECK(out.triple.generation() == 1);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const PseudoLabelRecord* r = out.event.find(keys[i]);
      REQUIRE(r != nullptr);
      CHECK(r->score == student_scores[i]);
      CHECK(r->band == assign_band(student_scores[i], 0.9, 0.1));
      CHECK(r->origin == Origin::student);
    }
    CHECK(out.event.find(keys[0])->band == Band::discarded);
    CHECK(out.event.counts() == BandCounts{2, 2, 2});
  }

  TEST_CASE("run_cat is deterministic and honours refinement_rounds") {
    WorldOptions o;
    o.events = 150;
    const SyntheticWorld world = make_world(o);
    LexicalOverlapScorer lexical;
    PipelineConfig cfg;
    cfg.random_seed = 5;
    const CatResult a = run_cat(world.bundle, cfg, {lexical, lexical});
    const CatResult b = run_cat(world.bundle, cfg, {lexical, lexical});
    CHECK(a.report.dump() == b.report.dump());
    CHECK(a.event_store.records().size() == b.event_store.records().size());
    CHECK(a.event_store.generation() == 1);
    CHECK(a.report["final_generation"] == 1);
    CHECK(a.report["generations"].size() == 2);
    CHECK_FALSE(a.report.contains("timings"));
    CHECK(a.timings.contains("fit_teacher"));

    for (const auto& [key, r] : a.triple_store.records()) {
      const AbstractTriple* t = world.bundle.find_triple(key);
      REQUIRE(t != nullptr);
      const PseudoLabelRecord* head = a.event_store.find(t->head.key());
      if (head != nullptr && head->score < cfg.wrong_head_threshold) {
        CHECK(r.band == Band::negative);
      }
    }

    cfg.refinement_rounds = 0;
    const CatResult once = run_cat(world.bundle, cfg, {lexical, lexical});
    CHECK(once.event_store.generation() == 0);
    CHECK(once.report["generations"].size() == 1);
    const PromptForge forge;
    const PseudoLabelStore teacher_only =
        assign_pseudo_labels(Task::event_conceptualization,
                             unlabeled_teacher_items(world.bundle, Task::event_conceptualization,
                                                     forge),
                             lexical, cfg);
    CHECK(once.event_store.records().size() == teacher_only.records().size());
    for (const auto& [key, r] : teacher_only.records()) {
      CHECK(once.event_store.find(key)->band == r.band);
      CHECK(once.event_store.find(key)->score == r.score);
    }
  }

  TEST_CASE("run_cat persists stores and student data") {
    WorldOptions o;
    o.events = 80;
    const SyntheticWorld world = make_world(o);
    LexicalOverlapScorer lexical;
    TempDir dir("runcat");
    const CatResult r = run_cat(world.bundle, PipelineConfig{}, {lexical, lexical}, dir.path());
    for (const char* f : {"report.json", "stores/event_conceptualization.gen0.jsonl",
                          "stores/event_conceptualization.gen1.jsonl",
                          "stores/triple_conceptualization.gen1.jsonl",
                          "student_data/event_conceptualization.gen0.jsonl",
                          "student_data/triple_conceptualization.gen1.jsonl"}) {
      CAPTURE(f);
      CHECK(std::filesystem::exists(dir / f));
    }
    const PseudoLabelStore back = read_store(dir / "stores/event_conceptualization.gen1.jsonl");
    CHECK(back.size() == r.event_store.size());
    CHECK(std::find(r.outputs.begin(), r.outputs.end(), std::filesystem::path("report.json")) !=
          r.outputs.end());
  }

  TEST_CASE("failing stages are named") {
    WorldOptions o;
    o.events = 60;
    const SyntheticWorld world = make_world(o);
    RecordedScorer empty({}, "empty");
    try {
      run_cat(world.bundle, PipelineConfig{}, {empty, empty});
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "score_teacher");
      CHECK(e.cause() == ErrorKind::lookup);
    }

    LexicalOverlapScorer lexical;
    BrokenTrainer broken;
    try {
      run_cat(world.bundle, PipelineConfig{}, {lexical, broken});
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "fit_student:0");
      CHECK(e.cause() == ErrorKind::transport);
      CHECK(std::string(e.what()).find("fit_student:0") != std::string::npos);
    }

    const DatasetBundle unlabeled = DatasetBundle::build({}, {}, {});
    CHECK_THROWS_AS(run_cat(unlabeled, PipelineConfig{}, {lexical, lexical}), ContractError);
    PipelineConfig bad;
    bad.t_minus = 0.95;
    CHECK_THROWS_AS(run_cat(world.bundle, bad, {lexical, lexical}), ConfigError);
  }

  TEST_CASE("export selects scores above the threshold") {
    const EventRecord e = event("x", "PersonX bakes bread", {"bread"});
    std::vector<Conceptualization> cs{conceptualization(e, "bread", "food", std::nullopt),
                                      conceptualization(e, "bread", "baked good", Label::positive)};
    std::vector<AbstractTriple> ts{triple(cs[0].ref, Relation::xWant, "eat", std::nullopt),
                                   triple(cs[0].ref, Relation::xAttr, "hungry", std::nullopt),
                                   triple(cs[1].ref, Relation::xNeed, "flour", Label::positive),
                                   triple(cs[1].ref, Relation::xNeed, "oven", Label::negative)};
    const DatasetBundle bundle = DatasetBundle::build({e}, cs, ts);
    PseudoLabelStore events(Task::event_conceptualization, 1);
    events.put(rec(cs[0].key(), Task::event_conceptualization, 0.97, Band::positive, 1));
    PseudoLabelStore triples(Task::triple_conceptualization, 1);
    triples.put(rec(ts[0].key(), Task::triple_conceptualization, 0.96, Band::positive, 1));
    triples.put(rec(ts[1].key(), Task::triple_conceptualization, 0.94, Band::positive, 1));

    CHECK(exported_triple_keys(bundle, triples, 0.95) ==
          std::vector<std::string>{ts[2].key(), ts[0].key()});

    TempDir dir("export");
    const PromptForge forge;
    const ExportSummary s = export_abstract_knowledge(bundle, events, triples, 0.95, forge, dir.path());
    CHECK(s.triples == 2);
    CHECK(s.conceptualizations == 2);
    const std::string comet = io::read_file(s.comet_path);
    CHECK(comet ==
          "PersonX bakes baked good\txNeed\tflour\n"
          "PersonX bakes food\txWant\teat\n");
    const std::string generative = io::read_file(s.generative_path);
    CHECK(generative.find(R"({"input":"[SOS] PersonX bakes <c>bread</c> [SEP] bread [GEN]","target":"food [EOS]"})") !=
          std::string::npos);

    // A propagated negative never leaves, whatever its score.
    triples.put(rec(ts[0].key(), Task::triple_conceptualization, 0.96, Band::negative, 1));
    CHECK(exported_triple_keys(bundle, triples, 0.95) == std::vector<std::string>{ts[2].key()});

    const PseudoLabelStore none(Task::triple_conceptualization, 0);
    const DatasetBundle unlabeled_only = DatasetBundle::build({e}, {cs[0]}, {ts[0]});
    TempDir empty_dir("export-empty");
    const ExportSummary empty = export_abstract_knowledge(
        unlabeled_only, PseudoLabelStore{}, none, 0.95, forge, empty_dir.path());
    CHECK(empty.triples == 0);
    CHECK(io::read_file(empty.comet_path).empty());
  }

  TEST_CASE("export sets are nested across thresholds") {
    const SyntheticWorld world = make_world(WorldOptions{3, 120});
    LexicalOverlapScorer lexical;
    const CatResult r = run_cat(world.bundle, PipelineConfig{}, {lexical, lexical});
    const std::vector<double> grid{0.995, 0.99, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.5};
    std::vector<std::string> previous;
    for (double t : grid) {
      auto keys = exported_triple_keys(world.bundle, r.triple_store, t);
      CHECK(std::is_sorted(keys.begin(), keys.end()));
      CHECK(std::includes(keys.begin(), keys.end(), previous.begin(), previous.end()));
      previous = std::move(keys);
    }
  }
}
