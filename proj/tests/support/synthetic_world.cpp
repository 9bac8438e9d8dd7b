#include "synthetic_world.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

#include "catkb/text.hpp"

namespace catkb::testing {

namespace {

const std::vector<std::string> kStems{"fruit",  "drink",   "sport",   "music",   "tool",
                                      "animal", "vehicle", "weather", "garden",  "meal",
                                      "cloth",  "chair",   "book",    "movie",   "school",
                                      "doctor"};
const std::vector<std::string> kModifiers{"fresh", "cheap", "old",   "new",   "small", "big",
                                          "local", "fancy", "plain", "quiet", "noisy", "warm"};
const std::vector<std::string> kSuffixes{"item", "thing", "kind", "stuff", "sort"};
const std::vector<std::string> kVerbs{"buys", "likes", "finds", "wants", "sees", "needs"};
const std::vector<std::string> kTailVerbs{"talk about", "think of", "look for", "ask about"};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace

SyntheticWorld make_world(const WorldOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EventRecord> events;
  std::vector<Conceptualization> concepts;
  std::vector<AbstractTriple> triples;
  SyntheticWorld world;

  for (std::size_t e = 0; e < options.events; ++e) {
    const std::size_t stem = pick(rng, kStems.size());
    const std::string modifier = kModifiers[pick(rng, kModifiers.size())];
    const std::string prefix = "PersonX " + kVerbs[pick(rng, kVerbs.size())] + " ";
    const std::string instance = modifier + " " + kStems[stem];
    const std::string event_text = prefix + instance;

    const double r = unit(rng);
    const Split split = r < 0.7 ? Split::train : (r < 0.85 ? Split::dev : Split::test);
    const bool labeled = split != Split::train || unit(rng) < options.labeled_train_fraction;

    EventRecord record{EventId("e" + std::to_string(e)), event_text, {}, split};
    const std::size_t start = text::utf8_length(prefix);
    record.spans.push_back(make_span(event_text, start, start + text::utf8_length(instance)));
    const InstanceSpan span = record.spans.front();

    std::vector<std::string> seen;
    for (std::size_t k = 0; k < options.concepts_per_event; ++k) {
      const bool truth = k == 0 || unit(rng) < 0.35;
      std::size_t concept_stem = stem;
      if (!truth) {
        do {
          concept_stem = pick(rng, kStems.size());
        } while (concept_stem == stem);
      }
      // A false candidate sometimes shares the modifier, so overlap alone is not decisive.
      std::string text = !truth && unit(rng) < 0.3
                             ? modifier + " " + kStems[concept_stem]
                             : kStems[concept_stem] + " " + kSuffixes[pick(rng, kSuffixes.size())];
      if (std::find(seen.begin(), seen.end(), text) != seen.end()) continue;
      seen.push_back(text);

      ConceptualizationRef ref{record.id, span, Concept(text)};
      Conceptualization c{ref, std::nullopt, split};
      if (labeled) c.label = truth ? Label::positive : Label::negative;
      world.event_truth[ref.key()] = truth ? 1 : 0;
      concepts.push_back(c);

      for (std::size_t t = 0; t < options.triples_per_concept; ++t) {
        const bool same = unit(rng) < 0.6;
        std::size_t tail_stem = stem;
        if (!same) {
          do {
            tail_stem = pick(rng, kStems.size());
          } while (tail_stem == stem);
        }
        const std::string tail =
            kTailVerbs[pick(rng, kTailVerbs.size())] + " the " + kStems[tail_stem];
        const Relation rel = kAllRelations[pick(rng, kAllRelations.size())];
        AbstractTriple triple{ref, rel, tail, std::nullopt, split};
        const bool triple_truth = truth && same;
        if (labeled) triple.label = triple_truth ? Label::positive : Label::negative;
        if (world.triple_truth.contains(triple.key())) continue;
        world.triple_truth[triple.key()] = triple_truth ? 1 : 0;
        triples.push_back(triple);
      }
    }
    events.push_back(std::move(record));
  }
  world.bundle = DatasetBundle::build(std::move(events), std::move(concepts), std::move(triples));
  return world;
}

RecordedScorer noisy_oracle(const SyntheticWorld& world, const PromptForge& forge, double sigma,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::unordered_map<std::string, double> scores;
  auto draw = [&](int truth) {
    return std::clamp((truth ? 0.7 : 0.3) + noise(rng), 0.0, 1.0);
  };
  const auto& bundle = world.bundle;
  for (const auto& c : bundle.conceptualizations()) {
    scores.emplace(forge.teacher_event_prompt(bundle.event(c.ref.event).text, c.ref),
                   draw(world.event_truth.at(c.key())));
  }
  for (const auto& t : bundle.triples()) {
    scores.emplace(forge.teacher_triple_prompt(bundle.head_text(t.head), t.relation, t.tail),
                   draw(world.triple_truth.at(t.key())));
  }
  return RecordedScorer(std::move(scores), "noisy-oracle");
}

}  // namespace catkb::testing
