#include <doctest.h>

#include <random>

#include "catkb/core.hpp"
#include "catkb/error.hpp"
#include "catkb/text.hpp"
#include "fixtures.hpp"

using namespace catkb;
using catkb::testing::span_of;

TEST_SUITE("core") {
  TEST_CASE("conceptualized head splices the concept") {
    const std::string vacation = "PersonX is on vacation";
    CHECK(conceptualized_head(vacation, span_of(vacation, "is on vacation"),
                              Concept("relaxing event")) == "PersonX relaxing event");
    CHECK(conceptualized_head("abc", make_span("abc", 0, 3), Concept("abc")) == "abc");
    const std::string night = "PersonX is having trouble sleeping at night";
    CHECK(conceptualized_head(night, span_of(night, "night"), Concept("nonwork time")) ==
          "PersonX is having trouble sleeping at nonwork time");
  }

  TEST_CASE("conceptualized head errors") {
    EventLookup events;
    const EventRecord e = catkb::testing::event("e1", "PersonX sleeps", {"sleeps"});
    events.emplace(e.id, e);
    ConceptualizationRef ok = catkb::testing::ref(e, "sleeps", "rest");
    CHECK(conceptualized_head(ok, events) == "PersonX rest");

    ConceptualizationRef unknown = ok;
    unknown.event = EventId("nope");
    CHECK_THROWS_AS(conceptualized_head(unknown, events), LookupError);

    ConceptualizationRef bad = ok;
    bad.span = InstanceSpan{8, 40, "sleeps"};
    CHECK_THROWS_AS(conceptualized_head(bad, events), IntegrityError);
    bad.span = InstanceSpan{8, 14, "sleepz"};
    CHECK_THROWS_AS(conceptualized_head(bad, events), IntegrityError);
  }

  TEST_CASE("span invariants") {
    CHECK_THROWS_AS(make_span("abc", 2, 2), IntegrityError);
    CHECK_THROWS_AS(make_span("abc", 0, 4), IntegrityError);
    const InstanceSpan s = make_span("sleeping at night", 12, 17);
    CHECK(s.text == "night");
    CHECK_THROWS_AS(EventId(""), IntegrityError);
  }

  TEST_CASE("concepts are canonicalized") {
    CHECK(Concept("  Relaxing   EVENT ").text() == "relaxing event");
    CHECK(Concept("a, b").text() == "a, b");
    CHECK_THROWS_AS(Concept(" \t "), IntegrityError);
  }

  TEST_CASE("enumerations round-trip") {
    for (Relation r : kAllRelations) CHECK(parse_relation(to_string(r)) == r);
    for (Split s : kAllSplits) CHECK(parse_split(to_string(s)) == s);
    CHECK_THROWS_AS(parse_relation("xWants"), ParseError);
    CHECK_THROWS_AS(parse_split("validation"), ParseError);
    CHECK(label_from_int(0) == Label::negative);
    CHECK(label_from_int(1) == Label::positive);
    CHECK_THROWS_AS(label_from_int(2), IntegrityError);
    CHECK_THROWS_AS(label_from_int(-1), IntegrityError);
  }

  TEST_CASE("round-trip: the concept sits at span.start of the head") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> words{"PersonX", "goes", "to", "the", "caf\xC3\xA9",
                                         "at",      "night", "with", "na\xC3\xAFve", "friends"};
    const std::vector<std::string> concepts{"place", "nonwork time", "social event",
                                            "\xC3\xA9v\xC3\xA9nement", "x"};
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::string> picked;
      const std::size_t len = 1 + rng() % 8;
      for (std::size_t i = 0; i < len; ++i) picked.push_back(words[rng() % words.size()]);
      const std::string event_text = text::join(picked, " ");
      const std::size_t length = text::utf8_length(event_text);
      const std::size_t start = rng() % length;
      const std::size_t end = start + 1 + rng() % (length - start);
      const InstanceSpan span = make_span(event_text, start, end);
      const Concept c(concepts[rng() % concepts.size()]);
      const std::string head = conceptualized_head(event_text, span, c);
      CHECK(text::utf8_slice(head, start, start + text::utf8_length(c.text())) == c.text());
      CHECK(text::utf8_length(head) == length - (end - start) + text::utf8_length(c.text()));
    }
  }

  TEST_CASE("band assignment is strict at both thresholds") {
    CHECK(assign_band(0.95, 0.9, 0.1) == Band::positive);
    CHECK(assign_band(0.05, 0.9, 0.1) == Band::negative);
    CHECK(assign_band(0.5, 0.9, 0.1) == Band::discarded);
    CHECK(assign_band(0.9, 0.9, 0.1) == Band::discarded);
    CHECK(assign_band(0.1, 0.9, 0.1) == Band::discarded);
  }

  TEST_CASE("keys") {
    const EventRecord e = catkb::testing::event("e1", "PersonX sleeps", {"sleeps"});
    const ConceptualizationRef r = catkb::testing::ref(e, "sleeps", "Rest");
    CHECK(r.key() == "e1|8|14|rest");
    const AbstractTriple t = catkb::testing::triple(r, Relation::xWant, "wake up", std::nullopt);
    CHECK(t.key() == "e1|8|14|rest|xWant|wake up");
  }
}
