#include "catkb/prompt.hpp"

#include <algorithm>
#include <array>

#include "catkb/error.hpp"
#include "catkb/text.hpp"

namespace catkb {

void PromptConfig::validate() const {
  const std::array<std::pair<const char*, const std::string*>, 8> tokens{{
      {"sep_token", &sep_token},
      {"cls_token", &cls_token},
      {"sos_token", &sos_token},
      {"eos_token", &eos_token},
      {"gen_token", &gen_token},
      {"concept_open", &concept_open},
      {"concept_close", &concept_close},
      {"list_joiner", &list_joiner},
  }};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].second->empty()) {
      throw ConfigError(std::string("prompt token '") + tokens[i].first + "' is empty");
    }
    for (std::size_t k = i + 1; k < tokens.size(); ++k) {
      if (*tokens[i].second == *tokens[k].second) {
        throw ConfigError(std::string("prompt tokens '") + tokens[i].first + "' and '" +
                          tokens[k].first + "' are identical");
      }
    }
  }
}

PromptConfig PromptConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("prompt config must be a JSON object");
  PromptConfig c;
  auto take = [&](const char* key, std::string& field) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) throw ConfigError(std::string("prompt.") + key + " must be a string");
    field = j.at(key).get<std::string>();
  };
  take("sep_token", c.sep_token);
  take("cls_token", c.cls_token);
  take("sos_token", c.sos_token);
  take("eos_token", c.eos_token);
  take("gen_token", c.gen_token);
  take("concept_open", c.concept_open);
  take("concept_close", c.concept_close);
  take("list_joiner", c.list_joiner);
  c.validate();
  return c;
}

nlohmann::ordered_json PromptConfig::to_json() const {
  return nlohmann::ordered_json{{"sep_token", sep_token},         {"cls_token", cls_token},
                                {"sos_token", sos_token},         {"eos_token", eos_token},
                                {"gen_token", gen_token},         {"concept_open", concept_open},
                                {"concept_close", concept_close}, {"list_joiner", list_joiner}};
}

std::string_view relation_text(Relation relation) {
  switch (relation) {
    case Relation::xEffect: return "as a result, PersonX will";
    case Relation::oEffect: return "as a result, PersonY or others will";
    case Relation::xWant: return "as a result, PersonX want";
    case Relation::oWant: return "as a result, PersonY or others want";
    case Relation::xReact: return "as a result, PersonX feel";
    case Relation::oReact: return "as a result, PersonY or others feel";
    case Relation::xIntent: return "because PersonX wanted";
    case Relation::xNeed: return "before that, PersonX needed";
    case Relation::xAttr: return "PersonX is described as";
  }
  return "";
}

PromptForge::PromptForge(PromptConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string PromptForge::mark_instance(std::string_view event_text,
                                       const InstanceSpan& span) const {
  check_span(event_text, span);
  const std::size_t b = text::utf8_byte_offset(event_text, span.start);
  const std::size_t e = text::utf8_byte_offset(event_text, span.end);
  std::string out;
  out.reserve(event_text.size() + config_.concept_open.size() + config_.concept_close.size());
  out.append(event_text.substr(0, b));
  out.append(config_.concept_open);
  out.append(event_text.substr(b, e - b));
  out.append(config_.concept_close);
  out.append(event_text.substr(e));
  return out;
}

std::string PromptForge::teacher_event_prompt(std::string_view event_text,
                                              const ConceptualizationRef& ref) const {
  return config_.cls_token + " " + mark_instance(event_text, ref.span) + config_.separator() +
         ref.concept_.text();
}

std::string PromptForge::student_event_prompt(std::string_view event_text,
                                              const ConceptualizationRef& ref,
                                              const std::vector<Concept>& alternatives) const {
  if (std::find(alternatives.begin(), alternatives.end(), ref.concept_) != alternatives.end()) {
    throw ContractError("target concept '" + ref.concept_.text() +
                        "' appears among its own alternatives");
  }
  std::string prompt = teacher_event_prompt(event_text, ref);
  if (alternatives.empty()) return prompt;
  std::vector<std::string> parts;
  parts.reserve(alternatives.size());
  for (const Concept& c : alternatives) parts.push_back(c.text());
  return prompt + config_.separator() + text::join(parts, config_.list_joiner);
}

std::string PromptForge::teacher_triple_prompt(std::string_view head, Relation relation,
                                               std::string_view tail) const {
  std::string out = config_.cls_token + " ";
  out += head;
  out += config_.separator();
  out += relation_text(relation);
  out += config_.separator();
  out += tail;
  return out;
}

std::string PromptForge::student_triple_prompt(
    std::string_view head, Relation relation, std::string_view tail,
    const std::vector<std::string>& instantiations) const {
  std::string prompt = teacher_triple_prompt(head, relation, tail);
  if (instantiations.empty()) return prompt;
  return prompt + config_.separator() + text::join(instantiations, config_.list_joiner);
}

GenerativePair PromptForge::generative_concept_prompt(std::string_view event_text,
                                                      const InstanceSpan& span,
                                                      const Concept& concept_) const {
  GenerativePair pair;
  pair.input = config_.sos_token + " " + mark_instance(event_text, span) + config_.separator() +
               span.text + " " + config_.gen_token;
  pair.target = concept_.text() + " " + config_.eos_token;
  return pair;
}

namespace {

std::string escape_field(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    if (c == '\t') {
      out += "\\t";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string PromptForge::comet_record(std::string_view head, Relation relation,
                                      std::string_view tail) {
  return escape_field(head) + "\t" + std::string(to_string(relation)) + "\t" + escape_field(tail);
}

}  // namespace catkb
