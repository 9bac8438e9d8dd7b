#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "catkb/core.hpp"

namespace catkb {

/// Special tokens used in every prompt. All must be non-empty and pairwise distinct.
struct PromptConfig {
  std::string sep_token = "[SEP]";
  std::string cls_token = "[CLS]";
  std::string sos_token = "[SOS]";
  std::string eos_token = "[EOS]";
  std::string gen_token = "[GEN]";
  std::string concept_open = "<c>";
  std::string concept_close = "</c>";
  std::string list_joiner = ", ";

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  /// " [SEP] ": the separator with its surrounding spaces.
  std::string separator() const { return " " + sep_token + " "; }

  /// Overrides defaults with whichever keys `j` carries, then validates.
  static PromptConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

/// Human-readable verbalization of a relation.
std::string_view relation_text(Relation relation);

struct GenerativePair {
  std::string input;
  std::string target;
};

/// Builds every textual prompt: teacher and student forms for both discriminative tasks,
/// generative conceptualization pairs, and COMET training lines.
///
/// Separators always carry exactly one ASCII space on each side. Empty alternative or
/// instantiation lists produce the teacher form, with no trailing separator.
class PromptForge {
 public:
  explicit PromptForge(PromptConfig config = {});

  const PromptConfig& config() const noexcept { return config_; }

  /// Encloses the span in the concept markers. Offsets are authoritative, word boundaries
  /// are not consulted.
  std::string mark_instance(std::string_view event_text, const InstanceSpan& span) const;

  std::string teacher_event_prompt(std::string_view event_text,
                                   const ConceptualizationRef& ref) const;

  /// `alternatives` must already be ranked; containing the target concept is a ContractError.
  std::string student_event_prompt(std::string_view event_text, const ConceptualizationRef& ref,
                                   const std::vector<Concept>& alternatives) const;

  std::string teacher_triple_prompt(std::string_view head, Relation relation,
                                    std::string_view tail) const;
  std::string student_triple_prompt(std::string_view head, Relation relation,
                                    std::string_view tail,
                                    const std::vector<std::string>& instantiations) const;

  /// Input "[SOS] <marked event> [SEP] <instance> [GEN]", target "<concept> [EOS]".
  GenerativePair generative_concept_prompt(std::string_view event_text, const InstanceSpan& span,
                                           const Concept& concept_) const;

  /// "head\trelation-tag\ttail" with tabs and newlines inside fields escaped.
  static std::string comet_record(std::string_view head, Relation relation,
                                  std::string_view tail);

 private:
  PromptConfig config_;
};

}  // namespace catkb
