#include "catkb/backends.hpp"

#include <set>

#include "catkb/text.hpp"

namespace catkb {

double LexicalOverlapScorer::jaccard(std::string_view a, std::string_view b) {
  const auto ta = text::alnum_tokens(a);
  const auto tb = text::alnum_tokens(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  const std::size_t total = sa.size() + sb.size() - shared;
  return total == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(total);
}

double LexicalOverlapScorer::score_one(Task task, std::string_view prompt) const {
  const ParsedPrompt p = parse_prompt(prompt, config_);
  const auto field = [&](std::size_t i) -> std::string_view {
    return i < p.fields.size() ? std::string_view(p.fields[i]) : std::string_view();
  };
  if (task == Task::event_conceptualization) {
    const std::string_view instance = p.instance ? std::string_view(*p.instance) : field(0);
    return smooth(jaccard(instance, field(1)));
  }
  const std::string_view tail = p.fields.size() >= 3 ? field(2) : field(p.fields.size() - 1);
  return smooth(jaccard(field(0), tail));
}

std::vector<double> LexicalOverlapScorer::score(const ScoreBatch& batch) const {
  std::vector<double> out;
  out.reserve(batch.prompts.size());
  for (const auto& prompt : batch.prompts) out.push_back(score_one(batch.task, prompt));
  return out;
}

}  // namespace catkb
