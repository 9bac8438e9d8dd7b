#include "catkb/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "catkb/error.hpp"
#include "catkb/text.hpp"

namespace catkb {

double ScorerBackend::train(Task, const std::vector<TrainingExample>&, int) {
  throw CapabilityError("scorer backend '" + identity() + "' cannot train");
}

std::vector<double> score_batch(const ScorerBackend& backend, const ScoreBatch& batch) {
  if (batch.prompts.empty()) throw ContractError("score batch must contain at least one prompt");
  std::vector<double> scores = backend.score(batch);
  if (scores.size() != batch.prompts.size()) {
    throw ProtocolError("backend '" + backend.identity() + "' returned " +
                        std::to_string(scores.size()) + " scores for " +
                        std::to_string(batch.prompts.size()) + " prompts");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw ProtocolError("backend '" + backend.identity() + "' returned score " +
                          std::to_string(scores[i]) + " outside [0, 1] for prompt " +
                          std::to_string(i));
    }
  }
  return scores;
}

std::vector<double> score_prompts(const ScorerBackend& backend, Task task,
                                  std::vector<std::string> prompts) {
  if (prompts.empty()) return {};
  return score_batch(backend, ScoreBatch{task, std::move(prompts)});
}

double fit(ScorerBackend& backend, Task task, const std::vector<TrainingExample>& examples,
           int epochs) {
  if (!backend.capabilities().can_train) {
    throw CapabilityError("scorer backend '" + backend.identity() + "' cannot train");
  }
  if (epochs < 0) throw ContractError("epochs must be non-negative");
  for (const auto& ex : examples) {
    if (ex.label != 0 && ex.label != 1) {
      throw ContractError("training label must be 0 or 1, got " + std::to_string(ex.label));
    }
  }
  return backend.train(task, examples, epochs);
}

double bce_loss(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("bce_loss: " + std::to_string(scores.size()) + " scores vs " +
                        std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ContractError("bce_loss: label must be 0 or 1");
    }
    const double s = std::clamp(scores[i], kLossEpsilon, 1.0 - kLossEpsilon);
    total -= labels[i] == 1 ? std::log(s) : std::log1p(-s);
  }
  return total / static_cast<double>(scores.size());
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(' ');
  return std::string(s.substr(b, e - b + 1));
}

bool strip_prefix(std::string& s, const std::string& token) {
  if (s == token) {
    s.clear();
    return true;
  }
  if (s.starts_with(token + " ")) {
    s.erase(0, token.size() + 1);
    return true;
  }
  return false;
}

}  // namespace

ParsedPrompt parse_prompt(std::string_view prompt, const PromptConfig& config) {
  ParsedPrompt parsed;
  for (std::string& field : text::split(prompt, config.sep_token)) {
    parsed.fields.push_back(trim(field));
  }
  std::string& first = parsed.fields.front();
  if (!strip_prefix(first, config.cls_token)) strip_prefix(first, config.sos_token);
  std::string& last = parsed.fields.back();
  if (last == config.gen_token) {
    last.clear();
  } else if (last.ends_with(" " + config.gen_token)) {
    last.erase(last.size() - config.gen_token.size() - 1);
  }

  const auto open = first.find(config.concept_open);
  if (open != std::string::npos) {
    const auto begin = open + config.concept_open.size();
    const auto close = first.find(config.concept_close, begin);
    if (close != std::string::npos) parsed.instance = first.substr(begin, close - begin);
  }
  return parsed;
}

}  // namespace catkb
