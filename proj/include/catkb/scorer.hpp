#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catkb/core.hpp"
#include "catkb/prompt.hpp"

namespace catkb {

/// Prompts for one task. Must be non-empty.
struct ScoreBatch {
  Task task = Task::event_conceptualization;
  std::vector<std::string> prompts;
};

struct Capabilities {
  bool can_train = false;
};

struct TrainingExample {
  std::string prompt;
  int label = 0;
};

/// A plausibility scorer over prompt strings, one model per task.
///
/// score() returns one value in [0, 1] per prompt, in order, and the value for a prompt does
/// not depend on how prompts are batched. score() may run concurrently with itself; train()
/// is exclusive with everything else on the same backend.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual Capabilities capabilities() const = 0;
  /// Backend name and version, e.g. "lexical-overlap@1".
  virtual std::string identity() const = 0;
  virtual std::vector<double> score(const ScoreBatch& batch) const = 0;

  /// Trains the task's model on `examples` and returns the final mean cross-entropy.
  /// The default throws CapabilityError.
  virtual double train(Task task, const std::vector<TrainingExample>& examples, int epochs);
};

/// Scores a batch and checks the backend's answer: one score per prompt, each in [0, 1].
/// Throws ContractError for an empty batch and ProtocolError for a bad answer.
std::vector<double> score_batch(const ScorerBackend& backend, const ScoreBatch& batch);

/// score_batch() that accepts an empty prompt list (returning no scores).
std::vector<double> score_prompts(const ScorerBackend& backend, Task task,
                                  std::vector<std::string> prompts);

/// Checks capability and labels, then delegates to backend.train().
double fit(ScorerBackend& backend, Task task, const std::vector<TrainingExample>& examples,
           int epochs);

inline constexpr double kLossEpsilon = 1e-12;

/// Mean binary cross-entropy with scores clamped to [eps, 1 - eps].
double bce_loss(std::span<const double> scores, std::span<const int> labels);

/// A prompt split back into its fields. The leading [CLS]/[SOS] and trailing [GEN] tokens are
/// removed; `instance` holds the marked span of the first field when markers are present.
struct ParsedPrompt {
  std::vector<std::string> fields;
  std::optional<std::string> instance;
};

ParsedPrompt parse_prompt(std::string_view prompt, const PromptConfig& config = {});

}  // namespace catkb
