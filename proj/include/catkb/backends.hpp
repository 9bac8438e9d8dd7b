#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "catkb/prompt.hpp"
#include "catkb/scorer.hpp"

namespace catkb {

/// Deterministic test backend built on token overlap.
///
/// Tokens are lowercase runs of ASCII alphanumerics. The raw score is the Jaccard index of
/// two token sets, mapped into (0, 1) as 0.02 + 0.96 * jaccard. The event task compares the
/// marked instance with the candidate concept; the triple task compares head with tail.
class LexicalOverlapScorer final : public ScorerBackend {
 public:
  explicit LexicalOverlapScorer(PromptConfig config = {}) : config_(std::move(config)) {}

  Capabilities capabilities() const override { return {false}; }
  std::string identity() const override { return "lexical-overlap@1"; }
  std::vector<double> score(const ScoreBatch& batch) const override;

  double score_one(Task task, std::string_view prompt) const;

  /// Jaccard index of the token sets of `a` and `b`; 0 when both are empty.
  static double jaccard(std::string_view a, std::string_view b);
  static double smooth(double jaccard) { return 0.02 + 0.96 * jaccard; }

 private:
  PromptConfig config_;
};

/// Replays fixed scores keyed by prompt. Unknown prompts fall back to `fallback` when set
/// and raise LookupError otherwise.
class RecordedScorer final : public ScorerBackend {
 public:
  RecordedScorer(std::unordered_map<std::string, double> scores, std::string name = "recorded",
                 std::optional<double> fallback = std::nullopt);

  /// Reads JSONL rows {"prompt": str, "score": float}.
  static RecordedScorer from_jsonl(const std::filesystem::path& path,
                                   std::optional<double> fallback = std::nullopt);

  Capabilities capabilities() const override { return {false}; }
  std::string identity() const override { return name_ + "@1"; }
  std::vector<double> score(const ScoreBatch& batch) const override;

  std::size_t size() const noexcept { return scores_.size(); }
  bool contains(const std::string& prompt) const { return scores_.contains(prompt); }

 private:
  std::unordered_map<std::string, double> scores_;
  std::string name_;
  std::optional<double> fallback_;
};

}  // namespace catkb
