#include "catkb/backends.hpp"

#include <json.hpp>

#include "catkb/error.hpp"
#include "catkb/io.hpp"

namespace catkb {

RecordedScorer::RecordedScorer(std::unordered_map<std::string, double> scores, std::string name,
                               std::optional<double> fallback)
    : scores_(std::move(scores)), name_(std::move(name)), fallback_(fallback) {
  for (const auto& [prompt, s] : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ContractError("recorded score " + std::to_string(s) + " outside [0, 1] for prompt '" +
                          prompt + "'");
    }
  }
  if (fallback_ && !(*fallback_ >= 0.0 && *fallback_ <= 1.0)) {
    throw ContractError("fallback score outside [0, 1]");
  }
}

RecordedScorer RecordedScorer::from_jsonl(const std::filesystem::path& path,
                                          std::optional<double> fallback) {
  std::unordered_map<std::string, double> scores;
  io::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    try {
      const auto j = nlohmann::json::parse(line);
      scores.emplace(j.at("prompt").get<std::string>(), j.at("score").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.filename().string() + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return RecordedScorer(std::move(scores), "recorded:" + path.filename().string(), fallback);
}

std::vector<double> RecordedScorer::score(const ScoreBatch& batch) const {
  std::vector<double> out;
  out.reserve(batch.prompts.size());
  for (const auto& prompt : batch.prompts) {
    const auto it = scores_.find(prompt);
    if (it != scores_.end()) {
      out.push_back(it->second);
    } else if (fallback_) {
      out.push_back(*fallback_);
    } else {
      throw LookupError("no recorded score for prompt '" + prompt + "'");
    }
  }
  return out;
}

}  // namespace catkb
