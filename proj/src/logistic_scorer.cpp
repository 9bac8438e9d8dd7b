#include "catkb/logistic_scorer.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "catkb/backends.hpp"
#include "catkb/error.hpp"
#include "catkb/text.hpp"

namespace catkb {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t task_slot(Task task) { return task == Task::event_conceptualization ? 0 : 1; }

}  // namespace

std::vector<std::pair<std::int64_t, double>> prompt_features(std::string_view prompt,
                                                             const PromptConfig& config,
                                                             int hash_bits) {
  const ParsedPrompt parsed = parse_prompt(prompt, config);
  const std::uint64_t mask = (std::uint64_t{1} << hash_bits) - 1;

  // Field token sets; the marked instance, when present, is an extra field named "f".
  std::vector<std::pair<std::string, std::set<std::string>>> fields;
  for (std::size_t i = 0; i < parsed.fields.size(); ++i) {
    const auto tokens = text::alnum_tokens(parsed.fields[i]);
    fields.emplace_back(std::to_string(i), std::set<std::string>(tokens.begin(), tokens.end()));
  }
  if (parsed.instance) {
    const auto tokens = text::alnum_tokens(*parsed.instance);
    fields.emplace_back("f", std::set<std::string>(tokens.begin(), tokens.end()));
  }

  std::vector<std::pair<std::int64_t, double>> feats;
  auto emit = [&](const std::string& name, double value) {
    feats.emplace_back(static_cast<std::int64_t>(fnv1a(name) & mask), value);
  };

  for (const auto& [name, tokens] : fields) {
    for (const auto& t : tokens) emit("u|" + name + "|" + t, 1.0);
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t k = i + 1; k < fields.size(); ++k) {
      const auto& [na, ta] = fields[i];
      const auto& [nb, tb] = fields[k];
      const std::string tag = na + "x" + nb;
      std::size_t shared = 0;
      for (const auto& a : ta) {
        shared += tb.count(a);
        for (const auto& b : tb) emit("x|" + tag + "|" + a + "|" + b, 1.0);
      }
      const std::size_t uni = ta.size() + tb.size() - shared;
      if (uni > 0) emit("j|" + tag, static_cast<double>(shared) / static_cast<double>(uni));
    }
  }

  std::sort(feats.begin(), feats.end());
  // Colliding indices are summed.
  std::vector<std::pair<std::int64_t, double>> merged;
  for (const auto& f : feats) {
    if (!merged.empty() && merged.back().first == f.first) {
      merged.back().second += f.second;
    } else {
      merged.push_back(f);
    }
  }
  return merged;
}

HashedLogisticScorer::HashedLogisticScorer(LogisticOptions options, PromptConfig config)
    : options_(options),
      config_(std::move(config)),
      models_{LogisticModel<double>(Eigen::Index{1} << options.hash_bits),
              LogisticModel<double>(Eigen::Index{1} << options.hash_bits)} {
  if (options_.hash_bits < 4 || options_.hash_bits > 26) {
    throw ConfigError("hash_bits must lie in [4, 26]");
  }
}

std::string HashedLogisticScorer::identity() const {
  return "hashed-logistic@1/bits=" + std::to_string(options_.hash_bits);
}

SparseRows<double> HashedLogisticScorer::design(
    const std::vector<std::string_view>& prompts) const {
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  for (std::size_t row = 0; row < prompts.size(); ++row) {
    for (const auto& [col, value] : prompt_features(prompts[row], config_, options_.hash_bits)) {
      triplets.emplace_back(static_cast<std::int64_t>(row), col, value);
    }
  }
  SparseRows<double> x(static_cast<std::int64_t>(prompts.size()),
                       std::int64_t{1} << options_.hash_bits);
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

std::vector<double> HashedLogisticScorer::score(const ScoreBatch& batch) const {
  std::vector<std::string_view> prompts(batch.prompts.begin(), batch.prompts.end());
  const SparseRows<double> x = design(prompts);
  std::shared_lock lock(mutex_);
  const Vector<double> p = models_[task_slot(batch.task)].predict(x);
  return std::vector<double>(p.data(), p.data() + p.size());
}

double HashedLogisticScorer::train(Task task, const std::vector<TrainingExample>& examples,
                                   int epochs) {
  std::vector<std::string_view> prompts;
  Vector<double> y(static_cast<Eigen::Index>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    prompts.push_back(examples[i].prompt);
    y(static_cast<Eigen::Index>(i)) = examples[i].label;
  }
  const SparseRows<double> x = design(prompts);
  LogisticModel<double> model(Eigen::Index{1} << options_.hash_bits);
  const double loss = fit_logistic(model, x, y, options_, epochs);
  std::unique_lock lock(mutex_);
  models_[task_slot(task)] = std::move(model);
  return loss;
}

}  // namespace catkb
