#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace catkb {

/// Area under the ROC curve via the Mann-Whitney U statistic with average ranks for ties.
/// Throws UndefinedMetricError unless both labels occur, ContractError on bad input.
double auc(std::span<const double> scores, std::span<const int> labels);

struct GenerationEvalItem {
  std::string candidate;
  std::vector<std::string> references;  // non-empty
};

inline constexpr double kRougeBeta = 1.2;
inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorBeta = 3.0;
inline constexpr double kMeteorGamma = 0.5;

/// Original Porter stemmer over a lowercase ASCII word. Other input is returned unchanged.
std::string porter_stem(std::string_view word);

/// Sentence BLEU with uniform weights over orders 1..n, clipped multi-reference counts, and a
/// brevity penalty against the closest reference length. Orders longer than the candidate
/// are dropped. An empty candidate scores 0.
double bleu(const GenerationEvalItem& item, int n);

/// Corpus BLEU: clipped counts and lengths summed over items before the geometric mean.
double corpus_bleu(const std::vector<GenerationEvalItem>& items, int n);

/// LCS-based F-measure, max over references.
double rouge_l(const GenerationEvalItem& item, double beta = kRougeBeta);

/// Unigram alignment (exact, then Porter stem) with fragmentation penalty, max over
/// references.
double meteor(const GenerationEvalItem& item);

struct CiderResult {
  std::vector<double> per_item;
  double mean = 0.0;
};

/// TF-IDF n-gram cosine averaged over n = 1..4, times 10. Document frequencies come from the
/// reference sets of `items`.
CiderResult cider(const std::vector<GenerationEvalItem>& items);

/// Percentages for BLEU-1..max_bleu_order (corpus level), METEOR, ROUGE-L (means of item
/// scores) and CIDEr, plus a "params" block describing the choices made.
nlohmann::ordered_json evaluate_generations(const std::vector<GenerationEvalItem>& items,
                                            int max_bleu_order = 2);

}  // namespace catkb
