#include "catkb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "catkb/error.hpp"
#include "catkb/text.hpp"

namespace catkb {

using nlohmann::ordered_json;

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("auc: " + std::to_string(scores.size()) + " scores but " +
                        std::to_string(labels.size()) + " labels");
  }
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ContractError("auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw ContractError("auc: score is NaN");
    positives += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("auc needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t k = i;
    while (k < order.size() && scores[order[k]] == scores[order[i]]) ++k;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(k)) / 2.0;
    for (std::size_t t = i; t < k; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += avg_rank;
    }
    i = k;
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

namespace {

using Tokens = std::vector<std::string>;
using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

void check_item(const GenerationEvalItem& item) {
  if (item.references.empty()) throw ContractError("generation item has no references");
}

NgramCounts ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::vector<Tokens> tokenize_all(const std::vector<std::string>& texts) {
  std::vector<Tokens> out;
  for (const auto& t : texts) out.push_back(text::metric_tokens(t));
  return out;
}

// Sufficient statistics of BLEU for one item.
struct BleuStats {
  std::vector<double> matched;  // clipped matches per order
  std::vector<double> total;    // candidate n-grams per order
  double cand_len = 0.0;
  double ref_len = 0.0;
};

BleuStats bleu_stats(const Tokens& cand, const std::vector<Tokens>& refs, int n) {
  BleuStats s;
  s.matched.assign(static_cast<std::size_t>(n), 0.0);
  s.total.assign(static_cast<std::size_t>(n), 0.0);
  s.cand_len = static_cast<double>(cand.size());
  // Closest reference length; ties go to the shorter one.
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto diff = [&](std::size_t len) {
      return len > cand.size() ? len - cand.size() : cand.size() - len;
    };
    if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
      best = r.size();
    }
  }
  s.ref_len = static_cast<double>(best);
  for (int k = 1; k <= n; ++k) {
    const NgramCounts cand_counts = ngrams(cand, static_cast<std::size_t>(k));
    std::map<Tokens, std::size_t> max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : ngrams(r, static_cast<std::size_t>(k))) {
        max_ref[g] = std::max(max_ref[g], c);
      }
    }
    for (const auto& [g, c] : cand_counts) {
      const auto it = max_ref.find(g);
      const std::size_t clip = it == max_ref.end() ? 0 : std::min(c, it->second);
      s.matched[static_cast<std::size_t>(k - 1)] += static_cast<double>(clip);
      s.total[static_cast<std::size_t>(k - 1)] += static_cast<double>(c);
    }
  }
  return s;
}

// Geometric mean over orders with at least one candidate n-gram, times the brevity penalty.
double bleu_from_stats(const BleuStats& s) {
  if (s.cand_len == 0.0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t k = 0; k < s.total.size(); ++k) {
    if (s.total[k] == 0.0) continue;
    if (s.matched[k] == 0.0) return 0.0;
    log_sum += std::log(s.matched[k] / s.total[k]);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double bp = s.cand_len > s.ref_len ? 1.0 : std::exp(1.0 - s.ref_len / s.cand_len);
  return bp * std::exp(log_sum / orders);
}

void check_order(int n) {
  if (n < 1 || n > 4) throw ContractError("BLEU order must lie in [1, 4]");
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double meteor_single(const Tokens& cand, const Tokens& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);
  auto align = [&](const Tokens& c, const Tokens& r) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (cand_to_ref[i] >= 0) continue;
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (!ref_used[j] && c[i] == r[j]) {
          cand_to_ref[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  };
  align(cand, ref);
  Tokens cand_stems, ref_stems;
  for (const auto& t : cand) cand_stems.push_back(porter_stem(t));
  for (const auto& t : ref) ref_stems.push_back(porter_stem(t));
  align(cand_stems, ref_stems);

  std::size_t matches = 0;
  std::size_t chunks = 0;
  int prev = -2;
  for (int j : cand_to_ref) {
    if (j < 0) {
      prev = -2;
      continue;
    }
    ++matches;
    if (j != prev + 1) ++chunks;
    prev = j;
  }
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(cand.size());
  const double recall = m / static_cast<double>(ref.size());
  const double fmean =
      precision * recall / (kMeteorAlpha * precision + (1.0 - kMeteorAlpha) * recall);
  const double penalty = kMeteorGamma * std::pow(static_cast<double>(chunks) / m, kMeteorBeta);
  return fmean * (1.0 - penalty);
}

}  // namespace

double bleu(const GenerationEvalItem& item, int n) {
  check_order(n);
  check_item(item);
  const Tokens cand = text::metric_tokens(item.candidate);
  return bleu_from_stats(bleu_stats(cand, tokenize_all(item.references), n));
}

double corpus_bleu(const std::vector<GenerationEvalItem>& items, int n) {
  check_order(n);
  BleuStats sum;
  sum.matched.assign(static_cast<std::size_t>(n), 0.0);
  sum.total.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& item : items) {
    check_item(item);
    const BleuStats s =
        bleu_stats(text::metric_tokens(item.candidate), tokenize_all(item.references), n);
    for (std::size_t k = 0; k < sum.total.size(); ++k) {
      sum.matched[k] += s.matched[k];
      sum.total[k] += s.total[k];
    }
    sum.cand_len += s.cand_len;
    sum.ref_len += s.ref_len;
  }
  return bleu_from_stats(sum);
}

double rouge_l(const GenerationEvalItem& item, double beta) {
  check_item(item);
  const Tokens cand = text::metric_tokens(item.candidate);
  if (cand.empty()) return 0.0;
  double best = 0.0;
  for (const Tokens& ref : tokenize_all(item.references)) {
    const auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double b2 = beta * beta;
    best = std::max(best, (1.0 + b2) * p * r / (r + b2 * p));
  }
  return best;
}

double meteor(const GenerationEvalItem& item) {
  check_item(item);
  const Tokens cand = text::metric_tokens(item.candidate);
  double best = 0.0;
  for (const Tokens& ref : tokenize_all(item.references)) {
    best = std::max(best, meteor_single(cand, ref));
  }
  return best;
}

CiderResult cider(const std::vector<GenerationEvalItem>& items) {
  constexpr int kMaxOrder = 4;
  CiderResult result;
  if (items.empty()) return result;

  std::vector<Tokens> cands;
  std::vector<std::vector<Tokens>> refs;
  std::map<Tokens, double> df;
  for (const auto& item : items) {
    check_item(item);
    cands.push_back(text::metric_tokens(item.candidate));
    refs.push_back(tokenize_all(item.references));
    std::map<Tokens, bool> seen;
    for (const auto& r : refs.back()) {
      for (int k = 1; k <= kMaxOrder; ++k) {
        for (const auto& [g, c] : ngrams(r, static_cast<std::size_t>(k))) seen[g] = true;
      }
    }
    for (const auto& [g, flag] : seen) df[g] += 1.0;
  }
  const double log_n = std::log(static_cast<double>(items.size()));

  auto weights = [&](const Tokens& tokens, std::size_t k) {
    std::map<Tokens, double> v;
    for (const auto& [g, c] : ngrams(tokens, k)) {
      const auto it = df.find(g);
      const double d = it == df.end() ? 1.0 : std::max(1.0, it->second);
      v[g] = static_cast<double>(c) * (log_n - std::log(d));
    }
    return v;
  };
  auto cosine = [](const std::map<Tokens, double>& a, const std::map<Tokens, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, w] : a) {
      na += w * w;
      const auto it = b.find(g);
      if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [g, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };

  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    double score = 0.0;
    for (int k = 1; k <= kMaxOrder; ++k) {
      const auto cv = weights(cands[i], static_cast<std::size_t>(k));
      double sum = 0.0;
      for (const auto& r : refs[i]) sum += cosine(cv, weights(r, static_cast<std::size_t>(k)));
      score += sum / static_cast<double>(refs[i].size());
    }
    score = 10.0 * score / kMaxOrder;
    result.per_item.push_back(score);
    total += score;
  }
  result.mean = total / static_cast<double>(items.size());
  return result;
}

ordered_json evaluate_generations(const std::vector<GenerationEvalItem>& items,
                                  int max_bleu_order) {
  if (items.empty()) throw ContractError("evaluate_generations needs at least one item");
  check_order(max_bleu_order);
  ordered_json report;
  for (int k = 1; k <= max_bleu_order; ++k) {
    report["BLEU-" + std::to_string(k)] = 100.0 * corpus_bleu(items, k);
  }
  double meteor_sum = 0.0, rouge_sum = 0.0;
  for (const auto& item : items) {
    meteor_sum += meteor(item);
    rouge_sum += rouge_l(item);
  }
  const auto n = static_cast<double>(items.size());
  report["METEOR"] = 100.0 * meteor_sum / n;
  report["ROUGE-L"] = 100.0 * rouge_sum / n;
  report["CIDEr"] = 100.0 * cider(items).mean;
  report["items"] = items.size();
  report["params"] = ordered_json{
      {"tokenizer", "lowercase; split on Unicode whitespace; strip ASCII punctuation at token ends"},
      {"scale", "percentage (x100); CIDEr is x10 before scaling"},
      {"bleu", "corpus-level, uniform weights, clipped multi-reference counts, closest-reference "
               "brevity penalty"},
      {"beta", kRougeBeta},
      {"meteor_stages", {"exact", "porter_stem"}},
      {"meteor_params", {{"alpha", kMeteorAlpha}, {"beta", kMeteorBeta}, {"gamma", kMeteorGamma}}},
      {"cider", "plain TF-IDF cosine, n = 1..4, df over reference sets"}};
  return report;
}

}  // namespace catkb
