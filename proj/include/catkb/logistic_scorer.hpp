#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <shared_mutex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "catkb/prompt.hpp"
#include "catkb/scorer.hpp"

namespace catkb {

template <typename Scalar>
using SparseRows = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, std::int64_t>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Elementwise logistic function over any Eigen array expression. Evaluated one scalar at a
/// time, so a row's value does not depend on its position in the batch.
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
}

struct LogisticOptions {
  int hash_bits = 18;
  double learning_rate = 0.5;
  double l2 = 3e-4;
};

/// Binary logistic regression over a sparse design matrix.
template <typename Scalar>
struct LogisticModel {
  Vector<Scalar> weights;
  Scalar bias = Scalar(0);

  explicit LogisticModel(Eigen::Index dim = 0) : weights(Vector<Scalar>::Zero(dim)) {}

  Vector<Scalar> predict(const SparseRows<Scalar>& x) const {
    const Vector<Scalar> z = (x * weights).array() + bias;
    return sigmoid(z.array()).matrix();
  }
};

/// Full-batch AdaGrad on the mean cross-entropy plus an L2 penalty. Starts from the model's
/// current parameters. Returns the final mean cross-entropy on the training rows.
template <typename Scalar>
Scalar fit_logistic(LogisticModel<Scalar>& model, const SparseRows<Scalar>& x,
                    const Vector<Scalar>& y, const LogisticOptions& options, int epochs) {
  const auto n = static_cast<Scalar>(x.rows());
  if (x.rows() == 0) return Scalar(0);
  const Scalar lr = static_cast<Scalar>(options.learning_rate);
  const Scalar l2 = static_cast<Scalar>(options.l2);
  const Scalar tiny = Scalar(1e-8);
  Vector<Scalar> accum = Vector<Scalar>::Zero(model.weights.size());
  Scalar bias_accum = Scalar(0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const Vector<Scalar> residual = model.predict(x) - y;
    const Vector<Scalar> grad = (x.transpose() * residual) / n + l2 * model.weights;
    const Scalar bias_grad = residual.sum() / n;
    accum.array() += grad.array().square();
    bias_accum += bias_grad * bias_grad;
    model.weights.array() -= lr * grad.array() / (accum.array().sqrt() + tiny);
    model.bias -= lr * bias_grad / (std::sqrt(bias_accum) + tiny);
  }
  const Scalar eps = Scalar(1e-12);
  const Vector<Scalar> p = model.predict(x).array().max(eps).min(Scalar(1) - eps).matrix();
  const Scalar loss =
      -(y.array() * p.array().log() + (Scalar(1) - y.array()) * (Scalar(1) - p.array()).log())
           .sum();
  return loss / n;
}

/// Hashed sparse features of a prompt: per-field unigrams, the marked instance, cross-field
/// token pairs, and per-pair token Jaccard values. Indices are sorted and unique.
std::vector<std::pair<std::int64_t, double>> prompt_features(std::string_view prompt,
                                                             const PromptConfig& config,
                                                             int hash_bits);

/// In-process trainable scorer: one hashed-feature logistic model per task. An untrained
/// task scores every prompt 0.5. train() refits the task's model from zero.
class HashedLogisticScorer final : public ScorerBackend {
 public:
  explicit HashedLogisticScorer(LogisticOptions options = {}, PromptConfig config = {});

  Capabilities capabilities() const override { return {true}; }
  std::string identity() const override;
  std::vector<double> score(const ScoreBatch& batch) const override;
  double train(Task task, const std::vector<TrainingExample>& examples, int epochs) override;

 private:
  SparseRows<double> design(const std::vector<std::string_view>& prompts) const;

  LogisticOptions options_;
  PromptConfig config_;
  std::array<LogisticModel<double>, 2> models_;
  mutable std::shared_mutex mutex_;
};

}  // namespace catkb
