#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factline/numcore.hpp"
#include "factline/textrep.hpp"

namespace factline {

// ---------------------------------------------------------------------------
// Feature rows: one abstraction over sparse BOW/TF-IDF vectors and dense
// embedding rows so classifiers and metrics run on either.
// ---------------------------------------------------------------------------

class FeatureMatrix {
 public:
  static FeatureMatrix from_sparse(std::vector<SparseVector> rows,
                                   std::size_t dim);
  static FeatureMatrix from_dense(Matrix m);

  std::size_t rows() const;
  std::size_t dim() const { return dim_; }
  bool is_sparse() const { return !sparse_.empty() || dense_.rows == 0; }

  // f(feature index, value) over the nonzero entries of one row, ascending
  // by index.
  template <class F>
  void for_each_nz(std::size_t row, F&& f) const {
    if (dense_.rows > 0) {
      for (std::size_t j = 0; j < dense_.cols; ++j) {
        const double v = dense_(row, j);
        if (v != 0.0) f(j, v);
      }
    } else {
      for (const auto& [idx, v] : sparse_[row].entries) f(idx, v);
    }
  }

  double dot_row(std::size_t row, std::span<const double> w) const;
  bool all_nonnegative() const;
  FeatureMatrix select(std::span<const std::size_t> indices) const;

 private:
  std::vector<SparseVector> sparse_;
  Matrix dense_;
  std::size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

enum class ClassifierKind { NaiveBayes, LogisticRegression, LinearSvm };

std::string to_string(ClassifierKind k);

struct TrainConfig {
  double nb_alpha = 1.0;          // Laplace smoothing
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t max_epochs = 2000;
  double tol = 1e-6;              // gradient-norm stop for LR
  std::uint64_t seed = 0;
};

struct ClassifierModel {
  ClassifierKind kind = ClassifierKind::NaiveBayes;
  std::vector<std::string> labels;  // class order; ties in predict resolve
                                    // to the lower index
  std::size_t dim = 0;
  TrainConfig config;

  // NaiveBayes
  std::vector<double> log_prior;
  Matrix feature_log_prob;  // classes x dim

  // LogisticRegression / LinearSvm
  Matrix weights;  // classes x dim
  std::vector<double> bias;

  std::vector<std::string> warnings;

  // Per-class decision scores for one row (log-posterior up to a constant
  // for NB, linear scores otherwise).
  std::vector<double> scores(const FeatureMatrix& x, std::size_t row) const;

  std::string to_json() const;
  static ClassifierModel from_json(std::string_view text);
};

// Multinomial NB needs non-negative features; LR is multinomial softmax
// trained by full-batch gradient descent; the SVM is one-vs-rest hinge
// trained by SGD in a seed-deterministic order.
ClassifierModel train_classifier(ClassifierKind kind, const FeatureMatrix& x,
                                 const std::vector<std::string>& y,
                                 const TrainConfig& config = {});

std::vector<std::string> predict(const ClassifierModel& model,
                                 const FeatureMatrix& x);

// Loss and gradient of the regularized softmax objective; exposed so the
// gradient can be checked against finite differences.
struct LrGradient {
  double loss = 0.0;
  Matrix grad_weights;
  std::vector<double> grad_bias;
  double grad_norm = 0.0;
};

LrGradient lr_loss_and_gradient(const FeatureMatrix& x,
                                const std::vector<std::size_t>& y_idx,
                                std::size_t n_classes, const Matrix& weights,
                                std::span<const double> bias, double l2);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

enum class Averaging { Macro, Weighted, Micro };

struct EvalScores {
  std::vector<std::string> labels;
  std::vector<double> precision, recall, f1;
  std::vector<std::size_t> support;
  Matrix confusion;  // gold x predicted, in `labels` order

  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
  double weighted_precision = 0, weighted_recall = 0, weighted_f1 = 0;
  double micro_precision = 0, micro_recall = 0, micro_f1 = 0;
  double accuracy = 0;

  double aggregate_f1(Averaging a) const;
  double aggregate_precision(Averaging a) const;
  double aggregate_recall(Averaging a) const;
};

// Per-class precision/recall/F1 (0 where the denominator is 0) plus all
// three averaging schemes. The label universe defaults to the sorted union
// of gold and predicted labels.
EvalScores evaluate_f1(const std::vector<std::string>& pred,
                       const std::vector<std::string>& gold,
                       const std::optional<std::vector<std::string>>&
                           label_universe = std::nullopt);

// ---------------------------------------------------------------------------
// Per-cluster validity experiment
// ---------------------------------------------------------------------------

struct ExperimentCell {
  int cluster = 0;  // -1 for the averaged rows
  std::string row_label;  // cluster number, "avg" or "pooled"
  std::string representation;
  std::string classifier;
  std::optional<double> f1_macro, f1_weighted, f1_micro;
  std::size_t n_train = 0, n_test = 0;
  bool insufficient = false;
};

struct ValidityExperimentConfig {
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::size_t min_cluster_size = 5;
  TrainConfig train;
  std::vector<ClassifierKind> kinds = {ClassifierKind::NaiveBayes,
                                       ClassifierKind::LinearSvm,
                                       ClassifierKind::LogisticRegression};
};

// Representations: name -> features aligned with `labels`/`clusters` by
// row. NB cells are only produced for non-negative (bag-of-words style)
// representations. Emits one row per (cluster x representation x kind),
// an unweighted per-cluster mean ("avg") and a pooled row over all
// held-out predictions.
std::vector<ExperimentCell> run_validity_experiment(
    const std::vector<std::string>& labels, const std::vector<int>& clusters,
    const std::vector<std::pair<std::string, const FeatureMatrix*>>&
        representations,
    const ValidityExperimentConfig& config);

std::vector<std::vector<std::string>> experiment_to_csv(
    const std::vector<ExperimentCell>& cells);

}  // namespace factline
