#include "factline/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "factline/corpus.hpp"
#include "factline/csv.hpp"
#include "factline/rng.hpp"

namespace factline {

// ---------------------------------------------------------------------------
// FeatureMatrix
// ---------------------------------------------------------------------------

FeatureMatrix FeatureMatrix::from_sparse(std::vector<SparseVector> rows,
                                         std::size_t dim) {
  FeatureMatrix m;
  for (const auto& r : rows) {
    if (r.dim != dim)
      throw DimensionError("sparse row dimension mismatch");
  }
  m.sparse_ = std::move(rows);
  m.dim_ = dim;
  return m;
}

FeatureMatrix FeatureMatrix::from_dense(Matrix mat) {
  FeatureMatrix m;
  m.dim_ = mat.cols;
  m.dense_ = std::move(mat);
  return m;
}

std::size_t FeatureMatrix::rows() const {
  return dense_.rows > 0 ? dense_.rows : sparse_.size();
}

double FeatureMatrix::dot_row(std::size_t row, std::span<const double> w) const {
  double s = 0.0;
  for_each_nz(row, [&](std::size_t j, double v) { s += v * w[j]; });
  return s;
}

bool FeatureMatrix::all_nonnegative() const {
  bool ok = true;
  for (std::size_t i = 0; i < rows(); ++i) {
    for_each_nz(i, [&](std::size_t, double v) {
      if (v < 0.0) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
  if (dense_.rows > 0) {
    Matrix out(indices.size(), dense_.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      for (std::size_t j = 0; j < dense_.cols; ++j)
        out(i, j) = dense_(indices[i], j);
    }
    return from_dense(std::move(out));
  }
  std::vector<SparseVector> out;
  out.reserve(indices.size());
  for (const std::size_t i : indices) out.push_back(sparse_[i]);
  return from_sparse(std::move(out), dim_);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::NaiveBayes: return "NaiveBayes";
    case ClassifierKind::LogisticRegression: return "LogisticRegression";
    case ClassifierKind::LinearSvm: return "LinearSvm";
  }
  return "?";
}

namespace {

std::vector<std::string> distinct_sorted(const std::vector<std::string>& y) {
  std::set<std::string> s(y.begin(), y.end());
  return {s.begin(), s.end()};
}

std::vector<std::size_t> label_indices(const std::vector<std::string>& y,
                                       const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < labels.size(); ++i) pos[labels[i]] = i;
  std::vector<std::size_t> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) idx[i] = pos.at(y[i]);
  return idx;
}

void train_naive_bayes(ClassifierModel& model, const FeatureMatrix& x,
                       const std::vector<std::size_t>& y_idx) {
  if (!x.all_nonnegative())
    throw ConfigError("multinomial naive bayes needs non-negative features");
  const std::size_t k = model.labels.size();
  const std::size_t d = model.dim;
  const double alpha = model.config.nb_alpha;

  std::vector<double> class_count(k, 0.0);
  Matrix feature_count(k, d);
  std::vector<double> total_count(k, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t c = y_idx[i];
    class_count[c] += 1.0;
    x.for_each_nz(i, [&](std::size_t j, double v) {
      feature_count(c, j) += v;
      total_count[c] += v;
    });
  }

  model.log_prior.resize(k);
  model.feature_log_prob = Matrix(k, d);
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < k; ++c) {
    model.log_prior[c] = std::log(class_count[c] / n);
    const double denom = total_count[c] + alpha * static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      model.feature_log_prob(c, j) =
          std::log((feature_count(c, j) + alpha) / denom);
    }
  }
}

void train_logistic_regression(ClassifierModel& model, const FeatureMatrix& x,
                               const std::vector<std::size_t>& y_idx) {
  const std::size_t k = model.labels.size();
  const std::size_t d = model.dim;
  model.weights = Matrix(k, d);
  model.bias.assign(k, 0.0);

  for (std::size_t epoch = 0; epoch < model.config.max_epochs; ++epoch) {
    const LrGradient g = lr_loss_and_gradient(x, y_idx, k, model.weights,
                                              model.bias, model.config.l2);
    if (g.grad_norm < model.config.tol) break;
    const double lr = model.config.learning_rate;
    for (std::size_t i = 0; i < model.weights.data.size(); ++i)
      model.weights.data[i] -= lr * g.grad_weights.data[i];
    for (std::size_t c = 0; c < k; ++c) model.bias[c] -= lr * g.grad_bias[c];
  }
}

void train_linear_svm(ClassifierModel& model, const FeatureMatrix& x,
                      const std::vector<std::size_t>& y_idx) {
  const std::size_t k = model.labels.size();
  const std::size_t d = model.dim;
  const std::size_t n = x.rows();
  model.weights = Matrix(k, d);
  model.bias.assign(k, 0.0);
  const double lambda = model.config.l2;
  const double eta0 = model.config.learning_rate;

  // one-vs-rest hinge; the visit order is reshuffled per epoch from the
  // seed, so training is reproducible
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(derive_seed(model.config.seed, 0x5f3759df, c));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t t = 0;
    const std::size_t epochs =
        std::min<std::size_t>(model.config.max_epochs, 200);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      rng.shuffle(order);
      for (const std::size_t i : order) {
        ++t;
        const double eta =
            eta0 / (1.0 + eta0 * lambda * static_cast<double>(t));
        const double yi = y_idx[i] == c ? 1.0 : -1.0;
        const double margin =
            yi * (x.dot_row(i, model.weights.row(c)) + model.bias[c]);
        for (std::size_t j = 0; j < d; ++j)
          model.weights(c, j) *= (1.0 - eta * lambda);
        if (margin < 1.0) {
          x.for_each_nz(i, [&](std::size_t j, double v) {
            model.weights(c, j) += eta * yi * v;
          });
          model.bias[c] += eta * yi;
        }
      }
    }
  }
}

}  // namespace

LrGradient lr_loss_and_gradient(const FeatureMatrix& x,
                                const std::vector<std::size_t>& y_idx,
                                std::size_t n_classes, const Matrix& weights,
                                std::span<const double> bias, double l2) {
  const std::size_t n = x.rows();
  const std::size_t d = x.dim();
  LrGradient g;
  g.grad_weights = Matrix(n_classes, d);
  g.grad_bias.assign(n_classes, 0.0);

  std::vector<double> scores(n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < n_classes; ++c)
      scores[c] = x.dot_row(i, weights.row(c)) + bias[c];
    const double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      scores[c] = std::exp(scores[c] - mx);
      z += scores[c];
    }
    g.loss += -std::log(scores[y_idx[i]] / z) / static_cast<double>(n);
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double p = scores[c] / z;
      const double delta = (p - (y_idx[i] == c ? 1.0 : 0.0)) /
                           static_cast<double>(n);
      x.for_each_nz(i, [&](std::size_t j, double v) {
        g.grad_weights(c, j) += delta * v;
      });
      g.grad_bias[c] += delta;
    }
  }

  double reg = 0.0;
  for (std::size_t idx = 0; idx < weights.data.size(); ++idx) {
    reg += weights.data[idx] * weights.data[idx];
    g.grad_weights.data[idx] += l2 * weights.data[idx];
  }
  g.loss += 0.5 * l2 * reg;

  double norm_sq = 0.0;
  for (const double v : g.grad_weights.data) norm_sq += v * v;
  for (const double v : g.grad_bias) norm_sq += v * v;
  g.grad_norm = std::sqrt(norm_sq);
  return g;
}

ClassifierModel train_classifier(ClassifierKind kind, const FeatureMatrix& x,
                                 const std::vector<std::string>& y,
                                 const TrainConfig& config) {
  if (x.rows() != y.size())
    throw DimensionError("feature rows and labels differ in length");
  if (x.rows() < 2) throw ConfigError("training needs at least 2 samples");

  ClassifierModel model;
  model.kind = kind;
  model.labels = distinct_sorted(y);
  model.dim = x.dim();
  model.config = config;
  if (model.labels.size() == 1) {
    model.warnings.push_back("training data has a single class \"" +
                             model.labels[0] +
                             "\"; the model will always predict it");
  }
  const auto y_idx = label_indices(y, model.labels);

  switch (kind) {
    case ClassifierKind::NaiveBayes:
      train_naive_bayes(model, x, y_idx);
      break;
    case ClassifierKind::LogisticRegression:
      train_logistic_regression(model, x, y_idx);
      break;
    case ClassifierKind::LinearSvm:
      train_linear_svm(model, x, y_idx);
      break;
  }
  return model;
}

std::vector<double> ClassifierModel::scores(const FeatureMatrix& x,
                                            std::size_t row) const {
  const std::size_t k = labels.size();
  std::vector<double> s(k);
  if (kind == ClassifierKind::NaiveBayes) {
    // log-prior first, then feature terms in ascending index order; tests
    // rely on this exact accumulation order
    for (std::size_t c = 0; c < k; ++c) {
      double acc = log_prior[c];
      x.for_each_nz(row, [&](std::size_t j, double v) {
        acc += v * feature_log_prob(c, j);
      });
      s[c] = acc;
    }
  } else {
    for (std::size_t c = 0; c < k; ++c)
      s[c] = x.dot_row(row, weights.row(c)) + bias[c];
  }
  return s;
}

std::vector<std::string> predict(const ClassifierModel& model,
                                 const FeatureMatrix& x) {
  if (x.rows() > 0 && x.dim() != model.dim)
    throw DimensionError("prediction features have dimension " +
                         std::to_string(x.dim()) + ", model expects " +
                         std::to_string(model.dim));
  std::vector<std::string> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto s = model.scores(x, i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c) {
      if (s[c] > s[best]) best = c;  // ties keep the lower class index
    }
    out.push_back(model.labels[best]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols)
    throw ParseError("matrix data length does not match rows*cols");
  return m;
}

}  // namespace

std::string ClassifierModel::to_json() const {
  nlohmann::json j;
  j["kind"] = factline::to_string(kind);
  j["labels"] = labels;
  j["dim"] = dim;
  j["log_prior"] = log_prior;
  j["feature_log_prob"] = matrix_to_json(feature_log_prob);
  j["weights"] = matrix_to_json(weights);
  j["bias"] = bias;
  return j.dump();
}

ClassifierModel ClassifierModel::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid classifier json: ") + e.what());
  }
  ClassifierModel m;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "NaiveBayes") m.kind = ClassifierKind::NaiveBayes;
  else if (kind == "LogisticRegression") m.kind = ClassifierKind::LogisticRegression;
  else if (kind == "LinearSvm") m.kind = ClassifierKind::LinearSvm;
  else throw ParseError("unknown classifier kind \"" + kind + "\"");
  m.labels = j.at("labels").get<std::vector<std::string>>();
  m.dim = j.at("dim").get<std::size_t>();
  m.log_prior = j.at("log_prior").get<std::vector<double>>();
  m.feature_log_prob = matrix_from_json(j.at("feature_log_prob"));
  m.weights = matrix_from_json(j.at("weights"));
  m.bias = j.at("bias").get<std::vector<double>>();
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double EvalScores::aggregate_f1(Averaging a) const {
  switch (a) {
    case Averaging::Macro: return macro_f1;
    case Averaging::Weighted: return weighted_f1;
    case Averaging::Micro: return micro_f1;
  }
  return 0.0;
}

double EvalScores::aggregate_precision(Averaging a) const {
  switch (a) {
    case Averaging::Macro: return macro_precision;
    case Averaging::Weighted: return weighted_precision;
    case Averaging::Micro: return micro_precision;
  }
  return 0.0;
}

double EvalScores::aggregate_recall(Averaging a) const {
  switch (a) {
    case Averaging::Macro: return macro_recall;
    case Averaging::Weighted: return weighted_recall;
    case Averaging::Micro: return micro_recall;
  }
  return 0.0;
}

EvalScores evaluate_f1(const std::vector<std::string>& pred,
                       const std::vector<std::string>& gold,
                       const std::optional<std::vector<std::string>>&
                           label_universe) {
  if (pred.size() != gold.size())
    throw DimensionError("pred and gold differ in length (" +
                         std::to_string(pred.size()) + " vs " +
                         std::to_string(gold.size()) + ")");
  if (gold.empty()) throw ConfigError("cannot evaluate an empty prediction list");

  EvalScores s;
  if (label_universe) {
    s.labels = *label_universe;
    std::sort(s.labels.begin(), s.labels.end());
    s.labels.erase(std::unique(s.labels.begin(), s.labels.end()),
                   s.labels.end());
    std::set<std::string> known(s.labels.begin(), s.labels.end());
    for (const auto& g : gold) {
      if (!known.count(g))
        throw ConfigError("gold label \"" + g + "\" missing from label universe");
    }
    for (const auto& p : pred) {
      if (!known.count(p))
        throw ConfigError("predicted label \"" + p +
                          "\" missing from label universe");
    }
  } else {
    std::set<std::string> set(gold.begin(), gold.end());
    set.insert(pred.begin(), pred.end());
    s.labels.assign(set.begin(), set.end());
  }

  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < s.labels.size(); ++i) pos[s.labels[i]] = i;
  const std::size_t k = s.labels.size();
  s.confusion = Matrix(k, k);
  for (std::size_t i = 0; i < gold.size(); ++i)
    s.confusion(pos.at(gold[i]), pos.at(pred[i])) += 1.0;

  s.precision.resize(k);
  s.recall.resize(k);
  s.f1.resize(k);
  s.support.resize(k);
  double correct = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double tp = s.confusion(c, c);
    double fp = 0.0, fn = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += s.confusion(o, c);
      fn += s.confusion(c, o);
    }
    correct += tp;
    double support = tp + fn;
    s.support[c] = static_cast<std::size_t>(support);
    s.precision[c] = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    s.recall[c] = support > 0.0 ? tp / support : 0.0;
    const double pr = s.precision[c] + s.recall[c];
    s.f1[c] = pr > 0.0 ? 2.0 * s.precision[c] * s.recall[c] / pr : 0.0;
  }

  const double n = static_cast<double>(gold.size());
  s.accuracy = correct / n;
  for (std::size_t c = 0; c < k; ++c) {
    s.macro_precision += s.precision[c] / static_cast<double>(k);
    s.macro_recall += s.recall[c] / static_cast<double>(k);
    s.macro_f1 += s.f1[c] / static_cast<double>(k);
    const double w = static_cast<double>(s.support[c]) / n;
    s.weighted_precision += w * s.precision[c];
    s.weighted_recall += w * s.recall[c];
    s.weighted_f1 += w * s.f1[c];
  }
  // single-label micro-averaged P, R and F1 all equal accuracy
  s.micro_precision = s.micro_recall = s.micro_f1 = s.accuracy;
  return s;
}

// ---------------------------------------------------------------------------
// Per-cluster experiment
// ---------------------------------------------------------------------------

std::vector<ExperimentCell> run_validity_experiment(
    const std::vector<std::string>& labels, const std::vector<int>& clusters,
    const std::vector<std::pair<std::string, const FeatureMatrix*>>&
        representations,
    const ValidityExperimentConfig& config) {
  if (labels.size() != clusters.size())
    throw DimensionError("labels and cluster assignments differ in length");
  for (const auto& [name, features] : representations) {
    if (features->rows() != labels.size())
      throw DimensionError("representation \"" + name +
                           "\" row count does not match labels");
  }

  std::map<int, std::vector<std::size_t>> by_cluster;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    by_cluster[clusters[i]].push_back(i);

  std::vector<ExperimentCell> cells;
  struct Agg {
    std::vector<double> macro, weighted, micro;
    std::vector<std::string> pooled_pred, pooled_gold;
    std::size_t n_train = 0, n_test = 0;
  };
  std::map<std::pair<std::string, std::string>, Agg> agg;

  for (const auto& [name, features] : representations) {
    const bool nonneg = features->all_nonnegative();
    for (const ClassifierKind kind : config.kinds) {
      if (kind == ClassifierKind::NaiveBayes && !nonneg) continue;

      for (const auto& [cluster, indices] : by_cluster) {
        ExperimentCell cell;
        cell.cluster = cluster;
        cell.row_label = std::to_string(cluster);
        cell.representation = name;
        cell.classifier = to_string(kind);

        if (indices.size() < config.min_cluster_size) {
          cell.insufficient = true;
          cells.push_back(cell);
          continue;
        }

        std::vector<std::string> strata;
        strata.reserve(indices.size());
        for (const std::size_t i : indices) strata.push_back(labels[i]);
        const IndexSplit split = split_indices(
            indices.size(), config.split_ratio,
            derive_seed(config.seed, static_cast<std::uint64_t>(cluster) + 1, 1),
            &strata);

        auto pick = [&](const std::vector<std::size_t>& local) {
          std::vector<std::size_t> global;
          global.reserve(local.size());
          for (const std::size_t l : local) global.push_back(indices[l]);
          return global;
        };
        const auto train_idx = pick(split.train);
        const auto test_idx = pick(split.test);
        if (test_idx.empty()) {
          cell.insufficient = true;
          cells.push_back(cell);
          continue;
        }

        std::vector<std::string> y_train, y_test;
        for (const auto i : train_idx) y_train.push_back(labels[i]);
        for (const auto i : test_idx) y_test.push_back(labels[i]);

        const FeatureMatrix x_train = features->select(train_idx);
        const FeatureMatrix x_test = features->select(test_idx);
        const ClassifierModel model =
            train_classifier(kind, x_train, y_train, config.train);
        const auto y_pred = predict(model, x_test);
        const EvalScores scores = evaluate_f1(y_pred, y_test);

        cell.f1_macro = scores.macro_f1;
        cell.f1_weighted = scores.weighted_f1;
        cell.f1_micro = scores.micro_f1;
        cell.n_train = train_idx.size();
        cell.n_test = test_idx.size();
        cells.push_back(cell);

        Agg& a = agg[{name, to_string(kind)}];
        a.macro.push_back(scores.macro_f1);
        a.weighted.push_back(scores.weighted_f1);
        a.micro.push_back(scores.micro_f1);
        a.pooled_pred.insert(a.pooled_pred.end(), y_pred.begin(), y_pred.end());
        a.pooled_gold.insert(a.pooled_gold.end(), y_test.begin(), y_test.end());
        a.n_train += train_idx.size();
        a.n_test += test_idx.size();
      }
    }
  }

  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };

  for (const auto& [key, a] : agg) {
    ExperimentCell avg;
    avg.cluster = -1;
    avg.row_label = "avg";
    avg.representation = key.first;
    avg.classifier = key.second;
    avg.f1_macro = mean(a.macro);
    avg.f1_weighted = mean(a.weighted);
    avg.f1_micro = mean(a.micro);
    avg.n_train = a.n_train;
    avg.n_test = a.n_test;
    cells.push_back(avg);

    ExperimentCell pooled;
    pooled.cluster = -1;
    pooled.row_label = "pooled";
    pooled.representation = key.first;
    pooled.classifier = key.second;
    const EvalScores s = evaluate_f1(a.pooled_pred, a.pooled_gold);
    pooled.f1_macro = s.macro_f1;
    pooled.f1_weighted = s.weighted_f1;
    pooled.f1_micro = s.micro_f1;
    pooled.n_train = a.n_train;
    pooled.n_test = a.n_test;
    cells.push_back(pooled);
  }
  return cells;
}

std::vector<std::vector<std::string>> experiment_to_csv(
    const std::vector<ExperimentCell>& cells) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"cluster", "representation", "classifier", "f1_macro",
                  "f1_weighted", "f1_micro", "n_train", "n_test"});
  const auto fmt = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string{};
  };
  for (const auto& c : cells) {
    rows.push_back({c.row_label, c.representation, c.classifier,
                    fmt(c.f1_macro), fmt(c.f1_weighted), fmt(c.f1_micro),
                    std::to_string(c.n_train), std::to_string(c.n_test)});
  }
  return rows;
}

}  // namespace factline
