#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "factline/numcore.hpp"
#include "factline/rng.hpp"

namespace factline {

namespace {

// Neumaier-compensated sum; WSS must not depend on accumulation noise.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<std::size_t> kmeanspp_seed(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows;
  std::vector<std::size_t> centers;
  centers.reserve(k);
  std::vector<bool> chosen(n, false);

  const std::size_t first = rng.uniform_index(n);
  centers.push_back(first);
  chosen[first] = true;

  std::vector<double> dist_sq(n);
  for (std::size_t i = 0; i < n; ++i)
    dist_sq[i] = squared_distance(x.row(i), x.row(first));

  while (centers.size() < k) {
    double total = 0.0;
    for (const double d : dist_sq) total += d;
    std::size_t pick;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += dist_sq[i];
        if (cum > r && !chosen[i]) {
          pick = i;
          break;
        }
      }
      if (chosen[pick]) {
        // fell off the end onto a chosen point; take the first unchosen
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // all remaining points coincide with a center
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = rng.uniform_index(n);
    }
    centers.push_back(pick);
    chosen[pick] = true;
    for (std::size_t i = 0; i < n; ++i)
      dist_sq[i] = std::min(dist_sq[i], squared_distance(x.row(i), x.row(pick)));
  }
  return centers;
}

}  // namespace

KmeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed,
                       const KmeansConfig& config) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  if (k == 0) throw ConfigError("k must be positive");
  if (k > n) throw ConfigError("k (" + std::to_string(k) +
                               ") exceeds the number of points (" +
                               std::to_string(n) + ")");

  KmeansModel model;
  model.k = k;
  model.seed = seed;
  model.centers = Matrix(k, d);
  model.assignments.assign(n, 0);

  Rng rng(seed);
  const auto seeds = kmeanspp_seed(x, k, rng);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) model.centers(c, j) = x(seeds[c], j);

  double prev_wss = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    // assignment step, ties to the lowest center id
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x.row(i), model.centers.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dist = squared_distance(x.row(i), model.centers.row(c));
        if (dist < best_d) {
          best_d = dist;
          best = static_cast<int>(c);
        }
      }
      if (model.assignments[i] != best) {
        model.assignments[i] = best;
        changed = true;
      }
    }

    // refill any emptied cluster with the farthest point of a non-singleton
    // cluster, keeping k populated clusters
    std::vector<std::size_t> counts(k, 0);
    for (const int a : model.assignments) ++counts[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t farthest = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto owner = static_cast<std::size_t>(model.assignments[i]);
        if (counts[owner] <= 1) continue;
        const double dist =
            squared_distance(x.row(i), model.centers.row(owner));
        if (dist > far_d) {
          far_d = dist;
          farthest = i;
        }
      }
      if (farthest == n) continue;  // nothing movable
      --counts[static_cast<std::size_t>(model.assignments[farthest])];
      model.assignments[farthest] = static_cast<int>(c);
      ++counts[c];
      changed = true;
    }

    // update step: centers become assignment means
    Matrix sums(k, d);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(model.assignments[i]);
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += x(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j)
        model.centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }

    CompensatedSum wss;
    for (std::size_t i = 0; i < n; ++i) {
      wss.add(squared_distance(
          x.row(i),
          model.centers.row(static_cast<std::size_t>(model.assignments[i]))));
    }
    const double cur = wss.value();
    if (cur > prev_wss + 1e-9 * std::max(1.0, prev_wss)) {
      throw Error("internal: WSS increased between Lloyd iterations");
    }
    model.wss_history.push_back(cur);
    model.iterations = iter + 1;
    const bool converged =
        !changed || (std::isfinite(prev_wss) && prev_wss - cur < config.tol);
    model.wss = cur;
    prev_wss = cur;
    if (converged) break;
  }
  return model;
}

std::vector<std::pair<std::size_t, double>> wss_curve(
    const Matrix& x, std::span<const std::size_t> k_values, std::uint64_t seed,
    std::size_t restarts, const KmeansConfig& config) {
  if (restarts == 0) throw ConfigError("restarts must be positive");
  std::vector<std::pair<std::size_t, double>> curve;
  curve.reserve(k_values.size());
  for (const std::size_t k : k_values) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
      const KmeansModel m =
          kmeans_fit(x, k, derive_seed(seed, k, r), config);
      best = std::min(best, m.wss);
    }
    curve.push_back({k, best});
  }
  return curve;
}

std::size_t select_k_elbow(
    std::span<const std::pair<std::size_t, double>> curve) {
  if (curve.size() < 3)
    throw ConfigError("elbow selection needs at least 3 curve points");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].first <= curve[i - 1].first)
      throw ConfigError("elbow curve k values must be strictly increasing");
  }

  // Normalize both axes to [0, 1]; the knee is then scale-invariant.
  const double k_lo = static_cast<double>(curve.front().first);
  const double k_hi = static_cast<double>(curve.back().first);
  double w_lo = curve[0].second, w_hi = curve[0].second;
  for (const auto& [k, w] : curve) {
    w_lo = std::min(w_lo, w);
    w_hi = std::max(w_hi, w);
  }
  const double k_span = k_hi - k_lo;
  const double w_span = w_hi - w_lo;

  auto norm_k = [&](std::size_t k) {
    return (static_cast<double>(k) - k_lo) / k_span;
  };
  auto norm_w = [&](double w) {
    return w_span > 0.0 ? (w - w_lo) / w_span : 0.0;
  };

  const double x1 = norm_k(curve.front().first);
  const double y1 = norm_w(curve.front().second);
  const double x2 = norm_k(curve.back().first);
  const double y2 = norm_w(curve.back().second);
  const double chord_len = std::hypot(x2 - x1, y2 - y1);

  std::size_t best_k = curve[1].first;
  double best_dist = -1.0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double px = norm_k(curve[i].first);
    const double py = norm_w(curve[i].second);
    const double dist =
        chord_len > 0.0
            ? std::abs((y2 - y1) * px - (x2 - x1) * py + x2 * y1 - y2 * x1) /
                  chord_len
            : 0.0;
    if (dist > best_dist) {
      best_dist = dist;
      best_k = curve[i].first;
    }
  }
  return best_k;
}

int nearest_center(const KmeansModel& km, std::span<const double> projected) {
  if (projected.size() != km.centers.cols)
    throw DimensionError("query dimension does not match cluster centers");
  int best = 0;
  double best_d = squared_distance(projected, km.centers.row(0));
  for (std::size_t c = 1; c < km.k; ++c) {
    const double d = squared_distance(projected, km.centers.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

int assign_cluster(const KmeansModel& km, const PcaModel& pca,
                   std::span<const double> x) {
  if (x.size() != pca.input_dim())
    throw DimensionError("query dimension does not match the PCA model");
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.data.begin());
  const Matrix projected = pca_transform(pca, row);
  return nearest_center(km, projected.row(0));
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string ClusterModel::to_json() const {
  nlohmann::json j;
  j["pca"]["mean"] = pca.mean;
  j["pca"]["components"] = {{"rows", pca.components.rows},
                            {"cols", pca.components.cols},
                            {"data", pca.components.data}};
  j["pca"]["eigenvalues"] = pca.eigenvalues;
  j["pca"]["explained_ratio"] = pca.explained_ratio;
  j["kmeans"]["k"] = kmeans.k;
  j["kmeans"]["centers"] = {{"rows", kmeans.centers.rows},
                            {"cols", kmeans.centers.cols},
                            {"data", kmeans.centers.data}};
  j["kmeans"]["assignments"] = kmeans.assignments;
  j["kmeans"]["wss"] = kmeans.wss;
  j["kmeans"]["iterations"] = kmeans.iterations;
  j["kmeans"]["seed"] = kmeans.seed;
  return j.dump();
}

namespace {

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols)
    throw ParseError("matrix data length does not match rows*cols");
  return m;
}

}  // namespace

ClusterModel ClusterModel::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid cluster model json: ") + e.what());
  }
  ClusterModel m;
  m.pca.mean = j.at("pca").at("mean").get<std::vector<double>>();
  m.pca.components = matrix_from_json(j.at("pca").at("components"));
  m.pca.eigenvalues = j.at("pca").at("eigenvalues").get<std::vector<double>>();
  m.pca.explained_ratio =
      j.at("pca").at("explained_ratio").get<std::vector<double>>();
  m.kmeans.k = j.at("kmeans").at("k").get<std::size_t>();
  m.kmeans.centers = matrix_from_json(j.at("kmeans").at("centers"));
  m.kmeans.assignments = j.at("kmeans").at("assignments").get<std::vector<int>>();
  m.kmeans.wss = j.at("kmeans").at("wss").get<double>();
  m.kmeans.iterations = j.at("kmeans").at("iterations").get<std::size_t>();
  m.kmeans.seed = j.at("kmeans").at("seed").get<std::uint64_t>();
  return m;
}

}  // namespace factline
