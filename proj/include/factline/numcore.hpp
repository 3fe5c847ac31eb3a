#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factline/errors.hpp"

namespace factline {

// ---------------------------------------------------------------------------
// Dense row-major matrix. Small and deliberately plain; the numerical core
// is self-contained.
// ---------------------------------------------------------------------------

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) {
    return {data.data() + i * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Pairs come back sorted by eigenvalue, descending; eigenvectors are the
// rows of `vectors`.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;  // k x n, row i is the eigenvector for values[i]
};

SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps = 64);

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct PcaTarget {
  // Exactly one of these drives the component count.
  std::optional<std::size_t> components;
  std::optional<double> variance_fraction;  // in (0, 1]
  std::optional<std::size_t> max_components;  // cap when variance-driven

  static PcaTarget by_components(std::size_t c) { return {c, {}, {}}; }
  static PcaTarget by_variance(double v,
                               std::optional<std::size_t> cap = {}) {
    return {{}, v, cap};
  }
};

struct PcaModel {
  std::vector<double> mean;       // D
  Matrix components;              // C x D, orthonormal rows
  std::vector<double> eigenvalues;       // per retained component
  std::vector<double> explained_ratio;   // descending, in (0, 1]

  std::size_t input_dim() const { return mean.size(); }
  std::size_t component_count() const { return components.rows; }
};

// Covariance uses the N-1 convention; each retained component's ratio is
// its eigenvalue over the total variance. Component signs are fixed so the
// largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& x, const PcaTarget& target);

Matrix pca_transform(const PcaModel& model, const Matrix& x);

// Project back to input space: y * components + mean.
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& y);

// ---------------------------------------------------------------------------
// K-means
// ---------------------------------------------------------------------------

struct KmeansConfig {
  std::size_t max_iter = 300;
  double tol = 1e-8;  // stop when the WSS improvement drops below this
};

struct KmeansModel {
  std::size_t k = 0;
  Matrix centers;                  // k x C
  std::vector<int> assignments;    // per row of the training data
  double wss = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> wss_history;  // per-iteration, non-increasing
};

// Lloyd's algorithm from k-means++ seeding, deterministic given the seed.
// Ties in assignment go to the lowest center id; an emptied cluster is
// refilled with the point farthest from its own center.
KmeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed,
                       const KmeansConfig& config = {});

// Best-of-`restarts` WSS per k (restart seeds derived from `seed`).
std::vector<std::pair<std::size_t, double>> wss_curve(
    const Matrix& x, std::span<const std::size_t> k_values, std::uint64_t seed,
    std::size_t restarts = 5, const KmeansConfig& config = {});

// Knee of the WSS curve: the interior point with the largest perpendicular
// distance to the chord between the curve's endpoints, after normalizing
// both axes to [0, 1]. Ties pick the smallest k.
std::size_t select_k_elbow(
    std::span<const std::pair<std::size_t, double>> curve);

// Argmin distance to the centers of `km` after projecting x through `pca`;
// ties go to the lowest cluster id.
int assign_cluster(const KmeansModel& km, const PcaModel& pca,
                   std::span<const double> x);

int nearest_center(const KmeansModel& km, std::span<const double> projected);

// ---------------------------------------------------------------------------
// Model persistence (single JSON document with PCA + k-means + seed).
// ---------------------------------------------------------------------------

struct ClusterModel {
  PcaModel pca;
  KmeansModel kmeans;

  std::string to_json() const;
  static ClusterModel from_json(std::string_view text);
};

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace factline
