#include <algorithm>
#include <cmath>
#include <numeric>

#include "factline/numcore.hpp"

namespace factline {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver
// ---------------------------------------------------------------------------

SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps) {
  const std::size_t n = symmetric.rows;
  if (n != symmetric.cols) throw DimensionError("jacobi: matrix must be square");

  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off_diag_sq = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return s;
  };

  double scale = 0.0;
  for (const double x : a.data) scale = std::max(scale, std::abs(x));
  const double stop = scale > 0.0 ? 1e-30 * scale * scale * static_cast<double>(n * n)
                                  : 0.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diag_sq() <= stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // rotation angle from the standard two-sided Jacobi formulas
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (a(i, i) != a(j, j)) return a(i, i) > a(j, j);
    return i < j;
  });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = a(order[r], order[r]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(r, i) = v(i, order[r]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

PcaModel pca_fit(const Matrix& x, const PcaTarget& target) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  if (n < 2) throw ConfigError("pca needs at least 2 rows");
  if (d < 1) throw ConfigError("pca needs at least 1 column");
  for (const double v : x.data) {
    if (!std::isfinite(v)) throw ConfigError("pca input has a non-finite entry");
  }
  if (target.variance_fraction) {
    const double v = *target.variance_fraction;
    if (!(v > 0.0 && v <= 1.0))
      throw ConfigError("variance fraction must be in (0, 1]");
  } else if (target.components) {
    if (*target.components == 0 || *target.components > d)
      throw ConfigError("component count must be in [1, D]");
  } else {
    throw ConfigError("pca target must set components or variance_fraction");
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += x(i, j);
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) = x(i, j) - model.mean[j];

  Matrix cov(d, d);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
      cov(a, b) = cov(b, a) = s / denom;
    }
  }

  double total_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) total_var += cov(j, j);
  if (total_var <= 0.0) throw ConfigError("pca input has zero variance");

  SymmetricEigen eig = jacobi_eigen(cov);
  for (double& v : eig.values) v = std::max(v, 0.0);

  std::size_t positive = 0;
  while (positive < d && eig.values[positive] > total_var * 1e-12) ++positive;
  if (positive == 0) throw ConfigError("pca input has zero variance");

  std::size_t keep;
  if (target.components) {
    keep = std::min(*target.components, positive);
  } else {
    const double want = *target.variance_fraction * total_var;
    double cum = 0.0;
    keep = positive;
    for (std::size_t c = 0; c < positive; ++c) {
      cum += eig.values[c];
      if (cum >= want - 1e-12 * total_var) {
        keep = c + 1;
        break;
      }
    }
    if (target.max_components) keep = std::min(keep, *target.max_components);
    keep = std::max<std::size_t>(keep, 1);
  }

  model.components = Matrix(keep, d);
  model.eigenvalues.resize(keep);
  model.explained_ratio.resize(keep);
  for (std::size_t c = 0; c < keep; ++c) {
    model.eigenvalues[c] = eig.values[c];
    model.explained_ratio[c] = eig.values[c] / total_var;
    // sign convention: largest-magnitude entry positive
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(eig.vectors(c, j)) > std::abs(eig.vectors(c, arg))) arg = j;
    }
    const double flip = eig.vectors(c, arg) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j)
      model.components(c, j) = flip * eig.vectors(c, j);
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  const std::size_t d = model.input_dim();
  const std::size_t c = model.component_count();
  if (x.cols != d)
    throw DimensionError("pca_transform: expected " + std::to_string(d) +
                         " columns, got " + std::to_string(x.cols));
  Matrix y(x.rows, c);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t r = 0; r < c; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        s += (x(i, j) - model.mean[j]) * model.components(r, j);
      y(i, r) = s;
    }
  }
  return y;
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& y) {
  const std::size_t d = model.input_dim();
  const std::size_t c = model.component_count();
  if (y.cols != c)
    throw DimensionError("pca_inverse_transform: expected " + std::to_string(c) +
                         " columns, got " + std::to_string(y.cols));
  Matrix x(y.rows, d);
  for (std::size_t i = 0; i < y.rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = model.mean[j];
      for (std::size_t r = 0; r < c; ++r) s += y(i, r) * model.components(r, j);
      x(i, j) = s;
    }
  }
  return x;
}

}  // namespace factline
