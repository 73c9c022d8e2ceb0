// Copyright 2026 The bolt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "bolt/math.hpp"

namespace bolt {

/// Ranks with ties replaced by the average rank (1-based).
inline Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return v[a] < v[b]; });
  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

/// Spearman's rank correlation (average-tie ranks). Undefined when either
/// argument has zero rank variance.
inline std::optional<double> spearman_rho(const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman_rho: need equal lengths >= 2");
  }
  const Eigen::VectorXd ra = average_ranks(a);
  const Eigen::VectorXd rb = average_ranks(b);
  const Eigen::VectorXd da = ra.array() - ra.mean();
  const Eigen::VectorXd db = rb.array() - rb.mean();
  const double va = da.squaredNorm();
  const double vb = db.squaredNorm();
  if (va <= 0.0 || vb <= 0.0) return std::nullopt;
  return da.dot(db) / std::sqrt(va * vb);
}

inline double sample_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

/// Half-width of the 95% t confidence interval, t_{0.975, n-1} * sd / sqrt(n).
inline double t_ci_half_width(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2) return 0.0;
  return t_quantile(0.975, n - 1) * sample_std(v) / std::sqrt(double(n));
}

/// Cumulative explained-variance ratio curve of a PCA of the rows of
/// `embeddings` (eigenvalues of the centered covariance, descending).
inline Eigen::VectorXd pca_explained_variance(const Eigen::MatrixXd& embeddings) {
  const int n = static_cast<int>(embeddings.rows());
  const int d = static_cast<int>(embeddings.cols());
  if (n < 2 || d < 1) {
    throw std::invalid_argument("pca_explained_variance: need n >= 2, d >= 1");
  }
  Eigen::MatrixXd centered = embeddings.rowwise() - embeddings.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd evals = es.eigenvalues().reverse();  // descending
  for (int i = 0; i < d; ++i) evals[i] = std::max(evals[i], 0.0);
  const double total = evals.sum();
  Eigen::VectorXd curve(d);
  double acc = 0.0;
  for (int i = 0; i < d; ++i) {
    acc += evals[i];
    curve[i] = total > 0.0 ? acc / total : 1.0;
  }
  return curve;
}

}  // namespace bolt
