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
#include <vector>

namespace bolt {

inline constexpr double kHvRegretFloor = 1e-8;

/// Weak dominance with at least one strict coordinate (maximization).
inline bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  bool strict = false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return false;
    if (a[k] > b[k]) strict = true;
  }
  return strict;
}

/// Indices of rows not weakly dominated by any other row.
inline std::vector<int> nondominated(const Eigen::MatrixXd& Y) {
  const int n = static_cast<int>(Y.rows());
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    bool dominated = false;
    for (int j = 0; j < n && !dominated; ++j) {
      if (j != i && dominates(Y.row(j), Y.row(i))) dominated = true;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

namespace detail {

/// 2D dominated area above ref for maximization; rows need not be a front.
inline double hv2d(std::vector<Eigen::Vector2d> pts, const Eigen::Vector2d& ref) {
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a[0] > b[0]; });
  double area = 0.0, best_y = ref[1];
  for (const auto& p : pts) {
    if (p[1] > best_y) {
      area += (p[0] - ref[0]) * (p[1] - best_y);
      best_y = p[1];
    }
  }
  return area;
}

}  // namespace detail

/// Exact hypervolume of the region dominated by `front` relative to `ref`
/// (maximization). m = 2 by sorted sweep, m = 3 by slicing along the third
/// objective. Every front point must strictly dominate the reference point.
inline double hypervolume(const Eigen::MatrixXd& front,
                          const Eigen::VectorXd& ref) {
  const int n = static_cast<int>(front.rows());
  const int m = static_cast<int>(ref.size());
  if (front.cols() != m) throw std::invalid_argument("hypervolume: dim mismatch");
  if (m != 2 && m != 3) {
    throw std::invalid_argument("hypervolume: supports m in {2, 3}");
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      if (front(i, k) <= ref[k]) {
        throw std::invalid_argument(
            "hypervolume: front point does not dominate the reference");
      }
    }
  }
  if (n == 0) return 0.0;
  if (m == 2) {
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(front(i, 0), front(i, 1));
    return detail::hv2d(std::move(pts), Eigen::Vector2d(ref[0], ref[1]));
  }
  // m == 3: process points by descending third coordinate; each slab
  // contributes the 2D area of the projections seen so far.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return front(a, 2) > front(b, 2); });
  double volume = 0.0;
  std::vector<Eigen::Vector2d> proj;
  const Eigen::Vector2d ref2(ref[0], ref[1]);
  for (int i = 0; i < n; ++i) {
    proj.emplace_back(front(order[i], 0), front(order[i], 1));
    const double z_hi = front(order[i], 2);
    const double z_lo = (i + 1 < n) ? front(order[i + 1], 2) : ref[2];
    if (z_hi > z_lo) {
      volume += detail::hv2d(proj, ref2) * (z_hi - z_lo);
    }
  }
  return volume;
}

/// Hypervolume of the subset of rows that strictly dominate ref (empty
/// front contributes zero).
inline double hypervolume_filtered(const Eigen::MatrixXd& Y,
                                   const Eigen::VectorXd& ref) {
  std::vector<int> keep;
  for (int i = 0; i < Y.rows(); ++i) {
    bool dom = true;
    for (int k = 0; k < ref.size(); ++k) {
      if (Y(i, k) <= ref[k]) {
        dom = false;
        break;
      }
    }
    if (dom) keep.push_back(i);
  }
  if (keep.empty()) return 0.0;
  Eigen::MatrixXd F(keep.size(), Y.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) F.row(i) = Y.row(keep[i]);
  return hypervolume(F, ref);
}

struct LogHvSeries {
  std::vector<double> values;
  bool floored = false;
};

/// Per-iteration log(hv_star - HV(front of all rows up to t)); the argument
/// is clamped at 1e-8 and the clamp is reported.
inline LogHvSeries log_hv_difference(const Eigen::MatrixXd& Y, double hv_star,
                                     const Eigen::VectorXd& ref) {
  LogHvSeries out;
  double hv_so_far = 0.0;
  Eigen::MatrixXd seen(0, Y.cols());
  for (int t = 0; t < Y.rows(); ++t) {
    seen.conservativeResize(t + 1, Eigen::NoChange);
    seen.row(t) = Y.row(t);
    hv_so_far = hypervolume_filtered(seen, ref);
    double gap = hv_star - hv_so_far;
    if (gap < kHvRegretFloor) {
      gap = kHvRegretFloor;
      out.floored = true;
    }
    out.values.push_back(std::log(gap));
  }
  return out;
}

/// Augmented Chebyshev scalarization (maximization orientation) of
/// unit-normalized objectives: s = max_j(w_j y_j) + rho * sum_j w_j y_j.
inline Eigen::VectorXd parego_scalarize(const Eigen::MatrixXd& Y_norm,
                                        const Eigen::VectorXd& weights,
                                        double rho = 0.05) {
  if (weights.size() != Y_norm.cols()) {
    throw std::invalid_argument("parego_scalarize: weight length mismatch");
  }
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("parego_scalarize: weights must lie on the simplex");
  }
  Eigen::MatrixXd wy = Y_norm.array().rowwise() * weights.transpose().array();
  return wy.rowwise().maxCoeff() + rho * wy.rowwise().sum();
}

}  // namespace bolt
