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
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bolt/spaces.hpp"

namespace bolt {

/// Input-dependent observation-noise model: Nadaraya-Watson regression of
/// measured standard deviations under a Laplacian kernel
/// K(x, x') = exp(-gamma * ||x - x'||_1).
struct NoiseModel {
  Eigen::MatrixXd train_points;  // m x p
  Eigen::VectorXd train_sigmas;  // nonnegative
  double gamma = 0.1;

  void check() const {
    if (train_points.rows() < 1 ||
        train_points.rows() != train_sigmas.size()) {
      throw std::invalid_argument("noise model: need m >= 1 matching sigmas");
    }
    if (train_sigmas.minCoeff() < 0.0 || !(gamma > 0.0)) {
      throw std::invalid_argument("noise model: sigmas >= 0, gamma > 0");
    }
  }
};

inline double noise_sigma(const NoiseModel& nm, const Point& x) {
  if (x.size() != nm.train_points.cols()) {
    throw std::invalid_argument("noise_sigma: dimension mismatch");
  }
  const int m = static_cast<int>(nm.train_points.rows());
  Eigen::VectorXd logw(m);
  for (int i = 0; i < m; ++i) {
    logw[i] = -nm.gamma * (nm.train_points.row(i).transpose() - x).cwiseAbs().sum();
  }
  const double shift = logw.maxCoeff();
  double wsum = 0.0, num = 0.0;
  for (int i = 0; i < m; ++i) {
    const double w = std::exp(logw[i] - shift);
    wsum += w;
    num += w * nm.train_sigmas[i];
  }
  return std::max(num / wsum, 0.0);
}

struct NoiseCvRow {
  double gamma = 0.0;
  double rmse = 0.0;
};

/// Select gamma by k-fold cross-validated RMSE (ties resolved toward the
/// smallest gamma), then refit on all data. Folds are assigned round-robin
/// by index, which keeps the selection deterministic.
inline std::pair<NoiseModel, std::vector<NoiseCvRow>> fit_noise_model(
    const Eigen::MatrixXd& points, const Eigen::VectorXd& sigmas,
    std::vector<double> gamma_grid, int folds) {
  const int m = static_cast<int>(points.rows());
  if (folds < 2 || folds > m) {
    throw std::invalid_argument("fit_noise_model: need 2 <= folds <= m");
  }
  if (gamma_grid.empty()) {
    throw std::invalid_argument("fit_noise_model: empty gamma grid");
  }
  std::sort(gamma_grid.begin(), gamma_grid.end());
  std::vector<NoiseCvRow> table;
  double best_rmse = std::numeric_limits<double>::infinity();
  double best_gamma = gamma_grid.front();
  for (double gamma : gamma_grid) {
    double fold_rmse_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train_idx, test_idx;
      for (int i = 0; i < m; ++i) {
        (i % folds == f ? test_idx : train_idx).push_back(i);
      }
      NoiseModel fold_model;
      fold_model.gamma = gamma;
      fold_model.train_points.resize(train_idx.size(), points.cols());
      fold_model.train_sigmas.resize(train_idx.size());
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        fold_model.train_points.row(i) = points.row(train_idx[i]);
        fold_model.train_sigmas[i] = sigmas[train_idx[i]];
      }
      double se = 0.0;
      for (int i : test_idx) {
        const double pred = noise_sigma(fold_model, points.row(i).transpose());
        se += (pred - sigmas[i]) * (pred - sigmas[i]);
      }
      fold_rmse_sum += std::sqrt(se / test_idx.size());
    }
    const double rmse = fold_rmse_sum / folds;
    table.push_back({gamma, rmse});
    if (rmse < best_rmse) {
      best_rmse = rmse;
      best_gamma = gamma;
    }
  }
  NoiseModel final_model{points, sigmas, best_gamma};
  final_model.check();
  return {final_model, table};
}

inline nlohmann::json noise_model_to_json(const NoiseModel& nm) {
  nlohmann::json pts = nlohmann::json::array();
  for (int r = 0; r < nm.train_points.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < nm.train_points.cols(); ++c) {
      row.push_back(nm.train_points(r, c));
    }
    pts.push_back(row);
  }
  return {{"gamma", nm.gamma},
          {"points", pts},
          {"sigmas", std::vector<double>(nm.train_sigmas.data(),
                                         nm.train_sigmas.data() +
                                             nm.train_sigmas.size())}};
}

inline NoiseModel noise_model_from_json(const nlohmann::json& j) {
  NoiseModel nm;
  nm.gamma = j.at("gamma").get<double>();
  const auto& pts = j.at("points");
  const int m = static_cast<int>(pts.size());
  const int p = static_cast<int>(pts.at(0).size());
  nm.train_points.resize(m, p);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < p; ++c) nm.train_points(r, c) = pts[r][c].get<double>();
  }
  auto sig = j.at("sigmas").get<std::vector<double>>();
  nm.train_sigmas = Eigen::Map<Eigen::VectorXd>(sig.data(), sig.size());
  nm.check();
  return nm;
}

inline void save_noise_model(const std::string& path, const NoiseModel& nm) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << noise_model_to_json(nm).dump();
}

inline NoiseModel load_noise_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return noise_model_from_json(j);
}

}  // namespace bolt
