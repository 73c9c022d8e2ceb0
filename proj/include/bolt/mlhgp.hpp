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

#include "bolt/gp.hpp"

namespace bolt {

struct MlhgpResult {
  GpModel mean_model;
  GpModel noise_model;  // regresses log noise variance
  bool diverged = false;

  /// Predicted observation-noise variance at a query (raw units).
  double noise_variance_at(const Eigen::MatrixXd& xq) const {
    auto [m, v] = noise_model.posterior_marginals(xq);
    return std::exp(m[0]);
  }
};

/// Most-likely heteroscedastic GP: alternate (1) a mean GP under the current
/// per-point noise, (2) per-point noise targets from squared residuals
/// smoothed over posterior samples, (3) a GP on the log noise variances.
/// em_iterations = 0 reduces to the plain homoscedastic fit.
inline MlhgpResult mlhgp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const KernelSpec& ks, int em_iterations, Rng& rng,
                             int restarts = 2) {
  const int n = static_cast<int>(X.rows());
  if (n < 10) throw std::invalid_argument("mlhgp_fit: need n >= 10");

  MlhgpResult out;
  out.mean_model = fit_gp(X, y, ks, NoiseSpec::inferred(), restarts, rng);

  const double var_y =
      (y.array() - y.mean()).square().sum() / std::max(n - 1, 1);
  const double noise_cap = 1e3 * std::max(var_y, 1e-12);

  if (em_iterations == 0) {
    Eigen::VectorXd log_nv = Eigen::VectorXd::Constant(
        n, std::log(std::max(out.mean_model.noise_variance_raw(), 1e-12)));
    out.noise_model = GpModel::with_hyperparams(
        X, log_nv, ks, out.mean_model.hyperparams(),
        Eigen::VectorXd::Constant(n, 1e-4));
    return out;
  }

  constexpr int kSmoothingDraws = 64;
  for (int it = 0; it < em_iterations; ++it) {
    // Noise targets: squared residuals averaged over posterior samples.
    Eigen::MatrixXd F = out.mean_model.sample_joint(X, kSmoothingDraws, rng);
    Eigen::VectorXd nv(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int s = 0; s < kSmoothingDraws; ++s) {
        const double r = y[i] - F(s, i);
        acc += r * r;
      }
      nv[i] = std::max(acc / kSmoothingDraws, 1e-12);
    }
    if (nv.maxCoeff() > noise_cap) {
      out.diverged = true;
      break;
    }
    Eigen::VectorXd log_nv = nv.array().log();
    out.noise_model =
        fit_gp(X, log_nv, ks, NoiseSpec::inferred(), restarts, rng);

    auto sigma_of = [nm = out.noise_model](const Point& x) {
      auto [m, v] = nm.posterior_marginals(x.transpose());
      return std::sqrt(std::exp(m[0]));
    };
    out.mean_model =
        fit_gp(X, y, ks, NoiseSpec::known(sigma_of), restarts, rng);
  }
  return out;
}

}  // namespace bolt
