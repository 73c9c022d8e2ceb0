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
#include "bolt/pareto.hpp"
#include "bolt/sobol.hpp"

namespace bolt {

/// Noisy expected hypervolume improvement by direct Monte Carlo: joint
/// quasi-MC posterior draws at the observed set define per-draw incumbent
/// fronts; a candidate's value is the average hypervolume gain of its
/// conditional draw over those fronts. Nonnegative per draw by construction.
class NehviEvaluator {
 public:
  NehviEvaluator(const std::vector<GpModel>& gps, Eigen::MatrixXd X_obs,
                 Eigen::VectorXd ref, int mc_samples)
      : gps_(&gps), X_obs_(std::move(X_obs)), ref_(std::move(ref)),
        S_(mc_samples) {
    const int m = static_cast<int>(gps.size());
    const int nA = static_cast<int>(X_obs_.rows());
    if (m < 2) throw std::invalid_argument("nehvi: need >= 2 objectives");
    base_ = qmc_normal(m * (nA + 1), S_);
    mu_.resize(m);
    chol_.resize(m);
    Eigen::MatrixXd F(S_, m);  // scratch
    std::vector<Eigen::MatrixXd> draws(m);
    for (int k = 0; k < m; ++k) {
      if (nA > 0) {
        auto [mean, cov] = gps[k].posterior(X_obs_);
        mu_[k] = mean;
        Eigen::MatrixXd K = cov;
        const double scale = std::max(cov.diagonal().maxCoeff(), 1e-300);
        double jitter = 1e-12 * scale;
        for (;; jitter *= 100.0) {
          K = cov;
          K.diagonal().array() += jitter;
          Eigen::LLT<Eigen::MatrixXd> llt(K);
          if (llt.info() == Eigen::Success) {
            chol_[k] = llt.matrixL();
            break;
          }
          if (jitter > scale) throw std::runtime_error("nehvi: bad covariance");
        }
        draws[k] = (base_.middleCols(k * (nA + 1), nA) * chol_[k].transpose())
                       .rowwise() +
                   mu_[k].transpose();
      } else {
        draws[k].resize(S_, 0);
      }
    }
    fronts_.reserve(S_);
    hv_.resize(S_);
    for (int s = 0; s < S_; ++s) {
      Eigen::MatrixXd Y(nA, m);
      for (int k = 0; k < m; ++k) {
        for (int i = 0; i < nA; ++i) Y(i, k) = draws[k](s, i);
      }
      Eigen::MatrixXd front(0, m);
      if (nA > 0) {
        auto keep = nondominated(Y);
        front.resize(keep.size(), m);
        for (std::size_t i = 0; i < keep.size(); ++i) front.row(i) = Y.row(keep[i]);
      }
      hv_[s] = hypervolume_filtered(front, ref_);
      fronts_.push_back(std::move(front));
    }
  }

  Eigen::VectorXd values(const Eigen::MatrixXd& X) const {
    const int m = static_cast<int>(gps_->size());
    const int nA = static_cast<int>(X_obs_.rows());
    const int P = static_cast<int>(X.rows());
    // Conditional mean per draw and conditional sd per objective.
    std::vector<Eigen::MatrixXd> M(m);
    std::vector<Eigen::VectorXd> sd(m);
    for (int k = 0; k < m; ++k) {
      auto [mu, var] = (*gps_)[k].posterior_marginals(X);
      if (nA > 0) {
        Eigen::MatrixXd cross = (*gps_)[k].posterior_cross_cov(X_obs_, X);
        Eigen::MatrixXd W =
            chol_[k].triangularView<Eigen::Lower>().solve(cross);
        sd[k] = (var - W.colwise().squaredNorm().transpose())
                    .cwiseMax(0.0)
                    .cwiseSqrt();
        M[k] = base_.middleCols(k * (nA + 1), nA) * W;
        M[k].rowwise() += mu.transpose();
      } else {
        sd[k] = var.cwiseMax(0.0).cwiseSqrt();
        M[k] = mu.transpose().replicate(S_, 1);
      }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd y(m);
    for (int p = 0; p < P; ++p) {
      double acc = 0.0;
      for (int s = 0; s < S_; ++s) {
        for (int k = 0; k < m; ++k) {
          y[k] = M[k](s, p) + sd[k][p] * base_(s, k * (nA + 1) + nA);
        }
        acc += hv_gain(s, y);
      }
      out[p] = acc / S_;
    }
    return out;
  }

  double value(const Point& x) const {
    Eigen::MatrixXd X(1, x.size());
    X.row(0) = x.transpose();
    return values(X)[0];
  }

 private:
  double hv_gain(int s, const Eigen::VectorXd& y) const {
    for (Eigen::Index k = 0; k < ref_.size(); ++k) {
      if (y[k] <= ref_[k]) return 0.0;
    }
    const Eigen::MatrixXd& front = fronts_[s];
    Eigen::MatrixXd joined(front.rows() + 1, ref_.size());
    joined.topRows(front.rows()) = front;
    joined.bottomRows(1) = y.transpose();
    const double hv = hypervolume_filtered(joined, ref_);
    return std::max(hv - hv_[s], 0.0);
  }

  const std::vector<GpModel>* gps_;
  Eigen::MatrixXd X_obs_;
  Eigen::VectorXd ref_;
  int S_;
  Eigen::MatrixXd base_;
  std::vector<Eigen::VectorXd> mu_;
  std::vector<Eigen::MatrixXd> chol_;
  std::vector<Eigen::MatrixXd> fronts_;
  std::vector<double> hv_;
};

/// Pointwise entry matching the operation signature.
inline double nehvi_mc(const std::vector<GpModel>& gps,
                       const Eigen::MatrixXd& X_obs, const Eigen::VectorXd& ref,
                       const Point& x, int mc_samples) {
  return NehviEvaluator(gps, X_obs, ref, mc_samples).value(x);
}

}  // namespace bolt
