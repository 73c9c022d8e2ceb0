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
#include <string>
#include <vector>

#include "bolt/emulator.hpp"
#include "bolt/rng.hpp"
#include "bolt/stats.hpp"

namespace bolt {

struct FitConfig {
  int hidden_width = 64;
  double dropout_rate = 0.1;
  int epochs = 200;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  int batch_size = 128;
};

struct FitReport {
  Eigen::VectorXd rho_train;  // per output; NaN where degenerate
  Eigen::VectorXd rho_test;
  int n_train = 0;
  int n_test = 0;
  std::vector<double> loss_curve;  // train MSE per epoch
  std::vector<bool> degenerate_targets;
  std::string optimizer = "adam, cosine learning-rate decay";
};

namespace detail {

struct AdamState {
  Eigen::MatrixXd m, v;
  void init(Eigen::Index rows, Eigen::Index cols) {
    m = Eigen::MatrixXd::Zero(rows, cols);
    v = Eigen::MatrixXd::Zero(rows, cols);
  }
  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, double lr,
            long t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, double(t));
    const double c2 = 1.0 - std::pow(b2, double(t));
    param -= (lr / c1) * m.cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());
  }
};

struct NormStats {
  Eigen::VectorXd mean, var;  // per-unit running statistics
  void init(Eigen::Index n) {
    mean = Eigen::VectorXd::Zero(n);
    var = Eigen::VectorXd::Ones(n);
  }
  void update(const Eigen::MatrixXd& a, double momentum) {
    const Eigen::VectorXd bm = a.colwise().mean().transpose();
    const Eigen::VectorXd bv =
        ((a.rowwise() - bm.transpose()).array().square().colwise().mean())
            .matrix()
            .transpose();
    mean = momentum * mean + (1.0 - momentum) * bm;
    var = momentum * var + (1.0 - momentum) * bv;
  }
};

}  // namespace detail

/// Train a 2-hidden-layer relu MLP on (X, Y) with dropout and layer
/// normalization active during training. The last tenth of the epochs swaps
/// per-sample layer norm for a fixed per-unit affine (running statistics), so
/// the exported inference graph is exactly two affine+relu stages plus a
/// linear head with the normalization folded into the weights.
inline std::pair<MlpEmulator, FitReport> fit_emulator(
    const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
    const FitConfig& cfg = {},
    std::vector<std::string> output_names = {}) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int k = static_cast<int>(Y.cols());
  if (n < 50) throw std::invalid_argument("fit_emulator: need n >= 50");
  if (Y.rows() != n) throw std::invalid_argument("fit_emulator: X/Y mismatch");
  if (!X.allFinite() || !Y.allFinite()) {
    throw std::invalid_argument("fit_emulator: non-finite inputs");
  }
  if (output_names.empty()) {
    for (int j = 0; j < k; ++j) output_names.push_back("y" + std::to_string(j));
  }

  Rng rng(cfg.seed);

  // Split.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
  }
  int n_test = static_cast<int>(std::lround(cfg.test_fraction * n));
  n_test = std::clamp(n_test, cfg.test_fraction > 0.0 ? 1 : 0, n - 2);
  const int n_train = n - n_test;
  Eigen::MatrixXd Xtr(n_train, p), Ytr(n_train, k), Xte(n_test, p), Yte(n_test, k);
  for (int i = 0; i < n_train; ++i) {
    Xtr.row(i) = X.row(idx[i]);
    Ytr.row(i) = Y.row(idx[i]);
  }
  for (int i = 0; i < n_test; ++i) {
    Xte.row(i) = X.row(idx[n_train + i]);
    Yte.row(i) = Y.row(idx[n_train + i]);
  }

  // Input normalization (train min/max) and target standardization.
  Eigen::VectorXd shift = Xtr.colwise().minCoeff().transpose();
  Eigen::VectorXd scale = (Xtr.colwise().maxCoeff().transpose() - shift)
                              .cwiseMax(1e-12);
  Eigen::MatrixXd Z = (Xtr.rowwise() - shift.transpose()).array().rowwise() /
                      scale.transpose().array();
  Eigen::VectorXd y_mean = Ytr.colwise().mean().transpose();
  Eigen::VectorXd y_std(k);
  std::vector<bool> degenerate(k, false);
  for (int j = 0; j < k; ++j) {
    const double sd = std::sqrt(
        (Ytr.col(j).array() - y_mean[j]).square().mean());
    degenerate[j] = sd < 1e-12;
    y_std[j] = degenerate[j] ? 1.0 : sd;
  }
  Eigen::MatrixXd Ystd = (Ytr.rowwise() - y_mean.transpose()).array().rowwise() /
                         y_std.transpose().array();

  const int h = cfg.hidden_width;
  auto he_init = [&](Eigen::MatrixXd& w, int fan_in) {
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) {
        w(r, c) = rng.normal() * std::sqrt(2.0 / fan_in);
      }
    }
  };
  Eigen::MatrixXd W1(h, p), W2(h, h), W3(k, h);
  he_init(W1, p);
  he_init(W2, h);
  he_init(W3, h);
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(h), b2 = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd b3 = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd g1 = Eigen::VectorXd::Ones(h), g2 = Eigen::VectorXd::Ones(h);
  Eigen::VectorXd beta1 = Eigen::VectorXd::Zero(h), beta2 = Eigen::VectorXd::Zero(h);

  detail::AdamState aW1, aW2, aW3, ab1, ab2, ab3, ag1, ag2, abeta1, abeta2;
  aW1.init(h, p); aW2.init(h, h); aW3.init(k, h);
  ab1.init(h, 1); ab2.init(h, 1); ab3.init(k, 1);
  ag1.init(h, 1); ag2.init(h, 1); abeta1.init(h, 1); abeta2.init(h, 1);

  detail::NormStats stats1, stats2;
  stats1.init(h);
  stats2.init(h);

  const double keep = 1.0 - cfg.dropout_rate;
  constexpr double kEps = 1e-5;
  const int batch = std::min(cfg.batch_size, n_train);
  const int steps_per_epoch = (n_train + batch - 1) / batch;
  const long total_steps = static_cast<long>(steps_per_epoch) * cfg.epochs;

  FitReport report;
  report.n_train = n_train;
  report.n_test = n_test;
  report.degenerate_targets = degenerate;

  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n_train - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    double epoch_loss = 0.0;
    long seen = 0;
    for (int start = 0; start < n_train; start += batch) {
      const int bsz = std::min(batch, n_train - start);
      Eigen::MatrixXd Zb(bsz, p), Yb(bsz, k);
      for (int i = 0; i < bsz; ++i) {
        Zb.row(i) = Z.row(order[start + i]);
        Yb.row(i) = Ystd.row(order[start + i]);
      }

      auto norm_forward = [&](const Eigen::MatrixXd& A, detail::NormStats& st,
                              const Eigen::VectorXd& g, const Eigen::VectorXd& beta,
                              Eigen::MatrixXd& N) -> Eigen::MatrixXd {
        st.update(A, 0.95);
        const Eigen::VectorXd mu = A.rowwise().mean();
        Eigen::MatrixXd centered = A.colwise() - mu;
        const Eigen::VectorXd sd =
            (centered.array().square().rowwise().mean() + kEps).sqrt();
        N = (centered.array().colwise() / sd.array()).matrix();
        return ((N.array().rowwise() * g.transpose().array()).rowwise() +
                beta.transpose().array())
            .matrix();
      };

      Eigen::MatrixXd A1 = (Zb * W1.transpose()).rowwise() + b1.transpose();
      Eigen::MatrixXd N1;
      Eigen::MatrixXd H1 = norm_forward(A1, stats1, g1, beta1, N1);
      Eigen::MatrixXd R1 = H1.cwiseMax(0.0);
      Eigen::MatrixXd M1 = Eigen::MatrixXd::Ones(bsz, h);
      if (cfg.dropout_rate > 0.0) {
        for (int r = 0; r < bsz; ++r) {
          for (int c = 0; c < h; ++c) {
            M1(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
          }
        }
      }
      Eigen::MatrixXd D1 = R1.cwiseProduct(M1);

      Eigen::MatrixXd A2 = (D1 * W2.transpose()).rowwise() + b2.transpose();
      Eigen::MatrixXd N2;
      Eigen::MatrixXd H2 = norm_forward(A2, stats2, g2, beta2, N2);
      Eigen::MatrixXd R2 = H2.cwiseMax(0.0);
      Eigen::MatrixXd M2 = Eigen::MatrixXd::Ones(bsz, h);
      if (cfg.dropout_rate > 0.0) {
        for (int r = 0; r < bsz; ++r) {
          for (int c = 0; c < h; ++c) {
            M2(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
          }
        }
      }
      Eigen::MatrixXd D2 = R2.cwiseProduct(M2);

      Eigen::MatrixXd Out = (D2 * W3.transpose()).rowwise() + b3.transpose();
      Eigen::MatrixXd Err = Out - Yb;
      epoch_loss += Err.squaredNorm();
      seen += static_cast<long>(bsz) * k;

      // Backward.
      Eigen::MatrixXd Gout = (2.0 / (bsz * k)) * Err;
      Eigen::MatrixXd dW3 = Gout.transpose() * D2;
      Eigen::VectorXd db3 = Gout.colwise().sum().transpose();
      Eigen::MatrixXd GD2 = Gout * W3;
      Eigen::MatrixXd GH2 =
          GD2.cwiseProduct(M2).cwiseProduct((H2.array() > 0.0).cast<double>().matrix());

      auto norm_backward = [&](const Eigen::MatrixXd& GH, const Eigen::MatrixXd& N,
                               const Eigen::MatrixXd& A,
                               const Eigen::VectorXd& g, Eigen::VectorXd& dg,
                               Eigen::VectorXd& dbeta) -> Eigen::MatrixXd {
        dg = GH.cwiseProduct(N).colwise().sum().transpose();
        dbeta = GH.colwise().sum().transpose();
        Eigen::MatrixXd dN =
            (GH.array().rowwise() * g.transpose().array()).matrix();
        const Eigen::VectorXd mu = A.rowwise().mean();
        Eigen::MatrixXd centered = A.colwise() - mu;
        const Eigen::VectorXd sd =
            (centered.array().square().rowwise().mean() + kEps).sqrt();
        const Eigen::VectorXd dn_mean = dN.rowwise().mean();
        const Eigen::VectorXd dn_n_mean = dN.cwiseProduct(N).rowwise().mean();
        Eigen::MatrixXd dA =
            ((dN.colwise() - dn_mean) - (N.array().colwise() * dn_n_mean.array()).matrix());
        return (dA.array().colwise() / sd.array()).matrix().eval();
      };

      Eigen::VectorXd dg2, dbeta2v;
      Eigen::MatrixXd GA2 = norm_backward(GH2, N2, A2, g2, dg2, dbeta2v);
      Eigen::MatrixXd dW2 = GA2.transpose() * D1;
      Eigen::VectorXd db2 = GA2.colwise().sum().transpose();
      Eigen::MatrixXd GD1 = GA2 * W2;
      Eigen::MatrixXd GH1 =
          GD1.cwiseProduct(M1).cwiseProduct((H1.array() > 0.0).cast<double>().matrix());
      Eigen::VectorXd dg1, dbeta1v;
      Eigen::MatrixXd GA1 = norm_backward(GH1, N1, A1, g1, dg1, dbeta1v);
      Eigen::MatrixXd dW1 = GA1.transpose() * Zb;
      Eigen::VectorXd db1 = GA1.colwise().sum().transpose();

      ++step;
      const double lr =
          cfg.learning_rate * 0.5 * (1.0 + std::cos(kPi * double(step) / total_steps));
      aW1.step(W1, dW1, lr, step);
      aW2.step(W2, dW2, lr, step);
      aW3.step(W3, dW3, lr, step);
      Eigen::MatrixXd tmp;
      tmp = b1; ab1.step(tmp, db1, lr, step); b1 = tmp;
      tmp = b2; ab2.step(tmp, db2, lr, step); b2 = tmp;
      tmp = b3; ab3.step(tmp, db3, lr, step); b3 = tmp;
      tmp = g1; ag1.step(tmp, dg1, lr, step); g1 = tmp;
      tmp = g2; ag2.step(tmp, dg2, lr, step); g2 = tmp;
      tmp = beta1; abeta1.step(tmp, dbeta1v, lr, step); beta1 = tmp;
      tmp = beta2; abeta2.step(tmp, dbeta2v, lr, step); beta2 = tmp;
    }
    report.loss_curve.push_back(epoch_loss / seen);
  }

  // Fold the frozen per-unit normalization and the target standardization
  // into plain affine layers.
  auto fold = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                  const detail::NormStats& st, const Eigen::VectorXd& g,
                  const Eigen::VectorXd& beta) {
    const Eigen::VectorXd s = g.array() / (st.var.array() + kEps).sqrt();
    MlpLayer layer;
    layer.w = s.asDiagonal() * W;
    layer.b = s.cwiseProduct(b - st.mean) + beta;
    layer.act = Activation::kRelu;
    return layer;
  };
  std::vector<MlpLayer> layers;
  layers.push_back(fold(W1, b1, stats1, g1, beta1));
  layers.push_back(fold(W2, b2, stats2, g2, beta2));

  // The folded per-unit normalization shifts the hidden activations relative
  // to the per-sample layer norm seen during training, so the linear head is
  // re-solved exactly (ridge least squares) on the folded features.
  Eigen::MatrixXd F1 =
      (((Z * layers[0].w.transpose()).rowwise() + layers[0].b.transpose()))
          .cwiseMax(0.0);
  Eigen::MatrixXd F2 =
      (((F1 * layers[1].w.transpose()).rowwise() + layers[1].b.transpose()))
          .cwiseMax(0.0);
  Eigen::MatrixXd G(n_train, h + 1);
  G.leftCols(h) = F2;
  G.col(h).setOnes();
  Eigen::MatrixXd gram = G.transpose() * G;
  gram.diagonal().array() += 1e-8 * n_train;
  Eigen::MatrixXd theta = gram.ldlt().solve(G.transpose() * Ystd);  // (h+1) x k
  MlpLayer head;
  head.w = y_std.asDiagonal() * theta.topRows(h).transpose();
  head.b = y_std.cwiseProduct(theta.row(h).transpose()) + y_mean;
  head.act = Activation::kIdentity;
  layers.push_back(std::move(head));

  MlpEmulator em(shift, scale, std::move(layers), std::move(output_names));

  auto rho_of = [&](const Eigen::MatrixXd& Xs, const Eigen::MatrixXd& Ys) {
    Eigen::VectorXd rho(k);
    if (Xs.rows() < 2) {
      rho.setConstant(std::numeric_limits<double>::quiet_NaN());
      return rho;
    }
    Eigen::MatrixXd P = em.predict_batch(Xs);
    for (int j = 0; j < k; ++j) {
      auto r = spearman_rho(P.col(j), Ys.col(j));
      rho[j] = r ? *r : std::numeric_limits<double>::quiet_NaN();
      if (!r) report.degenerate_targets[j] = true;
    }
    return rho;
  };
  report.rho_train = rho_of(Xtr, Ytr);
  report.rho_test = rho_of(Xte, Yte);
  return {std::move(em), std::move(report)};
}

enum class AdaptiveStrategy { kGradientMagnitude, kPredictedObjective };

/// Rank a candidate pool by finite-difference gradient magnitude of the
/// emulator (Frobenius norm of the Jacobian, step 1e-4 on normalized
/// coordinates) or by mean predicted objective; returns the top n in stable
/// order.
inline std::vector<Point> adaptive_sample(const MlpEmulator& em,
                                          AdaptiveStrategy strategy,
                                          const std::vector<Point>& pool,
                                          int n) {
  if (pool.empty()) throw std::invalid_argument("adaptive_sample: empty pool");
  const int p = em.input_dim();
  std::vector<double> score(pool.size(), 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (strategy == AdaptiveStrategy::kPredictedObjective) {
      score[i] = em.predict(pool[i]).mean();
    } else {
      double sq = 0.0;
      for (int j = 0; j < p; ++j) {
        const double hstep = 1e-4 * em.scale()[j];
        Point hi = pool[i], lo = pool[i];
        hi[j] += hstep;
        lo[j] -= hstep;
        const Eigen::VectorXd grad =
            (em.predict(hi) - em.predict(lo)) / 2e-4;
        sq += grad.squaredNorm();
      }
      score[i] = std::sqrt(sq);
    }
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  const std::size_t take = std::min<std::size_t>(n, pool.size());
  std::vector<Point> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(pool[order[i]]);
  return out;
}

}  // namespace bolt
