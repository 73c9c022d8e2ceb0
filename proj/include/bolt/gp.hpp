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
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bolt/rng.hpp"
#include "bolt/spaces.hpp"

namespace bolt {

/// Affine map from raw coordinates onto the unit cube the GP operates in.
struct InputTransform {
  Eigen::VectorXd lo, hi;

  static InputTransform from_space(const SearchSpace& space) {
    return {space.lower_bounds(), space.upper_bounds()};
  }

  static InputTransform from_data(const Eigen::MatrixXd& X) {
    InputTransform t;
    t.lo = X.colwise().minCoeff().transpose();
    t.hi = X.colwise().maxCoeff().transpose();
    return t;
  }

  Eigen::VectorXd span() const { return (hi - lo).cwiseMax(1e-12); }

  Eigen::VectorXd apply(const Point& x) const {
    return (x - lo).cwiseQuotient(span());
  }

  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const {
    const Eigen::VectorXd s = span();
    return ((X.rowwise() - lo.transpose()).array().rowwise() /
            s.transpose().array())
        .matrix();
  }
};

/// Composite kernel for mixed spaces: RBF with per-dimension (or shared)
/// lengthscales on ordinal dimensions, a Hamming kernel
/// exp(-w * #mismatches) on categorical dimensions, combined as the mean of
/// sum and product so the diagonal stays at the signal variance. The
/// lengthscale prior is log-normal with median sqrt(d) on unit-scaled inputs.
struct KernelSpec {
  std::vector<int> rbf_dims;
  std::vector<int> cat_dims;
  bool ard = true;

  static KernelSpec for_space(const SearchSpace& space) {
    KernelSpec k;
    for (int i = 0; i < space.dim(); ++i) {
      if (space.param(i).kind == ParamKind::kCategorical) {
        k.cat_dims.push_back(i);
      } else {
        k.rbf_dims.push_back(i);
      }
    }
    return k;
  }

  static KernelSpec all_rbf(int dim, bool ard) {
    KernelSpec k;
    for (int i = 0; i < dim; ++i) k.rbf_dims.push_back(i);
    k.ard = ard;
    return k;
  }

  int n_lengthscales() const {
    if (rbf_dims.empty()) return 0;
    return ard ? static_cast<int>(rbf_dims.size()) : 1;
  }
};

enum class NoiseMode {
  kInferredHomoscedastic,
  kFixedHomoscedastic,
  kKnownHeteroscedastic,
};

struct NoiseSpec {
  NoiseMode mode = NoiseMode::kInferredHomoscedastic;
  double fixed_sigma = 1e-3;  // raw output units
  std::function<double(const Point&)> sigma_of;  // known-heteroscedastic

  static NoiseSpec inferred() { return {}; }
  static NoiseSpec fixed(double sigma) {
    return {NoiseMode::kFixedHomoscedastic, sigma, nullptr};
  }
  static NoiseSpec known(std::function<double(const Point&)> f) {
    return {NoiseMode::kKnownHeteroscedastic, 0.0, std::move(f)};
  }
};

struct GpHyperparams {
  Eigen::VectorXd log_ls;   // n_lengthscales entries
  double log_cat = 0.0;     // Hamming mismatch weight (log)
  double log_sf = 0.0;      // log signal std
  double log_sn = -4.6051701859880914;  // log noise std, log(1e-2)
  double mean = 0.0;        // constant mean, standardized units
};

namespace detail {

struct KernelParts {
  Eigen::MatrixXd rbf;   // correlation part, empty when no rbf dims
  Eigen::MatrixXd ham;   // empty when no categorical dims
  Eigen::MatrixXd mismatches;
};

/// Base correlation (signal variance excluded).
inline Eigen::MatrixXd base_corr(const KernelSpec& ks, const GpHyperparams& hp,
                                 const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& B,
                                 KernelParts* parts = nullptr) {
  const Eigen::Index na = A.rows(), nb = B.rows();
  Eigen::MatrixXd R, H;
  if (!ks.rbf_dims.empty()) {
    Eigen::MatrixXd As(na, ks.rbf_dims.size()), Bs(nb, ks.rbf_dims.size());
    for (std::size_t j = 0; j < ks.rbf_dims.size(); ++j) {
      const double ls = std::exp(ks.ard ? hp.log_ls[j] : hp.log_ls[0]);
      As.col(j) = A.col(ks.rbf_dims[j]) / ls;
      Bs.col(j) = B.col(ks.rbf_dims[j]) / ls;
    }
    Eigen::MatrixXd d2 = (-2.0 * As * Bs.transpose());
    d2.colwise() += As.rowwise().squaredNorm();
    d2.rowwise() += Bs.rowwise().squaredNorm().transpose();
    R = (-0.5 * d2.cwiseMax(0.0)).array().exp().matrix();
  }
  if (!ks.cat_dims.empty()) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(na, nb);
    for (int dim : ks.cat_dims) {
      for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
          if (A(i, dim) != B(j, dim)) M(i, j) += 1.0;
        }
      }
    }
    H = (-std::exp(hp.log_cat) * M).array().exp().matrix();
    if (parts) parts->mismatches = std::move(M);
  }
  Eigen::MatrixXd out;
  if (R.size() && H.size()) {
    out = (R + H + R.cwiseProduct(H)) / 3.0;
  } else if (R.size()) {
    out = R;
  } else if (H.size()) {
    out = H;
  } else {
    throw std::invalid_argument("kernel: no input dimensions");
  }
  if (parts) {
    parts->rbf = std::move(R);
    parts->ham = std::move(H);
  }
  return out;
}

}  // namespace detail

/// Exact Gaussian-process model. Targets are standardized internally; every
/// public quantity is reported in raw output units. Immutable after
/// construction; fantasy conditioning returns a new model.
class GpModel {
 public:
  GpModel() = default;

  /// Build with explicit hyperparameters (no optimization). `noise_var_raw`
  /// holds per-point observation-noise variances in raw units.
  static GpModel with_hyperparams(Eigen::MatrixXd X, Eigen::VectorXd y_raw,
                                  KernelSpec ks, GpHyperparams hp,
                                  Eigen::VectorXd noise_var_raw,
                                  bool standardize = true) {
    GpModel m;
    m.X_ = std::move(X);
    m.y_raw_ = std::move(y_raw);
    m.ks_ = std::move(ks);
    m.hp_ = std::move(hp);
    const int n = static_cast<int>(m.y_raw_.size());
    if (m.X_.rows() != n) throw std::invalid_argument("gp: X/y mismatch");
    if (noise_var_raw.size() != n) {
      throw std::invalid_argument("gp: noise vector length mismatch");
    }
    if (standardize && n >= 2) {
      m.y_mu_ = m.y_raw_.mean();
      const double sd = std::sqrt((m.y_raw_.array() - m.y_mu_).square().mean());
      m.y_sigma_ = sd > 1e-12 ? sd : 1.0;
    } else if (standardize && n == 1) {
      m.y_mu_ = 0.0;
      m.y_sigma_ = std::max(std::abs(m.y_raw_[0]), 1.0);
    }
    m.noise_var_std_ = noise_var_raw / (m.y_sigma_ * m.y_sigma_);
    m.factorize();
    return m;
  }

  /// Prior-only model (no data).
  static GpModel prior(KernelSpec ks, GpHyperparams hp, int dim) {
    GpModel m;
    m.X_.resize(0, dim);
    m.y_raw_.resize(0);
    m.noise_var_std_.resize(0);
    m.ks_ = std::move(ks);
    m.hp_ = std::move(hp);
    return m;
  }

  int n_train() const { return static_cast<int>(X_.rows()); }
  const Eigen::MatrixXd& train_inputs() const { return X_; }
  const Eigen::VectorXd& train_targets() const { return y_raw_; }
  const KernelSpec& kernel_spec() const { return ks_; }
  const GpHyperparams& hyperparams() const { return hp_; }
  double y_mean_shift() const { return y_mu_; }
  double y_scale() const { return y_sigma_; }

  double signal_variance_raw() const {
    return std::exp(2.0 * hp_.log_sf) * y_sigma_ * y_sigma_;
  }

  /// Observation-noise variance in raw units (mean over train points for
  /// per-point noise models).
  double noise_variance_raw() const {
    if (noise_var_std_.size() == 0) {
      return std::exp(2.0 * hp_.log_sn) * y_sigma_ * y_sigma_;
    }
    return noise_var_std_.mean() * y_sigma_ * y_sigma_;
  }

  std::pair<Eigen::VectorXd, Eigen::MatrixXd> posterior(
      const Eigen::MatrixXd& Xq) const {
    check_query(Xq);
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd Kqq = sf2 * detail::base_corr(ks_, hp_, Xq, Xq);
    if (n_train() == 0) {
      Eigen::VectorXd mean = Eigen::VectorXd::Constant(
          Xq.rows(), y_mu_ + y_sigma_ * hp_.mean);
      return {mean, Kqq * y_sigma_ * y_sigma_};
    }
    Eigen::MatrixXd Kxq = sf2 * detail::base_corr(ks_, hp_, X_, Xq);
    Eigen::VectorXd mean_std =
        Eigen::VectorXd::Constant(Xq.rows(), hp_.mean) +
        Kxq.transpose() * alpha_;
    Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Kxq);
    Eigen::MatrixXd cov = Kqq - V.transpose() * V;
    cov = 0.5 * (cov + cov.transpose());
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      cov(i, i) = std::max(cov(i, i), 0.0);
    }
    return {(y_mu_ + y_sigma_ * mean_std.array()).matrix(),
            cov * y_sigma_ * y_sigma_};
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_marginals(
      const Eigen::MatrixXd& Xq) const {
    check_query(Xq);
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    const Eigen::Index q = Xq.rows();
    if (n_train() == 0) {
      return {Eigen::VectorXd::Constant(q, y_mu_ + y_sigma_ * hp_.mean),
              Eigen::VectorXd::Constant(q, sf2 * y_sigma_ * y_sigma_)};
    }
    Eigen::MatrixXd Kxq = sf2 * detail::base_corr(ks_, hp_, X_, Xq);
    Eigen::VectorXd mean_std =
        Eigen::VectorXd::Constant(q, hp_.mean) + Kxq.transpose() * alpha_;
    Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Kxq);
    Eigen::VectorXd var =
        (Eigen::VectorXd::Constant(q, sf2) -
         V.colwise().squaredNorm().transpose())
            .cwiseMax(0.0);
    return {(y_mu_ + y_sigma_ * mean_std.array()).matrix(),
            var * y_sigma_ * y_sigma_};
  }

  /// Posterior covariance between f at the query rows and f at the training
  /// rows (raw units): Cov(f(Xq), f(X)) = Kqx - Kqx' (K+noise)^-1 Ksig.
  Eigen::MatrixXd cross_cov_train(const Eigen::MatrixXd& Xq) const {
    check_query(Xq);
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd Kxq = sf2 * detail::base_corr(ks_, hp_, X_, Xq);  // n x q
    Eigen::MatrixXd Ksig = sf2 * detail::base_corr(ks_, hp_, X_, X_);
    Eigen::MatrixXd W = solve_noise(Kxq);
    return (Kxq - Ksig * W) * (y_sigma_ * y_sigma_);
  }

  /// Posterior covariance between f at two query sets (raw units):
  /// Cov(f(Xa), f(Xb) | D) = Kab - Kax (K+noise)^-1 Kxb.
  Eigen::MatrixXd posterior_cross_cov(const Eigen::MatrixXd& Xa,
                                      const Eigen::MatrixXd& Xb) const {
    check_query(Xa);
    check_query(Xb);
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd Kab = sf2 * detail::base_corr(ks_, hp_, Xa, Xb);
    if (n_train() == 0) return Kab * (y_sigma_ * y_sigma_);
    Eigen::MatrixXd Kxa = sf2 * detail::base_corr(ks_, hp_, X_, Xa);
    Eigen::MatrixXd Kxb = sf2 * detail::base_corr(ks_, hp_, X_, Xb);
    Eigen::MatrixXd Va = L_.triangularView<Eigen::Lower>().solve(Kxa);
    Eigen::MatrixXd Vb = L_.triangularView<Eigen::Lower>().solve(Kxb);
    return (Kab - Va.transpose() * Vb) * (y_sigma_ * y_sigma_);
  }

  /// Posterior covariance of f at the training rows (raw units).
  Eigen::MatrixXd posterior_cov_train() const {
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd Ksig = sf2 * detail::base_corr(ks_, hp_, X_, X_);
    Eigen::MatrixXd W = solve_noise(Ksig);
    Eigen::MatrixXd cov = Ksig - Ksig * W;
    cov = 0.5 * (cov + cov.transpose());
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      cov(i, i) = std::max(cov(i, i), 0.0);
    }
    return cov * (y_sigma_ * y_sigma_);
  }

  Eigen::VectorXd posterior_mean_train() const {
    if (n_train() == 0) return Eigen::VectorXd();
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd Ksig = sf2 * detail::base_corr(ks_, hp_, X_, X_);
    Eigen::VectorXd mean_std =
        Eigen::VectorXd::Constant(n_train(), hp_.mean) + Ksig * alpha_;
    return (y_mu_ + y_sigma_ * mean_std.array()).matrix();
  }

  /// Joint posterior draws at the query rows; duplicates of identical rows
  /// are exact. Returns draws x |Xq|.
  Eigen::MatrixXd sample_joint(const Eigen::MatrixXd& Xq, int draws,
                               Rng& rng) const {
    Eigen::MatrixXd Z(draws, Xq.rows());
    for (int s = 0; s < draws; ++s) {
      for (Eigen::Index j = 0; j < Xq.rows(); ++j) Z(s, j) = rng.normal();
    }
    return sample_joint_with_base(Xq, Z);
  }

  Eigen::MatrixXd sample_joint_with_base(const Eigen::MatrixXd& Xq,
                                         const Eigen::MatrixXd& Z) const {
    // Deduplicate identical query rows so copies receive identical draws.
    std::vector<Eigen::Index> rep;
    std::vector<Eigen::Index> uniq;
    std::unordered_map<std::string, Eigen::Index> seen;
    for (Eigen::Index i = 0; i < Xq.rows(); ++i) {
      std::string key(reinterpret_cast<const char*>(Xq.row(i).eval().data()),
                      Xq.cols() * sizeof(double));
      auto [it, inserted] =
          seen.emplace(std::move(key), static_cast<Eigen::Index>(uniq.size()));
      if (inserted) uniq.push_back(i);
      rep.push_back(it->second);
    }
    Eigen::MatrixXd Xu(uniq.size(), Xq.cols());
    for (std::size_t u = 0; u < uniq.size(); ++u) Xu.row(u) = Xq.row(uniq[u]);
    auto [mean, cov] = posterior(Xu);
    Eigen::MatrixXd Lq = chol_with_jitter(cov);
    Eigen::MatrixXd draws_u =
        (Z.leftCols(uniq.size()) * Lq.transpose()).rowwise() + mean.transpose();
    Eigen::MatrixXd out(Z.rows(), Xq.rows());
    for (Eigen::Index i = 0; i < Xq.rows(); ++i) out.col(i) = draws_u.col(rep[i]);
    return out;
  }

  /// Condition on a noiseless fantasized observation with unchanged
  /// hyperparameters. Conditioning twice on an identical pair is a no-op.
  GpModel condition_on_fantasy(const Point& x, double y_f) const {
    for (int i = 0; i < n_train(); ++i) {
      if (X_.row(i) == x.transpose() && y_raw_[i] == y_f &&
          noise_var_std_[i] == 0.0) {
        return *this;
      }
    }
    GpModel m = *this;
    m.X_.conservativeResize(n_train() + 1, Eigen::NoChange);
    m.X_.row(n_train()) = x.transpose();
    m.y_raw_.conservativeResize(n_train() + 1);
    m.y_raw_[n_train()] = y_f;
    m.noise_var_std_.conservativeResize(n_train() + 1);
    m.noise_var_std_[n_train()] = 0.0;
    m.factorize();
    return m;
  }

  /// Log marginal likelihood of the standardized targets.
  double log_marginal_likelihood() const { return lml_; }

  /// K + noise in standardized units (debug/test access).
  Eigen::MatrixXd kernel_matrix_std() const {
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd K = sf2 * detail::base_corr(ks_, hp_, X_, X_);
    K += noise_std_with_jitter().asDiagonal();
    return K;
  }

  Eigen::VectorXd standardized_residual() const {
    return ((y_raw_.array() - y_mu_) / y_sigma_ - hp_.mean).matrix();
  }

  const Eigen::MatrixXd& chol() const { return L_; }
  double jitter() const { return jitter_; }

  /// Observation-noise variance at a query point, raw units.
  double noise_variance_at(const Point& x_raw_units) const {
    if (sigma_of_raw_) {
      const double s = sigma_of_raw_(x_raw_units);
      return s * s;
    }
    return noise_variance_raw();
  }

  void set_noise_callback(std::function<double(const Point&)> f) {
    sigma_of_raw_ = std::move(f);
  }

 private:
  friend GpModel fit_gp(const Eigen::MatrixXd&, const Eigen::VectorXd&,
                        const KernelSpec&, const NoiseSpec&, int, Rng&,
                        const std::vector<GpHyperparams>&);

  void check_query(const Eigen::MatrixXd& Xq) const {
    if (Xq.cols() != X_.cols()) {
      throw std::invalid_argument("gp: query dimension mismatch");
    }
  }

  Eigen::VectorXd noise_std_with_jitter() const {
    Eigen::VectorXd nv = noise_var_std_.size()
                             ? noise_var_std_
                             : Eigen::VectorXd::Zero(n_train());
    if (noise_var_std_.size() == 0) {
      nv.setConstant(std::exp(2.0 * hp_.log_sn));
    }
    return (nv.array() + jitter_).matrix();
  }

  Eigen::MatrixXd solve_noise(const Eigen::MatrixXd& B) const {
    return L_.triangularView<Eigen::Lower>()
        .transpose()
        .solve(L_.triangularView<Eigen::Lower>().solve(B));
  }

  static Eigen::MatrixXd chol_with_jitter(Eigen::MatrixXd cov) {
    const double scale = std::max(cov.diagonal().maxCoeff(), 1e-300);
    double jitter = 1e-12 * scale;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::MatrixXd K = cov;
      K.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(K);
      if (llt.info() == Eigen::Success) {
        return Eigen::MatrixXd(llt.matrixL());
      }
      jitter *= 100.0;
    }
    throw std::runtime_error("gp: covariance not positive definite");
  }

  /// Uses the noise-mode vector if present, else the inferred log_sn; jitter
  /// escalates 1e-6 -> 1e-2 on Cholesky failure.
  void factorize() {
    const int n = n_train();
    if (n == 0) return;
    const double sf2 = std::exp(2.0 * hp_.log_sf);
    Eigen::MatrixXd Ksig = sf2 * detail::base_corr(ks_, hp_, X_, X_);
    Eigen::VectorXd nv = noise_var_std_.size()
                             ? noise_var_std_
                             : Eigen::VectorXd::Constant(
                                   n, std::exp(2.0 * hp_.log_sn));
    jitter_ = 1e-6;
    for (;; jitter_ *= 10.0) {
      Eigen::MatrixXd K = Ksig;
      K += (nv.array() + jitter_).matrix().asDiagonal();
      Eigen::LLT<Eigen::MatrixXd> llt(K);
      if (llt.info() == Eigen::Success) {
        L_ = llt.matrixL();
        break;
      }
      if (jitter_ > 1e-2) {
        throw std::runtime_error("gp: kernel matrix not positive definite");
      }
    }
    const Eigen::VectorXd r = standardized_residual();
    alpha_ = solve_noise(r);
    lml_ = -0.5 * r.dot(alpha_) -
           L_.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * kPi);
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_raw_;
  Eigen::VectorXd noise_var_std_;  // empty => homoscedastic exp(2 log_sn)
  KernelSpec ks_;
  GpHyperparams hp_;
  double y_mu_ = 0.0;
  double y_sigma_ = 1.0;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
  double jitter_ = 0.0;
  std::function<double(const Point&)> sigma_of_raw_;
};

namespace detail {

/// Penalized (MAP) negative log marginal likelihood and gradient in the
/// packed parameter vector. Layout: [log_ls..., log_cat?, log_sf, log_sn?,
/// mean].
struct GpObjective {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y_std;  // standardized targets
  const KernelSpec& ks;
  bool infer_noise = true;
  Eigen::VectorXd fixed_noise_var;  // standardized, per point (if !infer)

  int n_ls() const { return ks.n_lengthscales(); }
  int n_params() const {
    return n_ls() + (ks.cat_dims.empty() ? 0 : 1) + 1 + (infer_noise ? 1 : 0) + 1;
  }

  GpHyperparams unpack(const Eigen::VectorXd& t) const {
    GpHyperparams hp;
    int o = 0;
    hp.log_ls = t.segment(o, n_ls());
    o += n_ls();
    if (!ks.cat_dims.empty()) hp.log_cat = t[o++];
    hp.log_sf = t[o++];
    if (infer_noise) hp.log_sn = t[o++];
    hp.mean = t[o++];
    return hp;
  }

  Eigen::VectorXd pack(const GpHyperparams& hp) const {
    Eigen::VectorXd t(n_params());
    int o = 0;
    t.segment(o, n_ls()) = hp.log_ls;
    o += n_ls();
    if (!ks.cat_dims.empty()) t[o++] = hp.log_cat;
    t[o++] = hp.log_sf;
    if (infer_noise) t[o++] = hp.log_sn;
    t[o++] = hp.mean;
    return t;
  }

  double ls_prior_mu() const {
    const int d = std::max<int>(1, static_cast<int>(ks.rbf_dims.size()));
    return 0.5 * std::log(double(d));  // median sqrt(d)
  }

  /// Returns negative penalized LML; fills grad. Non-finite on Cholesky
  /// failure at max jitter.
  double eval(const Eigen::VectorXd& t, Eigen::VectorXd& grad) const {
    const GpHyperparams hp = unpack(t);
    const int n = static_cast<int>(X.rows());
    const double sf2 = std::exp(2.0 * hp.log_sf);
    KernelParts parts;
    Eigen::MatrixXd C = base_corr(ks, hp, X, X, &parts);
    Eigen::MatrixXd Ksig = sf2 * C;
    Eigen::VectorXd nv =
        infer_noise
            ? Eigen::VectorXd::Constant(n, std::exp(2.0 * hp.log_sn))
            : fixed_noise_var;
    Eigen::MatrixXd K;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 1e-6;
    for (;; jitter *= 10.0) {
      K = Ksig;
      K += (nv.array() + jitter).matrix().asDiagonal();
      llt.compute(K);
      if (llt.info() == Eigen::Success) break;
      if (jitter > 1e-2) {
        grad = Eigen::VectorXd::Zero(n_params());
        return std::numeric_limits<double>::infinity();
      }
    }
    Eigen::MatrixXd L = llt.matrixL();
    Eigen::VectorXd r = y_std.array() - hp.mean;
    Eigen::VectorXd alpha = llt.solve(r);
    double lml = -0.5 * r.dot(alpha) - L.diagonal().array().log().sum() -
                 0.5 * n * std::log(2.0 * kPi);

    // A = alpha alpha' - K^-1; dLML/dtheta = 0.5 tr(A dK/dtheta).
    Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd A = alpha * alpha.transpose() - Kinv;

    grad = Eigen::VectorXd::Zero(n_params());
    int o = 0;
    // Weight matrices for the composite combination.
    Eigen::MatrixXd w_rbf, w_ham;
    const bool both = parts.rbf.size() && parts.ham.size();
    if (parts.rbf.size()) {
      if (both) {
        w_rbf = (Eigen::MatrixXd::Ones(n, n) + parts.ham) / 3.0;
      } else {
        w_rbf = Eigen::MatrixXd::Ones(n, n);
      }
    }
    if (parts.ham.size()) {
      if (both) {
        w_ham = (Eigen::MatrixXd::Ones(n, n) + parts.rbf) / 3.0;
      } else {
        w_ham = Eigen::MatrixXd::Ones(n, n);
      }
    }
    if (n_ls() > 0) {
      for (int j = 0; j < n_ls(); ++j) {
        // dR/dlog ls_j = R .* sum_over_covered_dims (d_ij^2 / ls^2)
        Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(n, n);
        const auto covered = ks.ard ? std::vector<int>{ks.rbf_dims[j]}
                                    : ks.rbf_dims;
        for (int dim : covered) {
          const double ls = std::exp(ks.ard ? hp.log_ls[j] : hp.log_ls[0]);
          Eigen::VectorXd col = X.col(dim) / ls;
          Eigen::MatrixXd diff = col.replicate(1, n) -
                                 col.transpose().replicate(n, 1);
          D2 += diff.cwiseProduct(diff);
        }
        Eigen::MatrixXd dK =
            sf2 * w_rbf.cwiseProduct(parts.rbf).cwiseProduct(D2);
        grad[o + j] = 0.5 * (A.cwiseProduct(dK)).sum();
      }
      o += n_ls();
    }
    if (!ks.cat_dims.empty()) {
      const double w = std::exp(hp.log_cat);
      Eigen::MatrixXd dK = sf2 * w_ham.cwiseProduct(parts.ham)
                               .cwiseProduct(-w * parts.mismatches);
      grad[o++] = 0.5 * (A.cwiseProduct(dK)).sum();
    }
    grad[o++] = 0.5 * (A.cwiseProduct(2.0 * Ksig)).sum();  // log_sf
    if (infer_noise) {
      const double sn2 = std::exp(2.0 * hp.log_sn);
      grad[o++] = 0.5 * A.diagonal().sum() * 2.0 * sn2;
    }
    grad[o++] = alpha.sum();  // mean

    // Log-normal priors (negated below together with lml).
    double logprior = 0.0;
    Eigen::VectorXd gprior = Eigen::VectorXd::Zero(n_params());
    int q = 0;
    const double mu_ls = ls_prior_mu();
    for (int j = 0; j < n_ls(); ++j, ++q) {
      logprior += -0.5 * (t[q] - mu_ls) * (t[q] - mu_ls);
      gprior[q] = -(t[q] - mu_ls);
    }
    if (!ks.cat_dims.empty()) {
      logprior += -0.5 * t[q] * t[q];
      gprior[q] = -t[q];
      ++q;
    }
    logprior += -0.5 * t[q] * t[q];  // log_sf ~ N(0,1)
    gprior[q] = -t[q];
    ++q;
    if (infer_noise) {
      const double mu_n = std::log(1e-2), s_n = 3.0;
      logprior += -0.5 * (t[q] - mu_n) * (t[q] - mu_n) / (s_n * s_n);
      gprior[q] = -(t[q] - mu_n) / (s_n * s_n);
      ++q;
    }
    grad = -(grad + gprior);
    return -(lml + logprior);
  }
};

/// Limited-memory BFGS with Armijo backtracking; minimizes fn.
template <typename F>
Eigen::VectorXd lbfgs_minimize(F&& fn, Eigen::VectorXd x, int max_iter,
                               const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
  const int m = 8;
  std::vector<Eigen::VectorXd> S, Y;
  Eigen::VectorXd g(x.size());
  double f = fn(x, g);
  Eigen::VectorXd best_x = x;
  double best_f = f;
  for (int it = 0; it < max_iter; ++it) {
    if (!std::isfinite(f)) break;
    if (g.lpNorm<Eigen::Infinity>() < 1e-6) break;
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> rho(S.size()), a(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      rho[i] = 1.0 / Y[i].dot(S[i]);
      a[i] = rho[i] * S[i].dot(q);
      q -= a[i] * Y[i];
    }
    if (!S.empty()) {
      const double gamma =
          S.back().dot(Y.back()) / std::max(Y.back().squaredNorm(), 1e-300);
      q *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double b = rho[i] * Y[i].dot(q);
      q += (a[i] - b) * S[i];
    }
    Eigen::VectorXd d = -q;
    if (d.dot(g) > -1e-12 * d.norm() * g.norm()) d = -g;

    double t = it == 0 ? std::min(1.0, 1.0 / std::max(g.norm(), 1e-12)) : 1.0;
    const double slope = g.dot(d);
    Eigen::VectorXd x_new, g_new(x.size());
    double f_new = std::numeric_limits<double>::infinity();
    bool ok = false;
    for (int ls = 0; ls < 30; ++ls) {
      x_new = (x + t * d).cwiseMax(lo).cwiseMin(hi);
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) break;
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    if (s.dot(yv) > 1e-10) {
      S.push_back(s);
      Y.push_back(yv);
      if (static_cast<int>(S.size()) > m) {
        S.erase(S.begin());
        Y.erase(Y.begin());
      }
    }
    x = x_new;
    f = f_new;
    g = g_new;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace detail

/// Fit hyperparameters by MAP (log marginal likelihood plus log prior) with
/// multi-start L-BFGS on log parameters; the best of `restarts` starts is
/// kept. Optional warm starts are tried first.
inline GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const KernelSpec& ks, const NoiseSpec& nspec,
                      int restarts, Rng& rng,
                      const std::vector<GpHyperparams>& warm_starts = {}) {
  const int n = static_cast<int>(X.rows());
  if (n < 1 || y.size() != n) throw std::invalid_argument("fit_gp: bad data");
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("fit_gp: non-finite data");
  }
  restarts = std::max(restarts, 1);

  double y_mu = 0.0, y_sigma = 1.0;
  if (n >= 2) {
    y_mu = y.mean();
    const double sd = std::sqrt((y.array() - y_mu).square().mean());
    y_sigma = sd > 1e-12 ? sd : 1.0;
  } else {
    y_sigma = std::max(std::abs(y[0]), 1.0);
  }
  Eigen::VectorXd y_std = (y.array() - y_mu) / y_sigma;

  detail::GpObjective obj{X, y_std, ks};
  Eigen::VectorXd noise_var_raw(n);
  switch (nspec.mode) {
    case NoiseMode::kInferredHomoscedastic:
      obj.infer_noise = true;
      break;
    case NoiseMode::kFixedHomoscedastic:
      obj.infer_noise = false;
      noise_var_raw.setConstant(nspec.fixed_sigma * nspec.fixed_sigma);
      obj.fixed_noise_var = noise_var_raw / (y_sigma * y_sigma);
      break;
    case NoiseMode::kKnownHeteroscedastic: {
      obj.infer_noise = false;
      for (int i = 0; i < n; ++i) {
        const double s = nspec.sigma_of(X.row(i).transpose());
        noise_var_raw[i] = s * s;
      }
      obj.fixed_noise_var = noise_var_raw / (y_sigma * y_sigma);
      break;
    }
  }

  const int np = obj.n_params();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(np, std::log(1e-3));
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(np, std::log(1e3));
  lo[np - 1] = -10.0;  // mean
  hi[np - 1] = 10.0;
  if (obj.infer_noise) {
    lo[np - 2] = std::log(1e-6);
    hi[np - 2] = std::log(10.0);
  }

  auto fn = [&](const Eigen::VectorXd& t, Eigen::VectorXd& grad) {
    return obj.eval(t, grad);
  };

  std::vector<Eigen::VectorXd> starts;
  for (const auto& w : warm_starts) starts.push_back(obj.pack(w));
  {
    GpHyperparams hp0;
    hp0.log_ls = Eigen::VectorXd::Constant(obj.n_ls(), obj.ls_prior_mu());
    starts.push_back(obj.pack(hp0));
  }
  while (static_cast<int>(starts.size()) < restarts + (warm_starts.empty() ? 0 : 1)) {
    GpHyperparams hp;
    hp.log_ls.resize(obj.n_ls());
    for (int j = 0; j < obj.n_ls(); ++j) {
      hp.log_ls[j] = obj.ls_prior_mu() + rng.normal();
    }
    hp.log_cat = rng.normal();
    hp.log_sf = 0.5 * rng.normal();
    hp.log_sn = std::log(1e-2) + rng.normal();
    hp.mean = 0.25 * rng.normal();
    starts.push_back(obj.pack(hp));
  }

  Eigen::VectorXd best_t;
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd gtmp(np);
  for (auto& t0 : starts) {
    Eigen::VectorXd t0c = t0.cwiseMax(lo).cwiseMin(hi);
    Eigen::VectorXd t = detail::lbfgs_minimize(fn, t0c, 60, lo, hi);
    const double f = obj.eval(t, gtmp);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  if (!std::isfinite(best_f)) {
    throw std::runtime_error("fit_gp: kernel matrix not positive definite");
  }

  GpHyperparams hp = obj.unpack(best_t);
  Eigen::VectorXd nv_raw;
  if (obj.infer_noise) {
    nv_raw = Eigen::VectorXd::Constant(
        n, std::exp(2.0 * hp.log_sn) * y_sigma * y_sigma);
  } else {
    nv_raw = noise_var_raw;
  }
  GpModel m = GpModel::with_hyperparams(X, y, ks, hp, nv_raw);
  if (nspec.mode == NoiseMode::kKnownHeteroscedastic) {
    m.set_noise_callback(nspec.sigma_of);
  }
  return m;
}

/// Exact joint posterior draws (convenience free function).
inline Eigen::MatrixXd sample_posterior(const GpModel& gp,
                                        const Eigen::MatrixXd& Xq, int draws,
                                        Rng& rng) {
  return gp.sample_joint(Xq, draws, rng);
}

}  // namespace bolt
