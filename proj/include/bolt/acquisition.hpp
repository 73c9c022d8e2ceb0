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

#include <functional>
#include <optional>
#include <string>

#include "bolt/gp.hpp"
#include "bolt/sobol.hpp"

namespace bolt {

enum class AcqKind { kTs, kLogEi, kLogNei, kUcb, kMes, kGibbon };

inline std::string to_string(AcqKind k) {
  switch (k) {
    case AcqKind::kTs: return "ts";
    case AcqKind::kLogEi: return "log_ei";
    case AcqKind::kLogNei: return "log_nei";
    case AcqKind::kUcb: return "ucb";
    case AcqKind::kMes: return "mes";
    case AcqKind::kGibbon: return "gibbon";
  }
  return "?";
}

inline AcqKind acq_kind_from_string(const std::string& s) {
  if (s == "ts") return AcqKind::kTs;
  if (s == "log_ei") return AcqKind::kLogEi;
  if (s == "log_nei") return AcqKind::kLogNei;
  if (s == "ucb") return AcqKind::kUcb;
  if (s == "mes") return AcqKind::kMes;
  if (s == "gibbon") return AcqKind::kGibbon;
  throw std::invalid_argument("unknown acquisition kind '" + s + "'");
}

struct AcquisitionSpec {
  AcqKind kind = AcqKind::kLogNei;
  double beta = 2.0;             // ucb, fixed
  bool beta_scheduled = false;   // ucb: scheduled beta_t
  double delta = 0.1;            // schedule parameter; no default from config
  int mc_samples = 128;          // quasi-MC Sobol base samples
  int maxvalue_samples = 16;     // Gumbel draws for mes/gibbon
  std::optional<double> cost_alpha;  // multi-fidelity cost scaling
  int batch_q = 1;

  void check() const {
    if (mc_samples < 1) throw std::invalid_argument("mc_samples >= 1");
    if (maxvalue_samples < 1) throw std::invalid_argument("maxvalue_samples >= 1");
    if (cost_alpha && *cost_alpha < 0.0) {
      throw std::invalid_argument("cost_alpha must be >= 0");
    }
    if (batch_q < 1) throw std::invalid_argument("batch_q >= 1");
  }
};

/// Cost-scaling defaults per acquisition kind (multi-fidelity runs).
inline double default_cost_alpha(AcqKind kind) {
  switch (kind) {
    case AcqKind::kUcb: return 0.005;
    case AcqKind::kLogEi: return 0.01;
    case AcqKind::kLogNei:
    case AcqKind::kMes:
    case AcqKind::kGibbon: return 0.05;
    case AcqKind::kTs: break;
  }
  throw std::invalid_argument("cost scaling unsupported for this kind");
}

/// Wrap a spec with an affine query-cost adjustment c(x) = alpha*fid(x) + 1;
/// the evaluator divides non-log kinds by c and subtracts log c from log
/// kinds. Alpha defaults per kind when unset.
inline AcquisitionSpec cost_scaled(AcquisitionSpec spec,
                                   std::optional<double> alpha = std::nullopt) {
  spec.cost_alpha = alpha ? *alpha : default_cost_alpha(spec.kind);
  return spec;
}

/// Scheduled exploration coefficient beta_t = 2 log(d t^2 pi^2 / (6 delta)),
/// clamped below at 0.01.
inline double ucb_beta_schedule(int t, int d, double delta) {
  if (t < 1) throw std::invalid_argument("ucb_beta_schedule: t >= 1");
  const double arg = d * double(t) * double(t) * kPi * kPi / (6.0 * delta);
  return std::max(2.0 * std::log(arg), 0.01);
}

/// Inputs the evaluator needs beyond the model: observed set (in the GP's
/// normalized coordinates), incumbent, optional max-value samples, pending
/// batch points, iteration counter and a fidelity extractor for cost scaling.
struct AcqState {
  Eigen::MatrixXd X_obs;
  Eigen::VectorXd y_obs;
  double incumbent_best_mean = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd maxvalue_samples;
  std::vector<Point> pending;
  int iteration = 1;
  std::function<double(const Point&)> fid_of;

  static AcqState from_model(const GpModel& gp) {
    AcqState st;
    st.X_obs = gp.train_inputs();
    st.y_obs = gp.train_targets();
    if (gp.n_train() > 0) {
      st.incumbent_best_mean = gp.posterior_mean_train().maxCoeff();
    }
    return st;
  }
};

/// Batched acquisition evaluation over candidate rows in the GP's input
/// space. Heavy per-model quantities (posterior draws at the observed set,
/// Cholesky factors, Gumbel samples) are cached at construction.
class AcquisitionEvaluator {
 public:
  AcquisitionEvaluator(AcquisitionSpec spec, const GpModel& gp, AcqState state)
      : spec_(spec), gp_(&gp), st_(std::move(state)) {
    spec_.check();
    if (spec_.kind == AcqKind::kTs) {
      throw std::invalid_argument(
          "thompson sampling has no pointwise value; use thompson_select");
    }
    if (spec_.cost_alpha && !st_.fid_of) {
      throw std::invalid_argument("cost scaling needs a fidelity extractor");
    }
    if ((spec_.kind == AcqKind::kMes || spec_.kind == AcqKind::kGibbon) &&
        st_.maxvalue_samples.size() == 0) {
      throw std::invalid_argument("mes/gibbon need max-value samples");
    }
    if (spec_.kind == AcqKind::kLogNei) build_nei_cache();
    if (spec_.kind == AcqKind::kGibbon && !st_.pending.empty()) {
      build_pending_cache();
    }
  }

  double value(const Point& x) const {
    Eigen::MatrixXd X(1, x.size());
    X.row(0) = x.transpose();
    return values(X)[0];
  }

  Eigen::VectorXd values(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd v;
    switch (spec_.kind) {
      case AcqKind::kLogEi: v = log_ei_values(X); break;
      case AcqKind::kLogNei: v = log_nei_values(X); break;
      case AcqKind::kUcb: v = ucb_values(X); break;
      case AcqKind::kMes: v = mes_values(X); break;
      case AcqKind::kGibbon: v = gibbon_values(X); break;
      case AcqKind::kTs:
        throw std::logic_error("unreachable");
    }
    if (spec_.cost_alpha) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double c = *spec_.cost_alpha * st_.fid_of(X.row(i).transpose()) + 1.0;
        if (spec_.kind == AcqKind::kLogEi || spec_.kind == AcqKind::kLogNei) {
          v[i] -= std::log(c);
        } else {
          v[i] /= c;
        }
      }
    }
    return v;
  }

 private:
  static constexpr double kSigmaFloor = 1e-12;
  static constexpr double kImprovementFloor = 1e-300;

  double incumbent() const {
    if (std::isfinite(st_.incumbent_best_mean)) return st_.incumbent_best_mean;
    throw std::invalid_argument("acquisition needs an incumbent best mean");
  }

  Eigen::VectorXd log_ei_values(const Eigen::MatrixXd& X) const {
    auto [mu, var] = gp_->posterior_marginals(X);
    const double best = incumbent();
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double sigma = std::sqrt(std::max(var[i], 0.0));
      if (sigma < kSigmaFloor) {
        out[i] = std::log(std::max(mu[i] - best, kImprovementFloor));
      } else {
        const double z = (mu[i] - best) / sigma;
        out[i] = std::log(sigma) + log_ei_helper(z);
      }
    }
    return out;
  }

  Eigen::VectorXd ucb_values(const Eigen::MatrixXd& X) const {
    auto [mu, var] = gp_->posterior_marginals(X);
    const double beta =
        spec_.beta_scheduled
            ? ucb_beta_schedule(st_.iteration,
                                std::max<int>(1, int(X.cols())), spec_.delta)
            : spec_.beta;
    return mu + std::sqrt(beta) * var.cwiseMax(0.0).cwiseSqrt();
  }

  Eigen::VectorXd mes_values(const Eigen::MatrixXd& X) const {
    auto [mu, var] = gp_->posterior_marginals(X);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    const auto& fstar = st_.maxvalue_samples;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double sigma = std::sqrt(std::max(var[i], 0.0));
      double acc = 0.0;
      for (Eigen::Index s = 0; s < fstar.size(); ++s) {
        if (sigma < kSigmaFloor) continue;  // no entropy to reduce
        double gamma = (fstar[s] - mu[i]) / sigma;
        gamma = std::max(gamma, -6.0);  // mean above sampled max: clamp
        const double logPhi = normal_logcdf(gamma);
        acc += 0.5 * gamma * normal_pdf(gamma) / std::exp(logPhi) - logPhi;
      }
      out[i] = acc / double(fstar.size());
    }
    return out;
  }

  Eigen::VectorXd gibbon_values(const Eigen::MatrixXd& X) const {
    auto [mu, var] = gp_->posterior_marginals(X);
    Eigen::VectorXd out(X.rows());
    const auto& fstar = st_.maxvalue_samples;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double v = std::max(var[i], 0.0);
      const double sn2 =
          std::max(gp_->noise_variance_at(X.row(i).transpose()), 1e-12);
      const double sigma = std::sqrt(v);
      double acc = 0.0;
      for (Eigen::Index s = 0; s < fstar.size(); ++s) {
        double vr = 1.0;  // truncated/full variance ratio
        if (sigma >= kSigmaFloor) {
          double gamma = std::max((fstar[s] - mu[i]) / sigma, -6.0);
          const double r = mills_ratio(gamma);
          vr = std::clamp(1.0 - gamma * r - r * r, 1e-12, 1.0);
        }
        acc += std::log(v * vr + sn2);
      }
      out[i] = 0.5 * (std::log(v + sn2) - acc / double(fstar.size()));
    }
    if (!st_.pending.empty()) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out[i] += pending_diversity(X.row(i).transpose());
      }
    }
    return out;
  }

  void build_pending_cache() {
    const int q = static_cast<int>(st_.pending.size());
    P_.resize(q, st_.pending[0].size());
    for (int i = 0; i < q; ++i) P_.row(i) = st_.pending[i].transpose();
    auto [mp, Cp] = gp_->posterior(P_);
    pend_sd_ = Cp.diagonal().cwiseMax(1e-18).cwiseSqrt();
    Eigen::MatrixXd corr =
        Cp.array() / (pend_sd_ * pend_sd_.transpose()).array();
    corr.diagonal().setOnes();
    corr.diagonal().array() += 1e-8;
    pend_chol_ = corr.llt().matrixL();
  }

  /// 0.5 [logdet Corr(P u {x}) - logdet Corr(P)] =
  /// 0.5 log(1 - r' Corr(P)^-1 r) for the posterior correlation vector r.
  double pending_diversity(const Point& x) const {
    Eigen::MatrixXd Xq(1, x.size());
    Xq.row(0) = x.transpose();
    auto [mu, var] = gp_->posterior_marginals(Xq);
    const double sd = std::sqrt(std::max(var[0], 1e-18));
    Eigen::VectorXd cross = gp_->posterior_cross_cov(P_, Xq).col(0);
    Eigen::VectorXd r = cross.array() / (pend_sd_.array() * sd);
    Eigen::VectorXd w = pend_chol_.triangularView<Eigen::Lower>().solve(r);
    const double rest = std::clamp(1.0 - w.squaredNorm(), 1e-12, 1.0);
    return 0.5 * std::log(rest);
  }

  void build_nei_cache() {
    const int nA = static_cast<int>(st_.X_obs.rows());
    if (nA < 1) throw std::invalid_argument("log_nei needs observations");
    auto [mu, cov] = gp_->posterior(st_.X_obs);
    nei_mu_ = mu;
    const double scale = std::max(cov.diagonal().maxCoeff(), 1e-300);
    double jitter = 1e-12 * scale;
    for (;; jitter *= 100.0) {
      Eigen::MatrixXd K = cov;
      K.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(K);
      if (llt.info() == Eigen::Success) {
        nei_chol_ = llt.matrixL();
        break;
      }
      if (jitter > scale) throw std::runtime_error("log_nei: bad covariance");
    }
    nei_base_ = qmc_normal(nA, spec_.mc_samples);
    // Joint draws of f at the observed set; per-draw incumbents.
    Eigen::MatrixXd F =
        (nei_base_ * nei_chol_.transpose()).rowwise() + nei_mu_.transpose();
    nei_best_ = F.rowwise().maxCoeff();
  }

  /// QMC average over joint posterior draws at the observed set; the
  /// candidate coordinate of each joint draw is integrated in closed form
  /// (an analytic EI against the per-draw incumbent), so tail improvements
  /// do not add Monte Carlo variance.
  Eigen::VectorXd log_nei_values(const Eigen::MatrixXd& X) const {
    const int S = spec_.mc_samples;
    auto [mu, var] = gp_->posterior_marginals(X);
    Eigen::MatrixXd cross = gp_->posterior_cross_cov(st_.X_obs, X);  // nA x P
    Eigen::MatrixXd W =
        nei_chol_.triangularView<Eigen::Lower>().solve(cross);  // nA x P
    Eigen::VectorXd cond_var =
        (var - W.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    Eigen::VectorXd cond_sd = cond_var.cwiseSqrt();
    // Conditional mean per draw: m(s, p) = mu_p + <W.col(p), zeta_s>.
    Eigen::MatrixXd M = nei_base_ * W;  // S x P
    M.rowwise() += mu.transpose();
    Eigen::VectorXd out(X.rows());
    std::vector<double> logs(S);
    for (Eigen::Index p = 0; p < X.rows(); ++p) {
      const double sd = cond_sd[p];
      for (int s = 0; s < S; ++s) {
        const double gap = M(s, p) - nei_best_[s];
        if (sd < kSigmaFloor) {
          logs[s] = std::log(std::max(gap, kImprovementFloor));
        } else {
          logs[s] = std::log(sd) + log_ei_helper(gap / sd);
        }
      }
      out[p] = std::max(logsumexp(logs) - std::log(double(S)),
                        std::log(kImprovementFloor));
    }
    return out;
  }

  AcquisitionSpec spec_;
  const GpModel* gp_;
  AcqState st_;
  // log_nei cache
  Eigen::VectorXd nei_mu_, nei_best_;
  Eigen::MatrixXd nei_chol_, nei_base_;
  // gibbon pending cache
  Eigen::MatrixXd P_, pend_chol_;
  Eigen::VectorXd pend_sd_;
};

/// Spec-style pointwise entry (builds an evaluator per call).
inline double acq_value(const AcquisitionSpec& spec, const GpModel& gp,
                        const Point& x, const AcqState& state) {
  return AcquisitionEvaluator(spec, gp, state).value(x);
}

/// One joint posterior draw over the candidate rows; returns the argmax row.
inline int thompson_select(const GpModel& gp, const Eigen::MatrixXd& candidates,
                           Rng& rng) {
  if (candidates.rows() < 1) {
    throw std::invalid_argument("thompson_select: empty candidate set");
  }
  Eigen::MatrixXd draw = gp.sample_joint(candidates, 1, rng);
  Eigen::Index arg = 0;
  draw.row(0).maxCoeff(&arg);
  return static_cast<int>(arg);
}

/// Gumbel max-value samples via quantile matching of the product CDF of the
/// candidate marginals; every sample is clamped at the best observed
/// posterior mean. Degenerate (all-zero variance) sets return the max mean.
inline Eigen::VectorXd gumbel_sample_max(const GpModel& gp,
                                         const Eigen::MatrixXd& candidates,
                                         int draws, Rng& rng) {
  if (candidates.rows() < 2) {
    throw std::invalid_argument("gumbel_sample_max: need >= 2 candidates");
  }
  auto [mu, var] = gp.posterior_marginals(candidates);
  Eigen::VectorXd sd = var.cwiseMax(0.0).cwiseSqrt();
  double incumbent = -std::numeric_limits<double>::infinity();
  if (gp.n_train() > 0) incumbent = gp.posterior_mean_train().maxCoeff();

  Eigen::VectorXd out(draws);
  if (sd.maxCoeff() < 1e-12) {
    out.setConstant(std::max(mu.maxCoeff(), incumbent));
    return out;
  }
  auto log_cdf_max = [&](double y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const double s = std::max(sd[i], 1e-12);
      acc += normal_logcdf((y - mu[i]) / s);
    }
    return acc;
  };
  auto quantile = [&](double p) {
    double lo = mu.minCoeff() - 10.0 * sd.maxCoeff();
    double hi = mu.maxCoeff() + 10.0 * sd.maxCoeff();
    const double target = std::log(p);
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_cdf_max(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double y25 = quantile(0.25), y50 = quantile(0.5), y75 = quantile(0.75);
  const double b =
      std::max((y75 - y25) / (std::log(std::log(4.0)) -
                              std::log(std::log(4.0 / 3.0))),
               1e-12);
  const double a = y50 + b * std::log(std::log(2.0));
  for (int s = 0; s < draws; ++s) {
    const double u = rng.uniform();
    double y = a - b * std::log(-std::log(u));
    out[s] = std::max(y, incumbent);
  }
  return out;
}

}  // namespace bolt
