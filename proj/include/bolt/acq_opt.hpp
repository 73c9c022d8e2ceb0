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

#include "bolt/acquisition.hpp"

namespace bolt {

/// Batched objective over rows in unit-normalized coordinates.
using BatchValueFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct AcqOptConfig {
  int restarts = 8;
  int continuous_iters = 20;     // ascent steps per alternation pass
  int discrete_passes = 2;       // alternation rounds
  int relaxed_cardinality = 16;  // integers above this are relaxed + rounded
  std::optional<Eigen::MatrixXd> candidate_pool;  // raw rows; exact argmax
  std::vector<bool> pool_mask;   // true = excluded
  bool skip_fantasies = false;   // negative-control switch for batch_select

  void check() const {
    if (restarts < 1) throw std::invalid_argument("restarts >= 1");
  }
};

struct AcqChoice {
  Point x;              // raw coordinates
  double value = 0.0;
  int pool_index = -1;  // set for candidate-pool optimization
};

namespace detail {

/// Finite-difference ascent on the relaxed continuous dimensions in
/// unit-normalized coordinates, with bound clamping and simplex
/// renormalization after every step.
inline void continuous_ascent(const BatchValueFn& fn, const SearchSpace& space,
                              const InputTransform& tf,
                              const std::vector<int>& ascent_dims, Point& x,
                              double& fx, int iters) {
  if (ascent_dims.empty()) return;
  const Eigen::VectorXd span = tf.span();
  constexpr double kFdStep = 1e-3;
  for (int it = 0; it < iters; ++it) {
    const int m = static_cast<int>(ascent_dims.size());
    Eigen::MatrixXd probes(2 * m, space.dim());
    for (int j = 0; j < m; ++j) {
      const int dim = ascent_dims[j];
      Point hi = x, lo = x;
      hi[dim] += kFdStep * span[dim];
      lo[dim] -= kFdStep * span[dim];
      probes.row(2 * j) = hi.transpose();
      probes.row(2 * j + 1) = lo.transpose();
    }
    Eigen::VectorXd pv = fn(tf.apply_rows(probes));
    Eigen::VectorXd grad(m);
    for (int j = 0; j < m; ++j) {
      grad[j] = (pv[2 * j] - pv[2 * j + 1]) / (2.0 * kFdStep);
    }
    const double gnorm = grad.norm();
    if (gnorm < 1e-12) break;

    bool improved = false;
    for (double step : {0.2, 0.05, 0.0125, 0.003125}) {
      Point cand = x;
      for (int j = 0; j < m; ++j) {
        const int dim = ascent_dims[j];
        cand[dim] += step * span[dim] * grad[j] / gnorm;
        cand[dim] = std::clamp(cand[dim], space.param(dim).lower,
                               space.param(dim).upper);
      }
      for (const auto& group : space.simplex_groups()) {
        double sum = 0.0;
        for (int idx : group) {
          cand[idx] = std::max(cand[idx], 0.0);
          sum += cand[idx];
        }
        if (sum <= 0.0) continue;
        for (int idx : group) cand[idx] /= sum;
      }
      const double fc = fn(tf.apply_rows(cand.transpose()))[0];
      if (fc > fx) {
        x = cand;
        fx = fc;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
}

/// Exhaustive one-dimension-at-a-time search over categorical and
/// low-cardinality integer dimensions.
inline void discrete_sweep(const BatchValueFn& fn, const SearchSpace& space,
                           const InputTransform& tf,
                           const std::vector<int>& sweep_dims, Point& x,
                           double& fx) {
  for (int dim : sweep_dims) {
    const auto& p = space.param(dim);
    const int lo = static_cast<int>(p.lower), hi = static_cast<int>(p.upper);
    Eigen::MatrixXd probes(hi - lo + 1, space.dim());
    for (int code = lo; code <= hi; ++code) {
      Point cand = x;
      cand[dim] = code;
      probes.row(code - lo) = cand.transpose();
    }
    Eigen::VectorXd pv = fn(tf.apply_rows(probes));
    Eigen::Index best;
    const double bv = pv.maxCoeff(&best);
    if (bv > fx) {
      fx = bv;
      x[dim] = lo + static_cast<int>(best);
    }
  }
}

}  // namespace detail

/// Maximize an arbitrary batched objective over the space: exact argmax over
/// an explicit candidate pool when one is configured, otherwise multi-start
/// alternation between projected continuous ascent and exhaustive discrete
/// sweeps, with continuous relaxation and final rounding for
/// high-cardinality integers. Extra raw-coordinate seeds may be supplied.
inline AcqChoice maximize_batch_fn(const BatchValueFn& fn,
                                   const SearchSpace& space,
                                   const AcqOptConfig& cfg, Rng& rng,
                                   const std::vector<Point>& extra_seeds = {}) {
  cfg.check();
  const InputTransform tf = InputTransform::from_space(space);

  if (cfg.candidate_pool) {
    const Eigen::MatrixXd& pool = *cfg.candidate_pool;
    Eigen::VectorXd v = fn(tf.apply_rows(pool));
    int best = -1;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!cfg.pool_mask.empty() && cfg.pool_mask[i]) continue;
      if (best < 0 || v[i] > v[best]) best = static_cast<int>(i);
    }
    if (best < 0) throw std::invalid_argument("optimize_acq: pool exhausted");
    return {pool.row(best).transpose(), v[best], best};
  }

  std::vector<int> ascent_dims, sweep_dims;
  for (int i = 0; i < space.dim(); ++i) {
    const auto& p = space.param(i);
    if (p.kind == ParamKind::kContinuous) {
      ascent_dims.push_back(i);
    } else if (p.kind == ParamKind::kInteger &&
               p.cardinality() > cfg.relaxed_cardinality) {
      ascent_dims.push_back(i);  // continuous relaxation, rounded at the end
    } else {
      sweep_dims.push_back(i);
    }
  }

  std::vector<Point> seeds = uniform_sample(space, cfg.restarts, rng);
  for (const auto& s : extra_seeds) seeds.push_back(s);

  AcqChoice out;
  bool have = false;
  for (auto& seed : seeds) {
    Point x = seed;
    double fx = fn(tf.apply_rows(x.transpose()))[0];
    for (int pass = 0; pass < cfg.discrete_passes; ++pass) {
      detail::continuous_ascent(fn, space, tf, ascent_dims, x, fx,
                                cfg.continuous_iters);
      detail::discrete_sweep(fn, space, tf, sweep_dims, x, fx);
    }
    Point rounded = round_point(space, x);
    const double fr = fn(tf.apply_rows(rounded.transpose()))[0];
    if (!have || fr > out.value) {
      out.x = rounded;
      out.value = fr;
      have = true;
    }
  }
  return out;
}

/// Maximize the acquisition over the space.
inline AcqChoice optimize_acq(const AcquisitionSpec& spec, const GpModel& gp,
                              const SearchSpace& space, const AcqOptConfig& cfg,
                              const AcqState& state, Rng& rng) {
  AcquisitionEvaluator acq(spec, gp, state);
  std::vector<Point> extra;
  if (state.y_obs.size() > 0) {
    // Seed from the best observed point (mapped back to raw coordinates).
    const InputTransform tf = InputTransform::from_space(space);
    Eigen::Index arg;
    state.y_obs.maxCoeff(&arg);
    const Eigen::VectorXd z = state.X_obs.row(arg);
    extra.push_back(tf.lo + z.cwiseProduct(tf.span()));
  }
  auto fn = [&acq](const Eigen::MatrixXd& Z) { return acq.values(Z); };
  return maximize_batch_fn(fn, space, cfg, rng, extra);
}

/// Sequential greedy batch: maximize, fantasize the posterior mean at the
/// chosen point, recondition, repeat. GIBBON keeps its determinant diversity
/// term over pending points instead of fantasy conditioning. Pool candidates
/// already chosen are masked out.
inline std::vector<AcqChoice> batch_select(const AcquisitionSpec& spec,
                                           const GpModel& gp, int q,
                                           const SearchSpace& space,
                                           const AcqOptConfig& cfg,
                                           const AcqState& state, Rng& rng) {
  if (q < 1) throw std::invalid_argument("batch_select: q >= 1");
  if (cfg.candidate_pool) {
    int free_count = 0;
    for (Eigen::Index i = 0; i < cfg.candidate_pool->rows(); ++i) {
      if (cfg.pool_mask.empty() || !cfg.pool_mask[i]) ++free_count;
    }
    if (free_count < q) {
      throw std::invalid_argument("batch_select: pool smaller than batch");
    }
  }
  const InputTransform tf = InputTransform::from_space(space);
  GpModel model = gp;
  AcqState st = state;
  AcqOptConfig c = cfg;
  std::vector<AcqChoice> chosen;
  for (int i = 0; i < q; ++i) {
    AcqChoice pick = optimize_acq(spec, model, space, c, st, rng);
    chosen.push_back(pick);
    if (i + 1 == q) break;
    if (cfg.skip_fantasies) continue;
    if (pick.pool_index >= 0) {
      if (c.pool_mask.empty()) {
        c.pool_mask.assign(c.candidate_pool->rows(), false);
      }
      c.pool_mask[pick.pool_index] = true;
    }
    if (spec.kind == AcqKind::kGibbon) {
      st.pending.push_back(tf.apply(pick.x));
    } else {
      const Eigen::VectorXd z = tf.apply(pick.x);
      auto [mu, var] = model.posterior_marginals(z.transpose());
      model = model.condition_on_fantasy(z, mu[0]);
      st.X_obs = model.train_inputs();
      st.y_obs = model.train_targets();
      st.incumbent_best_mean = model.posterior_mean_train().maxCoeff();
    }
  }
  return chosen;
}

}  // namespace bolt
