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

#include <set>

#include "bolt/acq_opt.hpp"

namespace bolt {

/// Discrete trust-region bookkeeping: the region is the k nearest candidate
/// embeddings around the incumbent; k doubles after tau_succ consecutive
/// improvements and halves after tau_fail consecutive non-improvements.
struct TrustRegionState {
  int k = 0;
  int k_init = 0;
  int k_min = 8;
  int n_total = 0;
  int succ_streak = 0;
  int fail_streak = 0;
  int tau_succ = 3;
  int tau_fail = 10;
  int best_id = -1;
  double best_value = -std::numeric_limits<double>::infinity();

  static TrustRegionState init(int n_total, int k_min = 8, int tau_succ = 3,
                               int tau_fail = 10) {
    TrustRegionState s;
    s.n_total = n_total;
    s.k_init = n_total / 2;
    s.k = s.k_init;
    s.k_min = std::min(k_min, n_total);
    s.tau_succ = tau_succ;
    s.tau_fail = tau_fail;
    return s;
  }
};

/// Streak accounting: an improvement resets the failure streak and vice
/// versa; k moves only when a streak reaches its threshold, then both
/// streaks reset. "Improved" means a strictly greater best observed value.
inline TrustRegionState dturbo_update(TrustRegionState s, bool improved) {
  if (improved) {
    ++s.succ_streak;
    s.fail_streak = 0;
    if (s.succ_streak >= s.tau_succ) {
      s.k = std::min(2 * s.k, s.n_total);
      s.succ_streak = 0;
      s.fail_streak = 0;
    }
  } else {
    ++s.fail_streak;
    s.succ_streak = 0;
    if (s.fail_streak >= s.tau_fail) {
      s.k = std::max(s.k / 2, s.k_min);
      s.succ_streak = 0;
      s.fail_streak = 0;
    }
  }
  return s;
}

/// Number of halvings k -> max(k/2, k_min) until k reaches k_min.
inline int halvings_to_floor(int k_init, int k_min) {
  int k = k_init, count = 0;
  while (k > k_min) {
    k = std::max(k / 2, k_min);
    ++count;
  }
  return count;
}

/// k ids nearest to the center row by Euclidean distance (the center is its
/// own nearest neighbor), ties broken by lower id; `exclude` rows skipped.
inline std::vector<int> knn(const Eigen::MatrixXd& embeddings, int center_id,
                            int k, const std::set<int>& exclude = {}) {
  const int n = static_cast<int>(embeddings.rows());
  if (k < 1 || k > n) throw std::invalid_argument("knn: need 1 <= k <= n");
  std::vector<std::pair<double, int>> dist;
  dist.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (exclude.count(i)) continue;
    dist.emplace_back((embeddings.row(i) - embeddings.row(center_id)).squaredNorm(), i);
  }
  if (static_cast<int>(dist.size()) < k) {
    throw std::invalid_argument("knn: k exceeds pool after exclusion");
  }
  std::sort(dist.begin(), dist.end());
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

/// Sparse sign projection: out[:, t] = sum over dims assigned to bin t of
/// sign_i * Z[:, i].
inline Eigen::MatrixXd hesbo_project(const std::vector<int>& bin_of,
                                     const std::vector<int>& sign_of,
                                     int target_dim, const Eigen::MatrixXd& Z) {
  const int d = static_cast<int>(Z.cols());
  if (static_cast<int>(bin_of.size()) != d ||
      static_cast<int>(sign_of.size()) != d) {
    throw std::invalid_argument("hesbo_project: assignment length mismatch");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Z.rows(), target_dim);
  for (int i = 0; i < d; ++i) {
    if (bin_of[i] < 0 || bin_of[i] >= target_dim) {
      throw std::invalid_argument("hesbo_project: uncovered or bad bin");
    }
    out.col(bin_of[i]) += sign_of[i] * Z.col(i);
  }
  return out;
}

/// Random-subspace bookkeeping for the discretized BAxUS variant.
struct SubspaceState {
  int target_dim = 0;
  int d_full = 0;
  std::vector<int> bin_of;
  std::vector<int> sign_of;
  int stage_budget = 0;
  int stage_evals_used = 0;
  int n_stages = 0;

  static SubspaceState init(int d_full, int d_init, int total_budget,
                            Rng& rng) {
    SubspaceState s;
    s.d_full = d_full;
    s.target_dim = std::min(d_init, d_full);
    s.bin_of.resize(d_full);
    s.sign_of.resize(d_full);
    // Round-robin over a shuffled dim order keeps every bin nonempty.
    std::vector<int> dims(d_full);
    std::iota(dims.begin(), dims.end(), 0);
    for (int i = d_full - 1; i > 0; --i) {
      std::swap(dims[i], dims[rng.uniform_index(i + 1)]);
    }
    for (int i = 0; i < d_full; ++i) {
      s.bin_of[dims[i]] = i % s.target_dim;
      s.sign_of[dims[i]] = rng.uniform() < 0.5 ? 1 : -1;
    }
    int stages = 1, dim = s.target_dim;
    while (dim < d_full) {
      dim = std::min(2 * dim, d_full);
      ++stages;
    }
    s.n_stages = stages;
    s.stage_budget = (total_budget + stages - 1) / stages;
    return s;
  }

  bool terminal() const { return target_dim >= d_full; }

  /// Split bins (dims shuffled, signs preserved) until the doubled target
  /// dimension (capped at d_full) is reached. Returns false at the terminal
  /// stage.
  bool advance_stage(Rng& rng) {
    if (terminal()) return false;
    const int want = std::min(2 * target_dim, d_full);
    while (target_dim < want) {
      // Pick the largest bin with at least two dims and split it.
      std::vector<std::vector<int>> members(target_dim);
      for (int i = 0; i < d_full; ++i) members[bin_of[i]].push_back(i);
      int candidate = -1;
      for (int b = 0; b < target_dim; ++b) {
        if (members[b].size() >= 2 &&
            (candidate < 0 || members[b].size() > members[candidate].size())) {
          candidate = b;
        }
      }
      if (candidate < 0) break;  // every bin is a singleton already
      auto& dims = members[candidate];
      for (int i = static_cast<int>(dims.size()) - 1; i > 0; --i) {
        std::swap(dims[i], dims[rng.uniform_index(i + 1)]);
      }
      const int cut =
          1 + static_cast<int>(rng.uniform_index(dims.size() - 1));
      for (int i = cut; i < static_cast<int>(dims.size()); ++i) {
        bin_of[dims[i]] = target_dim;
      }
      ++target_dim;
    }
    stage_evals_used = 0;
    return true;
  }
};

struct TabularHistory {
  std::vector<int> ids;
  Eigen::VectorXd values;
};

struct TrustRegionChoice {
  std::vector<int> ids;
  bool region_expanded = false;  // all region candidates were evaluated
  GpModel model;
};

namespace detail {

/// Shared selection core: fit a GP on the observed rows of `Zgp`, take the
/// k-NN region around the incumbent in `Zknn`, and pick q ids by sequential
/// greedy acquisition over the unevaluated region.
inline TrustRegionChoice trust_region_select(
    const TabularHistory& history, const Eigen::MatrixXd& Zknn,
    const Eigen::MatrixXd& Zgp, const TrustRegionState& state,
    const AcquisitionSpec& acq_spec, const NoiseSpec& noise, int restarts,
    int q, Rng& rng) {
  const int n_obs = static_cast<int>(history.ids.size());
  if (n_obs < 1) throw std::invalid_argument("trust region: no observations");
  const int n_pool = static_cast<int>(Zgp.rows());

  Eigen::MatrixXd X(n_obs, Zgp.cols());
  for (int i = 0; i < n_obs; ++i) X.row(i) = Zgp.row(history.ids[i]);
  GpModel gp = fit_gp(X, history.values, KernelSpec::all_rbf(int(Zgp.cols()), false),
                      noise, restarts, rng);

  std::set<int> evaluated(history.ids.begin(), history.ids.end());
  TrustRegionChoice out;
  std::vector<int> region;
  for (int id : knn(Zknn, state.best_id, std::min(state.k, n_pool))) {
    if (!evaluated.count(id)) region.push_back(id);
  }
  if (static_cast<int>(region.size()) < q) {
    // Region exhausted: widen to the nearest unevaluated candidates.
    out.region_expanded = true;
    std::vector<std::pair<double, int>> dist;
    for (int i = 0; i < n_pool; ++i) {
      if (evaluated.count(i)) continue;
      dist.emplace_back(
          (Zknn.row(i) - Zknn.row(state.best_id)).squaredNorm(), i);
    }
    if (static_cast<int>(dist.size()) < q) {
      throw std::invalid_argument("trust region: pool exhausted");
    }
    std::sort(dist.begin(), dist.end());
    region.clear();
    const int take = std::max(q, std::min<int>(state.k, int(dist.size())));
    for (int i = 0; i < take; ++i) region.push_back(dist[i].second);
  }

  Eigen::MatrixXd Zregion(region.size(), Zgp.cols());
  for (std::size_t i = 0; i < region.size(); ++i) {
    Zregion.row(i) = Zgp.row(region[i]);
  }

  AcqState st = AcqState::from_model(gp);
  if (acq_spec.kind == AcqKind::kMes || acq_spec.kind == AcqKind::kGibbon) {
    st.maxvalue_samples =
        gumbel_sample_max(gp, Zregion, acq_spec.maxvalue_samples, rng);
  }
  GpModel model = gp;
  std::vector<bool> mask(region.size(), false);
  for (int pick = 0; pick < q; ++pick) {
    if (acq_spec.kind == AcqKind::kTs) {
      // Thompson route: joint draw over the unmasked region.
      std::vector<int> free;
      for (std::size_t i = 0; i < region.size(); ++i) {
        if (!mask[i]) free.push_back(int(i));
      }
      Eigen::MatrixXd Zfree(free.size(), Zgp.cols());
      for (std::size_t i = 0; i < free.size(); ++i) {
        Zfree.row(i) = Zregion.row(free[i]);
      }
      const int sel = thompson_select(model, Zfree, rng);
      out.ids.push_back(region[free[sel]]);
      mask[free[sel]] = true;
      continue;
    }
    AcquisitionEvaluator acq(acq_spec, model, st);
    Eigen::VectorXd v = acq.values(Zregion);
    int best = -1;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (mask[i]) continue;
      if (best < 0 || v[i] > v[best]) best = static_cast<int>(i);
    }
    out.ids.push_back(region[best]);
    mask[best] = true;
    if (pick + 1 < q && acq_spec.kind != AcqKind::kGibbon) {
      const Eigen::VectorXd z = Zregion.row(best);
      auto [mu, var] = model.posterior_marginals(z.transpose());
      model = model.condition_on_fantasy(z, mu[0]);
      st.X_obs = model.train_inputs();
      st.y_obs = model.train_targets();
      st.incumbent_best_mean = model.posterior_mean_train().maxCoeff();
    } else if (acq_spec.kind == AcqKind::kGibbon) {
      st.pending.push_back(Zregion.row(best).transpose());
    }
  }
  out.model = std::move(gp);
  return out;
}

inline Eigen::MatrixXd minmax_normalize(const Eigen::MatrixXd& Z) {
  const Eigen::VectorXd lo = Z.colwise().minCoeff().transpose();
  const Eigen::VectorXd span =
      (Z.colwise().maxCoeff().transpose() - lo).cwiseMax(1e-12);
  return ((Z.rowwise() - lo.transpose()).array().rowwise() /
          span.transpose().array())
      .matrix();
}

}  // namespace detail

/// One dTuRBO selection: GP on all observed (id, value) pairs, candidates
/// from the k-NN region of the incumbent in raw embedding space, acquisition
/// argmax (sequential greedy for batches). State is updated by the caller
/// via dturbo_update once results return.
inline TrustRegionChoice dturbo_step(const TabularHistory& history,
                                     const Eigen::MatrixXd& embeddings,
                                     const TrustRegionState& state,
                                     const AcquisitionSpec& acq_spec,
                                     const NoiseSpec& noise, int restarts,
                                     int q, Rng& rng) {
  const Eigen::MatrixXd Zgp = detail::minmax_normalize(embeddings);
  return detail::trust_region_select(history, embeddings, Zgp, state, acq_spec,
                                     noise, restarts, q, rng);
}

/// One dBAxUS selection: embeddings are projected through the current sparse
/// sign assignment; both the k-NN region and the GP live in the projected
/// space. At the terminal stage (identity projection) this reduces to
/// dturbo_step.
inline TrustRegionChoice dbaxus_step(const TabularHistory& history,
                                     const Eigen::MatrixXd& embeddings,
                                     const SubspaceState& sstate,
                                     const TrustRegionState& tstate,
                                     const AcquisitionSpec& acq_spec,
                                     const NoiseSpec& noise, int restarts,
                                     int q, Rng& rng) {
  const Eigen::MatrixXd P = hesbo_project(sstate.bin_of, sstate.sign_of,
                                          sstate.target_dim, embeddings);
  const Eigen::MatrixXd Zgp = detail::minmax_normalize(P);
  return detail::trust_region_select(history, P, Zgp, tstate, acq_spec, noise,
                                     restarts, q, rng);
}

}  // namespace bolt
