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

#include "bolt/spaces.hpp"

namespace bolt {

inline Point random_step(const SearchSpace& space, Rng& rng) {
  return uniform_sample(space, 1, rng)[0];
}

struct TpeState {
  double gamma = 0.25;
  int n_candidates = 24;
  std::string bandwidth_rule = "scott";
  int min_history = 10;

  void check() const {
    if (gamma <= 0.0 || gamma >= 1.0) {
      throw std::invalid_argument("tpe: gamma in (0,1)");
    }
    if (n_candidates < 1) throw std::invalid_argument("tpe: n_candidates >= 1");
  }
};

struct TpeSuggestion {
  Point x;
  bool random_fallback = false;
};

namespace detail {

/// Per-dimension Gaussian KDE with a Scott-style bandwidth.
struct Kde1d {
  std::vector<double> centers;
  double bw = 1.0;

  static Kde1d fit(std::vector<double> values, double range) {
    Kde1d k;
    k.centers = std::move(values);
    const int n = static_cast<int>(k.centers.size());
    double mean = 0.0;
    for (double v : k.centers) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : k.centers) var += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    k.bw = std::max(sd, 0.05 * range) * std::pow(double(n), -0.2);
    return k;
  }

  double sample(Rng& rng) const {
    const double c = centers[rng.uniform_index(centers.size())];
    return c + bw * rng.normal();
  }

  double log_density(double x) const {
    double acc = 0.0;
    for (double c : centers) acc += normal_pdf((x - c) / bw) / bw;
    return std::log(acc / centers.size() + 1e-300);
  }
};

struct CatFreq {
  std::vector<double> prob;  // smoothed with prior count 1

  static CatFreq fit(const std::vector<int>& codes, int cardinality) {
    CatFreq f;
    std::vector<int> count(cardinality, 0);
    for (int c : codes) ++count[c];
    f.prob.resize(cardinality);
    for (int c = 0; c < cardinality; ++c) {
      f.prob[c] = (count[c] + 1.0) / (codes.size() + cardinality);
    }
    return f;
  }

  int sample(Rng& rng) const {
    double u = rng.uniform();
    for (std::size_t c = 0; c < prob.size(); ++c) {
      u -= prob[c];
      if (u <= 0.0) return static_cast<int>(c);
    }
    return static_cast<int>(prob.size()) - 1;
  }

  double log_density(int code) const { return std::log(prob[code]); }
};

/// Moment-matched symmetric-support Dirichlet over a simplex group.
struct DirichletFit {
  Eigen::VectorXd alpha;

  static DirichletFit fit(const Eigen::MatrixXd& rows) {
    const int m = static_cast<int>(rows.cols());
    Eigen::VectorXd mean = rows.colwise().mean().transpose();
    double s_acc = 0.0;
    int s_count = 0;
    for (int j = 0; j < m; ++j) {
      const double v =
          (rows.col(j).array() - mean[j]).square().sum() /
          std::max<int>(1, int(rows.rows()) - 1);
      if (v > 1e-12 && mean[j] > 1e-9 && mean[j] < 1.0 - 1e-9) {
        s_acc += mean[j] * (1.0 - mean[j]) / v - 1.0;
        ++s_count;
      }
    }
    const double s = s_count > 0 ? std::max(s_acc / s_count, double(m)) : 10.0;
    DirichletFit f;
    f.alpha = (mean * s).cwiseMax(0.05);
    return f;
  }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd g(alpha.size());
    double sum = 0.0;
    for (int j = 0; j < alpha.size(); ++j) {
      g[j] = rng.gamma(alpha[j]);
      sum += g[j];
    }
    if (sum <= 0.0) {
      g.setConstant(1.0 / alpha.size());
      return g;
    }
    return g / sum;
  }

  double log_density(const Eigen::VectorXd& x) const {
    double acc = std::lgamma(alpha.sum());
    for (int j = 0; j < alpha.size(); ++j) {
      acc -= std::lgamma(alpha[j]);
      acc += (alpha[j] - 1.0) * std::log(std::max(x[j], 1e-12));
    }
    return acc;
  }
};

}  // namespace detail

/// Tree-structured Parzen step: split the history at the gamma quantile of
/// the objective, model good/bad sets with per-dimension densities (KDE for
/// ordinal, smoothed frequencies for categorical, moment-matched Dirichlet
/// for simplex groups), sample candidates from the good density and return
/// the best density ratio l(x)/g(x).
inline TpeSuggestion tpe_suggest(const TpeState& st, const SearchSpace& space,
                                 const Eigen::MatrixXd& history_X,
                                 const Eigen::VectorXd& history_y, Rng& rng) {
  st.check();
  const int n = static_cast<int>(history_X.rows());
  if (n != history_y.size()) throw std::invalid_argument("tpe: X/y mismatch");
  if (n < st.min_history) return {random_step(space, rng), true};
  if ((history_y.array() - history_y[0]).abs().maxCoeff() < 1e-15) {
    return {random_step(space, rng), true};  // degenerate history
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return history_y[a] > history_y[b]; });
  const int n_good = std::max(1, static_cast<int>(std::floor(st.gamma * n)));
  std::vector<int> good(order.begin(), order.begin() + n_good);
  std::vector<int> bad(order.begin() + n_good, order.end());

  struct DimModel {
    std::optional<detail::Kde1d> kde_l, kde_g;
    std::optional<detail::CatFreq> cat_l, cat_g;
  };
  struct GroupModel {
    std::optional<detail::DirichletFit> dir_l, dir_g;
  };

  auto collect = [&](const std::vector<int>& idx, int dim) {
    std::vector<double> v;
    v.reserve(idx.size());
    for (int i : idx) v.push_back(history_X(i, dim));
    return v;
  };

  std::vector<DimModel> dims(space.dim());
  for (int d = 0; d < space.dim(); ++d) {
    if (space.simplex_group_of(d) >= 0) continue;
    const auto& p = space.param(d);
    if (p.kind == ParamKind::kCategorical) {
      std::vector<int> gl, gb;
      for (int i : good) gl.push_back(int(history_X(i, d)));
      for (int i : bad) gb.push_back(int(history_X(i, d)));
      dims[d].cat_l = detail::CatFreq::fit(gl, p.cardinality());
      if (!bad.empty()) dims[d].cat_g = detail::CatFreq::fit(gb, p.cardinality());
    } else {
      const double range = p.upper - p.lower;
      dims[d].kde_l = detail::Kde1d::fit(collect(good, d), range);
      if (!bad.empty()) dims[d].kde_g = detail::Kde1d::fit(collect(bad, d), range);
    }
  }
  std::vector<GroupModel> groups(space.simplex_groups().size());
  for (std::size_t g = 0; g < space.simplex_groups().size(); ++g) {
    const auto& members = space.simplex_groups()[g];
    auto rows_of = [&](const std::vector<int>& idx) {
      Eigen::MatrixXd R(idx.size(), members.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < members.size(); ++j) {
          R(i, j) = history_X(idx[i], members[j]);
        }
      }
      return R;
    };
    groups[g].dir_l = detail::DirichletFit::fit(rows_of(good));
    if (!bad.empty()) groups[g].dir_g = detail::DirichletFit::fit(rows_of(bad));
  }

  Point best_x;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < st.n_candidates; ++c) {
    Point x(space.dim());
    double score = 0.0;
    for (int d = 0; d < space.dim(); ++d) {
      if (space.simplex_group_of(d) >= 0) continue;
      const auto& p = space.param(d);
      if (p.kind == ParamKind::kCategorical) {
        const int code = dims[d].cat_l->sample(rng);
        x[d] = code;
        score += dims[d].cat_l->log_density(code);
        if (dims[d].cat_g) score -= dims[d].cat_g->log_density(code);
      } else {
        double v = std::clamp(dims[d].kde_l->sample(rng), p.lower, p.upper);
        if (p.kind == ParamKind::kInteger) v = std::round(v);
        x[d] = v;
        score += dims[d].kde_l->log_density(v);
        if (dims[d].kde_g) score -= dims[d].kde_g->log_density(v);
      }
    }
    for (std::size_t g = 0; g < space.simplex_groups().size(); ++g) {
      const auto& members = space.simplex_groups()[g];
      Eigen::VectorXd w = groups[g].dir_l->sample(rng);
      for (std::size_t j = 0; j < members.size(); ++j) x[members[j]] = w[j];
      score += groups[g].dir_l->log_density(w);
      if (groups[g].dir_g) score -= groups[g].dir_g->log_density(w);
    }
    if (score > best_score) {
      best_score = score;
      best_x = x;
    }
  }
  return {round_point(space, best_x), false};
}

}  // namespace bolt
