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

#include "bolt/pareto.hpp"
#include "bolt/spaces.hpp"

namespace bolt {

struct Individual {
  Point x;
  Eigen::VectorXd f;
  int rank = 0;
  double crowding = 0.0;
};

struct Population {
  std::vector<Individual> individuals;
  int size() const { return static_cast<int>(individuals.size()); }
};

using MultiObjectiveFn = std::function<Eigen::VectorXd(const Point&)>;

/// Nondominated-sorting rank (0 = first front) per row.
inline std::vector<int> nondominated_ranks(const Eigen::MatrixXd& Y) {
  const int n = static_cast<int>(Y.rows());
  std::vector<int> rank(n, -1);
  int assigned = 0, level = 0;
  std::vector<bool> done(n, false);
  while (assigned < n) {
    std::vector<int> front;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      bool dominated = false;
      for (int j = 0; j < n && !dominated; ++j) {
        if (j == i || done[j]) continue;
        if (dominates(Y.row(j), Y.row(i))) dominated = true;
      }
      if (!dominated) front.push_back(i);
    }
    for (int i : front) {
      rank[i] = level;
      done[i] = true;
    }
    assigned += static_cast<int>(front.size());
    ++level;
  }
  return rank;
}

/// Crowding distances within one front: boundary points get the infinity
/// sentinel, interior points the normalized cuboid side sum.
inline Eigen::VectorXd crowding_distances(const Eigen::MatrixXd& F) {
  const int n = static_cast<int>(F.rows());
  const int m = static_cast<int>(F.cols());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n <= 2) {
    d.setConstant(std::numeric_limits<double>::infinity());
    return d;
  }
  for (int k = 0; k < m; ++k) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return F(a, k) < F(b, k); });
    d[order.front()] = std::numeric_limits<double>::infinity();
    d[order.back()] = std::numeric_limits<double>::infinity();
    const double span = F(order.back(), k) - F(order.front(), k);
    if (span <= 0.0) continue;
    for (int i = 1; i + 1 < n; ++i) {
      d[order[i]] += (F(order[i + 1], k) - F(order[i - 1], k)) / span;
    }
  }
  return d;
}

namespace detail {

inline void assign_ranks_and_crowding(std::vector<Individual>& pop) {
  const int n = static_cast<int>(pop.size());
  Eigen::MatrixXd Y(n, pop[0].f.size());
  for (int i = 0; i < n; ++i) Y.row(i) = pop[i].f.transpose();
  std::vector<int> rank = nondominated_ranks(Y);
  int max_rank = 0;
  for (int i = 0; i < n; ++i) {
    pop[i].rank = rank[i];
    max_rank = std::max(max_rank, rank[i]);
  }
  for (int r = 0; r <= max_rank; ++r) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
      if (rank[i] == r) members.push_back(i);
    }
    Eigen::MatrixXd F(members.size(), Y.cols());
    for (std::size_t i = 0; i < members.size(); ++i) F.row(i) = Y.row(members[i]);
    Eigen::VectorXd cd = crowding_distances(F);
    for (std::size_t i = 0; i < members.size(); ++i) pop[members[i]].crowding = cd[i];
  }
}

inline const Individual& tournament(const std::vector<Individual>& pop, Rng& rng) {
  const auto& a = pop[rng.uniform_index(pop.size())];
  const auto& b = pop[rng.uniform_index(pop.size())];
  if (a.rank != b.rank) return a.rank < b.rank ? a : b;
  return a.crowding >= b.crowding ? a : b;
}

inline double sbx_child(double p1, double p2, double lo, double hi, double eta,
                        Rng& rng, bool first) {
  const double u = rng.uniform();
  const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                               : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
  const double c = first ? 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
                         : 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2);
  return std::clamp(c, lo, hi);
}

inline double poly_mutate(double v, double lo, double hi, double eta, Rng& rng) {
  const double u = rng.uniform();
  const double span = hi - lo;
  double delta;
  if (u < 0.5) {
    delta = std::pow(2.0 * u, 1.0 / (eta + 1.0)) - 1.0;
  } else {
    delta = 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta + 1.0));
  }
  return std::clamp(v + delta * span, lo, hi);
}

/// Bound clamping, integer rounding and simplex renormalization; a fully
/// zeroed simplex group falls back to the uniform mixture.
inline Point repair(const SearchSpace& space, Point x) {
  for (int i = 0; i < space.dim(); ++i) {
    const auto& p = space.param(i);
    x[i] = std::clamp(x[i], p.lower, p.upper);
    if (p.kind != ParamKind::kContinuous) x[i] = std::round(x[i]);
  }
  for (const auto& group : space.simplex_groups()) {
    double sum = 0.0;
    for (int idx : group) {
      x[idx] = std::max(x[idx], 0.0);
      sum += x[idx];
    }
    if (sum <= 0.0) {
      for (int idx : group) x[idx] = 1.0 / group.size();
    } else {
      for (int idx : group) x[idx] /= sum;
    }
  }
  return x;
}

}  // namespace detail

inline Population nsga2_init(const SearchSpace& space, int pop_size,
                             const MultiObjectiveFn& evaluate, Rng& rng) {
  Population pop;
  for (const auto& x : uniform_sample(space, pop_size, rng)) {
    Individual ind;
    ind.x = x;
    ind.f = evaluate(x);
    pop.individuals.push_back(std::move(ind));
  }
  detail::assign_ranks_and_crowding(pop.individuals);
  return pop;
}

/// Environmental selection: fill by nondominated rank, truncate the last
/// admitted front by crowding distance.
inline Population environmental_select(std::vector<Individual> pool, int n) {
  detail::assign_ranks_and_crowding(pool);
  std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
  });
  pool.resize(n);
  detail::assign_ranks_and_crowding(pool);
  Population out;
  out.individuals = std::move(pool);
  return out;
}

/// One generation: binary tournament on (rank, crowding), simulated binary
/// crossover (eta 15), polynomial mutation (eta 20, rate 1/dim), repair,
/// evaluation and environmental selection back to the parent size.
inline Population nsga2_generation(const Population& pop,
                                   const SearchSpace& space,
                                   const MultiObjectiveFn& evaluate, Rng& rng,
                                   double eta_c = 15.0, double eta_m = 20.0,
                                   double crossover_prob = 0.9) {
  const int n = pop.size();
  if (n < 2) throw std::invalid_argument("nsga2_generation: population < 2");
  std::vector<Individual> offspring;
  while (static_cast<int>(offspring.size()) < n) {
    const Individual& pa = detail::tournament(pop.individuals, rng);
    const Individual& pb = detail::tournament(pop.individuals, rng);
    Point c1 = pa.x, c2 = pb.x;
    if (rng.uniform() < crossover_prob) {
      for (int i = 0; i < space.dim(); ++i) {
        const auto& p = space.param(i);
        if (p.kind == ParamKind::kCategorical) {
          if (rng.uniform() < 0.5) std::swap(c1[i], c2[i]);
        } else if (rng.uniform() < 0.5) {
          const double v1 = detail::sbx_child(pa.x[i], pb.x[i], p.lower,
                                              p.upper, eta_c, rng, true);
          const double v2 = detail::sbx_child(pa.x[i], pb.x[i], p.lower,
                                              p.upper, eta_c, rng, false);
          c1[i] = v1;
          c2[i] = v2;
        }
      }
    }
    for (Point* c : {&c1, &c2}) {
      for (int i = 0; i < space.dim(); ++i) {
        if (rng.uniform() >= 1.0 / space.dim()) continue;
        const auto& p = space.param(i);
        if (p.kind == ParamKind::kCategorical) {
          (*c)[i] = static_cast<double>(rng.uniform_index(p.cardinality()));
        } else {
          (*c)[i] = detail::poly_mutate((*c)[i], p.lower, p.upper, eta_m, rng);
        }
      }
      Individual ind;
      ind.x = detail::repair(space, *c);
      ind.f = evaluate(ind.x);
      offspring.push_back(std::move(ind));
      if (static_cast<int>(offspring.size()) == n) break;
    }
  }
  std::vector<Individual> pool = pop.individuals;
  for (auto& ind : offspring) pool.push_back(std::move(ind));
  return environmental_select(std::move(pool), n);
}

}  // namespace bolt
