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

#include "bolt/pareto.hpp"
#include "bolt/problems.hpp"
#include "bolt/record.hpp"
#include "bolt/stats.hpp"

namespace bolt {

inline constexpr double kRegretFloor = 1e-8;  // log floor ~= -18.42

/// Per-row log simple regret: log(f_star - running max of noiseless values),
/// clamped at 1e-8.
inline std::vector<double> log_simple_regret(const RunRecord& rec,
                                             double f_star) {
  if (rec.objective_dim != 1) {
    throw std::invalid_argument("log_simple_regret: single-objective only");
  }
  std::vector<double> out;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : rec.rows) {
    best = std::max(best, r.noiseless[0]);
    if (best > f_star + 1e-9) {
      throw std::invalid_argument(
          "log_simple_regret: observed noiseless value exceeds f_star");
    }
    out.push_back(std::log(std::max(f_star - best, kRegretFloor)));
  }
  return out;
}

/// Per-step regret f_star - f(x_t~) where x_t~ is the best point by NOISY
/// observations so far; not monotone in general.
inline std::vector<double> per_step_simple_regret(const RunRecord& rec,
                                                  double f_star) {
  if (rec.objective_dim != 1) {
    throw std::invalid_argument("per_step_simple_regret: single-objective only");
  }
  std::vector<double> out;
  double best_noisy = -std::numeric_limits<double>::infinity();
  double f_at_best = 0.0;
  for (const auto& r : rec.rows) {
    if (r.values[0] > best_noisy) {
      best_noisy = r.values[0];
      f_at_best = r.noiseless[0];
    }
    if (f_at_best > f_star + 1e-9) {
      throw std::invalid_argument(
          "per_step_simple_regret: noiseless value exceeds f_star");
    }
    out.push_back(f_star - f_at_best);
  }
  return out;
}

/// Inference regret f_star - f(x_hat) at the recorded posterior-mean argmax
/// points. Methods without a surrogate (no recorded incumbents) are
/// rejected.
inline std::vector<double> inference_regret(const RunRecord& rec,
                                            const Problem& problem,
                                            double f_star) {
  std::vector<double> out;
  bool any = false;
  for (const auto& r : rec.rows) {
    if (r.incumbent_mean_point.size() == 0) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    any = true;
    const double f = problem.true_values(r.incumbent_mean_point)[0];
    out.push_back(f_star - f);
  }
  if (!any) {
    throw std::invalid_argument(
        "inference_regret: no posterior-mean incumbents recorded "
        "(method without a surrogate?)");
  }
  return out;
}

/// Log hypervolume difference series of a multi-objective record.
inline std::vector<double> log_hv_difference_series(const RunRecord& rec,
                                                    double hv_star,
                                                    const Eigen::VectorXd& ref) {
  Eigen::MatrixXd Y(rec.rows.size(), rec.objective_dim);
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    Y.row(i) = rec.rows[i].noiseless.transpose();
  }
  return log_hv_difference(Y, hv_star, ref).values;
}

struct Summary {
  std::vector<double> axis;  // iteration index or cost grid
  std::vector<double> mean;
  std::vector<double> lo;  // 95% t interval
  std::vector<double> hi;
};

/// Per-index mean with 95% Student-t confidence intervals across seeds.
inline Summary aggregate(const std::vector<std::vector<double>>& series) {
  if (series.size() < 2) {
    throw std::invalid_argument("aggregate: need >= 2 seeds");
  }
  std::size_t len = series[0].size();
  for (const auto& s : series) {
    if (s.size() != len) {
      throw std::invalid_argument(
          "aggregate: mismatched lengths (align multi-fidelity runs on a "
          "cost grid first)");
    }
  }
  Summary out;
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> vals;
    for (const auto& s : series) {
      if (!std::isnan(s[i])) vals.push_back(s[i]);
    }
    out.axis.push_back(double(i));
    if (vals.size() < 2) {
      const double v = vals.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : vals[0];
      out.mean.push_back(v);
      out.lo.push_back(v);
      out.hi.push_back(v);
      continue;
    }
    const double m = sample_mean(vals);
    const double half = t_ci_half_width(vals);
    out.mean.push_back(m);
    out.lo.push_back(m - half);
    out.hi.push_back(m + half);
  }
  return out;
}

/// Staircase alignment of per-seed series onto a uniform cost grid
/// (previous-value interpolation), then the usual t-interval aggregation.
inline Summary aggregate_on_cost_grid(
    const std::vector<std::vector<double>>& series,
    const std::vector<std::vector<double>>& cum_costs, double budget,
    int bins = 200) {
  if (series.size() != cum_costs.size() || series.size() < 2) {
    throw std::invalid_argument("aggregate_on_cost_grid: need >= 2 seeds");
  }
  std::vector<std::vector<double>> aligned(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    aligned[s].resize(bins);
    for (int b = 0; b < bins; ++b) {
      const double c = budget * (b + 1) / double(bins);
      double value = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = 0; i < series[s].size(); ++i) {
        if (cum_costs[s][i] <= c) value = series[s][i];
      }
      aligned[s][b] = value;
    }
  }
  Summary out = aggregate(aligned);
  for (int b = 0; b < bins; ++b) out.axis[b] = budget * (b + 1) / double(bins);
  return out;
}

struct FidelityAllocation {
  std::vector<double> fidelities;        // per row, in query order
  std::vector<double> bin_edges;         // histogram bin edges
  std::vector<std::vector<double>> cumulative_proportion;  // per row, per bin
};

/// Fidelity of each query plus the cumulative proportion per fidelity bin.
inline FidelityAllocation fidelity_allocation(const RunRecord& rec,
                                              int bins = 10) {
  FidelityAllocation out;
  for (const auto& r : rec.rows) {
    if (!r.fidelity) {
      throw std::invalid_argument("fidelity_allocation: non-MF record");
    }
    out.fidelities.push_back(*r.fidelity);
  }
  for (int b = 0; b <= bins; ++b) out.bin_edges.push_back(b / double(bins));
  std::vector<int> counts(bins, 0);
  int total = 0;
  for (double f : out.fidelities) {
    int b = std::min(int(f * bins), bins - 1);
    ++counts[b];
    ++total;
    std::vector<double> prop(bins);
    for (int i = 0; i < bins; ++i) prop[i] = counts[i] / double(total);
    out.cumulative_proportion.push_back(std::move(prop));
  }
  return out;
}

}  // namespace bolt
