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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bolt/rng.hpp"

namespace bolt {

using Point = Eigen::VectorXd;

inline constexpr double kSimplexTol = 1e-9;

enum class ParamKind { kContinuous, kInteger, kCategorical };

inline std::string to_string(ParamKind k) {
  switch (k) {
    case ParamKind::kContinuous: return "continuous";
    case ParamKind::kInteger: return "integer";
    case ParamKind::kCategorical: return "categorical";
  }
  return "?";
}

inline ParamKind param_kind_from_string(const std::string& s) {
  if (s == "continuous") return ParamKind::kContinuous;
  if (s == "integer") return ParamKind::kInteger;
  if (s == "categorical") return ParamKind::kCategorical;
  throw std::invalid_argument("unknown parameter kind '" + s + "'");
}

/// One dimension of a search space. Categorical parameters use dense codes
/// 0..C-1 (lower = 0, upper = C-1); any label mapping lives in `labels`.
struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kContinuous;
  double lower = 0.0;
  double upper = 1.0;
  bool log_scaled = false;  // stored normalized to [0,1] of a log-scale range
  std::vector<std::string> labels;

  static ParamSpec continuous(std::string name, double lo, double hi,
                              bool log_scaled = false) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::kContinuous;
    p.lower = lo;
    p.upper = hi;
    p.log_scaled = log_scaled;
    p.check();
    return p;
  }

  static ParamSpec integer(std::string name, long lo, long hi) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::kInteger;
    p.lower = static_cast<double>(lo);
    p.upper = static_cast<double>(hi);
    p.check();
    return p;
  }

  static ParamSpec categorical(std::string name, int cardinality,
                               std::vector<std::string> labels = {}) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = ParamKind::kCategorical;
    p.lower = 0.0;
    p.upper = static_cast<double>(cardinality - 1);
    p.labels = std::move(labels);
    p.check();
    return p;
  }

  int cardinality() const {
    return static_cast<int>(upper - lower) + 1;
  }

  void check() const {
    if (kind == ParamKind::kCategorical) {
      if (cardinality() < 2) {
        throw std::invalid_argument("categorical '" + name +
                                    "' needs cardinality >= 2");
      }
    } else if (!(lower < upper)) {
      throw std::invalid_argument("parameter '" + name +
                                  "' needs lower < upper");
    }
  }
};

struct Violation {
  std::string what;   // "bounds", "integrality", "simplex-group-<g>", ...
  int index = -1;     // offending coordinate or group index
};

/// Ordered parameter list with optional simplex groups (coordinates that must
/// be nonnegative and sum to one) and an optional fidelity dimension.
class SearchSpace {
 public:
  SearchSpace() = default;

  SearchSpace(std::vector<ParamSpec> params,
              std::vector<std::vector<int>> simplex_groups = {},
              std::optional<int> fidelity_index = std::nullopt)
      : params_(std::move(params)),
        simplex_groups_(std::move(simplex_groups)),
        fidelity_index_(fidelity_index) {
    std::vector<int> group_of(params_.size(), -1);
    for (std::size_t g = 0; g < simplex_groups_.size(); ++g) {
      if (simplex_groups_[g].size() < 2) {
        throw std::invalid_argument("simplex group needs >= 2 members");
      }
      for (int idx : simplex_groups_[g]) {
        if (idx < 0 || idx >= static_cast<int>(params_.size())) {
          throw std::invalid_argument("simplex group index out of range");
        }
        if (params_[idx].kind != ParamKind::kContinuous) {
          throw std::invalid_argument(
              "simplex groups may only contain continuous parameters");
        }
        if (group_of[idx] != -1) {
          throw std::invalid_argument("simplex groups must be disjoint");
        }
        group_of[idx] = static_cast<int>(g);
      }
    }
    if (fidelity_index_ &&
        (*fidelity_index_ < 0 ||
         *fidelity_index_ >= static_cast<int>(params_.size()))) {
      throw std::invalid_argument("fidelity index out of range");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
      params_[i].check();
      switch (params_[i].kind) {
        case ParamKind::kContinuous: continuous_inds_.push_back(int(i)); break;
        case ParamKind::kInteger: discrete_inds_.push_back(int(i)); break;
        case ParamKind::kCategorical: categorical_inds_.push_back(int(i)); break;
      }
    }
    group_of_ = std::move(group_of);
  }

  int dim() const { return static_cast<int>(params_.size()); }

  /// Dimensions minus one degree of freedom per simplex group.
  int effective_dim() const {
    return dim() - static_cast<int>(simplex_groups_.size());
  }

  const std::vector<ParamSpec>& params() const { return params_; }
  const ParamSpec& param(int i) const { return params_.at(i); }
  const std::vector<std::vector<int>>& simplex_groups() const {
    return simplex_groups_;
  }
  std::optional<int> fidelity_index() const { return fidelity_index_; }
  const std::vector<int>& continuous_inds() const { return continuous_inds_; }
  const std::vector<int>& discrete_inds() const { return discrete_inds_; }
  const std::vector<int>& categorical_inds() const { return categorical_inds_; }

  /// Simplex group containing dimension i, or -1.
  int simplex_group_of(int i) const { return group_of_[i]; }

  bool has_simplex() const { return !simplex_groups_.empty(); }

  Eigen::VectorXd lower_bounds() const {
    Eigen::VectorXd lb(dim());
    for (int i = 0; i < dim(); ++i) lb[i] = params_[i].lower;
    return lb;
  }

  Eigen::VectorXd upper_bounds() const {
    Eigen::VectorXd ub(dim());
    for (int i = 0; i < dim(); ++i) ub[i] = params_[i].upper;
    return ub;
  }

  std::vector<Violation> validate(const Point& x) const {
    std::vector<Violation> out;
    if (x.size() != dim()) {
      out.push_back({"dimension", static_cast<int>(x.size())});
      return out;
    }
    for (int i = 0; i < dim(); ++i) {
      const auto& p = params_[i];
      if (!std::isfinite(x[i]) || x[i] < p.lower || x[i] > p.upper) {
        out.push_back({"bounds", i});
        continue;
      }
      if (p.kind != ParamKind::kContinuous && x[i] != std::floor(x[i])) {
        out.push_back({"integrality", i});
      }
    }
    for (std::size_t g = 0; g < simplex_groups_.size(); ++g) {
      double sum = 0.0;
      bool neg = false;
      for (int idx : simplex_groups_[g]) {
        sum += x[idx];
        neg = neg || x[idx] < 0.0;
      }
      if (neg || std::abs(sum - 1.0) > kSimplexTol) {
        out.push_back({"simplex-group-" + std::to_string(g),
                       static_cast<int>(g)});
      }
    }
    return out;
  }

  bool is_valid(const Point& x) const { return validate(x).empty(); }

 private:
  std::vector<ParamSpec> params_;
  std::vector<std::vector<int>> simplex_groups_;
  std::optional<int> fidelity_index_;
  std::vector<int> continuous_inds_, discrete_inds_, categorical_inds_;
  std::vector<int> group_of_;
};

/// Nonnegative vectors summing to one, drawn from a symmetric Dirichlet.
inline std::vector<Eigen::VectorXd> dirichlet_sample(int group_size,
                                                     double alpha, int n,
                                                     Rng& rng) {
  if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    Eigen::VectorXd v(group_size);
    double sum = 0.0;
    for (int i = 0; i < group_size; ++i) {
      v[i] = rng.gamma(alpha);
      sum += v[i];
    }
    if (sum <= 0.0) {
      v.setConstant(1.0 / group_size);
    } else {
      v /= sum;
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// Uniform draw: box-uniform per dimension, symmetric Dirichlet(1) per
/// simplex group, uniform codes for integer/categorical dimensions.
inline std::vector<Point> uniform_sample(const SearchSpace& space, int n,
                                         Rng& rng) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::vector<Point> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    Point x(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
      const auto& p = space.param(i);
      if (space.simplex_group_of(i) >= 0) continue;
      if (p.kind == ParamKind::kContinuous) {
        x[i] = rng.uniform(p.lower, p.upper);
      } else {
        x[i] = static_cast<double>(rng.uniform_int(
            static_cast<long>(p.lower), static_cast<long>(p.upper)));
      }
    }
    for (const auto& group : space.simplex_groups()) {
      auto v = dirichlet_sample(static_cast<int>(group.size()), 1.0, 1, rng);
      for (std::size_t j = 0; j < group.size(); ++j) x[group[j]] = v[0][j];
    }
    out.push_back(std::move(x));
  }
  return out;
}

/// Clamp to bounds, round discrete coordinates to the nearest valid code and
/// renormalize simplex groups (negatives clamped to zero first). Groups that
/// already satisfy the simplex invariant are left untouched, which makes the
/// operation exactly idempotent.
inline Point round_point(const SearchSpace& space, const Point& x_in) {
  if (x_in.size() != space.dim()) {
    throw std::invalid_argument("round_point: dimension mismatch");
  }
  Point x = x_in;
  for (int i = 0; i < space.dim(); ++i) {
    const auto& p = space.param(i);
    if (space.simplex_group_of(i) >= 0) continue;
    x[i] = std::clamp(x[i], p.lower, p.upper);
    if (p.kind != ParamKind::kContinuous) x[i] = std::round(x[i]);
  }
  for (std::size_t g = 0; g < space.simplex_groups().size(); ++g) {
    const auto& group = space.simplex_groups()[g];
    double sum = 0.0;
    bool ok = true;
    for (int idx : group) {
      if (x[idx] < 0.0) ok = false;
      sum += x[idx];
    }
    if (ok && std::abs(sum - 1.0) <= kSimplexTol) continue;
    sum = 0.0;
    for (int idx : group) {
      x[idx] = std::max(x[idx], 0.0);
      sum += x[idx];
    }
    if (sum <= 0.0) {
      throw std::domain_error("round_point: simplex group " +
                              std::to_string(g) + " degenerate (all zero)");
    }
    for (int idx : group) x[idx] /= sum;
  }
  return x;
}

inline void to_json(nlohmann::json& j, const SearchSpace& space) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : space.params()) {
    nlohmann::json jp = {{"name", p.name},
                         {"kind", to_string(p.kind)},
                         {"lower", p.lower},
                         {"upper", p.upper},
                         {"log_scaled", p.log_scaled}};
    if (!p.labels.empty()) jp["labels"] = p.labels;
    params.push_back(jp);
  }
  j = {{"params", params}, {"simplex_groups", space.simplex_groups()}};
  if (space.fidelity_index()) {
    j["fidelity_index"] = *space.fidelity_index();
  } else {
    j["fidelity_index"] = nullptr;
  }
}

inline void from_json(const nlohmann::json& j, SearchSpace& space) {
  std::vector<ParamSpec> params;
  for (const auto& jp : j.at("params")) {
    ParamSpec p;
    p.name = jp.at("name").get<std::string>();
    p.kind = param_kind_from_string(jp.at("kind").get<std::string>());
    p.lower = jp.at("lower").get<double>();
    p.upper = jp.at("upper").get<double>();
    p.log_scaled = jp.value("log_scaled", false);
    if (jp.contains("labels")) p.labels = jp["labels"].get<std::vector<std::string>>();
    params.push_back(std::move(p));
  }
  std::vector<std::vector<int>> groups;
  if (j.contains("simplex_groups")) {
    groups = j["simplex_groups"].get<std::vector<std::vector<int>>>();
  }
  std::optional<int> fid;
  if (j.contains("fidelity_index") && !j["fidelity_index"].is_null()) {
    fid = j["fidelity_index"].get<int>();
  }
  space = SearchSpace(std::move(params), std::move(groups), fid);
}

}  // namespace bolt
