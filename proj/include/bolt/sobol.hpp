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

#include <boost/random/sobol.hpp>

#include "bolt/math.hpp"
#include "bolt/spaces.hpp"

namespace bolt {

/// First n points of the Sobol sequence on the unit cube, with the
/// conventional all-zeros leading point dropped. Deterministic.
inline Eigen::MatrixXd sobol_unit(int dim, int n) {
  if (dim < 1 || n < 1) throw std::invalid_argument("sobol_unit: dim, n >= 1");
  boost::random::sobol gen(dim);
  const double denom = static_cast<double>(boost::random::sobol::max()) + 1.0;
  Eigen::MatrixXd out(n, dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < dim; ++c) out(r, c) = gen() / denom;
  }
  return out;
}

/// Sobol points mapped to the space bounds; discrete coordinates rounded.
/// Simplex-constrained spaces are unsupported (no box parameterization).
inline std::vector<Point> sobol_sample(const SearchSpace& space, int n) {
  if (space.has_simplex()) {
    throw std::invalid_argument(
        "sobol_sample: unsupported space (simplex group present)");
  }
  const Eigen::MatrixXd u = sobol_unit(space.dim(), n);
  std::vector<Point> out;
  out.reserve(n);
  for (int r = 0; r < n; ++r) {
    Point x(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
      const auto& p = space.param(i);
      x[i] = p.lower + u(r, i) * (p.upper - p.lower);
    }
    out.push_back(round_point(space, x));
  }
  return out;
}

/// Standard-normal quasi-MC base samples: inverse-CDF transform of Sobol
/// points. Rows are samples, columns are dimensions.
inline Eigen::MatrixXd qmc_normal(int dim, int n) {
  Eigen::MatrixXd u = sobol_unit(dim, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < dim; ++c) u(r, c) = normal_quantile(u(r, c));
  }
  return u;
}

}  // namespace bolt
