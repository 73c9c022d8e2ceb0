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

#include <catch2/catch_amalgamated.hpp>

#include "bolt/mlhgp.hpp"

using Catch::Approx;
using namespace bolt;

TEST_CASE("mlhgp with zero EM iterations equals the homoscedastic fit") {
  Rng data_rng(4);
  const int n = 30;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = data_rng.uniform();
    y[i] = std::cos(4.0 * X(i, 0)) + 0.02 * data_rng.normal();
  }
  Rng rng_a(9), rng_b(9);
  auto res = mlhgp_fit(X, y, KernelSpec::all_rbf(1, true), 0, rng_a);
  GpModel plain =
      fit_gp(X, y, KernelSpec::all_rbf(1, true), NoiseSpec::inferred(), 2, rng_b);
  Eigen::MatrixXd Xq(3, 1);
  Xq << 0.1, 0.5, 0.9;
  auto [m1, c1] = res.mean_model.posterior(Xq);
  auto [m2, c2] = plain.posterior(Xq);
  for (int i = 0; i < 3; ++i) {
    CHECK(m1[i] == Approx(m2[i]).margin(1e-12));
    CHECK(c1(i, i) == Approx(c2(i, i)).margin(1e-12));
  }
}

TEST_CASE("mlhgp learns a flat noise surface on homoscedastic data") {
  Rng data_rng(7);
  const int n = 80;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i / double(n - 1);
    y[i] = std::sin(3.0 * X(i, 0)) + 0.05 * data_rng.normal();
  }
  Rng rng(1);
  auto res = mlhgp_fit(X, y, KernelSpec::all_rbf(1, true), 3, rng);
  REQUIRE(!res.diverged);
  double lo = 1e300, hi = 0.0;
  for (double xq = 0.05; xq <= 0.96; xq += 0.1) {
    Eigen::MatrixXd q(1, 1);
    q << xq;
    const double v = res.noise_variance_at(q);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(std::sqrt(hi / lo) < 3.0);  // max/min predicted sigma ratio
}

TEST_CASE("mlhgp orders noise between quiet and loud regions") {
  Rng data_rng(13);
  const int n = 120;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i / double(n - 1);
    const double sigma = X(i, 0) < 0.5 ? 0.001 : 0.1;
    y[i] = 0.5 * X(i, 0) + sigma * data_rng.normal();
  }
  Rng rng(2);
  auto res = mlhgp_fit(X, y, KernelSpec::all_rbf(1, true), 5, rng);
  REQUIRE(!res.diverged);
  Eigen::MatrixXd quiet(1, 1), loud(1, 1);
  quiet << 0.25;
  loud << 0.75;
  CHECK(res.noise_variance_at(loud) > res.noise_variance_at(quiet));
}
