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

#include "bolt/sobol.hpp"
#include "test_oracles.hpp"

using namespace bolt;

TEST_CASE("sobol_unit matches the direction-number reference exactly") {
  for (int dim : {1, 2, 3, 6}) {
    const int n = 64;
    Eigen::MatrixXd got = sobol_unit(dim, n);
    Eigen::MatrixXd want = oracle::sobol_reference(dim, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < dim; ++c) {
        REQUIRE(got(r, c) == want(r, c));
      }
    }
  }
}

TEST_CASE("sobol_unit first points after the leading-zero drop") {
  Eigen::MatrixXd one = sobol_unit(1, 1);
  CHECK(one(0, 0) == 0.5);

  Eigen::MatrixXd four = sobol_unit(2, 4);
  const double expect[4][2] = {
      {0.5, 0.5}, {0.75, 0.25}, {0.25, 0.75}, {0.375, 0.375}};
  for (int r = 0; r < 4; ++r) {
    CHECK(four(r, 0) == expect[r][0]);
    CHECK(four(r, 1) == expect[r][1]);
  }
}

TEST_CASE("sobol_sample is deterministic") {
  SearchSpace space({ParamSpec::continuous("a", -2.0, 3.0),
                     ParamSpec::integer("b", 0, 9)});
  auto first = sobol_sample(space, 32);
  auto second = sobol_sample(space, 32);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    REQUIRE(first[i] == second[i]);
  }
  for (const auto& x : first) REQUIRE(space.validate(x).empty());
}

TEST_CASE("sobol_sample rejects simplex spaces") {
  std::vector<ParamSpec> params;
  for (int i = 0; i < 3; ++i) {
    params.push_back(ParamSpec::continuous("w" + std::to_string(i), 0.0, 1.0));
  }
  SearchSpace space(std::move(params), {{0, 1, 2}});
  CHECK_THROWS_AS(sobol_sample(space, 4), std::invalid_argument);
}

TEST_CASE("sobol star discrepancy decreases with n on the unit square") {
  const double d16 = oracle::star_discrepancy_2d(sobol_unit(2, 16));
  const double d256 = oracle::star_discrepancy_2d(sobol_unit(2, 256));
  CHECK(d256 < d16);
}

TEST_CASE("qmc_normal base samples are standardized") {
  Eigen::MatrixXd z = qmc_normal(3, 512);
  REQUIRE(z.allFinite());
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(z.col(c).mean()) < 0.02);
    const double var = z.col(c).squaredNorm() / z.rows();
    CHECK(var == Catch::Approx(1.0).margin(0.05));
  }
}
