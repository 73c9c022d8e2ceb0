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

#include "bolt/tpe.hpp"
#include "test_oracles.hpp"

using namespace bolt;

namespace {

SearchSpace unit1d() {
  return SearchSpace({ParamSpec::continuous("x", 0.0, 1.0)});
}

}  // namespace

TEST_CASE("random_step is valid, reproducible and uniform") {
  auto space = unit1d();
  Rng a(3), b(3);
  REQUIRE(random_step(space, a) == random_step(space, b));

  Rng rng(5);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(random_step(space, rng)[0]);
  const double d = oracle::ks_distance(draws, [](double x) { return x; });
  CHECK(d < 1.6276 / std::sqrt(100000.0));
}

TEST_CASE("tpe falls back to random sampling on short or flat histories") {
  auto space = unit1d();
  Rng rng(7);
  Eigen::MatrixXd X(4, 1);
  X << 0.1, 0.4, 0.6, 0.9;
  Eigen::VectorXd y(4);
  y << 0.5, 0.2, 0.8, 0.1;
  TpeState st;
  auto s1 = tpe_suggest(st, space, X, y, rng);
  CHECK(s1.random_fallback);

  Eigen::MatrixXd Xn(12, 1);
  Eigen::VectorXd yn = Eigen::VectorXd::Constant(12, 0.3);
  for (int i = 0; i < 12; ++i) Xn(i, 0) = i / 11.0;
  auto s2 = tpe_suggest(st, space, Xn, yn, rng);
  CHECK(s2.random_fallback);
}

TEST_CASE("tpe concentrates on the good cluster") {
  auto space = unit1d();
  // Top-quantile points cluster near 0.2.
  const int n = 40;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  Rng data_rng(1);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = data_rng.uniform();
    y[i] = -std::abs(X(i, 0) - 0.2);
  }
  TpeState st;
  int near = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    auto s = tpe_suggest(st, space, X, y, rng);
    REQUIRE(!s.random_fallback);
    if (std::abs(s.x[0] - 0.2) <= 0.1) ++near;
  }
  CHECK(near >= 8);
}

TEST_CASE("tpe respects the minimum good-set size") {
  auto space = unit1d();
  Eigen::MatrixXd X(10, 1);
  Eigen::VectorXd y(10);
  Rng data_rng(2);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i / 9.0;
    y[i] = data_rng.uniform();
  }
  TpeState tiny;
  tiny.gamma = 0.05;  // floor(0.5) = 0 -> minimum-1 rule
  Rng rng(3);
  auto s = tpe_suggest(tiny, space, X, y, rng);
  CHECK(!s.random_fallback);
  CHECK(space.validate(s.x).empty());

  TpeState big;
  big.gamma = 0.99;
  auto s2 = tpe_suggest(big, space, X, y, rng);
  CHECK(!s2.random_fallback);
}

TEST_CASE("tpe follows a dominant categorical code") {
  SearchSpace space({ParamSpec::categorical("c", 4)});
  const int n = 40;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  Rng data_rng(5);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = double(i % 4);
    y[i] = (int(X(i, 0)) == 2) ? 1.0 + 0.01 * data_rng.uniform()
                               : 0.1 * data_rng.uniform();
  }
  TpeState st;
  Rng rng(11);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    auto s = tpe_suggest(st, space, X, y, rng);
    if (s.x[0] == 2.0) ++hits;
  }
  CHECK(hits > 70);
}

TEST_CASE("tpe suggestions always validate, including simplex spaces") {
  std::vector<ParamSpec> params;
  params.push_back(ParamSpec::continuous("a", -1.0, 2.0));
  params.push_back(ParamSpec::integer("b", 0, 7));
  params.push_back(ParamSpec::categorical("c", 3));
  for (int i = 0; i < 3; ++i) {
    params.push_back(ParamSpec::continuous("w" + std::to_string(i), 0.0, 1.0));
  }
  SearchSpace space(std::move(params), {{3, 4, 5}});
  Rng data_rng(9);
  const int n = 30;
  auto pts = uniform_sample(space, n, data_rng);
  Eigen::MatrixXd X(n, space.dim());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X.row(i) = pts[i].transpose();
    y[i] = pts[i][0] + pts[i][3];
  }
  TpeState st;
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    auto s = tpe_suggest(st, space, X, y, rng);
    REQUIRE(space.validate(s.x).empty());
  }
}

TEST_CASE("tpe selection is uniform when labels carry no signal") {
  SearchSpace space({ParamSpec::categorical("c", 4)});
  TpeState st;
  const int trials = 10000;
  std::vector<int> counts(4, 0);
  Rng rng(21);
  for (int t = 0; t < trials; ++t) {
    // Balanced codes, exchangeable random objective values.
    const int n = 20;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = double(i % 4);
      y[i] = rng.uniform();
    }
    auto s = tpe_suggest(st, space, X, y, rng);
    ++counts[int(s.x[0])];
  }
  const double p = 0.25;
  const double sd = std::sqrt(trials * p * (1 - p));
  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(counts[c] - trials * p) <= 3.0 * sd);
  }
}
