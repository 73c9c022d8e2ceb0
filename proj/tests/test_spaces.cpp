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

#include "bolt/spaces.hpp"
#include "test_oracles.hpp"

using Catch::Approx;
using namespace bolt;

namespace {

SearchSpace one_simplex_space() {
  std::vector<ParamSpec> params;
  for (int i = 0; i < 3; ++i) {
    params.push_back(ParamSpec::continuous("w" + std::to_string(i), 0.0, 1.0));
  }
  return SearchSpace(std::move(params), {{0, 1, 2}});
}

// Mixed 7-dimensional space: learning-rate-style normalized continuous,
// three small integers, one wide integer, one categorical.
SearchSpace mixed7_space() {
  std::vector<ParamSpec> params;
  params.push_back(ParamSpec::continuous("learning_rate", 0.0, 1.0, true));
  params.push_back(ParamSpec::integer("batch_size_exp", 2, 4));
  params.push_back(ParamSpec::integer("rank_exp", 2, 5));
  params.push_back(ParamSpec::integer("alpha_exp", 2, 5));
  params.push_back(ParamSpec::continuous("dropout", 0.0, 1.0));
  params.push_back(ParamSpec::integer("layers", 1, 30));
  params.push_back(ParamSpec::categorical("target_modules", 4));
  return SearchSpace(std::move(params));
}

}  // namespace

TEST_CASE("uniform_sample respects simplex groups by construction") {
  auto space = one_simplex_space();
  Rng rng(7);
  auto pts = uniform_sample(space, 1000, rng);
  for (const auto& x : pts) {
    REQUIRE(std::abs(x.sum() - 1.0) <= 1e-9);
    REQUIRE(x.minCoeff() >= 0.0);
  }
}

TEST_CASE("uniform_sample on a mixed space yields valid points") {
  auto space = mixed7_space();
  Rng rng(11);
  auto pts = uniform_sample(space, 10, rng);
  REQUIRE(pts.size() == 10);
  for (const auto& x : pts) {
    CHECK(space.validate(x).empty());
    const double cat = x[6];
    CHECK(cat == std::floor(cat));
    CHECK(cat >= 0.0);
    CHECK(cat <= 3.0);
  }
}

TEST_CASE("uniform_sample mean matches the analytic mean on [0,1]") {
  SearchSpace space({ParamSpec::continuous("x", 0.0, 1.0)});
  Rng rng(3);
  auto pts = uniform_sample(space, 100000, rng);
  double mean = 0.0;
  for (const auto& x : pts) mean += x[0];
  mean /= pts.size();
  CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("dirichlet_sample normalizes and matches analytic moments") {
  Rng rng(5);
  auto one = dirichlet_sample(3, 1.0, 1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].sum() == Approx(1.0).margin(1e-12));

  auto many = dirichlet_sample(3, 1.0, 100000, rng);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : many) mean += v;
  mean /= many.size();
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - 1.0 / 3.0) < 0.01);
}

TEST_CASE("dirichlet_sample marginals match analytic distributions") {
  Rng rng(9);
  // Group size 2, alpha 1: first coordinate is Uniform(0,1).
  {
    auto draws = dirichlet_sample(2, 1.0, 100000, rng);
    std::vector<double> first;
    for (const auto& v : draws) first.push_back(v[0]);
    const double d = oracle::ks_distance(first, [](double x) { return x; });
    CHECK(d < 1.6276 / std::sqrt(100000.0));  // KS critical value at 1%
  }
  // Group size 3, alpha 1: marginal is Beta(1,2), F(x) = 2x - x^2.
  {
    auto draws = dirichlet_sample(3, 1.0, 100000, rng);
    std::vector<double> first;
    for (const auto& v : draws) first.push_back(v[0]);
    const double d = oracle::ks_distance(
        first, [](double x) { return 2.0 * x - x * x; });
    CHECK(d < 1.6276 / std::sqrt(100000.0));
  }
}

TEST_CASE("round_point rounds, clamps and renormalizes") {
  auto mixed = mixed7_space();
  Point x = Point::Zero(7);
  x << 0.4, 3.0, 2.0, 2.0, 0.5, 12.6, 3.4;
  Point r = round_point(mixed, x);
  CHECK(r[5] == 13.0);
  CHECK(r[6] == 3.0);

  auto simplex = one_simplex_space();
  Point s(3);
  s << 0.5, 0.6, 0.1;
  Point rs = round_point(simplex, s);
  CHECK(rs[0] == Approx(0.5 / 1.2).epsilon(1e-12));
  CHECK(rs[1] == Approx(0.6 / 1.2).epsilon(1e-12));
  CHECK(rs[2] == Approx(0.1 / 1.2).epsilon(1e-12));
}

TEST_CASE("round_point is exactly idempotent") {
  auto simplex = one_simplex_space();
  auto mixed = mixed7_space();
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Point s(3);
    for (int i = 0; i < 3; ++i) s[i] = rng.uniform(-0.5, 2.0);
    if (s.maxCoeff() <= 0.0) continue;
    Point r1 = round_point(simplex, s);
    Point r2 = round_point(simplex, r1);
    REQUIRE(r1 == r2);

    Point m(7);
    for (int i = 0; i < 7; ++i) m[i] = rng.uniform(-5.0, 35.0);
    Point m1 = round_point(mixed, m);
    Point m2 = round_point(mixed, m1);
    REQUIRE(m1 == m2);
  }
}

TEST_CASE("round_point rejects a fully clamped simplex group") {
  auto simplex = one_simplex_space();
  Point s(3);
  s << -0.2, -0.1, 0.0;
  CHECK_THROWS_AS(round_point(simplex, s), std::domain_error);
}

TEST_CASE("validate reports each violated invariant") {
  auto mixed = mixed7_space();
  Rng rng(2);
  Point ok = uniform_sample(mixed, 1, rng)[0];
  CHECK(mixed.validate(ok).empty());

  auto simplex = one_simplex_space();
  Point bad(3);
  bad << 0.5, 0.42, 0.1;  // sums to 1.02
  auto v = simplex.validate(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].what == "simplex-group-0");

  Point cat_bad = ok;
  cat_bad[6] = 5.0;  // cardinality is 4
  auto vc = mixed.validate(cat_bad);
  REQUIRE(vc.size() == 1);
  CHECK(vc[0].what == "bounds");
}

TEST_CASE("uniform_sample always passes validate") {
  auto simplex = one_simplex_space();
  auto mixed = mixed7_space();
  Rng rng(13);
  for (const auto& x : uniform_sample(simplex, 500, rng)) {
    REQUIRE(simplex.validate(x).empty());
  }
  for (const auto& x : uniform_sample(mixed, 500, rng)) {
    REQUIRE(mixed.validate(x).empty());
  }
}

TEST_CASE("effective dimension subtracts one per simplex group") {
  std::vector<ParamSpec> params;
  for (int i = 0; i < 6; ++i) {
    params.push_back(ParamSpec::continuous("x" + std::to_string(i), 0.0, 1.0));
  }
  SearchSpace space(std::move(params), {{0, 1, 2}, {3, 4, 5}});
  CHECK(space.dim() == 6);
  CHECK(space.effective_dim() == 4);
}

TEST_CASE("search space serializes to and from JSON") {
  std::vector<ParamSpec> params;
  params.push_back(ParamSpec::continuous("lr", 0.0, 1.0, true));
  params.push_back(ParamSpec::integer("layers", 1, 30));
  params.push_back(ParamSpec::categorical("modules", 4, {"a", "b", "c", "d"}));
  params.push_back(ParamSpec::continuous("fid", 0.0, 1.0));
  SearchSpace space(std::move(params), {}, 3);

  nlohmann::json j = space;
  SearchSpace back = j.get<SearchSpace>();
  REQUIRE(back.dim() == 4);
  CHECK(back.param(0).log_scaled);
  CHECK(back.param(2).kind == ParamKind::kCategorical);
  CHECK(back.param(2).cardinality() == 4);
  CHECK(back.param(2).labels.size() == 4);
  REQUIRE(back.fidelity_index().has_value());
  CHECK(*back.fidelity_index() == 3);
  CHECK(nlohmann::json(back) == j);
}

TEST_CASE("search space construction rejects malformed specs") {
  CHECK_THROWS(SearchSpace({ParamSpec::continuous("a", 0.0, 1.0)}, {{0, 0}}));
  CHECK_THROWS(SearchSpace(
      {ParamSpec::continuous("a", 0.0, 1.0), ParamSpec::integer("b", 0, 3)},
      {{0, 1}}));
  CHECK_THROWS(SearchSpace({ParamSpec::continuous("a", 0.0, 1.0)}, {}, 5));
  CHECK_THROWS(ParamSpec::continuous("bad", 1.0, 1.0));
  CHECK_THROWS(ParamSpec::categorical("bad", 1));
}
