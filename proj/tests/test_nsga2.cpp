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

#include "bolt/nsga2.hpp"

using Catch::Approx;
using namespace bolt;

namespace {

SearchSpace simplex6() {
  std::vector<ParamSpec> params;
  for (int i = 0; i < 6; ++i) {
    params.push_back(ParamSpec::continuous("x" + std::to_string(i), 0.0, 1.0));
  }
  return SearchSpace(std::move(params), {{0, 1, 2}, {3, 4, 5}});
}

Eigen::VectorXd toy_objectives(const Point& x) {
  Eigen::VectorXd f(2);
  f << x[0] + 0.5 * x[3], x[2] + 0.5 * x[5];
  return f;
}

}  // namespace

TEST_CASE("crowding distance: boundary sentinel and hand-checked interior") {
  Eigen::MatrixXd F(3, 2);
  F << 0.0, 1.0, 0.4, 0.5, 1.0, 0.0;
  Eigen::VectorXd d = crowding_distances(F);
  CHECK(std::isinf(d[0]));
  CHECK(std::isinf(d[2]));
  // Interior: (1-0)/(1-0) per objective = 2.0 total.
  CHECK(d[1] == Approx(2.0).margin(1e-12));
}

TEST_CASE("environmental selection never drops rank-1 for rank-2") {
  std::vector<Individual> pool;
  // Four rank-1 points on a front, four dominated copies.
  for (int i = 0; i < 4; ++i) {
    Individual a;
    a.x = Point::Zero(1);
    a.f = Eigen::VectorXd(2);
    a.f << 0.2 + 0.2 * i, 1.0 - 0.2 * i;
    pool.push_back(a);
    Individual b = a;
    b.f = a.f.array() - 0.1;
    pool.push_back(b);
  }
  Population sel = environmental_select(pool, 4);
  Eigen::MatrixXd Y(8, 2);
  for (int i = 0; i < 8; ++i) Y.row(i) = pool[i].f.transpose();
  auto ranks = nondominated_ranks(Y);
  // All four selected points must be the rank-0 originals.
  for (const auto& ind : sel.individuals) {
    bool is_rank0 = false;
    for (int i = 0; i < 8; ++i) {
      if (ranks[i] == 0 && (pool[i].f - ind.f).norm() < 1e-12) is_rank0 = true;
    }
    CHECK(is_rank0);
  }
}

TEST_CASE("nsga2 generation preserves size and feasibility") {
  auto space = simplex6();
  Rng rng(7);
  Population pop = nsga2_init(space, 20, toy_objectives, rng);
  REQUIRE(pop.size() == 20);
  for (int gen = 0; gen < 5; ++gen) {
    pop = nsga2_generation(pop, space, toy_objectives, rng);
    REQUIRE(pop.size() == 20);
    for (const auto& ind : pop.individuals) {
      REQUIRE(space.validate(ind.x).empty());
    }
  }
}

TEST_CASE("nsga2 advances toward the known toy front") {
  auto space = simplex6();
  Rng rng(3);
  Population pop = nsga2_init(space, 30, toy_objectives, rng);
  const auto front_hv = [&](const Population& p) {
    Eigen::MatrixXd Y(p.size(), 2);
    for (int i = 0; i < p.size(); ++i) Y.row(i) = p.individuals[i].f.transpose();
    Eigen::VectorXd ref = Eigen::VectorXd::Constant(2, -0.1);
    return hypervolume_filtered(Y, ref);
  };
  const double before = front_hv(pop);
  for (int gen = 0; gen < 15; ++gen) {
    pop = nsga2_generation(pop, space, toy_objectives, rng);
  }
  CHECK(front_hv(pop) >= before);
}
