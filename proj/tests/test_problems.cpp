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
#include <cstdlib>

#include "bolt/synthetic.hpp"

using Catch::Approx;
using namespace bolt;

namespace {

std::filesystem::path asset_root() {
  if (const char* env = std::getenv("BOLT_ASSETS")) return env;
  return std::filesystem::path("bolt_test_assets");
}

const Catalog& catalog() {
  static Catalog cat = [] {
    auto manifest = synthetic::ensure_assets(asset_root());
    return load_catalog(manifest);
  }();
  return cat;
}

Problem problem(const std::string& name) {
  return make_problem(catalog().find(name), catalog().root);
}

}  // namespace

TEST_CASE("catalog lists the ten benchmark problems") {
  REQUIRE(catalog().entries.size() == 10);
  const int expected_dim[] = {7, 8, 8, 6, 6, 6, 128, 256, 512, 768};
  const int expected_obj[] = {1, 1, 1, 1, 3, 1, 1, 1, 1, 1};
  const char* names[] = {"HPO-synthetic",         "HPO-MF-Cont-synthetic",
                         "HPO-MF-Disc-synthetic", "DMO-synthetic",
                         "DMO-MO-synthetic",      "DMO-Het-synthetic",
                         "PO-128-synthetic",      "PO-256-synthetic",
                         "PO-512-synthetic",      "PO-768-synthetic"};
  for (int i = 0; i < 10; ++i) {
    Problem p = problem(names[i]);
    CHECK(p.space.dim() == expected_dim[i]);
    CHECK(p.objective_dim == expected_obj[i]);
  }
}

TEST_CASE("DMO space carries two simplex groups of size three") {
  Problem p = problem("DMO-synthetic");
  REQUIRE(p.space.simplex_groups().size() == 2);
  CHECK(p.space.simplex_groups()[0] == std::vector<int>({0, 1, 2}));
  CHECK(p.space.simplex_groups()[1] == std::vector<int>({3, 4, 5}));
  CHECK(p.space.effective_dim() == 4);
}

TEST_CASE("multi-fidelity spaces expose the fidelity dimension and cost") {
  Problem cont = problem("HPO-MF-Cont-synthetic");
  REQUIRE(cont.space.fidelity_index().has_value());
  CHECK(*cont.space.fidelity_index() == 7);
  Rng rng(3);
  Point x = uniform_sample(cont.space, 1, rng)[0];
  x[7] = 0.5;
  CHECK(fidelity_cost(cont, x) == Approx(0.55));
  x[7] = 1.0;
  CHECK(fidelity_cost(cont, x) == Approx(1.0));
  x[7] = 0.0;
  CHECK(fidelity_cost(cont, x) == Approx(0.1));

  Problem plain = problem("HPO-synthetic");
  Point xp = uniform_sample(plain.space, 1, rng)[0];
  CHECK_THROWS_AS(fidelity_cost(plain, xp), std::invalid_argument);
  CHECK(plain.query_cost(xp) == 1.0);
}

TEST_CASE("PO problems load the candidate table at each truncation") {
  Problem p256 = problem("PO-256-synthetic");
  REQUIRE(p256.is_tabular());
  CHECK(p256.tabular->size() == 5000);
  CHECK(p256.tabular->dim() == 256);
  Problem p768 = problem("PO-768-synthetic");
  CHECK(p768.tabular->dim() == 768);
  // Truncation keeps ids and scores.
  CHECK(p256.tabular->scores == p768.tabular->scores);
}

TEST_CASE("evaluate adds no noise at zero noise_std") {
  Problem p = make_problem(catalog().find("HPO-synthetic"), catalog().root, 0.0);
  Rng rng(5);
  Point x = uniform_sample(p.space, 1, rng)[0];
  Observation obs = p.evaluate(x, rng);
  REQUIRE(obs.values == p.true_values(x));
  CHECK(obs.cost == 1.0);

  // Same seed, same point: bit-for-bit reproducible.
  Problem noisy = problem("HPO-synthetic");
  Rng a(7), b(7);
  REQUIRE(noisy.evaluate(x, a).values == noisy.evaluate(x, b).values);
}

TEST_CASE("evaluate rejects invalid and non-candidate points") {
  Problem p = problem("DMO-synthetic");
  Rng rng(9);
  Point bad(6);
  bad << 0.5, 0.5, 0.2, 0.3, 0.3, 0.4;  // first group sums to 1.2
  CHECK_THROWS_AS(p.evaluate(bad, rng), std::invalid_argument);

  Problem po = problem("PO-128-synthetic");
  Point not_candidate = po.candidate(3);
  not_candidate[0] += 1e-3;
  CHECK_THROWS_AS(po.evaluate(not_candidate, rng), std::invalid_argument);
  Observation ok = po.evaluate(po.candidate(3), rng);
  CHECK(ok.cost == 1.0);
}

TEST_CASE("heteroscedastic noise matches the noise model by Monte Carlo") {
  Problem p = problem("DMO-Het-synthetic");
  REQUIRE(p.heteroscedastic());
  Rng rng(11);
  Point x = uniform_sample(p.space, 1, rng)[0];
  const double want = noise_sigma(*p.noise_model, x);
  const int reps = 10000;
  double mean = 0.0, m2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double v = p.evaluate(x, rng).values[0];
    const double d = v - mean;
    mean += d / (r + 1);
    m2 += d * (v - mean);
  }
  const double sd = std::sqrt(m2 / (reps - 1));
  CHECK(sd == Approx(want).epsilon(0.05));
}

TEST_CASE("discrete fidelity one equals the single-fidelity backend") {
  Problem disc = problem("HPO-MF-Disc-synthetic");
  Problem base = problem("HPO-synthetic");
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    Point x7 = uniform_sample(base.space, 1, rng)[0];
    Point x8(8);
    x8.head(7) = x7;
    x8[7] = 1.0;
    REQUIRE(disc.true_values(x8) == base.true_values(x7));
    x8[7] = 0.0;
    CHECK(disc.query_cost(x8) == Approx(0.1));
  }
}

TEST_CASE("estimate_optimum: tabular exact max and quadratic oracle") {
  Problem po = problem("PO-768-synthetic");
  OptimumEstimate est = estimate_optimum(po);
  CHECK(est.f_star == po.tabular->scores.maxCoeff());
  CHECK(est.method == "exhaustive-tabular");

  // Constructed quadratic -|x-c|^2 has a known maximum of 0.
  Eigen::VectorXd c(2);
  c << 0.37, 0.61;
  std::vector<MlpLayer> layers;
  // relu(x), relu(-x) features in each coordinate reproduce |x - c|
  // piecewise-linearly; easier: train a small emulator on the quadratic.
  Rng rng(3);
  const int n = 1500;
  Eigen::MatrixXd X(n, 2), Y(n, 1);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform();
    X(i, 1) = rng.uniform();
    Y(i, 0) = -((X(i, 0) - c[0]) * (X(i, 0) - c[0]) +
                (X(i, 1) - c[1]) * (X(i, 1) - c[1]));
  }
  FitConfig cfg;
  cfg.seed = 5;
  cfg.epochs = 150;
  cfg.dropout_rate = 0.0;
  auto [em, report] = fit_emulator(X, Y, cfg);
  Problem p;
  p.name = "quadratic";
  p.space = SearchSpace({ParamSpec::continuous("a", 0.0, 1.0),
                         ParamSpec::continuous("b", 0.0, 1.0)});
  p.emulator = std::make_shared<MlpEmulator>(em);
  OptimumEstimate quad = estimate_optimum(p, 17, 100);
  // The emulator approximates the quadratic; its max should be near 0 and
  // at least as high as a fine grid scan of the emulator itself.
  double grid_best = -1e300;
  for (double a = 0; a <= 1.0; a += 0.02) {
    for (double b = 0; b <= 1.0; b += 0.02) {
      Point x(2);
      x << a, b;
      grid_best = std::max(grid_best, em.predict(x)[0]);
    }
  }
  CHECK(quad.f_star >= grid_best - 1e-9);
}

TEST_CASE("estimate_optimum dominates random search on every problem") {
  for (const auto& e : catalog().entries) {
    if (e.kind == "dmo_mo") continue;
    if (e.name.find("PO-") == 0 && e.name != "PO-128-synthetic") continue;
    Problem p = problem(e.name);
    const int density = p.space.dim() >= 8 ? 7 : 11;
    OptimumEstimate est = estimate_optimum(p, density, 60);
    Rng rng(17);
    double best = -1e300;
    if (p.is_tabular()) {
      for (int t = 0; t < 10000; ++t) {
        const int id = static_cast<int>(rng.uniform_index(p.tabular->size()));
        best = std::max(best, p.tabular->scores[id]);
      }
    } else {
      auto pts = uniform_sample(p.space, 10000, rng);
      for (const auto& x : pts) best = std::max(best, p.true_values(x)[0]);
    }
    INFO(e.name);
    CHECK(est.f_star >= best - 1e-9);
  }
}

TEST_CASE("reference point formula and grid-refinement monotonicity") {
  Problem p = problem("DMO-MO-synthetic");
  ReferencePoint coarse = reference_point(p, 9);
  ReferencePoint fine = reference_point(p, 17);
  REQUIRE(coarse.ref.size() == 3);
  CHECK(!coarse.degenerate);
  for (int k = 0; k < 3; ++k) {
    CHECK(fine.ref[k] <= coarse.ref[k] + 1e-12);
  }
  Problem single = problem("DMO-synthetic");
  CHECK_THROWS_AS(reference_point(single, 9), std::invalid_argument);
}

TEST_CASE("cached optimum estimates exist for every problem") {
  const auto optima_path = catalog().root / "optima.json";
  REQUIRE(std::filesystem::exists(optima_path));
  std::ifstream in(optima_path);
  nlohmann::json optima;
  in >> optima;
  for (const auto& e : catalog().entries) {
    REQUIRE(optima.contains(e.name));
    if (e.kind == "dmo_mo") {
      CHECK(optima[e.name].contains("hv_star"));
      CHECK(optima[e.name].contains("reference"));
    } else {
      CHECK(optima[e.name].contains("f_star"));
    }
  }
}
