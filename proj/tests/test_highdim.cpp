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

#include "bolt/highdim.hpp"
#include "bolt/stats.hpp"

using Catch::Approx;
using namespace bolt;

TEST_CASE("knn basics: full pool, ties, and the center itself") {
  Eigen::MatrixXd E(5, 1);
  E << 0.0, 1.0, 2.0, 3.0, 4.0;
  auto all = knn(E, 2, 5);
  REQUIRE(all.size() == 5);
  CHECK(all[0] == 2);  // the center is its own nearest neighbor

  // Ties broken by lower id: ids 1 and 3 are equidistant from 2.
  auto three = knn(E, 2, 3);
  REQUIRE(three == std::vector<int>({2, 1, 3}));

  // Collinear points with the center excluded: the nearer endpoint wins.
  Eigen::MatrixXd C(3, 1);
  C << 0.0, 0.6, 1.0;
  auto nearest = knn(C, 1, 1, {1});
  REQUIRE(nearest == std::vector<int>({2}));  // |1.0-0.6| < |0.0-0.6|

  CHECK_THROWS_AS(knn(C, 1, 3, {1}), std::invalid_argument);
}

TEST_CASE("dturbo_update reproduces the doubling and halving traces") {
  TrustRegionState s = TrustRegionState::init(5014);
  CHECK(s.k_init == 2507);
  CHECK(s.k == 2507);
  // Three consecutive improvements double and cap at N.
  s = dturbo_update(s, true);
  s = dturbo_update(s, true);
  CHECK(s.k == 2507);
  s = dturbo_update(s, true);
  CHECK(s.k == 5014);
  CHECK(s.succ_streak == 0);

  // Ten consecutive failures halve.
  TrustRegionState h = TrustRegionState::init(5014);
  h.k = 100;
  for (int i = 0; i < 10; ++i) h = dturbo_update(h, false);
  CHECK(h.k == 50);
}

TEST_CASE("alternating outcomes never move k") {
  TrustRegionState s = TrustRegionState::init(1000);
  const int k0 = s.k;
  for (int i = 0; i < 50; ++i) s = dturbo_update(s, i % 2 == 0);
  CHECK(s.k == k0);
}

TEST_CASE("streak reset: 2 successes then 9 failures leave k unchanged") {
  TrustRegionState s = TrustRegionState::init(5014);
  const int k0 = s.k;
  s = dturbo_update(s, true);
  s = dturbo_update(s, true);
  for (int i = 0; i < 9; ++i) s = dturbo_update(s, false);
  CHECK(s.k == k0);
  CHECK(s.fail_streak == 9);
}

TEST_CASE("k always stays inside [k_min, N]") {
  Rng rng(3);
  TrustRegionState s = TrustRegionState::init(777);
  for (int i = 0; i < 2000; ++i) {
    s = dturbo_update(s, rng.uniform() < 0.5);
    REQUIRE(s.k >= s.k_min);
    REQUIRE(s.k <= s.n_total);
  }
  // Floor persists under continued failures.
  TrustRegionState f = TrustRegionState::init(64);
  for (int i = 0; i < 300; ++i) f = dturbo_update(f, false);
  CHECK(f.k == f.k_min);
}

TEST_CASE("halving count matches the integer-halving oracle") {
  // 2507 -> 1253 -> 626 -> 313 -> 156 -> 78 -> 39 -> 19 -> 9 -> 8.
  CHECK(halvings_to_floor(2507, 8) == 9);
  CHECK(halvings_to_floor(8, 8) == 0);
  CHECK(halvings_to_floor(16, 8) == 1);
  // tau_fail per stage: ceil(stage_budget / halvings).
  const int stage_budget = 100;
  CHECK((stage_budget + 9 - 1) / 9 == 12);
}

TEST_CASE("hesbo_project identity, signed bins and linearity") {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Random(6, 4);
  // Identity assignment.
  auto ident = hesbo_project({0, 1, 2, 3}, {1, 1, 1, 1}, 4, Z);
  REQUIRE(ident == Z);

  // Two dims in one bin with opposite signs.
  auto combo = hesbo_project({0, 0, 1, 1}, {1, -1, 1, 1}, 2, Z);
  REQUIRE(combo.col(0) == (Z.col(0) - Z.col(1)).eval());
  REQUIRE(combo.col(1) == (Z.col(2) + Z.col(3)).eval());

  // Linearity.
  Eigen::MatrixXd Z2 = Eigen::MatrixXd::Random(6, 4);
  Eigen::MatrixXd a =
      hesbo_project({0, 0, 1, 1}, {1, -1, 1, -1}, 2, 2.0 * Z - 3.0 * Z2);
  Eigen::MatrixXd b =
      2.0 * hesbo_project({0, 0, 1, 1}, {1, -1, 1, -1}, 2, Z) -
      3.0 * hesbo_project({0, 0, 1, 1}, {1, -1, 1, -1}, 2, Z2);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(hesbo_project({0, 0, 5, 1}, {1, 1, 1, 1}, 2, Z),
                  std::invalid_argument);
}

TEST_CASE("random projection roughly preserves distance ordering") {
  Rng rng(7);
  const int n = 60, d = 32;
  Eigen::MatrixXd Z(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) Z(i, j) = rng.normal();
  }
  SubspaceState ss = SubspaceState::init(d, 8, 200, rng);
  Eigen::MatrixXd P = hesbo_project(ss.bin_of, ss.sign_of, ss.target_dim, Z);
  std::vector<double> d_orig, d_proj;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d_orig.push_back((Z.row(i) - Z.row(j)).norm());
      d_proj.push_back((P.row(i) - P.row(j)).norm());
    }
  }
  Eigen::Map<Eigen::VectorXd> vo(d_orig.data(), d_orig.size());
  Eigen::Map<Eigen::VectorXd> vp(d_proj.data(), d_proj.size());
  auto rho = spearman_rho(vo, vp);
  REQUIRE(rho.has_value());
  CHECK(*rho > 0.3);
}

TEST_CASE("subspace state covers every dim and doubles up to the cap") {
  Rng rng(11);
  SubspaceState ss = SubspaceState::init(768, 16, 200, rng);
  CHECK(ss.target_dim == 16);
  CHECK(ss.n_stages == 7);  // 16,32,64,128,256,512,768
  std::vector<int> seen(16, 0);
  for (int i = 0; i < 768; ++i) {
    REQUIRE(ss.bin_of[i] >= 0);
    REQUIRE(ss.bin_of[i] < 16);
    REQUIRE((ss.sign_of[i] == 1 || ss.sign_of[i] == -1));
    ++seen[ss.bin_of[i]];
  }
  for (int b = 0; b < 16; ++b) CHECK(seen[b] > 0);

  std::vector<int> schedule = {16};
  std::vector<int> signs_before = ss.sign_of;
  while (ss.advance_stage(rng)) schedule.push_back(ss.target_dim);
  CHECK(schedule == std::vector<int>({16, 32, 64, 128, 256, 512, 768}));
  CHECK(ss.sign_of == signs_before);  // signs preserved across splits
  for (int i = 0; i < 768; ++i) {
    REQUIRE(ss.bin_of[i] >= 0);
    REQUIRE(ss.bin_of[i] < ss.target_dim);
  }
}

namespace {

// Smooth synthetic tabular landscape: score decreases with distance from a
// designated optimum row.
struct ToyTabular {
  Eigen::MatrixXd Z;
  Eigen::VectorXd score;
  int best_id;

  static ToyTabular make(int n, int d, Rng& rng) {
    ToyTabular t;
    t.Z.resize(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) t.Z(i, j) = rng.normal();
    }
    const Eigen::VectorXd target = t.Z.row(n / 3).transpose();
    t.score.resize(n);
    for (int i = 0; i < n; ++i) {
      t.score[i] = -((t.Z.row(i).transpose() - target).norm());
    }
    t.score.maxCoeff(&t.best_id);
    return t;
  }
};

}  // namespace

TEST_CASE("dturbo_step returns the forced choice for a one-candidate region") {
  Rng rng(5);
  ToyTabular toy = ToyTabular::make(20, 3, rng);
  TabularHistory hist;
  // Evaluate everything except id 7.
  for (int i = 0; i < 20; ++i) {
    if (i == 7) continue;
    hist.ids.push_back(i);
  }
  hist.values.resize(hist.ids.size());
  for (std::size_t i = 0; i < hist.ids.size(); ++i) {
    hist.values[i] = toy.score[hist.ids[i]];
  }
  TrustRegionState state = TrustRegionState::init(20);
  Eigen::Index arg;
  hist.values.maxCoeff(&arg);
  state.best_id = hist.ids[arg];
  state.best_value = toy.score[state.best_id];
  AcquisitionSpec spec;
  spec.kind = AcqKind::kLogNei;
  spec.mc_samples = 32;
  auto choice = dturbo_step(hist, toy.Z, state, spec, NoiseSpec::fixed(0.001),
                            1, 1, rng);
  REQUIRE(choice.ids == std::vector<int>({7}));
}

TEST_CASE("dturbo finds the optimum of a smooth tabular landscape") {
  int found = 0;
  for (int seed = 0; seed < 5; ++seed) {
    Rng rng(1000 + seed);
    ToyTabular toy = ToyTabular::make(200, 4, rng);
    TabularHistory hist;
    // Random initial ids.
    std::set<int> used;
    while (hist.ids.size() < 10) {
      const int id = static_cast<int>(rng.uniform_index(200));
      if (used.insert(id).second) hist.ids.push_back(id);
    }
    hist.values.resize(10);
    for (int i = 0; i < 10; ++i) hist.values[i] = toy.score[hist.ids[i]];
    TrustRegionState state = TrustRegionState::init(200);
    Eigen::Index arg;
    hist.values.maxCoeff(&arg);
    state.best_id = hist.ids[arg];
    state.best_value = hist.values[arg];
    AcquisitionSpec spec;
    spec.kind = AcqKind::kLogNei;
    spec.mc_samples = 32;
    for (int it = 0; it < 80; ++it) {
      auto choice = dturbo_step(hist, toy.Z, state, spec,
                                NoiseSpec::fixed(0.001), 1, 1, rng);
      const int id = choice.ids[0];
      const double value = toy.score[id] + 0.001 * rng.normal();
      hist.ids.push_back(id);
      hist.values.conservativeResize(hist.values.size() + 1);
      hist.values[hist.values.size() - 1] = value;
      const bool improved = value > state.best_value;
      if (improved) {
        state.best_value = value;
        state.best_id = id;
      }
      state = dturbo_update(state, improved);
    }
    if (std::find(hist.ids.begin(), hist.ids.end(), toy.best_id) !=
        hist.ids.end()) {
      ++found;
    }
  }
  CHECK(found >= 4);
}

TEST_CASE("terminal-stage dbaxus matches dturbo exactly") {
  Rng data_rng(9);
  ToyTabular toy = ToyTabular::make(60, 5, data_rng);
  TabularHistory hist;
  for (int i = 0; i < 12; ++i) hist.ids.push_back(i * 5);
  hist.values.resize(12);
  for (int i = 0; i < 12; ++i) hist.values[i] = toy.score[hist.ids[i]];
  TrustRegionState state = TrustRegionState::init(60);
  Eigen::Index arg;
  hist.values.maxCoeff(&arg);
  state.best_id = hist.ids[arg];
  state.best_value = hist.values[arg];

  SubspaceState ss;
  ss.d_full = 5;
  ss.target_dim = 5;
  ss.bin_of = {0, 1, 2, 3, 4};
  ss.sign_of = {1, 1, 1, 1, 1};

  AcquisitionSpec spec;
  spec.kind = AcqKind::kLogNei;
  spec.mc_samples = 32;
  Rng ra(42), rb(42);
  auto a = dturbo_step(hist, toy.Z, state, spec, NoiseSpec::fixed(0.001), 1, 3, ra);
  auto b = dbaxus_step(hist, toy.Z, ss, state, spec, NoiseSpec::fixed(0.001), 1, 3, rb);
  REQUIRE(a.ids == b.ids);
}

TEST_CASE("selected ids are never previously evaluated") {
  Rng rng(13);
  ToyTabular toy = ToyTabular::make(50, 3, rng);
  TabularHistory hist;
  for (int i = 0; i < 30; ++i) hist.ids.push_back(i);
  hist.values.resize(30);
  for (int i = 0; i < 30; ++i) hist.values[i] = toy.score[i];
  TrustRegionState state = TrustRegionState::init(50);
  state.k = 10;
  Eigen::Index arg;
  hist.values.maxCoeff(&arg);
  state.best_id = hist.ids[arg];
  state.best_value = hist.values[arg];
  AcquisitionSpec spec;
  spec.kind = AcqKind::kUcb;
  spec.beta = 2.0;
  auto choice = dturbo_step(hist, toy.Z, state, spec, NoiseSpec::fixed(0.001),
                            1, 5, rng);
  REQUIRE(choice.ids.size() == 5);
  for (int id : choice.ids) {
    CHECK(std::find(hist.ids.begin(), hist.ids.end(), id) == hist.ids.end());
  }
}
