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

#include "bolt/emulator_fit.hpp"
#include "bolt/problems.hpp"

// Reference-synthetic assets: every benchmark problem is runnable offline
// against emulators fitted to the documented landscapes below. Problem names
// carry a -synthetic suffix in the shipped catalog so results are never
// confused with numbers obtained on externally released assets.

namespace bolt::synthetic {

/// Sum of Gaussian bumps plus a mild global trend on the unit cube.
/// Deterministic: bump centers and heights come from the fixed seed.
class BumpLandscape {
 public:
  BumpLandscape(int dim, int n_bumps, double width, std::uint64_t seed)
      : dim_(dim), width_(width) {
    Rng rng(seed);
    for (int b = 0; b < n_bumps; ++b) {
      Eigen::VectorXd c(dim);
      for (int j = 0; j < dim; ++j) c[j] = rng.uniform();
      centers_.push_back(c);
      heights_.push_back(0.25 + 0.75 * rng.uniform());
    }
  }

  double operator()(const Eigen::VectorXd& z) const {
    double v = 0.0;
    for (std::size_t b = 0; b < centers_.size(); ++b) {
      v += heights_[b] *
           std::exp(-(z - centers_[b]).squaredNorm() / (2.0 * width_ * width_));
    }
    const Eigen::VectorXd mid = Eigen::VectorXd::Constant(dim_, 0.5);
    v += 0.15 * (1.0 - (z - mid).squaredNorm() / dim_);
    return v;
  }

 private:
  int dim_;
  double width_;
  std::vector<Eigen::VectorXd> centers_;
  std::vector<double> heights_;
};

namespace detail {

inline Eigen::VectorXd normalize_to_unit(const SearchSpace& space,
                                         const Point& x) {
  Eigen::VectorXd z(space.dim());
  for (int j = 0; j < space.dim(); ++j) {
    const auto& p = space.param(j);
    z[j] = (x[j] - p.lower) / (p.upper - p.lower);
  }
  return z;
}

inline void fit_and_save(const SearchSpace& space,
                         const std::function<Eigen::VectorXd(const Point&)>& g,
                         int n_outputs, std::vector<std::string> names,
                         int n_train, std::uint64_t seed,
                         const std::filesystem::path& path) {
  Rng rng(seed);
  auto pts = uniform_sample(space, n_train, rng);
  Eigen::MatrixXd X(n_train, space.dim());
  Eigen::MatrixXd Y(n_train, n_outputs);
  for (int i = 0; i < n_train; ++i) {
    X.row(i) = pts[i].transpose();
    Y.row(i) = g(pts[i]).transpose();
  }
  FitConfig cfg;
  cfg.seed = seed + 1;
  cfg.epochs = 160;
  cfg.hidden_width = 64;
  cfg.dropout_rate = 0.05;
  auto [em, report] = fit_emulator(X, Y, cfg, std::move(names));
  std::filesystem::create_directories(path.parent_path());
  em.save(path.string());
}

}  // namespace detail

/// Scaled score that lands in the typical benchmark range.
inline double squash_score(double v) {
  return 0.15 + 0.7 / (1.0 + std::exp(-2.0 * (v - 0.6)));
}

inline void make_hpo_assets(const std::filesystem::path& dir) {
  const SearchSpace base = hpo_space("none");
  BumpLandscape high(7, 6, 0.35, 7001);
  BumpLandscape low_extra(7, 4, 0.3, 7002);

  auto g_high = [&](const Point& x) {
    const Eigen::VectorXd z = detail::normalize_to_unit(base, x);
    return Eigen::VectorXd::Constant(1, squash_score(high(z)));
  };
  auto g_low = [&](const Point& x) {
    const Eigen::VectorXd z = detail::normalize_to_unit(base, x);
    return Eigen::VectorXd::Constant(
        1, squash_score(0.85 * high(z) + 0.25 * low_extra(z) - 0.05));
  };
  if (!std::filesystem::exists(dir / "hpo_high.json")) {
    detail::fit_and_save(base, g_high, 1, {"math500"}, 4000, 11,
                         dir / "hpo_high.json");
  }
  if (!std::filesystem::exists(dir / "hpo_low.json")) {
    detail::fit_and_save(base, g_low, 1, {"math500"}, 4000, 13,
                         dir / "hpo_low.json");
  }

  // Continuous token fidelity: the landscape sharpens toward the target
  // fidelity and low fidelity carries a smooth bias.
  if (!std::filesystem::exists(dir / "hpo_mf_cont.json")) {
    const SearchSpace mf = hpo_space("cont");
    BumpLandscape bias(7, 3, 0.4, 7003);
    auto g_mf = [&](const Point& x) {
      const Point head = x.head(7);
      const double s = x[7];
      const Eigen::VectorXd z = detail::normalize_to_unit(base, head);
      const double v = high(z) * (0.55 + 0.45 * s) + 0.2 * (1.0 - s) * bias(z);
      return Eigen::VectorXd::Constant(1, squash_score(v));
    };
    detail::fit_and_save(mf, g_mf, 1, {"math500"}, 6000, 17,
                         dir / "hpo_mf_cont.json");
  }
}

inline void make_dmo_assets(const std::filesystem::path& dir) {
  const SearchSpace space = dmo_space();
  if (!std::filesystem::exists(dir / "dmo.json")) {
    std::vector<BumpLandscape> per_output;
    for (int o = 0; o < 3; ++o) {
      per_output.emplace_back(6, 5, 0.3, 7100 + o);
    }
    auto g = [&](const Point& x) {
      Eigen::VectorXd out(3);
      for (int o = 0; o < 3; ++o) out[o] = squash_score(per_output[o](x));
      return out;
    };
    detail::fit_and_save(space, g, 3, {"ifeval", "math500", "mbpp_plus"}, 4000,
                         19, dir / "dmo.json");
  }

  // Heteroscedastic noise: sigma(x) = 0.002 + 0.12 x0 x3 measured at 50
  // mixtures, kernel-regressed with cross-validated gamma.
  if (!std::filesystem::exists(dir / "dmo_noise.json")) {
    Rng rng(23);
    auto pts = uniform_sample(space, 50, rng);
    Eigen::MatrixXd P(50, 6);
    Eigen::VectorXd sig(50);
    for (int i = 0; i < 50; ++i) {
      P.row(i) = pts[i].transpose();
      sig[i] = 0.002 + 0.12 * pts[i][0] * pts[i][3];
    }
    auto [nm, cv] = fit_noise_model(P, sig, {0.01, 0.1, 1.0, 10.0}, 5);
    std::filesystem::create_directories(dir);
    save_noise_model((dir / "dmo_noise.json").string(), nm);
  }
}

/// Candidate-set asset: 5000 embeddings of dimension 768 with variance
/// decaying across dimensions (prefix truncations stay informative) and a
/// smooth score, exp of the negative weighted squared distance to a
/// designated best row. Embeddings are quantized to 1e-6 before scoring so
/// the stored file is the exact ground truth.
inline void make_po_assets(const std::filesystem::path& dir, int n = 5000,
                           int d = 768) {
  if (std::filesystem::exists(dir / "po.csv")) return;
  Rng rng(29);
  TabularObjective tab;
  tab.embeddings.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double scale = 1.0 / (1.0 + j / 96.0);
      tab.embeddings(i, j) = std::round(rng.normal() * scale * 1e6) / 1e6;
    }
  }
  const int best_row = 137;
  Eigen::VectorXd w(d);
  for (int j = 0; j < d; ++j) w[j] = 1.0 / (1.0 + j / 24.0);
  Eigen::VectorXd dist(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd diff =
        tab.embeddings.row(i) - tab.embeddings.row(best_row);
    dist[i] = std::sqrt((diff.array().square() * w.transpose().array()).sum());
  }
  std::vector<double> sorted(dist.data(), dist.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double rho = std::max(0.35 * sorted[n / 2], 1e-6);
  tab.scores.resize(n);
  for (int i = 0; i < n; ++i) {
    tab.scores[i] = std::exp(-dist[i] * dist[i] / (2.0 * rho * rho));
  }
  tab.ids.reserve(n);
  for (int i = 0; i < n; ++i) tab.ids.push_back("prompt_" + std::to_string(i));
  tab.check();
  std::filesystem::create_directories(dir);
  save_tabular_csv((dir / "po.csv").string(), tab);
}

inline nlohmann::json catalog_json() {
  nlohmann::json problems;
  problems["HPO-synthetic"] = {
      {"kind", "hpo"}, {"assets", {{"emulator", "synthetic/hpo_high.json"}}}};
  problems["HPO-MF-Cont-synthetic"] = {
      {"kind", "hpo_mf_cont"},
      {"assets", {{"emulator", "synthetic/hpo_mf_cont.json"}}}};
  problems["HPO-MF-Disc-synthetic"] = {
      {"kind", "hpo_mf_disc"},
      {"assets",
       {{"emulator_high", "synthetic/hpo_high.json"},
        {"emulator_low", "synthetic/hpo_low.json"}}}};
  problems["DMO-synthetic"] = {{"kind", "dmo"},
                               {"assets", {{"emulator", "synthetic/dmo.json"}}}};
  problems["DMO-MO-synthetic"] = {
      {"kind", "dmo_mo"}, {"assets", {{"emulator", "synthetic/dmo.json"}}}};
  problems["DMO-Het-synthetic"] = {
      {"kind", "dmo_het"},
      {"assets",
       {{"emulator", "synthetic/dmo.json"},
        {"noise_model", "synthetic/dmo_noise.json"}}}};
  for (int dth : {128, 256, 512, 768}) {
    nlohmann::json e = {{"kind", "po"},
                        {"assets", {{"tabular", "synthetic/po.csv"}}}};
    if (dth < 768) e["truncate_dim"] = dth;
    problems["PO-" + std::to_string(dth) + "-synthetic"] = e;
  }
  return {{"problems", problems}};
}

/// Generate any missing synthetic assets plus the catalog manifest and the
/// cached optimum estimates. Idempotent; content is deterministic.
inline std::filesystem::path ensure_assets(const std::filesystem::path& root) {
  const auto dir = root / "synthetic";
  std::filesystem::create_directories(dir);
  make_hpo_assets(dir);
  make_dmo_assets(dir);
  make_po_assets(dir);
  const auto manifest = root / "catalog.json";
  if (!std::filesystem::exists(manifest)) {
    std::ofstream out(manifest);
    out << catalog_json().dump(2);
  }

  const auto optima_path = root / "optima.json";
  if (!std::filesystem::exists(optima_path)) {
    Catalog cat = load_catalog(manifest);
    nlohmann::json optima;
    for (const auto& e : cat.entries) {
      Problem p = make_problem(e, cat.root);
      if (e.kind == "dmo_mo") {
        OptimumEstimate est = estimate_optimum(p, 17);
        optima[e.name] = {{"hv_star", est.hv_star},
                          {"reference", std::vector<double>(
                                            est.reference.data(),
                                            est.reference.data() +
                                                est.reference.size())},
                          {"method", est.method}};
      } else {
        const int density = p.space.dim() >= 8 ? 9 : 17;
        OptimumEstimate est = estimate_optimum(p, density);
        optima[e.name] = {{"f_star", est.f_star}, {"method", est.method}};
      }
    }
    std::ofstream out(optima_path);
    out << optima.dump(2);
  }
  return manifest;
}

}  // namespace bolt::synthetic
