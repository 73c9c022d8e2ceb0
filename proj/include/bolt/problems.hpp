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

#include <filesystem>
#include <map>
#include <memory>

#include "bolt/emulator.hpp"
#include "bolt/noise_model.hpp"
#include "bolt/pareto.hpp"
#include "bolt/spaces.hpp"
#include "bolt/tabular.hpp"

namespace bolt {

struct Observation {
  Point point;
  Eigen::VectorXd values;
  double cost = 1.0;
  std::optional<double> fidelity;
  int iteration = 0;
  double wall_time = 0.0;
};

struct OptimumEstimate {
  double f_star = 0.0;            // single-objective
  double hv_star = 0.0;           // multi-objective
  Eigen::VectorXd reference;      // multi-objective reference point
  bool multi_objective = false;
  std::string method;
};

/// Search-space builders for the benchmark families.
inline SearchSpace hpo_space(const std::string& fidelity = "none") {
  std::vector<ParamSpec> params;
  params.push_back(ParamSpec::continuous("learning_rate", 0.0, 1.0, true));
  params.push_back(ParamSpec::integer("batch_size_exp", 2, 4));
  params.push_back(ParamSpec::integer("lora_rank_exp", 2, 5));
  params.push_back(ParamSpec::integer("lora_alpha_exp", 2, 5));
  params.push_back(ParamSpec::continuous("lora_dropout", 0.0, 1.0, true));
  params.push_back(ParamSpec::integer("lora_layers", 1, 30));
  params.push_back(ParamSpec::categorical(
      "lora_target_modules", 4,
      {"q_proj,v_proj", "q_proj,v_proj,k_proj,o_proj",
       "gate_proj,up_proj,down_proj", "all-linear"}));
  if (fidelity == "none") return SearchSpace(std::move(params));
  if (fidelity == "cont") {
    params.push_back(ParamSpec::continuous("token_fidelity", 0.0, 1.0));
    return SearchSpace(std::move(params), {}, 7);
  }
  if (fidelity == "disc") {
    params.push_back(ParamSpec::categorical("model_fidelity", 2, {"low", "high"}));
    return SearchSpace(std::move(params), {}, 7);
  }
  throw std::invalid_argument("hpo_space: unknown fidelity kind");
}

inline SearchSpace dmo_space() {
  std::vector<ParamSpec> params;
  const char* names[6] = {"if_prop1", "math_prop1", "code_prop1",
                          "if_prop2", "math_prop2", "code_prop2"};
  for (const char* n : names) params.push_back(ParamSpec::continuous(n, 0.0, 1.0));
  return SearchSpace(std::move(params), {{0, 1, 2}, {3, 4, 5}});
}

inline SearchSpace po_space(const TabularObjective& tab) {
  std::vector<ParamSpec> params;
  for (int j = 0; j < tab.dim(); ++j) {
    const double lo = tab.embeddings.col(j).minCoeff();
    const double hi = tab.embeddings.col(j).maxCoeff();
    params.push_back(ParamSpec::continuous("e" + std::to_string(j), lo,
                                           hi > lo ? hi : lo + 1e-9));
  }
  return SearchSpace(std::move(params));
}

/// One benchmark instance: a search space, a deterministic backend (emulator
/// or tabular), the observation-noise structure and the query-cost model.
class Problem {
 public:
  enum class Backend { kEmulator, kEmulatorPair, kTabular };
  enum class Reduce { kIdentity, kMean, kSelect };

  std::string name;
  SearchSpace space;
  Backend backend = Backend::kEmulator;
  Reduce reduce = Reduce::kIdentity;
  int select_index = 0;
  int objective_dim = 1;
  double noise_std = 0.001;
  bool multi_fidelity = false;
  std::shared_ptr<MlpEmulator> emulator;       // primary / high fidelity
  std::shared_ptr<MlpEmulator> emulator_low;   // discrete low fidelity
  std::shared_ptr<TabularObjective> tabular;
  std::shared_ptr<NoiseModel> noise_model;     // heteroscedastic sigma(x)

  bool heteroscedastic() const { return noise_model != nullptr; }
  bool is_tabular() const { return backend == Backend::kTabular; }

  double fidelity_of(const Point& x) const {
    if (!space.fidelity_index()) {
      throw std::invalid_argument(name + ": not a multi-fidelity problem");
    }
    return x[*space.fidelity_index()];
  }

  /// Deterministic backend output at a valid point.
  Eigen::VectorXd true_values(const Point& x) const {
    switch (backend) {
      case Backend::kTabular: {
        return Eigen::VectorXd::Constant(1, tabular->scores[candidate_index(x)]);
      }
      case Backend::kEmulatorPair: {
        const int fid = static_cast<int>(fidelity_of(x));
        const Point base = x.head(x.size() - 1);
        const auto& em = fid == 0 ? *emulator_low : *emulator;
        return reduce_values(em.predict(base));
      }
      case Backend::kEmulator:
        return reduce_values(emulator->predict(x));
    }
    throw std::logic_error("unreachable");
  }

  /// Index of the tabular candidate equal to x (exact row match).
  int candidate_index(const Point& x) const {
    if (!is_tabular()) throw std::invalid_argument(name + ": not tabular");
    ensure_row_index();
    const std::string key(reinterpret_cast<const char*>(x.data()),
                          x.size() * sizeof(double));
    auto it = row_index_.find(key);
    if (it == row_index_.end()) {
      throw std::invalid_argument(name + ": point is not a candidate row");
    }
    return it->second;
  }

  Point candidate(int id) const {
    return tabular->embeddings.row(id).transpose();
  }

  double query_cost(const Point& x) const {
    return multi_fidelity ? 0.9 * fidelity_of(x) + 0.1 : 1.0;
  }

  Observation evaluate(const Point& x, Rng& rng) const {
    auto violations = space.validate(x);
    if (!violations.empty()) {
      throw std::invalid_argument(name + ": invalid point (" +
                                  violations[0].what + ")");
    }
    Observation obs;
    obs.point = x;
    Eigen::VectorXd f = true_values(x);
    obs.values = f;
    if (heteroscedastic()) {
      const double sigma = noise_sigma(*noise_model, x);
      for (int k = 0; k < f.size(); ++k) obs.values[k] += sigma * rng.normal();
    } else if (noise_std > 0.0) {
      for (int k = 0; k < f.size(); ++k) obs.values[k] += noise_std * rng.normal();
    }
    obs.cost = query_cost(x);
    if (multi_fidelity) obs.fidelity = fidelity_of(x);
    return obs;
  }

 private:
  Eigen::VectorXd reduce_values(const Eigen::VectorXd& raw) const {
    switch (reduce) {
      case Reduce::kIdentity: return raw;
      case Reduce::kMean: return Eigen::VectorXd::Constant(1, raw.mean());
      case Reduce::kSelect: return raw.segment(select_index, 1);
    }
    throw std::logic_error("unreachable");
  }

  void ensure_row_index() const {
    if (!row_index_.empty() || tabular->size() == 0) return;
    for (int i = 0; i < tabular->size(); ++i) {
      const Eigen::VectorXd row = tabular->embeddings.row(i).transpose();
      row_index_.emplace(std::string(reinterpret_cast<const char*>(row.data()),
                                     row.size() * sizeof(double)),
                         i);
    }
  }

  mutable std::unordered_map<std::string, int> row_index_;
};

inline double fidelity_cost(const Problem& p, const Point& x) {
  if (!p.multi_fidelity) {
    throw std::invalid_argument(p.name + ": not a multi-fidelity problem");
  }
  return 0.9 * p.fidelity_of(x) + 0.1;
}

namespace detail {

/// Full factored grid over a space: per-dimension level lists plus
/// barycentric grids per simplex group. Continuous level counts shrink until
/// the total fits the cap.
class GridEnumerator {
 public:
  GridEnumerator(const SearchSpace& space, int grid_density, long cap = 4000000)
      : space_(&space) {
    int levels = std::max(grid_density, 2);
    for (;;) {
      build(levels);
      if (total_ <= cap || levels <= 3) break;
      levels -= 2;
    }
    levels_used_ = levels;
  }

  long total() const { return total_; }
  int levels_used() const { return levels_used_; }

  Point at(long index) const {
    Point x(space_->dim());
    for (const auto& block : blocks_) {
      const long sel = index % block.choices.size();
      index /= block.choices.size();
      for (std::size_t j = 0; j < block.dims.size(); ++j) {
        x[block.dims[j]] = block.choices[sel][j];
      }
    }
    return x;
  }

 private:
  struct Block {
    std::vector<int> dims;
    std::vector<std::vector<double>> choices;
  };

  void build(int levels) {
    blocks_.clear();
    total_ = 1;
    std::vector<bool> covered(space_->dim(), false);
    for (const auto& group : space_->simplex_groups()) {
      Block b;
      b.dims = group;
      std::vector<double> w(group.size(), 0.0);
      barycentric(levels - 1, 0, static_cast<int>(group.size()), w, b.choices);
      total_ *= static_cast<long>(b.choices.size());
      for (int d : group) covered[d] = true;
      blocks_.push_back(std::move(b));
    }
    for (int d = 0; d < space_->dim(); ++d) {
      if (covered[d]) continue;
      const auto& p = space_->param(d);
      Block b;
      b.dims = {d};
      if (p.kind == ParamKind::kContinuous) {
        for (int i = 0; i < levels; ++i) {
          b.choices.push_back(
              {p.lower + (p.upper - p.lower) * i / double(levels - 1)});
        }
      } else {
        const int card = p.cardinality();
        if (card <= 32) {
          for (int c = 0; c < card; ++c) b.choices.push_back({p.lower + c});
        } else {
          for (int i = 0; i < levels; ++i) {
            b.choices.push_back({std::round(
                p.lower + (p.upper - p.lower) * i / double(levels - 1))});
          }
        }
      }
      total_ *= static_cast<long>(b.choices.size());
      blocks_.push_back(std::move(b));
    }
  }

  /// All nonnegative integer compositions of `steps` into `m` parts, scaled
  /// to the simplex.
  static void barycentric(int steps, int ignored, int m, std::vector<double>& w,
                          std::vector<std::vector<double>>& out) {
    (void)ignored;
    (void)w;
    std::vector<int> parts(m, 0);
    enumerate(steps, steps, 0, m, parts, out);
  }

  static void enumerate(int total, int remaining, int pos, int m,
                        std::vector<int>& parts,
                        std::vector<std::vector<double>>& out) {
    if (pos == m - 1) {
      parts[pos] = remaining;
      std::vector<double> choice(m);
      for (int j = 0; j < m; ++j) choice[j] = parts[j] / double(total);
      out.push_back(std::move(choice));
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      parts[pos] = take;
      enumerate(total, remaining - take, pos + 1, m, parts, out);
    }
  }

  const SearchSpace* space_;
  std::vector<Block> blocks_;
  long total_ = 0;
  int levels_used_ = 0;
};

}  // namespace detail

/// Empirical optimum: exact maximum over tabular candidates, or a dense-grid
/// evaluation whose 200 best points are polished by projected
/// finite-difference ascent (step schedule 1e-2 down to 1e-4, discrete
/// coordinates frozen, simplex groups renormalized).
inline OptimumEstimate estimate_optimum(const Problem& p, int grid_density = 17,
                                        int ascent_steps = 200) {
  OptimumEstimate out;
  if (p.is_tabular()) {
    out.f_star = p.tabular->scores.maxCoeff();
    out.method = "exhaustive-tabular";
    return out;
  }

  detail::GridEnumerator grid(p.space, grid_density);
  const long total = grid.total();
  constexpr int kChunk = 65536;
  const int m = p.objective_dim;

  // Multi-objective route: Pareto front of grid predictions.
  if (m > 1) {
    Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(1, m), hi = lo;
    std::vector<Eigen::VectorXd> front_pts;
    Eigen::VectorXd min_v = Eigen::VectorXd::Constant(m, 1e300);
    Eigen::VectorXd max_v = Eigen::VectorXd::Constant(m, -1e300);
    Eigen::MatrixXd all(total, m);
    for (long start = 0; start < total; start += kChunk) {
      const int n = static_cast<int>(std::min<long>(kChunk, total - start));
      Eigen::MatrixXd X(n, p.space.dim());
      for (int i = 0; i < n; ++i) X.row(i) = grid.at(start + i).transpose();
      Eigen::MatrixXd Y = p.emulator->predict_batch(X);
      all.middleRows(start, n) = Y;
      for (int i = 0; i < n; ++i) {
        min_v = min_v.cwiseMin(Y.row(i).transpose());
        max_v = max_v.cwiseMax(Y.row(i).transpose());
      }
    }
    out.multi_objective = true;
    out.reference = min_v - 0.1 * (max_v - min_v);
    auto keep = nondominated(all);
    Eigen::MatrixXd F(keep.size(), m);
    for (std::size_t i = 0; i < keep.size(); ++i) F.row(i) = all.row(keep[i]);
    out.hv_star = hypervolume_filtered(F, out.reference);
    out.method = "grid-front(levels=" + std::to_string(grid.levels_used()) + ")";
    return out;
  }

  // Single objective: grid scan, keep the 200 best, polish by ascent.
  struct Best {
    double v;
    long idx;
    bool operator<(const Best& o) const { return v > o.v; }
  };
  std::vector<Best> top;
  top.reserve(256);
  const int keep_n = 200;
  for (long start = 0; start < total; start += kChunk) {
    const int n = static_cast<int>(std::min<long>(kChunk, total - start));
    Eigen::MatrixXd X(n, p.space.dim());
    for (int i = 0; i < n; ++i) X.row(i) = grid.at(start + i).transpose();
    Eigen::MatrixXd Y;
    if (p.backend == Problem::Backend::kEmulatorPair) {
      Y.resize(n, 1);
      const int fid_dim = p.space.dim() - 1;
      Eigen::MatrixXd base = X.leftCols(fid_dim);
      Eigen::MatrixXd y_hi = p.emulator->predict_batch(base);
      Eigen::MatrixXd y_lo = p.emulator_low->predict_batch(base);
      for (int i = 0; i < n; ++i) {
        Y(i, 0) = X(i, fid_dim) == 0.0 ? y_lo(i, 0) : y_hi(i, 0);
      }
    } else {
      Eigen::MatrixXd raw = p.emulator->predict_batch(X);
      Y.resize(n, 1);
      for (int i = 0; i < n; ++i) {
        if (p.reduce == Problem::Reduce::kMean) {
          Y(i, 0) = raw.row(i).mean();
        } else if (p.reduce == Problem::Reduce::kSelect) {
          Y(i, 0) = raw(i, p.select_index);
        } else {
          Y(i, 0) = raw(i, 0);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      top.push_back({Y(i, 0), start + i});
      if (static_cast<int>(top.size()) > 4 * keep_n) {
        std::sort(top.begin(), top.end());
        top.resize(keep_n);
      }
    }
  }
  std::sort(top.begin(), top.end());
  if (static_cast<int>(top.size()) > keep_n) top.resize(keep_n);

  auto value_of = [&](const Point& x) { return p.true_values(x)[0]; };
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> cont_dims;
  for (int d = 0; d < p.space.dim(); ++d) {
    if (p.space.param(d).kind == ParamKind::kContinuous) cont_dims.push_back(d);
  }
  for (const auto& cand : top) {
    Point x = grid.at(cand.idx);
    double fx = value_of(x);
    for (int step_i = 0; step_i < ascent_steps && !cont_dims.empty(); ++step_i) {
      const double step =
          1e-2 * std::pow(1e-2, step_i / std::max(1.0, ascent_steps - 1.0));
      Eigen::VectorXd grad(cont_dims.size());
      for (std::size_t j = 0; j < cont_dims.size(); ++j) {
        const int d = cont_dims[j];
        const double h = 1e-4 * (p.space.param(d).upper - p.space.param(d).lower);
        Point hi = x, lo = x;
        hi[d] = std::min(hi[d] + h, p.space.param(d).upper);
        lo[d] = std::max(lo[d] - h, p.space.param(d).lower);
        grad[j] = value_of(round_point(p.space, hi)) -
                  value_of(round_point(p.space, lo));
      }
      const double gn = grad.norm();
      if (gn < 1e-15) break;
      Point cand_x = x;
      for (std::size_t j = 0; j < cont_dims.size(); ++j) {
        const int d = cont_dims[j];
        cand_x[d] += step * (p.space.param(d).upper - p.space.param(d).lower) *
                     grad[j] / gn;
      }
      cand_x = round_point(p.space, cand_x);
      const double fc = value_of(cand_x);
      if (fc > fx) {
        x = cand_x;
        fx = fc;
      }
    }
    best = std::max(best, fx);
  }
  out.f_star = best;
  out.method = "grid+ascent(levels=" + std::to_string(grid.levels_used()) +
               ",steps=" + std::to_string(ascent_steps) + ")";
  return out;
}

struct ReferencePoint {
  Eigen::VectorXd ref;
  bool degenerate = false;  // an objective had zero range on the grid
};

/// Multi-objective reference point: 10% below the per-objective grid minimum,
/// slack scaled to each objective's range.
inline ReferencePoint reference_point(const Problem& p, int grid_density = 17) {
  if (p.objective_dim < 2) {
    throw std::invalid_argument(p.name + ": reference_point needs m >= 2");
  }
  detail::GridEnumerator grid(p.space, grid_density);
  Eigen::VectorXd min_v = Eigen::VectorXd::Constant(p.objective_dim, 1e300);
  Eigen::VectorXd max_v = Eigen::VectorXd::Constant(p.objective_dim, -1e300);
  constexpr int kChunk = 65536;
  for (long start = 0; start < grid.total(); start += kChunk) {
    const int n = static_cast<int>(std::min<long>(kChunk, grid.total() - start));
    Eigen::MatrixXd X(n, p.space.dim());
    for (int i = 0; i < n; ++i) X.row(i) = grid.at(start + i).transpose();
    Eigen::MatrixXd Y = p.emulator->predict_batch(X);
    for (int i = 0; i < n; ++i) {
      min_v = min_v.cwiseMin(Y.row(i).transpose());
      max_v = max_v.cwiseMax(Y.row(i).transpose());
    }
  }
  ReferencePoint out;
  out.ref = min_v - 0.1 * (max_v - min_v);
  out.degenerate = ((max_v - min_v).array() <= 0.0).any();
  return out;
}

// --- Problem catalog ------------------------------------------------------

struct CatalogEntry {
  std::string name;
  std::string kind;  // hpo | hpo_mf_cont | hpo_mf_disc | dmo | dmo_mo |
                     // dmo_het | po
  std::map<std::string, std::string> assets;  // role -> relative path
  double noise_std = 0.001;
  int truncate_dim = 0;  // po: MRL prefix length (0 = full)
};

struct Catalog {
  std::vector<CatalogEntry> entries;
  std::filesystem::path root;

  const CatalogEntry& find(const std::string& name) const {
    for (const auto& e : entries) {
      if (e.name == name) return e;
    }
    throw std::invalid_argument("unknown problem '" + name + "'");
  }
};

inline Catalog load_catalog(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open catalog " + manifest.string());
  nlohmann::json j;
  in >> j;
  Catalog cat;
  cat.root = manifest.parent_path();
  for (const auto& [name, je] : j.at("problems").items()) {
    CatalogEntry e;
    e.name = name;
    e.kind = je.at("kind").get<std::string>();
    if (je.contains("assets")) {
      for (const auto& [role, path] : je["assets"].items()) {
        e.assets[role] = path.get<std::string>();
      }
    }
    e.noise_std = je.value("noise_std", 0.001);
    e.truncate_dim = je.value("truncate_dim", 0);
    cat.entries.push_back(std::move(e));
  }
  return cat;
}

/// Wire a fully evaluated Problem from a catalog entry. Asset paths resolve
/// against the catalog root (override with the BOLT_ASSETS environment
/// variable, handled by the caller).
inline Problem make_problem(const CatalogEntry& e,
                            const std::filesystem::path& root,
                            std::optional<double> noise_std = std::nullopt) {
  Problem p;
  p.name = e.name;
  p.noise_std = noise_std.value_or(e.noise_std);
  auto asset = [&](const std::string& role) -> std::filesystem::path {
    auto it = e.assets.find(role);
    if (it == e.assets.end()) {
      throw std::runtime_error(e.name + ": catalog entry missing asset '" +
                               role + "'");
    }
    std::filesystem::path path = root / it->second;
    if (!std::filesystem::exists(path)) {
      throw std::runtime_error(e.name + ": asset not found: " + path.string() +
                               " (generate synthetic assets first)");
    }
    return path;
  };

  if (e.kind == "hpo") {
    p.space = hpo_space("none");
    p.emulator = std::make_shared<MlpEmulator>(MlpEmulator::load(asset("emulator")));
    p.reduce = Problem::Reduce::kIdentity;
  } else if (e.kind == "hpo_mf_cont") {
    p.space = hpo_space("cont");
    p.emulator = std::make_shared<MlpEmulator>(MlpEmulator::load(asset("emulator")));
    p.multi_fidelity = true;
  } else if (e.kind == "hpo_mf_disc") {
    p.space = hpo_space("disc");
    p.backend = Problem::Backend::kEmulatorPair;
    p.emulator = std::make_shared<MlpEmulator>(MlpEmulator::load(asset("emulator_high")));
    p.emulator_low =
        std::make_shared<MlpEmulator>(MlpEmulator::load(asset("emulator_low")));
    p.multi_fidelity = true;
  } else if (e.kind == "dmo" || e.kind == "dmo_mo" || e.kind == "dmo_het") {
    p.space = dmo_space();
    p.emulator = std::make_shared<MlpEmulator>(MlpEmulator::load(asset("emulator")));
    if (e.kind == "dmo") {
      p.reduce = Problem::Reduce::kMean;  // unweighted mean of the scores
    } else if (e.kind == "dmo_mo") {
      p.objective_dim = p.emulator->output_dim();
    } else {
      p.reduce = Problem::Reduce::kSelect;
      p.select_index = 0;
      const auto& names = p.emulator->output_names();
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].find("math") != std::string::npos) {
          p.select_index = static_cast<int>(i);
        }
      }
      p.noise_model =
          std::make_shared<NoiseModel>(load_noise_model(asset("noise_model")));
      p.noise_std = 0.0;
    }
  } else if (e.kind == "po") {
    p.backend = Problem::Backend::kTabular;
    TabularObjective tab = load_tabular_csv(asset("tabular"));
    if (e.truncate_dim > 0) tab = truncate_embedding(tab, e.truncate_dim);
    p.tabular = std::make_shared<TabularObjective>(std::move(tab));
    p.space = po_space(*p.tabular);
  } else {
    throw std::invalid_argument("unknown problem kind '" + e.kind + "'");
  }

  if (p.emulator && p.backend == Problem::Backend::kEmulator &&
      p.emulator->input_dim() != p.space.dim()) {
    throw std::runtime_error(e.name + ": emulator input dim mismatch");
  }
  return p;
}

}  // namespace bolt
