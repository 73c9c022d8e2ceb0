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

#include <nlohmann/json.hpp>

#include "bolt/csv.hpp"
#include "bolt/spaces.hpp"

namespace bolt {

struct RunRow {
  int iteration = 0;  // 0 marks initialization rows
  Point point;
  std::optional<double> fidelity;
  Eigen::VectorXd values;     // noisy observations
  Eigen::VectorXd noiseless;  // oracle column (deterministic backend)
  double step_cost = 1.0;
  double cum_cost = 0.0;
  double best_noiseless = std::numeric_limits<double>::quiet_NaN();
  Point incumbent_mean_point;  // empty unless recorded
  long wall_ms = 0;
};

/// Per-seed trace of one experiment; every metric derives from it.
struct RunRecord {
  std::string problem;
  std::string method;
  std::uint64_t seed = 0;
  int objective_dim = 1;
  std::vector<RunRow> rows;
  nlohmann::json meta;
};

namespace detail {

inline std::string point_to_json(const Point& x) {
  if (x.size() == 0) return "";
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < x.size(); ++i) j.push_back(x[i]);
  return j.dump();
}

inline Point point_from_json(const std::string& s) {
  if (s.empty()) return Point();
  nlohmann::json j = nlohmann::json::parse(s);
  Point x(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) x[i] = j[i].get<double>();
  return x;
}

}  // namespace detail

inline void write_run_csv(const std::string& path, const RunRecord& rec) {
  csv::Table t;
  const int k = rec.objective_dim;
  t.header = {"iteration", "seed", "point_json", "fidelity"};
  for (int j = 0; j < k; ++j) t.header.push_back("value_" + std::to_string(j));
  for (int j = 0; j < k; ++j) t.header.push_back("noiseless_" + std::to_string(j));
  t.header.insert(t.header.end(),
                  {"step_cost", "cum_cost", "best_noiseless",
                   "incumbent_mean_point_json", "wall_ms"});
  for (const auto& r : rec.rows) {
    std::vector<std::string> row;
    row.push_back(std::to_string(r.iteration));
    row.push_back(std::to_string(rec.seed));
    row.push_back(detail::point_to_json(r.point));
    row.push_back(r.fidelity ? csv::format_double(*r.fidelity) : "");
    for (int j = 0; j < k; ++j) row.push_back(csv::format_double(r.values[j]));
    for (int j = 0; j < k; ++j) row.push_back(csv::format_double(r.noiseless[j]));
    row.push_back(csv::format_double(r.step_cost));
    row.push_back(csv::format_double(r.cum_cost));
    row.push_back(std::isnan(r.best_noiseless)
                      ? ""
                      : csv::format_double(r.best_noiseless));
    row.push_back(detail::point_to_json(r.incumbent_mean_point));
    row.push_back(std::to_string(r.wall_ms));
    t.rows.push_back(std::move(row));
  }
  csv::write_file(path, t);
}

inline RunRecord read_run_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  RunRecord rec;
  int k = 0;
  while (std::find(t.header.begin(), t.header.end(),
                   "value_" + std::to_string(k)) != t.header.end()) {
    ++k;
  }
  rec.objective_dim = k;
  const int c_it = t.column("iteration");
  const int c_seed = t.column("seed");
  const int c_pt = t.column("point_json");
  const int c_fid = t.column("fidelity");
  const int c_v0 = t.column("value_0");
  const int c_n0 = t.column("noiseless_0");
  const int c_sc = t.column("step_cost");
  const int c_cc = t.column("cum_cost");
  const int c_bn = t.column("best_noiseless");
  const int c_inc = t.column("incumbent_mean_point_json");
  const int c_wm = t.column("wall_ms");
  for (const auto& row : t.rows) {
    RunRow r;
    r.iteration = static_cast<int>(csv::to_double(row[c_it]));
    rec.seed = static_cast<std::uint64_t>(csv::to_double(row[c_seed]));
    r.point = detail::point_from_json(row[c_pt]);
    if (!row[c_fid].empty()) r.fidelity = csv::to_double(row[c_fid]);
    r.values.resize(k);
    r.noiseless.resize(k);
    for (int j = 0; j < k; ++j) {
      r.values[j] = csv::to_double(row[c_v0 + j]);
      r.noiseless[j] = csv::to_double(row[c_n0 + j]);
    }
    r.step_cost = csv::to_double(row[c_sc]);
    r.cum_cost = csv::to_double(row[c_cc]);
    r.best_noiseless = row[c_bn].empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : csv::to_double(row[c_bn]);
    r.incumbent_mean_point = detail::point_from_json(row[c_inc]);
    r.wall_ms = static_cast<long>(csv::to_double(row[c_wm]));
    rec.rows.push_back(std::move(r));
  }
  return rec;
}

}  // namespace bolt
