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

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bolt/csv.hpp"

namespace bolt {

/// Finite candidate-set objective: rows of `embeddings` are the whole search
/// domain and `scores` the precomputed objective values.
struct TabularObjective {
  std::vector<std::string> ids;
  Eigen::MatrixXd embeddings;  // n x d
  Eigen::VectorXd scores;      // in [0, 1]

  int size() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }

  void check() const {
    const int n = size();
    if (n < 1) throw std::invalid_argument("tabular objective: empty");
    if (static_cast<int>(ids.size()) != n || scores.size() != n) {
      throw std::invalid_argument("tabular objective: length mismatch");
    }
    if (scores.minCoeff() < 0.0 || scores.maxCoeff() > 1.0) {
      throw std::invalid_argument("tabular objective: scores outside [0,1]");
    }
  }
};

/// Keep the first d embedding coordinates (prefix truncation); ids and
/// scores unchanged.
inline TabularObjective truncate_embedding(const TabularObjective& t, int d) {
  if (d < 1 || d > t.dim()) {
    throw std::invalid_argument("truncate_embedding: d must be in [1, dim]");
  }
  TabularObjective out;
  out.ids = t.ids;
  out.embeddings = t.embeddings.leftCols(d);
  out.scores = t.scores;
  return out;
}

/// CSV schema: id, score, e0..e{d-1}; header required.
inline TabularObjective load_tabular_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  if (t.header.size() < 3 || t.header[0] != "id" || t.header[1] != "score") {
    throw std::runtime_error("tabular csv: expected header id,score,e0,...");
  }
  const int d = static_cast<int>(t.header.size()) - 2;
  const int n = static_cast<int>(t.rows.size());
  TabularObjective out;
  out.embeddings.resize(n, d);
  out.scores.resize(n);
  out.ids.reserve(n);
  for (int r = 0; r < n; ++r) {
    const auto& row = t.rows[r];
    if (static_cast<int>(row.size()) != d + 2) {
      throw std::runtime_error("tabular csv: ragged row " + std::to_string(r));
    }
    out.ids.push_back(row[0]);
    out.scores[r] = csv::to_double(row[1]);
    for (int c = 0; c < d; ++c) out.embeddings(r, c) = csv::to_double(row[c + 2]);
  }
  out.check();
  return out;
}

inline void save_tabular_csv(const std::string& path,
                             const TabularObjective& t) {
  csv::Table tab;
  tab.header = {"id", "score"};
  for (int c = 0; c < t.dim(); ++c) tab.header.push_back("e" + std::to_string(c));
  tab.rows.reserve(t.size());
  for (int r = 0; r < t.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(t.dim() + 2);
    row.push_back(t.ids[r]);
    row.push_back(csv::format_double(t.scores[r]));
    for (int c = 0; c < t.dim(); ++c) {
      row.push_back(csv::format_double(t.embeddings(r, c)));
    }
    tab.rows.push_back(std::move(row));
  }
  csv::write_file(path, tab);
}

}  // namespace bolt
