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
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bolt/spaces.hpp"

namespace bolt {

enum class Activation { kRelu, kIdentity };

struct MlpLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
  Activation act = Activation::kRelu;
};

/// Deterministic feed-forward objective backend: input normalization, two
/// hidden relu stages and a linear head. The forward pass is a pure function.
class MlpEmulator {
 public:
  MlpEmulator() = default;

  MlpEmulator(Eigen::VectorXd shift, Eigen::VectorXd scale,
              std::vector<MlpLayer> layers, std::vector<std::string> outputs)
      : shift_(std::move(shift)),
        scale_(std::move(scale)),
        layers_(std::move(layers)),
        outputs_(std::move(outputs)) {
    if (layers_.size() != 3 || layers_[0].act != Activation::kRelu ||
        layers_[1].act != Activation::kRelu ||
        layers_[2].act != Activation::kIdentity) {
      throw std::invalid_argument(
          "MlpEmulator: expected relu, relu, identity layer stack");
    }
    if (shift_.size() != scale_.size() ||
        layers_[0].w.cols() != shift_.size()) {
      throw std::invalid_argument("MlpEmulator: normalization shape mismatch");
    }
    if ((scale_.array() <= 0.0).any()) {
      throw std::invalid_argument("MlpEmulator: scale must be positive");
    }
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
      if (layers_[i + 1].w.cols() != layers_[i].w.rows()) {
        throw std::invalid_argument("MlpEmulator: layer shapes do not chain");
      }
    }
    if (layers_.back().w.rows() != static_cast<Eigen::Index>(outputs_.size())) {
      throw std::invalid_argument("MlpEmulator: output name count mismatch");
    }
  }

  int input_dim() const { return static_cast<int>(shift_.size()); }
  int output_dim() const { return static_cast<int>(outputs_.size()); }
  const std::vector<std::string>& output_names() const { return outputs_; }
  const Eigen::VectorXd& shift() const { return shift_; }
  const Eigen::VectorXd& scale() const { return scale_; }
  const std::vector<MlpLayer>& layers() const { return layers_; }

  Eigen::VectorXd predict(const Point& x) const {
    if (x.size() != input_dim()) {
      throw std::invalid_argument("MlpEmulator::predict: dimension mismatch");
    }
    Eigen::VectorXd z = (x - shift_).cwiseQuotient(scale_);
    for (const auto& layer : layers_) {
      z = (layer.w * z + layer.b).eval();
      if (layer.act == Activation::kRelu) z = z.cwiseMax(0.0);
    }
    return z;
  }

  /// Rows of X are inputs; rows of the result are outputs.
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_dim()) {
      throw std::invalid_argument("MlpEmulator::predict_batch: dim mismatch");
    }
    Eigen::MatrixXd z =
        (X.rowwise() - shift_.transpose()).array().rowwise() /
        scale_.transpose().array();
    for (const auto& layer : layers_) {
      z = ((z * layer.w.transpose()).rowwise() + layer.b.transpose()).eval();
      if (layer.act == Activation::kRelu) z = z.cwiseMax(0.0);
    }
    return z;
  }

  nlohmann::json to_json() const {
    nlohmann::json jl = nlohmann::json::array();
    for (const auto& layer : layers_) {
      nlohmann::json w = nlohmann::json::array();
      for (int r = 0; r < layer.w.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < layer.w.cols(); ++c) row.push_back(layer.w(r, c));
        w.push_back(row);
      }
      nlohmann::json b = nlohmann::json::array();
      for (int r = 0; r < layer.b.size(); ++r) b.push_back(layer.b[r]);
      jl.push_back({{"w", w},
                    {"b", b},
                    {"act", layer.act == Activation::kRelu ? "relu"
                                                           : "identity"}});
    }
    return {{"format_version", 1},
            {"input_dim", input_dim()},
            {"normalization",
             {{"shift", std::vector<double>(shift_.data(),
                                            shift_.data() + shift_.size())},
              {"scale", std::vector<double>(scale_.data(),
                                            scale_.data() + scale_.size())}}},
            {"layers", jl},
            {"outputs", outputs_}};
  }

  static MlpEmulator from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1) {
      throw std::invalid_argument("emulator file: unsupported format_version");
    }
    const int p = j.at("input_dim").get<int>();
    auto shift_v = j.at("normalization").at("shift").get<std::vector<double>>();
    auto scale_v = j.at("normalization").at("scale").get<std::vector<double>>();
    if (static_cast<int>(shift_v.size()) != p ||
        static_cast<int>(scale_v.size()) != p) {
      throw std::invalid_argument("emulator file: normalization length");
    }
    Eigen::VectorXd shift = Eigen::Map<Eigen::VectorXd>(shift_v.data(), p);
    Eigen::VectorXd scale = Eigen::Map<Eigen::VectorXd>(scale_v.data(), p);
    std::vector<MlpLayer> layers;
    for (const auto& jl : j.at("layers")) {
      MlpLayer layer;
      const auto& w = jl.at("w");
      const int rows = static_cast<int>(w.size());
      const int cols = static_cast<int>(w.at(0).size());
      layer.w.resize(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) layer.w(r, c) = w[r][c].get<double>();
      }
      auto b = jl.at("b").get<std::vector<double>>();
      layer.b = Eigen::Map<Eigen::VectorXd>(b.data(), b.size());
      const std::string act = jl.at("act").get<std::string>();
      layer.act = act == "relu" ? Activation::kRelu : Activation::kIdentity;
      layers.push_back(std::move(layer));
    }
    return MlpEmulator(std::move(shift), std::move(scale), std::move(layers),
                       j.at("outputs").get<std::vector<std::string>>());
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json().dump();
  }

  static MlpEmulator load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

 private:
  Eigen::VectorXd shift_, scale_;
  std::vector<MlpLayer> layers_;
  std::vector<std::string> outputs_;
};

}  // namespace bolt
