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

// Test-fixture helper: generates the synthetic benchmark assets once into
// the directory named by BOLT_ASSETS so the suites that need them can run.

#include <cstdio>
#include <cstdlib>

#include "bolt/synthetic.hpp"

int main() {
  const char* root = std::getenv("BOLT_ASSETS");
  if (!root) {
    std::fprintf(stderr, "BOLT_ASSETS is not set\n");
    return 1;
  }
  try {
    auto manifest = bolt::synthetic::ensure_assets(root);
    std::printf("assets ready: %s\n", manifest.string().c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "asset generation failed: %s\n", e.what());
    return 1;
  }
  return 0;
}
