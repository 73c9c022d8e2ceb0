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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace bolt {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

inline double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  p = std::clamp(p, 1e-16, 1.0 - 1e-16);
  return boost::math::quantile(dist, p);
}

/// Two-sided Student-t quantile used for confidence intervals.
inline double t_quantile(double p, int dof) {
  const boost::math::students_t_distribution<double> dist(dof);
  return boost::math::quantile(dist, p);
}

/// Scaled complementary error function exp(x^2) erfc(x). Direct product for
/// small x, Laplace continued fraction beyond the overflow range.
inline double erfcx(double x) {
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 2.5) return std::exp(x * x) * std::erfc(x);
  // erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  double cf = 0.0;
  for (int k = 60; k >= 1; --k) cf = (0.5 * k) / (x + cf);
  return (1.0 / std::sqrt(kPi)) / (x + cf);
}

/// log Phi(z), stable in the far left tail.
inline double normal_logcdf(double z) {
  if (z > -8.0) return std::log(normal_cdf(z));
  return -0.5 * z * z + std::log(0.5 * erfcx(-z / kSqrt2));
}

/// Inverse Mills ratio phi(z)/Phi(z).
inline double mills_ratio(double z) {
  if (z > -4.0) return normal_pdf(z) / normal_cdf(z);
  return std::sqrt(2.0 / kPi) / erfcx(-z / kSqrt2);
}

inline double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// log(EI/sigma) for standardized improvement z = (mu - best)/sigma, i.e.
/// log(phi(z) + z Phi(z)), evaluated without underflow for z << 0.
inline double log_ei_helper(double z) {
  if (z > -1.0) return std::log(normal_pdf(z) + z * normal_cdf(z));
  if (z < -35.0) {
    // EI/sigma ~ phi(z)/z^2 (1 - 3/z^2 + ...) as z -> -inf.
    return std::log(kInvSqrt2Pi) - 0.5 * z * z - std::log(z * z) +
           std::log1p(-3.0 / (z * z));
  }
  // phi(z) (1 + z Phi(z)/phi(z)); Phi/phi = 1/mills.
  const double ratio = 1.0 / mills_ratio(z);  // Phi(z)/phi(z)
  const double inner = 1.0 + z * ratio;
  if (inner <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(normal_pdf(z)) + std::log(inner);
}

}  // namespace bolt
