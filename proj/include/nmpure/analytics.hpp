// Copyright 2026 The nmpure Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Closed-form predictions: toy-model suppression curves, the ratio-estimator
// variance and the shot budget it implies.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "nmpure/errors.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/tensor.hpp"
#include "nmpure/twirling.hpp"

namespace nmpure {

namespace detail {
inline void check_toy_rate(double p_e, long count) {
  if (!(p_e >= 0.0 && p_e < 1.0)) {
    throw DomainError("toy model needs 0 <= p_e < 1");
  }
  if (count < 1) {
    throw DomainError("toy model needs a positive point/copy count");
  }
}
}  // namespace detail

/// Error rate after purifying an n-point toy noise whose uncorrected total
/// error rate is p_e (independent points, X/Y/Z equally likely):
/// 1 - ((1-p_e)^{2/n} / ((1-p_e)^{2/n} + (1-(1-p_e)^{1/n})^2/3))^n.
inline double toy_multitime_rate(double p_e, int n) {
  detail::check_toy_rate(p_e, n);
  const double dn = static_cast<double>(n);
  const double keep = std::pow(1.0 - p_e, 2.0 / dn);
  const double err = -std::expm1(std::log1p(-p_e) / dn);
  // 1 - r^n with 1 - r = (err^2/3) / (keep + err^2/3), free of cancellation.
  const double miss = (err * err / 3.0) / (keep + err * err / 3.0);
  return -std::expm1(dn * std::log1p(-miss));
}

/// Error rate of the two-point toy noise purified with m copies in total:
/// 1 - ((1-p_e)^{m/2} / ((1-p_e)^{m/2} + 3^{1-m}(1-sqrt(1-p_e))^m))^2.
inline double toy_multicopy_rate(double p_e, int m) {
  detail::check_toy_rate(p_e, m);
  const double dm = static_cast<double>(m);
  const double keep = std::pow(1.0 - p_e, dm / 2.0);
  const double err = std::pow(3.0, 1.0 - dm) * std::pow(-std::expm1(0.5 * std::log1p(-p_e)), dm);
  const double ratio = keep / (keep + err);
  // 1 - r^2 = (1 - r)(1 + r)
  return err / (keep + err) * (1.0 + ratio);
}

/// Single-qubit toy distribution over `points` independent time points: I
/// with probability 1 - p_single, each of X, Y, Z with p_single / 3.
inline JointPauliDistribution toy_iid_distribution(double p_single, std::size_t points) {
  if (!(p_single >= 0.0 && p_single <= 1.0)) {
    throw DomainError("toy_iid_distribution: p_single must lie in [0, 1]");
  }
  const double single[4] = {1.0 - p_single, p_single / 3.0, p_single / 3.0, p_single / 3.0};
  std::map<PauliTuple, double> probs;
  const std::uint64_t total = pow4(points);
  for (std::uint64_t f = 0; f < total; ++f) {
    PauliTuple t(points);
    double p = 1.0;
    std::uint64_t r = f;
    for (std::size_t k = points; k-- > 0;) {
      t[k] = static_cast<std::uint32_t>(r % 4);
      r /= 4;
      p *= single[t[k]];
    }
    probs[t] = p;
  }
  return JointPauliDistribution(points, 1, std::move(probs));
}

/// Var(x/y) ~ (Tr[O^2 rho_tw] - 2 Tr[O rho_tw] Tr[O rho_eff] + Tr[O rho_eff]^2) / (K mu_y^2)
/// for identical main/ancilla noise, with mu_y = sum_t p_t^2.
inline double estimator_variance(const JointPauliDistribution& p, const std::vector<QuantumChannel>& mid_ops,
                                 const DensityMatrix& rho0, const ComplexMatrix& observable, std::size_t shots) {
  if (shots < 1) {
    throw DomainError("estimator_variance: need at least one shot");
  }
  double mu_y = 0.0;
  for (const auto& [t, v] : p.entries()) mu_y += std::max(0.0, v) * std::max(0.0, v);
  if (mu_y < 1e-12) {
    throw SingularDenominator("estimator_variance: mu_y below 1e-12");
  }
  const DensityMatrix rho_tw = pauli_mixture(p, mid_ops, rho0);
  const DensityMatrix rho_eff = pauli_mixture(purify_distribution(p, 2), mid_ops, rho0);
  const double o2_tw = rho_tw.expectation(observable * observable);
  const double o_tw = rho_tw.expectation(observable);
  const double o_eff = rho_eff.expectation(observable);
  const double numerator = o2_tw - 2.0 * o_tw * o_eff + o_eff * o_eff;
  return numerator / (static_cast<double>(shots) * mu_y * mu_y);
}

/// Order-of-magnitude shot budget ceil(1 / (epsilon^2 mu_y^2)); the constant
/// is fixed at 1.
inline std::uint64_t sample_complexity(double epsilon, double mu_y) {
  if (!(epsilon > 0.0) || !(mu_y > 0.0)) {
    throw DomainError("sample_complexity: epsilon and mu_y must be positive");
  }
  return static_cast<std::uint64_t>(std::ceil(1.0 / (epsilon * epsilon * mu_y * mu_y) - 1e-9));
}

}  // namespace nmpure
