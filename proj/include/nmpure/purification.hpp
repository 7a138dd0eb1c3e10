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

// The purification circuit: a control qubit in |+>, m ancillary copies in the
// maximally mixed state and the main register, with a controlled cyclic
// permutation of the copies before every noise point and its inverse after.
//
// Register order (fixed): control, (anc_env1, anc1), ..., (anc_envm, ancm),
// main_env, main. The cyclic permutation moves the content of copy slot c to
// slot c+1 (mod m+1) over the slot order anc1, ..., ancm, main.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nmpure/channels.hpp"
#include "nmpure/errors.hpp"
#include "nmpure/noise.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/random.hpp"
#include "nmpure/tensor.hpp"
#include "nmpure/twirling.hpp"

namespace nmpure {

/// Exact simulation is limited to registers of at most this dimension (7 qubits).
inline constexpr std::size_t kMaxProtocolDim = 128;

enum class MidOpPlacement {
  /// Ideal operation on the main register between the inverse permutation
  /// and the next permutation (the ancillas only see the reset there).
  kMainOnly,
  /// Ideal operation on every copy, after the next permutation. Only
  /// equivalent to kMainOnly for unitary operations.
  kAllCopiesAfterPermutation,
};

struct ProtocolConfig {
  std::size_t copies_m = 1;
  NonMarkovSource main_source;
  std::vector<NonMarkovSource> ancilla_sources;
  std::vector<QuantumChannel> mid_ops;
  DensityMatrix rho0;
  ComplexMatrix observable;
  TwirlMode twirl = ExactTwirl{};
  MidOpPlacement placement = MidOpPlacement::kMainOnly;
};

/// Every ancilla copy gets an independent replica of `source`.
inline ProtocolConfig identical_noise_config(const NonMarkovSource& source, std::size_t copies_m,
                                             std::vector<QuantumChannel> mid_ops, DensityMatrix rho0,
                                             ComplexMatrix observable) {
  return ProtocolConfig{copies_m,
                        source,
                        std::vector<NonMarkovSource>(copies_m, source),
                        std::move(mid_ops),
                        std::move(rho0),
                        std::move(observable)};
}

struct EffectiveResult {
  double p_plus = 0.0;
  double p_minus = 0.0;
  DensityMatrix rho_plus;
  DensityMatrix rho_minus;
  /// (p+ rho+ - p- rho-) / (p+ - p-); Hermitian with unit trace, not
  /// necessarily positive.
  DensityMatrix rho_eff;
  double mu_y = 0.0;
  double mu_x = 0.0;
  double o_eff = 0.0;
  /// Joint state of control and main register at the end of the circuit.
  DensityMatrix control_main;
};

namespace detail {

inline const std::string kControl = "control";
inline const std::string kMain = "main";
inline const std::string kMainEnv = "main_env";
inline std::string anc_name(std::size_t k) { return "anc" + std::to_string(k); }
inline std::string anc_env_name(std::size_t k) { return "anc_env" + std::to_string(k); }

inline void validate(const ProtocolConfig& cfg) {
  if (cfg.copies_m == 0) {
    throw ConfigError("protocol needs at least one ancillary copy");
  }
  if (cfg.ancilla_sources.size() != cfg.copies_m) {
    throw ConfigError("expected " + std::to_string(cfg.copies_m) + " ancilla noise sources, got " +
                      std::to_string(cfg.ancilla_sources.size()));
  }
  const auto& main = cfg.main_source;
  for (const auto& s : cfg.ancilla_sources) {
    if (s.n_points() != main.n_points()) {
      throw ConfigError("all noise sources must have the same number of time points");
    }
    if (s.sys_qubits() != main.sys_qubits()) {
      throw ConfigError("all noise sources must act on the same number of system qubits");
    }
  }
  check_mid_ops(main, cfg.mid_ops);
  if (cfg.rho0.dim() != main.sys_dim()) {
    throw ShapeError("input state does not match the system dimension");
  }
  if (static_cast<std::size_t>(cfg.observable.rows()) != main.sys_dim() || cfg.observable.cols() != cfg.observable.rows()) {
    throw ShapeError("observable does not match the system dimension");
  }
  if (!is_hermitian(cfg.observable)) {
    throw DomainError("observable is not Hermitian");
  }
  std::size_t dim = 2 * main.sys_dim() * main.env_dim();
  for (const auto& s : cfg.ancilla_sources) dim *= s.sys_dim() * s.env_dim();
  if (dim > kMaxProtocolDim) {
    throw ConfigError("protocol register has dimension " + std::to_string(dim) + ", exact simulation supports up to " +
                      std::to_string(kMaxProtocolDim));
  }
}

/// |0><0| (x) I + |1><1| (x) S with S the cyclic shift of m+1 copies of dimension d.
inline ComplexMatrix controlled_cyclic_shift(std::size_t copies, std::size_t d, bool inverse) {
  std::size_t n = 1;
  for (std::size_t c = 0; c < copies; ++c) n *= d;
  const auto ni = static_cast<Eigen::Index>(n);
  ComplexMatrix op = ComplexMatrix::Zero(2 * ni, 2 * ni);
  op.topLeftCorner(ni, ni).setIdentity();
  std::vector<std::size_t> digits(copies), moved(copies);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t r = x;
    for (std::size_t c = copies; c-- > 0;) {
      digits[c] = r % d;
      r /= d;
    }
    for (std::size_t c = 0; c < copies; ++c) {
      // forward: content of slot c lands in slot c+1
      const std::size_t dst = inverse ? (c + copies - 1) % copies : (c + 1) % copies;
      moved[dst] = digits[c];
    }
    std::size_t y = 0;
    for (std::size_t c = 0; c < copies; ++c) y = y * d + moved[c];
    op(ni + static_cast<Eigen::Index>(y), ni + static_cast<Eigen::Index>(x)) = 1.0;
  }
  return op;
}

/// One realization of the circuit for fixed per-copy noise; returns the
/// joint state of (control, main).
inline ComplexMatrix run_circuit(const ProtocolConfig& cfg, const std::vector<const NonMarkovSource*>& sources) {
  // sources: ancilla 1..m then main
  const std::size_t m = cfg.copies_m;
  const std::size_t d = cfg.main_source.sys_dim();
  const std::size_t points = cfg.main_source.n_points();

  std::vector<Subsystem> subs{{kControl, 2}};
  std::vector<std::string> copy_names, env_names;
  for (std::size_t k = 1; k <= m; ++k) {
    subs.push_back({anc_env_name(k), sources[k - 1]->env_dim()});
    subs.push_back({anc_name(k), d});
    copy_names.push_back(anc_name(k));
    env_names.push_back(anc_env_name(k));
  }
  subs.push_back({kMainEnv, sources[m]->env_dim()});
  subs.push_back({kMain, d});
  copy_names.push_back(kMain);
  env_names.push_back(kMainEnv);
  const RegisterLayout layout(subs);

  ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  ComplexMatrix state = plus;
  const auto di = static_cast<Eigen::Index>(d);
  for (std::size_t k = 0; k < m; ++k) {
    state = kron(state, sources[k]->env_init().matrix());
    state = kron(state, ComplexMatrix::Identity(di, di) / static_cast<double>(d));
  }
  state = kron(state, sources[m]->env_init().matrix());
  state = kron(state, cfg.rho0.matrix());

  std::vector<std::string> perm_targets{kControl};
  perm_targets.insert(perm_targets.end(), copy_names.begin(), copy_names.end());
  const IndexSplit perm_split(layout, perm_targets);
  const ComplexMatrix shift = controlled_cyclic_shift(m + 1, d, false);
  const ComplexMatrix unshift = controlled_cyclic_shift(m + 1, d, true);

  std::vector<IndexSplit> noise_splits, copy_splits;
  for (std::size_t c = 0; c <= m; ++c) {
    noise_splits.emplace_back(layout, std::vector<std::string>{copy_names[c], env_names[c]});
    copy_splits.emplace_back(layout, std::vector<std::string>{copy_names[c]});
  }
  const QuantumChannel reset = depolarizing_complete(cfg.main_source.sys_qubits());

  for (std::size_t t = 0; t < points; ++t) {
    state = conjugate(perm_split, shift, state);
    if (cfg.placement == MidOpPlacement::kAllCopiesAfterPermutation && t > 0) {
      for (std::size_t c = 0; c <= m; ++c) state = apply_local(cfg.mid_ops[t - 1], copy_splits[c], state);
    }
    for (std::size_t c = 0; c <= m; ++c) state = apply_local(sources[c]->steps()[t], noise_splits[c], state);
    state = conjugate(perm_split, unshift, state);
    if (t + 1 < points) {
      for (std::size_t c = 0; c < m; ++c) state = apply_local(reset, copy_splits[c], state);
      if (cfg.placement == MidOpPlacement::kMainOnly) state = apply_local(cfg.mid_ops[t], copy_splits[m], state);
    }
  }
  return partial_trace(state, layout, {kControl, kMain}).second;
}

}  // namespace detail

/// Simulates the purification circuit with twirled noise and post-processes
/// the control-qubit X measurement. Exact twirling replaces every noise step
/// by its Pauli-averaged channel; sampled twirling averages the final joint
/// state over random frames drawn independently for every copy.
inline EffectiveResult run_protocol_exact(const ProtocolConfig& cfg) {
  detail::validate(cfg);
  std::vector<NonMarkovSource> all(cfg.ancilla_sources);
  all.push_back(cfg.main_source);

  ComplexMatrix joint;
  if (std::holds_alternative<ExactTwirl>(cfg.twirl)) {
    std::vector<NonMarkovSource> tw;
    for (const auto& s : all) tw.push_back(twirled_source(s));
    std::vector<const NonMarkovSource*> ptrs;
    for (const auto& s : tw) ptrs.push_back(&s);
    joint = detail::run_circuit(cfg, ptrs);
  } else {
    const auto& sampled = std::get<SampledTwirl>(cfg.twirl);
    if (sampled.count == 0) {
      throw ConfigError("sampled twirl needs at least one frame");
    }
    std::mt19937_64 rng(sampled.seed);
    for (std::size_t f = 0; f < sampled.count; ++f) {
      std::vector<NonMarkovSource> framed;
      for (const auto& s : all) framed.push_back(apply_frame(s, sample_frame(s, rng)));
      std::vector<const NonMarkovSource*> ptrs;
      for (const auto& s : framed) ptrs.push_back(&s);
      ComplexMatrix j = detail::run_circuit(cfg, ptrs);
      joint = (f == 0) ? j : ComplexMatrix(joint + j);
    }
    joint /= static_cast<double>(sampled.count);
  }
  joint = symmetrized(joint);
  const std::size_t d = cfg.main_source.sys_dim();
  const auto di = static_cast<Eigen::Index>(d);
  const RegisterLayout cm_layout{{detail::kControl, 2}, {detail::kMain, d}};
  DensityMatrix control_main(cm_layout, joint);

  // Blocks of the control qubit: joint = [[A, B], [B^+, C]].
  const ComplexMatrix a = joint.topLeftCorner(di, di);
  const ComplexMatrix b = joint.topRightCorner(di, di);
  const ComplexMatrix c = joint.bottomRightCorner(di, di);
  const ComplexMatrix plus_block = 0.5 * (a + b + b.adjoint() + c);
  const ComplexMatrix minus_block = 0.5 * (a - b - b.adjoint() + c);
  const double p_plus = plus_block.trace().real();
  const double p_minus = minus_block.trace().real();
  const double mu_y = p_plus - p_minus;
  if (!(mu_y >= 1e-9)) {
    throw SingularDenominator("control-qubit <X> = " + std::to_string(mu_y) +
                              " is below 1e-9; the purified signal has collapsed");
  }
  const RegisterLayout main_layout{{detail::kMain, d}};
  auto conditional = [&](const ComplexMatrix& block, double p) {
    if (p < 1e-15) return DensityMatrix::maximally_mixed(main_layout);
    return DensityMatrix(main_layout, symmetrized(block / p));
  };
  DensityMatrix rho_plus = conditional(plus_block, p_plus);
  DensityMatrix rho_minus = conditional(minus_block, p_minus);
  const ComplexMatrix eff = symmetrized((plus_block - minus_block) / mu_y);
  DensityMatrix rho_eff = DensityMatrix::quasi(main_layout, eff);
  const double o_eff = (cfg.observable * eff).trace().real();
  const double mu_x = (cfg.observable * (b + b.adjoint())).trace().real();
  return EffectiveResult{p_plus,   p_minus, std::move(rho_plus), std::move(rho_minus), std::move(rho_eff), mu_y, mu_x,
                         o_eff,    std::move(control_main)};
}

/// sum_t (prod_c p^(c)_t) Pauli mixture, normalized: the effective state for
/// independent noise distributions on each copy.
inline DensityMatrix predicted_effective_state(std::span<const JointPauliDistribution> dists,
                                               const std::vector<QuantumChannel>& mid_ops, const DensityMatrix& rho0) {
  if (dists.empty()) {
    throw ConfigError("predicted_effective_state: no distributions");
  }
  for (const auto& p : dists) {
    if (p.n_points() != dists.front().n_points() || p.n_qubits() != dists.front().n_qubits()) {
      throw ShapeError("predicted_effective_state: distribution shapes differ");
    }
  }
  std::map<PauliTuple, double> weights;
  double total = 0.0;
  for (const auto& [t, v] : dists.front().entries()) {
    double w = std::max(0.0, v);
    for (std::size_t k = 1; k < dists.size(); ++k) w *= dists[k](t);
    if (w > 0.0) {
      weights[t] = w;
      total += w;
    }
  }
  if (!(total > 1e-300)) {
    throw SingularDenominator("predicted_effective_state: distributions have disjoint support");
  }
  return pauli_mixture(weights, dists.front().n_qubits(), mid_ops, rho0);
}

/// sum_ij p_ij p'_ij P_j U(P_i rho P_i) P_j / sum_ij p_ij p'_ij.
inline DensityMatrix predicted_effective_state(const JointPauliDistribution& p, const JointPauliDistribution& p_prime,
                                               const std::vector<QuantumChannel>& mid_ops, const DensityMatrix& rho0) {
  const std::vector<JointPauliDistribution> both{p, p_prime};
  return predicted_effective_state(std::span<const JointPauliDistribution>(both), mid_ops, rho0);
}

// ---------------------------------------------------------------------------
// Shot sampling of the ratio estimator <X (x) O> / <X (x) I>.

struct EstimatorSample {
  std::size_t shots = 0;
  double o_eff_hat = 0.0;
  double x_mean = 0.0;
  double y_mean = 0.0;
  /// Per-shot sample variances and covariance (K-1 normalization).
  double x_var = 0.0;
  double y_var = 0.0;
  double xy_cov = 0.0;
  /// Delta-method variance of x/y from the sample moments.
  double sample_variance = 0.0;
};

/// Joint outcome distribution of the commuting pair (X (x) O, X (x) I): each
/// outcome is (x, y) = (s * lambda_k, s) for control sign s and eigenvalue
/// lambda_k of O.
struct ShotDistribution {
  std::vector<double> x_values;
  std::vector<double> y_values;
  std::vector<double> cumulative;
};

inline ShotDistribution shot_distribution(const DensityMatrix& control_main, const ComplexMatrix& observable) {
  const auto d = observable.rows();
  if (static_cast<Eigen::Index>(control_main.dim()) != 2 * d) {
    throw ShapeError("shot_distribution: observable does not match the main register");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (observable + observable.adjoint()));
  ComplexVector plus(2), minus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  ShotDistribution dist;
  std::vector<double> probs;
  for (int s = 0; s < 2; ++s) {
    const ComplexVector& cv = s == 0 ? plus : minus;
    const double sign = s == 0 ? 1.0 : -1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const ComplexVector v = kron_vector(cv, ComplexVector(solver.eigenvectors().col(k)));
      const double p = (v.adjoint() * control_main.matrix() * v)(0, 0).real();
      probs.push_back(std::max(0.0, p));
      dist.x_values.push_back(sign * solver.eigenvalues()(k));
      dist.y_values.push_back(sign);
    }
  }
  double acc = 0.0;
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double p : probs) {
    acc += p / total;
    dist.cumulative.push_back(acc);
  }
  dist.cumulative.back() = 1.0;
  return dist;
}

inline constexpr std::size_t kShotBatch = 4096;

/// Draws `shots` joint outcomes in seeded batches of kShotBatch, reduced in
/// batch order.
inline EstimatorSample sample_estimator(const EffectiveResult& result, const ComplexMatrix& observable,
                                        std::size_t shots, std::uint64_t seed) {
  if (shots < 2) {
    throw DomainError("sample_estimator: need at least two shots");
  }
  const ShotDistribution dist = shot_distribution(result.control_main, observable);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const std::size_t batches = (shots + kShotBatch - 1) / kShotBatch;
  for (std::size_t b = 0; b < batches; ++b) {
    std::mt19937_64 rng(derive_seed(seed, b));
    const std::size_t n = std::min(kShotBatch, shots - b * kShotBatch);
    double bx = 0, by = 0, bxx = 0, byy = 0, bxy = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const double u = uniform01(rng);
      const auto it = std::upper_bound(dist.cumulative.begin(), dist.cumulative.end(), u);
      const auto k = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - dist.cumulative.begin(),
                                                                       static_cast<std::ptrdiff_t>(dist.cumulative.size()) - 1));
      const double x = dist.x_values[k], y = dist.y_values[k];
      bx += x;
      by += y;
      bxx += x * x;
      byy += y * y;
      bxy += x * y;
    }
    sx += bx;
    sy += by;
    sxx += bxx;
    syy += byy;
    sxy += bxy;
  }
  const double k = static_cast<double>(shots);
  EstimatorSample out;
  out.shots = shots;
  out.x_mean = sx / k;
  out.y_mean = sy / k;
  if (out.y_mean == 0.0) {
    throw SingularDenominator("sample mean of <X> is zero; increase the number of shots");
  }
  out.x_var = (sxx - k * out.x_mean * out.x_mean) / (k - 1.0);
  out.y_var = (syy - k * out.y_mean * out.y_mean) / (k - 1.0);
  out.xy_cov = (sxy - k * out.x_mean * out.y_mean) / (k - 1.0);
  out.o_eff_hat = out.x_mean / out.y_mean;
  const double r = out.o_eff_hat;
  out.sample_variance =
      std::max(0.0, (out.x_var - 2.0 * r * out.xy_cov + r * r * out.y_var) / (k * out.y_mean * out.y_mean));
  return out;
}

inline EstimatorSample sample_estimator(const ProtocolConfig& cfg, std::size_t shots, std::uint64_t seed) {
  return sample_estimator(run_protocol_exact(cfg), cfg.observable, shots, seed);
}

}  // namespace nmpure
