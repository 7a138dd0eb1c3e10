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

// Pauli twirling of memory-bearing noise and extraction of the correlated
// Pauli-error distribution it induces.
//
// A twirl frame assigns one Pauli P_k to each time point; step k then runs as
// (P_k (x) I) E_k (P_k (x) I), i.e. the same Pauli is applied to the system
// just before and just after the noise. Ideal intermediate operations are
// never touched by a frame.
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <variant>
#include <vector>

#include "nmpure/channels.hpp"
#include "nmpure/errors.hpp"
#include "nmpure/noise.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/tensor.hpp"

namespace nmpure {

/// Exact enumeration is refused beyond this many frames.
inline constexpr std::uint64_t kMaxExactFrames = std::uint64_t{1} << 12;  // 4^6

struct TwirlFrame {
  std::vector<PauliString> paulis;
};

struct ExactTwirl {};

struct SampledTwirl {
  std::size_t count = 10;
  std::uint64_t seed = 0;
};

using TwirlMode = std::variant<ExactTwirl, SampledTwirl>;

struct TwirledProcess {
  NonMarkovSource source;
  TwirlMode mode = ExactTwirl{};
};

inline std::uint64_t frame_count(const NonMarkovSource& source) {
  const std::size_t digits = source.n_points() * source.sys_qubits();
  if (digits > 31) return UINT64_MAX;
  return pow4(digits);
}

/// Frame number `f` in mixed radix: time point 0 is the most significant digit.
inline TwirlFrame frame_from_index(const NonMarkovSource& source, std::uint64_t f) {
  const std::uint64_t per_point = pow4(source.sys_qubits());
  TwirlFrame frame;
  frame.paulis.resize(source.n_points(), PauliString::identity(source.sys_qubits()));
  for (std::size_t k = source.n_points(); k-- > 0;) {
    frame.paulis[k] = PauliString(source.sys_qubits(), f % per_point);
    f /= per_point;
  }
  return frame;
}

/// Uniform frame. The 4^n range is a power of two, so the modulus is unbiased.
inline TwirlFrame sample_frame(const NonMarkovSource& source, std::mt19937_64& rng) {
  const std::uint64_t per_point = pow4(source.sys_qubits());
  TwirlFrame frame;
  for (std::size_t k = 0; k < source.n_points(); ++k) {
    frame.paulis.emplace_back(source.sys_qubits(), rng() % per_point);
  }
  return frame;
}

/// Noise step conjugated on the system by a single Pauli.
inline QuantumChannel sandwich_step(const QuantumChannel& step, const PauliString& p, std::size_t env_dim) {
  const auto de = static_cast<Eigen::Index>(env_dim);
  const ComplexMatrix pe = kron(pauli_matrix(p), ComplexMatrix::Identity(de, de));
  std::vector<ComplexMatrix> kraus;
  for (const auto& k : step.kraus()) kraus.push_back(pe * k * pe);
  return QuantumChannel(std::move(kraus));
}

inline NonMarkovSource apply_frame(const NonMarkovSource& source, const TwirlFrame& frame) {
  if (frame.paulis.size() != source.n_points()) {
    throw ShapeError("twirl frame length does not match the number of time points");
  }
  std::vector<QuantumChannel> steps;
  for (std::size_t k = 0; k < source.n_points(); ++k) {
    steps.push_back(sandwich_step(source.steps()[k], frame.paulis[k], source.env_dim()));
  }
  return source.with_steps(std::move(steps));
}

/// Average of a step over all system Paulis, as a single channel.
inline QuantumChannel twirled_step(const QuantumChannel& step, std::size_t sys_qubits, std::size_t env_dim) {
  const auto de = static_cast<Eigen::Index>(env_dim);
  const double scale = 1.0 / static_cast<double>(std::uint64_t{1} << sys_qubits);
  std::vector<ComplexMatrix> kraus;
  for (std::uint64_t p = 0; p < pow4(sys_qubits); ++p) {
    const ComplexMatrix pe = kron(pauli_matrix(sys_qubits, p), ComplexMatrix::Identity(de, de));
    for (const auto& k : step.kraus()) kraus.push_back(scale * pe * k * pe);
  }
  return QuantumChannel(std::move(kraus));
}

/// Source whose every step is replaced by its exact twirl. Running it equals
/// the average over all frames.
inline NonMarkovSource twirled_source(const NonMarkovSource& source) {
  std::vector<QuantumChannel> steps;
  for (const auto& s : source.steps()) steps.push_back(twirled_step(s, source.sys_qubits(), source.env_dim()));
  return source.with_steps(std::move(steps));
}

namespace detail {

template <typename Run>
ComplexMatrix average_over_frames(const TwirledProcess& tp, Run&& run) {
  const NonMarkovSource& src = tp.source;
  ComplexMatrix acc;
  std::uint64_t n = 0;
  auto add = [&](const TwirlFrame& frame) {
    ComplexMatrix m = run(apply_frame(src, frame));
    if (n == 0) {
      acc = std::move(m);
    } else {
      acc += m;
    }
    ++n;
  };
  if (std::holds_alternative<ExactTwirl>(tp.mode)) {
    const std::uint64_t total = frame_count(src);
    if (total > kMaxExactFrames) {
      throw ConfigError("exact twirl would enumerate " + std::to_string(total) + " frames (limit 4096)");
    }
    for (std::uint64_t f = 0; f < total; ++f) add(frame_from_index(src, f));
  } else {
    const auto& s = std::get<SampledTwirl>(tp.mode);
    if (s.count == 0) {
      throw ConfigError("sampled twirl needs at least one frame");
    }
    std::mt19937_64 rng(s.seed);
    for (std::size_t f = 0; f < s.count; ++f) add(sample_frame(src, rng));
  }
  return acc / static_cast<double>(n);
}

}  // namespace detail

/// Frame-averaged output of the noisy circuit.
inline DensityMatrix run_twirled(const TwirledProcess& tp, const std::vector<QuantumChannel>& mid_ops,
                                 const DensityMatrix& rho0) {
  detail::check_mid_ops(tp.source, mid_ops);
  ComplexMatrix avg = detail::average_over_frames(
      tp, [&](const NonMarkovSource& framed) { return run_untwirled(framed, mid_ops, rho0).matrix(); });
  return DensityMatrix::on(kSys, symmetrized(avg));
}

/// Tensor product of the Pauli-Bell vectors of a tuple, on (in0,out0,in1,...).
inline ComplexVector pauli_bell_tuple_vector(std::size_t n_qubits, const PauliTuple& t) {
  ComplexVector v = ComplexVector::Ones(1);
  for (auto i : t) v = kron_vector(v, pauli_bell_vector(PauliString(n_qubits, i)));
  return v;
}

/// p_{i0...} = <Phi_{P_i0} (x) ... | comb_tw | Phi_{P_i0} (x) ...>, with the comb
/// twirled by exact frame enumeration.
inline JointPauliDistribution extract_joint_distribution(const NonMarkovSource& source) {
  const TwirledProcess tp{source, ExactTwirl{}};
  const ComplexMatrix comb_tw =
      detail::average_over_frames(tp, [](const NonMarkovSource& framed) { return comb_choi(framed).matrix(); });

  std::map<PauliTuple, double> probs;
  double total = 0.0;
  const std::uint64_t count = frame_count(source);
  for (std::uint64_t f = 0; f < count; ++f) {
    const TwirlFrame frame = frame_from_index(source, f);
    PauliTuple t;
    for (const auto& p : frame.paulis) t.push_back(static_cast<std::uint32_t>(p.index()));
    const ComplexVector v = pauli_bell_tuple_vector(source.sys_qubits(), t);
    const double p = (v.adjoint() * comb_tw * v)(0, 0).real();
    total += p;
    if (p < -JointPauliDistribution::kNegativeTolerance) {
      throw ExtractionError("extracted probability " + std::to_string(p) + " is negative");
    }
    if (std::abs(p) > 1e-15) probs[t] = p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ExtractionError("extracted probabilities sum to " + std::to_string(total));
  }
  for (auto& [t, p] : probs) p = std::max(0.0, p) / total;
  return JointPauliDistribution(source.n_points(), source.sys_qubits(), std::move(probs));
}

/// sum_t w_t (P_{t_last} o U_{last} o ... o U_0 o P_{t_0})(rho0) / sum_t w_t.
inline DensityMatrix pauli_mixture(const std::map<PauliTuple, double>& weights, std::size_t n_qubits,
                                   const std::vector<QuantumChannel>& mid_ops, const DensityMatrix& rho0) {
  const auto paulis = pauli_basis(n_qubits);
  ComplexMatrix acc = ComplexMatrix::Zero(rho0.matrix().rows(), rho0.matrix().cols());
  double total = 0.0;
  for (const auto& [t, w] : weights) {
    if (t.size() != mid_ops.size() + 1) {
      throw ConfigError("pauli_mixture: tuple length must be one more than the number of operations");
    }
    if (w == 0.0) continue;
    ComplexMatrix s = rho0.matrix();
    for (std::size_t k = 0; k < t.size(); ++k) {
      const ComplexMatrix& p = paulis[t[k]];
      s = p * s * p;
      if (k < mid_ops.size()) s = mid_ops[k](s);
    }
    acc += w * s;
    total += w;
  }
  if (std::abs(total) < 1e-300) {
    throw SingularDenominator("pauli_mixture: weights sum to zero");
  }
  return DensityMatrix::on(kSys, symmetrized(acc / total));
}

inline DensityMatrix pauli_mixture(const JointPauliDistribution& p, const std::vector<QuantumChannel>& mid_ops,
                                   const DensityMatrix& rho0) {
  return pauli_mixture(p.entries(), p.n_qubits(), mid_ops, rho0);
}

}  // namespace nmpure
