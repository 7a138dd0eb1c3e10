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

// Memory-bearing noise: one persistent environment and a joint
// system-environment operation at each time point.
//
// The environment is prepared once and carried, never re-initialized, from
// one time point to the next.
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "nmpure/channels.hpp"
#include "nmpure/errors.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/tensor.hpp"

namespace nmpure {

inline const std::string kSys = "sys";
inline const std::string kEnv = "env";

/// Joint noise steps act on system (x) environment, system first.
class NonMarkovSource {
 public:
  NonMarkovSource(std::size_t sys_qubits, ComplexMatrix env_init, std::vector<QuantumChannel> steps)
      : sys_qubits_(sys_qubits),
        env_init_(DensityMatrix::on(kEnv, std::move(env_init))),
        steps_(std::move(steps)) {
    if (sys_qubits_ == 0) {
      throw DomainError("NonMarkovSource: need at least one system qubit");
    }
    if (steps_.empty()) {
      throw ConfigError("NonMarkovSource: need at least one time point");
    }
    const std::size_t joint = sys_dim() * env_dim();
    for (const auto& s : steps_) {
      if (s.in_dim() != joint || s.out_dim() != joint) {
        throw ShapeError("NonMarkovSource: step dimension " + std::to_string(s.in_dim()) + " != sys*env " +
                         std::to_string(joint));
      }
    }
  }

  std::size_t sys_qubits() const { return sys_qubits_; }
  std::size_t sys_dim() const { return std::size_t{1} << sys_qubits_; }
  std::size_t env_dim() const { return env_init_.dim(); }
  std::size_t n_points() const { return steps_.size(); }
  const DensityMatrix& env_init() const { return env_init_; }
  const std::vector<QuantumChannel>& steps() const { return steps_; }

  NonMarkovSource with_steps(std::vector<QuantumChannel> steps) const {
    return NonMarkovSource(sys_qubits_, env_init_.matrix(), std::move(steps));
  }

  NonMarkovSource with_env_init(ComplexMatrix env) const { return NonMarkovSource(sys_qubits_, std::move(env), steps_); }

 private:
  std::size_t sys_qubits_;
  DensityMatrix env_init_;
  std::vector<QuantumChannel> steps_;
};

/// H = w1 . sigma_sys + w2 . sigma_env + J Z_sys Z_env, evolved for `time`.
struct HamiltonianNoiseSpec {
  std::array<double, 3> omega1{2.0, 1.3, 1.0};
  std::array<double, 3> omega2{-2.0, -1.3, -1.0};
  double coupling = 1.0;
  double time = 0.0;

  friend bool operator==(const HamiltonianNoiseSpec&, const HamiltonianNoiseSpec&) = default;
};

inline ComplexMatrix joint_hamiltonian(const HamiltonianNoiseSpec& spec) {
  const auto& p = single_qubit_paulis();
  const ComplexMatrix id = p[0];
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 3; ++a) {
    h += spec.omega1[a] * kron(p[a + 1], id);
    h += spec.omega2[a] * kron(id, p[a + 1]);
  }
  h += spec.coupling * kron(p[3], p[3]);
  return h;
}

inline ComplexMatrix ket0_projector(std::size_t dim = 2) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(0, 0) = 1.0;
  return m;
}

/// One system qubit, one environment qubit, `points` identical steps e^{-iHt}.
inline NonMarkovSource hamiltonian_noise(const HamiltonianNoiseSpec& spec, ComplexMatrix env_init = ket0_projector(),
                                         std::size_t points = 2) {
  const QuantumChannel step = QuantumChannel::unitary(matrix_exp_unitary(joint_hamiltonian(spec), spec.time));
  return NonMarkovSource(1, std::move(env_init), std::vector<QuantumChannel>(points, step));
}

namespace detail {

inline void check_mid_ops(const NonMarkovSource& source, const std::vector<QuantumChannel>& mid_ops) {
  if (mid_ops.size() + 1 != source.n_points()) {
    throw ConfigError("expected " + std::to_string(source.n_points() - 1) + " intermediate operations, got " +
                      std::to_string(mid_ops.size()));
  }
  for (const auto& op : mid_ops) {
    if (op.in_dim() != source.sys_dim() || op.out_dim() != source.sys_dim()) {
      throw ShapeError("intermediate operation does not act on the system dimension");
    }
  }
}

inline ComplexMatrix system_matrix(const NonMarkovSource& source, const DensityMatrix& rho0) {
  if (rho0.dim() != source.sys_dim()) {
    throw ShapeError("input state dimension does not match the source system");
  }
  return rho0.matrix();
}

}  // namespace detail

/// Tr_E[ E_n o (U_{n-1} (x) id) o ... o E_1 (rho0 (x) sigma) ].
inline DensityMatrix run_untwirled(const NonMarkovSource& source, const std::vector<QuantumChannel>& mid_ops,
                                   const DensityMatrix& rho0) {
  detail::check_mid_ops(source, mid_ops);
  const RegisterLayout layout{{kEnv, source.env_dim()}, {kSys, source.sys_dim()}};
  const detail::IndexSplit joint(layout, {kSys, kEnv});
  const detail::IndexSplit sys(layout, {kSys});
  ComplexMatrix state = kron(source.env_init().matrix(), detail::system_matrix(source, rho0));
  for (std::size_t k = 0; k < source.n_points(); ++k) {
    state = detail::apply_local(source.steps()[k], joint, state);
    if (k + 1 < source.n_points()) state = detail::apply_local(mid_ops[k], sys, state);
  }
  auto [out_layout, reduced] = partial_trace(state, layout, {kSys});
  return DensityMatrix(std::move(out_layout), symmetrized(reduced));
}

inline std::string comb_in(std::size_t k) { return "in" + std::to_string(k); }
inline std::string comb_out(std::size_t k) { return "out" + std::to_string(k); }

/// Choi state of the multi-time comb on (in0, out0, in1, out1, ...). Before
/// step k the system slot receives half of a fresh maximally entangled pair
/// whose partner is in_k; after step k the system content is moved to out_k.
inline DensityMatrix comb_choi(const NonMarkovSource& source) {
  const std::size_t d = source.sys_dim();
  const auto di = static_cast<Eigen::Index>(d);
  ComplexVector phi = ComplexVector::Zero(di * di);
  for (Eigen::Index x = 0; x < di; ++x) phi(x * di + x) = 1.0 / std::sqrt(static_cast<double>(d));
  const ComplexMatrix bell = phi * phi.adjoint();

  RegisterLayout layout{{kEnv, source.env_dim()}};
  ComplexMatrix state = source.env_init().matrix();
  for (std::size_t k = 0; k < source.n_points(); ++k) {
    layout = layout + RegisterLayout{{comb_in(k), d}, {kSys, d}};
    state = kron(state, bell);
    state = detail::apply_local(source.steps()[k], layout, {kSys, kEnv}, state);
    layout = layout.renamed(kSys, comb_out(k));
  }
  std::vector<std::string> keep;
  for (std::size_t k = 0; k < source.n_points(); ++k) {
    keep.push_back(comb_in(k));
    keep.push_back(comb_out(k));
  }
  auto [out_layout, reduced] = partial_trace(state, layout, keep);
  return DensityMatrix(std::move(out_layout), symmetrized(reduced));
}

}  // namespace nmpure
