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

// CPTP maps in Kraus form, with Choi, chi-matrix and Pauli-transfer views.
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nmpure/errors.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/tensor.hpp"

namespace nmpure {

class QuantumChannel {
 public:
  static constexpr double kTraceTolerance = 1e-9;

  explicit QuantumChannel(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) {
      throw ShapeError("QuantumChannel: no Kraus operators");
    }
    const auto out = kraus_.front().rows();
    const auto in = kraus_.front().cols();
    ComplexMatrix sum = ComplexMatrix::Zero(in, in);
    for (const auto& k : kraus_) {
      if (k.rows() != out || k.cols() != in) {
        throw ShapeError("QuantumChannel: Kraus operators disagree in shape");
      }
      if (!all_finite(k)) {
        throw DomainError("QuantumChannel: non-finite Kraus entry");
      }
      sum += k.adjoint() * k;
    }
    if (max_abs(sum - ComplexMatrix::Identity(in, in)) > kTraceTolerance) {
      throw DomainError("QuantumChannel: Kraus operators are not trace preserving");
    }
  }

  static QuantumChannel unitary(const ComplexMatrix& u) {
    if (!is_unitary(u)) {
      throw DomainError("QuantumChannel::unitary: matrix is not unitary");
    }
    return QuantumChannel({u});
  }

  static QuantumChannel identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return QuantumChannel({ComplexMatrix::Identity(d, d)});
  }

  std::size_t in_dim() const { return static_cast<std::size_t>(kraus_.front().cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(kraus_.front().rows()); }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  bool is_unitary_channel() const { return kraus_.size() == 1 && in_dim() == out_dim(); }

  /// sum_k K rho K^dagger on a full-dimension operator.
  ComplexMatrix operator()(const ComplexMatrix& rho) const {
    if (static_cast<std::size_t>(rho.rows()) != in_dim() || rho.rows() != rho.cols()) {
      throw ShapeError("QuantumChannel: input dimension mismatch");
    }
    ComplexMatrix out = ComplexMatrix::Zero(kraus_.front().rows(), kraus_.front().rows());
    for (const auto& k : kraus_) out += k * rho * k.adjoint();
    return out;
  }

 private:
  std::vector<ComplexMatrix> kraus_;
};

namespace detail {

/// Channel acting on the split's selected registers of a raw operator.
inline ComplexMatrix apply_local(const QuantumChannel& ch, const IndexSplit& split, const ComplexMatrix& m) {
  ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
  for (const auto& k : ch.kraus()) out += conjugate(split, k, m);
  return out;
}

inline ComplexMatrix apply_local(const QuantumChannel& ch, const RegisterLayout& layout,
                                 const std::vector<std::string>& targets, const ComplexMatrix& m) {
  const IndexSplit split(layout, targets);
  if (split.selected_dim() != ch.in_dim() || ch.in_dim() != ch.out_dim()) {
    throw ShapeError("apply: channel dimension does not match targets");
  }
  return apply_local(ch, split, m);
}

}  // namespace detail

/// Applies `ch` to the `targets` registers of `rho` and re-validates the
/// result as a state.
inline DensityMatrix apply(const QuantumChannel& ch, const DensityMatrix& rho, const std::vector<std::string>& targets) {
  ComplexMatrix out = detail::apply_local(ch, rho.layout(), targets, rho.matrix());
  return DensityMatrix(rho.layout(), symmetrized(out));
}

/// second after first.
inline QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  if (first.out_dim() != second.in_dim()) {
    throw ShapeError("compose: dimension mismatch");
  }
  std::vector<ComplexMatrix> kraus;
  for (const auto& b : second.kraus()) {
    for (const auto& a : first.kraus()) kraus.push_back(b * a);
  }
  return QuantumChannel(std::move(kraus));
}

/// ch (x) ch' acting on a product space.
inline QuantumChannel tensor(const QuantumChannel& a, const QuantumChannel& b) {
  std::vector<ComplexMatrix> kraus;
  for (const auto& x : a.kraus()) {
    for (const auto& y : b.kraus()) kraus.push_back(kron(x, y));
  }
  return QuantumChannel(std::move(kraus));
}

/// Uniformly random n-qubit Pauli: every input goes to I / 2^n.
inline QuantumChannel depolarizing_complete(std::size_t n) {
  if (n == 0) {
    throw DomainError("depolarizing_complete: need at least one qubit");
  }
  const double scale = 1.0 / static_cast<double>(std::uint64_t{1} << n);
  std::vector<ComplexMatrix> kraus;
  for (std::uint64_t k = 0; k < pow4(n); ++k) kraus.push_back(scale * pauli_matrix(n, k));
  return QuantumChannel(std::move(kraus));
}

/// Pauli channel rho -> sum_k w_k P_k rho P_k.
inline QuantumChannel pauli_channel(std::size_t n, const std::vector<double>& weights) {
  if (weights.size() != pow4(n)) {
    throw ShapeError("pauli_channel: need 4^n weights");
  }
  std::vector<ComplexMatrix> kraus;
  for (std::uint64_t k = 0; k < pow4(n); ++k) {
    if (weights[k] < 0.0) throw DomainError("pauli_channel: negative weight");
    if (weights[k] > 0.0) kraus.push_back(std::sqrt(weights[k]) * pauli_matrix(n, k));
  }
  return QuantumChannel(std::move(kraus));
}

/// rho -> Tr_env[V (rho (x) env) V^dagger] with V on system (x) environment.
/// Kraus operators come from the eigendecomposition of the environment state.
inline QuantumChannel dilation_channel(const ComplexMatrix& joint_unitary, const ComplexMatrix& env_state) {
  const auto de = env_state.rows();
  if (env_state.cols() != de || de == 0 || joint_unitary.rows() % de != 0 || joint_unitary.rows() != joint_unitary.cols()) {
    throw ShapeError("dilation_channel: dimension mismatch");
  }
  const auto ds = joint_unitary.rows() / de;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (env_state + env_state.adjoint()));
  std::vector<ComplexMatrix> kraus;
  for (Eigen::Index e = 0; e < de; ++e) {
    const double w = solver.eigenvalues()(e);
    if (w <= 1e-14) continue;
    const ComplexVector ket = solver.eigenvectors().col(e);
    for (Eigen::Index f = 0; f < de; ++f) {
      // K = sqrt(w) (I (x) <f|) V (I (x) |e>)
      ComplexMatrix k = ComplexMatrix::Zero(ds, ds);
      for (Eigen::Index a = 0; a < ds; ++a) {
        for (Eigen::Index b = 0; b < ds; ++b) {
          Complex acc = 0.0;
          for (Eigen::Index g = 0; g < de; ++g) acc += joint_unitary(a * de + f, b * de + g) * ket(g);
          k(a, b) = std::sqrt(w) * acc;
        }
      }
      if (max_abs(k) > 1e-15) kraus.push_back(std::move(k));
    }
  }
  return QuantumChannel(std::move(kraus));
}

inline ComplexMatrix swap_matrix(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) s(b * d + a, a * d + b) = 1.0;
  }
  return s;
}

/// C(rho) = Tr_2[e^{i S tau} (rho (x) I/2) e^{-i S tau}], S the two-qubit SWAP.
inline QuantumChannel partial_swap_channel(double tau) {
  const ComplexMatrix v = matrix_exp_unitary(swap_matrix(2), -tau);
  return dilation_channel(v, ComplexMatrix::Identity(2, 2) / 2.0);
}

// ---------------------------------------------------------------------------
// Representations.

/// (id (x) ch)(|Phi><Phi|) with normalized |Phi>; layout ("in", "out").
inline DensityMatrix choi(const QuantumChannel& ch) {
  const auto din = static_cast<Eigen::Index>(ch.in_dim());
  const auto dout = static_cast<Eigen::Index>(ch.out_dim());
  ComplexMatrix j = ComplexMatrix::Zero(din * dout, din * dout);
  for (Eigen::Index a = 0; a < din; ++a) {
    for (Eigen::Index b = 0; b < din; ++b) {
      ComplexMatrix eab = ComplexMatrix::Zero(din, din);
      eab(a, b) = 1.0;
      j.block(a * dout, b * dout, dout, dout) = ch(eab) / static_cast<double>(din);
    }
  }
  return DensityMatrix(RegisterLayout{{"in", ch.in_dim()}, {"out", ch.out_dim()}}, symmetrized(j));
}

/// Kraus form recovered from a normalized Choi matrix on (in, out).
inline QuantumChannel from_choi(const ComplexMatrix& j, std::size_t in_dim, std::size_t out_dim) {
  const auto din = static_cast<Eigen::Index>(in_dim);
  const auto dout = static_cast<Eigen::Index>(out_dim);
  if (j.rows() != din * dout || j.cols() != din * dout) {
    throw ShapeError("from_choi: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (j + j.adjoint()));
  std::vector<ComplexMatrix> kraus;
  for (Eigen::Index e = 0; e < j.rows(); ++e) {
    const double lambda = solver.eigenvalues()(e);
    if (lambda <= 1e-14) continue;
    const double scale = std::sqrt(lambda * static_cast<double>(din));
    ComplexMatrix k(dout, din);
    for (Eigen::Index a = 0; a < din; ++a) {
      for (Eigen::Index o = 0; o < dout; ++o) k(o, a) = scale * solver.eigenvectors()(a * dout + o, e);
    }
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(std::move(kraus));
}

namespace detail {
inline std::size_t qubit_count(std::size_t dim) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim) {
    throw DomainError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  return n;
}
}  // namespace detail

/// chi with ch(rho) = sum_ab chi_ab P_a rho P_b, indexed in PauliString
/// order and normalized to Tr chi = 1.
inline ComplexMatrix chi_matrix(const QuantumChannel& ch) {
  if (ch.in_dim() != ch.out_dim()) {
    throw ShapeError("chi_matrix: channel must be square");
  }
  const std::size_t n = detail::qubit_count(ch.in_dim());
  const auto basis = pauli_basis(n);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  const double d = static_cast<double>(ch.in_dim());
  ComplexMatrix chi = ComplexMatrix::Zero(nb, nb);
  for (const auto& k : ch.kraus()) {
    ComplexVector c(nb);
    for (Eigen::Index a = 0; a < nb; ++a) c(a) = (basis[static_cast<std::size_t>(a)] * k).trace() / d;
    chi += c * c.adjoint();
  }
  return chi;
}

/// sum_ab chi_ab P_a rho P_b.
inline ComplexMatrix apply_chi(const ComplexMatrix& chi, const ComplexMatrix& rho) {
  const std::size_t n = detail::qubit_count(static_cast<std::size_t>(rho.rows()));
  const auto basis = pauli_basis(n);
  if (chi.rows() != static_cast<Eigen::Index>(basis.size())) {
    throw ShapeError("apply_chi: chi dimension mismatch");
  }
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t a = 0; a < basis.size(); ++a) {
    const ComplexMatrix left = basis[a] * rho;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const Complex c = chi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (c != Complex(0.0)) out += c * left * basis[b];
    }
  }
  return out;
}

/// R_ab = Tr[P_a ch(P_b)] / d.
inline RealMatrix ptm(const QuantumChannel& ch) {
  if (ch.in_dim() != ch.out_dim()) {
    throw ShapeError("ptm: channel must be square");
  }
  const std::size_t n = detail::qubit_count(ch.in_dim());
  const auto basis = pauli_basis(n);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  const double d = static_cast<double>(ch.in_dim());
  RealMatrix r(nb, nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const ComplexMatrix out = ch(basis[static_cast<std::size_t>(b)]);
    for (Eigen::Index a = 0; a < nb; ++a) r(a, b) = (basis[static_cast<std::size_t>(a)] * out).trace().real() / d;
  }
  return r;
}

}  // namespace nmpure
