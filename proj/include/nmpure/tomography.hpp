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

// Single-qubit state and process reconstruction, and the fidelity measures
// used to compare runs with and without suppression.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <functional>
#include <sstream>
#include <string>

#include "nmpure/channels.hpp"
#include "nmpure/errors.hpp"
#include "nmpure/pauli.hpp"
#include "nmpure/tensor.hpp"

namespace nmpure {

struct BlochState {
  DensityMatrix state;
  /// True when the Bloch vector was longer than 1 and got rescaled onto the sphere.
  bool projected = false;
};

/// 1/2 (I + xX + yY + zZ), radially projected onto the Bloch ball if needed.
inline BlochState state_from_pauli(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  bool projected = false;
  if (norm > 1.0) {
    x /= norm;
    y /= norm;
    z /= norm;
    projected = true;
  }
  const auto& p = single_qubit_paulis();
  const ComplexMatrix m = 0.5 * (p[0] + x * p[1] + y * p[2] + z * p[3]);
  return {DensityMatrix::on("q", m), projected};
}

/// F = 1 - |1 - <Z>| / 2.
inline double z_fidelity(double z) { return 1.0 - std::abs(1.0 - z) / 2.0; }

struct FidelityResult {
  double value = 0.0;
  /// True when an input had negative eigenvalues and was clipped to PSD.
  bool clipped = false;
};

namespace detail {
inline ComplexMatrix clip_to_state(const ComplexMatrix& m, bool& clipped) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()));
  Eigen::VectorXd ev = solver.eigenvalues();
  if (ev.minCoeff() >= 0.0) {
    return 0.5 * (m + m.adjoint());
  }
  clipped = true;
  ev = ev.cwiseMax(0.0);
  ev /= ev.sum();
  return solver.eigenvectors() * ev.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}
}  // namespace detail

/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1].
inline FidelityResult uhlmann_fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw ShapeError("uhlmann_fidelity: dimension mismatch");
  }
  FidelityResult r;
  const ComplexMatrix a = detail::clip_to_state(rho, r.clipped);
  const ComplexMatrix b = detail::clip_to_state(sigma, r.clipped);
  const ComplexMatrix sa = psd_sqrt(a);
  const ComplexMatrix inner = sa * b * sa;
  const Eigen::VectorXd ev = hermitian_eigenvalues(inner);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ev.cwiseAbs().maxCoeff());
  double root_trace = 0.0;
  for (double e : ev) {
    if (e > floor) root_trace += std::sqrt(e);
  }
  r.value = std::clamp(root_trace * root_trace, 0.0, 1.0);
  return r;
}

inline FidelityResult uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return uhlmann_fidelity(rho.matrix(), sigma.matrix());
}

// ---------------------------------------------------------------------------

enum class TomographyInput { kZero, kOne, kPlus, kPlusI };

inline constexpr std::array<TomographyInput, 4> kTomographyInputs{TomographyInput::kZero, TomographyInput::kOne,
                                                                  TomographyInput::kPlus, TomographyInput::kPlusI};

inline std::string label(TomographyInput in) {
  switch (in) {
    case TomographyInput::kZero: return "0";
    case TomographyInput::kOne: return "1";
    case TomographyInput::kPlus: return "+";
    case TomographyInput::kPlusI: return "+i";
  }
  return "?";
}

inline DensityMatrix input_state(TomographyInput in) {
  ComplexVector v(2);
  const double r = 1.0 / std::sqrt(2.0);
  switch (in) {
    case TomographyInput::kZero: v << 1.0, 0.0; break;
    case TomographyInput::kOne: v << 0.0, 1.0; break;
    case TomographyInput::kPlus: v << r, r; break;
    case TomographyInput::kPlusI: v << r, Complex(0.0, r); break;
  }
  return DensityMatrix::pure(RegisterLayout{{"q", 2}}, v);
}

/// chi of a single-qubit process in the Pauli basis, Tr chi = 1.
struct ProcessMatrix {
  ComplexMatrix chi;

  explicit ProcessMatrix(ComplexMatrix c) : chi(std::move(c)) {
    if (chi.rows() != 4 || chi.cols() != 4) {
      throw ShapeError("ProcessMatrix: chi must be 4x4");
    }
    if (hermitian_deviation(chi) > 1e-9) {
      throw DomainError("ProcessMatrix: chi is not Hermitian");
    }
    if (std::abs(chi.trace() - Complex(1.0)) > 1e-8) {
      throw DomainError("ProcessMatrix: Tr chi != 1");
    }
  }

  double frobenius_distance(const ProcessMatrix& other) const { return (chi - other.chi).norm(); }

  /// Real part block followed by imaginary part block, one row per line.
  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (const bool imag : {false, true}) {
      os << (imag ? "# imag\n" : "# real\n");
      for (Eigen::Index r = 0; r < 4; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
          os << (imag ? chi(r, c).imag() : chi(r, c).real()) << (c == 3 ? "\n" : ",");
        }
      }
    }
    return os.str();
  }
};

using ProcessRunner = std::function<ComplexMatrix(TomographyInput)>;

/// Linear-inversion process tomography from the outputs on |0>, |1>, |+>, |+i>.
/// Outputs need only be Hermitian with unit trace.
inline ProcessMatrix process_tomography(const ProcessRunner& runner) {
  std::array<ComplexMatrix, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = runner(kTomographyInputs[k]);
    if (out[k].rows() != 2 || out[k].cols() != 2) {
      throw ShapeError("process_tomography: runner must return single-qubit states");
    }
  }
  const Complex i(0.0, 1.0);
  // Images of the matrix units |a><b|.
  const ComplexMatrix e00 = out[0];
  const ComplexMatrix e11 = out[1];
  const ComplexMatrix e01 = out[2] + i * out[3] - 0.5 * (1.0 + i) * (e00 + e11);
  const ComplexMatrix e10 = out[2] - i * out[3] - 0.5 * (1.0 - i) * (e00 + e11);
  ComplexMatrix j(4, 4);
  j.block(0, 0, 2, 2) = e00 / 2.0;
  j.block(0, 2, 2, 2) = e01 / 2.0;
  j.block(2, 0, 2, 2) = e10 / 2.0;
  j.block(2, 2, 2, 2) = e11 / 2.0;

  // chi_ab = <Phi_a| J |Phi_b> with |Phi_a> = (I (x) P_a)|Phi>.
  const auto basis = pauli_basis(1);
  ComplexVector phi = ComplexVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  std::array<ComplexVector, 4> vecs;
  for (std::size_t a = 0; a < 4; ++a) vecs[a] = kron(ComplexMatrix::Identity(2, 2), basis[a]) * phi;
  ComplexMatrix chi(4, 4);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      chi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = (vecs[a].adjoint() * j * vecs[b])(0, 0);
    }
  }
  if (!all_finite(chi)) {
    throw InternalError("process_tomography: inversion produced non-finite entries");
  }
  return ProcessMatrix(0.5 * (chi + chi.adjoint()));
}

inline ProcessMatrix process_tomography(const QuantumChannel& ch) {
  return process_tomography([&](TomographyInput in) { return ch(input_state(in).matrix()); });
}

}  // namespace nmpure
