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

// Dense complex linear algebra over small multi-register systems.
//
// Tensor-order convention: for a RegisterLayout (s0, s1, ..., sk) the basis
// index of a state is the mixed-radix number with s0 as the most significant
// digit, i.e. operators on the layout are elements of s0 (x) s1 (x) ... (x) sk.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nmpure/errors.hpp"

namespace nmpure {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

namespace tol {
inline constexpr double kPhysical = 1e-10;
inline constexpr double kAlgebraic = 1e-12;
inline constexpr double kPsd = 1e-9;
inline constexpr double kDrift = 1e-8;
}  // namespace tol

struct Subsystem {
  std::string name;
  std::size_t dim = 2;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

/// Ordered list of named subsystems. Leftmost is the most significant tensor
/// factor.
class RegisterLayout {
 public:
  RegisterLayout() = default;

  explicit RegisterLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    std::unordered_set<std::string> seen;
    total_dim_ = 1;
    for (const auto& s : subsystems_) {
      if (s.dim == 0) {
        throw ShapeError("subsystem '" + s.name + "' has zero dimension");
      }
      if (!seen.insert(s.name).second) {
        throw NameError("duplicate subsystem name '" + s.name + "'");
      }
      total_dim_ *= s.dim;
    }
  }

  RegisterLayout(std::initializer_list<Subsystem> subsystems)
      : RegisterLayout(std::vector<Subsystem>(subsystems)) {}

  /// One qubit per name.
  static RegisterLayout qubits(const std::vector<std::string>& names) {
    std::vector<Subsystem> subs;
    subs.reserve(names.size());
    for (const auto& n : names) {
      subs.push_back({n, 2});
    }
    return RegisterLayout(std::move(subs));
  }

  std::size_t size() const { return subsystems_.size(); }
  std::size_t total_dim() const { return total_dim_; }
  const Subsystem& operator[](std::size_t i) const { return subsystems_[i]; }
  const std::vector<Subsystem>& subsystems() const { return subsystems_; }

  bool contains(const std::string& name) const {
    return std::any_of(subsystems_.begin(), subsystems_.end(),
                       [&](const Subsystem& s) { return s.name == name; });
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < subsystems_.size(); ++i) {
      if (subsystems_[i].name == name) {
        return i;
      }
    }
    throw NameError("unknown subsystem '" + name + "'");
  }

  std::size_t dim_of(const std::string& name) const { return subsystems_[index_of(name)].dim; }

  /// Concatenation; names must stay unique.
  RegisterLayout operator+(const RegisterLayout& other) const {
    std::vector<Subsystem> subs = subsystems_;
    subs.insert(subs.end(), other.subsystems_.begin(), other.subsystems_.end());
    return RegisterLayout(std::move(subs));
  }

  RegisterLayout renamed(const std::string& from, const std::string& to) const {
    std::vector<Subsystem> subs = subsystems_;
    subs[index_of(from)].name = to;
    return RegisterLayout(std::move(subs));
  }

  friend bool operator==(const RegisterLayout& a, const RegisterLayout& b) {
    return a.subsystems_ == b.subsystems_;
  }

 private:
  std::vector<Subsystem> subsystems_;
  std::size_t total_dim_ = 1;
};

// ---------------------------------------------------------------------------
// Matrix predicates.

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermitian_deviation(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    return INFINITY;
  }
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kPhysical) {
  return hermitian_deviation(m) <= tolerance;
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.array().isFinite().all();
}

inline bool is_unitary(const ComplexMatrix& u, double tolerance = tol::kPhysical) {
  if (u.rows() != u.cols()) {
    return false;
  }
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())) <= tolerance;
}

inline Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// 1/2 ||a - b||_1 for Hermitian a, b.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("trace_distance: shape mismatch");
  }
  return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// DensityMatrix.

/// A state on a RegisterLayout. The primary constructor enforces
/// Hermiticity (1e-10), unit trace (1e-10) and positivity (-1e-9).
/// `quasi` admits Hermitian unit-trace matrices that may be indefinite, such
/// as post-processed effective states.
class DensityMatrix {
 public:
  DensityMatrix(RegisterLayout layout, ComplexMatrix mat) : DensityMatrix(std::move(layout), std::move(mat), true) {}

  static DensityMatrix quasi(RegisterLayout layout, ComplexMatrix mat) {
    return DensityMatrix(std::move(layout), std::move(mat), false);
  }

  /// Convenience for single-register states.
  static DensityMatrix on(const std::string& name, ComplexMatrix mat) {
    const auto d = static_cast<std::size_t>(mat.rows());
    return DensityMatrix(RegisterLayout{{name, d}}, std::move(mat));
  }

  static DensityMatrix pure(RegisterLayout layout, const ComplexVector& psi) {
    const ComplexVector v = psi / psi.norm();
    return DensityMatrix(std::move(layout), v * v.adjoint());
  }

  static DensityMatrix basis(RegisterLayout layout, std::size_t index) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return DensityMatrix(std::move(layout), std::move(m));
  }

  static DensityMatrix maximally_mixed(RegisterLayout layout) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return DensityMatrix(std::move(layout), ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  }

  const RegisterLayout& layout() const { return layout_; }
  const ComplexMatrix& matrix() const { return mat_; }
  std::size_t dim() const { return layout_.total_dim(); }
  double min_eigenvalue() const { return hermitian_eigenvalues(mat_).minCoeff(); }
  bool is_psd(double tolerance = tol::kPsd) const { return min_eigenvalue() >= -tolerance; }

  double expectation(const ComplexMatrix& observable) const {
    if (observable.rows() != mat_.rows() || observable.cols() != mat_.cols()) {
      throw ShapeError("expectation: observable dimension mismatch");
    }
    return (observable * mat_).trace().real();
  }

 private:
  DensityMatrix(RegisterLayout layout, ComplexMatrix mat, bool require_psd)
      : layout_(std::move(layout)), mat_(std::move(mat)) {
    const auto d = static_cast<Eigen::Index>(layout_.total_dim());
    if (mat_.rows() != d || mat_.cols() != d) {
      throw ShapeError("density matrix is " + std::to_string(mat_.rows()) + "x" + std::to_string(mat_.cols()) +
                       " but layout dimension is " + std::to_string(d));
    }
    if (!all_finite(mat_)) {
      throw DomainError("density matrix has non-finite entries");
    }
    if (hermitian_deviation(mat_) > tol::kPhysical) {
      throw DomainError("density matrix is not Hermitian");
    }
    if (std::abs(mat_.trace() - Complex(1.0)) > tol::kPhysical) {
      throw DomainError("density matrix trace is not 1");
    }
    if (require_psd && !is_psd()) {
      throw DomainError("density matrix has a negative eigenvalue");
    }
  }

  RegisterLayout layout_;
  ComplexMatrix mat_;
};

/// Symmetrizes a matrix produced by a physical map. Deviations above 1e-8
/// indicate a bug rather than rounding and are reported.
inline ComplexMatrix symmetrized(const ComplexMatrix& m) {
  if (hermitian_deviation(m) > tol::kDrift) {
    throw InternalError("Hermiticity drift above 1e-8");
  }
  return 0.5 * (m + m.adjoint());
}

// ---------------------------------------------------------------------------
// Kronecker products.

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexVector kron_vector(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

inline ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) {
    out = kron(out, f);
  }
  return out;
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::quasi(a.layout() + b.layout(), kron(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------------------
// Index bookkeeping for operators acting on a subset of a layout.

namespace detail {

/// Splits every basis index of a layout into (selected-index, rest-index),
/// where the selected digits are read in the caller's order and the rest in
/// layout order. `compose(rest, sel)` inverts the split.
class IndexSplit {
 public:
  IndexSplit(const RegisterLayout& layout, const std::vector<std::string>& selected) {
    const std::size_t k = layout.size();
    std::vector<std::size_t> sel_pos;
    std::vector<bool> is_sel(k, false);
    for (const auto& name : selected) {
      const std::size_t p = layout.index_of(name);
      if (is_sel[p]) {
        throw NameError("subsystem '" + name + "' listed twice");
      }
      is_sel[p] = true;
      sel_pos.push_back(p);
    }
    std::vector<std::size_t> rest_pos;
    for (std::size_t p = 0; p < k; ++p) {
      if (!is_sel[p]) {
        rest_pos.push_back(p);
      }
    }
    sel_dim_ = 1;
    for (auto p : sel_pos) sel_dim_ *= layout[p].dim;
    rest_dim_ = 1;
    for (auto p : rest_pos) rest_dim_ *= layout[p].dim;

    // Stride of each layout position in the selected and rest orderings.
    std::vector<std::size_t> sel_stride(k, 0), rest_stride(k, 0);
    std::size_t s = 1;
    for (auto it = sel_pos.rbegin(); it != sel_pos.rend(); ++it) {
      sel_stride[*it] = s;
      s *= layout[*it].dim;
    }
    s = 1;
    for (auto it = rest_pos.rbegin(); it != rest_pos.rend(); ++it) {
      rest_stride[*it] = s;
      s *= layout[*it].dim;
    }

    const std::size_t total = layout.total_dim();
    sel_of_.resize(total);
    rest_of_.resize(total);
    full_of_.assign(total, 0);
    std::vector<std::size_t> digits(k, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t si = 0, ri = 0;
      for (std::size_t p = 0; p < k; ++p) {
        if (is_sel[p]) {
          si += digits[p] * sel_stride[p];
        } else {
          ri += digits[p] * rest_stride[p];
        }
      }
      sel_of_[idx] = si;
      rest_of_[idx] = ri;
      full_of_[ri * sel_dim_ + si] = idx;
      for (std::size_t p = k; p-- > 0;) {
        if (++digits[p] < layout[p].dim) break;
        digits[p] = 0;
      }
    }
  }

  std::size_t selected_dim() const { return sel_dim_; }
  std::size_t rest_dim() const { return rest_dim_; }
  std::size_t selected(std::size_t full) const { return sel_of_[full]; }
  std::size_t rest(std::size_t full) const { return rest_of_[full]; }
  std::size_t compose(std::size_t rest, std::size_t sel) const { return full_of_[rest * sel_dim_ + sel]; }

 private:
  std::size_t sel_dim_ = 1;
  std::size_t rest_dim_ = 1;
  std::vector<std::size_t> sel_of_;
  std::vector<std::size_t> rest_of_;
  std::vector<std::size_t> full_of_;
};

/// Returns E * m where E is `op` embedded on the split's selected registers.
inline ComplexMatrix left_apply(const IndexSplit& split, const ComplexMatrix& op, const ComplexMatrix& m) {
  const auto n = m.rows();
  const auto ds = static_cast<Eigen::Index>(split.selected_dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, m.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto sr = static_cast<Eigen::Index>(split.selected(static_cast<std::size_t>(r)));
    const std::size_t rr = split.rest(static_cast<std::size_t>(r));
    for (Eigen::Index t = 0; t < ds; ++t) {
      const Complex c = op(sr, t);
      if (c == Complex(0.0)) continue;
      out.row(r) += c * m.row(static_cast<Eigen::Index>(split.compose(rr, static_cast<std::size_t>(t))));
    }
  }
  return out;
}

/// Returns E m E^dagger.
inline ComplexMatrix conjugate(const IndexSplit& split, const ComplexMatrix& op, const ComplexMatrix& m) {
  const ComplexMatrix left = left_apply(split, op, m);
  // E m E^+ = (E (E m)^+)^+
  return left_apply(split, op, left.adjoint()).adjoint();
}

}  // namespace detail

/// `op` acting on `targets` (in the given order) and identity elsewhere.
inline ComplexMatrix embed(const ComplexMatrix& op, const RegisterLayout& layout, const std::vector<std::string>& targets) {
  const detail::IndexSplit split(layout, targets);
  const auto ds = static_cast<Eigen::Index>(split.selected_dim());
  if (op.rows() != ds || op.cols() != ds) {
    throw ShapeError("embed: operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                     " but targets span dimension " + std::to_string(ds));
  }
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto sr = static_cast<Eigen::Index>(split.selected(static_cast<std::size_t>(r)));
    const std::size_t rr = split.rest(static_cast<std::size_t>(r));
    for (Eigen::Index t = 0; t < ds; ++t) {
      out(r, static_cast<Eigen::Index>(split.compose(rr, static_cast<std::size_t>(t)))) = op(sr, t);
    }
  }
  return out;
}

/// Partial trace of a raw operator on `layout`, keeping `keep` in layout order.
inline std::pair<RegisterLayout, ComplexMatrix> partial_trace(const ComplexMatrix& m, const RegisterLayout& layout,
                                                              const std::vector<std::string>& keep) {
  if (keep.empty()) {
    throw NameError("partial_trace: nothing to keep");
  }
  std::vector<std::string> ordered;
  std::vector<Subsystem> kept;
  for (const auto& s : layout.subsystems()) {
    if (std::find(keep.begin(), keep.end(), s.name) != keep.end()) {
      ordered.push_back(s.name);
      kept.push_back(s);
    }
  }
  for (const auto& name : keep) {
    layout.index_of(name);  // throws NameError for unknown names
  }
  const detail::IndexSplit split(layout, ordered);
  const auto dk = static_cast<Eigen::Index>(split.selected_dim());
  const auto dr = split.rest_dim();
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (std::size_t r = 0; r < dr; ++r) {
    for (Eigen::Index i = 0; i < dk; ++i) {
      const auto fi = static_cast<Eigen::Index>(split.compose(r, static_cast<std::size_t>(i)));
      for (Eigen::Index j = 0; j < dk; ++j) {
        out(i, j) += m(fi, static_cast<Eigen::Index>(split.compose(r, static_cast<std::size_t>(j))));
      }
    }
  }
  return {RegisterLayout(std::move(kept)), std::move(out)};
}

/// Reduced state on `keep`, in the original relative order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  auto [layout, m] = partial_trace(rho.matrix(), rho.layout(), keep);
  return DensityMatrix::quasi(std::move(layout), std::move(m));
}

/// Reorders the tensor factors of an operator to `order` (a permutation of
/// the layout names).
inline DensityMatrix reorder(const DensityMatrix& rho, const std::vector<std::string>& order) {
  if (order.size() != rho.layout().size()) {
    throw NameError("reorder: order must list every subsystem");
  }
  const detail::IndexSplit split(rho.layout(), order);
  const auto d = static_cast<Eigen::Index>(rho.dim());
  ComplexMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out(static_cast<Eigen::Index>(split.selected(static_cast<std::size_t>(i))),
          static_cast<Eigen::Index>(split.selected(static_cast<std::size_t>(j)))) = rho.matrix()(i, j);
    }
  }
  std::vector<Subsystem> subs;
  for (const auto& n : order) subs.push_back(rho.layout()[rho.layout().index_of(n)]);
  return DensityMatrix::quasi(RegisterLayout(std::move(subs)), std::move(out));
}

/// exp(-i H t) for Hermitian H, via eigendecomposition.
inline ComplexMatrix matrix_exp_unitary(const ComplexMatrix& h, double t) {
  if (h.rows() != h.cols()) {
    throw ShapeError("matrix_exp_unitary: matrix is not square");
  }
  if (hermitian_deviation(h) > tol::kPhysical) {
    throw DomainError("matrix_exp_unitary: generator is not Hermitian");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  ComplexVector phases(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    phases(k) = std::exp(Complex(0.0, -ev(k) * t));
  }
  const ComplexMatrix& v = solver.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

/// Square root of a positive semidefinite Hermitian matrix; negative
/// eigenvalues are clipped to zero.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()));
  Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * ev.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace nmpure
