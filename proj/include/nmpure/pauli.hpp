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

// n-qubit Pauli strings and correlated Pauli-error distributions.
//
// Digit convention: a PauliString on n qubits is a base-4 integer whose most
// significant digit belongs to the first qubit, with 0:I 1:X 2:Y 3:Z.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nmpure/errors.hpp"
#include "nmpure/tensor.hpp"

namespace nmpure {

inline std::uint64_t pow4(std::size_t n) { return std::uint64_t{1} << (2 * n); }

class PauliString {
 public:
  PauliString(std::size_t n, std::uint64_t index) : n_(n), index_(index) {
    if (n > 31) {
      throw DomainError("PauliString: too many qubits");
    }
    if (index >= pow4(n)) {
      throw DomainError("PauliString: index " + std::to_string(index) + " out of range for " + std::to_string(n) +
                        " qubits");
    }
  }

  /// Parses labels such as "IXZ".
  static PauliString from_label(std::string_view label) {
    std::uint64_t idx = 0;
    for (char c : label) {
      idx *= 4;
      switch (c) {
        case 'I': break;
        case 'X': idx += 1; break;
        case 'Y': idx += 2; break;
        case 'Z': idx += 3; break;
        default: throw DomainError(std::string("PauliString: bad label character '") + c + "'");
      }
    }
    return PauliString(label.size(), idx);
  }

  static PauliString identity(std::size_t n) { return PauliString(n, 0); }

  std::size_t num_qubits() const { return n_; }
  std::uint64_t index() const { return index_; }

  /// Single-qubit digit (0..3) at `site`, site 0 being the first qubit.
  unsigned digit(std::size_t site) const {
    return static_cast<unsigned>((index_ >> (2 * (n_ - 1 - site))) & 3u);
  }

  std::string label() const {
    static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
    std::string s;
    for (std::size_t q = 0; q < n_; ++q) s += kNames[digit(q)];
    return s;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::size_t n_;
  std::uint64_t index_;
};

inline const std::array<ComplexMatrix, 4>& single_qubit_paulis() {
  static const std::array<ComplexMatrix, 4> kPaulis = [] {
    const Complex i(0.0, 1.0);
    std::array<ComplexMatrix, 4> p;
    p[0] = ComplexMatrix::Identity(2, 2);
    p[1] = ComplexMatrix::Zero(2, 2);
    p[1](0, 1) = 1.0;
    p[1](1, 0) = 1.0;
    p[2] = ComplexMatrix::Zero(2, 2);
    p[2](0, 1) = -i;
    p[2](1, 0) = i;
    p[3] = ComplexMatrix::Zero(2, 2);
    p[3](0, 0) = 1.0;
    p[3](1, 1) = -1.0;
    return p;
  }();
  return kPaulis;
}

inline ComplexMatrix pauli_matrix(const PauliString& p) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t q = 0; q < p.num_qubits(); ++q) {
    out = kron(out, single_qubit_paulis()[p.digit(q)]);
  }
  return out;
}

inline ComplexMatrix pauli_matrix(std::size_t n, std::uint64_t index) { return pauli_matrix(PauliString(n, index)); }

/// All 4^n Pauli matrices in index order.
inline std::vector<ComplexMatrix> pauli_basis(std::size_t n) {
  std::vector<ComplexMatrix> out;
  out.reserve(pow4(n));
  for (std::uint64_t k = 0; k < pow4(n); ++k) out.push_back(pauli_matrix(n, k));
  return out;
}

/// s with P_k P_i P_k = s P_i: (-1)^(number of sites where the factors anticommute).
inline int conjugation_sign(const PauliString& i, const PauliString& k) {
  if (i.num_qubits() != k.num_qubits()) {
    throw ShapeError("conjugation_sign: qubit counts differ");
  }
  int m = 0;
  for (std::size_t s = 0; s < i.num_qubits(); ++s) {
    const unsigned a = i.digit(s), b = k.digit(s);
    m += (a != 0 && b != 0 && a != b) ? 1 : 0;
  }
  return (m % 2 == 0) ? 1 : -1;
}

/// (P (x) I)|Phi> with |Phi> = sum_x |x>|x> / sqrt(2^n).
inline ComplexVector pauli_bell_vector(const PauliString& p) {
  const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << p.num_qubits());
  ComplexVector phi = ComplexVector::Zero(d * d);
  for (Eigen::Index x = 0; x < d; ++x) phi(x * d + x) = 1.0 / std::sqrt(static_cast<double>(d));
  const ComplexMatrix pm = pauli_matrix(p);
  return kron(pm, ComplexMatrix::Identity(d, d)) * phi;
}

/// |Phi_P><Phi_P| on qubits a0..a(n-1), b0..b(n-1).
inline DensityMatrix pauli_bell_state(const PauliString& p) {
  std::vector<std::string> names;
  for (std::size_t q = 0; q < p.num_qubits(); ++q) names.push_back("a" + std::to_string(q));
  for (std::size_t q = 0; q < p.num_qubits(); ++q) names.push_back("b" + std::to_string(q));
  const ComplexVector v = pauli_bell_vector(p);
  return DensityMatrix(RegisterLayout::qubits(names), v * v.adjoint());
}

// ---------------------------------------------------------------------------

/// One Pauli index per time point.
using PauliTuple = std::vector<std::uint32_t>;

/// Correlated Pauli errors p_{i0...i(n-1)} over several time points, stored
/// sparsely. Entries down to -1e-10 are tolerated and read back as 0.
class JointPauliDistribution {
 public:
  static constexpr double kNegativeTolerance = 1e-10;
  static constexpr double kSumTolerance = 1e-9;

  JointPauliDistribution(std::size_t n_points, std::size_t n_qubits, std::map<PauliTuple, double> probs)
      : n_points_(n_points), n_qubits_(n_qubits), probs_(std::move(probs)) {
    if (n_points == 0) {
      throw DomainError("JointPauliDistribution: need at least one time point");
    }
    double total = 0.0;
    for (const auto& [t, p] : probs_) {
      if (t.size() != n_points_) {
        throw ShapeError("JointPauliDistribution: tuple length does not match point count");
      }
      for (auto i : t) {
        if (i >= pow4(n_qubits_)) throw DomainError("JointPauliDistribution: Pauli index out of range");
      }
      if (!std::isfinite(p) || p < -kNegativeTolerance) {
        throw DomainError("JointPauliDistribution: negative or non-finite probability");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw DomainError("JointPauliDistribution: probabilities sum to " + std::to_string(total));
    }
  }

  /// Point mass on a single tuple.
  static JointPauliDistribution delta(std::size_t n_qubits, PauliTuple tuple) {
    const std::size_t points = tuple.size();
    return JointPauliDistribution(points, n_qubits, {{std::move(tuple), 1.0}});
  }

  std::size_t n_points() const { return n_points_; }
  std::size_t n_qubits() const { return n_qubits_; }

  /// Clipped probability; 0 for tuples outside the support.
  double operator()(const PauliTuple& t) const {
    const auto it = probs_.find(t);
    return it == probs_.end() ? 0.0 : std::max(0.0, it->second);
  }

  const std::map<PauliTuple, double>& entries() const { return probs_; }

  PauliTuple identity_tuple() const { return PauliTuple(n_points_, 0); }

  /// Plain-text table: a `# n_points=..,n_qubits=..` header, then one
  /// `i0,i1,...,prob` line per tuple.
  std::string to_text() const {
    std::ostringstream os;
    os << "# n_points=" << n_points_ << ",n_qubits=" << n_qubits_ << "\n";
    char buf[64];
    for (const auto& [t, p] : probs_) {
      for (auto i : t) os << i << ",";
      std::snprintf(buf, sizeof buf, "%.17g", std::max(0.0, p));
      os << buf << "\n";
    }
    return os.str();
  }

  static JointPauliDistribution from_text(const std::string& text, std::size_t n_qubits = 1) {
    std::istringstream is(text);
    std::string line;
    std::size_t points = 0;
    std::map<PauliTuple, double> probs;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (line[0] == '#') {
        unsigned long np = 0, nq = 0;
        if (std::sscanf(line.c_str(), "# n_points=%lu,n_qubits=%lu", &np, &nq) == 2) {
          points = np;
          n_qubits = nq;
        }
        continue;
      }
      std::vector<std::string> fields;
      std::stringstream ls(line);
      std::string f;
      while (std::getline(ls, f, ',')) fields.push_back(f);
      if (fields.size() < 2) {
        throw ConfigError("distribution line " + std::to_string(line_no) + ": expected i0,...,prob");
      }
      PauliTuple t;
      try {
        for (std::size_t k = 0; k + 1 < fields.size(); ++k) t.push_back(static_cast<std::uint32_t>(std::stoul(fields[k])));
        if (points == 0) points = t.size();
        probs[t] += std::stod(fields.back());
      } catch (const std::logic_error&) {
        throw ConfigError("distribution line " + std::to_string(line_no) + ": not a number");
      }
    }
    return JointPauliDistribution(points, n_qubits, std::move(probs));
  }

 private:
  std::size_t n_points_;
  std::size_t n_qubits_;
  std::map<PauliTuple, double> probs_;
};

/// q_t proportional to p_t^power.
inline JointPauliDistribution purify_distribution(const JointPauliDistribution& p, int power) {
  if (power < 1) {
    throw DomainError("purify_distribution: power must be >= 1");
  }
  std::map<PauliTuple, double> q;
  double total = 0.0;
  for (const auto& [t, v] : p.entries()) {
    const double w = std::pow(std::max(0.0, v), power);
    q[t] = w;
    total += w;
  }
  if (!(total > 0.0)) {
    throw DomainError("purify_distribution: all weights vanished");
  }
  for (auto& [t, v] : q) v /= total;
  return JointPauliDistribution(p.n_points(), p.n_qubits(), std::move(q));
}

/// 1 - p(all identity).
inline double error_rate(const JointPauliDistribution& p) { return 1.0 - p(p.identity_tuple()); }

}  // namespace nmpure
