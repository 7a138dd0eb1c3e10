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

#include <gtest/gtest.h>

#include <random>

#include "nmpure/twirling.hpp"
#include "test_util.hpp"

namespace nmpure {
namespace {

using testing::hadamard;
using testing::pauli;
using testing::random_density;
using testing::random_source;
using testing::random_unitary;

const RegisterLayout kSysLayout{{"sys", 2}};

NonMarkovSource default_source(double t) {
  HamiltonianNoiseSpec s;
  s.time = t;
  return hamiltonian_noise(s);
}

NonMarkovSource identity_source(std::size_t points = 2) {
  return NonMarkovSource(1, ket0_projector(), std::vector<QuantumChannel>(points, QuantumChannel::identity(4)));
}

TEST(Frames, EnumerationOrder) {
  const NonMarkovSource src = identity_source();
  EXPECT_EQ(frame_count(src), 16u);
  const TwirlFrame f = frame_from_index(src, 7);
  EXPECT_EQ(f.paulis[0].index(), 1u);
  EXPECT_EQ(f.paulis[1].index(), 3u);
}

TEST(Frames, ApplyFrameRejectsWrongLength) {
  EXPECT_THROW(apply_frame(identity_source(), TwirlFrame{{PauliString(1, 1)}}), ShapeError);
}

TEST(RunTwirled, NoiselessSourceGivesIdealOutput) {
  std::mt19937_64 rng(1);
  const ComplexMatrix u = random_unitary(rng, 2);
  const DensityMatrix rho = DensityMatrix::on("sys", random_density(rng, 2));
  const std::vector<QuantumChannel> mid{QuantumChannel::unitary(u)};
  for (const TwirlMode mode : {TwirlMode(ExactTwirl{}), TwirlMode(SampledTwirl{7, 3})}) {
    const DensityMatrix out = run_twirled({identity_source(), mode}, mid, rho);
    EXPECT_LT(max_abs(out.matrix() - u * rho.matrix() * u.adjoint()), 1e-12);
  }
}

TEST(RunTwirled, DefaultNoiseEqualsCorrelatedPauliMixture) {
  const NonMarkovSource src = default_source(0.15);
  const std::vector<QuantumChannel> mid{QuantumChannel::unitary(hadamard())};
  const DensityMatrix rho = DensityMatrix::basis(kSysLayout, 0);
  const DensityMatrix twirled = run_twirled({src, ExactTwirl{}}, mid, rho);
  const DensityMatrix mixture = pauli_mixture(extract_joint_distribution(src), mid, rho);
  EXPECT_LT(trace_distance(twirled.matrix(), mixture.matrix()), 1e-10);
}

TEST(RunTwirled, SampledConvergesToExact) {
  const NonMarkovSource src = default_source(0.15);
  const std::vector<QuantumChannel> mid{QuantumChannel::unitary(hadamard())};
  const DensityMatrix rho = DensityMatrix::basis(kSysLayout, 0);
  const DensityMatrix exact = run_twirled({src, ExactTwirl{}}, mid, rho);
  const DensityMatrix sampled = run_twirled({src, SampledTwirl{4096, 2024}}, mid, rho);
  EXPECT_LT(trace_distance(exact.matrix(), sampled.matrix()), 0.05);
}

TEST(RunTwirled, SampledIsDeterministicPerSeed) {
  std::mt19937_64 rng(5);
  const NonMarkovSource src = random_source(rng);
  const std::vector<QuantumChannel> mid{QuantumChannel::unitary(hadamard())};
  const DensityMatrix rho = DensityMatrix::basis(kSysLayout, 0);
  const ComplexMatrix a = run_twirled({src, SampledTwirl{10, 77}}, mid, rho).matrix();
  const ComplexMatrix b = run_twirled({src, SampledTwirl{10, 77}}, mid, rho).matrix();
  const ComplexMatrix c = run_twirled({src, SampledTwirl{10, 78}}, mid, rho).matrix();
  EXPECT_EQ(a, b);
  EXPECT_GT(max_abs(a - c), 1e-6);
}

TEST(RunTwirled, ModeGuards) {
  const DensityMatrix rho = DensityMatrix::basis(kSysLayout, 0);
  const NonMarkovSource long_src = identity_source(7);
  EXPECT_THROW(run_twirled({long_src, ExactTwirl{}}, std::vector<QuantumChannel>(6, QuantumChannel::identity(2)), rho),
               ConfigError);
  EXPECT_THROW(run_twirled({identity_source(), SampledTwirl{0, 1}}, {QuantumChannel::identity(2)}, rho), ConfigError);
  EXPECT_THROW(run_twirled({identity_source(), ExactTwirl{}}, {}, rho), ConfigError);
}

TEST(ExtractJointDistribution, IdentityNoise) {
  const JointPauliDistribution p = extract_joint_distribution(identity_source());
  EXPECT_NEAR(p({0, 0}), 1.0, 1e-12);
  EXPECT_NEAR(error_rate(p), 0.0, 1e-12);
}

TEST(ExtractJointDistribution, DeterministicErrorAtFirstPoint) {
  const NonMarkovSource src(1, ket0_projector(),
                            {QuantumChannel::unitary(kron(pauli(1), ComplexMatrix::Identity(2, 2))),
                             QuantumChannel::identity(4)});
  const JointPauliDistribution p = extract_joint_distribution(src);
  EXPECT_NEAR(p({1, 0}), 1.0, 1e-12);
}

TEST(ExtractJointDistribution, DefaultNoiseAtLongestTime) {
  const NonMarkovSource src = default_source(0.2);
  const JointPauliDistribution p = extract_joint_distribution(src);
  const double p00 = p({0, 0});
  for (const auto& [t, v] : p.entries()) {
    if (t != PauliTuple{0, 0}) EXPECT_GT(p00, v) << t[0] << "," << t[1];
  }
  const std::vector<QuantumChannel> mid{QuantumChannel::unitary(hadamard())};
  const DensityMatrix rho = DensityMatrix::basis(kSysLayout, 0);
  EXPECT_LT(trace_distance(run_twirled({src, ExactTwirl{}}, mid, rho).matrix(), pauli_mixture(p, mid, rho).matrix()),
            1e-10);
}

TEST(ExtractJointDistribution, ValidOnRandomSources) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const JointPauliDistribution p = extract_joint_distribution(random_source(rng, 2, 1 + trial % 3));
    double total = 0.0;
    for (const auto& [t, v] : p.entries()) {
      EXPECT_GE(v, -1e-10);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(TwirlEquivalence, RandomSourcesAndGates) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const NonMarkovSource src = random_source(rng);
    const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2))};
    const DensityMatrix rho = DensityMatrix::on("sys", random_density(rng, 2));
    const DensityMatrix twirled = run_twirled({src, ExactTwirl{}}, mid, rho);
    const DensityMatrix mixture = pauli_mixture(extract_joint_distribution(src), mid, rho);
    EXPECT_LT(trace_distance(twirled.matrix(), mixture.matrix()), 1e-9);
  }
}

TEST(TwirlEquivalence, ThreeTimePoints) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const NonMarkovSource src = random_source(rng, 3);
    const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2)),
                                          testing::random_channel(rng, 2, 2)};
    const DensityMatrix rho = DensityMatrix::on("sys", random_density(rng, 2));
    EXPECT_LT(trace_distance(run_twirled({src, ExactTwirl{}}, mid, rho).matrix(),
                             pauli_mixture(extract_joint_distribution(src), mid, rho).matrix()),
              1e-9);
  }
}

TEST(TwirledSource, MatchesFrameAverageAndIsIdempotent) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const NonMarkovSource src = random_source(rng);
    const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2))};
    const DensityMatrix rho = DensityMatrix::on("sys", random_density(rng, 2));
    const NonMarkovSource tw = twirled_source(src);
    const ComplexMatrix frame_avg = run_twirled({src, ExactTwirl{}}, mid, rho).matrix();
    EXPECT_LT(max_abs(run_untwirled(tw, mid, rho).matrix() - frame_avg), 1e-12);
    EXPECT_LT(max_abs(run_twirled({tw, ExactTwirl{}}, mid, rho).matrix() - frame_avg), 1e-10);
  }
}

TEST(Frames, UniformFrameLeavesGlobalDepolarizingInvariant) {
  const QuantumChannel dep = depolarizing_complete(2);
  const NonMarkovSource src(1, ket0_projector(), {dep, dep});
  const ComplexMatrix base = choi(dep).matrix();
  for (std::uint32_t k = 0; k < 4; ++k) {
    const NonMarkovSource framed = apply_frame(src, TwirlFrame{{PauliString(1, k), PauliString(1, k)}});
    for (const auto& step : framed.steps()) EXPECT_LT(max_abs(choi(step).matrix() - base), 1e-12);
  }
}

TEST(PauliMixture, RejectsZeroWeights) {
  const std::vector<QuantumChannel> mid{QuantumChannel::identity(2)};
  EXPECT_THROW(pauli_mixture(std::map<PauliTuple, double>{}, 1, mid, DensityMatrix::basis(kSysLayout, 0)),
               SingularDenominator);
}

}  // namespace
}  // namespace nmpure
