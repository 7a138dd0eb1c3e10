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

#include <cmath>
#include <random>
#include <vector>

#include "nmpure/analytics.hpp"
#include "nmpure/purification.hpp"
#include "nmpure/tomography.hpp"
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

NonMarkovSource identity_source() {
  return NonMarkovSource(1, ket0_projector(), {QuantumChannel::identity(4), QuantumChannel::identity(4)});
}

NonMarkovSource deterministic_error_source(int first_pauli) {
  return NonMarkovSource(1, ket0_projector(),
                         {QuantumChannel::unitary(kron(pauli(first_pauli), ComplexMatrix::Identity(2, 2))),
                          QuantumChannel::identity(4)});
}

ComplexMatrix hzh() { return hadamard() * pauli(3) * hadamard().adjoint(); }

ProtocolConfig hadamard_config(const NonMarkovSource& src, std::size_t m = 1) {
  return identical_noise_config(src, m, {QuantumChannel::unitary(hadamard())}, DensityMatrix::basis(kSysLayout, 0),
                                hzh());
}

TEST(ControlledCyclicShift, TwoCopiesIsControlledSwap) {
  const ComplexMatrix op = detail::controlled_cyclic_shift(2, 2, false);
  ComplexMatrix cswap = ComplexMatrix::Identity(8, 8);
  cswap(5, 5) = cswap(6, 6) = 0.0;
  cswap(5, 6) = cswap(6, 5) = 1.0;
  EXPECT_EQ(op, cswap);
  EXPECT_EQ(detail::controlled_cyclic_shift(2, 2, true), cswap);
}

TEST(ControlledCyclicShift, ThreeCopiesCycle) {
  const ComplexMatrix fwd = detail::controlled_cyclic_shift(3, 2, false);
  const ComplexMatrix inv = detail::controlled_cyclic_shift(3, 2, true);
  EXPECT_LT(max_abs(fwd * inv - ComplexMatrix::Identity(16, 16)), 1e-15);
  EXPECT_LT(max_abs(fwd * fwd * fwd - ComplexMatrix::Identity(16, 16)), 1e-15);
  // |1>|a=1,b=0,c=0>: slot 0 content moves to slot 1.
  EXPECT_EQ(fwd(8 + 2, 8 + 4), Complex(1.0));
}

TEST(RunProtocol, NoiselessHadamard) {
  const EffectiveResult r = run_protocol_exact(hadamard_config(identity_source()));
  ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  EXPECT_LT(max_abs(r.rho_eff.matrix() - plus), 1e-12);
  EXPECT_NEAR(r.p_plus, 1.0, 1e-12);
  EXPECT_NEAR(r.mu_y, 1.0, 1e-12);
  EXPECT_NEAR(r.o_eff, 1.0, 1e-12);
}

TEST(RunProtocol, ResultInvariants) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const ProtocolConfig cfg = hadamard_config(random_source(rng));
    const EffectiveResult r = run_protocol_exact(cfg);
    EXPECT_NEAR(r.p_plus + r.p_minus, 1.0, 1e-9);
    EXPECT_NEAR(r.mu_y, r.p_plus - r.p_minus, 1e-12);
    EXPECT_LT(hermitian_deviation(r.rho_eff.matrix()), 1e-12);
    EXPECT_NEAR(r.rho_eff.matrix().trace().real(), 1.0, 1e-9);
    EXPECT_NEAR(r.mu_x, r.mu_y * r.o_eff, 1e-9);
  }
}

TEST(RunProtocol, PurifiedFidelityBeatsUnprotectedAcrossTimeGrid) {
  const std::vector<QuantumChannel> mid{QuantumChannel::unitary(hadamard())};
  const DensityMatrix rho0 = DensityMatrix::basis(kSysLayout, 0);
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.02 * k;
    const NonMarkovSource src = default_source(t);
    const double with = z_fidelity(run_protocol_exact(hadamard_config(src)).o_eff);
    const double without = z_fidelity(run_untwirled(src, mid, rho0).expectation(hzh()));
    EXPECT_GE(with, without - 1e-9) << "t=" << t;
  }
}

TEST(RunProtocol, IdenticalNoiseMatchesSquaredDistribution) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const NonMarkovSource src = random_source(rng);
    const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2))};
    const DensityMatrix rho0 = DensityMatrix::on("sys", random_density(rng, 2));
    const EffectiveResult r = run_protocol_exact(identical_noise_config(src, 1, mid, rho0, pauli(3)));
    const JointPauliDistribution p = extract_joint_distribution(src);
    EXPECT_LT(trace_distance(r.rho_eff.matrix(), predicted_effective_state(p, p, mid, rho0).matrix()), 1e-9);
    EXPECT_LT(trace_distance(r.rho_eff.matrix(), pauli_mixture(purify_distribution(p, 2), mid, rho0).matrix()), 1e-9);
    double sum_sq = 0.0;
    for (const auto& [t, v] : p.entries()) sum_sq += v * v;
    EXPECT_NEAR(r.mu_y, sum_sq, 1e-9);
    EXPECT_GE(r.rho_eff.min_eigenvalue(), -1e-9);
  }
}

TEST(RunProtocol, DefaultNoiseMatchesPrediction) {
  const NonMarkovSource src = default_source(0.2);
  const ProtocolConfig cfg = hadamard_config(src);
  const EffectiveResult r = run_protocol_exact(cfg);
  const JointPauliDistribution p = extract_joint_distribution(src);
  EXPECT_LT(trace_distance(r.rho_eff.matrix(), predicted_effective_state(p, p, cfg.mid_ops, cfg.rho0).matrix()), 1e-9);
}

TEST(RunProtocol, DifferentAncillaNoise) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const NonMarkovSource main = random_source(rng), anc = random_source(rng);
    const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2))};
    const DensityMatrix rho0 = DensityMatrix::on("sys", random_density(rng, 2));
    ProtocolConfig cfg{1, main, {anc}, mid, rho0, pauli(3)};
    const EffectiveResult r = run_protocol_exact(cfg);
    const JointPauliDistribution p = extract_joint_distribution(main), pp = extract_joint_distribution(anc);
    EXPECT_LT(trace_distance(r.rho_eff.matrix(), predicted_effective_state(p, pp, mid, rho0).matrix()), 1e-9);
    double overlap = 0.0;
    for (const auto& [t, v] : p.entries()) overlap += v * pp(t);
    EXPECT_NEAR(r.mu_y, overlap, 1e-9);
  }
}

TEST(RunProtocol, PartialSwapTarget) {
  std::mt19937_64 rng(4);
  const std::vector<QuantumChannel> mid{partial_swap_channel(0.35)};
  for (int trial = 0; trial < 10; ++trial) {
    const NonMarkovSource src = trial == 0 ? default_source(0.2) : random_source(rng);
    const DensityMatrix rho0 = trial == 0 ? DensityMatrix::basis(kSysLayout, 0) : DensityMatrix::on("sys", random_density(rng, 2));
    const EffectiveResult r = run_protocol_exact(identical_noise_config(src, 1, mid, rho0, pauli(3)));
    const JointPauliDistribution p = extract_joint_distribution(src);
    EXPECT_LT(trace_distance(r.rho_eff.matrix(), predicted_effective_state(p, p, mid, rho0).matrix()), 1e-9);
  }
}

TEST(RunProtocol, GatePlacementCommutesWithPermutations) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    ProtocolConfig cfg = identical_noise_config(random_source(rng), 1 + trial % 2,
                                                {QuantumChannel::unitary(random_unitary(rng, 2))},
                                                DensityMatrix::on("sys", random_density(rng, 2)), pauli(1));
    const EffectiveResult a = run_protocol_exact(cfg);
    cfg.placement = MidOpPlacement::kAllCopiesAfterPermutation;
    const EffectiveResult b = run_protocol_exact(cfg);
    EXPECT_LT(max_abs(a.control_main.matrix() - b.control_main.matrix()), 1e-10);
    EXPECT_LT(max_abs(a.rho_eff.matrix() - b.rho_eff.matrix()), 1e-10);
    EXPECT_NEAR(a.mu_y, b.mu_y, 1e-10);
  }
}

TEST(RunProtocol, MultiCopyPowerLaw) {
  std::mt19937_64 rng(6);
  for (std::size_t m = 1; m <= 2; ++m) {
    for (int trial = 0; trial < 5; ++trial) {
      const NonMarkovSource src = trial == 0 ? default_source(0.2) : random_source(rng);
      const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2))};
      const DensityMatrix rho0 = DensityMatrix::on("sys", random_density(rng, 2));
      const EffectiveResult r = run_protocol_exact(identical_noise_config(src, m, mid, rho0, pauli(3)));
      const JointPauliDistribution p = extract_joint_distribution(src);
      const DensityMatrix expected = pauli_mixture(purify_distribution(p, static_cast<int>(m) + 1), mid, rho0);
      EXPECT_LT(trace_distance(r.rho_eff.matrix(), expected.matrix()), 1e-9) << "m=" << m;
      double mu = 0.0;
      for (const auto& [t, v] : p.entries()) mu += std::pow(v, static_cast<double>(m) + 1);
      EXPECT_NEAR(r.mu_y, mu, 1e-9);
    }
  }
}

TEST(RunProtocol, MultiTimeThreePoints) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    const NonMarkovSource src = random_source(rng, 3);
    const std::vector<QuantumChannel> mid{QuantumChannel::unitary(random_unitary(rng, 2)),
                                          QuantumChannel::unitary(random_unitary(rng, 2))};
    const DensityMatrix rho0 = DensityMatrix::on("sys", random_density(rng, 2));
    const EffectiveResult r = run_protocol_exact(identical_noise_config(src, 1, mid, rho0, pauli(3)));
    const JointPauliDistribution p = extract_joint_distribution(src);
    EXPECT_LT(trace_distance(r.rho_eff.matrix(), pauli_mixture(purify_distribution(p, 2), mid, rho0).matrix()), 1e-9);
  }
}

TEST(RunProtocol, SampledTwirlApproachesExact) {
  const ProtocolConfig exact_cfg = hadamard_config(default_source(0.2));
  ProtocolConfig sampled_cfg = exact_cfg;
  sampled_cfg.twirl = SampledTwirl{1000, 42};
  const EffectiveResult a = run_protocol_exact(exact_cfg);
  const EffectiveResult b = run_protocol_exact(sampled_cfg);
  EXPECT_LT(trace_distance(a.control_main.matrix(), b.control_main.matrix()), 0.05);
  EXPECT_NEAR(a.o_eff, b.o_eff, 0.1);
}

TEST(RunProtocol, DisjointErrorsCollapseSignal) {
  ProtocolConfig cfg{1,
                     deterministic_error_source(1),
                     {deterministic_error_source(3)},
                     {QuantumChannel::identity(2)},
                     DensityMatrix::basis(kSysLayout, 0),
                     pauli(3)};
  EXPECT_THROW(run_protocol_exact(cfg), SingularDenominator);
}

TEST(RunProtocol, ConfigValidation) {
  const NonMarkovSource src = default_source(0.1);
  ProtocolConfig cfg = hadamard_config(src);
  cfg.ancilla_sources.clear();
  EXPECT_THROW(run_protocol_exact(cfg), ConfigError);
  cfg = hadamard_config(src);
  cfg.mid_ops.clear();
  EXPECT_THROW(run_protocol_exact(cfg), ConfigError);
  cfg = hadamard_config(src);
  cfg.observable = ComplexMatrix::Zero(2, 2);
  cfg.observable(0, 1) = 1.0;
  EXPECT_THROW(run_protocol_exact(cfg), DomainError);
  EXPECT_THROW(run_protocol_exact(hadamard_config(src, 3)), ConfigError);
  cfg = hadamard_config(src);
  cfg.copies_m = 0;
  EXPECT_THROW(run_protocol_exact(cfg), ConfigError);
}

TEST(PredictedEffectiveState, DeltaOnIdentityGivesIdealOutput) {
  std::mt19937_64 rng(8);
  const ComplexMatrix u = random_unitary(rng, 2);
  const DensityMatrix rho0 = DensityMatrix::on("sys", random_density(rng, 2));
  const auto delta = JointPauliDistribution::delta(1, {0, 0});
  const DensityMatrix out = predicted_effective_state(delta, delta, {QuantumChannel::unitary(u)}, rho0);
  EXPECT_LT(max_abs(out.matrix() - u * rho0.matrix() * u.adjoint()), 1e-12);
}

TEST(PredictedEffectiveState, DisjointSupportThrows) {
  EXPECT_THROW(predicted_effective_state(JointPauliDistribution::delta(1, {0, 0}), JointPauliDistribution::delta(1, {1, 0}),
                                         {QuantumChannel::identity(2)}, DensityMatrix::basis(kSysLayout, 0)),
               SingularDenominator);
}

TEST(PredictedEffectiveState, DominantAncillaIdentitySuppressesErrors) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const JointPauliDistribution p = testing::random_distribution(rng);
    const JointPauliDistribution pp = testing::random_dominant_distribution(rng);
    double overlap = 0.0;
    for (const auto& [t, v] : p.entries()) overlap += v * pp(t);
    const double effective_error = 1.0 - p({0, 0}) * pp({0, 0}) / overlap;
    EXPECT_LT(effective_error, error_rate(p));
  }
}

TEST(SampleEstimator, NoiselessIsExact) {
  const EffectiveResult r = run_protocol_exact(hadamard_config(identity_source()));
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    for (std::size_t k : {2u, 17u, 5000u}) {
      const EstimatorSample s = sample_estimator(r, hzh(), k, seed);
      EXPECT_NEAR(s.o_eff_hat, 1.0, 1e-14);
      EXPECT_NEAR(s.y_mean, 1.0, 1e-14);
    }
  }
}

TEST(SampleEstimator, DeterministicAndBatchedBySeed) {
  const EffectiveResult r = run_protocol_exact(hadamard_config(default_source(0.2)));
  const EstimatorSample a = sample_estimator(r, hzh(), 10000, 5);
  const EstimatorSample b = sample_estimator(r, hzh(), 10000, 5);
  EXPECT_EQ(a.o_eff_hat, b.o_eff_hat);
  EXPECT_EQ(a.x_mean, b.x_mean);
  EXPECT_NE(a.o_eff_hat, sample_estimator(r, hzh(), 10000, 6).o_eff_hat);
  EXPECT_THROW(sample_estimator(r, hzh(), 1, 5), DomainError);
}

TEST(SampleEstimator, ShotMomentsMatchExactState) {
  const ProtocolConfig cfg = hadamard_config(default_source(0.2));
  const EffectiveResult r = run_protocol_exact(cfg);
  const EstimatorSample s = sample_estimator(r, cfg.observable, 1000000, 11);
  EXPECT_NEAR(s.y_mean, r.mu_y, 5.0 / std::sqrt(1e6));
  EXPECT_NEAR(s.x_mean, r.mu_x, 5.0 / std::sqrt(1e6));
}

TEST(SampleEstimator, LargeShotCountWithinFiveSigma) {
  const ProtocolConfig cfg = hadamard_config(default_source(0.2));
  const EffectiveResult r = run_protocol_exact(cfg);
  const std::size_t k = 1000000;
  const double sigma = std::sqrt(
      estimator_variance(extract_joint_distribution(cfg.main_source), cfg.mid_ops, cfg.rho0, cfg.observable, k));
  const EstimatorSample s = sample_estimator(r, cfg.observable, k, 2024);
  EXPECT_LT(std::abs(s.o_eff_hat - r.o_eff), 5.0 * sigma);
  EXPECT_GT(s.sample_variance, 0.25 * sigma * sigma);
  EXPECT_LT(s.sample_variance, 4.0 * sigma * sigma);
}

TEST(SampleEstimator, EmpiricalVarianceMatchesClosedForm) {
  const ProtocolConfig cfg = hadamard_config(default_source(0.2));
  const EffectiveResult r = run_protocol_exact(cfg);
  const std::size_t k = 1000;
  const double predicted =
      estimator_variance(extract_joint_distribution(cfg.main_source), cfg.mid_ops, cfg.rho0, cfg.observable, k);
  std::vector<double> est;
  for (std::uint64_t rep = 0; rep < 200; ++rep) est.push_back(sample_estimator(r, cfg.observable, k, 1000 + rep).o_eff_hat);
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= static_cast<double>(est.size());
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= static_cast<double>(est.size() - 1);
  EXPECT_GT(var / predicted, 0.5);
  EXPECT_LT(var / predicted, 2.0);
}

}  // namespace
}  // namespace nmpure
