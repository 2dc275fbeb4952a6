#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "rqc/qcore.hpp"

using namespace rqc;

namespace {

ComplexMatrix x_gate() { return oracle::pauli(1); }

}  // namespace

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_TRUE(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2))
                  .isApprox(ComplexMatrix::Identity(4, 4)));
}

TEST(Kron, MatchesLoopOracleAndMixedProduct) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = haar_random_unitary(2, rng), b = haar_random_unitary(3, rng);
    const ComplexMatrix c = haar_random_unitary(2, rng), d = haar_random_unitary(3, rng);
    EXPECT_LT((kron(a, b) - oracle::kron(a, b)).norm(), 1e-14);
    EXPECT_LT((kron(a, b) * kron(c, d) - kron(a * c, b * d)).norm(), 1e-12);
  }
}

TEST(Kron, PauliProductRule) {
  // sigma_a sigma_b = i sigma_c for cyclic (a, b, c).
  const Complex i(0, 1);
  for (int a = 1; a <= 3; ++a) {
    const int b = a % 3 + 1, c = b % 3 + 1;
    EXPECT_LT((oracle::pauli(a) * oracle::pauli(b) - i * oracle::pauli(c)).norm(), 1e-15);
    EXPECT_LT((oracle::pauli(b) * oracle::pauli(a) + i * oracle::pauli(c)).norm(), 1e-15);
  }
}

TEST(ApplyToSubsystems, XOnSecondQubit) {
  const std::array<std::size_t, 2> zero{0, 0};
  const QuantumState s = QuantumState::basis({2, 2}, zero);
  const std::array<std::size_t, 1> t{1};
  const QuantumState out = apply_to_subsystems(s, x_gate(), t);
  EXPECT_NEAR(std::abs(out.amplitudes()(1)), 1.0, 1e-15);
}

TEST(ApplyToSubsystems, MatchesFullOperatorOracle) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const ComplexVector psi = random_state_vector(8, rng);
    const ComplexMatrix g = haar_random_unitary(4, rng);
    // Gate on qubits (2, 0): permute with SWAPs in the oracle.
    const std::array<std::size_t, 2> targets{2, 0};
    const QuantumState out =
        apply_to_subsystems(QuantumState::pure({2, 2, 2}, psi), g, targets);
    ComplexMatrix full = ComplexMatrix::Zero(8, 8);
    for (int row = 0; row < 8; ++row) {
      for (int col = 0; col < 8; ++col) {
        const int r0 = row >> 2 & 1, r1 = row >> 1 & 1, r2 = row & 1;
        const int c0 = col >> 2 & 1, c1 = col >> 1 & 1, c2 = col & 1;
        if (r1 != c1) continue;
        full(row, col) = g(r2 * 2 + r0, c2 * 2 + c0);
      }
    }
    EXPECT_LT((out.amplitudes() - full * psi).norm(), 1e-12);
    // Density route agrees with the statevector route.
    const QuantumState rho = apply_to_subsystems(
        QuantumState::mixed({2, 2, 2}, psi * psi.adjoint()), g, targets);
    EXPECT_LT((rho.density_matrix() - out.to_density()).norm(), 1e-12);
  }
}

TEST(ApplyToSubsystems, Errors) {
  const QuantumState s = QuantumState::basis({2, 2}, std::array<std::size_t, 2>{0, 0});
  const std::array<std::size_t, 2> dup{0, 0};
  EXPECT_THROW(apply_to_subsystems(s, ComplexMatrix::Identity(4, 4), dup), InvalidInput);
  const std::array<std::size_t, 1> one{0};
  EXPECT_THROW(apply_to_subsystems(s, ComplexMatrix::Identity(4, 4), one), DimensionMismatch);
}

TEST(QuantumState, ValidatesInputs) {
  EXPECT_THROW(QuantumState::pure({2}, ComplexVector::Zero(3)), DimensionMismatch);
  ComplexMatrix bad(2, 2);
  bad << 1, 0, 0, -0.5;
  EXPECT_THROW(QuantumState::mixed({2}, bad), InvalidInput);
  ComplexMatrix nh(2, 2);
  nh << 0.5, 0.3, 0.1, 0.5;
  EXPECT_THROW(QuantumState::mixed({2}, nh), InvalidInput);
}

TEST(Measurement, ProbabilityIsBranchNorm) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const ComplexVector psi = random_state_vector(6, rng);
    const QuantumState s = QuantumState::pure({2, 3}, psi);
    const std::array<std::size_t, 1> target{1};
    double total = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      const std::array<std::size_t, 1> label{o};
      const MeasurementOutcome m = measure_postselect(s, target, label);
      const double expect = std::norm(psi(o)) + std::norm(psi(3 + o));
      EXPECT_NEAR(m.probability, expect, 1e-14);
      total += m.probability;
      ASSERT_TRUE(m.remainder);
      EXPECT_LT(std::abs(m.remainder->amplitudes()(0) - psi(o) / std::sqrt(expect)), 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    const auto dist = outcome_distribution(s, target);
    EXPECT_NEAR(dist[2], std::norm(psi(2)) + std::norm(psi(5)), 1e-14);
  }
}

TEST(Measurement, SamplingFrequenciesWithinThreeSigma) {
  Rng rng(8);
  ComplexVector psi(2);
  psi << std::sqrt(0.3), std::sqrt(0.7);
  const QuantumState s = QuantumState::pure({2}, psi);
  const std::array<std::size_t, 1> t{0};
  const int n = 20000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += measure_sample(s, t, rng).labels[0] == 1;
  EXPECT_LT(std::abs(ones / double(n) - 0.7), 3 * std::sqrt(0.21 / n));
}

TEST(Haar, UnitaryAndFirstMoment) {
  Rng rng(1);
  ComplexMatrix mean = ComplexMatrix::Zero(3, 3);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const ComplexMatrix u = haar_random_unitary(3, rng);
    ASSERT_TRUE(is_unitary(u, 1e-12));
    mean += u;
  }
  // E[U] = 0 for the Haar measure; entries have variance 1/3.
  EXPECT_LT((mean / n).cwiseAbs().maxCoeff(), 4 * std::sqrt(1.0 / 3 / n));
}

TEST(PartialTrace, BellStateIsMaximallyMixed) {
  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1 / std::sqrt(2.0);
  const QuantumState s = QuantumState::pure({2, 2}, bell);
  const std::array<std::size_t, 1> keep{1};
  EXPECT_LT((partial_trace(s, keep).density_matrix() - 0.5 * ComplexMatrix::Identity(2, 2)).norm(),
            1e-15);
  EXPECT_EQ(schmidt_rank(s), 2u);
  EXPECT_EQ(schmidt_rank(QuantumState::basis({2, 2}, std::array<std::size_t, 2>{1, 0})), 1u);
}

TEST(Fidelity, PureAndMixedAgree) {
  Rng rng(2);
  const ComplexVector a = random_state_vector(2, rng), b = random_state_vector(2, rng);
  const QuantumState pa = QuantumState::pure({2}, a), pb = QuantumState::pure({2}, b);
  const double f = std::norm(a.dot(b));
  EXPECT_NEAR(state_fidelity(pa, pb), f, 1e-12);
  EXPECT_NEAR(state_fidelity(QuantumState::mixed({2}, a * a.adjoint()),
                             QuantumState::mixed({2}, b * b.adjoint())),
              f, 1e-9);
  EXPECT_NEAR(trace_distance(a * a.adjoint(), b * b.adjoint()), std::sqrt(1 - f), 1e-12);
}

TEST(PhaseAlignedDistance, MatchesScanOracle) {
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix a = haar_random_unitary(2, rng), b = haar_random_unitary(2, rng);
    EXPECT_NEAR(phase_aligned_distance(a, b), oracle::phase_distance(a, b), 1e-9);
    EXPECT_LT(phase_aligned_distance(a, std::polar(1.0, 1.3) * a), 1e-14);
  }
}

TEST(PrincipalPhase, RemovesDeterminant) {
  Rng rng(6);
  const ComplexMatrix u = haar_random_unitary(4, rng);
  EXPECT_NEAR(std::abs((u / principal_phase(u)).determinant() - 1.0), 0.0, 1e-12);
}
