#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "rqc/gates.hpp"
#include "rqc/kak.hpp"
#include "rqc/protocol.hpp"

using namespace rqc;
using namespace rqc::protocol;

namespace {

QuantumState pure(Dims dims, const ComplexVector& v) { return QuantumState::pure(std::move(dims), v); }

QuantumState random_qubit(Rng& rng) { return pure({2}, random_state_vector(2, rng)); }

// A linear combination of unitaries that is itself unitary: cos t U + i sin t U Q with Q^2 = I.
lcc::LinearCombinationSpec unitary_combination(std::size_t d, double t, Rng& rng) {
  const ComplexMatrix u = haar_random_unitary(d, rng);
  const ComplexMatrix w = haar_random_unitary(d, rng);
  ComplexMatrix sign = ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < sign.rows(); i += 2) sign(i, i) = -1;
  const ComplexMatrix q = w * sign * w.adjoint();
  return lcc::LinearCombinationSpec({std::cos(t), Complex(0, std::sin(t))}, {u, u * q});
}

double analytic_detection_rate(const DetectionAnalysis& a) { return a.per_round; }

}  // namespace

TEST(Teleport, EprPairAmplitudes) {
  const QuantumState e = epr_pair();
  ASSERT_EQ(e.dims(), (Dims{2, 2}));
  const double h = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.amplitudes()(0) - h), 0, 1e-15);
  EXPECT_NEAR(std::abs(e.amplitudes()(3) - h), 0, 1e-15);
  EXPECT_NEAR(std::abs(e.amplitudes()(1)) + std::abs(e.amplitudes()(2)), 0, 1e-15);
}

TEST(Teleport, BranchesAreUniformAndTransferState) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const QuantumState psi = random_qubit(rng);
    const QuantumState joint = psi.tensor(epr_pair());
    const auto branches = teleport_branches(joint, 0, 1, 2);
    ASSERT_EQ(branches.size(), 4u);
    for (std::size_t b = 0; b < 4; ++b) {
      EXPECT_NEAR(branches[b].probability, 0.25, 1e-12);
      // Uncorrected receiver state is X^{m_a} Z^{m_s} psi up to the Pauli frame.
      oracle::Mat corr = oracle::identity(2);
      if (b % 2) corr = oracle::pauli(1) * corr;
      if (b / 2) corr = oracle::pauli(3) * corr;
      const oracle::Vec fixed = corr * branches[b].remainder->amplitudes();
      EXPECT_NEAR(std::norm(fixed.dot(psi.amplitudes())), 1.0, 1e-12);
    }
    const MeasurementOutcome zero = teleport_postselected(joint, 0, 1, 2);
    EXPECT_NEAR(state_fidelity(psi, *zero.remainder), 1.0, 1e-12);
  }
}

TEST(Teleport, CorrectedTransferAlwaysSucceeds) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const QuantumState psi = random_qubit(rng);
    const QuantumState bystander = random_qubit(rng);
    // Receiver placed before the source to exercise index bookkeeping.
    const QuantumState joint = epr_pair().tensor(bystander).tensor(psi);
    const CorrectedTeleport t = teleport_corrected(joint, 3, 0, 1, rng);
    ASSERT_EQ(t.state.dims(), (Dims{2, 2}));
    const QuantumState expected = psi.tensor(bystander);
    EXPECT_NEAR(state_fidelity(expected, t.state), 1.0, 1e-12);
  }
}

TEST(Teleport, RejectsBadWires) {
  const QuantumState joint = QuantumState::basis({2}, Indices{0}).tensor(epr_pair());
  EXPECT_THROW(teleport_branches(joint, 0, 0, 2), InvalidInput);
  EXPECT_THROW(teleport_branches(joint, 0, 1, 5), DimensionMismatch);
  const QuantumState qutrit = QuantumState::basis({3}, Indices{0}).tensor(epr_pair());
  EXPECT_THROW(teleport_branches(qutrit, 0, 1, 2), DimensionMismatch);
}

TEST(Decoy, TraceOneAndPositive) {
  Rng rng(13);
  for (std::size_t n : {2, 4, 8}) {
    const QuantumState c = pure(Dims(static_cast<std::size_t>(std::log2(n)), 2), random_state_vector(n, rng));
    const ComplexMatrix rho = c.to_density();
    for (double eps : {0.01, 0.5 / static_cast<double>(n - 1), 1.0 / static_cast<double>(n - 1)}) {
      const ComplexMatrix m = make_decoy(rho, eps);
      EXPECT_NEAR(std::abs(m.trace() - Complex(1, 0)), 0, 1e-12);
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(m).eigenvalues();
      EXPECT_GT(ev.minCoeff(), -1e-12);
      // eps rho + decoy is proportional to the identity.
      const ComplexMatrix mix = (eps * rho + m) / (1 + eps);
      EXPECT_LT((mix - ComplexMatrix::Identity(rho.rows(), rho.cols()) / double(n)).norm(), 1e-12);
    }
    EXPECT_THROW(make_decoy(rho, 0.0), InvalidInput);
    EXPECT_THROW(make_decoy(rho, 1.0 / static_cast<double>(n - 1) + 1e-6), InvalidInput);
  }
}

TEST(SendPolicy, ProbabilitiesAndAverage) {
  Rng rng(14);
  const QuantumState c = pure({2, 2}, random_state_vector(4, rng));
  const SendPolicy p(c, 0.2, 0.7);
  EXPECT_NEAR(p.p_control() + p.p_decoy() + 4 * p.p_basis(), 1.0, 1e-15);
  ComplexMatrix recon = ComplexMatrix::Zero(4, 4);
  for (std::size_t i = 0; i < p.decoy_states().size(); ++i) {
    recon += p.decoy_weights()[i] * p.decoy_states()[i] * p.decoy_states()[i].adjoint();
  }
  EXPECT_LT((recon - p.decoy()).norm(), 1e-12);
  // The server sees the maximally mixed state whatever the control.
  EXPECT_LT((p.average_sent_state() - ComplexMatrix::Identity(4, 4) / 4.0).norm(), 1e-12);
  EXPECT_THROW(SendPolicy(c, 0.2, 0.0), InvalidInput);
  EXPECT_THROW(SendPolicy(c, 0.5, 0.5), InvalidInput);
}

TEST(SendPolicy, SamplingFrequencies) {
  Rng rng(15);
  const QuantumState c = pure({2}, random_state_vector(2, rng));
  const SendPolicy p(c, 0.5, 0.6);
  const int trials = 40000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < trials; ++i) ++counts[static_cast<int>(sample_send(p, rng).kind)];
  const double sd = std::sqrt(0.25 / trials);
  EXPECT_NEAR(counts[0] / double(trials), p.p_control(), 5 * sd);
  EXPECT_NEAR(counts[1] / double(trials), p.p_decoy(), 5 * sd);
  EXPECT_NEAR(counts[2] / double(trials), 2 * p.p_basis(), 5 * sd);
}

TEST(Session, HonestServerDeliversCombination) {
  Rng rng(16);
  for (std::size_t d : {2, 4}) {
    const lcc::LinearCombinationSpec spec = kak::pauli_spec(haar_random_unitary(2, rng));
    const lcc::LinearCombinationSpec s = d == 2 ? spec : unitary_combination(4, 0.4, rng);
    const QuantumState psi = pure({d}, random_state_vector(d, rng));
    const SendPolicy policy(lcc::build_control_state(s), 0.3, 0.8);
    SessionConfig cfg;
    cfg.rounds = 60;
    cfg.teleport_input = true;
    cfg.teleport_output = true;
    const ProtocolTranscript t = run_session(s, psi, policy, {}, cfg, rng);
    EXPECT_EQ(t.summary.detections, 0u);
    EXPECT_GT(t.summary.completed, 0u);
    for (const RoundRecord& r : t.records) {
      if (!r.completed || !r.fidelity) continue;
      EXPECT_NEAR(*r.fidelity, 1.0, 1e-9) << to_string(r.kind);
    }
    EXPECT_NEAR(t.summary.min_compute_fidelity, 1.0, 1e-9);
  }
}

TEST(Session, FirstAttemptRateMatchesAccount) {
  Rng rng(17);
  const lcc::LinearCombinationSpec s = unitary_combination(2, 0.7, rng);
  const QuantumState psi = pure({2}, random_state_vector(2, rng));
  const SendPolicy policy(lcc::build_control_state(s), 1.0, 1.0);
  SessionConfig cfg;
  cfg.rounds = 20000;
  const ProtocolTranscript t = run_session(s, psi, policy, {}, cfg, rng);
  const double p = success_probability_account(s, false, false);
  EXPECT_NEAR(p, 0.125, 1e-15);
  const double sd = std::sqrt(p * (1 - p) / static_cast<double>(t.summary.compute_rounds));
  EXPECT_NEAR(t.summary.empirical_success, p, 5 * sd);
  EXPECT_NEAR(success_probability_account(s, true, true), 0.125 / 4, 1e-15);
}

TEST(Session, SkipMeasurementLeavesEntanglement) {
  Rng rng(18);
  const lcc::LinearCombinationSpec s = unitary_combination(2, 0.6, rng);
  const QuantumState psi = pure({2}, random_state_vector(2, rng));
  const SendPolicy policy(lcc::build_control_state(s), 1.0, 1.0);
  SessionConfig cfg;
  cfg.rounds = 200;
  ServerBehavior skip;
  skip.mode = ServerMode::skip_measurement;
  const ProtocolTranscript t = run_session(s, psi, policy, skip, cfg, rng);
  std::size_t seen = 0;
  for (const RoundRecord& r : t.records) {
    if (!r.completed) continue;
    ++seen;
    EXPECT_EQ(r.lcc_attempts, 1u);
    ASSERT_TRUE(r.held_schmidt_rank.has_value());
    EXPECT_EQ(*r.held_schmidt_rank, 2u);
    ASSERT_TRUE(r.final_state.has_value());
    EXPECT_FALSE(r.final_state->is_pure());
  }
  EXPECT_GT(seen, 0u);
}

TEST(Detection, HonestServerIsNeverFlagged) {
  Rng rng(19);
  const lcc::LinearCombinationSpec s = unitary_combination(2, 0.5, rng);
  const QuantumState psi = pure({2}, random_state_vector(2, rng));
  const SendPolicy policy(lcc::build_control_state(s), 0.5, 0.5);
  const DetectionAnalysis a = analyze_detection(s, psi, policy, {}, {});
  EXPECT_NEAR(a.per_round, 0, 1e-12);
  EXPECT_NEAR(a.per_completed_verify, 0, 1e-12);
}

TEST(Detection, ComputationalInterceptEvadesBasisChecks) {
  Rng rng(20);
  const lcc::LinearCombinationSpec s = unitary_combination(2, 0.5, rng);
  const QuantumState psi = pure({2}, random_state_vector(2, rng));
  const SendPolicy policy(lcc::build_control_state(s), 0.5, 0.5);
  ServerBehavior b;
  b.mode = ServerMode::intercept;
  b.intercept_basis = InterceptBasis::computational;
  EXPECT_NEAR(analyze_detection(s, psi, policy, b, {}).per_round, 0, 1e-12);
}

TEST(Detection, HadamardInterceptRateMatchesSimulation) {
  Rng rng(21);
  const lcc::LinearCombinationSpec s = unitary_combination(2, 0.5, rng);
  const QuantumState psi = pure({2}, random_state_vector(2, rng));
  const SendPolicy policy(lcc::build_control_state(s), 0.5, 0.5);
  ServerBehavior b;
  b.mode = ServerMode::intercept;
  b.intercept_basis = InterceptBasis::hadamard;
  b.intercept_fraction = 0.5;
  SessionConfig cfg;
  cfg.verify_mode = VerifyMode::projective;
  cfg.rounds = 40000;
  const DetectionAnalysis a = analyze_detection(s, psi, policy, b, cfg);
  EXPECT_GT(a.per_round, 1e-3);
  EXPECT_NEAR(a.per_verify * (1 - policy.tau()), a.per_round, 1e-15);
  const ProtocolTranscript t = run_session(s, psi, policy, b, cfg, rng);
  const double rate = static_cast<double>(t.summary.detections) / static_cast<double>(cfg.rounds);
  const double p = analytic_detection_rate(a);
  EXPECT_NEAR(rate, p, 5 * std::sqrt(p * (1 - p) / static_cast<double>(cfg.rounds)));
  ASSERT_TRUE(t.summary.first_detection_round.has_value());
}

TEST(Transcript, DeterministicAndWellFormed) {
  const auto run = [] {
    Rng rng(22);
    const lcc::LinearCombinationSpec s = kak::pauli_spec(gates::named_gate("H"));
    const QuantumState psi = QuantumState::basis({2}, Indices{0});
    const SendPolicy policy(lcc::build_control_state(s), 0.25, 0.5);
    SessionConfig cfg;
    cfg.rounds = 25;
    cfg.teleport_output = true;
    return transcript_jsonl(run_session(s, psi, policy, {}, cfg, rng));
  };
  const std::string a = run();
  EXPECT_EQ(a, run());
  std::istringstream in(a);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::ordered_json::parse(line);
    if (lines < 25) {
      EXPECT_EQ(j.at("round").get<std::size_t>(), lines);
      EXPECT_EQ(j.begin().key(), "round");
    } else {
      EXPECT_TRUE(j.contains("summary"));
    }
    ++lines;
  }
  EXPECT_EQ(lines, 26u);
}

TEST(Session, DimensionChecks) {
  Rng rng(23);
  const lcc::LinearCombinationSpec s = unitary_combination(2, 0.3, rng);
  const SendPolicy policy(lcc::build_control_state(s), 1.0, 1.0);
  EXPECT_THROW(run_session(s, QuantumState::basis({3}, Indices{0}), policy, {}, {}, rng), DimensionMismatch);
  const SendPolicy wide(QuantumState::basis({2, 2}, Indices{0, 0}), 0.3, 1.0);
  EXPECT_THROW(run_session(s, QuantumState::basis({2}, Indices{0}), wide, {}, {}, rng), DimensionMismatch);
  const lcc::LinearCombinationSpec odd({std::sqrt(0.5), std::sqrt(0.5)},
                                       {ComplexMatrix::Identity(3, 3), ComplexMatrix::Identity(3, 3)});
  SessionConfig cfg;
  cfg.teleport_input = true;
  EXPECT_THROW(run_session(odd, QuantumState::basis({3}, Indices{0}), policy, {}, cfg, rng), DimensionMismatch);
}

TEST(Cheating, HeldStateMatchesDirectFormula) {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = haar_random_unitary(2, rng);
    const ComplexMatrix b = haar_random_unitary(2, rng);
    const ComplexVector phi = random_state_vector(2, rng);
    const ComplexVector c = random_state_vector(2, rng);
    const QuantumState held = cheating_server_state(a, b, pure({2}, phi), c(0), c(1));
    oracle::Vec e0(2), e1(2);
    e0 << 1, 0;
    e1 << 0, 1;
    const oracle::Vec want = c(0) * oracle::kron(e0, a * phi) + c(1) * oracle::kron(e1, b * phi);
    EXPECT_NEAR(std::abs(want.dot(held.amplitudes())), 1.0, 1e-12);
  }
}

TEST(Cheating, WitnessWorkedExample) {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix x = gates::named_gate("X");
  const QuantumState zero = QuantumState::basis({2}, Indices{0});
  const double h = 1 / std::sqrt(2.0);
  const WitnessReport r = no_cloning_witness(i2, x, zero, {1.0, 0.0}, {h, h});
  EXPECT_NEAR(r.held_overlap, h, 1e-12);
  EXPECT_NEAR(r.expected_overlap, 0.5, 1e-12);
  EXPECT_NEAR(r.difference, h - 0.5, 1e-12);
  EXPECT_FALSE(r.vacuous);
  const WitnessReport orth = no_cloning_witness(i2, x, zero, {1.0, 0.0}, {0.0, 1.0});
  EXPECT_TRUE(orth.vacuous);
}
