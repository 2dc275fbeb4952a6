#pragma once

// Client-server remote control. The server holds the register and k EPR
// halves; it runs the linear-combination circuit with its EPR halves as
// controls and postselects them, after which the client teleports its
// k-qubit control state into the computation.
//
// Register layouts used by the session (subsystem order):
//   server stage: [s_0 .. s_{k-1}, e_0 .. e_{k-1}, register]
//   client stage: [c_0 .. c_{k-1}, (s kept only when the server skips its
//                  measurement), e_0 .. e_{k-1}, register]
// where s are the server's EPR halves, e the client's and c the client's
// local control qubits.

#include <optional>
#include <string>
#include <vector>

#include "rqc/lcc.hpp"

namespace rqc::protocol {

// (|00> + |11>)/sqrt2.
QuantumState epr_pair();

// CNOT(source -> sender), H(source), then both measured. Qubit subsystems only.
// Postselects (0, 0); the remainder keeps the original order without source
// and sender, and the receiver holds the source state.
MeasurementOutcome teleport_postselected(const QuantumState& state, std::size_t source,
                                         std::size_t sender, std::size_t receiver);

// All four measurement branches, indexed 2*m_source + m_sender.
std::vector<MeasurementOutcome> teleport_branches(const QuantumState& state, std::size_t source,
                                                  std::size_t sender, std::size_t receiver);

struct CorrectedTeleport {
  QuantumState state;
  std::size_t source_outcome = 0;
  std::size_t sender_outcome = 0;
};

// Samples the measurement and applies X^{m_sender} Z^{m_source} on the
// receiver, so the transfer always succeeds.
CorrectedTeleport teleport_corrected(const QuantumState& state, std::size_t source,
                                     std::size_t sender, std::size_t receiver, Rng& rng);

// ((1 + eps)/n) I - eps rho. Throws InvalidInput unless 0 < eps <= 1/(n-1).
ComplexMatrix make_decoy(const ComplexMatrix& rho, double epsilon);

enum class RoundKind { compute, decoy, verify };
const char* to_string(RoundKind kind);

class SendPolicy {
 public:
  // control: the k-qubit control state (pure or mixed). Throws InvalidInput
  // for eps outside (0, 1/(n-1)] or tau outside (0, 1].
  SendPolicy(QuantumState control, double epsilon, double tau);

  std::size_t n() const { return n_; }
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }
  const QuantumState& control() const { return control_; }
  const ComplexMatrix& decoy() const { return decoy_; }

  double p_control() const { return tau_ * epsilon_ / (1 + epsilon_); }
  double p_decoy() const { return tau_ / (1 + epsilon_); }
  double p_basis() const { return (1 - tau_) / static_cast<double>(n_); }

  // Spectral decomposition of the decoy; eigenvectors have their first
  // nonzero component real and positive.
  const std::vector<double>& decoy_weights() const { return decoy_weights_; }
  const std::vector<ComplexVector>& decoy_states() const { return decoy_states_; }

  // The server-side average tau (eps rho + rho_m)/(1+eps) + (1-tau)/n sum_i |i><i|.
  ComplexMatrix average_sent_state() const;

 private:
  QuantumState control_;
  std::size_t n_ = 0;
  double epsilon_ = 0;
  double tau_ = 0;
  ComplexMatrix decoy_;
  std::vector<double> decoy_weights_;
  std::vector<ComplexVector> decoy_states_;
};

struct SendSample {
  RoundKind kind = RoundKind::compute;
  // Basis label for verify rounds, eigenvector index for decoy rounds.
  std::size_t index = 0;
  QuantumState state = QuantumState::trivial();
};

SendSample sample_send(const SendPolicy& policy, Rng& rng);

enum class ServerMode { honest, skip_measurement, intercept };
enum class InterceptBasis { computational, hadamard };

struct ServerBehavior {
  ServerMode mode = ServerMode::honest;
  // Probability that a given round's EPR halves are intercepted.
  double intercept_fraction = 1.0;
  InterceptBasis intercept_basis = InterceptBasis::computational;
};

enum class VerifyMode { fidelity_threshold, projective };

struct SessionConfig {
  std::size_t rounds = 1;
  bool teleport_input = false;
  bool teleport_output = false;
  VerifyMode verify_mode = VerifyMode::fidelity_threshold;
  double fidelity_threshold = 1 - 1e-9;
};

struct RoundRecord {
  std::size_t round = 0;
  RoundKind kind = RoundKind::compute;
  std::size_t index = 0;
  bool intercepted = false;
  Indices intercept_outcome;
  std::size_t lcc_attempts = 0;
  // Input teleport: nullopt when disabled.
  std::optional<bool> input_teleport_ok;
  Indices client_outcome;
  bool completed = false;
  std::optional<Indices> output_corrections;
  // Fidelity of the register against the expected state on completion.
  std::optional<double> fidelity;
  // Verify rounds only.
  std::optional<bool> verified;
  // Skip-measurement rounds: Schmidt rank of the held state across (s | register).
  std::optional<std::size_t> held_schmidt_rank;
  // Completed rounds: register state (reduced when entangled with the server).
  std::optional<QuantumState> final_state;
};

struct SessionSummary {
  std::size_t rounds = 0;
  std::size_t compute_rounds = 0;
  std::size_t decoy_rounds = 0;
  std::size_t verify_rounds = 0;
  std::size_t completed = 0;
  std::size_t first_attempt_completed = 0;
  std::size_t compute_first_attempt_completed = 0;
  std::size_t verify_completed = 0;
  std::size_t detections = 0;
  std::size_t total_lcc_attempts = 0;
  double min_compute_fidelity = 1.0;
  // Compute rounds completed on the first LCC attempt, over all compute rounds.
  double empirical_success = 0.0;
  double analytic_success = 0.0;
  std::optional<std::size_t> first_detection_round;
};

struct ProtocolTranscript {
  std::vector<RoundRecord> records;
  SessionSummary summary;
};

// Throws DimensionMismatch when the policy or input does not fit the spec.
ProtocolTranscript run_session(const lcc::LinearCombinationSpec& spec, const QuantumState& input,
                               const SendPolicy& policy, const ServerBehavior& behavior,
                               const SessionConfig& config, Rng& rng);

// One JSON object per round, then {"summary": ...}; fields in fixed order.
std::string transcript_jsonl(const ProtocolTranscript& transcript);

// (1/n) (1/4)^k, times 1/d^2 with input teleport; the corrected output
// teleport contributes 1. Input teleport requires d to be a power of two.
double success_probability_account(const lcc::LinearCombinationSpec& spec,
                                   bool include_input_teleport, bool include_output_teleport);

struct DetectionAnalysis {
  // Probability that one round is a verify round that completes and fails.
  double per_round = 0.0;
  // per_round / (1 - tau): detection per verify round sent.
  double per_verify = 0.0;
  // Detection probability of a verify round given that it completed.
  double per_completed_verify = 0.0;
};

// Exact branch enumeration of the per-round detection probability.
DetectionAnalysis analyze_detection(const lcc::LinearCombinationSpec& spec, const QuantumState& input,
                                    const SendPolicy& policy, const ServerBehavior& behavior,
                                    const SessionConfig& config);

// Two-term lying-server circuit: the server applies the controlled gates but
// neither the Hadamard nor the measurement on its EPR half. Returns the
// normalized state of [server EPR half, register] after the client's
// teleport outcomes (0, 0): alpha |0> A phi + beta |1> B phi.
QuantumState cheating_server_state(const ComplexMatrix& a, const ComplexMatrix& b,
                                   const QuantumState& phi, Complex alpha, Complex beta);

// The product state (alpha|0> + beta|1>) (x) normalized (alpha A + beta B) phi.
QuantumState server_expected_state(const ComplexMatrix& a, const ComplexMatrix& b,
                                   const QuantumState& phi, Complex alpha, Complex beta);

struct WitnessReport {
  double held_overlap = 0.0;      // |<Psi(c1)|Psi(c2)>|
  double expected_overlap = 0.0;  // |<Phi_exp(c1)|Phi_exp(c2)>|
  double difference = 0.0;
  // True when the two control states are orthogonal and the witness says nothing.
  bool vacuous = false;
};

// An isometry preserves inner products, so a nonzero difference rules out a
// U_s mapping every held state to the corresponding expected state.
WitnessReport no_cloning_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                                 const QuantumState& phi, std::pair<Complex, Complex> c1,
                                 std::pair<Complex, Complex> c2);

}  // namespace rqc::protocol
