#include "rqc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace rqc::protocol {

namespace {

using json = nlohmann::ordered_json;

constexpr double kZeroBranch = 1e-24;
constexpr std::size_t kMaxAttempts = 1'000'000;

ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

ComplexMatrix pauli_x() {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

ComplexMatrix pauli_z() {
  ComplexMatrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

ComplexMatrix cnot() {
  ComplexMatrix c = ComplexMatrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1;
  return c;
}

QuantumState apply1(const QuantumState& s, const ComplexMatrix& op, std::size_t t) {
  return apply_to_subsystems(s, op, std::span<const std::size_t>(&t, 1));
}

QuantumState apply2(const QuantumState& s, const ComplexMatrix& op, std::size_t a, std::size_t b) {
  const std::array<std::size_t, 2> t{a, b};
  return apply_to_subsystems(s, op, t);
}

Indices range(std::size_t begin, std::size_t end) {
  Indices out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

std::size_t log2_exact(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return (std::size_t{1} << k) == n ? k : static_cast<std::size_t>(-1);
}

void require_qubit(const QuantumState& s, std::size_t i) {
  if (i >= s.num_subsystems() || s.dims()[i] != 2) {
    throw DimensionMismatch("teleportation wires must be qubits");
  }
}

// |Phi+>^k ordered [s_0 .. s_{k-1}, e_0 .. e_{k-1}].
QuantumState epr_register(std::size_t k) {
  const std::size_t n = std::size_t{1} << k;
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(n * n));
  for (std::size_t j = 0; j < n; ++j) v(static_cast<Eigen::Index>(j * n + j)) = 1 / std::sqrt(double(n));
  return QuantumState::from_trusted(Dims(2 * k, 2), std::move(v));
}

QuantumState as_dims(const QuantumState& s, Dims dims) {
  if (s.is_pure()) return QuantumState::from_trusted(std::move(dims), s.amplitudes());
  return QuantumState::from_trusted(std::move(dims), s.density_matrix());
}

// Expected normalized state op |psi>, or nullopt when it vanishes.
std::optional<QuantumState> expected_state(const ComplexMatrix& op, const QuantumState& psi) {
  const QuantumState out = apply_to_subsystems(psi, op, range(0, 1));
  if (!(out.norm() > 1e-12)) return std::nullopt;
  return out.normalized();
}

// Teleports every qubit of `reg` (dimension 2^q) through fresh EPR pairs.
// Layout: [src_0..src_{q-1}, a_0, b_0, a_1, b_1, ...].
QuantumState register_with_pairs(const QuantumState& reg, std::size_t q) {
  QuantumState s = as_dims(reg, Dims(q, 2));
  for (std::size_t i = 0; i < q; ++i) s = s.tensor(epr_pair());
  for (std::size_t i = 0; i < q; ++i) {
    s = apply2(s, cnot(), i, q + 2 * i);
    s = apply1(s, hadamard(), i);
  }
  return s;
}

Indices teleport_targets(std::size_t q) {
  Indices t = range(0, q);
  for (std::size_t i = 0; i < q; ++i) t.push_back(q + 2 * i);
  return t;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json state_json(const QuantumState& s) {
  json j;
  j["dims"] = s.dims();
  j["kind"] = s.is_pure() ? "statevector" : "density";
  json data = json::array();
  if (s.is_pure()) {
    for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) data.push_back(complex_json(s.amplitudes()(i)));
    j["amplitudes"] = std::move(data);
  } else {
    const ComplexMatrix& m = s.density_matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
      data.push_back(std::move(row));
    }
    j["matrix"] = std::move(data);
  }
  return j;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// Shared cached simulation of the server and client stages.
class Simulator {
 public:
  Simulator(const lcc::LinearCombinationSpec& spec, const QuantumState& input,
            const SendPolicy& policy, const ServerBehavior& behavior, const SessionConfig& config)
      : spec_(spec), policy_(policy), behavior_(behavior), config_(config),
        n_(spec.terms()), k_(spec.control_qubits()), d_(spec.target_dim()) {
    if (input.dimension() != d_) {
      throw DimensionMismatch("input dimension " + std::to_string(input.dimension()) +
                              " does not match gate dimension " + std::to_string(d_));
    }
    if (policy.n() != n_) throw DimensionMismatch("send policy and spec disagree on the term count");
    if (behavior.intercept_fraction < 0 || behavior.intercept_fraction > 1) {
      throw InvalidInput("intercept fraction must lie in [0, 1]");
    }
    q_ = log2_exact(d_);
    if ((config.teleport_input || config.teleport_output) && q_ == static_cast<std::size_t>(-1)) {
      throw DimensionMismatch("register teleportation needs a power-of-two dimension");
    }
    psi_ = as_dims(input, Dims{d_});
    if (config.teleport_input) {
      const QuantumState s = register_with_pairs(psi_, q_);
      const MeasurementOutcome m = measure_postselect(s, teleport_targets(q_), Indices(2 * q_, 0));
      p_input_ = m.probability;
      register_ = as_dims(*m.remainder, Dims{d_});
    } else {
      register_ = psi_;
    }
    initial_ = epr_register(k_).tensor(register_);
  }

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  double p_input() const { return p_input_; }
  bool skip() const { return behavior_.mode == ServerMode::skip_measurement; }

  std::optional<QuantumState> expected(RoundKind kind, std::size_t index) const {
    switch (kind) {
      case RoundKind::compute: return expected_state(spec_.combination(), psi_);
      case RoundKind::verify: return expected_state(spec_.gates()[index], psi_);
      case RoundKind::decoy: {
        const ComplexVector& g = policy_.decoy_states()[index];
        ComplexMatrix op = ComplexMatrix::Zero(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
        for (std::size_t j = 0; j < n_; ++j) op += g(static_cast<Eigen::Index>(j)) * spec_.gates()[j];
        return expected_state(op, psi_);
      }
    }
    return std::nullopt;
  }

  // Server stage for one attempt. intercept: nullopt or the outcome label.
  struct ServerBranch {
    double success = 0.0;
    std::optional<QuantumState> state;
  };

  const ServerBranch& server(std::optional<std::size_t> intercept) {
    const long key = intercept ? static_cast<long>(*intercept) : -1;
    auto it = server_cache_.find(key);
    if (it != server_cache_.end()) return it->second;
    QuantumState s = intercept ? intercepted_state(*intercept) : initial_;
    const Indices s_and_reg = [&] {
      Indices t = range(0, k_);
      t.push_back(2 * k_);
      return t;
    }();
    s = apply_to_subsystems(s, lcc::sum_operation(spec_), s_and_reg);
    ServerBranch branch;
    if (skip()) {
      branch.success = 1.0;
      branch.state = std::move(s);
    } else {
      for (std::size_t i = 0; i < k_; ++i) s = apply1(s, hadamard(), i);
      MeasurementOutcome m = measure_postselect(s, range(0, k_), Indices(k_, 0));
      branch.success = m.probability > kZeroBranch ? m.probability : 0.0;
      branch.state = std::move(m.remainder);
    }
    return server_cache_.emplace(key, std::move(branch)).first->second;
  }

  // Probability of each intercept outcome (uniform for maximally entangled pairs).
  const std::vector<double>& intercept_distribution() {
    if (intercept_dist_.empty()) {
      QuantumState s = initial_;
      if (behavior_.intercept_basis == InterceptBasis::hadamard) {
        for (std::size_t i = 0; i < k_; ++i) s = apply1(s, hadamard(), i);
      }
      intercept_dist_ = outcome_distribution(s, range(0, k_));
    }
    return intercept_dist_;
  }

  struct ClientBranch {
    std::vector<double> distribution;
    std::optional<QuantumState> state;  // on outcome all zeros
  };

  const ClientBranch& client(const std::string& send_key, const QuantumState& send,
                             std::optional<std::size_t> intercept) {
    const std::string key = send_key + "|" + (intercept ? std::to_string(*intercept) : "-");
    auto it = client_cache_.find(key);
    if (it != client_cache_.end()) return it->second;
    const ServerBranch& srv = server(intercept);
    ClientBranch out;
    if (srv.state) {
      QuantumState s = as_dims(send, Dims(k_, 2)).tensor(*srv.state);
      const std::size_t e0 = skip() ? 2 * k_ : k_;
      for (std::size_t i = 0; i < k_; ++i) {
        s = apply2(s, cnot(), i, e0 + i);
        s = apply1(s, hadamard(), i);
      }
      Indices targets = range(0, k_);
      for (std::size_t i = 0; i < k_; ++i) targets.push_back(e0 + i);
      out.distribution = outcome_distribution(s, targets);
      MeasurementOutcome m = measure_postselect(s, targets, Indices(2 * k_, 0));
      if (m.probability > kZeroBranch) out.state = std::move(m.remainder);
    }
    return client_cache_.emplace(key, std::move(out)).first->second;
  }

  // Final register state and, in skip mode, the Schmidt rank of the held state.
  std::pair<QuantumState, std::optional<std::size_t>> register_state(const QuantumState& held) const {
    if (!skip()) return {held, std::nullopt};
    std::optional<std::size_t> rank;
    if (held.is_pure()) rank = schmidt_rank(as_dims(held, Dims{n_, d_}), 1);
    const Indices keep{k_};
    return {partial_trace(held, keep), rank};
  }

  QuantumState teleport_output(const QuantumState& reg, Rng& rng, Indices& corrections) const {
    QuantumState s = register_with_pairs(reg, q_);
    const Indices targets = teleport_targets(q_);
    const MeasurementOutcome m = measure_sample(s, targets, rng);
    QuantumState out = *m.remainder;
    for (std::size_t i = 0; i < q_; ++i) {
      const std::size_t m_src = m.labels[i];
      const std::size_t m_snd = m.labels[q_ + i];
      if (m_snd) out = apply1(out, pauli_x(), i);
      if (m_src) out = apply1(out, pauli_z(), i);
      corrections.push_back(2 * m_src + m_snd);
    }
    return as_dims(out, Dims{d_});
  }

 private:
  QuantumState intercepted_state(std::size_t x) {
    QuantumState s = initial_;
    const bool had = behavior_.intercept_basis == InterceptBasis::hadamard;
    if (had) {
      for (std::size_t i = 0; i < k_; ++i) s = apply1(s, hadamard(), i);
    }
    const Indices label = digits_of(x, Dims(k_, 2));
    const MeasurementOutcome m = measure_postselect(s, range(0, k_), label);
    QuantumState sx = QuantumState::basis(Dims(k_, 2), label);
    if (had) {
      for (std::size_t i = 0; i < k_; ++i) sx = apply1(sx, hadamard(), i);
    }
    return sx.tensor(*m.remainder);
  }

  const lcc::LinearCombinationSpec& spec_;
  const SendPolicy& policy_;
  ServerBehavior behavior_;
  SessionConfig config_;
  std::size_t n_, k_, d_;
  std::size_t q_ = 0;
  double p_input_ = 1.0;
  QuantumState psi_ = QuantumState::trivial();
  QuantumState register_ = QuantumState::trivial();
  QuantumState initial_ = QuantumState::trivial();
  std::map<long, ServerBranch> server_cache_;
  std::map<std::string, ClientBranch> client_cache_;
  std::vector<double> intercept_dist_;
};

std::string send_key(const SendSample& s) {
  switch (s.kind) {
    case RoundKind::compute: return "c";
    case RoundKind::decoy: return "d" + std::to_string(s.index);
    case RoundKind::verify: return "v" + std::to_string(s.index);
  }
  return "?";
}

QuantumState verify_state(std::size_t i, std::size_t n) {
  const std::size_t k = log2_exact(n);
  return QuantumState::basis(Dims(k, 2), digits_of(i, Dims(k, 2)));
}

}  // namespace

QuantumState epr_pair() { return epr_register(1); }

std::vector<MeasurementOutcome> teleport_branches(const QuantumState& state, std::size_t source,
                                                  std::size_t sender, std::size_t receiver) {
  require_qubit(state, source);
  require_qubit(state, sender);
  require_qubit(state, receiver);
  if (source == sender || source == receiver || sender == receiver) {
    throw InvalidInput("teleportation wires must be distinct");
  }
  QuantumState s = apply2(state, cnot(), source, sender);
  s = apply1(s, hadamard(), source);
  std::vector<MeasurementOutcome> out;
  const std::array<std::size_t, 2> targets{source, sender};
  for (std::size_t ms = 0; ms < 2; ++ms) {
    for (std::size_t ma = 0; ma < 2; ++ma) {
      const std::array<std::size_t, 2> label{ms, ma};
      out.push_back(measure_postselect(s, targets, label));
    }
  }
  return out;
}

MeasurementOutcome teleport_postselected(const QuantumState& state, std::size_t source,
                                         std::size_t sender, std::size_t receiver) {
  return teleport_branches(state, source, sender, receiver)[0];
}

CorrectedTeleport teleport_corrected(const QuantumState& state, std::size_t source,
                                     std::size_t sender, std::size_t receiver, Rng& rng) {
  const std::vector<MeasurementOutcome> branches = teleport_branches(state, source, sender, receiver);
  std::vector<double> w;
  for (const auto& b : branches) w.push_back(b.probability);
  const std::size_t pick = sample_index(w, rng);
  const std::size_t removed_before =
      static_cast<std::size_t>(source < receiver) + static_cast<std::size_t>(sender < receiver);
  const std::size_t r = receiver - removed_before;
  CorrectedTeleport out{*branches[pick].remainder, pick / 2, pick % 2};
  if (out.sender_outcome) out.state = apply1(out.state, pauli_x(), r);
  if (out.source_outcome) out.state = apply1(out.state, pauli_z(), r);
  return out;
}

ComplexMatrix make_decoy(const ComplexMatrix& rho, double epsilon) {
  const auto n = rho.rows();
  if (n < 2 || rho.cols() != n) throw DimensionMismatch("decoy needs a square state of dimension >= 2");
  if (!(epsilon > 0) || epsilon > 1.0 / static_cast<double>(n - 1) + 1e-15) {
    throw InvalidInput("decoy parameter must lie in (0, 1/(n-1)]");
  }
  return ((1 + epsilon) / static_cast<double>(n)) * ComplexMatrix::Identity(n, n) - epsilon * rho;
}

const char* to_string(RoundKind kind) {
  switch (kind) {
    case RoundKind::compute: return "compute";
    case RoundKind::decoy: return "decoy";
    case RoundKind::verify: return "verify";
  }
  return "?";
}

SendPolicy::SendPolicy(QuantumState control, double epsilon, double tau)
    : control_(std::move(control)), n_(control_.dimension()), epsilon_(epsilon), tau_(tau) {
  if (!(tau > 0) || tau > 1) throw InvalidInput("tau must lie in (0, 1]");
  if (log2_exact(n_) == static_cast<std::size_t>(-1) || n_ < 2) {
    throw DimensionMismatch("control register must have dimension 2^k >= 2");
  }
  if (!control_.is_normalized(1e-12)) throw InvalidInput("control state is not normalized");
  decoy_ = make_decoy(control_.to_density(), epsilon);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(decoy_);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    ComplexVector v = es.eigenvectors().col(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-12) {
        v *= std::conj(v(j)) / std::abs(v(j));
        break;
      }
    }
    decoy_weights_.push_back(std::max(0.0, es.eigenvalues()(i)));
    decoy_states_.push_back(std::move(v));
  }
}

ComplexMatrix SendPolicy::average_sent_state() const {
  const auto n = static_cast<Eigen::Index>(n_);
  const ComplexMatrix mixture = (epsilon_ * control_.to_density() + decoy_) / (1 + epsilon_);
  return tau_ * mixture + ((1 - tau_) / static_cast<double>(n_)) * ComplexMatrix::Identity(n, n);
}

SendSample sample_send(const SendPolicy& policy, Rng& rng) {
  const std::size_t n = policy.n();
  const std::size_t k = log2_exact(n);
  const double u = uniform01(rng);
  SendSample out;
  if (u < policy.p_control()) {
    out.kind = RoundKind::compute;
    out.state = policy.control();
  } else if (u < policy.p_control() + policy.p_decoy()) {
    out.kind = RoundKind::decoy;
    out.index = sample_index(policy.decoy_weights(), rng);
    out.state = QuantumState::from_trusted(Dims(k, 2), policy.decoy_states()[out.index]);
  } else {
    out.kind = RoundKind::verify;
    out.index = std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
    out.state = verify_state(out.index, n);
  }
  return out;
}

ProtocolTranscript run_session(const lcc::LinearCombinationSpec& spec, const QuantumState& input,
                               const SendPolicy& policy, const ServerBehavior& behavior,
                               const SessionConfig& config, Rng& rng) {
  Simulator sim(spec, input, policy, behavior, config);
  ProtocolTranscript t;
  SessionSummary& sum = t.summary;
  sum.rounds = config.rounds;
  sum.analytic_success = success_probability_account(spec, config.teleport_input, config.teleport_output);
  std::size_t first_attempt_ok = 0;

  for (std::size_t r = 0; r < config.rounds; ++r) {
    RoundRecord rec;
    rec.round = r;
    const SendSample send = sample_send(policy, rng);
    rec.kind = send.kind;
    rec.index = send.index;
    switch (send.kind) {
      case RoundKind::compute: ++sum.compute_rounds; break;
      case RoundKind::decoy: ++sum.decoy_rounds; break;
      case RoundKind::verify: ++sum.verify_rounds; break;
    }

    bool ok = true;
    if (config.teleport_input) {
      rec.input_teleport_ok = uniform01(rng) < sim.p_input();
      ok = *rec.input_teleport_ok;
    }

    std::optional<std::size_t> intercept;
    if (ok) {
      // The server repeats the circuit on fresh pairs until its postselection succeeds.
      bool server_ok = false;
      while (!server_ok && rec.lcc_attempts < kMaxAttempts) {
        ++rec.lcc_attempts;
        intercept.reset();
        if (behavior.mode == ServerMode::intercept && uniform01(rng) < behavior.intercept_fraction) {
          intercept = sample_index(sim.intercept_distribution(), rng);
        }
        const double p = sim.server(intercept).success;
        server_ok = p > 0 && uniform01(rng) < p;
      }
      ok = server_ok;
      sum.total_lcc_attempts += rec.lcc_attempts;
      if (intercept) {
        rec.intercepted = true;
        rec.intercept_outcome = digits_of(*intercept, Dims(sim.k(), 2));
      }
    }

    if (ok) {
      const auto& branch = sim.client(send_key(send), send.state, intercept);
      const std::size_t outcome = sample_index(branch.distribution, rng);
      rec.client_outcome = digits_of(outcome, Dims(2 * sim.k(), 2));
      rec.completed = outcome == 0 && branch.state.has_value();
      if (rec.completed) {
        auto [reg, rank] = sim.register_state(*branch.state);
        rec.held_schmidt_rank = rank;
        if (config.teleport_output) {
          Indices corrections;
          reg = sim.teleport_output(reg, rng, corrections);
          rec.output_corrections = std::move(corrections);
        }
        const auto expect = sim.expected(send.kind, send.index);
        if (expect) rec.fidelity = state_fidelity(*expect, reg);
        if (send.kind == RoundKind::verify) {
          const double f = rec.fidelity.value_or(0.0);
          rec.verified = config.verify_mode == VerifyMode::projective
                             ? uniform01(rng) < f
                             : f >= config.fidelity_threshold;
          ++sum.verify_completed;
          if (!*rec.verified) {
            ++sum.detections;
            if (!sum.first_detection_round) sum.first_detection_round = r;
          }
        }
        if (send.kind == RoundKind::compute && rec.fidelity) {
          sum.min_compute_fidelity = std::min(sum.min_compute_fidelity, *rec.fidelity);
        }
        rec.final_state = std::move(reg);
        ++sum.completed;
        if (rec.lcc_attempts == 1) {
          ++first_attempt_ok;
          if (send.kind == RoundKind::compute) ++sum.compute_first_attempt_completed;
        }
      }
    }
    t.records.push_back(std::move(rec));
  }
  sum.first_attempt_completed = first_attempt_ok;
  sum.empirical_success = sum.compute_rounds ? static_cast<double>(sum.compute_first_attempt_completed) /
                                                   static_cast<double>(sum.compute_rounds)
                                             : 0.0;
  return t;
}

std::string transcript_jsonl(const ProtocolTranscript& t) {
  std::string out;
  for (const RoundRecord& r : t.records) {
    json j;
    j["round"] = r.round;
    j["kind"] = to_string(r.kind);
    j["index"] = r.kind == RoundKind::compute ? json(nullptr) : json(r.index);
    j["intercepted"] = r.intercepted;
    j["intercept_outcome"] = r.intercepted ? json(r.intercept_outcome) : json(nullptr);
    j["lcc_attempts"] = r.lcc_attempts;
    j["input_teleport_ok"] = optional_json(r.input_teleport_ok);
    j["client_outcome"] = r.client_outcome;
    j["completed"] = r.completed;
    j["output_corrections"] = optional_json(r.output_corrections);
    j["fidelity"] = optional_json(r.fidelity);
    j["verified"] = optional_json(r.verified);
    j["held_schmidt_rank"] = optional_json(r.held_schmidt_rank);
    j["final_state"] = r.final_state ? state_json(*r.final_state) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  const SessionSummary& s = t.summary;
  json j;
  j["rounds"] = s.rounds;
  j["compute_rounds"] = s.compute_rounds;
  j["decoy_rounds"] = s.decoy_rounds;
  j["verify_rounds"] = s.verify_rounds;
  j["completed"] = s.completed;
  j["first_attempt_completed"] = s.first_attempt_completed;
  j["compute_first_attempt_completed"] = s.compute_first_attempt_completed;
  j["verify_completed"] = s.verify_completed;
  j["detections"] = s.detections;
  j["first_detection_round"] = optional_json(s.first_detection_round);
  j["total_lcc_attempts"] = s.total_lcc_attempts;
  j["min_compute_fidelity"] = s.min_compute_fidelity;
  j["empirical_success"] = s.empirical_success;
  j["analytic_success"] = s.analytic_success;
  out += json{{"summary", j}}.dump();
  out += '\n';
  return out;
}

double success_probability_account(const lcc::LinearCombinationSpec& spec, bool include_input_teleport,
                                   bool include_output_teleport) {
  const double n = static_cast<double>(spec.terms());
  double p = (1 / n) * std::pow(0.25, static_cast<double>(spec.control_qubits()));
  if (include_input_teleport || include_output_teleport) {
    if (log2_exact(spec.target_dim()) == static_cast<std::size_t>(-1)) {
      throw DimensionMismatch("register teleportation needs a power-of-two dimension");
    }
  }
  if (include_input_teleport) p /= static_cast<double>(spec.target_dim() * spec.target_dim());
  return p;
}

DetectionAnalysis analyze_detection(const lcc::LinearCombinationSpec& spec, const QuantumState& input,
                                    const SendPolicy& policy, const ServerBehavior& behavior,
                                    const SessionConfig& config) {
  Simulator sim(spec, input, policy, behavior, config);
  const std::size_t n = sim.n();
  // Accepted server branch weights under geometric retries.
  std::vector<std::pair<std::optional<std::size_t>, double>> branches;
  const double f = behavior.mode == ServerMode::intercept ? behavior.intercept_fraction : 0.0;
  if (f < 1) branches.emplace_back(std::nullopt, (1 - f) * sim.server(std::nullopt).success);
  if (f > 0) {
    const auto& dist = sim.intercept_distribution();
    for (std::size_t x = 0; x < dist.size(); ++x) branches.emplace_back(x, f * dist[x] * sim.server(x).success);
  }
  double total = 0;
  for (const auto& b : branches) total += b.second;
  if (!(total > 0)) throw InvalidInput("server postselection never succeeds");

  double detect = 0, complete = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const QuantumState send = verify_state(i, n);
    const auto expect = sim.expected(RoundKind::verify, i);
    for (const auto& [x, w] : branches) {
      if (w == 0) continue;
      const auto& c = sim.client("v" + std::to_string(i), send, x);
      if (!c.state) continue;
      const double pc = c.distribution[0];
      const QuantumState reg = sim.register_state(*c.state).first;
      const double fid = expect ? state_fidelity(*expect, reg) : 0.0;
      const double d = config.verify_mode == VerifyMode::projective
                           ? 1 - fid
                           : (fid >= config.fidelity_threshold ? 0.0 : 1.0);
      const double weight = (w / total) * pc / static_cast<double>(n);
      complete += weight;
      detect += weight * d;
    }
  }
  DetectionAnalysis out;
  const double p_verify_round = 1 - policy.tau();
  out.per_round = p_verify_round * sim.p_input() * detect;
  out.per_verify = sim.p_input() * detect;
  out.per_completed_verify = complete > 0 ? detect / complete : 0.0;
  return out;
}

QuantumState cheating_server_state(const ComplexMatrix& a, const ComplexMatrix& b,
                                   const QuantumState& phi, Complex alpha, Complex beta) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1) > tol::kStructural) {
    throw InvalidInput("control amplitudes are not normalized");
  }
  if (a.rows() != b.rows() || a.rows() != a.cols() || b.rows() != b.cols() ||
      static_cast<std::size_t>(a.rows()) != phi.dimension()) {
    throw DimensionMismatch("gates and register do not fit together");
  }
  const auto d = a.rows();
  // Qubits 1 (client local), 2 (client EPR half), 3 (server EPR half), register.
  QuantumState s = QuantumState::basis({2}, Indices{0}).tensor(epr_pair()).tensor(as_dims(phi, Dims{static_cast<std::size_t>(d)}));
  ComplexMatrix controlled = ComplexMatrix::Zero(2 * d, 2 * d);
  controlled.topLeftCorner(d, d) = a;
  controlled.bottomRightCorner(d, d) = b;
  const std::array<std::size_t, 2> server_targets{2, 3};
  s = apply_to_subsystems(s, controlled, server_targets);
  ComplexMatrix prep(2, 2);
  prep << alpha, -std::conj(beta), beta, std::conj(alpha);
  s = apply1(s, prep, 0);
  s = apply2(s, cnot(), 0, 1);
  s = apply1(s, hadamard(), 0);
  const std::array<std::size_t, 2> client{0, 1};
  const std::array<std::size_t, 2> zeros{0, 0};
  const MeasurementOutcome m = measure_postselect(s, client, zeros);
  if (!m.remainder) throw InvalidInput("client branch vanishes");
  return *m.remainder;
}

QuantumState server_expected_state(const ComplexMatrix& a, const ComplexMatrix& b,
                                   const QuantumState& phi, Complex alpha, Complex beta) {
  if (!phi.is_pure()) throw InvalidInput("register state must be pure");
  ComplexVector c(2);
  c << alpha, beta;
  const ComplexVector out = (alpha * a + beta * b) * phi.amplitudes();
  if (!(out.norm() > 1e-12)) throw InvalidInput("combination annihilates the register");
  return QuantumState::from_trusted({2}, c).tensor(
      QuantumState::from_trusted(Dims{static_cast<std::size_t>(a.rows())}, ComplexVector(out / out.norm())));
}

WitnessReport no_cloning_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                                 const QuantumState& phi, std::pair<Complex, Complex> c1,
                                 std::pair<Complex, Complex> c2) {
  if (!phi.is_pure()) throw InvalidInput("register state must be pure");
  const ComplexVector h1 = cheating_server_state(a, b, phi, c1.first, c1.second).amplitudes();
  const ComplexVector h2 = cheating_server_state(a, b, phi, c2.first, c2.second).amplitudes();
  const ComplexVector e1 = server_expected_state(a, b, phi, c1.first, c1.second).amplitudes();
  const ComplexVector e2 = server_expected_state(a, b, phi, c2.first, c2.second).amplitudes();
  WitnessReport r;
  r.held_overlap = std::abs(h1.dot(h2));
  r.expected_overlap = std::abs(e1.dot(e2));
  r.difference = r.held_overlap - r.expected_overlap;
  r.vacuous = std::abs(std::conj(c1.first) * c2.first + std::conj(c1.second) * c2.second) < 1e-12;
  return r;
}

}  // namespace rqc::protocol
