#pragma once

// Linear-combination circuits: implement sum_j alpha_j V_j on a d-dimensional
// target by encoding the coefficients in a k-qubit control register and
// postselecting the control on all zeros.
//
// Register layout used by both circuit forms (subsystem order):
//   extended form:   [control_0 .. control_{k-1}, path_0 .. path_{k-1}, logical(d)]
//   controlled form: [control_0 .. control_{k-1}, logical(d)]
// The extended target T of dimension n*d is the path register tensored with
// the logical register, so subspace j of T is "path = j".

#include <optional>
#include <vector>

#include "rqc/qcore.hpp"

namespace rqc::lcc {

class LinearCombinationSpec {
 public:
  // Throws InvalidInput unless the term count is a power of two >= 2, every
  // gate is d x d, and sum |alpha_j|^2 = 1 within 1e-12.
  LinearCombinationSpec(std::vector<Complex> coefficients, std::vector<ComplexMatrix> gates);

  std::size_t terms() const { return coefficients_.size(); }
  std::size_t control_qubits() const { return control_qubits_; }
  std::size_t target_dim() const { return static_cast<std::size_t>(gates_.front().rows()); }
  const std::vector<Complex>& coefficients() const { return coefficients_; }
  const std::vector<ComplexMatrix>& gates() const { return gates_; }

  // sum_j alpha_j V_j.
  ComplexMatrix combination() const;
  // Per-term unitarity flags; non-unitary terms are allowed.
  const std::vector<bool>& unitary_terms() const { return unitary_terms_; }
  bool all_terms_unitary() const;

 private:
  std::vector<Complex> coefficients_;
  std::vector<ComplexMatrix> gates_;
  std::vector<bool> unitary_terms_;
  std::size_t control_qubits_ = 0;
};

struct LccRunResult {
  // False only when the postselected branch vanishes.
  bool success = false;
  double success_probability = 0.0;
  // Normalized d-dimensional output; empty when success is false.
  std::optional<QuantumState> output_state;
  // Joint state right before the control register is measured.
  QuantumState joint_state = QuantumState::trivial();
};

// k-qubit statevector with amplitude alpha_j on |j>.
QuantumState build_control_state(const LinearCombinationSpec& spec);

// Permutation exchanging |m> and |j*d + m> for m < d on an (n*d)-dim space.
ComplexMatrix subspace_swap(std::size_t j, std::size_t d, std::size_t n);

// Block-diagonal (n*d) x (n*d) matrix with V_j on block j.
ComplexMatrix sum_operation(const LinearCombinationSpec& spec);

// Embeds a d-dimensional input into subspace 0 of the (n*d)-dim target, as
// the state of [path_0 .. path_{k-1}, logical].
QuantumState extend_input(const QuantumState& input, std::size_t terms);

// Extended-space circuit without controlled V_j gates: controlled subspace
// swaps, the sum operation, the swaps again, Hadamards on the controls and
// postselection of all-zero controls.
LccRunResult run_lcc(const LinearCombinationSpec& spec, const QuantumState& input);

// The multiply-controlled-V_j circuit with the same contract as run_lcc.
LccRunResult run_lcc_controlled_form(const LinearCombinationSpec& spec,
                                     const QuantumState& input);

enum class CircuitForm { extended, controlled };

// sqrt(n) times the postselected operator, assembled column by column from
// circuit runs on basis inputs. Equals sum_j alpha_j V_j.
ComplexMatrix effective_operator(const LinearCombinationSpec& spec,
                                 CircuitForm form = CircuitForm::extended);

// Two-term spec for controlled-U: |0><0| (x) I and |1><1| (x) U, each scaled
// by sqrt(2) and weighted 1/sqrt(2), so the combination is exactly CU.
LinearCombinationSpec cu_linear_spec(const ComplexMatrix& u);

}  // namespace rqc::lcc
