#include "rqc/lcc.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace rqc::lcc {

namespace {

constexpr double kZeroBranch = 1e-24;

std::size_t log2_exact(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return (std::size_t{1} << k) == n ? k : 0;
}

ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

// The same state viewed as a single subsystem of the given dimension.
QuantumState as_single(const QuantumState& s, std::size_t d) {
  if (s.dimension() != d) {
    throw DimensionMismatch("input of dimension " + std::to_string(s.dimension()) +
                            " does not match gate dimension " + std::to_string(d));
  }
  if (s.is_pure()) return QuantumState::from_trusted(Dims{d}, s.amplitudes());
  return QuantumState::from_trusted(Dims{d}, s.density_matrix());
}

QuantumState with_dims(const QuantumState& s, const Dims& dims) {
  if (s.is_pure()) return QuantumState::from_trusted(dims, s.amplitudes());
  return QuantumState::from_trusted(dims, s.density_matrix());
}

Indices range(std::size_t begin, std::size_t end) {
  Indices out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

QuantumState hadamard_all(QuantumState s, std::size_t k) {
  const ComplexMatrix h = hadamard();
  for (std::size_t q = 0; q < k; ++q) {
    const std::size_t t = q;
    s = apply_to_subsystems(s, h, std::span<const std::size_t>(&t, 1));
  }
  return s;
}

// |j><j| on the control register tensored with op, identity on other control values.
ComplexMatrix controlled_on(std::size_t j, std::size_t n, const ComplexMatrix& op) {
  const auto m = op.rows();
  ComplexMatrix out = ComplexMatrix::Identity(static_cast<Eigen::Index>(n) * m,
                                              static_cast<Eigen::Index>(n) * m);
  out.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(j) * m, m, m) = op;
  return out;
}

// Postselects the leading k control qubits on zero.
LccRunResult postselect_controls(QuantumState joint, std::size_t k) {
  LccRunResult result;
  const Indices controls = range(0, k);
  const Indices zeros(k, 0);
  MeasurementOutcome m = measure_postselect(joint, controls, zeros);
  result.joint_state = std::move(joint);
  if (m.probability <= kZeroBranch || !m.remainder) return result;
  result.success = true;
  result.success_probability = m.probability;
  result.output_state = std::move(m.remainder);
  return result;
}

}  // namespace

LinearCombinationSpec::LinearCombinationSpec(std::vector<Complex> coefficients,
                                             std::vector<ComplexMatrix> gates)
    : coefficients_(std::move(coefficients)), gates_(std::move(gates)) {
  const std::size_t n = coefficients_.size();
  if (n != gates_.size()) {
    throw InvalidInput("coefficient count " + std::to_string(n) + " differs from gate count " +
                       std::to_string(gates_.size()));
  }
  control_qubits_ = log2_exact(n);
  if (n < 2 || control_qubits_ == 0) {
    throw InvalidInput("term count must be a power of two >= 2, got " + std::to_string(n));
  }
  const auto d = gates_.front().rows();
  if (d == 0) throw DimensionMismatch("gates must be non-empty");
  for (const ComplexMatrix& g : gates_) {
    if (g.rows() != d || g.cols() != d) throw DimensionMismatch("gates must all be square of equal size");
    if (!is_finite(g)) throw InvalidInput("gate has non-finite entries");
  }
  double norm2 = 0.0;
  for (Complex a : coefficients_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw InvalidInput("coefficient is not finite");
    }
    norm2 += std::norm(a);
  }
  if (std::abs(norm2 - 1.0) > tol::kStructural) {
    throw InvalidInput("coefficients are not normalized: sum |alpha|^2 = " + std::to_string(norm2));
  }
  unitary_terms_.reserve(n);
  for (const ComplexMatrix& g : gates_) unitary_terms_.push_back(is_unitary(g));
}

ComplexMatrix LinearCombinationSpec::combination() const {
  const auto d = static_cast<Eigen::Index>(target_dim());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (std::size_t j = 0; j < terms(); ++j) out += coefficients_[j] * gates_[j];
  return out;
}

bool LinearCombinationSpec::all_terms_unitary() const {
  for (bool u : unitary_terms_) {
    if (!u) return false;
  }
  return true;
}

QuantumState build_control_state(const LinearCombinationSpec& spec) {
  ComplexVector v(static_cast<Eigen::Index>(spec.terms()));
  for (std::size_t j = 0; j < spec.terms(); ++j) v(static_cast<Eigen::Index>(j)) = spec.coefficients()[j];
  return QuantumState::from_trusted(Dims(spec.control_qubits(), 2), std::move(v));
}

ComplexMatrix subspace_swap(std::size_t j, std::size_t d, std::size_t n) {
  if (j >= n) throw InvalidInput("subspace index out of range");
  const auto dim = static_cast<Eigen::Index>(n * d);
  ComplexMatrix p = ComplexMatrix::Identity(dim, dim);
  if (j == 0) return p;
  for (std::size_t m = 0; m < d; ++m) {
    const auto a = static_cast<Eigen::Index>(m);
    const auto b = static_cast<Eigen::Index>(j * d + m);
    p(a, a) = 0;
    p(b, b) = 0;
    p(a, b) = 1;
    p(b, a) = 1;
  }
  return p;
}

ComplexMatrix sum_operation(const LinearCombinationSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.target_dim());
  const auto n = static_cast<Eigen::Index>(spec.terms());
  ComplexMatrix out = ComplexMatrix::Zero(n * d, n * d);
  for (Eigen::Index j = 0; j < n; ++j) out.block(j * d, j * d, d, d) = spec.gates()[j];
  return out;
}

QuantumState extend_input(const QuantumState& input, std::size_t terms) {
  const std::size_t k = log2_exact(terms);
  if (terms < 2 || k == 0) throw InvalidInput("term count must be a power of two >= 2");
  const std::size_t d = input.dimension();
  QuantumState path = QuantumState::basis(Dims(k, 2), Indices(k, 0));
  return path.tensor(as_single(input, d));
}

LccRunResult run_lcc(const LinearCombinationSpec& spec, const QuantumState& input) {
  const std::size_t n = spec.terms();
  const std::size_t k = spec.control_qubits();
  const std::size_t d = spec.target_dim();
  const Dims input_dims = input.dims();

  QuantumState joint = build_control_state(spec).tensor(extend_input(as_single(input, d), n));
  const Indices all = range(0, 2 * k + 1);
  const Indices target = range(k, 2 * k + 1);

  const auto swaps = [&](QuantumState s) {
    for (std::size_t j = 1; j < n; ++j) {
      s = apply_to_subsystems(s, controlled_on(j, n, subspace_swap(j, d, n)), all);
    }
    return s;
  };
  joint = swaps(std::move(joint));
  joint = apply_to_subsystems(joint, sum_operation(spec), target);
  joint = swaps(std::move(joint));
  joint = hadamard_all(std::move(joint), k);

  LccRunResult result = postselect_controls(std::move(joint), k);
  if (!result.success) return result;
  // After the swaps are undone only path = 0 carries amplitude.
  const MeasurementOutcome path = measure_postselect(*result.output_state, range(0, k), Indices(k, 0));
  if (!path.remainder) {
    result.success = false;
    result.success_probability = 0.0;
    result.output_state.reset();
    return result;
  }
  result.output_state = with_dims(*path.remainder, input_dims);
  return result;
}

LccRunResult run_lcc_controlled_form(const LinearCombinationSpec& spec,
                                     const QuantumState& input) {
  const std::size_t k = spec.control_qubits();
  const Dims input_dims = input.dims();
  QuantumState joint = build_control_state(spec).tensor(as_single(input, spec.target_dim()));
  // Block-diagonal sum operation on (control, logical) is the multiply-controlled V_j.
  joint = apply_to_subsystems(joint, sum_operation(spec), range(0, k + 1));
  joint = hadamard_all(std::move(joint), k);
  LccRunResult result = postselect_controls(std::move(joint), k);
  if (result.success) result.output_state = with_dims(*result.output_state, input_dims);
  return result;
}

ComplexMatrix effective_operator(const LinearCombinationSpec& spec, CircuitForm form) {
  const std::size_t d = spec.target_dim();
  const double scale = std::sqrt(static_cast<double>(spec.terms()));
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const QuantumState e = QuantumState::basis(Dims{d}, Indices{i});
    const LccRunResult r =
        form == CircuitForm::extended ? run_lcc(spec, e) : run_lcc_controlled_form(spec, e);
    if (!r.success) continue;
    out.col(static_cast<Eigen::Index>(i)) =
        scale * std::sqrt(r.success_probability) * r.output_state->amplitudes();
  }
  return out;
}

LinearCombinationSpec cu_linear_spec(const ComplexMatrix& u) {
  if (u.rows() != u.cols() || u.rows() == 0) throw DimensionMismatch("controlled gate must be square");
  if (!is_unitary(u)) throw InvalidInput("controlled gate must be unitary");
  const auto m = u.rows();
  const double r2 = std::sqrt(2.0);
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2);
  ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  std::vector<ComplexMatrix> gates{r2 * kron(p0, ComplexMatrix::Identity(m, m)), r2 * kron(p1, u)};
  return LinearCombinationSpec({Complex(1 / r2, 0), Complex(1 / r2, 0)}, std::move(gates));
}

}  // namespace rqc::lcc
