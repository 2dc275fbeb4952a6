#include "rqc/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rqc {

namespace {

// Probability below which a postselected branch is treated as empty.
constexpr double kZeroBranch = 1e-24;

void check_dims(const Dims& dims) {
  for (std::size_t d : dims) {
    if (d == 0) throw InvalidInput("subsystem dimension must be positive");
  }
}

Indices strides_of(std::span<const std::size_t> dims) {
  Indices strides(dims.size(), 1);
  for (std::size_t s = dims.size(); s-- > 1;) strides[s - 1] = strides[s] * dims[s];
  return strides;
}

void check_targets(std::span<const std::size_t> targets, std::size_t count) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= count) {
      throw DimensionMismatch("subsystem index " + std::to_string(targets[i]) +
                              " out of range for " + std::to_string(count) + " subsystems");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) {
        throw InvalidInput("duplicate subsystem index " + std::to_string(targets[i]));
      }
    }
  }
}

// Offsets of each joint target label, plus the base index of every
// configuration of the remaining subsystems.
struct Layout {
  Indices target_offsets;
  Indices rest_bases;
  Dims rest_dims;
  Indices rest;
};

Layout make_layout(const Dims& dims, std::span<const std::size_t> targets) {
  const Indices strides = strides_of(dims);
  Layout layout;
  Dims target_dims;
  for (std::size_t t : targets) target_dims.push_back(dims[t]);
  const std::size_t op_dim = product(target_dims);
  layout.target_offsets.resize(op_dim);
  for (std::size_t a = 0; a < op_dim; ++a) {
    const Indices dig = digits_of(a, target_dims);
    std::size_t off = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) off += dig[t] * strides[targets[t]];
    layout.target_offsets[a] = off;
  }
  std::vector<bool> is_target(dims.size(), false);
  for (std::size_t t : targets) is_target[t] = true;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (!is_target[s]) {
      layout.rest.push_back(s);
      layout.rest_dims.push_back(dims[s]);
    }
  }
  const std::size_t rest_dim = product(layout.rest_dims);
  layout.rest_bases.resize(rest_dim);
  for (std::size_t r = 0; r < rest_dim; ++r) {
    const Indices dig = digits_of(r, layout.rest_dims);
    std::size_t base = 0;
    for (std::size_t i = 0; i < layout.rest.size(); ++i) base += dig[i] * strides[layout.rest[i]];
    layout.rest_bases[r] = base;
  }
  return layout;
}

// Left-multiplies the row space of `m` by op acting on the layout's targets.
void apply_rows(ComplexMatrix& m, const ComplexMatrix& op, const Layout& layout) {
  const std::size_t op_dim = layout.target_offsets.size();
  const Eigen::Index cols = m.cols();
  ComplexMatrix block(static_cast<Eigen::Index>(op_dim), cols);
  for (std::size_t base : layout.rest_bases) {
    for (std::size_t a = 0; a < op_dim; ++a) {
      block.row(static_cast<Eigen::Index>(a)) =
          m.row(static_cast<Eigen::Index>(base + layout.target_offsets[a]));
    }
    const ComplexMatrix out = op * block;
    for (std::size_t a = 0; a < op_dim; ++a) {
      m.row(static_cast<Eigen::Index>(base + layout.target_offsets[a])) =
          out.row(static_cast<Eigen::Index>(a));
    }
  }
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

// ---------------------------------------------------------------------------
// QuantumState

QuantumState QuantumState::pure(Dims dims, ComplexVector amplitudes) {
  check_dims(dims);
  if (static_cast<std::size_t>(amplitudes.size()) != product(dims)) {
    throw DimensionMismatch("statevector length " + std::to_string(amplitudes.size()) +
                            " does not match register dimension " +
                            std::to_string(product(dims)));
  }
  if (!is_finite(amplitudes)) throw InvalidInput("statevector has non-finite entries");
  QuantumState s(StateKind::statevector, std::move(dims));
  s.psi_ = std::move(amplitudes);
  return s;
}

QuantumState QuantumState::mixed(Dims dims, ComplexMatrix rho) {
  check_dims(dims);
  const auto n = static_cast<Eigen::Index>(product(dims));
  if (rho.rows() != n || rho.cols() != n) {
    throw DimensionMismatch("density matrix shape does not match register dimension");
  }
  if (!is_finite(rho)) throw InvalidInput("density matrix has non-finite entries");
  if (!is_hermitian(rho)) throw InvalidInput("density matrix is not Hermitian");
  if (hermitian_eigenvalues(rho).minCoeff() < -tol::kStructural) {
    throw InvalidInput("density matrix has a negative eigenvalue");
  }
  QuantumState s(StateKind::density, std::move(dims));
  s.rho_ = hermitian_part(rho);
  return s;
}

QuantumState QuantumState::basis(Dims dims, std::span<const std::size_t> labels) {
  check_dims(dims);
  if (labels.size() != dims.size()) {
    throw DimensionMismatch("basis label count does not match subsystem count");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= dims[i]) throw InvalidInput("basis label out of range");
  }
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(product(dims)));
  v(static_cast<Eigen::Index>(index_of(labels, dims))) = 1.0;
  QuantumState s(StateKind::statevector, std::move(dims));
  s.psi_ = std::move(v);
  return s;
}

QuantumState QuantumState::trivial() {
  QuantumState s(StateKind::statevector, {});
  s.psi_ = ComplexVector::Ones(1);
  return s;
}

QuantumState QuantumState::from_trusted(Dims dims, ComplexVector psi) {
  QuantumState s(StateKind::statevector, std::move(dims));
  s.psi_ = std::move(psi);
  return s;
}

QuantumState QuantumState::from_trusted(Dims dims, ComplexMatrix rho) {
  QuantumState s(StateKind::density, std::move(dims));
  s.rho_ = hermitian_part(rho);
  return s;
}

std::size_t QuantumState::dimension() const { return product(dims_); }

const ComplexVector& QuantumState::amplitudes() const {
  if (kind_ != StateKind::statevector) throw InvalidInput("state is a density matrix");
  return psi_;
}

const ComplexMatrix& QuantumState::density_matrix() const {
  if (kind_ != StateKind::density) throw InvalidInput("state is a statevector");
  return rho_;
}

ComplexMatrix QuantumState::to_density() const {
  if (kind_ == StateKind::density) return rho_;
  return psi_ * psi_.adjoint();
}

double QuantumState::norm() const {
  if (kind_ == StateKind::statevector) return psi_.norm();
  return rho_.trace().real();
}

bool QuantumState::is_normalized(double tolerance) const {
  return std::abs(norm() - 1.0) <= tolerance;
}

QuantumState QuantumState::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw InvalidInput("cannot normalize a zero state");
  if (kind_ == StateKind::statevector) return from_trusted(dims_, ComplexVector(psi_ / n));
  return from_trusted(dims_, ComplexMatrix(rho_ / n));
}

QuantumState QuantumState::tensor(const QuantumState& other) const {
  Dims dims = dims_;
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  if (is_pure() && other.is_pure()) {
    const ComplexMatrix k = kron(psi_, other.psi_);
    return from_trusted(std::move(dims), ComplexVector(k.col(0)));
  }
  return from_trusted(std::move(dims), kron(to_density(), other.to_density()));
}

// ---------------------------------------------------------------------------
// Index helpers and matrix utilities

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Indices digits_of(std::size_t index, std::span<const std::size_t> dims) {
  Indices out(dims.size(), 0);
  for (std::size_t s = dims.size(); s-- > 0;) {
    out[s] = index % dims[s];
    index /= dims[s];
  }
  return out;
}

std::size_t index_of(std::span<const std::size_t> digits, std::span<const std::size_t> dims) {
  std::size_t idx = 0;
  for (std::size_t s = 0; s < dims.size(); ++s) idx = idx * dims[s] + digits[s];
  return idx;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

bool is_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

bool is_unitary(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const ComplexMatrix id = ComplexMatrix::Identity(m.rows(), m.cols());
  return (m.adjoint() * m - id).norm() <= tolerance;
}

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

// ---------------------------------------------------------------------------
// Gate application and measurement

QuantumState apply_to_subsystems(const QuantumState& state, const ComplexMatrix& op,
                                 std::span<const std::size_t> targets) {
  check_targets(targets, state.num_subsystems());
  std::size_t op_dim = 1;
  for (std::size_t t : targets) op_dim *= state.dims()[t];
  if (op.rows() != static_cast<Eigen::Index>(op_dim) || op.cols() != op.rows()) {
    throw DimensionMismatch("operator of size " + std::to_string(op.rows()) + "x" +
                            std::to_string(op.cols()) + " does not match target dimension " +
                            std::to_string(op_dim));
  }
  const Layout layout = make_layout(state.dims(), targets);
  if (state.is_pure()) {
    ComplexMatrix col = state.amplitudes();
    apply_rows(col, op, layout);
    return QuantumState::from_trusted(state.dims(), ComplexVector(col.col(0)));
  }
  ComplexMatrix m = state.density_matrix();
  apply_rows(m, op, layout);
  ComplexMatrix mt = m.adjoint();
  apply_rows(mt, op, layout);
  return QuantumState::from_trusted(state.dims(), ComplexMatrix(mt.adjoint()));
}

MeasurementOutcome measure_postselect(const QuantumState& state,
                                      std::span<const std::size_t> targets,
                                      std::span<const std::size_t> outcome) {
  check_targets(targets, state.num_subsystems());
  if (outcome.size() != targets.size()) {
    throw InvalidInput("outcome label count does not match target count");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (outcome[i] >= state.dims()[targets[i]]) {
      throw InvalidInput("outcome label " + std::to_string(outcome[i]) +
                         " invalid for subsystem of dimension " +
                         std::to_string(state.dims()[targets[i]]));
    }
  }
  const Layout layout = make_layout(state.dims(), targets);
  Dims target_dims;
  for (std::size_t t : targets) target_dims.push_back(state.dims()[t]);
  const std::size_t offset = layout.target_offsets[index_of(outcome, target_dims)];
  const auto rest_dim = static_cast<Eigen::Index>(layout.rest_bases.size());

  MeasurementOutcome result;
  result.targets.assign(targets.begin(), targets.end());
  result.labels.assign(outcome.begin(), outcome.end());

  const double total = state.is_pure() ? state.amplitudes().squaredNorm()
                                       : state.density_matrix().trace().real();
  if (!(total > 0.0)) throw InvalidInput("cannot measure a zero state");

  if (state.is_pure()) {
    ComplexVector branch(rest_dim);
    for (Eigen::Index r = 0; r < rest_dim; ++r) {
      branch(r) = state.amplitudes()(static_cast<Eigen::Index>(layout.rest_bases[r] + offset));
    }
    const double weight = branch.squaredNorm();
    result.probability = weight / total;
    if (result.probability > kZeroBranch) {
      result.remainder = QuantumState::from_trusted(layout.rest_dims,
                                                    ComplexVector(branch / std::sqrt(weight)));
    }
    return result;
  }
  ComplexMatrix block(rest_dim, rest_dim);
  const ComplexMatrix& rho = state.density_matrix();
  for (Eigen::Index r = 0; r < rest_dim; ++r) {
    for (Eigen::Index c = 0; c < rest_dim; ++c) {
      block(r, c) = rho(static_cast<Eigen::Index>(layout.rest_bases[r] + offset),
                        static_cast<Eigen::Index>(layout.rest_bases[c] + offset));
    }
  }
  const double weight = block.trace().real();
  result.probability = std::max(0.0, weight / total);
  if (result.probability > kZeroBranch) {
    result.remainder = QuantumState::from_trusted(layout.rest_dims, ComplexMatrix(block / weight));
  }
  return result;
}

std::vector<double> outcome_distribution(const QuantumState& state,
                                         std::span<const std::size_t> targets) {
  check_targets(targets, state.num_subsystems());
  const Layout layout = make_layout(state.dims(), targets);
  std::vector<double> probs(layout.target_offsets.size(), 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    for (std::size_t base : layout.rest_bases) {
      const auto idx = static_cast<Eigen::Index>(base + layout.target_offsets[a]);
      probs[a] += state.is_pure() ? std::norm(state.amplitudes()(idx))
                                  : state.density_matrix()(idx, idx).real();
    }
    probs[a] = std::max(0.0, probs[a]);
    total += probs[a];
  }
  if (!(total > 0.0)) throw InvalidInput("cannot measure a zero state");
  for (double& p : probs) p /= total;
  return probs;
}

MeasurementOutcome measure_sample(const QuantumState& state, std::span<const std::size_t> targets,
                                  Rng& rng) {
  const std::vector<double> probs = outcome_distribution(state, targets);
  const std::size_t pick = sample_index(probs, rng);
  Dims target_dims;
  for (std::size_t t : targets) target_dims.push_back(state.dims()[t]);
  const Indices labels = digits_of(pick, target_dims);
  return measure_postselect(state, targets, labels);
}

// ---------------------------------------------------------------------------
// Metrics

double state_fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dims() != b.dims()) throw DimensionMismatch("fidelity of states with different dims");
  double f = 0.0;
  if (a.is_pure() && b.is_pure()) {
    f = std::norm(a.amplitudes().dot(b.amplitudes()));
  } else if (a.is_pure()) {
    f = (a.amplitudes().adjoint() * b.density_matrix() * a.amplitudes())(0, 0).real();
  } else if (b.is_pure()) {
    f = (b.amplitudes().adjoint() * a.density_matrix() * b.amplitudes())(0, 0).real();
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.density_matrix());
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const ComplexMatrix sqrt_a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::VectorXd inner =
        hermitian_eigenvalues(sqrt_a * b.density_matrix() * sqrt_a).cwiseMax(0.0);
    const double s = inner.cwiseSqrt().sum();
    f = s * s;
  }
  return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw DimensionMismatch("trace distance of mismatched matrices");
  }
  return 0.5 * hermitian_eigenvalues(rho - sigma).cwiseAbs().sum();
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits; fully specified by the engine.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += std::max(0.0, w);
  if (!(total > 0.0)) throw InvalidInput("cannot sample from all-zero weights");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

namespace {
double standard_normal(Rng& rng) {
  // Box-Muller; u1 is kept away from zero.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}
}  // namespace

ComplexMatrix haar_random_unitary(std::size_t dim, Rng& rng) {
  if (dim == 0) throw InvalidInput("unitary dimension must be at least 1");
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i, j) = Complex(standard_normal(rng), standard_normal(rng)) / std::sqrt(2.0);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    const Complex phase = mag > 0.0 ? r(j, j) / mag : Complex(1.0);
    q.col(j) *= phase;
  }
  return q;
}

ComplexVector random_state_vector(std::size_t dim, Rng& rng) {
  if (dim == 0) throw InvalidInput("state dimension must be at least 1");
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = Complex(standard_normal(rng), standard_normal(rng));
  }
  return v / v.norm();
}

double phase_aligned_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("phase-aligned distance of mismatched shapes");
  }
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).norm();
}

QuantumState partial_trace(const QuantumState& state, std::span<const std::size_t> keep) {
  check_targets(keep, state.num_subsystems());
  if (!std::is_sorted(keep.begin(), keep.end())) {
    throw InvalidInput("partial_trace expects kept subsystems in ascending order");
  }
  // Treat the kept subsystems as "targets": offsets enumerate kept labels and
  // bases enumerate the traced-out configurations.
  const Layout layout = make_layout(state.dims(), keep);
  const auto keep_dim = static_cast<Eigen::Index>(layout.target_offsets.size());
  const auto rest_dim = static_cast<Eigen::Index>(layout.rest_bases.size());
  Dims keep_dims;
  for (std::size_t k : keep) keep_dims.push_back(state.dims()[k]);

  ComplexMatrix out = ComplexMatrix::Zero(keep_dim, keep_dim);
  if (state.is_pure()) {
    ComplexMatrix psi(keep_dim, rest_dim);
    for (Eigen::Index i = 0; i < keep_dim; ++i) {
      for (Eigen::Index r = 0; r < rest_dim; ++r) {
        psi(i, r) = state.amplitudes()(
            static_cast<Eigen::Index>(layout.target_offsets[i] + layout.rest_bases[r]));
      }
    }
    out = psi * psi.adjoint();
  } else {
    const ComplexMatrix& rho = state.density_matrix();
    for (Eigen::Index i = 0; i < keep_dim; ++i) {
      for (Eigen::Index j = 0; j < keep_dim; ++j) {
        Complex acc = 0.0;
        for (Eigen::Index r = 0; r < rest_dim; ++r) {
          acc += rho(static_cast<Eigen::Index>(layout.target_offsets[i] + layout.rest_bases[r]),
                     static_cast<Eigen::Index>(layout.target_offsets[j] + layout.rest_bases[r]));
        }
        out(i, j) = acc;
      }
    }
  }
  return QuantumState::from_trusted(std::move(keep_dims), out);
}

Eigen::VectorXd schmidt_coefficients(const QuantumState& state, std::size_t split) {
  if (!state.is_pure()) throw InvalidInput("Schmidt decomposition needs a pure state");
  if (split == 0 || split >= state.num_subsystems()) {
    throw InvalidInput("Schmidt split must separate two nonempty parts");
  }
  const std::size_t left = product(std::span(state.dims()).first(split));
  const std::size_t right = state.dimension() / left;
  ComplexMatrix m(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(right));
  for (std::size_t i = 0; i < left; ++i) {
    for (std::size_t j = 0; j < right; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          state.amplitudes()(static_cast<Eigen::Index>(i * right + j));
    }
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

std::size_t schmidt_rank(const QuantumState& state, std::size_t split, double tolerance) {
  const Eigen::VectorXd sv = schmidt_coefficients(state, split);
  return static_cast<std::size_t>((sv.array() > tolerance).count());
}

Complex principal_phase(const ComplexMatrix& u) {
  if (u.rows() != u.cols() || u.rows() == 0) throw DimensionMismatch("phase of non-square matrix");
  const Complex det = u.determinant();
  if (!(std::abs(det) > 0.0)) throw InvalidInput("singular matrix has no determinant phase");
  return std::polar(1.0, std::arg(det) / static_cast<double>(u.rows()));
}

}  // namespace rqc
