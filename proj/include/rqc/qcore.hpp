#pragma once

// Dense complex linear algebra and quantum-state primitives shared by every
// other module. Subsystem 0 is the leftmost (most significant) tensor factor
// and all basis labels are big-endian.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "rqc/errors.hpp"

namespace rqc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using Dims = std::vector<std::size_t>;
using Indices = std::vector<std::size_t>;

// The single random source threaded through every stochastic operation.
using Rng = std::mt19937_64;

namespace tol {
inline constexpr double kStructural = 1e-12;
inline constexpr double kRoundTrip = 1e-9;
inline constexpr double kSigmas = 3.0;
}  // namespace tol

enum class StateKind { statevector, density };

// A statevector or density matrix over a tensor-product register.
class QuantumState {
 public:
  // Validates length against the product of dims and finiteness.
  static QuantumState pure(Dims dims, ComplexVector amplitudes);
  // Validates shape, Hermiticity and positivity (both to 1e-12).
  static QuantumState mixed(Dims dims, ComplexMatrix rho);
  // Computational basis state |labels>.
  static QuantumState basis(Dims dims, std::span<const std::size_t> labels);
  // The empty register: one amplitude equal to 1 and no subsystems.
  static QuantumState trivial();

  StateKind kind() const { return kind_; }
  bool is_pure() const { return kind_ == StateKind::statevector; }
  const Dims& dims() const { return dims_; }
  std::size_t num_subsystems() const { return dims_.size(); }
  std::size_t dimension() const;

  const ComplexVector& amplitudes() const;
  const ComplexMatrix& density_matrix() const;
  ComplexMatrix to_density() const;

  // sqrt(<psi|psi>) for statevectors, trace for density matrices.
  double norm() const;
  bool is_normalized(double tolerance = tol::kStructural) const;
  QuantumState normalized() const;

  // Appends `other` as trailing subsystems.
  QuantumState tensor(const QuantumState& other) const;

  // Trusted construction for results of internal operations; skips the
  // positivity check and symmetrizes density matrices.
  static QuantumState from_trusted(Dims dims, ComplexVector psi);
  static QuantumState from_trusted(Dims dims, ComplexMatrix rho);

 private:
  QuantumState(StateKind kind, Dims dims) : kind_(kind), dims_(std::move(dims)) {}

  StateKind kind_;
  Dims dims_;
  ComplexVector psi_;  // statevector kind
  ComplexMatrix rho_;  // density kind
};

struct MeasurementOutcome {
  Indices targets;
  Indices labels;
  double probability = 0.0;
  // Renormalized state of the unmeasured subsystems (original order kept).
  // Empty when the branch has zero probability.
  std::optional<QuantumState> remainder;
};

std::size_t product(std::span<const std::size_t> dims);

// Big-endian mixed-radix digits of `index`.
Indices digits_of(std::size_t index, std::span<const std::size_t> dims);
std::size_t index_of(std::span<const std::size_t> digits, std::span<const std::size_t> dims);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

bool is_finite(const ComplexMatrix& m);
bool is_unitary(const ComplexMatrix& m, double tolerance = tol::kRoundTrip);
bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kStructural);

// Applies `op` to `targets` (op's first factor acts on targets[0]) and the
// identity elsewhere. Density matrices transform as op rho op^dagger.
QuantumState apply_to_subsystems(const QuantumState& state, const ComplexMatrix& op,
                                 std::span<const std::size_t> targets);

// Projects `targets` onto `outcome` and renormalizes the rest.
MeasurementOutcome measure_postselect(const QuantumState& state,
                                      std::span<const std::size_t> targets,
                                      std::span<const std::size_t> outcome);

// Born probabilities over all joint labels of `targets`, indexed big-endian.
std::vector<double> outcome_distribution(const QuantumState& state,
                                         std::span<const std::size_t> targets);

// Samples one outcome of a projective measurement of `targets`.
MeasurementOutcome measure_sample(const QuantumState& state, std::span<const std::size_t> targets,
                                  Rng& rng);

// |<a|b>|^2, <a|rho|a>, or the Uhlmann fidelity for two density matrices.
double state_fidelity(const QuantumState& a, const QuantumState& b);

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma);

double uniform01(Rng& rng);
// Index drawn with probability proportional to `weights` (nonnegative).
std::size_t sample_index(std::span<const double> weights, Rng& rng);

// Haar-distributed unitary via QR of a complex Ginibre matrix with the
// diagonal phases of R divided out.
ComplexMatrix haar_random_unitary(std::size_t dim, Rng& rng);
ComplexVector random_state_vector(std::size_t dim, Rng& rng);

// min over phi of ||a - e^{i phi} b||_F.
double phase_aligned_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// Reduced density matrix on `keep` (listed in ascending order).
QuantumState partial_trace(const QuantumState& state, std::span<const std::size_t> keep);

// Singular values of the (dims[0] x rest) reshaping of a pure bipartite state.
Eigen::VectorXd schmidt_coefficients(const QuantumState& state, std::size_t split = 1);
std::size_t schmidt_rank(const QuantumState& state, std::size_t split = 1,
                         double tolerance = 1e-10);

// Determinant-based global phase e^{i arg(det U)/dim} (principal branch).
Complex principal_phase(const ComplexMatrix& u);

}  // namespace rqc
