#pragma once

// Single-qubit process tomography: chi matrices in the Pauli basis
// {I, X, Y, Z}, simulated count data from four preparations and three Pauli
// measurement bases, and a maximum-likelihood reconstruction.

#include <array>
#include <string>
#include <vector>

#include "rqc/qcore.hpp"

namespace rqc::tomography {

// E(rho) = sum_mn chi_mn s_m rho s_n^dagger.
struct ChiMatrix {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  bool normalized = true;
};

inline constexpr std::size_t kPreps = 4;
inline constexpr std::size_t kBases = 3;
inline constexpr std::array<const char*, kPreps> kPrepLabels{"0", "1", "+", "+i"};
inline constexpr std::array<const char*, kBases> kBasisLabels{"X", "Y", "Z"};

// Preparation density matrix for |0>, |1>, |+>, |+i>.
ComplexMatrix preparation(std::size_t prep);
// Projector for outcome 0 (+1 eigenvalue) or 1 of Pauli basis X, Y or Z.
ComplexMatrix measurement_projector(std::size_t basis, std::size_t outcome);

struct TomographyDataset {
  std::size_t shots = 0;
  // Expected counts (non-integer) instead of sampled ones.
  bool analytic = false;
  // Indexed [prep][basis][outcome]; per-setting sums may fall short of
  // `shots` when the process is postselected.
  std::array<double, kPreps * kBases * 2> counts{};

  double& count(std::size_t prep, std::size_t basis, std::size_t outcome) {
    return counts[(prep * kBases + basis) * 2 + outcome];
  }
  double count(std::size_t prep, std::size_t basis, std::size_t outcome) const {
    return counts[(prep * kBases + basis) * 2 + outcome];
  }
};

struct Noise {
  // rho -> (1 - p) rho + p Tr(rho) I/2 after the operation.
  double depolarizing = 0.0;
};

// chi_mn = c_m c_n^* for op = sum_m c_m s_m, divided by sum |c_m|^2 when
// normalize is set. Throws InvalidInput for the zero operator.
ChiMatrix ideal_chi(const ComplexMatrix& op, bool normalize = true);

// Applies the map described by chi.
ComplexMatrix apply_chi(const ChiMatrix& chi, const ComplexMatrix& rho);

// Per-setting outcome probabilities of op rescaled by its largest singular
// value (a postselected, trace-non-increasing map), then depolarized.
std::array<double, kPreps * kBases * 2> outcome_probabilities(const ComplexMatrix& op, const Noise& noise);

// Infinite-shot limit: counts = shots * probability with a nominal shot count.
TomographyDataset analytic_dataset(const ComplexMatrix& op, const Noise& noise, double nominal_shots = 1e10);

// Multinomial counts (outcome 0, outcome 1, lost) per setting.
TomographyDataset simulate_dataset(const ComplexMatrix& op, std::size_t shots, const Noise& noise, Rng& rng);

// Cholesky parametrization: 16 reals. Entries 0..3 are the real diagonal of
// T; then (re, im) of T(a, b) for a > b in row-major order. chi = T^dag T / Tr.
inline constexpr std::size_t kMleParameters = 16;
using MleParameters = Eigen::Matrix<double, 16, 1>;

ComplexMatrix cholesky_factor(const MleParameters& p);
ChiMatrix chi_from_parameters(const MleParameters& p);

// Mean log-likelihood per count, with probabilities normalized jointly over
// all settings: (1/N) sum_i n_i log(q_i / sum_j q_j). -inf when a counted
// outcome has zero predicted probability.
double mle_objective(const TomographyDataset& data, const MleParameters& p);
MleParameters mle_gradient(const TomographyDataset& data, const MleParameters& p);

struct MleOptions {
  std::size_t max_iterations = 10000;
  double gradient_tolerance = 1e-8;
};

struct MleResult {
  ChiMatrix chi;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double log_likelihood = 0.0;
  // Objective after each accepted step, starting with the initial point.
  std::vector<double> objective_history;
};

// Throws InvalidInput when some basis has no counts at all.
MleResult reconstruct_mle(const TomographyDataset& data, const MleOptions& options = {});

// Re Tr(a b) clamped to [0, 1]. Throws InvalidInput unless both have trace 1.
double process_fidelity(const ChiMatrix& a, const ChiMatrix& b);

struct BootstrapResult {
  double mean = 0.0;
  double std = 0.0;
  std::size_t resamples = 0;
};

// Poisson-resamples every count, reconstructs, and reports fidelity against
// `reference`. Resample i draws from its own stream seeded from `rng`.
// Throws InvalidInput for fewer than two resamples.
BootstrapResult bootstrap_error(const TomographyDataset& data, const ChiMatrix& reference,
                                std::size_t resamples, Rng& rng);

// Rows "prep basis outcome count" after a "shots N" header line.
std::string dataset_to_text(const TomographyDataset& data);
// Throws ParseError.
TomographyDataset parse_dataset(const std::string& text);

}  // namespace rqc::tomography
