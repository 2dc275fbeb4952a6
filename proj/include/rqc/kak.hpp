#pragma once

// Pauli and Cartan (KAK) linear decompositions.
//
// A two-qubit U in SU(4) is written as (U1 (x) V1) U_D (U2 (x) V2) with
// U_D = exp(-i (k1 XX + k2 YY + k3 ZZ)) = a0 II + a1 XX + a2 YY + a3 ZZ, so U
// is a four-term combination of products of single-qubit gates.

#include <array>
#include <utility>

#include "rqc/lcc.hpp"

namespace rqc::kak {

// Pauli matrices with index 0 the identity.
const ComplexMatrix& pauli(std::size_t i);

struct PauliDecomposition {
  // U' = a0 I + a1 X + a2 Y + a3 Z.
  std::array<Complex, 4> alpha{};
  // Product form U' = e^{-i d1 X} e^{-i d2 Y} e^{-i d3 Z}.
  std::array<double, 3> d{};
  // U = e^{i global_phase} U'.
  double global_phase = 0.0;
};

// Throws InvalidInput for a non-unitary input.
PauliDecomposition pauli_decompose(const ComplexMatrix& u);
// Relaxed entry point: any 2x2 operator, alpha_i = Tr(sigma_i M)/2, no phase removed.
std::array<Complex, 4> pauli_expand(const ComplexMatrix& m);
ComplexMatrix pauli_recombine(const std::array<Complex, 4>& alpha);
ComplexMatrix pauli_product_form(const std::array<double, 3>& d);
// Two-term-per-qubit LCC spec (4 terms) for a 2x2 operator.
lcc::LinearCombinationSpec pauli_spec(const ComplexMatrix& m);

// The fixed magic basis.
const ComplexMatrix& magic_basis();

struct SimultaneousSvd {
  RealMatrix l;
  RealMatrix r;
  Eigen::VectorXd dr;
  Eigen::VectorXd di;
};

// L^T ur R = diag(dr), L^T ui R = diag(di), with L, R in SO(4). Throws
// InvalidInput when ur + i ui is not unitary and NumericalFailure when the
// diagonalization residual exceeds 1e-10.
SimultaneousSvd simultaneous_svd(const RealMatrix& ur, const RealMatrix& ui);

struct KakDecomposition {
  ComplexMatrix u1, v1, u2, v2;
  std::array<double, 3> k{};
  std::array<Complex, 4> alpha{};
  // U = e^{i global_phase} (U1 (x) V1) U_D (U2 (x) V2).
  double global_phase = 0.0;
  // Magic-basis intermediates.
  SimultaneousSvd svd;
  // Phase-aligned distance between the reconstruction and the input.
  double residual = 0.0;
};

KakDecomposition kak_decompose(const ComplexMatrix& u);
ComplexMatrix kak_reconstruct(const KakDecomposition& dec);

// exp(-i (k1 XX + k2 YY + k3 ZZ)).
ComplexMatrix interaction_unitary(const std::array<double, 3>& k);
// Closed-form coefficients of interaction_unitary(k) in {II, XX, YY, ZZ}.
std::array<Complex, 4> interaction_alphas(const std::array<double, 3>& k);

// Gates e^{i phase} U1 s_i U2 (x) V1 s_i V2 with coefficients alpha_i.
lcc::LinearCombinationSpec lcu_spec_from_kak(const KakDecomposition& dec);

// Splits K = u (x) v into unitary 2x2 factors with det u = 1. Throws
// InvalidInput if K is not a product within 1e-9.
std::pair<ComplexMatrix, ComplexMatrix> split_local(const ComplexMatrix& k);

struct Su8TwoTerm {
  ComplexMatrix u;
  lcc::LinearCombinationSpec spec;
};

// U = (A4 A3 (x) B4 B3) exp(i b0 XXX) (A2 A1 (x) B2 B1) and its two-term spec.
Su8TwoTerm su8_two_term_combine(const std::array<ComplexMatrix, 4>& a,
                                const std::array<ComplexMatrix, 4>& b, double beta0);

}  // namespace rqc::kak
