#include "rqc/kak.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace rqc::kak {

namespace {

constexpr double kDiagTol = 1e-10;
const Complex kI(0.0, 1.0);

ComplexMatrix kron_pauli(std::size_t i) { return kron(pauli(i), pauli(i)); }

double offdiag_norm(const RealMatrix& m) {
  return (m - RealMatrix(m.diagonal().asDiagonal())).norm();
}

// Rows are the eigenvalues of XX, YY, ZZ in the magic basis.
const RealMatrix& magic_eigenvalues() {
  static const RealMatrix e = [] {
    RealMatrix out(3, 4);
    const ComplexMatrix& m = magic_basis();
    for (std::size_t j = 1; j <= 3; ++j) {
      const ComplexMatrix d = m.adjoint() * kron_pauli(j) * m;
      for (Eigen::Index c = 0; c < 4; ++c) out(static_cast<Eigen::Index>(j - 1), c) = d(c, c).real();
    }
    return out;
  }();
  return e;
}

void require_unitary(const ComplexMatrix& u, Eigen::Index dim, const char* what) {
  if (u.rows() != dim || u.cols() != dim) {
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(dim) + "x" +
                            std::to_string(dim));
  }
  if (!is_finite(u) || !is_unitary(u)) throw InvalidInput(std::string(what) + " is not unitary");
}

}  // namespace

const ComplexMatrix& pauli(std::size_t i) {
  static const std::array<ComplexMatrix, 4> p = [] {
    std::array<ComplexMatrix, 4> out;
    out[0] = ComplexMatrix::Identity(2, 2);
    out[1] = ComplexMatrix::Zero(2, 2);
    out[1] << 0, 1, 1, 0;
    out[2] = ComplexMatrix::Zero(2, 2);
    out[2] << 0, -kI, kI, 0;
    out[3] = ComplexMatrix::Zero(2, 2);
    out[3] << 1, 0, 0, -1;
    return out;
  }();
  if (i > 3) throw InvalidInput("Pauli index out of range");
  return p[i];
}

std::array<Complex, 4> pauli_expand(const ComplexMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw DimensionMismatch("Pauli expansion needs a 2x2 operator");
  std::array<Complex, 4> a;
  for (std::size_t i = 0; i < 4; ++i) a[i] = (pauli(i) * m).trace() / 2.0;
  return a;
}

ComplexMatrix pauli_recombine(const std::array<Complex, 4>& alpha) {
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (std::size_t i = 0; i < 4; ++i) out += alpha[i] * pauli(i);
  return out;
}

ComplexMatrix pauli_product_form(const std::array<double, 3>& d) {
  ComplexMatrix out = ComplexMatrix::Identity(2, 2);
  for (std::size_t j = 0; j < 3; ++j) {
    out *= std::cos(d[j]) * pauli(0) - kI * std::sin(d[j]) * pauli(j + 1);
  }
  return out;
}

PauliDecomposition pauli_decompose(const ComplexMatrix& u) {
  require_unitary(u, 2, "single-qubit gate");
  PauliDecomposition out;
  const Complex phase = principal_phase(u);
  out.global_phase = std::arg(phase);
  const ComplexMatrix su = u / phase;
  out.alpha = pauli_expand(su);

  // Rotation matrix of su; e^{-i d X} maps to a rotation by 2d about x.
  Eigen::Matrix3d rot;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      rot(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          0.5 * (pauli(i + 1) * su * pauli(j + 1) * su.adjoint()).trace().real();
    }
  }
  // rot = Rx(a) Ry(b) Rz(c).
  const double b = std::asin(std::clamp(rot(0, 2), -1.0, 1.0));
  double a = 0.0;
  double c = 0.0;
  if (std::abs(std::cos(b)) > 1e-9) {
    a = std::atan2(-rot(1, 2), rot(2, 2));
    c = std::atan2(-rot(0, 1), rot(0, 0));
  } else {
    a = std::atan2(rot(2, 1), rot(1, 1));
  }
  out.d = {a / 2, b / 2, c / 2};
  // The rotation fixes su only up to sign; shifting d1 by pi flips it.
  if ((pauli_product_form(out.d) - su).norm() > (pauli_product_form(out.d) + su).norm()) {
    out.d[0] += std::numbers::pi;
  }
  return out;
}

lcc::LinearCombinationSpec pauli_spec(const ComplexMatrix& m) {
  const std::array<Complex, 4> a = pauli_expand(m);
  double norm = 0.0;
  for (Complex x : a) norm += std::norm(x);
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw InvalidInput("cannot build a spec for the zero operator");
  std::vector<Complex> coeffs;
  std::vector<ComplexMatrix> gates;
  for (std::size_t i = 0; i < 4; ++i) {
    coeffs.push_back(a[i] / norm);
    gates.push_back(norm * pauli(i));
  }
  return {std::move(coeffs), std::move(gates)};
}

const ComplexMatrix& magic_basis() {
  static const ComplexMatrix m = [] {
    ComplexMatrix out(4, 4);
    out << 1, 0, 0, kI,
           0, kI, 1, 0,
           0, kI, -1, 0,
           1, 0, 0, -kI;
    return ComplexMatrix(out / std::numbers::sqrt2);
  }();
  return m;
}

SimultaneousSvd simultaneous_svd(const RealMatrix& ur, const RealMatrix& ui) {
  if (ur.rows() != 4 || ur.cols() != 4 || ui.rows() != 4 || ui.cols() != 4) {
    throw DimensionMismatch("simultaneous SVD expects 4x4 real parts");
  }
  const RealMatrix sym = ur * ui.transpose();
  if ((sym - sym.transpose()).norm() > tol::kRoundTrip ||
      (ur.transpose() * ur + ui.transpose() * ui - RealMatrix::Identity(4, 4)).norm() >
          tol::kRoundTrip) {
    throw InvalidInput("real and imaginary parts do not form a unitary");
  }
  const ComplexMatrix up = ur.cast<Complex>() + kI * ui.cast<Complex>();
  // U' = L D R^T with D diagonal unitary, so U'^T U' = R D^2 R^T with R real.
  const ComplexMatrix w = up.transpose() * up;
  const RealMatrix wr = 0.5 * (w.real() + w.real().transpose());
  const RealMatrix wi = 0.5 * (w.imag() + w.imag().transpose());

  // A generic real combination separates the eigenspaces of both parts.
  static constexpr std::array<std::pair<double, double>, 5> kWeights{
      {{1.0, 0.6180339887498949}, {0.3090169943749474, 1.0}, {1.0, -1.4142135623730951},
       {-0.7548776662466927, 1.0}, {1.0, 2.718281828459045}}};
  for (const auto& [a, b] : kWeights) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(a * wr + b * wi);
    if (es.info() != Eigen::Success) continue;
    RealMatrix r = es.eigenvectors();
    if (offdiag_norm(r.transpose() * wr * r) > kDiagTol ||
        offdiag_norm(r.transpose() * wi * r) > kDiagTol) {
      continue;
    }
    if (r.determinant() < 0) r.col(0) *= -1.0;
    const ComplexMatrix d2 = r.transpose().cast<Complex>() * w * r.cast<Complex>();
    ComplexVector dvec(4);
    for (Eigen::Index m = 0; m < 4; ++m) {
      Complex s = std::sqrt(d2(m, m));
      dvec(m) = s / std::abs(s);
    }
    const ComplexMatrix lc = up * r.cast<Complex>() * dvec.conjugate().asDiagonal();
    if (lc.imag().norm() > 1e-8) continue;
    RealMatrix l = lc.real();
    if (l.determinant() < 0) {
      l.col(0) *= -1.0;
      dvec(0) = -dvec(0);
    }
    SimultaneousSvd out{l, r, dvec.real(), dvec.imag()};
    if (offdiag_norm(l.transpose() * ur * r) > kDiagTol ||
        offdiag_norm(l.transpose() * ui * r) > kDiagTol ||
        (l.transpose() * ur * r).diagonal().cwiseAbs().maxCoeff() > 1 + kDiagTol ||
        (l.transpose() * ur * r - RealMatrix(out.dr.asDiagonal())).norm() > kDiagTol ||
        (l.transpose() * ui * r - RealMatrix(out.di.asDiagonal())).norm() > kDiagTol) {
      continue;
    }
    return out;
  }
  throw NumericalFailure("simultaneous SVD did not reach a diagonal residual of 1e-10");
}

std::pair<ComplexMatrix, ComplexMatrix> split_local(const ComplexMatrix& k) {
  if (k.rows() != 4 || k.cols() != 4) throw DimensionMismatch("local factor split expects 4x4");
  // Realignment: K[(a c),(b d)] = u(a,b) v(c,d) becomes vec(u) vec(v)^T.
  ComplexMatrix re(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) re(2 * a + b, 2 * c + d) = k(2 * a + c, 2 * b + d);
  Eigen::JacobiSVD<ComplexMatrix> svd(re, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = svd.singularValues()(0);
  ComplexMatrix u(2, 2);
  ComplexMatrix v(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      u(a, b) = svd.matrixU()(2 * a + b, 0) * std::numbers::sqrt2;
      v(a, b) = std::conj(svd.matrixV()(2 * a + b, 0)) * (s / std::numbers::sqrt2);
    }
  }
  const Complex det_phase = std::sqrt(u.determinant());
  u /= det_phase;
  v *= det_phase;
  if (!((kron(u, v) - k).norm() <= tol::kRoundTrip)) {
    throw InvalidInput("operator is not a tensor product of single-qubit gates");
  }
  return {u, v};
}

std::array<Complex, 4> interaction_alphas(const std::array<double, 3>& k) {
  const double c1 = std::cos(k[0]), c2 = std::cos(k[1]), c3 = std::cos(k[2]);
  const double s1 = std::sin(k[0]), s2 = std::sin(k[1]), s3 = std::sin(k[2]);
  return {Complex(c1 * c2 * c3, -s1 * s2 * s3), Complex(c1 * s2 * s3, -s1 * c2 * c3),
          Complex(s1 * c2 * s3, -c1 * s2 * c3), Complex(s1 * s2 * c3, -c1 * c2 * s3)};
}

ComplexMatrix interaction_unitary(const std::array<double, 3>& k) {
  // XX, YY and ZZ commute, so the exponential factors.
  ComplexMatrix out = ComplexMatrix::Identity(4, 4);
  for (std::size_t j = 0; j < 3; ++j) {
    out *= std::cos(k[j]) * ComplexMatrix::Identity(4, 4) - kI * std::sin(k[j]) * kron_pauli(j + 1);
  }
  return out;
}

KakDecomposition kak_decompose(const ComplexMatrix& u) {
  require_unitary(u, 4, "two-qubit gate");
  KakDecomposition dec;
  const Complex phase = principal_phase(u);
  dec.global_phase = std::arg(phase);
  const ComplexMatrix& m = magic_basis();
  const ComplexMatrix up = m.adjoint() * (u / phase) * m;
  dec.svd = simultaneous_svd(up.real(), up.imag());

  Eigen::Vector4d theta;
  for (Eigen::Index j = 0; j < 4; ++j) theta(j) = std::atan2(dec.svd.di(j), dec.svd.dr(j));
  // det D = 1, so the phases sum to a multiple of 2 pi.
  theta(0) -= 2 * std::numbers::pi * std::round(theta.sum() / (2 * std::numbers::pi));
  // theta = -E^T k and E E^T = 4 I.
  const Eigen::Vector3d kv = -0.25 * magic_eigenvalues() * theta;
  dec.k = {kv(0), kv(1), kv(2)};
  dec.alpha = interaction_alphas(dec.k);

  const ComplexMatrix left = m * dec.svd.l.cast<Complex>() * m.adjoint();
  const ComplexMatrix right = m * dec.svd.r.transpose().cast<Complex>() * m.adjoint();
  std::tie(dec.u1, dec.v1) = split_local(left);
  std::tie(dec.u2, dec.v2) = split_local(right);
  dec.residual = (kak_reconstruct(dec) - u).norm();
  if (!(dec.residual <= tol::kRoundTrip)) {
    throw NumericalFailure("KAK reconstruction residual " + std::to_string(dec.residual));
  }
  return dec;
}

ComplexMatrix kak_reconstruct(const KakDecomposition& dec) {
  return std::polar(1.0, dec.global_phase) * kron(dec.u1, dec.v1) * interaction_unitary(dec.k) *
         kron(dec.u2, dec.v2);
}

lcc::LinearCombinationSpec lcu_spec_from_kak(const KakDecomposition& dec) {
  const Complex phase = std::polar(1.0, dec.global_phase);
  std::vector<Complex> coeffs(dec.alpha.begin(), dec.alpha.end());
  std::vector<ComplexMatrix> gates;
  for (std::size_t i = 0; i < 4; ++i) {
    gates.push_back(phase * kron(dec.u1 * pauli(i) * dec.u2, dec.v1 * pauli(i) * dec.v2));
  }
  // The trig identities give unit norm; absorb rounding so the spec validates.
  double norm = 0.0;
  for (Complex a : coeffs) norm += std::norm(a);
  for (Complex& a : coeffs) a /= std::sqrt(norm);
  return {std::move(coeffs), std::move(gates)};
}

Su8TwoTerm su8_two_term_combine(const std::array<ComplexMatrix, 4>& a,
                                const std::array<ComplexMatrix, 4>& b, double beta0) {
  for (const ComplexMatrix& x : a) require_unitary(x, 4, "two-qubit local");
  for (const ComplexMatrix& x : b) require_unitary(x, 2, "single-qubit local");
  const ComplexMatrix& x = pauli(1);
  const ComplexMatrix xx = kron(x, x);
  const ComplexMatrix xxx = kron(xx, x);
  const ComplexMatrix i8 = ComplexMatrix::Identity(8, 8);
  const ComplexMatrix middle = std::cos(beta0) * i8 + kI * std::sin(beta0) * xxx;
  const ComplexMatrix a43 = a[3] * a[2];
  const ComplexMatrix a21 = a[1] * a[0];
  const ComplexMatrix b43 = b[3] * b[2];
  const ComplexMatrix b21 = b[1] * b[0];
  ComplexMatrix u = kron(a43, b43) * middle * kron(a21, b21);
  lcc::LinearCombinationSpec spec({Complex(std::cos(beta0), 0), Complex(0, std::sin(beta0))},
                                  {kron(a43 * a21, b43 * b21), kron(a43 * xx * a21, b43 * x * b21)});
  return {std::move(u), std::move(spec)};
}

}  // namespace rqc::kak
