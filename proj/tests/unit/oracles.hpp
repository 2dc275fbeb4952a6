#pragma once

// Independent reference computations used to cross-check the library. They
// favour brute force over speed and share no code paths with src/.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline Mat identity(int n) { return Mat::Identity(n, n); }

inline Mat pauli(int i) {
  Mat m(2, 2);
  switch (i) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, C(0, -1), C(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Full-space operator for a single-qubit gate on qubit q of an n-qubit register.
inline Mat embed_qubit(const Mat& g, int q, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = kron(out, i == q ? g : identity(2));
  return out;
}

// min_phi ||a - e^{i phi} b|| computed by scanning then refining the phase.
inline double phase_distance(const Mat& a, const Mat& b) {
  double best = 1e300;
  double best_phi = 0;
  for (int s = 0; s < 3600; ++s) {
    const double phi = s * 2 * 3.14159265358979323846 / 3600;
    const double d = (a - std::polar(1.0, phi) * b).norm();
    if (d < best) {
      best = d;
      best_phi = phi;
    }
  }
  double lo = best_phi - 0.002, hi = best_phi + 0.002;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if ((a - std::polar(1.0, m1) * b).norm() < (a - std::polar(1.0, m2) * b).norm()) hi = m2;
    else lo = m1;
  }
  return (a - std::polar(1.0, 0.5 * (lo + hi)) * b).norm();
}

inline Vec normalized(const Vec& v) { return v / v.norm(); }

}  // namespace oracle
