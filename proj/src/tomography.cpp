#include "rqc/tomography.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SVD>

namespace rqc::tomography {

namespace {

constexpr std::size_t kSettings = kPreps * kBases * 2;

const std::array<ComplexMatrix, 4>& paulis() {
  static const std::array<ComplexMatrix, 4> p = [] {
    std::array<ComplexMatrix, 4> out;
    for (auto& m : out) m = ComplexMatrix::Zero(2, 2);
    out[0] << 1, 0, 0, 1;
    out[1] << 0, 1, 1, 0;
    out[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    out[3] << 1, 0, 0, -1;
    return out;
  }();
  return p;
}

// B_i(n, m) = Tr(P_i s_m rho_i s_n), so that q_i = Tr(chi B_i).
const std::array<ComplexMatrix, kSettings>& likelihood_operators() {
  static const std::array<ComplexMatrix, kSettings> ops = [] {
    std::array<ComplexMatrix, kSettings> out;
    const auto& s = paulis();
    for (std::size_t p = 0; p < kPreps; ++p) {
      const ComplexMatrix rho = preparation(p);
      for (std::size_t b = 0; b < kBases; ++b) {
        for (std::size_t o = 0; o < 2; ++o) {
          const ComplexMatrix proj = measurement_projector(b, o);
          ComplexMatrix m(4, 4);
          for (int n = 0; n < 4; ++n) {
            for (int k = 0; k < 4; ++k) m(n, k) = (proj * s[k] * rho * s[n]).trace();
          }
          out[(p * kBases + b) * 2 + o] = m;
        }
      }
    }
    return out;
  }();
  return ops;
}

double total_counts(const TomographyDataset& data) {
  double n = 0;
  for (double c : data.counts) n += c;
  return n;
}

// Objective and Euclidean gradient with respect to G = T^dag T (unnormalized).
struct Evaluation {
  double value = -std::numeric_limits<double>::infinity();
  ComplexMatrix k;  // df = Re Tr(K dG)
};

Evaluation evaluate(const TomographyDataset& data, const ComplexMatrix& g) {
  const auto& ops = likelihood_operators();
  const double n = total_counts(data);
  Evaluation e;
  std::array<double, kSettings> q{};
  double total = 0;
  for (std::size_t i = 0; i < kSettings; ++i) {
    q[i] = (g * ops[i]).trace().real();
    total += q[i];
  }
  if (!(total > 0)) return e;
  double value = 0;
  ComplexMatrix k = ComplexMatrix::Zero(4, 4);
  ComplexMatrix sum_ops = ComplexMatrix::Zero(4, 4);
  for (std::size_t i = 0; i < kSettings; ++i) {
    sum_ops += ops[i];
    const double c = data.counts[i];
    if (c == 0) continue;
    if (!(q[i] > 0)) return e;
    value += c * std::log(q[i] / total);
    k += (c / q[i]) * ops[i];
  }
  k -= (n / total) * sum_ops;
  e.value = value / n;
  e.k = k / n;
  return e;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ComplexMatrix preparation(std::size_t prep) {
  ComplexVector v(2);
  const double h = 1 / std::sqrt(2.0);
  switch (prep) {
    case 0: v << 1, 0; break;
    case 1: v << 0, 1; break;
    case 2: v << h, h; break;
    case 3: v << h, Complex(0, h); break;
    default: throw InvalidInput("preparation index out of range");
  }
  return v * v.adjoint();
}

ComplexMatrix measurement_projector(std::size_t basis, std::size_t outcome) {
  if (basis >= kBases || outcome > 1) throw InvalidInput("measurement setting out of range");
  const double sign = outcome == 0 ? 1.0 : -1.0;
  return (paulis()[0] + sign * paulis()[basis + 1]) / 2.0;
}

ChiMatrix ideal_chi(const ComplexMatrix& op, bool normalize) {
  if (op.rows() != 2 || op.cols() != 2) throw DimensionMismatch("process tomography needs a 2x2 operator");
  ComplexVector c(4);
  for (int m = 0; m < 4; ++m) c(m) = (paulis()[m] * op).trace() / 2.0;
  const double norm2 = c.squaredNorm();
  if (!(norm2 > 1e-24)) throw InvalidInput("zero operator has no chi matrix");
  ChiMatrix chi;
  chi.m = c * c.adjoint();
  if (normalize) chi.m /= norm2;
  chi.normalized = normalize;
  return chi;
}

ComplexMatrix apply_chi(const ChiMatrix& chi, const ComplexMatrix& rho) {
  const auto& s = paulis();
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) out += chi.m(m, n) * s[m] * rho * s[n];
  }
  return out;
}

std::array<double, kSettings> outcome_probabilities(const ComplexMatrix& op, const Noise& noise) {
  if (op.rows() != 2 || op.cols() != 2) throw DimensionMismatch("process tomography needs a 2x2 operator");
  if (!(noise.depolarizing >= 0 && noise.depolarizing <= 1)) {
    throw InvalidInput("depolarizing probability must lie in [0, 1]");
  }
  const double smax = Eigen::JacobiSVD<ComplexMatrix>(op).singularValues()(0);
  if (!(smax > 1e-12)) throw InvalidInput("zero operator cannot be simulated");
  const ComplexMatrix m = op / smax;
  std::array<double, kSettings> out{};
  for (std::size_t p = 0; p < kPreps; ++p) {
    ComplexMatrix rho = m * preparation(p) * m.adjoint();
    const Complex tr = rho.trace();
    rho = (1 - noise.depolarizing) * rho + noise.depolarizing * tr * paulis()[0] / 2.0;
    for (std::size_t b = 0; b < kBases; ++b) {
      for (std::size_t o = 0; o < 2; ++o) {
        out[(p * kBases + b) * 2 + o] = std::max(0.0, (measurement_projector(b, o) * rho).trace().real());
      }
    }
  }
  return out;
}

TomographyDataset analytic_dataset(const ComplexMatrix& op, const Noise& noise, double nominal_shots) {
  const auto probs = outcome_probabilities(op, noise);
  TomographyDataset data;
  data.analytic = true;
  data.shots = static_cast<std::size_t>(nominal_shots);
  for (std::size_t i = 0; i < kSettings; ++i) data.counts[i] = probs[i] * nominal_shots;
  return data;
}

TomographyDataset simulate_dataset(const ComplexMatrix& op, std::size_t shots, const Noise& noise, Rng& rng) {
  if (shots == 0) throw InvalidInput("shots must be at least 1");
  const auto probs = outcome_probabilities(op, noise);
  TomographyDataset data;
  data.shots = shots;
  for (std::size_t s = 0; s < kPreps * kBases; ++s) {
    const double p0 = std::min(1.0, probs[2 * s]);
    const double p1 = probs[2 * s + 1];
    const auto n = static_cast<long long>(shots);
    const long long n0 = std::binomial_distribution<long long>(n, p0)(rng);
    const double rest = 1 - p0;
    const double p1c = rest > 0 ? std::clamp(p1 / rest, 0.0, 1.0) : 0.0;
    const long long n1 = std::binomial_distribution<long long>(n - n0, p1c)(rng);
    data.counts[2 * s] = static_cast<double>(n0);
    data.counts[2 * s + 1] = static_cast<double>(n1);
  }
  return data;
}

ComplexMatrix cholesky_factor(const MleParameters& p) {
  ComplexMatrix t = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) t(i, i) = p(i);
  int idx = 4;
  for (int a = 1; a < 4; ++a) {
    for (int b = 0; b < a; ++b) {
      t(a, b) = Complex(p(idx), p(idx + 1));
      idx += 2;
    }
  }
  return t;
}

ChiMatrix chi_from_parameters(const MleParameters& p) {
  const ComplexMatrix t = cholesky_factor(p);
  ComplexMatrix g = t.adjoint() * t;
  const double tr = g.trace().real();
  if (!(tr > 0)) throw InvalidInput("zero Cholesky factor");
  ChiMatrix chi;
  chi.m = g / tr;
  chi.m = (chi.m + chi.m.adjoint()).eval() / 2.0;
  return chi;
}

double mle_objective(const TomographyDataset& data, const MleParameters& p) {
  const ComplexMatrix t = cholesky_factor(p);
  return evaluate(data, t.adjoint() * t).value;
}

MleParameters mle_gradient(const TomographyDataset& data, const MleParameters& p) {
  const ComplexMatrix t = cholesky_factor(p);
  const Evaluation e = evaluate(data, t.adjoint() * t);
  MleParameters grad = MleParameters::Zero();
  if (!std::isfinite(e.value)) return grad;
  // df = 2 Re Tr(K T^dag dT), so d/dRe T(a,b) = 2 Re Z(a,b), d/dIm T(a,b) = -2 Im Z(a,b)
  // with Z = (K T^dag)^T.
  const ComplexMatrix z = (e.k * t.adjoint()).transpose();
  for (int i = 0; i < 4; ++i) grad(i) = 2 * z(i, i).real();
  int idx = 4;
  for (int a = 1; a < 4; ++a) {
    for (int b = 0; b < a; ++b) {
      grad(idx) = 2 * z(a, b).real();
      grad(idx + 1) = -2 * z(a, b).imag();
      idx += 2;
    }
  }
  return grad;
}

MleResult reconstruct_mle(const TomographyDataset& data, const MleOptions& options) {
  for (double c : data.counts) {
    if (!(c >= 0) || !std::isfinite(c)) throw InvalidInput("counts must be finite and nonnegative");
  }
  for (std::size_t b = 0; b < kBases; ++b) {
    double sum = 0;
    for (std::size_t p = 0; p < kPreps; ++p) sum += data.count(p, b, 0) + data.count(p, b, 1);
    if (!(sum > 0)) throw InvalidInput(std::string("no counts in measurement basis ") + kBasisLabels[b]);
  }

  // Start from the completely depolarizing map, chi = I/4.
  MleParameters x = MleParameters::Zero();
  x.head<4>().setConstant(0.5);
  double f = mle_objective(data, x);
  MleParameters g = mle_gradient(data, x);
  MleResult result;
  result.objective_history.push_back(f);
  double step = 1.0;
  MleParameters prev_x = x, prev_g = g;
  bool have_prev = false;

  while (result.iterations < options.max_iterations) {
    const double gnorm = g.norm();
    result.gradient_norm = gnorm;
    if (gnorm < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (have_prev) {
      // Barzilai-Borwein trial step for an ascent problem.
      const MleParameters s = x - prev_x;
      const MleParameters y = g - prev_g;
      const double sy = s.dot(y);
      step = sy < 0 ? -s.squaredNorm() / sy : step * 2;
      step = std::clamp(step, 1e-12, 1e6);
    }
    // Armijo backtracking: accept only a sufficient increase.
    bool accepted = false;
    MleParameters candidate;
    double fc = f;
    for (int tries = 0; tries < 60; ++tries) {
      candidate = x + step * g;
      fc = mle_objective(data, candidate);
      if (std::isfinite(fc) && fc >= f + 1e-4 * step * gnorm * gnorm) {
        accepted = true;
        break;
      }
      step /= 2;
    }
    ++result.iterations;
    if (!accepted) {
      // No representable ascent step remains; the iterate is stationary to rounding.
      result.converged = gnorm < std::sqrt(options.gradient_tolerance);
      break;
    }
    // The objective is scale invariant; keep ||T||_F = 1 for conditioning.
    const double scale = cholesky_factor(candidate).norm();
    prev_x = x / scale;
    prev_g = g * scale;
    x = candidate / scale;
    f = fc;
    g = mle_gradient(data, x);
    have_prev = true;
    result.objective_history.push_back(f);
  }
  if (!result.converged) result.gradient_norm = g.norm();
  result.chi = chi_from_parameters(x);
  result.log_likelihood = f;
  return result;
}

double process_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
  const auto check = [](const ChiMatrix& c) {
    if (c.m.rows() != 4 || c.m.cols() != 4) throw DimensionMismatch("chi matrices are 4x4");
    if (std::abs(c.m.trace() - Complex(1, 0)) > 1e-9) throw InvalidInput("chi matrix is not trace-normalized");
  };
  check(a);
  check(b);
  return std::clamp((a.m * b.m).trace().real(), 0.0, 1.0);
}

BootstrapResult bootstrap_error(const TomographyDataset& data, const ChiMatrix& reference,
                                std::size_t resamples, Rng& rng) {
  if (resamples < 2) throw InvalidInput("bootstrap needs at least two resamples");
  std::vector<std::uint64_t> seeds(resamples);
  for (auto& s : seeds) s = rng();
  std::vector<double> fid(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    Rng stream(seeds[r]);
    TomographyDataset d = data;
    d.analytic = false;
    for (double& c : d.counts) {
      c = c > 0 ? static_cast<double>(std::poisson_distribution<long long>(c)(stream)) : 0.0;
    }
    fid[r] = process_fidelity(reconstruct_mle(d).chi, reference);
  }
  BootstrapResult out;
  out.resamples = resamples;
  for (double f : fid) out.mean += f;
  out.mean /= static_cast<double>(resamples);
  double var = 0;
  for (double f : fid) var += (f - out.mean) * (f - out.mean);
  out.std = std::sqrt(var / static_cast<double>(resamples - 1));
  return out;
}

std::string dataset_to_text(const TomographyDataset& data) {
  std::string out = "shots " + std::to_string(data.shots) + (data.analytic ? " analytic\n" : "\n");
  for (std::size_t p = 0; p < kPreps; ++p) {
    for (std::size_t b = 0; b < kBases; ++b) {
      for (std::size_t o = 0; o < 2; ++o) {
        out += std::string(kPrepLabels[p]) + " " + kBasisLabels[b] + " " + std::to_string(o) + " " +
               format_double(data.count(p, b, o)) + "\n";
      }
    }
  }
  return out;
}

TomographyDataset parse_dataset(const std::string& text) {
  TomographyDataset data;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::array<bool, kSettings> seen{};
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw ParseError("dataset line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::vector<std::string> tok;
    for (std::string t; row >> t;) tok.push_back(t);
    if (!have_header) {
      if (tok.size() < 2 || tok.size() > 3 || tok[0] != "shots") fail("expected 'shots N'");
      try {
        std::size_t used = 0;
        data.shots = std::stoull(tok[1], &used);
        if (used != tok[1].size()) fail("bad shot count");
      } catch (const std::logic_error&) {
        fail("bad shot count");
      }
      if (tok.size() == 3) {
        if (tok[2] != "analytic") fail("unknown header flag '" + tok[2] + "'");
        data.analytic = true;
      }
      have_header = true;
      continue;
    }
    if (tok.size() != 4) fail("expected 'prep basis outcome count'");
    std::size_t p = kPreps, b = kBases;
    for (std::size_t i = 0; i < kPreps; ++i) {
      if (tok[0] == kPrepLabels[i]) p = i;
    }
    for (std::size_t i = 0; i < kBases; ++i) {
      if (tok[1] == kBasisLabels[i]) b = i;
    }
    if (p == kPreps) fail("unknown preparation '" + tok[0] + "'");
    if (b == kBases) fail("unknown basis '" + tok[1] + "'");
    if (tok[2] != "0" && tok[2] != "1") fail("outcome must be 0 or 1");
    const std::size_t o = tok[2] == "1";
    double c = 0;
    try {
      std::size_t used = 0;
      c = std::stod(tok[3], &used);
      if (used != tok[3].size()) fail("bad count");
    } catch (const std::logic_error&) {
      fail("bad count");
    }
    if (!(c >= 0) || !std::isfinite(c)) fail("count must be nonnegative");
    const std::size_t idx = (p * kBases + b) * 2 + o;
    if (seen[idx]) fail("duplicate row");
    seen[idx] = true;
    data.counts[idx] = c;
  }
  if (!have_header) throw ParseError("dataset is empty");
  for (std::size_t s = 0; s < kPreps * kBases; ++s) {
    if (!data.analytic && data.counts[2 * s] + data.counts[2 * s + 1] > static_cast<double>(data.shots) + 1e-9) {
      throw ParseError("counts of a setting exceed the shot count");
    }
  }
  return data;
}

}  // namespace rqc::tomography
