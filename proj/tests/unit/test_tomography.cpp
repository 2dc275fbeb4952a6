#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rqc/gates.hpp"
#include "rqc/tomography.hpp"

using namespace rqc;
using namespace rqc::tomography;

namespace {

// Linear inversion: output states from Pauli expectation values, the map on
// |i><j| from the four preparations, then chi from the Choi matrix.
oracle::Mat linear_inversion(const TomographyDataset& d) {
  using oracle::C;
  std::array<oracle::Mat, 4> out;
  for (int p = 0; p < 4; ++p) {
    const double tr = d.count(p, 2, 0) + d.count(p, 2, 1);
    oracle::Mat rho = tr * oracle::pauli(0);
    for (int b = 0; b < 3; ++b) rho += (d.count(p, b, 0) - d.count(p, b, 1)) * oracle::pauli(b + 1);
    out[p] = rho / 2.0;
  }
  // E(|0><1|) = E(+) + i E(+i) - (1 + i)/2 (E(0) + E(1)); E(|1><0|) is its adjoint.
  const oracle::Mat e01 = out[2] + C(0, 1) * out[3] - C(0.5, 0.5) * (out[0] + out[1]);
  const std::array<std::array<oracle::Mat, 2>, 2> e{{{out[0], e01}, {oracle::Mat(e01.adjoint()), out[1]}}};
  oracle::Mat choi = oracle::Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      oracle::Mat unit = oracle::Mat::Zero(2, 2);
      unit(i, j) = 1;
      choi += oracle::kron(unit, e[i][j]);
    }
  }
  std::array<oracle::Vec, 4> v;
  for (int m = 0; m < 4; ++m) {
    v[m] = oracle::Vec::Zero(4);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) v[m](2 * i + k) = oracle::pauli(m)(k, i);
    }
  }
  oracle::Mat chi(4, 4);
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) chi(m, n) = v[m].dot(choi * v[n]) / 4.0;
  }
  return chi / chi.trace();
}

std::vector<std::string> twelve() {
  std::vector<std::string> out;
  for (int i = 1; i <= 12; ++i) out.push_back("U" + std::to_string(i));
  return out;
}

void expect_physical(const ChiMatrix& chi) {
  EXPECT_LT((chi.m - chi.m.adjoint()).norm(), 1e-10);
  EXPECT_NEAR(std::abs(chi.m.trace() - Complex(1, 0)), 0, 1e-10);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(chi.m).eigenvalues();
  EXPECT_GT(ev.minCoeff(), -1e-10);
}

}  // namespace

TEST(IdealChi, IdentityAndWorkedExample) {
  const ChiMatrix id = ideal_chi(ComplexMatrix::Identity(2, 2));
  EXPECT_NEAR(std::abs(id.m(0, 0) - Complex(1, 0)), 0, 1e-15);
  EXPECT_NEAR(id.m.norm(), 1.0, 1e-15);

  const ComplexMatrix x = gates::named_gate("X"), z = gates::named_gate("Z");
  const ChiMatrix c = ideal_chi((x + Complex(0, 1) * z) / std::sqrt(2.0));
  EXPECT_NEAR(std::abs(c.m(1, 1) - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(c.m(3, 3) - 0.5), 0, 1e-15);
  EXPECT_NEAR(std::abs(c.m(1, 3) - Complex(0, -0.5)), 0, 1e-15);
  EXPECT_NEAR(std::abs(c.m(3, 1) - Complex(0, 0.5)), 0, 1e-15);
  EXPECT_THROW(ideal_chi(ComplexMatrix::Zero(2, 2)), InvalidInput);
}

TEST(IdealChi, RankOneTraceOneAndReproducesMap) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    ComplexMatrix op = ComplexMatrix::Random(2, 2);
    const ChiMatrix chi = ideal_chi(op);
    expect_physical(chi);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(chi.m).eigenvalues();
    EXPECT_NEAR(ev(3), 1.0, 1e-12);
    EXPECT_NEAR(ev.head<3>().cwiseAbs().maxCoeff(), 0, 1e-12);
    const ChiMatrix raw = ideal_chi(op, false);
    const ComplexMatrix rho = preparation(trial % 4);
    EXPECT_LT((apply_chi(raw, rho) - op * rho * op.adjoint()).norm(), 1e-12);
  }
}

TEST(Fidelity, PauliProcesses) {
  EXPECT_NEAR(process_fidelity(ideal_chi(gates::named_gate("I")), ideal_chi(gates::named_gate("I"))), 1.0, 1e-15);
  EXPECT_NEAR(process_fidelity(ideal_chi(gates::named_gate("X")), ideal_chi(gates::named_gate("Z"))), 0.0, 1e-15);
  ChiMatrix bad = ideal_chi(gates::named_gate("X"), false);
  bad.m *= 2;
  EXPECT_THROW(process_fidelity(bad, bad), InvalidInput);
}

TEST(Dataset, AnalyticLimits) {
  const TomographyDataset d = analytic_dataset(ComplexMatrix::Identity(2, 2), {}, 1.0);
  EXPECT_NEAR(d.count(0, 2, 0), 1.0, 1e-15);
  EXPECT_NEAR(d.count(0, 2, 1), 0.0, 1e-15);
  const TomographyDataset mixed = analytic_dataset(gates::named_gate("H"), {1.0}, 1.0);
  for (double c : mixed.counts) EXPECT_NEAR(c, 0.5, 1e-15);
}

TEST(Dataset, SampledCountsAndDeterminism) {
  Rng a(32), b(32);
  const ComplexMatrix op = gates::named_operation("U12").spec.combination();
  const TomographyDataset x = simulate_dataset(op, 1000, {0.05}, a);
  const TomographyDataset y = simulate_dataset(op, 1000, {0.05}, b);
  EXPECT_EQ(x.counts, y.counts);
  for (std::size_t p = 0; p < kPreps; ++p) {
    for (std::size_t s = 0; s < kBases; ++s) {
      const double sum = x.count(p, s, 0) + x.count(p, s, 1);
      EXPECT_LE(sum, 1000.0);
      EXPECT_EQ(std::floor(x.count(p, s, 0)), x.count(p, s, 0));
    }
  }
  Rng c(33);
  EXPECT_THROW(simulate_dataset(op, 0, {}, c), InvalidInput);
}

TEST(Dataset, TextRoundTrip) {
  Rng rng(34);
  const TomographyDataset d = simulate_dataset(gates::named_gate("H"), 500, {0.1}, rng);
  const TomographyDataset back = parse_dataset(dataset_to_text(d));
  EXPECT_EQ(back.counts, d.counts);
  EXPECT_EQ(back.shots, d.shots);
  EXPECT_THROW(parse_dataset(""), ParseError);
  EXPECT_THROW(parse_dataset("shots 10\n0 W 0 3\n"), ParseError);
  EXPECT_THROW(parse_dataset("shots 10\n0 X 0 8\n0 X 1 8\n"), ParseError);
}

TEST(Mle, GradientMatchesFiniteDifferences) {
  Rng rng(35);
  std::normal_distribution<double> normal;
  const TomographyDataset d = simulate_dataset(gates::named_operation("U2").spec.combination(), 1000, {0.05}, rng);
  for (int trial = 0; trial < 20; ++trial) {
    MleParameters p;
    for (int i = 0; i < 16; ++i) p(i) = normal(rng);
    const MleParameters g = mle_gradient(d, p);
    MleParameters fd;
    const double h = 1e-5;
    for (int i = 0; i < 16; ++i) {
      MleParameters up = p, down = p;
      up(i) += h;
      down(i) -= h;
      fd(i) = (mle_objective(d, up) - mle_objective(d, down)) / (2 * h);
    }
    EXPECT_LT((g - fd).norm() / fd.norm(), 1e-4);
  }
}

TEST(Mle, AnalyticDataIdentity) {
  const MleResult r = reconstruct_mle(analytic_dataset(ComplexMatrix::Identity(2, 2), {}));
  EXPECT_NEAR(r.chi.m(0, 0).real(), 1.0, 1e-6);
  expect_physical(r.chi);
}

TEST(Mle, AnalyticDataAllTwelveOperations) {
  for (const std::string& name : twelve()) {
    const ComplexMatrix op = gates::named_operation(name).spec.combination();
    const TomographyDataset d = analytic_dataset(op, {});
    const MleResult r = reconstruct_mle(d);
    expect_physical(r.chi);
    EXPECT_GE(process_fidelity(r.chi, ideal_chi(op)), 0.999) << name;
    const oracle::Mat li = linear_inversion(d);
    EXPECT_LT((r.chi.m - li).cwiseAbs().maxCoeff(), 1e-4) << name;
  }
}

TEST(Mle, NoisyDataStaysPhysicalAndAscends) {
  Rng rng(36);
  for (double p : {0.0, 0.05, 0.2, 0.6}) {
    const TomographyDataset d = simulate_dataset(gates::named_operation("U5").spec.combination(), 200, {p}, rng);
    const MleResult r = reconstruct_mle(d);
    expect_physical(r.chi);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      EXPECT_GE(r.objective_history[i], r.objective_history[i - 1]);
    }
  }
}

TEST(Mle, RejectsEmptyBasis) {
  TomographyDataset d;
  d.shots = 10;
  EXPECT_THROW(reconstruct_mle(d), InvalidInput);
  d.count(0, 0, 0) = 5;
  d.count(0, 1, 0) = 5;
  EXPECT_THROW(reconstruct_mle(d), InvalidInput);
}

TEST(Mle, FidelityFallsWithDepolarization) {
  const ComplexMatrix op = gates::named_operation("U2").spec.combination();
  const ChiMatrix ideal = ideal_chi(op);
  double prev = 1.1;
  for (double p : {0.0, 0.05, 0.1, 0.2}) {
    const double f = process_fidelity(reconstruct_mle(analytic_dataset(op, {p})).chi, ideal);
    EXPECT_LT(f, prev);
    EXPECT_NEAR(f, 1 - 0.75 * p, 1e-4);
    prev = f;
  }
}

TEST(Bootstrap, AnalyticAndSampled) {
  Rng rng(37);
  const ComplexMatrix op = gates::named_operation("U2").spec.combination();
  const ChiMatrix ideal = ideal_chi(op);
  const BootstrapResult exact = bootstrap_error(analytic_dataset(op, {}), ideal, 5, rng);
  EXPECT_LT(exact.std, 1e-3);
  const BootstrapResult noisy = bootstrap_error(simulate_dataset(op, 1000, {0.05}, rng), ideal, 30, rng);
  EXPECT_TRUE(std::isfinite(noisy.std));
  EXPECT_GT(noisy.std, 0);
  EXPECT_LT(noisy.mean, 0.999);
  const BootstrapResult minimal = bootstrap_error(simulate_dataset(op, 100, {}, rng), ideal, 2, rng);
  EXPECT_TRUE(std::isfinite(minimal.std));
  EXPECT_THROW(bootstrap_error(analytic_dataset(op, {}), ideal, 1, rng), InvalidInput);
}
