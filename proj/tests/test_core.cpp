#include "qsl/core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qsl/rng.hpp"

using namespace qsl;

namespace {

Matrix sigma(Axis a) { return pauli_string(1, {{1, a}}).entries(); }

Matrix random_hermitian(Index d, SplitMix64& rng, double scale = 1.0) {
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  Matrix h = 0.5 * scale * (m + m.adjoint().eval());
  return h;
}

StateVector random_state(Index d, SplitMix64& rng) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return StateVector::normalized(v);
}

// Test-only Kronecker product, the reference for pauli_string's tensor
// structure.
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Independent eigensolver oracle: cyclic complex Jacobi iteration. Only
// used to cross-check hermitian_eig.
std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Index d = a.rows();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < d; ++p)
      for (Index q = p + 1; q < d; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < 1e-14 * scale) break;
    for (Index p = 0; p < d; ++p) {
      for (Index q = p + 1; q < d; ++q) {
        const Complex b = a(p, q);
        if (std::abs(b) < 1e-300) continue;
        const double phi = std::arg(b);
        const double r = std::abs(b);
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0 ? -1.0 : 1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U acts on columns p, q: [[c, -s e^{i phi}], [s e^{-i phi}, c]]
        Matrix u = Matrix::Identity(d, d);
        u(p, p) = c;
        u(p, q) = -s * std::exp(Complex(0, phi));
        u(q, p) = s * std::exp(Complex(0, -phi));
        u(q, q) = c;
        a = (u.adjoint() * a * u).eval();
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) ev[static_cast<std::size_t>(i)] = a(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST(StateVector, EnforcesNormalizationAndDimension) {
  Vector bad(2);
  bad << 1.0, 1.0;
  EXPECT_THROW(StateVector{bad}, std::invalid_argument);
  EXPECT_NO_THROW(StateVector::normalized(bad));
  EXPECT_THROW(StateVector::basis_state(1, 0), std::invalid_argument);
  EXPECT_THROW(StateVector::basis_state(8192, 0), std::invalid_argument);
  EXPECT_NEAR(StateVector::equal_superposition(10).amplitudes().norm(), 1.0, 1e-14);
}

TEST(Operator, HermitianCheck) {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, 1), Complex(0, 1), Complex(0, 0);  // not Hermitian
  EXPECT_THROW(Operator::hermitian(m), std::invalid_argument);
  EXPECT_NO_THROW(Operator::general(m));
  EXPECT_NO_THROW(Operator::hermitian(sigma(Axis::Y)));
}

TEST(BuresDistance, IdenticalStatesGiveZero) {
  const StateVector psi = StateVector::equal_superposition(4);
  EXPECT_NEAR(bures_distance(psi, psi), 0.0, 1e-12);
}

TEST(BuresDistance, OrthogonalStatesGiveSqrtTwo) {
  const StateVector a = StateVector::basis_state(2, 0);
  const StateVector b = StateVector::basis_state(2, 1);
  EXPECT_NEAR(bures_distance(a, b), std::sqrt(2.0), 1e-12);
}

TEST(BuresDistance, SearchOverlapValue) {
  // overlap 1/sqrt(10), the d = 10 search value
  const double ov = 1.0 / std::sqrt(10.0);
  Vector v(10);
  v.setZero();
  v(0) = ov;
  v(1) = std::sqrt(1.0 - ov * ov);
  const StateVector a = StateVector::basis_state(10, 0);
  const StateVector b{v};
  const double expected = std::sqrt(2.0 * (1.0 - ov));
  EXPECT_NEAR(bures_distance(a, b), expected, 1e-12);
  EXPECT_NEAR(expected, 1.16942, 1e-5);
}

TEST(BuresDistance, SymmetricBoundedAndPhaseInsensitive) {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.next_below(7));
    const StateVector a = random_state(d, rng);
    const StateVector b = random_state(d, rng);
    const double db = bures_distance(a, b);
    EXPECT_NEAR(db, bures_distance(b, a), 1e-13);
    EXPECT_GE(db, 0.0);
    EXPECT_LE(db, std::sqrt(2.0) + 1e-12);
    const Complex phase = std::exp(Complex(0, rng.uniform(0, 6.28)));
    const StateVector a_rot{Vector(phase * a.amplitudes())};
    EXPECT_NEAR(bures_distance(a, a_rot), 0.0, 1e-7);
  }
  EXPECT_THROW(bures_distance(random_state(2, rng), random_state(4, rng)), std::invalid_argument);
}

TEST(HermitianEig, PauliAndIdentitySpectra) {
  const auto eig_z = hermitian_eig(Operator::hermitian(sigma(Axis::Z)));
  EXPECT_NEAR(eig_z.eigenvalues(0), -1.0, 1e-12);
  EXPECT_NEAR(eig_z.eigenvalues(1), 1.0, 1e-12);

  const auto eig_id = hermitian_eig(Operator::hermitian(Matrix::Identity(4, 4)));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(eig_id.eigenvalues(k), 1.0, 1e-12);
}

TEST(HermitianEig, MatchesJacobiOracleAtDimEight) {
  SplitMix64 rng(7);
  // random 3-spin pairwise-coupled Hamiltonian
  Matrix h = Matrix::Zero(8, 8);
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j)
      for (Axis a : {Axis::X, Axis::Y, Axis::Z})
        h += rng.uniform(-1, 1) * pauli_string(3, {{i, a}, {j, a}}).entries();

  const auto eig = hermitian_eig(Operator::hermitian(h));
  const auto oracle = jacobi_eigenvalues(h);
  for (Index k = 0; k < 8; ++k)
    EXPECT_NEAR(eig.eigenvalues(k), oracle[static_cast<std::size_t>(k)], 1e-9);
}

TEST(HermitianEig, RejectsNonHermitian) {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(2, 0), Complex(0, 0);
  EXPECT_THROW(hermitian_eig(Operator::general(m)), std::invalid_argument);
}

TEST(SpectralNorm, PauliCommutatorAndIdentity) {
  EXPECT_NEAR(spectral_norm(commutator(sigma(Axis::Z), sigma(Axis::X))), 2.0, 1e-12);
  EXPECT_NEAR(spectral_norm(Matrix::Identity(7, 7)), 1.0, 1e-12);
}

TEST(SpectralNorm, UnitarilyInvariant) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.next_below(7));
    const Matrix a = random_hermitian(d, rng) * Matrix(random_hermitian(d, rng));  // non-normal
    const Matrix u = matrix_exp_unitary(Operator::hermitian(random_hermitian(d, rng)), 1.3);
    const double na = spectral_norm(a);
    const double nu = spectral_norm(Matrix(u * a * u.adjoint()));
    EXPECT_LE(std::abs(na - nu), 1e-9 * std::max(1.0, na));
  }
}

TEST(MatrixExpUnitary, ZeroTimeGivesIdentity) {
  SplitMix64 rng(3);
  const Matrix h = random_hermitian(5, rng);
  const Matrix u = matrix_exp_unitary(Operator::hermitian(h), 0.0);
  EXPECT_LT((u - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatrixExpUnitary, DiagonalCase) {
  const Matrix u = matrix_exp_unitary(Operator::hermitian(sigma(Axis::Z)), M_PI / 2);
  EXPECT_LT(std::abs(u(0, 0) - std::exp(Complex(0, -M_PI / 2))), 1e-12);
  EXPECT_LT(std::abs(u(1, 1) - std::exp(Complex(0, M_PI / 2))), 1e-12);
  EXPECT_LT(std::abs(u(0, 1)), 1e-14);
}

TEST(MatrixExpUnitary, RabiRotationOracle) {
  // exp(-i t sigma_x)|0> = (cos t, -i sin t)
  for (double t : {0.3, 1.0, 2.71, -1.2}) {
    const Matrix u = matrix_exp_unitary(Operator::hermitian(sigma(Axis::X)), t);
    const Vector out = u * StateVector::basis_state(2, 0).amplitudes();
    EXPECT_LT(std::abs(out(0) - Complex(std::cos(t), 0)), 1e-12);
    EXPECT_LT(std::abs(out(1) - Complex(0, -std::sin(t))), 1e-12);
  }
}

TEST(MatrixExpUnitary, UnitaryAndNormPreserving) {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.next_below(15));
    const Matrix h = random_hermitian(d, rng, 3.0);
    const Matrix u = matrix_exp_unitary(Operator::hermitian(h), rng.uniform(-5, 5));
    EXPECT_LT((Matrix(u.adjoint() * u) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    const StateVector psi = random_state(d, rng);
    EXPECT_NEAR((u * psi.amplitudes()).norm(), 1.0, 1e-10);
  }
}

TEST(Expectation, KnownValues) {
  // <0|sigma_z|0> = 1
  EXPECT_NEAR(expectation(StateVector::basis_state(2, 0), Operator::hermitian(sigma(Axis::Z))),
              1.0, 1e-12);
  // <m|sigma_x|m> = 0 for a basis state
  EXPECT_NEAR(expectation(StateVector::basis_state(4, 2),
                          pauli_string(2, {{1, Axis::X}})),
              0.0, 1e-12);
}

TEST(Expectation, DimensionMismatch) {
  EXPECT_THROW(expectation(StateVector::basis_state(4, 0), Operator::hermitian(sigma(Axis::Z))),
               std::invalid_argument);
}

TEST(Variance, EigenstateGivesZero) {
  EXPECT_NEAR(variance(StateVector::basis_state(2, 1), Operator::hermitian(sigma(Axis::Z))), 0.0,
              1e-12);
}

TEST(Variance, MatchesMomentFormula) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.next_below(7));
    const Matrix h = random_hermitian(d, rng, 2.0);
    const Operator a = Operator::hermitian(h);
    const Operator a2 = Operator::hermitian(Matrix(h * h));
    const StateVector psi = random_state(d, rng);
    const double var = variance(psi, a);
    EXPECT_GE(var, 0.0);
    const double moments = expectation(psi, a2) - std::pow(expectation(psi, a), 2);
    EXPECT_NEAR(var, moments, 1e-10);
  }
}

TEST(Commutator, BasicAlgebra) {
  const Matrix z = sigma(Axis::Z);
  EXPECT_LT(commutator(z, z).cwiseAbs().maxCoeff(), 1e-15);
  const Matrix expect_2i_y = 2.0 * Complex(0, 1) * sigma(Axis::Y);
  EXPECT_LT((commutator(z, sigma(Axis::X)) - expect_2i_y).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(commutator(z, Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST(PauliString, SingleAndTwoSite) {
  EXPECT_LT((pauli_string(1, {{1, Axis::Z}}).entries() - sigma(Axis::Z)).cwiseAbs().maxCoeff(),
            1e-15);
  Matrix zz = pauli_string(2, {{1, Axis::Z}, {2, Axis::Z}}).entries();
  Vector diag_expect(4);
  diag_expect << 1, -1, -1, 1;
  EXPECT_LT((zz.diagonal() - diag_expect).cwiseAbs().maxCoeff(), 1e-15);
  zz.diagonal().setZero();
  EXPECT_LT(zz.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PauliString, TensorStructureMatchesKron) {
  const Matrix expected =
      kron(kron(Matrix::Identity(2, 2), sigma(Axis::X)), Matrix::Identity(2, 2));
  EXPECT_LT((pauli_string(3, {{2, Axis::X}}).entries() - expected).cwiseAbs().maxCoeff(), 1e-15);

  SplitMix64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    std::vector<std::pair<int, Axis>> factors;
    Matrix ref = Matrix::Identity(1, 1);
    for (int site = 1; site <= n; ++site) {
      if (rng.next_below(2) == 0) {
        const Axis a = static_cast<Axis>(rng.next_below(3));
        factors.push_back({site, a});
        ref = kron(ref, sigma(a));
      } else {
        ref = kron(ref, Matrix::Identity(2, 2));
      }
    }
    if (factors.empty()) continue;
    EXPECT_LT((pauli_string(n, factors).entries() - ref).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(PauliString, UnitaryHermitianInvolution) {
  const Matrix m = pauli_string(3, {{1, Axis::Y}, {3, Axis::X}}).entries();
  EXPECT_LT((Matrix(m * m) - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PauliString, CommutationRelations) {
  // anticommutation on the same site, commutation across sites
  const Matrix x1 = pauli_string(2, {{1, Axis::X}}).entries();
  const Matrix z1 = pauli_string(2, {{1, Axis::Z}}).entries();
  const Matrix z2 = pauli_string(2, {{2, Axis::Z}}).entries();
  EXPECT_LT((x1 * z1 + z1 * x1).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(commutator(x1, z2).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PauliString, RejectsBadSites) {
  EXPECT_THROW(pauli_string(2, {{1, Axis::X}, {1, Axis::Z}}), std::invalid_argument);
  EXPECT_THROW(pauli_string(2, {{3, Axis::X}}), std::invalid_argument);
  EXPECT_THROW(pauli_string(0, {}), std::invalid_argument);
}

TEST(ApplyExp, MatchesEigRouteOnRandomInput) {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.next_below(15));
    const Matrix h = random_hermitian(d, rng, 2.0);
    const double t = rng.uniform(-4, 4);
    const StateVector psi = random_state(d, rng);
    const Vector via_eig = matrix_exp_unitary(Operator::hermitian(h), t) * psi.amplitudes();
    const Vector via_taylor =
        apply_exp(h, t, psi.amplitudes(), h.cwiseAbs().rowwise().sum().maxCoeff());
    EXPECT_LT((via_eig - via_taylor).norm(), 1e-12);
  }
}
