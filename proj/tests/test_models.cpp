#include "qsl/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "qsl/rng.hpp"

using namespace qsl;

namespace {

SpinGraph complete_graph_zz(int n, double h) {
  std::vector<Coupling> cs;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) cs.push_back({i, j, Axis::Z, Axis::Z, h});
  return SpinGraph(n, cs);
}

// z value (+1/-1) of site `site` in basis state x of an n-spin register
int z_of(Index x, int site, int n) { return ((x >> (n - site)) & 1) ? -1 : 1; }

}  // namespace

TEST(SpinGraph, ValidatesInput) {
  EXPECT_NO_THROW(SpinGraph(3, {{1, 2, Axis::Z, Axis::Z, 1.0}, {1, 2, Axis::X, Axis::X, 0.5}}));
  EXPECT_THROW(SpinGraph(3, {{2, 1, Axis::Z, Axis::Z, 1.0}}), std::invalid_argument);
  EXPECT_THROW(SpinGraph(3, {{1, 4, Axis::Z, Axis::Z, 1.0}}), std::invalid_argument);
  EXPECT_THROW(SpinGraph(3, {{1, 2, Axis::Z, Axis::Z, 1.0}, {1, 2, Axis::Z, Axis::Z, 2.0}}),
               std::invalid_argument);
  const SpinGraph g(3, {{1, 2, Axis::Z, Axis::Z, 1.0}, {1, 2, Axis::X, Axis::X, -2.5}});
  EXPECT_EQ(g.edge_count(), 1);  // distinct vertex pairs
  EXPECT_NEAR(g.h_max(), 2.5, 1e-15);
}

TEST(MinDegreeVertex, PathCompleteAndPendant) {
  const SpinGraph path(3, {{1, 2, Axis::Z, Axis::Z, 1}, {2, 3, Axis::Z, Axis::Z, 1}});
  EXPECT_EQ(min_degree_vertex(path).vertex, 1);
  EXPECT_EQ(min_degree_vertex(path).degree, 1);

  const SpinGraph k4 = complete_graph_zz(4, 1.0);
  EXPECT_EQ(min_degree_vertex(k4).vertex, 1);
  EXPECT_EQ(min_degree_vertex(k4).degree, 3);

  auto cs = complete_graph_zz(4, 1.0).couplings();
  cs.push_back({4, 5, Axis::Z, Axis::Z, 1.0});
  const SpinGraph pendant(5, cs);
  EXPECT_EQ(min_degree_vertex(pendant).vertex, 5);
  EXPECT_EQ(min_degree_vertex(pendant).degree, 1);
}

TEST(GroverProblem, SingleMarkedSpectrum) {
  const auto p = grover_problem(2, {3}, 1.0, 1.0);
  const auto eig = hermitian_eig(p.h_f());
  EXPECT_NEAR(eig.eigenvalues(0), 0.0, 1e-12);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(eig.eigenvalues(k), 1.0, 1e-12);
  // ground state |11>
  EXPECT_NEAR(std::abs(eig.eigenvectors(3, 0)), 1.0, 1e-12);
  // H_i annihilates psi0 exactly
  EXPECT_LT((p.h_i().entries() * p.psi0().amplitudes()).norm(), 1e-13);
}

TEST(GroverProblem, MultiMarkedDegeneracy) {
  const auto p = grover_problem(2, {0, 1}, 1.0, 1.0);
  EXPECT_NEAR(p.ground_projector().entries().trace().real(), 2.0, 1e-12);
  // spectrum of H_f lies in {0, 1}
  const auto eig = hermitian_eig(p.h_f());
  for (int k = 0; k < 4; ++k) {
    const double e = eig.eigenvalues(k);
    EXPECT_LT(std::min(std::abs(e), std::abs(e - 1.0)), 1e-12);
  }
}

TEST(GroverProblem, OverlapIsOneOverSqrtD) {
  for (Index d : {4, 10, 32}) {
    const auto p = grover_problem_dim(d, {d - 1}, 1.0, 1.0);
    EXPECT_NEAR(std::abs(overlap(p.psi_t(), p.psi0())), 1.0 / std::sqrt(double(d)), 1e-12);
  }
}

TEST(GroverProblem, ErrorPaths) {
  EXPECT_THROW(grover_problem(2, {}, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(grover_problem(2, {4}, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(grover_problem(13, {0}, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(grover_problem(2, {0}, 0.0, 1.0), std::invalid_argument);
}

TEST(SpinNetworkHf, TwoSpinSingleEdge) {
  const SpinGraph g(2, {{1, 2, Axis::Z, Axis::Z, 1.0}});
  const Operator h = spin_network_hf(g);  // N = |V|/|E| = 2
  const Matrix expected = 2.0 * pauli_string(2, {{1, Axis::Z}, {2, Axis::Z}}).entries();
  EXPECT_LT((h.entries() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpinNetworkHf, ZeroCouplingsGiveZeroOperator) {
  const SpinGraph g(2, {{1, 2, Axis::Z, Axis::Z, 0.0}});
  EXPECT_LT(spin_network_hf(g).entries().cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(spin_network_hf(SpinGraph(2, {})), std::invalid_argument);
}

TEST(SpinNetworkHf, CompleteGraphNormByBruteForce) {
  const int n = 4;
  const SpinGraph g = complete_graph_zz(n, 1.0);
  const Operator h = spin_network_hf(g);
  // brute force over the 16 bitstrings: || H_f || = N * max |sum z_i z_j|
  const double nn = double(n) / g.edge_count();
  double best = 0.0;
  for (Index x = 0; x < 16; ++x) {
    double e = 0.0;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) e += z_of(x, i, n) * z_of(x, j, n);
    best = std::max(best, std::abs(e));
  }
  EXPECT_NEAR(spectral_norm(h.entries()), nn * best, 1e-12);
}

TEST(SpinNetworkHf, LinearInCouplings) {
  SplitMix64 rng(5);
  std::vector<Coupling> cs;
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j)
      cs.push_back({i, j, static_cast<Axis>(rng.next_below(3)),
                    static_cast<Axis>(rng.next_below(3)), rng.uniform(-1, 1)});
  auto doubled = cs;
  for (auto& c : doubled) c.h *= 2.0;
  const auto e1 = hermitian_eig(spin_network_hf(SpinGraph(3, cs))).eigenvalues;
  const auto e2 = hermitian_eig(spin_network_hf(SpinGraph(3, doubled))).eigenvalues;
  for (Index k = 0; k < e1.size(); ++k) EXPECT_NEAR(2.0 * e1(k), e2(k), 1e-11);
}

TEST(TransverseFieldHi, SmallCases) {
  EXPECT_LT((transverse_field_hi(1).entries() + pauli_string(1, {{1, Axis::X}}).entries())
                .cwiseAbs()
                .maxCoeff(),
            1e-15);

  const auto eig = hermitian_eig(transverse_field_hi(3));
  const std::vector<double> expected{-3, -1, -1, -1, 1, 1, 1, 3};
  for (Index k = 0; k < 8; ++k) EXPECT_NEAR(eig.eigenvalues(k), expected[size_t(k)], 1e-12);

  for (int n : {1, 2, 5}) {
    const Operator h = transverse_field_hi(n);
    EXPECT_NEAR(expectation(StateVector::normalized(Vector::Constant(Index(1) << n, 1.0)), h),
                -double(n), 1e-10);
    EXPECT_NEAR(spectral_norm(h.entries()), double(n), 1e-10);
  }
}

TEST(PspinProblem, GroundStructure) {
  // p = 1: ground all-up at energy 0
  const auto p1 = pspin_problem(3, 1, 1.0, 1.0);
  EXPECT_NEAR(p1.h_f().entries()(0, 0).real(), 0.0, 1e-12);
  EXPECT_NEAR(hermitian_eig(p1.h_f()).eigenvalues(0), 0.0, 1e-12);
  EXPECT_NEAR(p1.ground_projector().entries().trace().real(), 1.0, 1e-10);

  // p = 2, n = 2: H_f is 0 on |00>, |11> and n on |01>, |10>
  const auto p2 = pspin_problem(2, 2, 1.0, 1.0);
  const Matrix& hf = p2.h_f().entries();
  EXPECT_NEAR(hf(0, 0).real(), 0.0, 1e-12);
  EXPECT_NEAR(hf(3, 3).real(), 0.0, 1e-12);
  EXPECT_NEAR(hf(1, 1).real(), 2.0, 1e-12);
  EXPECT_NEAR(hf(2, 2).real(), 2.0, 1e-12);
  EXPECT_NEAR(p2.ground_projector().entries().trace().real(), 2.0, 1e-10);

  // H_i ground energy 0 with eigenstate |+>^n
  EXPECT_NEAR(expectation(p2.psi0(), p2.h_i()), 0.0, 1e-12);
  EXPECT_NEAR(hermitian_eig(p2.h_i()).eigenvalues(0), 0.0, 1e-12);
}

TEST(PerturbedPspin, ZeroLambdaIsUnperturbed) {
  const int n = 3, p = 2;
  const Operator perturbed = perturbed_pspin_hf(n, p, 0.0);
  const Operator plain = pspin_problem(n, p, 1.0, 1.0).h_f();
  // H'_f at lambda = 0 equals H_f tensor identity on the appended spin
  const Index d = plain.dim();
  for (Index x = 0; x < d; ++x) {
    EXPECT_NEAR(perturbed.entries()(2 * x, 2 * x).real(), plain.entries()(x, x).real(), 1e-12);
    EXPECT_NEAR(perturbed.entries()(2 * x + 1, 2 * x + 1).real(), plain.entries()(x, x).real(),
                1e-12);
  }
}

TEST(PerturbedPspin, CommutatorNormClosedForm) {
  // ||[H'_f, sigma_x^(n+1)]|| = 2 lambda / n^(p-1); hand expansion of the
  // single surviving commutator term
  for (const auto& [n, p, lambda] : std::vector<std::tuple<int, int, double>>{
           {4, 2, 1.0}, {3, 2, 0.5}, {3, 3, 2.0}, {2, 1, 1.0}}) {
    const Operator h = perturbed_pspin_hf(n, p, lambda);
    const Operator w = pauli_string(n + 1, {{n + 1, Axis::X}});
    const double norm = spectral_norm(commutator(h.entries(), w.entries()));
    EXPECT_NEAR(norm, 2.0 * lambda / std::pow(double(n), p - 1), 1e-11);
  }
  // spot value: p = 2, n = 4, lambda = 1 -> 0.5
  const double v = spectral_norm(commutator(perturbed_pspin_hf(4, 2, 1.0).entries(),
                                            pauli_string(5, {{5, Axis::X}}).entries()));
  EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(PerturbedPspin, PerturbationSmallness) {
  for (const auto& [n, p, lambda] : std::vector<std::tuple<int, int, double>>{
           {3, 2, 1.0}, {4, 2, 0.5}, {3, 3, 1.5}}) {
    const Matrix hp = perturbed_pspin_hf(n, p, lambda).entries();
    const Matrix h0 = perturbed_pspin_hf(n, p, 0.0).entries();
    EXPECT_NEAR(spectral_norm(hp - h0), lambda * std::pow(double(n), 1 - p), 1e-11);
  }
}

TEST(PerturbedPspin, TargetHasZeroWitnessExpectation) {
  const auto prob = perturbed_pspin_problem(4, 2, 1.0, 1.0, 1.0);
  const Operator w = pauli_string(5, {{5, Axis::X}});
  EXPECT_NEAR(expectation(prob.psi_t(), w), 0.0, 1e-12);
  EXPECT_NEAR(expectation(prob.psi0(), prob.h_i()), 0.0, 1e-12);
}

TEST(GroundSpaceProjector, KnownProjectors) {
  const Operator z = pauli_string(1, {{1, Axis::Z}});
  const Matrix p = ground_space_projector(z).entries();
  Matrix expected = Matrix::Zero(2, 2);
  expected(1, 1) = 1.0;  // |1><1|, eigenvalue -1
  EXPECT_LT((p - expected).cwiseAbs().maxCoeff(), 1e-12);

  const Matrix pid = ground_space_projector(Operator::hermitian(Matrix::Identity(4, 4))).entries();
  EXPECT_LT((pid - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GroundSpaceProjector, RankMatchesBruteForceCount) {
  const int n = 3, p = 2;
  const double lambda = 0.5;
  const Operator h = perturbed_pspin_hf(n, p, lambda);
  // brute-force energies over all 2^4 basis states
  const Index d = h.dim();
  double emin = 1e300;
  for (Index x = 0; x < d; ++x) emin = std::min(emin, h.entries()(x, x).real());
  int count = 0;
  for (Index x = 0; x < d; ++x)
    if (h.entries()(x, x).real() < emin + 1e-9) ++count;

  const Operator proj = ground_space_projector(h);
  EXPECT_NEAR(proj.entries().trace().real(), double(count), 1e-9);
  const Matrix& pm = proj.entries();
  EXPECT_LT((Matrix(pm * pm) - pm).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((pm - pm.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AnnealingProblem, RejectsBadInputs) {
  const auto good = grover_problem(2, {3}, 1.0, 1.0);
  // psi0 not a ground state of H_i
  EXPECT_THROW(AnnealingProblem::validated(good.h_i(), good.h_f(), good.psi_t(), good.psi_t(),
                                           good.ground_projector(), 1.0, 1.0),
               std::invalid_argument);
  // target outside the ground space
  EXPECT_THROW(AnnealingProblem::validated(good.h_i(), good.h_f(), good.psi0(), good.psi0(),
                                           good.ground_projector(), 1.0, 1.0),
               std::invalid_argument);
  // non-projector
  EXPECT_THROW(AnnealingProblem::validated(good.h_i(), good.h_f(), good.psi0(), good.psi_t(),
                                           good.h_i(), 1.0, 1.0),
               std::invalid_argument);
}

TEST(SpinNetworkProblem, DiagonalTargetIsMinimalBitstring) {
  // ferromagnetic triangle: ground states all-up / all-down, all-up has lower index
  std::vector<Coupling> cs;
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j) cs.push_back({i, j, Axis::Z, Axis::Z, -1.0});
  const auto prob = spin_network_problem(SpinGraph(3, cs), std::nullopt, 1.0, 1.0);
  EXPECT_NEAR(std::abs(prob.psi_t().amplitudes()(0)), 1.0, 1e-12);
  EXPECT_NEAR(prob.ground_projector().entries().trace().real(), 2.0, 1e-9);
  EXPECT_NEAR(expectation(prob.psi0(), prob.h_i()), -3.0, 1e-12);
}

TEST(Hermiticity, AllConstructorsProduceHermitianOperators) {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + int(rng.next_below(3));
    std::vector<Coupling> cs;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        cs.push_back({i, j, static_cast<Axis>(rng.next_below(3)),
                      static_cast<Axis>(rng.next_below(3)), rng.uniform(-2, 2)});
    EXPECT_NO_THROW(spin_network_hf(SpinGraph(n, cs)));  // hermitian-checked inside
    EXPECT_NO_THROW(transverse_field_hi(n));
    EXPECT_NO_THROW(pspin_problem(n, 1 + int(rng.next_below(3)), 1.0, 1.0));
    EXPECT_NO_THROW(perturbed_pspin_hf(n, 1 + int(rng.next_below(3)), rng.uniform(0, 2)));
  }
}
