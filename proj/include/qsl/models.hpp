#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/tolerances.hpp"

// Hamiltonian families and graph structures: projector-based search
// problems, spin networks with pairwise Pauli couplings, transverse-field
// mixers, p-spin models and their single-vertex perturbation, plus
// ground-space extraction.

namespace qsl {

// Pairwise coupling h * sigma_a^(i) sigma_b^(j) between vertices i < j.
struct Coupling {
  int i;
  int j;
  Axis a;
  Axis b;
  double h;
};

class SpinGraph {
 public:
  SpinGraph(int n_vertices, std::vector<Coupling> couplings)
      : n_(n_vertices), couplings_(std::move(couplings)) {
    if (n_ < 1 || n_ > tol::max_spins)
      throw std::invalid_argument("SpinGraph: vertex count must be in [1, " +
                                  std::to_string(tol::max_spins) + "]");
    std::set<std::tuple<int, int, Axis, Axis>> keys;
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : couplings_) {
      if (c.i < 1 || c.j < 1 || c.i > n_ || c.j > n_)
        throw std::invalid_argument("SpinGraph: vertex index out of range");
      if (c.i >= c.j)
        throw std::invalid_argument("SpinGraph: couplings require i < j, got (" +
                                    std::to_string(c.i) + ", " + std::to_string(c.j) + ")");
      if (!keys.insert({c.i, c.j, c.a, c.b}).second)
        throw std::invalid_argument("SpinGraph: duplicate coupling (" + std::to_string(c.i) +
                                    ", " + std::to_string(c.j) + ", " + axis_name(c.a) + ", " +
                                    axis_name(c.b) + ")");
      pairs.insert({c.i, c.j});
    }
    edge_count_ = static_cast<int>(pairs.size());
  }

  int n_vertices() const { return n_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }

  // |E|: number of distinct vertex pairs carrying at least one coupling.
  int edge_count() const { return edge_count_; }

  double h_max() const {
    double m = 0.0;
    for (const auto& c : couplings_) m = std::max(m, std::abs(c.h));
    return m;
  }

 private:
  int n_;
  std::vector<Coupling> couplings_;
  int edge_count_;
};

struct MinDegreeVertex {
  int vertex;
  int degree;
};

// Vertex with the fewest distinct neighbors; ties broken by lowest index.
inline MinDegreeVertex min_degree_vertex(const SpinGraph& g) {
  std::vector<std::set<int>> nbrs(static_cast<std::size_t>(g.n_vertices()) + 1);
  for (const auto& c : g.couplings()) {
    nbrs[static_cast<std::size_t>(c.i)].insert(c.j);
    nbrs[static_cast<std::size_t>(c.j)].insert(c.i);
  }
  int best = 1;
  int best_deg = static_cast<int>(nbrs[1].size());
  for (int v = 2; v <= g.n_vertices(); ++v) {
    const int deg = static_cast<int>(nbrs[static_cast<std::size_t>(v)].size());
    if (deg < best_deg) {
      best = v;
      best_deg = deg;
    }
  }
  return {best, best_deg};
}

// Annealing instance: H(t) = f(t) H_i + g(t) H_f steering psi0 toward the
// ground space of H_f, with amplitude caps and the ground-space projector
// used for fidelity evaluation.
class AnnealingProblem {
 public:
  static AnnealingProblem validated(Operator h_i, Operator h_f, StateVector psi0,
                                    StateVector psi_t, Operator ground_projector, double f_max,
                                    double g_max) {
    const Index d = h_i.dim();
    if (h_f.dim() != d || psi0.dim() != d || psi_t.dim() != d || ground_projector.dim() != d)
      throw std::invalid_argument("AnnealingProblem: dimension mismatch");
    if (!(f_max > 0.0) || !(g_max > 0.0))
      throw std::invalid_argument("AnnealingProblem: amplitude caps must be positive");

    const auto eig_i = hermitian_eig(h_i);
    if (expectation(psi0, h_i) > eig_i.eigenvalues(0) + tol::ground_state)
      throw std::invalid_argument("AnnealingProblem: psi0 is not a ground state of H_i");

    const Matrix& p = ground_projector.entries();
    if (detail::max_abs(p - p.adjoint()) > tol::projector ||
        detail::max_abs(Matrix(p * p) - p) > tol::projector)
      throw std::invalid_argument("AnnealingProblem: ground projector is not an orthogonal projector");
    if ((p * psi_t.amplitudes() - psi_t.amplitudes()).norm() > tol::ground_state)
      throw std::invalid_argument("AnnealingProblem: target state not fixed by the ground projector");

    return AnnealingProblem(std::move(h_i), std::move(h_f), std::move(psi0), std::move(psi_t),
                            std::move(ground_projector), f_max, g_max);
  }

  const Operator& h_i() const { return h_i_; }
  const Operator& h_f() const { return h_f_; }
  const StateVector& psi0() const { return psi0_; }
  const StateVector& psi_t() const { return psi_t_; }
  const Operator& ground_projector() const { return p_; }
  double f_max() const { return f_max_; }
  double g_max() const { return g_max_; }
  Index dim() const { return h_i_.dim(); }

 private:
  AnnealingProblem(Operator h_i, Operator h_f, StateVector psi0, StateVector psi_t, Operator p,
                   double f_max, double g_max)
      : h_i_(std::move(h_i)),
        h_f_(std::move(h_f)),
        psi0_(std::move(psi0)),
        psi_t_(std::move(psi_t)),
        p_(std::move(p)),
        f_max_(f_max),
        g_max_(g_max) {}

  Operator h_i_;
  Operator h_f_;
  StateVector psi0_;
  StateVector psi_t_;
  Operator p_;
  double f_max_;
  double g_max_;
};

// Orthogonal projector onto the span of eigenvectors within
// degeneracy_tol * max(spectral range, 1) of the minimum eigenvalue.
inline Operator ground_space_projector(const Operator& h,
                                       double degeneracy_tol = tol::degeneracy_rel) {
  const auto eig = hermitian_eig(h);
  const Index d = h.dim();
  const double range = eig.eigenvalues(d - 1) - eig.eigenvalues(0);
  const double cutoff = eig.eigenvalues(0) + degeneracy_tol * std::max(range, 1.0);
  Index rank = 0;
  while (rank < d && eig.eigenvalues(rank) <= cutoff) ++rank;
  const Matrix q = eig.eigenvectors.leftCols(rank);
  Matrix p = q * q.adjoint();
  p = 0.5 * (p + p.adjoint().eval());
  return Operator::hermitian(std::move(p));
}

// Orthonormal basis columns of the same eigenspace.
inline Matrix ground_space_basis(const Operator& h, double degeneracy_tol = tol::degeneracy_rel) {
  const auto eig = hermitian_eig(h);
  const Index d = h.dim();
  const double range = eig.eigenvalues(d - 1) - eig.eigenvalues(0);
  const double cutoff = eig.eigenvalues(0) + degeneracy_tol * std::max(range, 1.0);
  Index rank = 0;
  while (rank < d && eig.eigenvalues(rank) <= cutoff) ++rank;
  return eig.eigenvectors.leftCols(rank);
}

// Search problem in plain dimension d: H_i = 1 - |psi0><psi0| with psi0 the
// equal superposition, H_f = 1 - sum over marked basis projectors. The
// target is the equal superposition over the marked states; the ground
// space of H_f is their span.
inline AnnealingProblem grover_problem_dim(Index dim, const std::vector<Index>& marked,
                                           double f_max, double g_max) {
  detail::check_dim(dim, "grover_problem");
  if (marked.empty()) throw std::invalid_argument("grover_problem: marked set is empty");
  std::set<Index> ms(marked.begin(), marked.end());
  if (*ms.begin() < 0 || *ms.rbegin() >= dim)
    throw std::invalid_argument("grover_problem: marked index out of range");

  const StateVector psi0 = StateVector::equal_superposition(dim);
  Matrix h_i = Matrix::Identity(dim, dim) - psi0.amplitudes() * psi0.amplitudes().adjoint();
  h_i = 0.5 * (h_i + h_i.adjoint().eval());

  Matrix proj = Matrix::Zero(dim, dim);
  Vector target = Vector::Zero(dim);
  for (Index k : ms) {
    proj(k, k) = 1.0;
    target(k) = 1.0;
  }
  const Matrix h_f = Matrix::Identity(dim, dim) - proj;

  return AnnealingProblem::validated(Operator::hermitian(std::move(h_i)),
                                     Operator::hermitian(h_f), psi0,
                                     StateVector::normalized(std::move(target)),
                                     Operator::hermitian(std::move(proj)), f_max, g_max);
}

inline AnnealingProblem grover_problem(int n_qubits, const std::vector<Index>& marked,
                                       double f_max, double g_max) {
  if (n_qubits < 1 || n_qubits > tol::max_spins)
    throw std::invalid_argument("grover_problem: qubit count must be in [1, " +
                                std::to_string(tol::max_spins) + "]");
  return grover_problem_dim(Index(1) << n_qubits, marked, f_max, g_max);
}

// H_f = N * sum over couplings h sigma_a^(i) sigma_b^(j). With
// normalization = nullopt the extensivity convention N = |V|/|E| is used.
inline Operator spin_network_hf(const SpinGraph& g,
                                std::optional<double> normalization = std::nullopt) {
  double norm;
  if (normalization.has_value()) {
    norm = *normalization;
  } else {
    if (g.edge_count() == 0)
      throw std::invalid_argument("spin_network_hf: auto normalization requires at least one edge");
    norm = static_cast<double>(g.n_vertices()) / static_cast<double>(g.edge_count());
  }
  const Index d = Index(1) << g.n_vertices();
  Matrix h = Matrix::Zero(d, d);
  for (const auto& c : g.couplings()) {
    const Operator term = pauli_string(g.n_vertices(), {{c.i, c.a}, {c.j, c.b}});
    h += (norm * c.h) * term.entries();
  }
  return Operator::hermitian(std::move(h));
}

// H_i = -sum_j sigma_x^(j); ground state |+>^n with energy -n.
inline Operator transverse_field_hi(int n_spins) {
  if (n_spins < 1 || n_spins > tol::max_spins)
    throw std::invalid_argument("transverse_field_hi: spin count must be in [1, " +
                                std::to_string(tol::max_spins) + "]");
  const Index d = Index(1) << n_spins;
  Matrix h = Matrix::Zero(d, d);
  for (int j = 1; j <= n_spins; ++j) h -= pauli_string(n_spins, {{j, Axis::X}}).entries();
  return Operator::hermitian(std::move(h));
}

namespace detail {

// Diagonal of M_z restricted to the first n_block spins of an n_total-spin
// register (basis index bit n_total - site, site 1 = most significant).
inline double mz_of_basis(Index x, int n_block, int n_total) {
  int pop = 0;
  for (int site = 1; site <= n_block; ++site) pop += static_cast<int>((x >> (n_total - site)) & 1);
  return static_cast<double>(n_block - 2 * pop);
}

inline Matrix total_sigma_x(int n_spins) {
  const Index d = Index(1) << n_spins;
  Matrix m = Matrix::Zero(d, d);
  for (int j = 1; j <= n_spins; ++j) m += pauli_string(n_spins, {{j, Axis::X}}).entries();
  return m;
}

}  // namespace detail

// H_i = n (1 - M_x/n), H_f = n (1 - M_z^p / n^p). Ground energies are 0;
// for even p the target manifold is the all-up/all-down pair and the
// all-up state is the stored representative.
inline AnnealingProblem pspin_problem(int n_spins, int p, double f_max, double g_max) {
  if (n_spins < 2 || n_spins > tol::max_spins)
    throw std::invalid_argument("pspin_problem: spin count must be in [2, " +
                                std::to_string(tol::max_spins) + "]");
  if (p < 1) throw std::invalid_argument("pspin_problem: p must be >= 1");

  const Index d = Index(1) << n_spins;
  const double n = static_cast<double>(n_spins);
  const Matrix h_i = n * Matrix::Identity(d, d) - detail::total_sigma_x(n_spins);

  Matrix h_f = Matrix::Zero(d, d);
  for (Index x = 0; x < d; ++x) {
    const double mz = detail::mz_of_basis(x, n_spins, n_spins);
    h_f(x, x) = n * (1.0 - std::pow(mz / n, p));
  }

  return AnnealingProblem::validated(Operator::hermitian(h_i), Operator::hermitian(h_f),
                                     StateVector::equal_superposition(d),
                                     StateVector::basis_state(d, 0),
                                     ground_space_projector(Operator::hermitian(h_f)), f_max,
                                     g_max);
}

// H'_f = n (1 - (M_z^p + lambda sigma_z^(n) sigma_z^(n+1)) / n^p) on
// n_block + 1 spins, with M_z over the first n_block spins.
inline Operator perturbed_pspin_hf(int n_block, int p, double lambda) {
  if (n_block < 2) throw std::invalid_argument("perturbed_pspin_hf: block size must be >= 2");
  if (n_block + 1 > tol::max_spins)
    throw std::invalid_argument("perturbed_pspin_hf: total spin count exceeds " +
                                std::to_string(tol::max_spins));
  if (p < 1) throw std::invalid_argument("perturbed_pspin_hf: p must be >= 1");

  const int n_total = n_block + 1;
  const Index d = Index(1) << n_total;
  const double n = static_cast<double>(n_block);
  Matrix h = Matrix::Zero(d, d);
  for (Index x = 0; x < d; ++x) {
    const double mz = detail::mz_of_basis(x, n_block, n_total);
    const double zn = ((x >> (n_total - n_block)) & 1) ? -1.0 : 1.0;
    const double zn1 = ((x >> (n_total - n_block - 1)) & 1) ? -1.0 : 1.0;
    h(x, x) = n * (1.0 - (std::pow(mz, p) + lambda * zn * zn1) / std::pow(n, p));
  }
  return Operator::hermitian(std::move(h));
}

// Perturbed p-spin instance with the mixer extended to the appended vertex:
// H_i = n' (1 - M_x/n') on n' = n_block + 1 spins.
inline AnnealingProblem perturbed_pspin_problem(int n_block, int p, double lambda, double f_max,
                                                double g_max) {
  const Operator h_f = perturbed_pspin_hf(n_block, p, lambda);
  const int n_total = n_block + 1;
  const Index d = Index(1) << n_total;
  const Matrix h_i =
      static_cast<double>(n_total) * Matrix::Identity(d, d) - detail::total_sigma_x(n_total);
  return AnnealingProblem::validated(Operator::hermitian(h_i), h_f,
                                     StateVector::equal_superposition(d),
                                     StateVector::basis_state(d, 0), ground_space_projector(h_f),
                                     f_max, g_max);
}

// Spin-network annealing instance: transverse-field mixer, graph final
// Hamiltonian, target a ground-space representative of H_f. For diagonal
// H_f the representative is the lowest-index minimal-energy basis state.
inline AnnealingProblem spin_network_problem(const SpinGraph& g,
                                             std::optional<double> normalization, double f_max,
                                             double g_max) {
  const Operator h_f = spin_network_hf(g, normalization);
  const Operator h_i = transverse_field_hi(g.n_vertices());
  const Index d = h_f.dim();
  const Operator p = ground_space_projector(h_f);

  StateVector psi_t = StateVector::basis_state(d, 0);
  const Matrix& m = h_f.entries();
  Matrix off = m;
  off.diagonal().setZero();
  if (detail::max_abs(off) <= tol::hermiticity) {
    Index best = 0;
    for (Index x = 1; x < d; ++x)
      if (m(x, x).real() < m(best, best).real() - 1e-12) best = x;
    psi_t = StateVector::basis_state(d, best);
  } else {
    psi_t = StateVector::normalized(ground_space_basis(h_f).col(0));
  }

  return AnnealingProblem::validated(h_i, h_f, StateVector::equal_superposition(d), psi_t, p,
                                     f_max, g_max);
}

}  // namespace qsl
