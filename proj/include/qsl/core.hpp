#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsl/tolerances.hpp"

// Dense complex linear algebra for pure states and Hermitian operators:
// Bures distance, variances, commutators, Pauli strings and exact
// propagators. Everything is value-semantic and immutable after
// construction, so objects can be shared freely between threads.

namespace qsl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class Axis { X, Y, Z };

inline char axis_name(Axis a) {
  switch (a) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
  }
  return '?';
}

inline Axis axis_from_char(char c) {
  switch (c) {
    case 'x': return Axis::X;
    case 'y': return Axis::Y;
    case 'z': return Axis::Z;
  }
  throw std::invalid_argument(std::string("unknown Pauli axis '") + c + "'");
}

namespace detail {

inline void check_dim(Index d, const char* what) {
  if (d < 2) throw std::invalid_argument(std::string(what) + ": dimension must be >= 2");
  if (d > tol::max_dim)
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(d) +
                                " exceeds the dense cap of " + std::to_string(tol::max_dim));
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace detail

// Normalized pure state on a d-dimensional Hilbert space (d = 2^n for spins).
class StateVector {
 public:
  explicit StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
    detail::check_dim(amps_.size(), "StateVector");
    const double n = amps_.norm();
    if (std::abs(n - 1.0) > tol::state_norm)
      throw std::invalid_argument("StateVector: norm " + std::to_string(n) + " is not 1");
  }

  static StateVector normalized(Vector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw std::invalid_argument("StateVector: cannot normalize the zero vector");
    return StateVector(amplitudes / n);
  }

  static StateVector basis_state(Index dim, Index k) {
    detail::check_dim(dim, "StateVector");
    if (k < 0 || k >= dim) throw std::invalid_argument("basis_state: index out of range");
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return StateVector(std::move(v));
  }

  static StateVector equal_superposition(Index dim) {
    detail::check_dim(dim, "StateVector");
    Vector v = Vector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    return StateVector(std::move(v));
  }

  const Vector& amplitudes() const { return amps_; }
  Index dim() const { return amps_.size(); }

 private:
  Vector amps_;
};

// Square complex matrix with an optional Hermiticity guarantee checked at
// construction (max-entry deviation below tol::hermiticity).
class Operator {
 public:
  static Operator hermitian(Matrix entries) {
    validate_shape(entries);
    const double dev = detail::max_abs(entries - entries.adjoint());
    if (dev > tol::hermiticity)
      throw std::invalid_argument("Operator: matrix is not Hermitian (max deviation " +
                                  std::to_string(dev) + ")");
    return Operator(std::move(entries), true);
  }

  static Operator general(Matrix entries) {
    validate_shape(entries);
    return Operator(std::move(entries), false);
  }

  const Matrix& entries() const { return m_; }
  bool is_hermitian() const { return hermitian_; }
  Index dim() const { return m_.rows(); }

 private:
  Operator(Matrix m, bool h) : m_(std::move(m)), hermitian_(h) {}

  static void validate_shape(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("Operator: matrix must be square");
    detail::check_dim(m.rows(), "Operator");
  }

  Matrix m_;
  bool hermitian_;
};

// Eigenvalues ascending; eigenvectors as unitary column matrix.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Matrix eigenvectors;
};

inline Complex overlap(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("overlap: dimension mismatch (" + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()) + ")");
  return a.amplitudes().dot(b.amplitudes());
}

// D_B = sqrt(2 (1 - |<a|b>|)); a metric on pure states modulo global phase.
inline double bures_distance(const StateVector& a, const StateVector& b) {
  const double ov = std::min(1.0, std::abs(overlap(a, b)));
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - ov)));
}

inline EigenDecomposition hermitian_eig(const Operator& a) {
  if (!a.is_hermitian()) throw std::invalid_argument("hermitian_eig: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};

  const Matrix& q = out.eigenvectors;
  const double ortho = detail::max_abs(Matrix(q.adjoint() * q) - Matrix::Identity(a.dim(), a.dim()));
  if (ortho > tol::unitarity)
    throw std::runtime_error("hermitian_eig: eigenvector matrix not unitary");
  const Matrix recon = q * out.eigenvalues.asDiagonal() * q.adjoint();
  const double scale = std::max(1e-300, a.entries().norm());
  if ((recon - a.entries()).norm() > tol::eig_residual * scale)
    throw std::runtime_error("hermitian_eig: reconstruction residual too large");
  return out;
}

// Largest singular value; equals max |eigenvalue| for Hermitian input.
inline double spectral_norm(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("spectral_norm: matrix must be square");
  if (detail::max_abs(m - m.adjoint()) <= tol::hermiticity) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(m.adjoint() * m), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

inline Matrix matrix_exp_unitary(const EigenDecomposition& eig, double t) {
  const Index d = eig.eigenvalues.size();
  Vector phases(d);
  for (Index k = 0; k < d; ++k) phases(k) = std::exp(Complex(0.0, -t * eig.eigenvalues(k)));
  return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

// exp(-i t H) through the eigendecomposition; unitary to machine precision.
inline Matrix matrix_exp_unitary(const Operator& h, double t) {
  if (!h.is_hermitian()) throw std::invalid_argument("matrix_exp_unitary: operator is not Hermitian");
  if (!std::isfinite(t)) throw std::invalid_argument("matrix_exp_unitary: time must be finite");
  return matrix_exp_unitary(hermitian_eig(h), t);
}

inline double expectation(const StateVector& psi, const Operator& a) {
  if (psi.dim() != a.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  if (!a.is_hermitian()) throw std::invalid_argument("expectation: operator is not Hermitian");
  const Complex v = psi.amplitudes().dot(a.entries() * psi.amplitudes());
  if (std::abs(v.imag()) > 1e-10)
    throw std::runtime_error("expectation: imaginary residue " + std::to_string(v.imag()));
  return v.real();
}

// Var(A) = <A^2> - <A>^2, evaluated as ||(A - <A>)psi||^2 so the result is
// nonnegative in floating point as well.
inline double variance(const StateVector& psi, const Operator& a) {
  const double mean = expectation(psi, a);
  const Vector r = a.entries() * psi.amplitudes() - mean * psi.amplitudes();
  return r.squaredNorm();
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("commutator: shape mismatch");
  return a * b - b * a;
}

// Tensor product of single-site Paulis, identity elsewhere. Site 1 is the
// leftmost tensor factor (most significant bit of the basis index). Built
// directly as a signed permutation, one nonzero entry per column.
inline Operator pauli_string(int n_spins, const std::vector<std::pair<int, Axis>>& factors) {
  if (n_spins < 1 || n_spins > tol::max_spins)
    throw std::invalid_argument("pauli_string: spin count must be in [1, " +
                                std::to_string(tol::max_spins) + "]");
  std::vector<bool> seen(static_cast<std::size_t>(n_spins) + 1, false);
  for (const auto& [site, axis] : factors) {
    (void)axis;
    if (site < 1 || site > n_spins)
      throw std::invalid_argument("pauli_string: site index " + std::to_string(site) +
                                  " out of range [1, " + std::to_string(n_spins) + "]");
    if (seen[static_cast<std::size_t>(site)])
      throw std::invalid_argument("pauli_string: duplicate site index " + std::to_string(site));
    seen[static_cast<std::size_t>(site)] = true;
  }

  const Index d = Index(1) << n_spins;
  Index flip_mask = 0;
  for (const auto& [site, axis] : factors) {
    if (axis == Axis::X || axis == Axis::Y) flip_mask |= Index(1) << (n_spins - site);
  }

  Matrix m = Matrix::Zero(d, d);
  for (Index col = 0; col < d; ++col) {
    Complex phase(1.0, 0.0);
    for (const auto& [site, axis] : factors) {
      const bool bit = (col >> (n_spins - site)) & 1;  // 0 -> |0>, sigma_z = +1
      switch (axis) {
        case Axis::X: break;
        case Axis::Y: phase *= bit ? Complex(0.0, -1.0) : Complex(0.0, 1.0); break;
        case Axis::Z: phase *= bit ? -1.0 : 1.0; break;
      }
    }
    m(col ^ flip_mask, col) = phase;
  }
  return Operator::hermitian(std::move(m));
}

// --- propagator kernel ------------------------------------------------------

// y = exp(-i t H) x via a scaled Taylor series with rigorous term-decay
// stopping. norm_upper must upper-bound the spectral norm of H; the series
// is split into substeps so each partial exponent stays small. Used by the
// schedule propagators where a full eigendecomposition per segment would
// dominate the runtime; agreement with matrix_exp_unitary is covered by
// tests.
inline Vector apply_exp(const Matrix& h, double t, const Vector& x, double norm_upper) {
  const double scale = std::abs(t) * std::max(norm_upper, 0.0);
  const int substeps = std::max(1, static_cast<int>(std::ceil(scale / 2.0)));
  const Complex z(0.0, -t / substeps);

  Vector acc = x;
  Vector term(x.size());
  for (int s = 0; s < substeps; ++s) {
    term = acc;
    Vector result = acc;
    const double base = result.norm();
    for (int k = 1; k <= 64; ++k) {
      term = (z / static_cast<double>(k)) * (h * term).eval();
      result += term;
      if (term.norm() <= 1e-16 * std::max(base, result.norm())) break;
    }
    acc = result;
  }
  return acc;
}

}  // namespace qsl
