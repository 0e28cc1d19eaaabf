#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/models.hpp"
#include "qsl/tolerances.hpp"

// Exact simulation of piecewise-constant annealing schedules and QAOA
// circuits, plus the fidelity and integral functionals the bounds are
// tested against.

namespace qsl {

struct Segment {
  double dt;
  double f;
  double g;
};

// Piecewise-constant controls with per-segment durations and amplitude caps.
// Negative amplitudes are allowed; negative durations are not.
class Schedule {
 public:
  Schedule(std::vector<Segment> segments, double f_cap, double g_cap)
      : segments_(std::move(segments)), f_cap_(f_cap), g_cap_(g_cap) {
    if (segments_.empty()) throw std::invalid_argument("Schedule: no segments");
    if (f_cap_ < 0.0 || g_cap_ < 0.0) throw std::invalid_argument("Schedule: caps must be >= 0");
    double total = 0.0;
    for (const auto& s : segments_) {
      if (!(s.dt > 0.0)) throw std::invalid_argument("Schedule: segment durations must be > 0");
      if (std::abs(s.f) > f_cap_ + tol::cap_slack || std::abs(s.g) > g_cap_ + tol::cap_slack)
        throw std::invalid_argument("Schedule: amplitude exceeds its cap");
      total += s.dt;
    }
    if (!(total > 0.0)) throw std::invalid_argument("Schedule: total duration must be > 0");
    total_ = total;
  }

  static Schedule uniform(double total_time, const std::vector<double>& f,
                          const std::vector<double>& g, double f_cap, double g_cap) {
    if (f.size() != g.size() || f.empty())
      throw std::invalid_argument("Schedule::uniform: amplitude lists must be nonempty and equal length");
    if (!(total_time > 0.0)) throw std::invalid_argument("Schedule::uniform: total time must be > 0");
    std::vector<Segment> segs;
    segs.reserve(f.size());
    const double dt = total_time / static_cast<double>(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) segs.push_back({dt, f[k], g[k]});
    return Schedule(std::move(segs), f_cap, g_cap);
  }

  const std::vector<Segment>& segments() const { return segments_; }
  double f_cap() const { return f_cap_; }
  double g_cap() const { return g_cap_; }
  double total_duration() const { return total_; }

 private:
  std::vector<Segment> segments_;
  double f_cap_;
  double g_cap_;
  double total_;
};

struct Layer {
  double beta;
  double gamma;
};

// QAOA angle list; the periodic convention |beta|, |gamma| <= 2*pi is
// checked when enforce_periodic is set.
class QaoaAngles {
 public:
  explicit QaoaAngles(std::vector<Layer> layers, bool enforce_periodic = false)
      : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("QaoaAngles: at least one layer required");
    if (enforce_periodic) {
      for (const auto& l : layers_) {
        if (std::abs(l.beta) > 2.0 * M_PI + tol::cap_slack ||
            std::abs(l.gamma) > 2.0 * M_PI + tol::cap_slack)
          throw std::invalid_argument("QaoaAngles: angle outside the periodic window [0, 2*pi]");
      }
    }
  }

  const std::vector<Layer>& layers() const { return layers_; }
  int depth() const { return static_cast<int>(layers_.size()); }

 private:
  std::vector<Layer> layers_;
};

// psi(T) = prod_k exp(-i dt_k (f_k H_i + g_k H_f)) psi0, applied in time
// order. Exactness against the eigendecomposition route and norm
// preservation are covered by tests.
inline StateVector propagate_schedule(const AnnealingProblem& problem, const Schedule& s) {
  const Matrix& hi = problem.h_i().entries();
  const Matrix& hf = problem.h_f().entries();
  // cheap upper bounds on the spectral norms, used to pick substep counts
  const double ni = hi.cwiseAbs().rowwise().sum().maxCoeff();
  const double nf = hf.cwiseAbs().rowwise().sum().maxCoeff();

  Vector psi = problem.psi0().amplitudes();
  Matrix h_seg(hi.rows(), hi.cols());
  for (const auto& seg : s.segments()) {
    h_seg = seg.f * hi + seg.g * hf;
    psi = apply_exp(h_seg, seg.dt, psi, std::abs(seg.f) * ni + std::abs(seg.g) * nf);
  }

  const double drift = std::abs(psi.norm() - 1.0);
  if (drift > 1e-9)
    throw std::runtime_error("propagate_schedule: norm drift " + std::to_string(drift));
  return StateVector::normalized(std::move(psi));
}

namespace detail {

// One-time eigendecompositions allowing O(d^2) application of
// exp(-i theta H) for arbitrary angles.
struct GateCache {
  EigenDecomposition hi;
  EigenDecomposition hf;

  explicit GateCache(const AnnealingProblem& p)
      : hi(hermitian_eig(p.h_i())), hf(hermitian_eig(p.h_f())) {}

  Vector apply(const EigenDecomposition& e, double theta, const Vector& x) const {
    Vector c = e.eigenvectors.adjoint() * x;
    for (Index k = 0; k < c.size(); ++k)
      c(k) *= std::exp(Complex(0.0, -theta * e.eigenvalues(k)));
    return e.eigenvectors * c;
  }

  Vector mixer(double beta, const Vector& x) const { return apply(hi, beta, x); }
  Vector phase(double gamma, const Vector& x) const { return apply(hf, gamma, x); }
};

}  // namespace detail

// psi = prod_j exp(-i beta_j H_i) exp(-i gamma_j H_f) psi0, phase separator
// first within each layer (a leading mixer gate would act on an H_i
// eigenstate and reduce to a global phase).
inline StateVector qaoa_evolve(const AnnealingProblem& problem, const QaoaAngles& angles) {
  detail::GateCache cache(problem);
  Vector psi = problem.psi0().amplitudes();
  for (const auto& l : angles.layers()) {
    psi = cache.phase(l.gamma, psi);
    psi = cache.mixer(l.beta, psi);
  }
  const double drift = std::abs(psi.norm() - 1.0);
  if (drift > 1e-9) throw std::runtime_error("qaoa_evolve: norm drift " + std::to_string(drift));
  return StateVector::normalized(std::move(psi));
}

// Annealing runtime of a QAOA circuit: sum_j |beta_j| + |gamma_j|.
inline double qaoa_runtime(const QaoaAngles& angles) {
  double t = 0.0;
  for (const auto& l : angles.layers()) t += std::abs(l.beta) + std::abs(l.gamma);
  return t;
}

// The bang-bang schedule equivalent to a QAOA circuit: alternating segments
// (|gamma_j|, f = 0, g = sign(gamma_j)) and (|beta_j|, f = sign(beta_j), g = 0)
// in gate order. Angles of negligible magnitude contribute identity gates
// and are skipped.
inline Schedule bang_bang_schedule(const QaoaAngles& angles) {
  std::vector<Segment> segs;
  for (const auto& l : angles.layers()) {
    if (std::abs(l.gamma) > 0.0) segs.push_back({std::abs(l.gamma), 0.0, l.gamma > 0 ? 1.0 : -1.0});
    if (std::abs(l.beta) > 0.0) segs.push_back({std::abs(l.beta), l.beta > 0 ? 1.0 : -1.0, 0.0});
  }
  if (segs.empty())
    throw std::invalid_argument("bang_bang_schedule: all angles vanish, no schedule to build");
  return Schedule(std::move(segs), 1.0, 1.0);
}

// F = <psi|P|psi> with P an orthogonal projector.
inline double fidelity(const StateVector& state, const Operator& projector) {
  if (state.dim() != projector.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Matrix& p = projector.entries();
  if (detail::max_abs(p - p.adjoint()) > tol::projector ||
      detail::max_abs(Matrix(p * p) - p) > tol::projector)
    throw std::invalid_argument("fidelity: operator is not an orthogonal projector");
  const double f = (p * state.amplitudes()).squaredNorm();  // <psi|P^2|psi> = <psi|P|psi>
  if (f < -1e-10 || f > 1.0 + 1e-10) throw std::runtime_error("fidelity: value outside [0, 1]");
  return std::min(1.0, std::max(0.0, f));
}

inline double fidelity_error(const StateVector& state, const Operator& projector) {
  return 1.0 - fidelity(state, projector);
}

// sum_k dt_k sqrt(Var_psi0(f_k H_i + g_k H_f)); exact for piecewise-constant
// controls since the integrand is constant on each segment.
inline double integrated_variance(const AnnealingProblem& problem, const Schedule& s) {
  double acc = 0.0;
  for (const auto& seg : s.segments()) {
    const Operator h =
        Operator::hermitian(seg.f * problem.h_i().entries() + seg.g * problem.h_f().entries());
    acc += seg.dt * std::sqrt(variance(problem.psi0(), h));
  }
  return acc;
}

}  // namespace qsl
