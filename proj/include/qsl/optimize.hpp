#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "qsl/rng.hpp"
#include "qsl/tolerances.hpp"

// BFGS-based fidelity maximization over piecewise-constant schedules and
// QAOA angles, deterministic multi-start management, and the minimal
// preparation-time search.

namespace qsl {

struct OptimizerConfig {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double finite_difference_step = 1e-6;
  int restarts = 100;
  std::uint64_t seed = 1;
  int n_segments = 100;
  double init_amplitude_scale = 1.0;
  int threads = 0;  // 0 = hardware concurrency
  // optional early stop once the objective falls to this value (NaN = off)
  double objective_goal = std::numeric_limits<double>::quiet_NaN();

  void validate() const {
    if (max_iterations < 1 || restarts < 1 || n_segments < 1)
      throw std::invalid_argument("OptimizerConfig: counts must be positive");
    if (!(gradient_tolerance > 0.0) || !(finite_difference_step > 0.0) ||
        !(init_amplitude_scale > 0.0))
      throw std::invalid_argument("OptimizerConfig: tolerances and scales must be positive");
  }

  int effective_threads() const {
    if (threads > 0) return threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }
};

// --- BFGS ---------------------------------------------------------------------

struct BfgsOutcome {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool aborted = false;
  std::string diagnostic;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Quasi-Newton minimization with inverse-Hessian BFGS updates and an
// Armijo backtracking line search. Gradients default to central finite
// differences with cfg.finite_difference_step; callers may supply an
// equivalent gradient routine (the schedule optimizers use one that reuses
// cached partial propagators).
inline BfgsOutcome bfgs_minimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                                 const OptimizerConfig& cfg, const GradientFn& gradient = {}) {
  cfg.validate();
  const auto fd_gradient = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = cfg.finite_difference_step;
      probe(i) = x(i) + h;
      const double fp = objective(probe);
      probe(i) = x(i) - h;
      const double fm = objective(probe);
      probe(i) = x(i);
      g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
  };
  const auto grad = gradient ? gradient : GradientFn(fd_gradient);

  BfgsOutcome out;
  out.x = x0;
  out.f = objective(out.x);
  if (!std::isfinite(out.f)) {
    out.aborted = true;
    out.diagnostic = "objective not finite at the initial point";
    return out;
  }

  const Eigen::Index n = x0.size();
  Eigen::VectorXd g = grad(out.x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  const double c1 = 1e-4;
  const bool has_goal = std::isfinite(cfg.objective_goal);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it;
    if (g.norm() < cfg.gradient_tolerance || (has_goal && out.f <= cfg.objective_goal)) {
      out.converged = true;
      return out;
    }

    Eigen::VectorXd p = -(h_inv * g);
    double gp = g.dot(p);
    if (gp > -1e-18) {  // not a descent direction: reset curvature
      h_inv.setIdentity();
      p = -g;
      gp = g.dot(p);
      if (gp > -1e-18) {
        out.converged = true;  // gradient numerically zero
        return out;
      }
    }

    double alpha = 1.0;
    double f_new = out.f;
    bool accepted = false;
    Eigen::VectorXd x_new = out.x;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = out.x + alpha * p;
      f_new = objective(x_new);
      if (!std::isfinite(f_new)) {
        out.aborted = true;
        out.diagnostic = "objective not finite during line search";
        return out;
      }
      if (f_new <= out.f + c1 * alpha * gp) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return out;  // line search stalled at machine precision

    Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - out.x;
    const Eigen::VectorXd y = g_new - g;
    const double ys = y.dot(s);
    if (ys > 1e-12 * y.norm() * s.norm()) {
      const double rho = 1.0 / ys;
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      h_inv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
    }
    out.x = x_new;
    out.f = f_new;
    g = g_new;
  }
  out.iterations = cfg.max_iterations;
  return out;
}

// --- shared optimization plumbing ----------------------------------------------

namespace detail {

inline Matrix projector_column_basis(const Operator& projector) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(projector.entries());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("projector_column_basis: eigensolver failed");
  Index rank = 0;
  for (Index k = 0; k < solver.eigenvalues().size(); ++k)
    if (solver.eigenvalues()(k) > 0.5) ++rank;
  return solver.eigenvectors().rightCols(rank);
}

inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// atanh with the argument clamped away from +-1; initial amplitude draws at
// the cap would otherwise map to infinity
inline double safe_atanh(double ratio) {
  const double r = std::clamp(ratio, -0.999999999, 0.999999999);
  return std::atanh(std::clamp(r, -0.995, 0.995));
}

// Piecewise-constant schedule objective with cached partial propagators for
// single-segment finite differences. Thread-safe: all members immutable,
// scratch lives on the caller's stack.
class ScheduleWork {
 public:
  ScheduleWork(const AnnealingProblem& p, double total_time, int segments, double f_scale,
               double g_scale)
      : hi_(p.h_i().entries()),
        hf_(p.h_f().entries()),
        norm_i_(hi_.cwiseAbs().rowwise().sum().maxCoeff()),
        norm_f_(hf_.cwiseAbs().rowwise().sum().maxCoeff()),
        psi0_(p.psi0().amplitudes()),
        ground_(projector_column_basis(p.ground_projector())),
        segments_(segments),
        dt_(total_time / segments),
        f_scale_(f_scale),
        g_scale_(g_scale) {}

  int n_params() const { return 2 * segments_; }
  int segments() const { return segments_; }
  double f_scale() const { return f_scale_; }
  double g_scale() const { return g_scale_; }

  void physical_amplitudes(const Eigen::VectorXd& x, std::vector<double>& f,
                           std::vector<double>& g) const {
    f.resize(static_cast<std::size_t>(segments_));
    g.resize(static_cast<std::size_t>(segments_));
    for (int k = 0; k < segments_; ++k) {
      f[static_cast<std::size_t>(k)] = f_scale_ * std::tanh(x(2 * k));
      g[static_cast<std::size_t>(k)] = g_scale_ * std::tanh(x(2 * k + 1));
    }
  }

  Eigen::VectorXd params_from_amplitudes(const std::vector<double>& f,
                                         const std::vector<double>& g) const {
    Eigen::VectorXd x(2 * segments_);
    for (int k = 0; k < segments_; ++k) {
      x(2 * k) = safe_atanh(f[static_cast<std::size_t>(k)] / f_scale_);
      x(2 * k + 1) = safe_atanh(g[static_cast<std::size_t>(k)] / g_scale_);
    }
    return x;
  }

  double objective(const Eigen::VectorXd& x) const {
    std::vector<double> f, g;
    physical_amplitudes(x, f, g);
    Vector psi = psi0_;
    for (int k = 0; k < segments_; ++k)
      psi = step(f[static_cast<std::size_t>(k)], g[static_cast<std::size_t>(k)], dt_, psi);
    return 1.0 - (ground_.adjoint() * psi).squaredNorm();
  }

  // Central finite differences; each perturbed evaluation reuses the
  // unperturbed forward states and adjoint ground columns so only one
  // segment propagator is rebuilt per probe.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double fd_step) const {
    std::vector<double> f, g;
    physical_amplitudes(x, f, g);
    const int k_count = segments_;
    const Index rank = ground_.cols();

    std::vector<Vector> fwd(static_cast<std::size_t>(k_count) + 1);
    fwd[0] = psi0_;
    for (int k = 0; k < k_count; ++k)
      fwd[static_cast<std::size_t>(k) + 1] =
          step(f[static_cast<std::size_t>(k)], g[static_cast<std::size_t>(k)], dt_,
               fwd[static_cast<std::size_t>(k)]);

    // bwd[r][k] = adjoint-propagated ground column r just after segment k
    std::vector<std::vector<Vector>> bwd(static_cast<std::size_t>(rank));
    for (Index r = 0; r < rank; ++r) {
      auto& chain = bwd[static_cast<std::size_t>(r)];
      chain.assign(static_cast<std::size_t>(k_count) + 1, Vector());
      chain[static_cast<std::size_t>(k_count)] = ground_.col(r);
      for (int k = k_count; k >= 1; --k)
        chain[static_cast<std::size_t>(k) - 1] =
            step(f[static_cast<std::size_t>(k - 1)], g[static_cast<std::size_t>(k - 1)], -dt_,
                 chain[static_cast<std::size_t>(k)]);
    }

    const auto eps_with_segment = [&](int k, double fk, double gk) {
      const Vector y = step(fk, gk, dt_, fwd[static_cast<std::size_t>(k)]);
      double fid = 0.0;
      for (Index r = 0; r < rank; ++r)
        fid += std::norm(Complex(bwd[static_cast<std::size_t>(r)][static_cast<std::size_t>(k) + 1]
                                     .dot(y)));
      return 1.0 - fid;
    };

    Eigen::VectorXd grad(2 * k_count);
    for (int k = 0; k < k_count; ++k) {
      const double uf = x(2 * k);
      const double ug = x(2 * k + 1);
      const double gk = g[static_cast<std::size_t>(k)];
      const double fk = f[static_cast<std::size_t>(k)];
      const double fp = eps_with_segment(k, f_scale_ * std::tanh(uf + fd_step), gk);
      const double fm = eps_with_segment(k, f_scale_ * std::tanh(uf - fd_step), gk);
      grad(2 * k) = (fp - fm) / (2.0 * fd_step);
      const double gp = eps_with_segment(k, fk, g_scale_ * std::tanh(ug + fd_step));
      const double gm = eps_with_segment(k, fk, g_scale_ * std::tanh(ug - fd_step));
      grad(2 * k + 1) = (gp - gm) / (2.0 * fd_step);
    }
    return grad;
  }

 private:
  Vector step(double f, double g, double dt, const Vector& in) const {
    const Matrix h = f * hi_ + g * hf_;
    return apply_exp(h, dt, in, std::abs(f) * norm_i_ + std::abs(g) * norm_f_);
  }

  Matrix hi_;
  Matrix hf_;
  double norm_i_;
  double norm_f_;
  Vector psi0_;
  Matrix ground_;
  int segments_;
  double dt_;
  double f_scale_;
  double g_scale_;
};

// QAOA objective over 2L angles through precomputed eigendecompositions of
// both Hamiltonians; exp(-i theta H) costs two dense matrix-vector products
// per gate regardless of the angle.
class QaoaWork {
 public:
  QaoaWork(const AnnealingProblem& p, int layers)
      : eig_i_(hermitian_eig(p.h_i())),
        eig_f_(hermitian_eig(p.h_f())),
        psi0_(p.psi0().amplitudes()),
        ground_(projector_column_basis(p.ground_projector())),
        layers_(layers) {}

  int n_params() const { return 2 * layers_; }
  int layers() const { return layers_; }
  static constexpr double angle_scale = 2.0 * M_PI;  // periodic convention window

  std::vector<Layer> physical_angles(const Eigen::VectorXd& x) const {
    std::vector<Layer> out(static_cast<std::size_t>(layers_));
    for (int j = 0; j < layers_; ++j) {
      out[static_cast<std::size_t>(j)].beta = angle_scale * std::tanh(x(2 * j));
      out[static_cast<std::size_t>(j)].gamma = angle_scale * std::tanh(x(2 * j + 1));
    }
    return out;
  }

  Eigen::VectorXd params_from_angles(const std::vector<Layer>& layers) const {
    Eigen::VectorXd x(2 * static_cast<Eigen::Index>(layers.size()));
    for (std::size_t j = 0; j < layers.size(); ++j) {
      x(2 * static_cast<Eigen::Index>(j)) = safe_atanh(layers[j].beta / angle_scale);
      x(2 * static_cast<Eigen::Index>(j) + 1) = safe_atanh(layers[j].gamma / angle_scale);
    }
    return x;
  }

  double objective(const Eigen::VectorXd& x) const {
    const auto angles = physical_angles(x);
    Vector psi = psi0_;
    for (const auto& l : angles) {
      psi = apply(eig_f_, l.gamma, psi);
      psi = apply(eig_i_, l.beta, psi);
    }
    return 1.0 - (ground_.adjoint() * psi).squaredNorm();
  }

  // Exact angle period of exp(-i theta H): when every eigenvalue gap is an
  // integer multiple of a base gap delta, the gate is 2 pi / delta
  // periodic. Returns +inf when no exact period exists.
  static double exact_gate_period(const Eigen::VectorXd& eigs) {
    const double e0 = eigs.minCoeff();
    double delta = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < eigs.size(); ++k) {
      const double gap = eigs(k) - e0;
      if (gap > 1e-8) delta = std::min(delta, gap);
    }
    if (!std::isfinite(delta)) return std::numeric_limits<double>::infinity();
    for (Index k = 0; k < eigs.size(); ++k) {
      const double ratio = (eigs(k) - e0) / delta;
      if (std::abs(ratio - std::round(ratio)) > 1e-6)
        return std::numeric_limits<double>::infinity();
    }
    return 2.0 * M_PI / delta;
  }

  // Fold each angle by the gate's exact period toward the smallest
  // magnitude; the circuit unitary is unchanged up to a global phase.
  std::vector<Layer> fold_angles(std::vector<Layer> angles) const {
    const double pb = exact_gate_period(eig_i_.eigenvalues);
    const double pg = exact_gate_period(eig_f_.eigenvalues);
    for (auto& l : angles) {
      if (std::isfinite(pb)) l.beta -= pb * std::round(l.beta / pb);
      if (std::isfinite(pg)) l.gamma -= pg * std::round(l.gamma / pg);
    }
    return angles;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double fd_step) const {
    const auto angles = physical_angles(x);
    const int gates = 2 * layers_;
    const Index rank = ground_.cols();

    // gate order per layer: phase separator (gamma, H_f) then mixer (beta, H_i)
    const auto gate_eig = [&](int q) -> const EigenDecomposition& {
      return (q % 2 == 0) ? eig_f_ : eig_i_;
    };
    const auto gate_angle = [&](int q) {
      return (q % 2 == 0) ? angles[static_cast<std::size_t>(q / 2)].gamma
                          : angles[static_cast<std::size_t>(q / 2)].beta;
    };

    std::vector<Vector> fwd(static_cast<std::size_t>(gates) + 1);
    fwd[0] = psi0_;
    for (int q = 0; q < gates; ++q)
      fwd[static_cast<std::size_t>(q) + 1] =
          apply(gate_eig(q), gate_angle(q), fwd[static_cast<std::size_t>(q)]);

    std::vector<std::vector<Vector>> bwd(static_cast<std::size_t>(rank));
    for (Index r = 0; r < rank; ++r) {
      auto& chain = bwd[static_cast<std::size_t>(r)];
      chain.assign(static_cast<std::size_t>(gates) + 1, Vector());
      chain[static_cast<std::size_t>(gates)] = ground_.col(r);
      for (int q = gates; q >= 1; --q)
        chain[static_cast<std::size_t>(q) - 1] =
            apply(gate_eig(q - 1), -gate_angle(q - 1), chain[static_cast<std::size_t>(q)]);
    }

    const auto eps_with_gate = [&](int q, double theta) {
      const Vector y = apply(gate_eig(q), theta, fwd[static_cast<std::size_t>(q)]);
      double fid = 0.0;
      for (Index r = 0; r < rank; ++r)
        fid += std::norm(Complex(bwd[static_cast<std::size_t>(r)][static_cast<std::size_t>(q) + 1]
                                     .dot(y)));
      return 1.0 - fid;
    };

    Eigen::VectorXd grad(2 * layers_);
    for (int q = 0; q < gates; ++q) {
      // parameter slot: x(2j) = beta_j (odd gates), x(2j+1) = gamma_j (even gates)
      const int slot = (q % 2 == 0) ? (q + 1) : (q - 1);
      const double u = x(slot);
      const double fp = eps_with_gate(q, angle_scale * std::tanh(u + fd_step));
      const double fm = eps_with_gate(q, angle_scale * std::tanh(u - fd_step));
      grad(slot) = (fp - fm) / (2.0 * fd_step);
    }
    return grad;
  }

 private:
  static Vector apply(const EigenDecomposition& e, double theta, const Vector& v) {
    Vector c = e.eigenvectors.adjoint() * v;
    for (Index k = 0; k < c.size(); ++k)
      c(k) *= std::exp(Complex(0.0, -theta * e.eigenvalues(k)));
    return e.eigenvectors * c;
  }

  EigenDecomposition eig_i_;
  EigenDecomposition eig_f_;
  Vector psi0_;
  Matrix ground_;
  int layers_;
};

}  // namespace detail

// --- results -------------------------------------------------------------------

struct OptimizationResult {
  double best_objective = std::numeric_limits<double>::infinity();  // epsilon = 1 - F
  Eigen::VectorXd best_parameters;         // physical amplitudes (f,g per segment) or angles
  std::vector<double> per_restart_values;  // final epsilon per restart (inf if aborted)
  std::vector<double> per_restart_runtimes;  // QAOA mode: sum |angles| per restart
  std::vector<std::vector<Layer>> per_restart_angles;  // QAOA mode, period-folded
  int iterations_used = 0;
  bool converged = false;
  int best_restart = -1;
  int aborted_restarts = 0;
  bool f_cap_binding = false;  // soft-unconstrained mode: some |f_k| > 0.9 * cap
  std::optional<Schedule> schedule;
  std::optional<QaoaAngles> angles;

  double best_fidelity() const { return 1.0 - best_objective; }
  double average_objective() const {
    double acc = 0.0;
    int n = 0;
    for (double v : per_restart_values)
      if (std::isfinite(v)) {
        acc += v;
        ++n;
      }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : acc / n;
  }
};

// Minimizes the fidelity error over per-segment amplitudes (f_k, g_k) at
// fixed total time T with dt = T / n_segments. Amplitudes are kept inside
// their caps by the smooth reparameterization a = cap * tanh(u); with
// unconstrained_f the f cap is softened to 20 * f_max and a report flag is
// raised whenever the best schedule presses against it. Restart r draws
// its initial amplitudes uniformly from [-scale, +scale] with the seed
// derived as hash(seed, r), so results are independent of execution order.
inline OptimizationResult optimize_schedule(
    const AnnealingProblem& problem, double total_time, const OptimizerConfig& cfg,
    bool unconstrained_f = false,
    const std::optional<std::pair<std::vector<double>, std::vector<double>>>& warm_start =
        std::nullopt) {
  cfg.validate();
  if (!(total_time > 0.0)) throw std::invalid_argument("optimize_schedule: T must be positive");

  const double f_cap = unconstrained_f ? 20.0 * problem.f_max() : problem.f_max();
  const detail::ScheduleWork work(problem, total_time, cfg.n_segments, f_cap, problem.g_max());

  std::vector<BfgsOutcome> outcomes(static_cast<std::size_t>(cfg.restarts));
  detail::parallel_for(cfg.restarts, cfg.effective_threads(), [&](int r) {
    Eigen::VectorXd x0(work.n_params());
    if (r == 0 && warm_start.has_value()) {
      x0 = work.params_from_amplitudes(warm_start->first, warm_start->second);
    } else {
      SplitMix64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
      std::vector<double> f(static_cast<std::size_t>(cfg.n_segments));
      std::vector<double> g(static_cast<std::size_t>(cfg.n_segments));
      for (int k = 0; k < cfg.n_segments; ++k) {
        f[static_cast<std::size_t>(k)] =
            rng.uniform(-cfg.init_amplitude_scale, cfg.init_amplitude_scale);
        g[static_cast<std::size_t>(k)] =
            rng.uniform(-cfg.init_amplitude_scale, cfg.init_amplitude_scale);
      }
      x0 = work.params_from_amplitudes(f, g);
    }
    outcomes[static_cast<std::size_t>(r)] = bfgs_minimize(
        [&work](const Eigen::VectorXd& x) { return work.objective(x); }, x0, cfg,
        [&work, &cfg](const Eigen::VectorXd& x) {
          return work.gradient(x, cfg.finite_difference_step);
        });
  });

  OptimizationResult res;
  res.per_restart_values.reserve(outcomes.size());
  for (int r = 0; r < cfg.restarts; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    res.per_restart_values.push_back(o.aborted ? std::numeric_limits<double>::infinity() : o.f);
    if (o.aborted) ++res.aborted_restarts;
    if (res.best_restart < 0 || res.per_restart_values.back() < res.best_objective) {
      res.best_objective = res.per_restart_values.back();
      res.best_restart = r;
    }
  }
  const auto& best = outcomes[static_cast<std::size_t>(res.best_restart)];
  res.iterations_used = best.iterations;
  res.converged = best.converged && !best.aborted;

  std::vector<double> f, g;
  work.physical_amplitudes(best.x, f, g);
  res.best_parameters.resize(2 * cfg.n_segments);
  for (int k = 0; k < cfg.n_segments; ++k) {
    res.best_parameters(2 * k) = f[static_cast<std::size_t>(k)];
    res.best_parameters(2 * k + 1) = g[static_cast<std::size_t>(k)];
    if (unconstrained_f && std::abs(f[static_cast<std::size_t>(k)]) > 0.9 * f_cap)
      res.f_cap_binding = true;
  }
  res.schedule = Schedule::uniform(total_time, f, g, f_cap, problem.g_max());
  return res;
}

// Maximizes the preparation fidelity over 2L angles with the bang-bang
// parameterization; angles live in the periodic window via
// theta = 2 pi tanh(u) and start uniformly in [-pi, pi].
inline OptimizationResult optimize_qaoa(
    const AnnealingProblem& problem, int layers, const OptimizerConfig& cfg,
    const std::optional<std::vector<Layer>>& warm_start = std::nullopt) {
  cfg.validate();
  if (layers < 1) throw std::invalid_argument("optimize_qaoa: layer count must be >= 1");

  const detail::QaoaWork work(problem, layers);

  std::vector<BfgsOutcome> outcomes(static_cast<std::size_t>(cfg.restarts));
  detail::parallel_for(cfg.restarts, cfg.effective_threads(), [&](int r) {
    Eigen::VectorXd x0(work.n_params());
    if (r == 0 && warm_start.has_value()) {
      std::vector<Layer> padded = *warm_start;
      padded.resize(static_cast<std::size_t>(layers), Layer{0.0, 0.0});
      x0 = work.params_from_angles(padded);
    } else {
      SplitMix64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
      std::vector<Layer> init(static_cast<std::size_t>(layers));
      for (auto& l : init) {
        l.beta = rng.uniform(-M_PI, M_PI);
        l.gamma = rng.uniform(-M_PI, M_PI);
      }
      x0 = work.params_from_angles(init);
    }
    outcomes[static_cast<std::size_t>(r)] = bfgs_minimize(
        [&work](const Eigen::VectorXd& x) { return work.objective(x); }, x0, cfg,
        [&work, &cfg](const Eigen::VectorXd& x) {
          return work.gradient(x, cfg.finite_difference_step);
        });
  });

  OptimizationResult res;
  for (int r = 0; r < cfg.restarts; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    const double value = o.aborted ? std::numeric_limits<double>::infinity() : o.f;
    res.per_restart_values.push_back(value);
    if (o.aborted) {
      ++res.aborted_restarts;
      res.per_restart_runtimes.push_back(std::numeric_limits<double>::infinity());
      res.per_restart_angles.emplace_back();
    } else {
      const auto angles = work.fold_angles(work.physical_angles(o.x));
      double rt = 0.0;
      for (const auto& l : angles) rt += std::abs(l.beta) + std::abs(l.gamma);
      res.per_restart_runtimes.push_back(rt);
      res.per_restart_angles.push_back(angles);
    }
    if (res.best_restart < 0 || value < res.best_objective) {
      res.best_objective = value;
      res.best_restart = r;
    }
  }
  const auto& best = outcomes[static_cast<std::size_t>(res.best_restart)];
  res.iterations_used = best.iterations;
  res.converged = best.converged && !best.aborted;

  const auto angles = work.fold_angles(work.physical_angles(best.x));
  res.best_parameters.resize(2 * layers);
  for (int j = 0; j < layers; ++j) {
    res.best_parameters(2 * j) = angles[static_cast<std::size_t>(j)].beta;
    res.best_parameters(2 * j + 1) = angles[static_cast<std::size_t>(j)].gamma;
  }
  res.angles = QaoaAngles(angles, true);
  return res;
}

// Shrinks the runtime sum |beta| + |gamma| of an already-succeeding QAOA
// circuit by a penalized descent (folded runtime plus a quadratic penalty
// above eps_keep = half the failure threshold). Returns the refined angles
// only when they still meet the threshold.
inline std::optional<QaoaAngles> polish_qaoa_runtime(const AnnealingProblem& problem,
                                                     const std::vector<Layer>& start,
                                                     double eps_threshold,
                                                     int max_iterations = 120) {
  const detail::QaoaWork work(problem, static_cast<int>(start.size()));
  const double eps_keep = 0.5 * eps_threshold;
  const double mu = 1e4 / (eps_threshold * eps_threshold);

  // smoothed |theta| (sqrt(theta^2 + delta^2)) keeps BFGS moving through the
  // kinks of the folded runtime
  constexpr double smooth = 1e-3;
  const auto folded_runtime = [&work](const std::vector<Layer>& angles) {
    double rt = 0.0;
    for (const auto& l : work.fold_angles(angles))
      rt += std::sqrt(l.beta * l.beta + smooth * smooth) +
            std::sqrt(l.gamma * l.gamma + smooth * smooth);
    return rt;
  };
  const auto objective = [&](const Eigen::VectorXd& u) {
    const double eps = work.objective(u);
    const double over = std::max(0.0, eps - eps_keep);
    return folded_runtime(work.physical_angles(u)) + mu * over * over;
  };

  OptimizerConfig polish_cfg;
  polish_cfg.max_iterations = max_iterations;
  polish_cfg.gradient_tolerance = 1e-6;
  const auto out = bfgs_minimize(objective, work.params_from_angles(start), polish_cfg);
  if (out.aborted) return std::nullopt;
  if (work.objective(out.x) >= eps_threshold) return std::nullopt;
  return QaoaAngles(work.fold_angles(work.physical_angles(out.x)), true);
}

// --- minimal preparation time ----------------------------------------------------

enum class OptimizationMode { Schedule, Qaoa };

struct SearchGrid {
  double t_min = 0.5;
  double t_max = 32.0;
  int coarse_points = 8;            // geometric scan resolution (schedule mode)
  double bisect_rel_width = 0.05;   // terminate when hi/lo - 1 <= width
  int max_layers = 16;              // QAOA mode scan ceiling
};

struct FrontierPoint {
  double t = 0.0;        // total time (schedule) or optimized runtime (QAOA)
  int layers = 0;        // QAOA mode only
  double best_f = 0.0;
  bool success = false;
};

struct MinimalTimeResult {
  double t_star = 0.0;
  int layers_star = 0;  // QAOA mode
  std::vector<FrontierPoint> table;
  OptimizationResult best;
};

// Smallest time at which the optimizer reaches fidelity above the
// threshold: a coarse geometric scan over T (or over the layer count in
// QAOA mode) followed by bisection between the last failing and first
// succeeding values. Each new point reuses the nearest succeeding optimum,
// time-rescaled, as the warm start of its first restart, which keeps the
// recorded success frontier monotone. QAOA mode reports the smallest
// runtime sum |beta_j| + |gamma_j| over every succeeding restart seen
// during the scan; layers_star is the smallest succeeding depth.
inline MinimalTimeResult minimal_annealing_time(const AnnealingProblem& problem, double threshold,
                                                OptimizationMode mode, OptimizerConfig cfg,
                                                const SearchGrid& grid,
                                                bool unconstrained_f = false) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("minimal_annealing_time: threshold must lie in (0, 1)");
  if (!std::isfinite(cfg.objective_goal)) cfg.objective_goal = 0.5 * (1.0 - threshold);

  MinimalTimeResult out;
  const double eps_threshold = 1.0 - threshold;
  double best_f_seen = 0.0;

  if (mode == OptimizationMode::Qaoa) {
    std::optional<std::vector<Layer>> warm;
    double min_runtime = std::numeric_limits<double>::infinity();
    const auto eval = [&](int layers) {
      const auto r = optimize_qaoa(problem, layers, cfg, warm);
      FrontierPoint pt;
      pt.layers = layers;
      pt.best_f = r.best_fidelity();
      pt.success = r.best_objective < eps_threshold;
      double runtime = std::numeric_limits<double>::infinity();
      std::vector<std::pair<double, std::size_t>> successes;
      for (std::size_t i = 0; i < r.per_restart_values.size(); ++i)
        if (r.per_restart_values[i] < eps_threshold) {
          runtime = std::min(runtime, r.per_restart_runtimes[i]);
          successes.push_back({r.per_restart_runtimes[i], i});
        }
      // squeeze the shortest succeeding circuits before recording the minimum
      std::sort(successes.begin(), successes.end());
      for (std::size_t k = 0; k < std::min<std::size_t>(5, successes.size()); ++k) {
        const auto polished = polish_qaoa_runtime(
            problem, r.per_restart_angles[successes[k].second], eps_threshold);
        if (polished.has_value()) runtime = std::min(runtime, qaoa_runtime(*polished));
      }
      min_runtime = std::min(min_runtime, runtime);
      pt.t = pt.success ? runtime : qaoa_runtime(*r.angles);
      out.table.push_back(pt);
      best_f_seen = std::max(best_f_seen, pt.best_f);
      if (pt.success) {
        warm = std::vector<Layer>(r.angles->layers());
        out.best = r;
      }
      return pt;
    };

    int last_fail = 0;
    int first_success = -1;
    for (int layers = 1; layers <= grid.max_layers;
         layers = (layers < 2 ? layers + 1 : layers * 2)) {
      const auto pt = eval(layers);
      if (pt.success) {
        first_success = layers;
        break;
      }
      last_fail = layers;
    }
    if (first_success < 0)
      throw std::runtime_error(
          "minimal_annealing_time: no success up to " + std::to_string(grid.max_layers) +
          " layers (best F = " + std::to_string(best_f_seen) + ")");
    int lo = last_fail, hi = first_success;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      const auto pt = eval(mid);
      if (pt.success)
        hi = mid;
      else
        lo = mid;
    }
    out.layers_star = hi;
    out.t_star = min_runtime;  // smallest runtime among all succeeding runs
    return out;
  }

  // schedule mode
  if (!(grid.t_min > 0.0) || !(grid.t_max > grid.t_min) || grid.coarse_points < 2)
    throw std::invalid_argument("minimal_annealing_time: bad search grid");

  std::optional<std::pair<std::vector<double>, std::vector<double>>> warm;
  const auto eval = [&](double t) {
    const auto r = optimize_schedule(problem, t, cfg, unconstrained_f, warm);
    FrontierPoint pt;
    pt.t = t;
    pt.best_f = r.best_fidelity();
    pt.success = r.best_objective < eps_threshold;
    out.table.push_back(pt);
    best_f_seen = std::max(best_f_seen, pt.best_f);
    if (pt.success) {
      std::vector<double> f(static_cast<std::size_t>(cfg.n_segments));
      std::vector<double> g(static_cast<std::size_t>(cfg.n_segments));
      for (int k = 0; k < cfg.n_segments; ++k) {
        f[static_cast<std::size_t>(k)] = r.best_parameters(2 * k);
        g[static_cast<std::size_t>(k)] = r.best_parameters(2 * k + 1);
      }
      warm = std::make_pair(std::move(f), std::move(g));
      out.best = r;
    }
    return pt;
  };

  double last_fail = -1.0;
  double first_success = -1.0;
  const double ratio = std::pow(grid.t_max / grid.t_min,
                                1.0 / static_cast<double>(grid.coarse_points - 1));
  for (int i = 0; i < grid.coarse_points; ++i) {
    const double t = grid.t_min * std::pow(ratio, i);
    const auto pt = eval(t);
    if (pt.success) {
      first_success = t;
      break;
    }
    last_fail = t;
  }
  if (first_success < 0.0)
    throw std::runtime_error("minimal_annealing_time: no success in [" +
                             std::to_string(grid.t_min) + ", " + std::to_string(grid.t_max) +
                             "] (best F = " + std::to_string(best_f_seen) + ")");
  if (last_fail < 0.0) {
    out.t_star = first_success;  // succeeded at the bottom of the scan range
    return out;
  }

  double lo = last_fail, hi = first_success;
  while (hi / lo - 1.0 > grid.bisect_rel_width) {
    const double mid = std::sqrt(lo * hi);
    const auto pt = eval(mid);
    if (pt.success)
      hi = mid;
    else
      lo = mid;
  }
  out.t_star = hi;
  return out;
}

}  // namespace qsl
