#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsl/bounds.hpp"
#include "qsl/core.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "qsl/rng.hpp"
#include "qsl/serialize.hpp"

// Randomized property suites behind the `verify` command and the
// acceptance tests: the distance-integral inequality, bound dominance on
// simulated schedules, closed-form equivalence, numerical hygiene, the
// bang-bang equivalence, and the spin-network commutator premise.

namespace qsl {

struct VerifyReport {
  std::string suite;
  int trials = 0;
  int failures = 0;
  double max_violation = 0.0;  // worst signed violation margin (<= 0 when passing)
  nlohmann::json counterexample;
  bool passed() const { return failures == 0; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"suite", suite},
                     {"trials", trials},
                     {"failures", failures},
                     {"max_violation", max_violation},
                     {"passed", passed()}};
    if (!counterexample.is_null()) j["counterexample"] = counterexample;
    return j;
  }
};

namespace detail {

inline Matrix random_hermitian(Index d, SplitMix64& rng, double scale = 1.0) {
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return 0.5 * scale * (m + m.adjoint().eval());
}

inline StateVector random_state(Index d, SplitMix64& rng) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return StateVector::normalized(v);
}

inline SpinGraph random_spin_graph(SplitMix64& rng, int max_vertices = 6,
                                   int max_couplings_per_pair = 3) {
  const int n = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_vertices - 1)));
  std::vector<Coupling> cs;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (rng.next_double() < 0.35) continue;  // drop this vertex pair
      const int count = 1 + static_cast<int>(rng.next_below(
                                static_cast<std::uint64_t>(max_couplings_per_pair)));
      std::set<std::pair<int, int>> used;
      for (int c = 0; c < count; ++c) {
        const int a = static_cast<int>(rng.next_below(3));
        const int b = static_cast<int>(rng.next_below(3));
        if (!used.insert({a, b}).second) continue;
        cs.push_back({i, j, static_cast<Axis>(a), static_cast<Axis>(b), rng.uniform(-2, 2)});
      }
    }
  }
  if (cs.empty()) cs.push_back({1, 2, Axis::Z, Axis::Z, rng.uniform(0.1, 2.0)});
  return SpinGraph(n, cs);
}

inline void record_failure(VerifyReport& report, double violation, nlohmann::json instance) {
  ++report.failures;
  if (report.counterexample.is_null() || violation > report.max_violation)
    report.counterexample = std::move(instance);
  report.max_violation = std::max(report.max_violation, violation);
}

}  // namespace detail

// D_B(psi(t), psi~(t)) <= integral of ||(H - H~) U~(t') psi0|| dt', checked
// with a 10^4-step midpoint Riemann sum plus the quadrature allowance
// 1e-6 * t * ||H - H~||.
inline VerifyReport verify_distance_integral_inequality(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "distance-integral-inequality";
  report.trials = trials;
  constexpr int kSteps = 10000;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const Index d = 2 + static_cast<Index>(rng.next_below(7));
    const Operator h = Operator::hermitian(detail::random_hermitian(d, rng, 2.0));
    const Operator h_tilde = Operator::hermitian(detail::random_hermitian(d, rng, 2.0));
    const StateVector psi0 = detail::random_state(d, rng);
    const double t = rng.uniform(1e-3, 5.0);

    const Vector lhs_a = matrix_exp_unitary(h, t) * psi0.amplitudes();
    const Vector lhs_b = matrix_exp_unitary(h_tilde, t) * psi0.amplitudes();
    const double lhs = bures_distance(StateVector::normalized(lhs_a),
                                      StateVector::normalized(lhs_b));

    const Matrix diff = h.entries() - h_tilde.entries();
    const auto eig_tilde = hermitian_eig(h_tilde);
    const Vector c = eig_tilde.eigenvectors.adjoint() * psi0.amplitudes();
    const Matrix diff_q = diff * eig_tilde.eigenvectors;
    double integral = 0.0;
    const double dt = t / kSteps;
    Vector phased(d);
    for (int k = 0; k < kSteps; ++k) {
      const double tk = (k + 0.5) * dt;
      for (Index i = 0; i < d; ++i)
        phased(i) = c(i) * std::exp(Complex(0.0, -tk * eig_tilde.eigenvalues(i)));
      integral += dt * (diff_q * phased).norm();
    }
    const double allowance = 1e-6 * t * spectral_norm(diff);

    const double violation = lhs - integral - allowance;
    if (violation > 0.0)
      detail::record_failure(report, violation,
                             {{"trial", trial}, {"dim", d}, {"t", t}, {"lhs", lhs},
                              {"integral", integral}, {"allowance", allowance}});
  }
  return report;
}

// Across random problems and random cap-respecting schedules, no applicable
// bound (evaluated with the actually-reached state substituted as target)
// may exceed the schedule duration by more than the dominance slack.
inline VerifyReport verify_bound_dominance(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "bound-dominance";
  report.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const double f_max = rng.uniform(0.5, 2.0);
    const double g_max = rng.uniform(0.5, 2.0);

    // rotate between problem families
    Operator h_i = transverse_field_hi(2);
    Operator h_f = h_i;
    StateVector psi0 = StateVector::equal_superposition(4);
    const int family = trial % 3;
    if (family == 0) {
      const Index d = 2 + static_cast<Index>(rng.next_below(7));
      h_i = Operator::hermitian(detail::random_hermitian(d, rng, 1.5));
      h_f = Operator::hermitian(detail::random_hermitian(d, rng, 1.5));
      psi0 = StateVector::normalized(ground_space_basis(h_i).col(0));
    } else if (family == 1) {
      const SpinGraph g = detail::random_spin_graph(rng, 4);
      h_i = transverse_field_hi(g.n_vertices());
      h_f = spin_network_hf(g);
      psi0 = StateVector::equal_superposition(h_f.dim());
    } else {
      const int n = 2 + static_cast<int>(rng.next_below(3));
      const auto gp = grover_problem(n, {static_cast<Index>(rng.next_below(1ull << n))}, f_max,
                                     g_max);
      h_i = gp.h_i();
      h_f = gp.h_f();
      psi0 = gp.psi0();
    }

    // random schedule within the caps; half the time restricted to the
    // |f| + |g| <= 1 window where the expectation-displacement bound applies
    const bool convex_window = (trial % 2 == 0);
    const int segments = 1 + static_cast<int>(rng.next_below(12));
    std::vector<Segment> segs;
    for (int k = 0; k < segments; ++k) {
      double f, g;
      if (convex_window) {
        // |f| + |g| <= 1 while still respecting the problem caps
        const double split = rng.next_double();
        f = split * rng.uniform(-1, 1) * std::min(f_max, 1.0);
        g = (1.0 - split) * rng.uniform(-1, 1) * std::min(g_max, 1.0);
      } else {
        f = rng.uniform(-f_max, f_max);
        g = rng.uniform(-g_max, g_max);
      }
      segs.push_back({rng.uniform(0.02, 0.4), f, g});
    }
    const Schedule schedule(segs, std::max(f_max, 1.0), std::max(g_max, 1.0));
    const double t_achieved = schedule.total_duration();

    AnnealingProblem problem = AnnealingProblem::validated(
        h_i, h_f, psi0, StateVector::normalized(ground_space_basis(h_f).col(0)),
        ground_space_projector(h_f), f_max, g_max);
    const StateVector reached = propagate_schedule(problem, schedule);

    std::vector<BoundReport> bounds;
    bounds.push_back(variance_bound_states(psi0, reached, h_i, h_f, schedule));
    bounds.push_back(schedule_independent_bound_states(psi0, reached, h_i, h_f, f_max, g_max,
                                                       /*keep_f_term=*/false));
    try {
      const auto [w, r] = auto_select_witness(h_i, psi0, h_f, reached, g_max,
                                              WitnessSide::Initial);
      bounds.push_back(r);
    } catch (const std::exception&) {
      // no single-site witness commutes with this H_i
    }
    double amp_budget = 0.0;
    for (const auto& s : segs) amp_budget = std::max(amp_budget, std::abs(s.f) + std::abs(s.g));
    if (amp_budget <= 1.0 + tol::cap_slack)
      bounds.push_back(tau_anneal3_states(psi0, reached, h_i, h_f));

    for (const auto& b : bounds) {
      if (!b.applicable()) continue;
      const double violation = b.value - t_achieved - tol::dominance_slack;
      if (violation > 0.0)
        detail::record_failure(report, violation,
                               {{"trial", trial},
                                {"bound", b.to_json()},
                                {"t_achieved", t_achieved},
                                {"family", family},
                                {"schedule", schedule_to_json(schedule)}});
    }
  }
  return report;
}

// Generic witness-commutator bound on the perturbed p-spin model equals the
// closed form n^(p-1) / (sqrt(2) g_max lambda) to relative 1e-10.
inline VerifyReport verify_closed_form_equivalence(int /*trials*/ = 0, std::uint64_t /*seed*/ = 0) {
  VerifyReport report;
  report.suite = "closed-form-equivalence";
  for (int n = 3; n <= 6; ++n) {
    for (int p : {1, 2, 3}) {
      for (double lambda : {0.5, 1.0, 2.0}) {
        ++report.trials;
        const auto prob = perturbed_pspin_problem(n, p, lambda, 1.0, 1.0);
        const Witness w =
            Witness::validated(pauli_string(n + 1, {{n + 1, Axis::X}}), "sigma_x(n+1)",
                               WitnessSide::Initial, prob.h_i(), prob.psi0());
        const double generic = commutator_bound(prob.h_f(), w, prob.psi_t(), 1.0).value;
        const double closed = pspin_closed_form_bound(n, p, lambda, 1.0).value;
        const double rel = std::abs(generic / closed - 1.0);
        if (rel > 1e-10)
          detail::record_failure(report, rel - 1e-10,
                                 {{"n", n}, {"p", p}, {"lambda", lambda},
                                  {"generic", generic}, {"closed_form", closed}});
      }
    }
  }
  return report;
}

// Propagator unitarity, eigendecomposition residuals, and norm
// preservation through long schedules.
inline VerifyReport verify_unitarity(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "unitarity";
  report.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const Index d = 2 + static_cast<Index>(rng.next_below(15));
    const Operator h = Operator::hermitian(detail::random_hermitian(d, rng, 3.0));
    const double t = rng.uniform(-5, 5);

    const Matrix u = matrix_exp_unitary(h, t);
    const double unit_dev =
        (Matrix(u.adjoint() * u) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    const auto eig = hermitian_eig(h);
    const double resid =
        (eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.adjoint() -
         h.entries())
            .norm();
    const double resid_cap = tol::eig_residual * std::max(1e-300, h.entries().norm());

    // 100-segment random schedule norm drift
    const Operator h2 = Operator::hermitian(detail::random_hermitian(d, rng, 1.0));
    Vector psi = detail::random_state(d, rng).amplitudes();
    const double norm_i = h.entries().cwiseAbs().rowwise().sum().maxCoeff();
    const double norm_f = h2.entries().cwiseAbs().rowwise().sum().maxCoeff();
    for (int k = 0; k < 100; ++k) {
      const double f = rng.uniform(-1, 1), g = rng.uniform(-1, 1);
      const Matrix hk = f * h.entries() + g * h2.entries();
      psi = apply_exp(hk, rng.uniform(0.01, 0.2), psi, std::abs(f) * norm_i + std::abs(g) * norm_f);
    }
    const double drift = std::abs(psi.norm() - 1.0);

    const double violation =
        std::max({unit_dev - tol::unitarity, resid - resid_cap, drift - 1e-9});
    if (violation > 0.0)
      detail::record_failure(report, violation,
                             {{"trial", trial},
                              {"dim", d},
                              {"unitarity_deviation", unit_dev},
                              {"eig_residual", resid},
                              {"norm_drift", drift}});
  }
  return report;
}

// qaoa_evolve against propagate_schedule on the induced bang-bang schedule,
// including signed angles.
inline VerifyReport verify_bang_bang_equivalence(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "bang-bang-equivalence";
  report.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const Index d = 2 + static_cast<Index>(rng.next_below(7));
    const Operator h_i = Operator::hermitian(detail::random_hermitian(d, rng, 1.5));
    const Operator h_f = Operator::hermitian(detail::random_hermitian(d, rng, 1.5));
    const StateVector psi0 = StateVector::normalized(ground_space_basis(h_i).col(0));
    const auto problem = AnnealingProblem::validated(
        h_i, h_f, psi0, StateVector::normalized(ground_space_basis(h_f).col(0)),
        ground_space_projector(h_f), 1.0, 1.0);

    std::vector<Layer> layers(1 + rng.next_below(4));
    for (auto& l : layers) {
      l.beta = rng.uniform(-2, 2);
      l.gamma = rng.uniform(-2, 2);
    }
    const QaoaAngles angles(layers);
    const Vector via_gates = qaoa_evolve(problem, angles).amplitudes();
    const Vector via_schedule =
        propagate_schedule(problem, bang_bang_schedule(angles)).amplitudes();
    const double dev = (via_gates - via_schedule).norm();
    if (dev > 1e-9)
      detail::record_failure(report, dev - 1e-9,
                             {{"trial", trial}, {"dim", d}, {"deviation", dev},
                              {"angles", qaoa_angles_to_json(angles)}});
  }
  return report;
}

// ||[H_f, sigma_alpha^(i)]|| <= 6 h_max delta_i N on random spin graphs,
// for every vertex and axis.
inline VerifyReport verify_commutator_premise(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "commutator-premise";
  report.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const SpinGraph g = detail::random_spin_graph(rng);
    const Operator h_f = spin_network_hf(g);
    const double nn = static_cast<double>(g.n_vertices()) / g.edge_count();
    const double h_max = g.h_max();

    std::vector<std::set<int>> nbrs(static_cast<std::size_t>(g.n_vertices()) + 1);
    for (const auto& c : g.couplings()) {
      nbrs[static_cast<std::size_t>(c.i)].insert(c.j);
      nbrs[static_cast<std::size_t>(c.j)].insert(c.i);
    }

    for (int i = 1; i <= g.n_vertices(); ++i) {
      const double delta = static_cast<double>(nbrs[static_cast<std::size_t>(i)].size());
      for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        const double cnorm = spectral_norm(
            commutator(h_f.entries(), pauli_string(g.n_vertices(), {{i, a}}).entries()));
        const double cap = 6.0 * h_max * delta * nn;
        if (cnorm > cap + 1e-9)
          detail::record_failure(report, cnorm - cap,
                                 {{"trial", trial},
                                  {"vertex", i},
                                  {"axis", std::string(1, axis_name(a))},
                                  {"commutator_norm", cnorm},
                                  {"premise_cap", cap},
                                  {"graph", spin_graph_to_json(g, std::nullopt)}});
      }
    }
  }
  return report;
}

// The factor-6 analytic spin-network bound never exceeds its
// exact-commutator companion.
inline VerifyReport verify_estimate_ordering(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "estimate-ordering";
  report.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const SpinGraph g = detail::random_spin_graph(rng);
    const Index d = Index(1) << g.n_vertices();
    const StateVector target = StateVector::basis_state(d, static_cast<Index>(rng.next_below(
                                                               static_cast<std::uint64_t>(d))));
    const Axis axis = static_cast<Axis>(rng.next_below(3));
    const auto r = spin_network_bound(g, target, axis, rng.uniform(0.5, 2.0));
    if (r.analytic.status == BoundStatus::Applicable &&
        r.exact.status == BoundStatus::Applicable) {
      const double violation = r.analytic.value - r.exact.value * (1.0 + 1e-12);
      if (violation > 0.0)
        detail::record_failure(report, violation,
                               {{"trial", trial},
                                {"analytic", r.analytic.to_json()},
                                {"exact", r.exact.to_json()}});
    }
  }
  return report;
}

// On schedules respecting the caps, the schedule-independent g-term never
// exceeds the schedule-dependent variance bound (the time-averaged
// deviation is at most g_max sqrt(Var_psi0 Hf) when psi0 is an H_i
// eigenstate).
inline VerifyReport verify_cap_consistency(int trials, std::uint64_t seed) {
  VerifyReport report;
  report.suite = "cap-consistency";
  report.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const double f_max = rng.uniform(0.5, 2.0);
    const double g_max = rng.uniform(0.5, 2.0);
    const auto problem =
        grover_problem(n, {static_cast<Index>(rng.next_below(1ull << n))}, f_max, g_max);

    const int segments = 1 + static_cast<int>(rng.next_below(10));
    std::vector<Segment> segs;
    for (int k = 0; k < segments; ++k)
      segs.push_back(
          {rng.uniform(0.05, 0.5), rng.uniform(-f_max, f_max), rng.uniform(-g_max, g_max)});
    const Schedule schedule(segs, f_max, g_max);

    const BoundReport dependent = variance_bound(problem, schedule);
    const BoundReport independent = schedule_independent_bound_states(
        problem.psi0(), problem.psi_t(), problem.h_i(), problem.h_f(), f_max, g_max,
        /*keep_f_term=*/false);
    if (dependent.applicable() && independent.applicable()) {
      const double violation = independent.value - dependent.value - 1e-9;
      if (violation > 0.0)
        detail::record_failure(report, violation,
                               {{"trial", trial},
                                {"schedule_dependent", dependent.to_json()},
                                {"schedule_independent", independent.to_json()}});
    }
  }
  return report;
}

inline std::vector<std::string> verify_suite_names() {
  return {"distance-integral-inequality",
          "bound-dominance",
          "closed-form-equivalence",
          "unitarity",
          "bang-bang-equivalence",
          "commutator-premise",
          "estimate-ordering",
          "cap-consistency"};
}

inline VerifyReport run_verify_suite(const std::string& name, int trials, std::uint64_t seed) {
  if (name == "distance-integral-inequality") return verify_distance_integral_inequality(trials, seed);
  if (name == "bound-dominance") return verify_bound_dominance(trials, seed);
  if (name == "closed-form-equivalence") return verify_closed_form_equivalence(trials, seed);
  if (name == "unitarity") return verify_unitarity(trials, seed);
  if (name == "bang-bang-equivalence") return verify_bang_bang_equivalence(trials, seed);
  if (name == "commutator-premise") return verify_commutator_premise(trials, seed);
  if (name == "estimate-ordering") return verify_estimate_ordering(trials, seed);
  if (name == "cap-consistency") return verify_cap_consistency(trials, seed);
  throw std::invalid_argument("unknown verify suite \"" + name + "\"");
}

}  // namespace qsl
