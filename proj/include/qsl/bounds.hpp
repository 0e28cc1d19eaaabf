#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsl/core.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "qsl/tolerances.hpp"

// Schedule-independent lower bounds on annealing times and QAOA depth.
// Every bound returns an auditable BoundReport carrying the computed value,
// an applicability status, and a digest of its operands.
//
// Degenerate-ratio policy: a vanishing numerator yields a VACUOUS report
// (the bound is true but carries no information, value 0); a vanishing
// denominator with nonvanishing numerator yields INAPPLICABLE with a
// diagnostic (the ratio is formally infinite: the witness certifies that
// the target cannot be reached by that control term alone); both vanishing
// is INAPPLICABLE as an undefined 0/0.

namespace qsl {

enum class BoundStatus { Applicable, Vacuous, Inapplicable };

inline const char* to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Applicable: return "APPLICABLE";
    case BoundStatus::Vacuous: return "VACUOUS";
    case BoundStatus::Inapplicable: return "INAPPLICABLE";
  }
  return "?";
}

struct BoundReport {
  std::string name;
  double value = 0.0;
  BoundStatus status = BoundStatus::Inapplicable;
  nlohmann::json inputs;
  std::string citation;
  std::string note;

  bool applicable() const { return status == BoundStatus::Applicable; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"name", name},
                     {"value", value},
                     {"status", to_string(status)},
                     {"citation", citation},
                     {"inputs", inputs}};
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

namespace detail {

// Overlap gaps 1 - |<a|b>| feed numerators through a square root, which
// amplifies rounding noise; gaps below the zero threshold are treated as
// exact zeros so eigenstate anchors classify as vacuous.
inline double clamped_gap(double gap) {
  return gap < tol::zero_threshold ? 0.0 : gap;
}

inline BoundReport ratio_report(std::string name, std::string citation, double num, double den,
                                nlohmann::json inputs) {
  BoundReport r;
  r.name = std::move(name);
  r.citation = std::move(citation);
  r.inputs = std::move(inputs);
  const bool num0 = num < tol::zero_threshold;
  const bool den0 = den < tol::zero_threshold;
  if (num0 && den0) {
    r.status = BoundStatus::Inapplicable;
    r.value = 0.0;
    r.note = "numerator and denominator both vanish (0/0)";
  } else if (num0) {
    r.status = BoundStatus::Vacuous;
    r.value = 0.0;
  } else if (den0) {
    r.status = BoundStatus::Inapplicable;
    r.value = 0.0;
    r.note =
        "denominator vanishes with nonzero numerator: the bound is formally infinite; "
        "the witness certifies the target is unreachable under this control term alone";
  } else {
    r.status = BoundStatus::Applicable;
    r.value = num / den;
  }
  return r;
}

}  // namespace detail

// --- witnesses ---------------------------------------------------------------

enum class WitnessSide { Initial, Final };

inline const char* to_string(WitnessSide s) {
  return s == WitnessSide::Initial ? "INITIAL" : "FINAL";
}

// Unitary W commuting with one endpoint Hamiltonian and fixing that
// endpoint's state up to a phase. An INITIAL witness commutes with H_i and
// fixes psi0; a FINAL witness commutes with H_f and fixes psiT.
class Witness {
 public:
  static Witness validated(Operator unitary, std::string description, WitnessSide side,
                           const Operator& commuting_hamiltonian, const StateVector& fixed_state) {
    const Matrix& w = unitary.entries();
    if (w.rows() != commuting_hamiltonian.dim() || fixed_state.dim() != w.rows())
      throw std::invalid_argument("Witness: dimension mismatch");
    const double udev =
        detail::max_abs(Matrix(w.adjoint() * w) - Matrix::Identity(w.rows(), w.cols()));
    if (udev > tol::unitarity)
      throw std::invalid_argument("Witness '" + description + "': operator is not unitary");
    const double comm = spectral_norm(commutator(w, commuting_hamiltonian.entries()));
    if (comm > tol::unitarity)
      throw std::invalid_argument("Witness '" + description +
                                  "': does not commute with its endpoint Hamiltonian (||[W,H]|| = " +
                                  std::to_string(comm) + ")");
    const double fix =
        std::abs(Complex(fixed_state.amplitudes().dot(w * fixed_state.amplitudes())));
    if (std::abs(fix - 1.0) > tol::unitarity)
      throw std::invalid_argument("Witness '" + description +
                                  "': does not fix its endpoint state (|<s|W|s>| = " +
                                  std::to_string(fix) + ")");
    return Witness(std::move(unitary), std::move(description), side);
  }

  const Operator& unitary() const { return op_; }
  const std::string& description() const { return desc_; }
  WitnessSide side() const { return side_; }

 private:
  Witness(Operator op, std::string desc, WitnessSide side)
      : op_(std::move(op)), desc_(std::move(desc)), side_(side) {}

  Operator op_;
  std::string desc_;
  WitnessSide side_;
};

// --- distance/variance bounds ------------------------------------------------

// T >= D_B(target, psi0) / ((1/T) integral sqrt(Var_psi0 H(t)) dt), with the
// integral exact for piecewise-constant controls. Valid for whatever state
// the schedule actually reaches, so `target` may be a reached state.
inline BoundReport variance_bound_states(const StateVector& psi0, const StateVector& target,
                                         const Operator& h_i, const Operator& h_f,
                                         const Schedule& s) {
  if (psi0.dim() != h_i.dim() || target.dim() != h_i.dim() || h_f.dim() != h_i.dim())
    throw std::invalid_argument("variance_bound: dimension mismatch");
  if (!(s.total_duration() > 0.0))
    throw std::invalid_argument("variance_bound: zero-duration schedule");

  double integral = 0.0;
  for (const auto& seg : s.segments()) {
    const Operator h = Operator::hermitian(seg.f * h_i.entries() + seg.g * h_f.entries());
    integral += seg.dt * std::sqrt(variance(psi0, h));
  }
  double db = bures_distance(target, psi0);
  if (db * db < 2.0 * tol::zero_threshold) db = 0.0;  // overlap gap below threshold
  const double avg = integral / s.total_duration();

  return detail::ratio_report(
      "variance", "T >= D_B(psiT, psi0) / time-avg sqrt(Var_psi0 H(t))", db, avg,
      {{"dim", psi0.dim()},
       {"segments", s.segments().size()},
       {"total_duration", s.total_duration()},
       {"bures_distance", db},
       {"time_avg_deviation", avg}});
}

inline BoundReport variance_bound(const AnnealingProblem& p, const Schedule& s) {
  return variance_bound_states(p.psi0(), p.psi_t(), p.h_i(), p.h_f(), s);
}

// T >= max{ D_B/(g_max sqrt(Var_psi0 Hf)), D_B/(f_max sqrt(Var_psiT Hi)) }.
// A term whose variance vanishes while D_B > 0 would be infinite; it is
// dropped from the max and flagged in the note. The g-term requires psi0 to
// be an eigenstate of H_i and the f-term requires the target to be an
// eigenstate of H_f; callers substituting a reached target must drop the
// f-term themselves (see keep_f_term).
inline BoundReport schedule_independent_bound_states(const StateVector& psi0,
                                                     const StateVector& target,
                                                     const Operator& h_i, const Operator& h_f,
                                                     double f_max, double g_max,
                                                     bool keep_f_term = true) {
  if (!(f_max > 0.0) || !(g_max > 0.0))
    throw std::invalid_argument("schedule_independent_bound: amplitude caps must be positive");
  double db = bures_distance(target, psi0);
  if (db * db < 2.0 * tol::zero_threshold) db = 0.0;  // overlap gap below threshold
  const char* citation =
      "T >= max{ D_B/(g_max sqrt(Var_psi0 Hf)), D_B/(f_max sqrt(Var_psiT Hi)) }";

  const double den_g = g_max * std::sqrt(variance(psi0, h_f));
  const double den_f = keep_f_term ? f_max * std::sqrt(variance(target, h_i)) : -1.0;

  nlohmann::json inputs{{"dim", psi0.dim()},
                        {"f_max", f_max},
                        {"g_max", g_max},
                        {"bures_distance", db},
                        {"g_term_denominator", den_g},
                        {"f_term_included", keep_f_term}};
  if (keep_f_term) inputs["f_term_denominator"] = den_f;

  BoundReport r;
  r.name = "schedule-independent";
  r.citation = citation;
  r.inputs = std::move(inputs);
  if (db == 0.0) {
    r.status = BoundStatus::Vacuous;
    r.value = 0.0;
    return r;
  }

  std::vector<double> kept;
  std::string dropped;
  if (den_g >= tol::zero_threshold) kept.push_back(db / den_g);
  else dropped += "g-term dropped (Var_psi0 Hf = 0, term would be infinite); ";
  if (keep_f_term) {
    if (den_f >= tol::zero_threshold) kept.push_back(db / den_f);
    else dropped += "f-term dropped (Var_psiT Hi = 0, term would be infinite); ";
  }
  if (kept.empty()) {
    r.status = BoundStatus::Inapplicable;
    r.value = 0.0;
    r.note = dropped + "no finite term remains: the target is unreachable under these controls";
    return r;
  }
  r.status = BoundStatus::Applicable;
  r.value = *std::max_element(kept.begin(), kept.end());
  r.note = dropped;
  return r;
}

inline BoundReport schedule_independent_bound(const AnnealingProblem& p) {
  return schedule_independent_bound_states(p.psi0(), p.psi_t(), p.h_i(), p.h_f(), p.f_max(),
                                           p.g_max());
}

// T >= sqrt(2 d (1 - 1/sqrt(d))) / (g_max sqrt(Tr Hf^2)): the bound for an
// initial state that is the equal superposition of the H_f eigenstates.
inline BoundReport equal_superposition_bound(const Operator& h_f, double g_max) {
  if (!(g_max > 0.0))
    throw std::invalid_argument("equal_superposition_bound: g_max must be positive");
  const double d = static_cast<double>(h_f.dim());
  const double tr2 = h_f.entries().squaredNorm();  // Tr{Hf^2} for Hermitian Hf
  const double num = std::sqrt(2.0 * d * (1.0 - 1.0 / std::sqrt(d)));
  const double den = g_max * std::sqrt(tr2);
  return detail::ratio_report("equal-superposition",
                              "T >= sqrt(2 d (1 - 1/sqrt(d))) / (g_max sqrt(Tr Hf^2))", num, den,
                              {{"dim", h_f.dim()}, {"g_max", g_max}, {"trace_hf_squared", tr2}});
}

// Search bound for M marked states in dimension d, with overlap sqrt(M/d)
// and initial-state variance M/d - M^2/d^2:
// T >= max{1/g_max, 1/f_max} sqrt(2 (1 - sqrt(M/d))) / sqrt(M/d - M^2/d^2).
inline BoundReport grover_bound(Index d, Index m, double f_max, double g_max) {
  if (d < 2) throw std::invalid_argument("grover_bound: dimension must be >= 2");
  if (m < 1 || m >= d)
    throw std::invalid_argument("grover_bound: solution count must satisfy 1 <= M < d");
  if (!(f_max > 0.0) || !(g_max > 0.0))
    throw std::invalid_argument("grover_bound: amplitude caps must be positive");

  const double dd = static_cast<double>(d);
  const double mm = static_cast<double>(m);
  const double ov = std::sqrt(mm / dd);
  const double var = mm / dd - (mm * mm) / (dd * dd);
  const double num = std::max(1.0 / g_max, 1.0 / f_max) * std::sqrt(2.0 * (1.0 - ov));
  const double den = std::sqrt(var);
  return detail::ratio_report(
      "grover",
      "T >= max{1/g_max, 1/f_max} sqrt(2 (1 - sqrt(M/d))) / sqrt(M/d - M^2/d^2)", num, den,
      {{"dim", d}, {"solutions", m}, {"f_max", f_max}, {"g_max", g_max}});
}

// --- witness-commutator bounds -----------------------------------------------

// T >= sqrt(2) sqrt(1 - |<anchor|W|anchor>|) / (amp_max ||[H_ctrl, W]||).
// The witness commutes with the opposite endpoint's Hamiltonian and fixes
// that endpoint's state; the anchor is the endpoint the expectation is
// evaluated on (an INITIAL witness is anchored on the target and bounds the
// g-controlled term, and vice versa).
inline BoundReport commutator_bound(const Operator& h_ctrl, const Witness& witness,
                                    const StateVector& anchor, double amp_max) {
  if (!(amp_max > 0.0)) throw std::invalid_argument("commutator_bound: amp_max must be positive");
  if (h_ctrl.dim() != witness.unitary().dim() || anchor.dim() != h_ctrl.dim())
    throw std::invalid_argument("commutator_bound: dimension mismatch");

  const double wexp =
      std::abs(Complex(anchor.amplitudes().dot(witness.unitary().entries() * anchor.amplitudes())));
  const double num = std::sqrt(2.0) * std::sqrt(detail::clamped_gap(1.0 - wexp));
  const double cnorm = spectral_norm(commutator(h_ctrl.entries(), witness.unitary().entries()));
  const double den = amp_max * cnorm;

  return detail::ratio_report(
      "commutator", "T >= sqrt(2) sqrt(1 - |<anchor|W|anchor>|) / (amp_max ||[H, W]||)", num, den,
      {{"dim", h_ctrl.dim()},
       {"witness", witness.description()},
       {"witness_side", to_string(witness.side())},
       {"amp_max", amp_max},
       {"witness_expectation", wexp},
       {"commutator_norm", cnorm}});
}

// T >= sqrt(2) max{ sqrt(1-|<psi0|V|psi0>|)/(f_max ||[Hi,V]||),
//                   sqrt(1-|<psiT|W|psiT>|)/(g_max ||[Hf,W]||) }.
// v commutes with H_f and fixes psiT; w commutes with H_i and fixes psi0.
// Non-applicable terms are skipped; if none remains the call fails.
inline BoundReport combined_commutator_bound(const AnnealingProblem& p, const Witness& v_final,
                                             const Witness& w_initial) {
  if (v_final.side() != WitnessSide::Final)
    throw std::invalid_argument("combined_commutator_bound: v must be a FINAL-side witness");
  if (w_initial.side() != WitnessSide::Initial)
    throw std::invalid_argument("combined_commutator_bound: w must be an INITIAL-side witness");

  const BoundReport f_term = commutator_bound(p.h_i(), v_final, p.psi0(), p.f_max());
  const BoundReport g_term = commutator_bound(p.h_f(), w_initial, p.psi_t(), p.g_max());
  if (!f_term.applicable() && !g_term.applicable())
    throw std::runtime_error("combined_commutator_bound: both terms are non-applicable (f-term " +
                             std::string(to_string(f_term.status)) + ", g-term " +
                             std::string(to_string(g_term.status)) + ")");

  BoundReport r;
  r.name = "combined-commutator";
  r.citation = "T >= sqrt(2) max{ [Hi,V] term, [Hf,W] term }";
  r.status = BoundStatus::Applicable;
  r.value = std::max(f_term.applicable() ? f_term.value : 0.0,
                     g_term.applicable() ? g_term.value : 0.0);
  r.inputs = {{"dim", p.dim()},
              {"f_term", f_term.to_json()},
              {"g_term", g_term.to_json()}};
  return r;
}

// Minimum-degree-vertex bound for a spin network with N = |V|/|E|:
//   T >= sqrt(2) sqrt(1 - |<psiT|W|psiT>|) / (g_max 6 h_max delta) * |E|/|V|,
// using the analytic estimate ||[Hf, W]|| <= 6 h_max delta N for
// W = sigma_axis at the minimum-degree vertex. The exact-commutator
// companion evaluates the same witness with the true spectral norm and is
// never smaller.
struct SpinNetworkBound {
  BoundReport analytic;
  BoundReport exact;
};

inline SpinNetworkBound spin_network_bound(const SpinGraph& g, const StateVector& psi_t,
                                           Axis witness_axis, double g_max) {
  if (g.edge_count() == 0) throw std::invalid_argument("spin_network_bound: graph has no edges");
  if (!(g_max > 0.0)) throw std::invalid_argument("spin_network_bound: g_max must be positive");

  const auto [vertex, degree] = min_degree_vertex(g);
  const double nn = static_cast<double>(g.n_vertices()) / static_cast<double>(g.edge_count());
  const double h_max = g.h_max();
  const Operator w = pauli_string(g.n_vertices(), {{vertex, witness_axis}});
  const std::string desc = std::string("sigma_") + axis_name(witness_axis) + "(" +
                           std::to_string(vertex) + ")";

  const double wexp =
      std::abs(Complex(psi_t.amplitudes().dot(w.entries() * psi_t.amplitudes())));
  const double num = std::sqrt(2.0) * std::sqrt(detail::clamped_gap(1.0 - wexp));

  const Operator h_f = spin_network_hf(g, std::nullopt);
  const double cnorm = spectral_norm(commutator(h_f.entries(), w.entries()));
  const double den_exact = g_max * cnorm;
  const double den_analytic = g_max * 6.0 * h_max * static_cast<double>(degree) * nn;

  nlohmann::json inputs{{"n_vertices", g.n_vertices()}, {"edge_count", g.edge_count()},
                        {"witness", desc},              {"degree", degree},
                        {"h_max", h_max},               {"g_max", g_max},
                        {"normalization", nn},          {"witness_expectation", wexp},
                        {"commutator_norm", cnorm}};

  SpinNetworkBound out{
      detail::ratio_report("spin-network",
                           "T >= sqrt(2) sqrt(1 - |<psiT|W|psiT>|) / (6 h_max delta) * |E|/|V|",
                           num, den_analytic, inputs),
      detail::ratio_report("spin-network-exact",
                           "T >= sqrt(2) sqrt(1 - |<psiT|W|psiT>|) / (g_max ||[Hf, W]||)", num,
                           den_exact, inputs)};

  // The estimate is only sound while the true commutator stays below it.
  if (out.analytic.status == BoundStatus::Applicable && den_exact > den_analytic * (1.0 + 1e-12)) {
    out.analytic.status = BoundStatus::Inapplicable;
    out.analytic.value = 0.0;
    out.analytic.note = "exact commutator norm exceeds the analytic 6 h_max delta N estimate";
  }
  return out;
}

// T >= (<Hi>_T - <Hi>_0 + <Hf>_0 - <Hf>_T) / ||[Hf, Hi]||. Holds for
// schedules with |f(t)| + |g(t)| <= 1; a negative numerator clamps to a
// vacuous report.
inline BoundReport tau_anneal3_states(const StateVector& psi0, const StateVector& target,
                                      const Operator& h_i, const Operator& h_f) {
  const double den = spectral_norm(commutator(h_f.entries(), h_i.entries()));
  const double num = expectation(target, h_i) - expectation(psi0, h_i) +
                     expectation(psi0, h_f) - expectation(target, h_f);

  nlohmann::json inputs{{"dim", psi0.dim()},
                        {"numerator", num},
                        {"commutator_norm", den},
                        {"schedule_convention", "|f(t)| + |g(t)| <= 1"}};
  BoundReport r;
  r.name = "tau-anneal3";
  r.citation = "T >= (<Hi>_T - <Hi>_0 + <Hf>_0 - <Hf>_T) / ||[Hf, Hi]||";
  r.inputs = std::move(inputs);
  if (num < tol::zero_threshold) {
    r.status = BoundStatus::Vacuous;
    r.value = 0.0;
    if (num < 0.0) r.note = "negative numerator clamped to 0";
    return r;
  }
  if (den < tol::zero_threshold) {
    r.status = BoundStatus::Inapplicable;
    r.note = "H_i and H_f commute";
    return r;
  }
  r.status = BoundStatus::Applicable;
  r.value = num / den;
  return r;
}

inline BoundReport tau_anneal3(const AnnealingProblem& p) {
  return tau_anneal3_states(p.psi0(), p.psi_t(), p.h_i(), p.h_f());
}

// Closed form for the perturbed p-spin model with witness sigma_x on the
// appended vertex: T >= n^(p-1) / (sqrt(2) g_max lambda).
inline BoundReport pspin_closed_form_bound(int n_block, int p, double lambda, double g_max) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("pspin_closed_form_bound: lambda must be positive");
  if (!(g_max > 0.0))
    throw std::invalid_argument("pspin_closed_form_bound: g_max must be positive");
  if (n_block < 1 || p < 1)
    throw std::invalid_argument("pspin_closed_form_bound: n and p must be >= 1");

  BoundReport r;
  r.name = "pspin-closed-form";
  r.citation = "T >= n^(p-1) / (sqrt(2) g_max lambda)";
  r.status = BoundStatus::Applicable;
  r.value = std::pow(static_cast<double>(n_block), p - 1) / (std::sqrt(2.0) * g_max * lambda);
  r.inputs = {{"n_block", n_block}, {"p", p}, {"lambda", lambda}, {"g_max", g_max}};
  return r;
}

// Depth bound for QAOA circuits with angles in the periodic window
// [0, 2*pi]: L >= max{ D_B(psi0, V psi0)/(4 pi ||[Hi, V]||),
//                      D_B(psiT, W psiT)/(4 pi ||[Hf, W]||) }.
// The integer certificate is ceil(value).
inline BoundReport qaoa_layer_bound(const AnnealingProblem& p, const Witness& v_final,
                                    const Witness& w_initial) {
  if (v_final.side() != WitnessSide::Final)
    throw std::invalid_argument("qaoa_layer_bound: v must be a FINAL-side witness");
  if (w_initial.side() != WitnessSide::Initial)
    throw std::invalid_argument("qaoa_layer_bound: w must be an INITIAL-side witness");

  const auto term = [&p](const Operator& h, const Witness& w, const StateVector& anchor) {
    const double wexp =
        std::abs(Complex(anchor.amplitudes().dot(w.unitary().entries() * anchor.amplitudes())));
    const double num = std::sqrt(2.0) * std::sqrt(detail::clamped_gap(1.0 - wexp));
    const double den = 4.0 * M_PI * spectral_norm(commutator(h.entries(), w.unitary().entries()));
    return detail::ratio_report("qaoa-layer-term",
                                "L >= D_B(anchor, W anchor) / (4 pi ||[H, W]||)", num, den,
                                {{"witness", w.description()}});
  };
  const BoundReport f_term = term(p.h_i(), v_final, p.psi0());
  const BoundReport g_term = term(p.h_f(), w_initial, p.psi_t());
  if (!f_term.applicable() && !g_term.applicable())
    throw std::runtime_error("qaoa_layer_bound: both terms are non-applicable");

  BoundReport r;
  r.name = "qaoa-layers";
  r.citation =
      "L >= max{ D_B(psi0, V psi0)/(4 pi ||[Hi, V]||), D_B(psiT, W psiT)/(4 pi ||[Hf, W]||) }";
  r.status = BoundStatus::Applicable;
  r.value = std::max(f_term.applicable() ? f_term.value : 0.0,
                     g_term.applicable() ? g_term.value : 0.0);
  r.inputs = {{"dim", p.dim()},
              {"f_term", f_term.to_json()},
              {"g_term", g_term.to_json()},
              {"certificate_layers", static_cast<long long>(std::ceil(r.value))}};
  return r;
}

// --- witness selection -------------------------------------------------------

struct WitnessCandidate {
  Operator op;
  std::string description;
};

// All single-site Pauli strings in deterministic (site, x < y < z) order.
inline std::vector<WitnessCandidate> single_site_pauli_candidates(int n_spins) {
  std::vector<WitnessCandidate> out;
  out.reserve(static_cast<std::size_t>(n_spins) * 3);
  for (int site = 1; site <= n_spins; ++site) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      out.push_back({pauli_string(n_spins, {{site, a}}),
                     std::string("sigma_") + axis_name(a) + "(" + std::to_string(site) + ")"});
    }
  }
  return out;
}

// Scans a candidate family for the witness maximizing the applicable
// commutator bound. Candidates must commute with h_commute and fix
// fixed_state; the bound is evaluated on eval_anchor against h_ctrl. With
// an empty candidate list the single-site Pauli family is used (the
// dimension must then be a power of two). The scan order is the
// deterministic tie-break: first maximum in (site, axis x < y < z) order.
inline std::pair<Witness, BoundReport> auto_select_witness(
    const Operator& h_commute, const StateVector& fixed_state, const Operator& h_ctrl,
    const StateVector& eval_anchor, double amp_max, WitnessSide side,
    std::vector<WitnessCandidate> candidates = {}) {
  if (candidates.empty()) {
    const Index d = h_commute.dim();
    const int n = static_cast<int>(std::round(std::log2(static_cast<double>(d))));
    if ((Index(1) << n) != d)
      throw std::invalid_argument(
          "auto_select_witness: default Pauli family requires a power-of-two dimension");
    candidates = single_site_pauli_candidates(n);
  }

  std::optional<Witness> best;
  BoundReport best_report;
  int validated = 0;
  for (auto& c : candidates) {
    std::optional<Witness> w;
    try {
      w = Witness::validated(std::move(c.op), c.description, side, h_commute, fixed_state);
    } catch (const std::invalid_argument&) {
      continue;  // candidate fails the commutation/fixing validation
    }
    ++validated;
    const BoundReport r = commutator_bound(h_ctrl, *w, eval_anchor, amp_max);
    if (r.applicable() && (!best || r.value > best_report.value)) {
      best = std::move(w);
      best_report = r;
    }
  }
  if (validated == 0)
    throw std::runtime_error("auto_select_witness: no candidate passes validation");
  if (!best)
    throw std::runtime_error(
        "auto_select_witness: no validated candidate yields an applicable bound");
  return {std::move(*best), std::move(best_report)};
}

}  // namespace qsl
