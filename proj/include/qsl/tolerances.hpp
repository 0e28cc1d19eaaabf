#pragma once

// All numerical tolerances and the dense-dimension cap live here so that
// every module draws from a single source of truth.

namespace qsl::tol {

inline constexpr double hermiticity = 1e-12;      // max-entry |A - A^dag|
inline constexpr double unitarity = 1e-10;        // max-entry |U^dag U - 1|
inline constexpr double state_norm = 1e-10;       // | ||psi|| - 1 |
inline constexpr double eig_residual = 1e-9;      // ||A - Q L Q^dag|| / ||A||
inline constexpr double ground_state = 1e-8;      // <psi0|H_i|psi0> vs min eigenvalue
inline constexpr double projector = 1e-10;        // max-entry |P^2 - P|, |P - P^dag|
inline constexpr double zero_threshold = 1e-12;   // vanishing numerator/denominator policy
inline constexpr double dominance_slack = 1e-6;   // T_achieved >= bound - slack
inline constexpr double cap_slack = 1e-12;        // |f_k| <= f_cap + cap_slack
inline constexpr double degeneracy_rel = 1e-8;    // ground-space grouping, relative to spectral range

inline constexpr int max_dim = 4096;              // n <= 12 spins
inline constexpr int max_spins = 12;

}  // namespace qsl::tol
