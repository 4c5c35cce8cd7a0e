#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "cqtsim/gates.hpp"
#include "cqtsim/rng.hpp"
#include "cqtsim/state.hpp"

namespace cqt {

struct MeasurementOutcome {
  std::string atom;
  std::string level;
  double probability;  // Born probability of the observed level
  CompositeState post_state;
};

/// Applies a 2x2 unitary to one atom; norm is preserved within roundoff.
CompositeState apply_gate(const CompositeState& state, std::string_view atom, const Gate2& gate);

/// Photon-number-dependent phase e^{i phi n} on the |f> branch of a (f,g)
/// atom; |g> amplitudes are untouched.
CompositeState dispersive_gate(const CompositeState& state, std::string_view atom, double phi);

/// Coherent injection: exp(beta a^dag - conj(beta) a) exponentiated in the
/// truncated space, so the operator is unitary by construction and the
/// |alpha> -> |alpha+beta> identity holds up to truncation error. Throws
/// TruncationError when the post-injection top-level mass exceeds tail_tol.
CompositeState displace(const CompositeState& state, cplx beta, double tail_tol = 1e-12);

/// Resonant exchange with a (f,e) probe atom for pulse area gt: the pair
/// {(f,n),(e,n-1)} rotates by gt*sqrt(n); (f,0) is stationary. (e,n_max) has
/// no partner inside the truncation; it is frozen, and any amplitude above
/// 1e-10 on it raises TruncationError before the evolution is applied.
CompositeState jc_evolve(const CompositeState& state, std::string_view probe, double gt);

/// Probability of finding `atom` in `level` (no collapse).
double branch_probability(const CompositeState& state, std::string_view atom,
                          std::string_view level);

/// Samples a projective measurement of one atom and collapses the state.
MeasurementOutcome measure_atom(const CompositeState& state, std::string_view atom, Rng& rng);

/// Deterministic conditioning: projects onto `level` and renormalizes.
/// Throws PostselectError when the branch probability is below min_prob.
std::pair<double, CompositeState> postselect(const CompositeState& state, std::string_view atom,
                                             std::string_view level, double min_prob = 1e-14);

/// <sigma_x sigma_x> of two (f,g) atoms.
double expectation_sigma_xx(const CompositeState& state, std::string_view a1, std::string_view a2);

}  // namespace cqt
