#include "cqtsim/ops.hpp"

#include <cmath>
#include <vector>

#include "cqtsim/kernels.hpp"

namespace cqt {

CompositeState apply_gate(const CompositeState& state, std::string_view atom, const Gate2& gate) {
  if (!gate.is_unitary())
    throw UsageError("gate '" + gate.name + "' is not unitary within 1e-12");
  const std::size_t pos = state.atom_pos(atom);
  CompositeState out = state;
  kernels::apply_gate2(out.amp_mut().data(), out.dim(), out.stride(pos), gate.m.data());
  return out;
}

CompositeState dispersive_gate(const CompositeState& state, std::string_view atom, double phi) {
  const std::size_t pos = state.atom_pos(atom);
  if (state.sites()[pos].basis != AtomBasis::fg)
    throw UsageError("dispersive pass requires a (f,g) atom; '" + std::string(atom) +
                     "' is a resonant probe");
  if (!state.has_cavity()) throw UsageError("dispersive pass requires a cavity");
  const std::size_t ncav = state.ncav();
  cvec phase(ncav);
  for (std::size_t n = 0; n < ncav; ++n)
    phase[n] = std::polar(1.0, phi * static_cast<double>(n));
  CompositeState out = state;
  kernels::apply_fock_phase(out.amp_mut().data(), out.dim(), out.stride(pos), ncav, 0,
                            phase.data());
  return out;
}

CompositeState jc_evolve(const CompositeState& state, std::string_view probe, double gt) {
  const std::size_t pos = state.atom_pos(probe);
  if (state.sites()[pos].basis != AtomBasis::fe)
    throw UsageError("resonant evolution requires a (f,e) probe atom");
  if (!state.has_cavity()) throw UsageError("resonant evolution requires a cavity");
  const std::size_t ncav = state.ncav();
  const std::size_t stride = state.stride(pos);
  // (e, n_max) has no rotation partner; refuse if it carries weight.
  const std::size_t outer = state.dim() / (2 * stride);
  const std::size_t qblocks = stride / ncav;
  double top = 0.0;
  for (std::size_t ob = 0; ob < outer; ++ob) {
    for (std::size_t q = 0; q < qblocks; ++q) {
      top = std::max(top,
                     std::abs(state.amp()[ob * 2 * stride + stride + q * ncav + ncav - 1]));
    }
  }
  if (top > 1e-10)
    throw TruncationError("probe amplitude at (e, n_max) exceeds 1e-10; raise the cutoff",
                          top * top);
  std::vector<double> cs(ncav), sn(ncav);
  for (std::size_t n = 0; n < ncav; ++n) {
    const double theta = gt * std::sqrt(static_cast<double>(n));
    cs[n] = std::cos(theta);
    sn[n] = std::sin(theta);
  }
  CompositeState out = state;
  kernels::apply_jc(out.amp_mut().data(), out.dim(), stride, ncav, cs.data(), sn.data());
  return out;
}

double branch_probability(const CompositeState& state, std::string_view atom,
                          std::string_view level) {
  const std::size_t pos = state.atom_pos(atom);
  const int bit = state.sites()[pos].level_index(level);
  if (bit < 0)
    throw StructureError("atom '" + std::string(atom) + "' has no level '" + std::string(level) +
                         "'");
  return kernels::branch_prob(state.amp().data(), state.dim(), state.stride(pos), bit);
}

namespace {

CompositeState collapse_to(const CompositeState& state, std::size_t pos, int bit, double prob) {
  CompositeState out = state;
  kernels::collapse(out.amp_mut().data(), out.dim(), out.stride(pos), bit, 1.0 / std::sqrt(prob));
  return out;
}

}  // namespace

MeasurementOutcome measure_atom(const CompositeState& state, std::string_view atom, Rng& rng) {
  const std::size_t pos = state.atom_pos(atom);
  const std::size_t stride = state.stride(pos);
  const double p0 = kernels::branch_prob(state.amp().data(), state.dim(), stride, 0);
  const double p1 = kernels::branch_prob(state.amp().data(), state.dim(), stride, 1);
  if (p0 + p1 < 1e-14) throw NumericalError("state norm is degenerate; cannot measure");
  const int bit = rng.uniform() < p0 ? 0 : 1;
  const double prob = bit == 0 ? p0 : p1;
  return {std::string(atom), state.sites()[pos].level_name(bit), prob,
          collapse_to(state, pos, bit, prob)};
}

std::pair<double, CompositeState> postselect(const CompositeState& state, std::string_view atom,
                                             std::string_view level, double min_prob) {
  const std::size_t pos = state.atom_pos(atom);
  const int bit = state.sites()[pos].level_index(level);
  if (bit < 0)
    throw StructureError("atom '" + std::string(atom) + "' has no level '" + std::string(level) +
                         "'");
  const double prob = kernels::branch_prob(state.amp().data(), state.dim(), state.stride(pos), bit);
  if (prob < min_prob)
    throw PostselectError("postselection on '" + std::string(atom) + "' = '" + std::string(level) +
                              "' has vanishing probability",
                          prob);
  return {prob, collapse_to(state, pos, bit, prob)};
}

double expectation_sigma_xx(const CompositeState& state, std::string_view a1,
                            std::string_view a2) {
  for (auto label : {a1, a2}) {
    if (state.site(label).basis != AtomBasis::fg)
      throw UsageError("sigma_x expectation requires (f,g) atoms");
  }
  CompositeState flipped = apply_gate(apply_gate(state, a1, Gate2::x_corr()), a2, Gate2::x_corr());
  return inner_product(state, flipped).real();
}

}  // namespace cqt
