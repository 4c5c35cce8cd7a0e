#include "cqtsim/protocol.hpp"

#include <array>
#include <cmath>

namespace cqt {

std::string to_string(BellKind kind) {
  switch (kind) {
    case BellKind::phi_plus: return "phi+";
    case BellKind::phi_minus: return "phi-";
    case BellKind::psi_plus: return "psi+";
    case BellKind::psi_minus: return "psi-";
  }
  return "?";
}

std::optional<BellKind> parse_bell_kind(std::string_view s) {
  if (s == "phi+") return BellKind::phi_plus;
  if (s == "phi-") return BellKind::phi_minus;
  if (s == "psi+") return BellKind::psi_plus;
  if (s == "psi-") return BellKind::psi_minus;
  return std::nullopt;
}

std::string to_string(InjectionSign sign) {
  return sign == InjectionSign::plus ? "plus" : "minus";
}

std::optional<InjectionSign> parse_injection(std::string_view s) {
  if (s == "plus") return InjectionSign::plus;
  if (s == "minus") return InjectionSign::minus;
  return std::nullopt;
}

cvec bell_amplitudes(BellKind kind) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case BellKind::phi_plus: return {s, 0, 0, s};
    case BellKind::phi_minus: return {s, 0, 0, -s};
    case BellKind::psi_plus: return {0, s, s, 0};
    case BellKind::psi_minus: return {0, s, -s, 0};
  }
  return {};
}

InjectionSign preparation_injection(BellKind kind) {
  // phi+ comes from the -alpha injection, phi- from +alpha; the psi kinds are
  // the R5 images of those two paths.
  switch (kind) {
    case BellKind::phi_plus:
    case BellKind::psi_minus: return InjectionSign::minus;
    case BellKind::phi_minus:
    case BellKind::psi_plus: return InjectionSign::plus;
  }
  return InjectionSign::minus;
}

InjectionSign discrimination_injection(BellKind kind) {
  switch (kind) {
    case BellKind::phi_plus:
    case BellKind::psi_plus: return InjectionSign::plus;
    case BellKind::phi_minus:
    case BellKind::psi_minus: return InjectionSign::minus;
  }
  return InjectionSign::minus;
}

ProtocolParams ProtocolParams::for_alpha(double alpha, int n_max) {
  ProtocolParams p;
  p.alpha = alpha;
  p.n_max = n_max;
  p.gt_probe = kPi / (4.0 * alpha);
  return p;
}

int ProtocolParams::nbar() const {
  return static_cast<int>(std::floor(4.0 * alpha * alpha + 0.5));
}

bool ProtocolParams::nbar_rounded() const {
  const double mean = 4.0 * alpha * alpha;
  return mean != std::floor(mean);
}

void ProtocolParams::validate() const {
  if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
  if (n_max < 1) throw UsageError("n_max must be >= 1");
  if (!(tail_tol > 0.0) || !(postselect_min > 0.0))
    throw UsageError("tolerances must be positive");
}

namespace {

double signed_alpha(const ProtocolParams& params, InjectionSign sign) {
  return sign == InjectionSign::plus ? params.alpha : -params.alpha;
}

CompositeState make_cavity_state(const std::vector<std::pair<AtomSite, std::array<cplx, 2>>>& atoms,
                                 const ProtocolParams& params) {
  CoherentVector cav = coherent_state(cplx{-params.alpha, 0.0}, params.cutoff());
  if (cav.tail_mass > params.tail_tol)
    throw TruncationError("initial coherent state does not fit the cutoff", cav.tail_mass);
  return compose(atoms, cav.amp, params.cutoff());
}

}  // namespace

BellPreparation prepare_bell(const ProtocolParams& params, BellKind kind, std::string_view label1,
                             std::string_view label2) {
  params.validate();
  const std::string a1(label1), a2(label2), probe = "A3";
  CompositeState state = make_cavity_state(
      {{AtomSite{a1, AtomBasis::fg}, {cplx{0, 0}, cplx{1, 0}}},   // |g>
       {AtomSite{a2, AtomBasis::fg}, {cplx{0, 0}, cplx{1, 0}}}},  // |g>
      params);

  state = apply_gate(state, a1, Gate2::r_h());
  state = dispersive_gate(state, a1, params.phi);
  state = apply_gate(state, a1, Gate2::r_h());
  state = apply_gate(state, a2, Gate2::r_h());
  state = dispersive_gate(state, a2, params.phi);
  state = apply_gate(state, a2, Gate2::r_h());

  state = displace(state, cplx{signed_alpha(params, preparation_injection(kind)), 0.0},
                   params.tail_tol);
  state = extend_with_atom(state, AtomSite{probe, AtomBasis::fe}, {cplx{1, 0}, cplx{0, 0}});
  state = jc_evolve(state, probe, params.gt_probe);
  auto [prob, conditioned] = postselect(state, probe, "e", params.postselect_min);

  if (kind == BellKind::psi_plus || kind == BellKind::psi_minus)
    conditioned = apply_gate(conditioned, a2, Gate2::r5());

  const std::array<std::string, 2> labels{a1, a2};
  return {extract_atoms(conditioned, labels), prob};
}

SigmaXxResult sigma_xx_procedure(const CompositeState& two_atoms, Rng& rng) {
  if (two_atoms.atom_count() != 2)
    throw StructureError("sigma_x sigma_x readout expects exactly two atoms");
  for (const auto& site : two_atoms.sites()) {
    if (site.basis != AtomBasis::fg)
      throw UsageError("sigma_x sigma_x readout expects (f,g) atoms");
  }
  const std::string a1 = two_atoms.sites()[0].label;
  const std::string a2 = two_atoms.sites()[1].label;
  CompositeState state = apply_gate(two_atoms, a1, Gate2::k());
  state = apply_gate(state, a2, Gate2::k());
  MeasurementOutcome m1 = measure_atom(state, a1, rng);
  MeasurementOutcome m2 = measure_atom(m1.post_state, a2, rng);
  const int eigenvalue = (m1.level == m2.level) ? +1 : -1;
  return {eigenvalue, m1.level, m2.level};
}

DiscriminationResult discriminate_bell(const CompositeState& two_atoms,
                                       const ProtocolParams& params, InjectionSign injection,
                                       Rng& rng) {
  params.validate();
  if (two_atoms.atom_count() != 2 || two_atoms.has_cavity())
    throw StructureError("discrimination expects a bare two-atom state");
  const std::string a1 = two_atoms.sites()[0].label;
  const std::string a2 = two_atoms.sites()[1].label;
  const std::string probe = "A3";

  CoherentVector cav = coherent_state(cplx{-params.alpha, 0.0}, params.cutoff());
  if (cav.tail_mass > params.tail_tol)
    throw TruncationError("initial coherent state does not fit the cutoff", cav.tail_mass);
  CompositeState state = attach_cavity(two_atoms, cav.amp, params.cutoff());

  state = apply_gate(state, a1, Gate2::k());
  state = dispersive_gate(state, a2, params.phi);
  state = apply_gate(state, a2, Gate2::r_h());
  state = displace(state, cplx{signed_alpha(params, injection), 0.0}, params.tail_tol);
  state = extend_with_atom(state, AtomSite{probe, AtomBasis::fe}, {cplx{1, 0}, cplx{0, 0}});
  state = jc_evolve(state, probe, params.gt_probe);
  auto [prob, conditioned] = postselect(state, probe, "e", params.postselect_min);

  conditioned = apply_gate(conditioned, a1, Gate2::k());
  conditioned = apply_gate(conditioned, a2, Gate2::k());
  MeasurementOutcome m1 = measure_atom(conditioned, a1, rng);
  MeasurementOutcome m2 = measure_atom(m1.post_state, a2, rng);

  BellKind inferred;
  if (m1.level == "g" && m2.level == "f") inferred = BellKind::phi_plus;
  else if (m1.level == "f" && m2.level == "g") inferred = BellKind::phi_minus;
  else if (m1.level == "f" && m2.level == "f") inferred = BellKind::psi_plus;
  else inferred = BellKind::psi_minus;
  return {m1.level, m2.level, inferred, prob};
}

Gate2 bob_correction(const ClassicalMessage& message) {
  const bool equal = message.outcome1 == message.outcome2;
  if (message.injected_sign == InjectionSign::minus)
    return equal ? Gate2::identity() : Gate2::z_corr();
  return equal ? Gate2::x_corr() : Gate2::xz_corr();
}

TeleportRecord teleport(const InputQubit& input, const ProtocolParams& params,
                        InjectionSign injection, Rng& rng) {
  params.validate();
  const std::string a1 = "A1", a2 = "A2", a4 = "A4", probe = "A3";

  // Shared pair first, then the unknown qubit and a fresh cavity in |-alpha>.
  BellPreparation pair = prepare_bell(params, BellKind::phi_plus, a2, a4);
  CompositeState qubit =
      compose_atoms({{AtomSite{a1, AtomBasis::fg}, {input.zeta, input.xi}}});
  CoherentVector cav = coherent_state(cplx{-params.alpha, 0.0}, params.cutoff());
  if (cav.tail_mass > params.tail_tol)
    throw TruncationError("initial coherent state does not fit the cutoff", cav.tail_mass);
  CompositeState state =
      attach_cavity(tensor_product(qubit, pair.state), cav.amp, params.cutoff());

  state = dispersive_gate(state, a1, params.phi);
  state = dispersive_gate(state, a2, params.phi);
  state = displace(state, cplx{signed_alpha(params, injection), 0.0}, params.tail_tol);
  state = extend_with_atom(state, AtomSite{probe, AtomBasis::fe}, {cplx{1, 0}, cplx{0, 0}});
  state = jc_evolve(state, probe, params.gt_probe);

  TeleportRecord record;
  record.probe_probability = branch_probability(state, probe, "e");
  record.message.injected_sign = injection;

  MeasurementOutcome probe_outcome = measure_atom(state, probe, rng);
  if (probe_outcome.level != "e") {
    // Probe stayed in the ground state: the run is discarded, as there is no
    // retry step in the protocol.
    record.success = false;
    record.bob_gate = "NONE";
    record.final_state = std::move(probe_outcome.post_state);
    return record;
  }

  CompositeState working = apply_gate(probe_outcome.post_state, a1, Gate2::k());
  working = apply_gate(working, a2, Gate2::k());
  MeasurementOutcome m1 = measure_atom(working, a1, rng);
  MeasurementOutcome m2 = measure_atom(m1.post_state, a2, rng);

  record.success = true;
  record.message.outcome1 = m1.level;
  record.message.outcome2 = m2.level;
  record.bell_branch_probability = m1.probability * m2.probability;

  const Gate2 correction = bob_correction(record.message);
  record.bob_gate = correction.name;
  CompositeState final_state = apply_gate(m2.post_state, a4, correction);

  const std::array<std::string, 1> bob{a4};
  const std::array<cplx, 2> target{input.zeta, input.xi};
  record.fidelity = subsystem_fidelity(final_state, bob, target);
  record.final_state = std::move(final_state);
  return record;
}

}  // namespace cqt
