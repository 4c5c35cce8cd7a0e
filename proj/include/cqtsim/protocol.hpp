#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cqtsim/ops.hpp"

namespace cqt {

enum class BellKind { phi_plus, phi_minus, psi_plus, psi_minus };
enum class InjectionSign { plus, minus };

std::string to_string(BellKind kind);                      // "phi+", "phi-", "psi+", "psi-"
std::optional<BellKind> parse_bell_kind(std::string_view);  // inverse of to_string
std::string to_string(InjectionSign);                       // "plus" / "minus"
std::optional<InjectionSign> parse_injection(std::string_view);

/// Closed-form Bell amplitudes over (ff, fg, gf, gg).
cvec bell_amplitudes(BellKind kind);

/// Injection that prepares the kind: minus for phi+ (and its R5 image psi-),
/// plus for phi- (and psi+).
InjectionSign preparation_injection(BellKind kind);

/// Injection under which discrimination identifies the kind: plus for the
/// "+" states, minus for the "-" states.
InjectionSign discrimination_injection(BellKind kind);

struct ProtocolParams {
  double alpha = 2.0;        // cavity starts in |-alpha>
  int n_max = 64;            // Fock cutoff
  double phi = kPi;          // dispersive phase per pass
  double gt_probe = kPi / 8; // probe pulse area; default pi/(4 alpha)
  double tail_tol = 1e-12;   // truncation budget for injections
  double postselect_min = 1e-14;
  std::uint64_t seed = 1;

  /// Defaults for a given alpha: gt_probe = pi/(4 alpha), so that
  /// sqrt(4 alpha^2) * gt_probe = pi/2 exactly.
  static ProtocolParams for_alpha(double alpha, int n_max = 64);

  /// Nearest integer to the probe field's mean photon number 4 alpha^2
  /// (half-up). nbar_rounded() flags the ambiguous non-integer case.
  int nbar() const;
  bool nbar_rounded() const;

  void validate() const;
  FockCutoff cutoff() const { return FockCutoff(n_max); }
};

struct BellPreparation {
  CompositeState state;  // the two atoms only; probe and cavity factored out
  double success_probability;
};

/// Full preparation sequence: Ramsey rotation / dispersive pass / rotation on
/// each atom, coherent injection, resonant probe, conditioning on the excited
/// probe, and the extra R5 rotation for the psi kinds.
BellPreparation prepare_bell(const ProtocolParams& params, BellKind kind,
                             std::string_view label1 = "A1", std::string_view label2 = "A2");

struct SigmaXxResult {
  int eigenvalue;  // +1 or -1
  std::string outcome1, outcome2;
};

/// K rotation on both atoms followed by readout; equal outcomes mean
/// eigenvalue +1 of sigma_x sigma_x, unequal outcomes -1.
SigmaXxResult sigma_xx_procedure(const CompositeState& two_atoms, Rng& rng);

struct DiscriminationResult {
  std::string outcome1, outcome2;
  std::optional<BellKind> inferred;  // nullopt would mean "unknown"; the
                                     // outcome map is total, so it is always set
  double probe_probability;
};

/// Bell-basis readout of a bare two-atom state. Builds its own cavity in
/// |-alpha>, conditions on the excited probe deterministically, and maps the
/// final outcome pair (g,f)->phi+, (f,g)->phi-, (f,f)->psi+, (g,g)->psi-.
/// The map is meaningful when the injection matches the state family; a
/// mismatched injection still yields a deterministic pair, but one belonging
/// to the other family's table.
DiscriminationResult discriminate_bell(const CompositeState& two_atoms,
                                       const ProtocolParams& params, InjectionSign injection,
                                       Rng& rng);

struct ClassicalMessage {
  InjectionSign injected_sign;
  std::string outcome1, outcome2;  // readout of the sender's two atoms
};

/// The receiver's correction: identity / Z for the minus injection, X / XZ
/// for the plus injection, keyed on whether the two outcomes agree.
Gate2 bob_correction(const ClassicalMessage& message);

struct TeleportRecord {
  bool success = false;            // excited probe was detected
  double probe_probability = 0.0;  // Born probability of the excited probe
  double bell_branch_probability = 0.0;
  ClassicalMessage message;
  double fidelity = 0.0;  // receiver qubit vs input, after correction
  std::string bob_gate;   // preset name of the applied correction
  std::optional<CompositeState> final_state;  // for verification; not serialized
};

/// End-to-end pipeline: builds the shared pair (A2,A4), attaches the unknown
/// qubit A1 and a fresh cavity in |-alpha>, runs the dispersive passes,
/// injection and probe, samples the probe (failure -> success=false), then
/// the K-basis readout, correction, and fidelity bookkeeping.
TeleportRecord teleport(const InputQubit& input, const ProtocolParams& params,
                        InjectionSign injection, Rng& rng);

}  // namespace cqt
