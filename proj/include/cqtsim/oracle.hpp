#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "cqtsim/protocol.hpp"

// Reference implementations used by the tests and the CLI selftest. Nothing
// here shares code with the fast path: unitaries are realized as dense
// matrices (the displacement through a scaling-and-squaring Taylor
// exponential rather than the eigensolver), probabilities as compensated
// scalar sums, and measurement statistics by exact branch enumeration.
// Deliberately slow; correctness only.

namespace cqt::oracle {

struct GateSpec {
  std::string atom;
  Gate2 gate;
};
struct DispersiveSpec {
  std::string atom;
  double phi;
};
struct DisplaceSpec {
  cplx beta;
};
struct JcSpec {
  std::string atom;
  double gt;
};
using PrimitiveSpec = std::variant<GateSpec, DispersiveSpec, DisplaceSpec, JcSpec>;

inline constexpr std::size_t kMaxDenseDim = 4096;

struct DenseUnitary {
  std::size_t dim;
  cvec m;  // row-major dim x dim
  std::string provenance;

  double unitarity_defect() const;  // max |(U^dag U - 1)_{ij}|
  cvec apply(const cvec& x) const;
};

/// Explicit matrix of one primitive on the full composite space described by
/// `shape` (any normalized state with the right sites/cutoff works as the
/// shape carrier). Throws StructureError above kMaxDenseDim.
DenseUnitary dense_unitary(const PrimitiveSpec& spec, const CompositeState& shape);

/// sum_n |C_{n+1}|^2 sin^2(gt sqrt(n+1)) over the coherent(alpha_eff)
/// photon distribution, by compensated summation. This is the probability of
/// exciting a ground-state probe on that field.
double probe_success_probability(double alpha_eff, double gt, int n_max);

/// 2x2 reduced density matrix of one atom (partial trace over the rest).
std::array<cplx, 4> reduced_qubit_dm(const CompositeState& state, std::string_view atom);

double purity(const std::array<cplx, 4>& dm);

struct TeleportBranch {
  std::string outcome1, outcome2;
  double probability;              // joint probability including the probe branch
  std::array<cplx, 2> bob_state;  // receiver qubit before correction
  double corrected_fidelity;       // after the classical correction
};

struct TeleportEnumeration {
  double probe_success_probability;            // excited-probe branch weight
  std::array<TeleportBranch, 4> branches;      // conditioned on the excited probe
  std::array<cplx, 4> failure_bob_dm;          // receiver marginal, ground-probe branch
  std::array<cplx, 4> average_bob_dm;          // marginal averaged over all branches
};

/// Exact projector-arithmetic enumeration of every sender branch of the
/// teleport pipeline (probe outcome, then both readout outcomes).
TeleportEnumeration enumerate_teleport(const InputQubit& input, const ProtocolParams& params,
                                       InjectionSign injection);

}  // namespace cqt::oracle
