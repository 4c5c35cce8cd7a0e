#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqtsim/common.hpp"
#include "cqtsim/errors.hpp"

namespace cqt {

/// Highest retained photon number of the cavity mode; dimension is n_max + 1.
struct FockCutoff {
  int n_max;

  explicit FockCutoff(int n) : n_max(n) {
    if (n < 1) throw StructureError("Fock cutoff must be >= 1");
  }
  std::size_t dim() const { return static_cast<std::size_t>(n_max) + 1; }
  bool operator==(const FockCutoff&) const = default;
};

/// Which two-level manifold an atom exposes. Dispersive atoms use (f,g),
/// resonant probe atoms use (f,e); level index 0 is always the first name.
enum class AtomBasis { fg, fe };

struct AtomSite {
  std::string label;
  AtomBasis basis;

  const char* level_name(int idx) const {
    if (basis == AtomBasis::fg) return idx == 0 ? "f" : "g";
    return idx == 0 ? "f" : "e";
  }
  /// -1 when the level name does not belong to this site.
  int level_index(std::string_view name) const {
    if (name == "f") return 0;
    if (basis == AtomBasis::fg && name == "g") return 1;
    if (basis == AtomBasis::fe && name == "e") return 1;
    return -1;
  }
  bool operator==(const AtomSite&) const = default;
};

/// Pure state of k two-level atoms and (optionally) one truncated cavity
/// mode. Index convention: amp[((b1*2 + b2)*2 + ...)*(n_max+1) + n] with
/// atoms most significant in site order and the cavity least significant.
/// States are immutable values; operations return new states.
class CompositeState {
 public:
  CompositeState(std::vector<AtomSite> sites, std::optional<FockCutoff> cutoff, cvec amp);

  /// |0...0> (x) |0>, or the scalar state 1 when there are no subsystems.
  static CompositeState ground(std::vector<AtomSite> sites, std::optional<FockCutoff> cutoff);

  const std::vector<AtomSite>& sites() const { return sites_; }
  const std::optional<FockCutoff>& cutoff() const { return cutoff_; }
  bool has_cavity() const { return cutoff_.has_value(); }
  const cvec& amp() const { return amp_; }
  cvec& amp_mut() { return amp_; }

  std::size_t atom_count() const { return sites_.size(); }
  std::size_t ncav() const { return cutoff_ ? cutoff_->dim() : 1; }
  std::size_t dim() const { return amp_.size(); }

  std::size_t atom_pos(std::string_view label) const;  // throws StructureError
  const AtomSite& site(std::string_view label) const { return sites_[atom_pos(label)]; }
  std::size_t stride(std::size_t pos) const;

  /// Flat index of |bits...> (x) |n>; bits listed in site order.
  std::size_t index(std::span<const int> bits, std::size_t n = 0) const;
  /// Inverse of index(): fills bits (site order) and returns the cavity n.
  std::size_t decompose(std::size_t idx, std::span<int> bits) const;

  double norm_sqr() const;
  bool same_shape(const CompositeState& other) const {
    return sites_ == other.sites_ && cutoff_ == other.cutoff_;
  }

 private:
  std::vector<AtomSite> sites_;
  std::optional<FockCutoff> cutoff_;
  cvec amp_;
};

/// Normalized qubit amplitudes (zeta, xi) for the state zeta|f> + xi|g>.
struct InputQubit {
  cplx zeta;
  cplx xi;

  InputQubit(cplx z, cplx x);
};

struct CoherentVector {
  cvec amp;
  double tail_mass;  // probability mass beyond the cutoff
};

/// Truncated coherent state with amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
/// The tail mass is reported, not policed; callers decide what to tolerate.
CoherentVector coherent_state(cplx alpha, FockCutoff cutoff);

enum class CatParity { even, odd };

/// |alpha> + |-alpha> (even) or |alpha> - |-alpha> (odd). When `normalize`
/// is set the vector is divided by sqrt(2(1 +- e^{-2 alpha^2})) computed in
/// closed form, so the truncated norm stays slightly below 1.
cvec cat_state(double alpha, CatParity parity, FockCutoff cutoff, bool normalize);

/// Tensor product of single-atom states and a cavity vector, in that order.
/// Inputs must be normalized within 1e-10.
CompositeState compose(const std::vector<std::pair<AtomSite, std::array<cplx, 2>>>& atoms,
                       const cvec& cavity, FockCutoff cutoff);
CompositeState compose_atoms(const std::vector<std::pair<AtomSite, std::array<cplx, 2>>>& atoms);

/// Appends one atom as the least-significant atom (just above the cavity).
CompositeState extend_with_atom(const CompositeState& state, const AtomSite& site,
                                const std::array<cplx, 2>& amp);

/// a (x) b for two cavity-less states with disjoint labels.
CompositeState tensor_product(const CompositeState& a, const CompositeState& b);

/// Attaches a cavity mode (normalized vector) to a cavity-less state.
CompositeState attach_cavity(const CompositeState& state, const cvec& cavity, FockCutoff cutoff);

/// Replaces the cavity factor with a fresh vector. The existing cavity must
/// be unentangled from the atoms (product residual below `residual_tol`).
CompositeState reset_cavity(const CompositeState& state, const cvec& cavity,
                            double residual_tol = 1e-9);

/// Extracts the pure state of the named atoms, requiring everything else to
/// factor out (residual below `residual_tol`). Sites keep the order given.
CompositeState extract_atoms(const CompositeState& state, std::span<const std::string> labels,
                             double residual_tol = 1e-9);

cplx inner_product(const CompositeState& a, const CompositeState& b);  // conjugate-linear in a
double fidelity(const CompositeState& a, const CompositeState& b);

/// Fidelity of a subsystem against a pure target: ||(|phi><phi| (x) 1)|psi>||^2
/// where |phi> lives on the named atoms (target indexed by their bits in the
/// order given). Equals |<phi|psi_sub>|^2 whenever the subsystem is in a
/// product state with the rest.
double subsystem_fidelity(const CompositeState& state, std::span<const std::string> labels,
                          std::span<const cplx> target);

/// Probability mass sitting in the top Fock level; the truncation sentinel.
double top_level_mass(const CompositeState& state);

}  // namespace cqt
