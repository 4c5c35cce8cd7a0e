#include "cqtsim/state.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cqtsim/kernels.hpp"

namespace cqt {

namespace {

constexpr double kComposeNormTol = 1e-10;

void require(bool cond, const char* msg) {
  if (!cond) throw StructureError(msg);
}

}  // namespace

CompositeState::CompositeState(std::vector<AtomSite> sites, std::optional<FockCutoff> cutoff,
                               cvec amp)
    : sites_(std::move(sites)), cutoff_(cutoff), amp_(std::move(amp)) {
  std::set<std::string> seen;
  for (const auto& s : sites_) {
    require(!s.label.empty(), "atom label must be non-empty");
    require(seen.insert(s.label).second, "duplicate atom label");
  }
  const std::size_t expect = (std::size_t{1} << sites_.size()) * ncav();
  require(amp_.size() == expect, "amplitude vector length does not match sites and cutoff");
}

CompositeState CompositeState::ground(std::vector<AtomSite> sites,
                                      std::optional<FockCutoff> cutoff) {
  const std::size_t d =
      (std::size_t{1} << sites.size()) * (cutoff ? cutoff->dim() : std::size_t{1});
  cvec amp(d, cplx{0.0, 0.0});
  amp[0] = cplx{1.0, 0.0};
  return CompositeState(std::move(sites), cutoff, std::move(amp));
}

std::size_t CompositeState::atom_pos(std::string_view label) const {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (sites_[i].label == label) return i;
  }
  throw StructureError("unknown atom label: " + std::string(label));
}

std::size_t CompositeState::stride(std::size_t pos) const {
  return (std::size_t{1} << (sites_.size() - 1 - pos)) * ncav();
}

std::size_t CompositeState::index(std::span<const int> bits, std::size_t n) const {
  require(bits.size() == sites_.size(), "bit count does not match atom count");
  require(n < ncav(), "cavity index out of range");
  std::size_t idx = 0;
  for (int b : bits) idx = idx * 2 + static_cast<std::size_t>(b);
  return idx * ncav() + n;
}

std::size_t CompositeState::decompose(std::size_t idx, std::span<int> bits) const {
  require(bits.size() == sites_.size(), "bit count does not match atom count");
  const std::size_t n = idx % ncav();
  std::size_t rest = idx / ncav();
  for (std::size_t i = sites_.size(); i-- > 0;) {
    bits[i] = static_cast<int>(rest & 1);
    rest >>= 1;
  }
  return n;
}

double CompositeState::norm_sqr() const { return kernels::norm_sqr(amp_.data(), amp_.size()); }

InputQubit::InputQubit(cplx z, cplx x) : zeta(z), xi(x) {
  if (std::abs(std::norm(z) + std::norm(x) - 1.0) > 1e-12)
    throw StructureError("input qubit amplitudes must satisfy |zeta|^2 + |xi|^2 = 1");
}

CoherentVector coherent_state(cplx alpha, FockCutoff cutoff) {
  const std::size_t d = cutoff.dim();
  cvec amp(d);
  // c_{n+1} = c_n * alpha / sqrt(n+1), c_0 = e^{-|alpha|^2/2}
  cplx c = std::exp(cplx{-0.5 * std::norm(alpha), 0.0});
  double retained = 0.0;
  for (std::size_t n = 0; n < d; ++n) {
    amp[n] = c;
    retained += std::norm(c);
    c *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  // Tail evaluated by continuing the Poisson recurrence past the cutoff;
  // summing the small terms directly keeps tiny tails accurate where
  // 1 - retained would only see roundoff.
  double tail = 0.0;
  double p = std::norm(c);  // |c_{n_max+1}|^2
  const double mean = std::norm(alpha);
  std::size_t n = d;
  while (p > 0.0 && n < d + 4 * static_cast<std::size_t>(mean) + 200) {
    tail += p;
    ++n;
    p *= mean / static_cast<double>(n);
  }
  return {std::move(amp), tail};
}

cvec cat_state(double alpha, CatParity parity, FockCutoff cutoff, bool normalize) {
  CoherentVector coh = coherent_state(cplx{alpha, 0.0}, cutoff);
  cvec amp = std::move(coh.amp);
  const double sign = parity == CatParity::even ? 1.0 : -1.0;
  for (std::size_t n = 0; n < amp.size(); ++n) {
    // amplitude of |-alpha> at n is (-1)^n times the |alpha> one
    const double factor = (n % 2 == 0) ? 1.0 + sign : 1.0 - sign;
    amp[n] *= factor;
  }
  if (normalize) {
    const double nsq = 2.0 * (1.0 + sign * std::exp(-2.0 * alpha * alpha));
    if (nsq < 1e-300) throw NumericalError("cat state has vanishing norm");
    const double inv = 1.0 / std::sqrt(nsq);
    for (auto& a : amp) a *= inv;
  }
  return amp;
}

namespace {

void check_normalized(double nsq, const char* what) {
  if (std::abs(nsq - 1.0) > kComposeNormTol)
    throw StructureError(std::string(what) + " is not normalized");
}

}  // namespace

CompositeState compose(const std::vector<std::pair<AtomSite, std::array<cplx, 2>>>& atoms,
                       const cvec& cavity, FockCutoff cutoff) {
  require(cavity.size() == cutoff.dim(), "cavity vector length does not match cutoff");
  check_normalized(kernels::norm_sqr(cavity.data(), cavity.size()), "cavity vector");
  CompositeState out = compose_atoms(atoms);
  return attach_cavity(out, cavity, cutoff);
}

CompositeState compose_atoms(const std::vector<std::pair<AtomSite, std::array<cplx, 2>>>& atoms) {
  std::vector<AtomSite> sites;
  cvec amp{cplx{1.0, 0.0}};
  for (const auto& [site, a] : atoms) {
    check_normalized(std::norm(a[0]) + std::norm(a[1]), "atom state");
    sites.push_back(site);
    cvec next(amp.size() * 2);
    for (std::size_t i = 0; i < amp.size(); ++i) {
      next[2 * i] = amp[i] * a[0];
      next[2 * i + 1] = amp[i] * a[1];
    }
    amp = std::move(next);
  }
  return CompositeState(std::move(sites), std::nullopt, std::move(amp));
}

CompositeState extend_with_atom(const CompositeState& state, const AtomSite& site,
                                const std::array<cplx, 2>& a) {
  check_normalized(std::norm(a[0]) + std::norm(a[1]), "atom state");
  std::vector<AtomSite> sites = state.sites();
  sites.push_back(site);
  const std::size_t ncav = state.ncav();
  const std::size_t blocks = state.dim() / ncav;
  cvec amp(state.dim() * 2);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t n = 0; n < ncav; ++n) {
      const cplx v = state.amp()[b * ncav + n];
      amp[(2 * b) * ncav + n] = v * a[0];
      amp[(2 * b + 1) * ncav + n] = v * a[1];
    }
  }
  return CompositeState(std::move(sites), state.cutoff(), std::move(amp));
}

CompositeState tensor_product(const CompositeState& a, const CompositeState& b) {
  require(!a.has_cavity() && !b.has_cavity(), "tensor_product expects cavity-less states");
  std::vector<AtomSite> sites = a.sites();
  sites.insert(sites.end(), b.sites().begin(), b.sites().end());
  cvec amp(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < b.dim(); ++j) amp[i * b.dim() + j] = a.amp()[i] * b.amp()[j];
  }
  return CompositeState(std::move(sites), std::nullopt, std::move(amp));
}

CompositeState attach_cavity(const CompositeState& state, const cvec& cavity, FockCutoff cutoff) {
  require(!state.has_cavity(), "state already has a cavity");
  require(cavity.size() == cutoff.dim(), "cavity vector length does not match cutoff");
  cvec amp(state.dim() * cutoff.dim());
  for (std::size_t i = 0; i < state.dim(); ++i) {
    for (std::size_t n = 0; n < cutoff.dim(); ++n)
      amp[i * cutoff.dim() + n] = state.amp()[i] * cavity[n];
  }
  return CompositeState(state.sites(), cutoff, std::move(amp));
}

namespace {

// Rank-1 factorization amp[t][r] = u[t] * v[r] of a dim = T*R matrix view.
// Returns u (normalized together with v so that ||u||*||v|| = ||amp||) and
// the squared residual of the factorization.
struct Rank1 {
  cvec u;
  double residual_sqr;
};

Rank1 rank1_factor(const cvec& amp, std::size_t tdim, std::size_t rdim,
                   const std::vector<std::size_t>& tmap) {
  // tmap[i] gives (t, r) flattened as t*rdim + r for flat index i.
  std::vector<cvec> rows(tdim, cvec(rdim, cplx{0.0, 0.0}));
  for (std::size_t i = 0; i < amp.size(); ++i) {
    const std::size_t t = tmap[i] / rdim;
    const std::size_t r = tmap[i] % rdim;
    rows[t][r] = amp[i];
  }
  std::size_t best = 0;
  double best_nsq = -1.0;
  for (std::size_t t = 0; t < tdim; ++t) {
    const double nsq = kernels::norm_sqr(rows[t].data(), rdim);
    if (nsq > best_nsq) {
      best_nsq = nsq;
      best = t;
    }
  }
  if (best_nsq < 1e-28) throw NumericalError("cannot factor a vanishing state");
  cvec v = rows[best];
  const double vinv = 1.0 / std::sqrt(best_nsq);
  for (auto& x : v) x *= vinv;
  cvec u(tdim);
  double residual = 0.0;
  for (std::size_t t = 0; t < tdim; ++t) {
    u[t] = kernels::inner(v.data(), rows[t].data(), rdim);
    for (std::size_t r = 0; r < rdim; ++r) residual += std::norm(rows[t][r] - u[t] * v[r]);
  }
  return {std::move(u), residual};
}

// Maps each flat index of `state` to t*rdim + r where t runs over the bits of
// `tpos` (in the order given) and r over everything else (site order, cavity
// last).
std::vector<std::size_t> split_map(const CompositeState& state,
                                   const std::vector<std::size_t>& tpos, std::size_t* tdim_out,
                                   std::size_t* rdim_out) {
  const std::size_t k = state.atom_count();
  std::vector<bool> in_t(k, false);
  for (std::size_t p : tpos) in_t[p] = true;
  const std::size_t tdim = std::size_t{1} << tpos.size();
  const std::size_t rdim = state.dim() / tdim;
  std::vector<std::size_t> map(state.dim());
  std::vector<int> bits(k);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const std::size_t n = state.decompose(i, bits);
    std::size_t t = 0;
    for (std::size_t p : tpos) t = t * 2 + static_cast<std::size_t>(bits[p]);
    std::size_t r = 0;
    for (std::size_t p = 0; p < k; ++p) {
      if (!in_t[p]) r = r * 2 + static_cast<std::size_t>(bits[p]);
    }
    r = r * state.ncav() + n;
    map[i] = t * rdim + r;
  }
  *tdim_out = tdim;
  *rdim_out = rdim;
  return map;
}

}  // namespace

CompositeState reset_cavity(const CompositeState& state, const cvec& cavity, double residual_tol) {
  require(state.has_cavity(), "state has no cavity to reset");
  require(cavity.size() == state.ncav(), "cavity vector length does not match cutoff");
  check_normalized(kernels::norm_sqr(cavity.data(), cavity.size()), "cavity vector");
  // Factor as atoms (x) cavity; the cavity must not be entangled.
  const std::size_t ncav = state.ncav();
  const std::size_t blocks = state.dim() / ncav;
  std::vector<std::size_t> id(state.dim());
  for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
  Rank1 f = rank1_factor(state.amp(), blocks, ncav, id);
  if (f.residual_sqr > residual_tol)
    throw StructureError("cavity is still entangled with the atoms; cannot reset");
  const double unorm = std::sqrt(kernels::norm_sqr(f.u.data(), f.u.size()));
  cvec amp(state.dim());
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t n = 0; n < ncav; ++n) amp[b * ncav + n] = (f.u[b] / unorm) * cavity[n];
  }
  return CompositeState(state.sites(), state.cutoff(), std::move(amp));
}

CompositeState extract_atoms(const CompositeState& state, std::span<const std::string> labels,
                             double residual_tol) {
  require(!labels.empty(), "no atoms requested");
  std::vector<std::size_t> tpos;
  std::vector<AtomSite> sites;
  for (const auto& label : labels) {
    tpos.push_back(state.atom_pos(label));
    sites.push_back(state.sites()[tpos.back()]);
  }
  std::size_t tdim = 0;
  std::size_t rdim = 0;
  const auto map = split_map(state, tpos, &tdim, &rdim);
  Rank1 f = rank1_factor(state.amp(), tdim, rdim, map);
  if (f.residual_sqr > residual_tol)
    throw StructureError("requested atoms are entangled with the rest of the system");
  const double unorm = std::sqrt(kernels::norm_sqr(f.u.data(), f.u.size()));
  if (unorm < 1e-14) throw NumericalError("cannot normalize extracted factor");
  for (auto& x : f.u) x /= unorm;
  return CompositeState(std::move(sites), std::nullopt, std::move(f.u));
}

cplx inner_product(const CompositeState& a, const CompositeState& b) {
  if (!a.same_shape(b)) throw StructureError("states live on different spaces");
  return kernels::inner(a.amp().data(), b.amp().data(), a.dim());
}

double fidelity(const CompositeState& a, const CompositeState& b) {
  return std::norm(inner_product(a, b));
}

double subsystem_fidelity(const CompositeState& state, std::span<const std::string> labels,
                          std::span<const cplx> target) {
  std::vector<std::size_t> tpos;
  for (const auto& label : labels) tpos.push_back(state.atom_pos(label));
  std::size_t tdim = 0;
  std::size_t rdim = 0;
  const auto map = split_map(state, tpos, &tdim, &rdim);
  require(target.size() == tdim, "target vector length does not match subsystem");
  // F = sum_r |sum_t conj(target[t]) amp[t,r]|^2
  cvec proj(rdim, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const std::size_t t = map[i] / rdim;
    const std::size_t r = map[i] % rdim;
    proj[r] += std::conj(target[t]) * state.amp()[i];
  }
  return kernels::norm_sqr(proj.data(), rdim);
}

double top_level_mass(const CompositeState& state) {
  if (!state.has_cavity()) return 0.0;
  const std::size_t ncav = state.ncav();
  const std::size_t blocks = state.dim() / ncav;
  double mass = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) mass += std::norm(state.amp()[b * ncav + ncav - 1]);
  return mass;
}

}  // namespace cqt
