#include "cqtsim/oracle.hpp"

#include <cmath>

namespace cqt::oracle {

namespace {

std::size_t checked_dim(const CompositeState& shape) {
  if (shape.dim() > kMaxDenseDim)
    throw StructureError("composite dimension exceeds the dense-oracle cap");
  return shape.dim();
}

cvec dense_identity(std::size_t d) {
  cvec m(d * d, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i) m[i * d + i] = cplx{1.0, 0.0};
  return m;
}

cvec matmul(const cvec& a, const cvec& b, std::size_t d) {
  cvec out(d * d, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const cplx aik = a[i * d + k];
      if (aik == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += aik * b[k * d + j];
    }
  }
  return out;
}

// exp(G) by scaling and squaring with a plain Taylor series; independent of
// the eigensolver route used by the fast path.
cvec taylor_exp(const cvec& g, std::size_t d) {
  double norm_inf = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < d; ++c) row += std::abs(g[r * d + c]);
    norm_inf = std::max(norm_inf, row);
  }
  int squarings = 0;
  double scale = 1.0;
  while (norm_inf * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  cvec scaled(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) scaled[i] = g[i] * scale;

  cvec result = dense_identity(d);
  cvec term = dense_identity(d);
  for (int k = 1; k <= 24; ++k) {
    term = matmul(term, scaled, d);
    const double inv = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < term.size(); ++i) {
      term[i] *= inv;
      result[i] += term[i];
    }
  }
  for (int s = 0; s < squarings; ++s) result = matmul(result, result, d);
  return result;
}

int atom_bit_of(const CompositeState& shape, std::size_t idx, std::size_t pos) {
  return static_cast<int>((idx / shape.stride(pos)) % 2);
}

std::size_t cavity_of(const CompositeState& shape, std::size_t idx) {
  return idx % shape.ncav();
}

// True when i and j agree on every subsystem except (optionally) the listed
// atom and/or the cavity.
bool agree_elsewhere(const CompositeState& shape, std::size_t i, std::size_t j,
                     std::size_t skip_pos, bool skip_cavity) {
  for (std::size_t p = 0; p < shape.atom_count(); ++p) {
    if (p == skip_pos) continue;
    if (atom_bit_of(shape, i, p) != atom_bit_of(shape, j, p)) return false;
  }
  if (!skip_cavity && cavity_of(shape, i) != cavity_of(shape, j)) return false;
  return true;
}

}  // namespace

double DenseUnitary::unitarity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t k = 0; k < dim; ++k) acc += std::conj(m[k * dim + i]) * m[k * dim + j];
      if (i == j) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

cvec DenseUnitary::apply(const cvec& x) const {
  cvec y(dim, cplx{0.0, 0.0});
  for (std::size_t r = 0; r < dim; ++r) {
    cplx acc{0.0, 0.0};
    for (std::size_t c = 0; c < dim; ++c) acc += m[r * dim + c] * x[c];
    y[r] = acc;
  }
  return y;
}

DenseUnitary dense_unitary(const PrimitiveSpec& spec, const CompositeState& shape) {
  const std::size_t d = checked_dim(shape);
  DenseUnitary u{d, cvec(d * d, cplx{0.0, 0.0}), ""};

  if (const auto* g = std::get_if<GateSpec>(&spec)) {
    const std::size_t pos = shape.atom_pos(g->atom);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (!agree_elsewhere(shape, i, j, pos, false)) continue;
        u.m[i * d + j] = g->gate.m[static_cast<std::size_t>(atom_bit_of(shape, i, pos)) * 2 +
                                   static_cast<std::size_t>(atom_bit_of(shape, j, pos))];
      }
    }
    u.provenance = "gate:" + g->gate.name + "@" + g->atom;
    return u;
  }

  if (const auto* disp = std::get_if<DispersiveSpec>(&spec)) {
    const std::size_t pos = shape.atom_pos(disp->atom);
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t n = cavity_of(shape, i);
      u.m[i * d + i] = atom_bit_of(shape, i, pos) == 0
                           ? std::polar(1.0, disp->phi * static_cast<double>(n))
                           : cplx{1.0, 0.0};
    }
    u.provenance = "dispersive:phi=" + std::to_string(disp->phi) + "@" + disp->atom;
    return u;
  }

  if (const auto* dis = std::get_if<DisplaceSpec>(&spec)) {
    const std::size_t ncav = shape.ncav();
    cvec gen(ncav * ncav, cplx{0.0, 0.0});
    for (std::size_t r = 0; r + 1 < ncav; ++r) {
      const double root = std::sqrt(static_cast<double>(r + 1));
      gen[(r + 1) * ncav + r] = dis->beta * root;                // beta a^dag
      gen[r * ncav + (r + 1)] = -std::conj(dis->beta) * root;    // -conj(beta) a
    }
    const cvec dc = taylor_exp(gen, ncav);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (!agree_elsewhere(shape, i, j, shape.atom_count(), true)) continue;
        u.m[i * d + j] = dc[cavity_of(shape, i) * ncav + cavity_of(shape, j)];
      }
    }
    u.provenance = "displace:beta=(" + std::to_string(dis->beta.real()) + "," +
                   std::to_string(dis->beta.imag()) + ")";
    return u;
  }

  const auto& jc = std::get<JcSpec>(spec);
  const std::size_t pos = shape.atom_pos(jc.atom);
  if (shape.sites()[pos].basis != AtomBasis::fe)
    throw UsageError("dense resonant evolution requires a (f,e) atom");
  const std::size_t ncav = shape.ncav();
  u.m = dense_identity(d);
  const std::size_t stride = shape.stride(pos);
  const std::size_t outer = d / (2 * stride);
  const std::size_t qblocks = stride / ncav;
  for (std::size_t ob = 0; ob < outer; ++ob) {
    for (std::size_t q = 0; q < qblocks; ++q) {
      const std::size_t base = ob * 2 * stride + q * ncav;
      for (std::size_t n = 1; n < ncav; ++n) {
        const double theta = jc.gt * std::sqrt(static_cast<double>(n));
        const cplx c{std::cos(theta), 0.0};
        const cplx ms{0.0, -std::sin(theta)};
        const std::size_t i_f = base + n;
        const std::size_t i_e = base + stride + n - 1;
        u.m[i_f * d + i_f] = c;
        u.m[i_f * d + i_e] = ms;
        u.m[i_e * d + i_e] = c;
        u.m[i_e * d + i_f] = ms;
      }
    }
  }
  u.provenance = "jc:gt=" + std::to_string(jc.gt) + "@" + jc.atom;
  return u;
}

double probe_success_probability(double alpha_eff, double gt, int n_max) {
  const double mean = alpha_eff * alpha_eff;
  // Kahan-compensated sum of p_m sin^2(gt sqrt(m)), p_m Poisson(mean).
  double p = std::exp(-mean);  // p_0
  double sum = 0.0;
  double comp = 0.0;
  for (int m = 1; m <= n_max; ++m) {
    p *= mean / static_cast<double>(m);
    const double s = std::sin(gt * std::sqrt(static_cast<double>(m)));
    const double term = p * s * s;
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  // Tail of the photon distribution past the cutoff must be negligible.
  double tail = 0.0;
  double q = p;
  for (int m = n_max + 1; m <= n_max + 4 * static_cast<int>(mean) + 200; ++m) {
    q *= mean / static_cast<double>(m);
    tail += q;
    if (q == 0.0) break;
  }
  if (tail > 1e-12)
    throw TruncationError("coherent field does not fit the cutoff in the probe sum", tail);
  return sum;
}

std::array<cplx, 4> reduced_qubit_dm(const CompositeState& state, std::string_view atom) {
  const std::size_t pos = state.atom_pos(atom);
  const std::size_t stride = state.stride(pos);
  const std::size_t outer = state.dim() / (2 * stride);
  std::array<cplx, 4> dm{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}};
  for (std::size_t ob = 0; ob < outer; ++ob) {
    const cplx* base = state.amp().data() + ob * 2 * stride;
    for (std::size_t s = 0; s < stride; ++s) {
      const cplx v0 = base[s];
      const cplx v1 = base[s + stride];
      dm[0] += v0 * std::conj(v0);
      dm[1] += v0 * std::conj(v1);
      dm[2] += v1 * std::conj(v0);
      dm[3] += v1 * std::conj(v1);
    }
  }
  return dm;
}

double purity(const std::array<cplx, 4>& dm) {
  // tr(rho^2) for Hermitian rho
  return std::norm(dm[0]) + std::norm(dm[3]) + 2.0 * std::norm(dm[1]);
}

TeleportEnumeration enumerate_teleport(const InputQubit& input, const ProtocolParams& params,
                                       InjectionSign injection) {
  params.validate();
  const std::string a1 = "A1", a2 = "A2", a4 = "A4", probe = "A3";
  BellPreparation pair = prepare_bell(params, BellKind::phi_plus, a2, a4);
  CompositeState qubit = compose_atoms({{AtomSite{a1, AtomBasis::fg}, {input.zeta, input.xi}}});
  CoherentVector cav = coherent_state(cplx{-params.alpha, 0.0}, params.cutoff());
  CompositeState state =
      attach_cavity(tensor_product(qubit, pair.state), cav.amp, params.cutoff());
  state = dispersive_gate(state, a1, params.phi);
  state = dispersive_gate(state, a2, params.phi);
  state = displace(state, cplx{injection == InjectionSign::plus ? params.alpha : -params.alpha,
                               0.0},
                   params.tail_tol);
  state = extend_with_atom(state, AtomSite{probe, AtomBasis::fe}, {cplx{1, 0}, cplx{0, 0}});
  state = jc_evolve(state, probe, params.gt_probe);

  TeleportEnumeration out;
  out.probe_success_probability = branch_probability(state, probe, "e");

  auto [p_fail, fail_state] = postselect(state, probe, "f", 1e-300);
  out.failure_bob_dm = reduced_qubit_dm(fail_state, a4);

  auto [p_e, success] = postselect(state, probe, "e", params.postselect_min);
  success = apply_gate(success, a1, Gate2::k());
  success = apply_gate(success, a2, Gate2::k());

  for (auto& entry : out.average_bob_dm) entry = cplx{0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    out.average_bob_dm[i] += (1.0 - p_e) * out.failure_bob_dm[i];
  }

  const std::array<cplx, 2> target{input.zeta, input.xi};
  const std::array<std::string, 1> bob_label{a4};
  int idx = 0;
  for (const char* o1 : {"f", "g"}) {
    auto [p1, s1] = postselect(success, a1, o1, 1e-300);
    for (const char* o2 : {"f", "g"}) {
      auto [p2, s2] = postselect(s1, a2, o2, 1e-300);
      TeleportBranch& branch = out.branches[idx++];
      branch.outcome1 = o1;
      branch.outcome2 = o2;
      branch.probability = p_e * p1 * p2;
      CompositeState bob = extract_atoms(s2, bob_label);
      branch.bob_state = {bob.amp()[0], bob.amp()[1]};

      const Gate2 corr = bob_correction({injection, o1, o2});
      const cplx c0 = corr.m[0] * branch.bob_state[0] + corr.m[1] * branch.bob_state[1];
      const cplx c1 = corr.m[2] * branch.bob_state[0] + corr.m[3] * branch.bob_state[1];
      branch.corrected_fidelity = std::norm(std::conj(target[0]) * c0 + std::conj(target[1]) * c1);

      out.average_bob_dm[0] += branch.probability * branch.bob_state[0] *
                               std::conj(branch.bob_state[0]);
      out.average_bob_dm[1] += branch.probability * branch.bob_state[0] *
                               std::conj(branch.bob_state[1]);
      out.average_bob_dm[2] += branch.probability * branch.bob_state[1] *
                               std::conj(branch.bob_state[0]);
      out.average_bob_dm[3] += branch.probability * branch.bob_state[1] *
                               std::conj(branch.bob_state[1]);
    }
  }
  return out;
}

}  // namespace cqt::oracle
