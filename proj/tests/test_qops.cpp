#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>

#include "cqtsim/kernels.hpp"
#include "cqtsim/ops.hpp"

using namespace cqt;

namespace {

const std::array<cplx, 2> kF{cplx{1, 0}, cplx{0, 0}};
const std::array<cplx, 2> kG{cplx{0, 0}, cplx{1, 0}};

cvec vacuum(FockCutoff cutoff) {
  cvec v(cutoff.dim(), cplx{0, 0});
  v[0] = cplx{1, 0};
  return v;
}

cvec fock(FockCutoff cutoff, std::size_t n) {
  cvec v(cutoff.dim(), cplx{0, 0});
  v[n] = cplx{1, 0};
  return v;
}

CompositeState random_state(const CompositeState& shape, Rng& rng) {
  cvec amp(shape.dim());
  for (auto& a : amp) a = rng.normal_cplx();
  const double inv = 1.0 / std::sqrt(kernels::norm_sqr(amp.data(), amp.size()));
  for (auto& a : amp) a *= inv;
  return CompositeState(shape.sites(), shape.cutoff(), amp);
}

// Frozen ahead of the implementation: sum_{m>=1} Pois(16, m) sin^2(pi sqrt(m)/8),
// the excited-probe probability on a coherent field with mean photon number 16.
constexpr double kProbeRate = 0.9618802369699014;

}  // namespace

TEST_CASE("apply_gate") {
  const FockCutoff cutoff(4);
  const CompositeState g =
      compose({{AtomSite{"A1", AtomBasis::fg}, kG}}, vacuum(cutoff), cutoff);
  SUBCASE("R_H turns |g> into (|f>+|g>)/sqrt2") {
    const CompositeState out = apply_gate(g, "A1", Gate2::r_h());
    const double s = 1.0 / std::sqrt(2.0);
    const std::array<int, 1> f_bits{0}, g_bits{1};
    CHECK(out.amp()[out.index(f_bits, 0)].real() == doctest::Approx(s));
    CHECK(out.amp()[out.index(g_bits, 0)].real() == doctest::Approx(s));
  }
  SUBCASE("K maps (|f>+|g>)/sqrt2 to |g>") {
    const CompositeState plus = apply_gate(g, "A1", Gate2::r_h());
    const CompositeState out = apply_gate(plus, "A1", Gate2::k());
    CHECK(fidelity(out, g) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("identity is a no-op") {
    const CompositeState out = apply_gate(g, "A1", Gate2::identity());
    CHECK(fidelity(out, g) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("unknown atom") { CHECK_THROWS_AS(apply_gate(g, "A9", Gate2::r_h()), StructureError); }
  SUBCASE("non-unitary matrix") {
    CHECK_THROWS_AS(apply_gate(g, "A1", Gate2::custom({cplx{1, 0}, cplx{0, 0}, cplx{0, 0},
                                                       cplx{0.5, 0}})),
                    UsageError);
  }
  SUBCASE("presets are unitary") {
    for (const Gate2& gate : {Gate2::identity(), Gate2::r_h(), Gate2::k(), Gate2::r5(),
                              Gate2::z_corr(), Gate2::x_corr(), Gate2::xz_corr()}) {
      CHECK(gate.unitarity_defect() < 1e-15);
    }
  }
}

TEST_CASE("dispersive_gate") {
  const FockCutoff cutoff(64);
  SUBCASE("phi = pi flips the coherent amplitude on the |f> branch") {
    const CompositeState in = compose({{AtomSite{"A", AtomBasis::fg}, kF}},
                                      coherent_state(cplx{2, 0}, cutoff).amp, cutoff);
    const CompositeState want = compose({{AtomSite{"A", AtomBasis::fg}, kF}},
                                        coherent_state(cplx{-2, 0}, cutoff).amp, cutoff);
    CHECK(fidelity(dispersive_gate(in, "A", kPi), want) >= 1.0 - 1e-10);
  }
  SUBCASE("|g> branch is untouched") {
    const CompositeState in = compose({{AtomSite{"A", AtomBasis::fg}, kG}},
                                      coherent_state(cplx{2, 0}, cutoff).amp, cutoff);
    const CompositeState out = dispersive_gate(in, "A", kPi);
    CHECK(fidelity(out, in) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("phi = 0 is the identity") {
    Rng rng(2);
    const CompositeState in = random_state(
        CompositeState::ground({{"A", AtomBasis::fg}}, cutoff), rng);
    CHECK(fidelity(dispersive_gate(in, "A", 0.0), in) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("refuses a probe atom") {
    const CompositeState in = compose({{AtomSite{"P", AtomBasis::fe}, kF}},
                                      vacuum(cutoff), cutoff);
    CHECK_THROWS_AS(dispersive_gate(in, "P", kPi), UsageError);
  }
  SUBCASE("phases compose additively") {
    Rng rng(3);
    const CompositeState in = random_state(
        CompositeState::ground({{"A", AtomBasis::fg}}, FockCutoff(16)), rng);
    const CompositeState two = dispersive_gate(dispersive_gate(in, "A", 0.31), "A", 0.47);
    const CompositeState one = dispersive_gate(in, "A", 0.78);
    CHECK(fidelity(two, one) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("displace") {
  const FockCutoff cutoff(64);
  const CompositeState alpha2 = compose({}, coherent_state(cplx{2, 0}, cutoff).amp, cutoff);
  SUBCASE("displace(-alpha) empties the cavity") {
    const CompositeState out = displace(alpha2, cplx{-2, 0});
    const CompositeState want = compose({}, vacuum(cutoff), cutoff);
    CHECK(fidelity(out, want) >= 1.0 - 1e-10);
  }
  SUBCASE("displace(0) is the identity") {
    CHECK(fidelity(displace(alpha2, cplx{0, 0}), alpha2) >= 1.0 - 1e-12);
  }
  SUBCASE("displacing |-2> by -2 gives |-4>") {
    const CompositeState in = compose({}, coherent_state(cplx{-2, 0}, cutoff).amp, cutoff);
    const CompositeState want = compose({}, coherent_state(cplx{-4, 0}, cutoff).amp, cutoff);
    CHECK(fidelity(displace(in, cplx{-2, 0}), want) >= 1.0 - 1e-10);
  }
  SUBCASE("displace(b) then displace(-b) is the identity") {
    Rng rng(4);
    const CompositeState in = random_state(CompositeState::ground({}, FockCutoff(32)), rng);
    // keep the excursion small enough for the cutoff
    const CompositeState out = displace(displace(in, cplx{0.7, 0.4}, 1.0), cplx{-0.7, -0.4}, 1.0);
    CHECK(fidelity(out, in) >= 1.0 - 1e-10);
  }
  SUBCASE("norm preserved exactly by construction") {
    const CompositeState out = displace(alpha2, cplx{1.0, 0.5}, 1.0);
    CHECK(out.norm_sqr() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("tail violation raises with the reported mass") {
    const CompositeState small = compose({}, vacuum(FockCutoff(8)), FockCutoff(8));
    CHECK_THROWS_AS(displace(small, cplx{4, 0}), TruncationError);
    try {
      displace(small, cplx{4, 0});
    } catch (const TruncationError& e) {
      CHECK(e.reported_mass > 1e-12);
    }
  }
}

TEST_CASE("jc_evolve") {
  const FockCutoff cutoff(64);
  SUBCASE("|f,0> does not evolve") {
    const CompositeState in = compose({{AtomSite{"P", AtomBasis::fe}, kF}},
                                      vacuum(cutoff), cutoff);
    CHECK(fidelity(jc_evolve(in, "P", 0.7), in) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("gt = pi/2 maps |f,1> to -i|e,0>") {
    const CompositeState in = compose({{AtomSite{"P", AtomBasis::fe}, kF}},
                                      fock(FockCutoff(4), 1), FockCutoff(4));
    const CompositeState out = jc_evolve(in, "P", kPi / 2.0);
    const std::array<int, 1> e_bits{1};
    const cplx amp = out.amp()[out.index(e_bits, 0)];
    CHECK(std::abs(amp - cplx{0, -1}) < 1e-12);
    CHECK(out.norm_sqr() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("inverse pulse undoes the evolution") {
    Rng rng(5);
    CompositeState in = random_state(
        CompositeState::ground({{"P", AtomBasis::fe}}, FockCutoff(16)), rng);
    // clear the stranded corner so the guard accepts the random state
    cvec amp = in.amp();
    const std::array<int, 1> e_bits{1};
    amp[in.index(e_bits, 16)] = cplx{0, 0};
    const double inv = 1.0 / std::sqrt(kernels::norm_sqr(amp.data(), amp.size()));
    for (auto& a : amp) a *= inv;
    in = CompositeState(in.sites(), in.cutoff(), amp);
    const CompositeState out = jc_evolve(jc_evolve(in, "P", 0.9), "P", -0.9);
    CHECK(fidelity(out, in) >= 1.0 - 1e-12);
  }
  SUBCASE("excited-probe probability on |-4> matches the frozen sum") {
    const CompositeState in = compose({{AtomSite{"P", AtomBasis::fe}, kF}},
                                      coherent_state(cplx{-4, 0}, cutoff).amp, cutoff);
    const CompositeState out = jc_evolve(in, "P", kPi / 8.0);
    const double p = branch_probability(out, "P", "e");
    CHECK(p == doctest::Approx(kProbeRate).epsilon(1e-9));
    CHECK(p >= 0.95);
  }
  SUBCASE("amplitude stranded at (e, n_max) raises") {
    const CompositeState in = compose({{AtomSite{"P", AtomBasis::fe}, {cplx{0, 0}, cplx{1, 0}}}},
                                      fock(FockCutoff(4), 4), FockCutoff(4));
    CHECK_THROWS_AS(jc_evolve(in, "P", 0.3), TruncationError);
  }
  SUBCASE("requires a (f,e) atom") {
    const CompositeState in = compose({{AtomSite{"A", AtomBasis::fg}, kF}},
                                      vacuum(cutoff), cutoff);
    CHECK_THROWS_AS(jc_evolve(in, "A", 0.3), UsageError);
  }
}

TEST_CASE("measure_atom") {
  const FockCutoff cutoff(24);
  SUBCASE("deterministic on a basis state") {
    const CompositeState in = compose({{AtomSite{"A", AtomBasis::fg}, kF}},
                                      coherent_state(cplx{0.5, 0}, cutoff).amp, cutoff);
    Rng rng(1);
    const MeasurementOutcome m = measure_atom(in, "A", rng);
    CHECK(m.level == "f");
    CHECK(m.probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(m.post_state, in) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("collapse of an entangled partner") {
    const double s = 1.0 / std::sqrt(2.0);
    cvec bell{cplx{s, 0}, cplx{0, 0}, cplx{0, 0}, cplx{s, 0}};
    const CompositeState in({{"A1", AtomBasis::fg}, {"A2", AtomBasis::fg}}, std::nullopt, bell);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      Rng rng(seed);
      const MeasurementOutcome m = measure_atom(in, "A1", rng);
      CHECK(m.probability == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(branch_probability(m.post_state, "A2", m.level) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("statistics over seeded samples stay within 3 sigma") {
    const double s = 1.0 / std::sqrt(2.0);
    const CompositeState in = compose({{AtomSite{"A", AtomBasis::fg}, {cplx{s, 0}, cplx{s, 0}}}},
                                      vacuum(cutoff), cutoff);
    const int n = 100000;
    int f_count = 0;
    for (int i = 0; i < n; ++i) {
      Rng rng = Rng::derive(404, static_cast<std::uint64_t>(i));
      if (measure_atom(in, "A", rng).level == "f") ++f_count;
    }
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(f_count - n / 2.0) <= 3.0 * sigma);
  }
  SUBCASE("measurement probabilities equal postselect probabilities exactly") {
    Rng rng(17);
    const CompositeState in = random_state(
        CompositeState::ground({{"A", AtomBasis::fg}, {"B", AtomBasis::fg}}, cutoff), rng);
    const double pf = postselect(in, "A", "f").first;
    const double pg = postselect(in, "A", "g").first;
    Rng mrng(3);
    const MeasurementOutcome m = measure_atom(in, "A", mrng);
    CHECK(m.probability == (m.level == "f" ? pf : pg));
    CHECK(pf + pg == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("degenerate norm raises") {
    cvec tiny(8, cplx{0, 0});
    tiny[0] = cplx{1e-8, 0};
    const CompositeState in({{"A", AtomBasis::fg}}, FockCutoff(3), tiny);
    Rng rng(1);
    CHECK_THROWS_AS((void)measure_atom(in, "A", rng), NumericalError);
  }
}

TEST_CASE("postselect") {
  const FockCutoff cutoff(32);
  SUBCASE("trivial branch") {
    const CompositeState in = compose({{AtomSite{"A", AtomBasis::fg}, kF}},
                                      coherent_state(cplx{1, 0}, cutoff).amp, cutoff);
    const auto [prob, post] = postselect(in, "A", "f");
    CHECK(prob == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(post, in) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("impossible branch") {
    const CompositeState in = compose({{AtomSite{"P", AtomBasis::fe}, kF}},
                                      vacuum(cutoff), cutoff);
    const CompositeState evolved = jc_evolve(in, "P", 0.45);
    CHECK_THROWS_AS((void)postselect(evolved, "P", "e"), PostselectError);
  }
}

TEST_CASE("expectation_sigma_xx") {
  const double s = 1.0 / std::sqrt(2.0);
  const auto two_atom = [&](cvec amp) {
    return CompositeState({{"A1", AtomBasis::fg}, {"A2", AtomBasis::fg}}, std::nullopt,
                          std::move(amp));
  };
  CHECK(expectation_sigma_xx(two_atom({cplx{s, 0}, cplx{0, 0}, cplx{0, 0}, cplx{s, 0}}), "A1",
                             "A2") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation_sigma_xx(two_atom({cplx{0, 0}, cplx{s, 0}, cplx{s, 0}, cplx{0, 0}}), "A1",
                             "A2") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation_sigma_xx(two_atom({cplx{s, 0}, cplx{0, 0}, cplx{0, 0}, cplx{-s, 0}}), "A1",
                             "A2") == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(expectation_sigma_xx(two_atom({cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}}), "A1",
                             "A2") == doctest::Approx(0.0).epsilon(1e-12));
  // probe atoms are rejected
  const CompositeState bad({{"A1", AtomBasis::fg}, {"P", AtomBasis::fe}}, std::nullopt,
                           {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}});
  CHECK_THROWS_AS((void)expectation_sigma_xx(bad, "A1", "P"), UsageError);
}

TEST_CASE("every primitive preserves the norm") {
  Rng rng(31);
  const CompositeState shape = CompositeState::ground(
      {{"A", AtomBasis::fg}, {"P", AtomBasis::fe}}, FockCutoff(24));
  for (int rep = 0; rep < 10; ++rep) {
    CompositeState st = random_state(shape, rng);
    // clear the stranded probe corner for the jc guard
    cvec amp = st.amp();
    for (std::size_t b = 0; b < 2; ++b) {
      std::array<int, 2> bits{static_cast<int>(b), 1};
      amp[st.index(bits, 24)] = cplx{0, 0};
    }
    const double inv = 1.0 / std::sqrt(kernels::norm_sqr(amp.data(), amp.size()));
    for (auto& a : amp) a *= inv;
    st = CompositeState(st.sites(), st.cutoff(), amp);

    CHECK(apply_gate(st, "A", Gate2::r_h()).norm_sqr() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dispersive_gate(st, "A", 1.3).norm_sqr() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(displace(st, cplx{0.4, -0.2}, 1.0).norm_sqr() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(jc_evolve(st, "P", 0.8).norm_sqr() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
