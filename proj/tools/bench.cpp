// Benchmark comparing the serial reference kernels against the OpenMP ones
// on two-atom registers with growing cavity cutoffs. Also cross-checks that
// both backends produce the same amplitudes.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include "cqtsim/kernels.hpp"
#include "cqtsim/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using cqt::cplx;
using cqt::cvec;
namespace kn = cqt::kernels;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

cvec random_state(std::size_t dim, cqt::Rng& rng) {
  cvec amp(dim);
  for (auto& a : amp) a = rng.normal_cplx();
  const double inv = 1.0 / std::sqrt(kn::serial::norm_sqr(amp.data(), dim));
  for (auto& a : amp) a *= inv;
  return amp;
}

double max_diff(const cvec& a, const cvec& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

struct Result {
  double serial_ms;
  double omp_ms;
  double diff;
};

// Runs fn(backend, amp) `reps` times on a private copy per backend and
// reports per-call time plus the final-state difference.
Result time_kernel(const cvec& input, int reps,
                   const std::function<void(kn::Backend, cvec&)>& fn) {
  Result r{};
  cvec serial_amp = input;
  double t0 = now_seconds();
  for (int i = 0; i < reps; ++i) fn(kn::Backend::serial, serial_amp);
  r.serial_ms = (now_seconds() - t0) * 1e3 / reps;

  cvec omp_amp = input;
  t0 = now_seconds();
  for (int i = 0; i < reps; ++i) fn(kn::Backend::openmp, omp_amp);
  r.omp_ms = (now_seconds() - t0) * 1e3 / reps;

  r.diff = max_diff(serial_amp, omp_amp);
  return r;
}

void report(const char* kernel, std::size_t dim, const Result& r) {
  std::printf("%-14s %9zu %12.4f %12.4f %8.2fx   %.2e\n", kernel, dim, r.serial_ms, r.omp_ms,
              r.serial_ms / r.omp_ms, r.diff);
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;
  }

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run the serial kernels\n");
#endif
  std::printf("%-14s %9s %12s %12s %9s   %s\n", "kernel", "dim", "serial ms", "omp ms",
              "speedup", "max |diff|");

  std::vector<std::size_t> cavity_dims{1u << 6, 1u << 10, 1u << 14};
  if (!quick) cavity_dims.push_back(1u << 18);

  cqt::Rng rng(1234);
  const std::array<cplx, 4> gate{cplx{0.6, 0.0}, cplx{0.8, 0.0}, cplx{-0.8, 0.0},
                                 cplx{0.6, 0.0}};

  for (std::size_t ncav : cavity_dims) {
    const std::size_t dim = 4 * ncav;  // two atoms
    const std::size_t stride = 2 * ncav;
    const cvec input = random_state(dim, rng);
    const int reps = std::max(1, static_cast<int>((quick ? 1u << 22 : 1u << 25) / dim));

    cvec phases(ncav);
    std::vector<double> cs(ncav), sn(ncav);
    for (std::size_t n = 0; n < ncav; ++n) {
      phases[n] = std::polar(1.0, 0.37 * static_cast<double>(n));
      const double theta = 0.125 * std::sqrt(static_cast<double>(n));
      cs[n] = std::cos(theta);
      sn[n] = std::sin(theta);
    }

    report("gate2", dim, time_kernel(input, reps, [&](kn::Backend be, cvec& amp) {
             kn::apply_gate2(amp.data(), dim, stride, gate.data(), be);
           }));
    report("fock_phase", dim, time_kernel(input, reps, [&](kn::Backend be, cvec& amp) {
             kn::apply_fock_phase(amp.data(), dim, stride, ncav, 0, phases.data(), be);
           }));
    report("jc", dim, time_kernel(input, reps, [&](kn::Backend be, cvec& amp) {
             kn::apply_jc(amp.data(), dim, stride, ncav, cs.data(), sn.data(), be);
           }));
    {
      // inner product: compare values instead of states
      cvec other = random_state(dim, rng);
      cvec dummy = input;
      double t0 = now_seconds();
      cplx acc_serial{};
      for (int i = 0; i < reps; ++i)
        acc_serial += kn::inner(input.data(), other.data(), dim, kn::Backend::serial);
      const double serial_ms = (now_seconds() - t0) * 1e3 / reps;
      t0 = now_seconds();
      cplx acc_omp{};
      for (int i = 0; i < reps; ++i)
        acc_omp += kn::inner(input.data(), other.data(), dim, kn::Backend::openmp);
      const double omp_ms = (now_seconds() - t0) * 1e3 / reps;
      report("inner", dim,
             Result{serial_ms, omp_ms, std::abs(acc_serial - acc_omp) / reps});
      (void)dummy;
    }
    if (ncav <= (1u << 10)) {
      // dense cavity matrix: quadratic in ncav, keep to moderate sizes
      cvec m(ncav * ncav);
      for (auto& x : m) x = rng.normal_cplx() * 0.01;
      const int mreps = std::max(1, static_cast<int>((1u << 24) / (ncav * dim)));
      report("cavity_matrix", dim, time_kernel(input, mreps, [&](kn::Backend be, cvec& amp) {
               kn::apply_cavity_matrix(amp.data(), dim, ncav, m.data(), be);
             }));
    }
  }
  return 0;
}
