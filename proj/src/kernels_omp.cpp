#include <cstdint>
#include <vector>

#include "cqtsim/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// OpenMP flavors of the amplitude kernels. Reductions accumulate into
// per-thread partials that are summed in thread order, so results do not
// depend on scheduling for a fixed thread count.

namespace cqt::kernels {

namespace omp {

#ifdef _OPENMP

namespace {
using idx_t = std::int64_t;
}

void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m) {
  const idx_t outer = static_cast<idx_t>(dim / (2 * stride));
  const idx_t istride = static_cast<idx_t>(stride);
  const cplx m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t ob = 0; ob < outer; ++ob) {
    for (idx_t s = 0; s < istride; ++s) {
      cplx* base = amp + ob * 2 * istride;
      const cplx x0 = base[s];
      const cplx x1 = base[s + istride];
      base[s] = m0 * x0 + m1 * x1;
      base[s + istride] = m2 * x0 + m3 * x1;
    }
  }
}

void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase) {
  const idx_t outer = static_cast<idx_t>(dim / (2 * stride));
  const idx_t istride = static_cast<idx_t>(stride);
  const idx_t incav = static_cast<idx_t>(ncav);
  const idx_t off = static_cast<idx_t>(bit) * istride;
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t ob = 0; ob < outer; ++ob) {
    for (idx_t s = 0; s < istride; ++s) {
      amp[ob * 2 * istride + off + s] *= phase[s % incav];
    }
  }
}

void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn) {
  const idx_t outer = static_cast<idx_t>(dim / (2 * stride));
  const idx_t qblocks = static_cast<idx_t>(stride / ncav);
  const idx_t istride = static_cast<idx_t>(stride);
  const idx_t incav = static_cast<idx_t>(ncav);
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t ob = 0; ob < outer; ++ob) {
    for (idx_t q = 0; q < qblocks; ++q) {
      cplx* f0 = amp + ob * 2 * istride + q * incav;
      cplx* e0 = f0 + istride;
      for (idx_t n = 1; n < incav; ++n) {
        const cplx f = f0[n];
        const cplx e = e0[n - 1];
        const cplx mix(sn[n] * f.imag(), -sn[n] * f.real());
        const cplx mix2(sn[n] * e.imag(), -sn[n] * e.real());
        f0[n] = cs[n] * f + mix2;
        e0[n - 1] = cs[n] * e + mix;
      }
    }
  }
}

void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m) {
  const idx_t blocks = static_cast<idx_t>(dim / ncav);
  const idx_t incav = static_cast<idx_t>(ncav);
#pragma omp parallel
  {
    std::vector<cplx> scratch(ncav);
#pragma omp for schedule(static)
    for (idx_t b = 0; b < blocks; ++b) {
      cplx* x = amp + b * incav;
      for (idx_t r = 0; r < incav; ++r) {
        cplx acc{0.0, 0.0};
        const cplx* row = m + r * incav;
        for (idx_t c = 0; c < incav; ++c) acc += row[c] * x[c];
        scratch[r] = acc;
      }
      for (idx_t r = 0; r < incav; ++r) x[r] = scratch[r];
    }
  }
}

cplx inner(const cplx* a, const cplx* b, std::size_t dim) {
  const int nthreads = omp_get_max_threads();
  std::vector<cplx> partial(nthreads, cplx{0.0, 0.0});
  const idx_t n = static_cast<idx_t>(dim);
#pragma omp parallel
  {
    const int tid = omp_get_thread_num();
    cplx acc{0.0, 0.0};
#pragma omp for schedule(static)
    for (idx_t i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
    partial[tid] = acc;
  }
  cplx total{0.0, 0.0};
  for (const cplx& p : partial) total += p;
  return total;
}

double norm_sqr(const cplx* a, std::size_t dim) {
  const int nthreads = omp_get_max_threads();
  std::vector<double> partial(nthreads, 0.0);
  const idx_t n = static_cast<idx_t>(dim);
#pragma omp parallel
  {
    const int tid = omp_get_thread_num();
    double acc = 0.0;
#pragma omp for schedule(static)
    for (idx_t i = 0; i < n; ++i) acc += std::norm(a[i]);
    partial[tid] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit) {
  const idx_t outer = static_cast<idx_t>(dim / (2 * stride));
  const idx_t istride = static_cast<idx_t>(stride);
  const idx_t off = static_cast<idx_t>(bit) * istride;
  const int nthreads = omp_get_max_threads();
  std::vector<double> partial(nthreads, 0.0);
#pragma omp parallel
  {
    const int tid = omp_get_thread_num();
    double acc = 0.0;
#pragma omp for collapse(2) schedule(static)
    for (idx_t ob = 0; ob < outer; ++ob) {
      for (idx_t s = 0; s < istride; ++s) acc += std::norm(amp[ob * 2 * istride + off + s]);
    }
    partial[tid] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor) {
  const idx_t outer = static_cast<idx_t>(dim / (2 * stride));
  const idx_t istride = static_cast<idx_t>(stride);
  const idx_t keep_off = static_cast<idx_t>(keep_bit) * istride;
  const idx_t drop_off = static_cast<idx_t>(1 - keep_bit) * istride;
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t ob = 0; ob < outer; ++ob) {
    for (idx_t s = 0; s < istride; ++s) {
      cplx* base = amp + ob * 2 * istride;
      base[keep_off + s] *= factor;
      base[drop_off + s] = cplx{0.0, 0.0};
    }
  }
}

void scale(cplx* amp, std::size_t dim, double factor) {
  const idx_t n = static_cast<idx_t>(dim);
#pragma omp parallel for schedule(static)
  for (idx_t i = 0; i < n; ++i) amp[i] *= factor;
}

#else  // !_OPENMP: fall back to the reference kernels

void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m) {
  serial::apply_gate2(amp, dim, stride, m);
}
void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase) {
  serial::apply_fock_phase(amp, dim, stride, ncav, bit, phase);
}
void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn) {
  serial::apply_jc(amp, dim, stride, ncav, cs, sn);
}
void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m) {
  serial::apply_cavity_matrix(amp, dim, ncav, m);
}
cplx inner(const cplx* a, const cplx* b, std::size_t dim) { return serial::inner(a, b, dim); }
double norm_sqr(const cplx* a, std::size_t dim) { return serial::norm_sqr(a, dim); }
double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit) {
  return serial::branch_prob(amp, dim, stride, bit);
}
void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor) {
  serial::collapse(amp, dim, stride, keep_bit, factor);
}
void scale(cplx* amp, std::size_t dim, double factor) { serial::scale(amp, dim, factor); }

#endif

}  // namespace omp

bool use_openmp(Backend be, std::size_t dim) {
#ifdef _OPENMP
  switch (be) {
    case Backend::serial:
      return false;
    case Backend::openmp:
      return true;
    case Backend::automatic:
      return dim >= kOmpThreshold;
  }
  return false;
#else
  (void)be;
  (void)dim;
  return false;
#endif
}

void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m, Backend be) {
  use_openmp(be, dim) ? omp::apply_gate2(amp, dim, stride, m)
                      : serial::apply_gate2(amp, dim, stride, m);
}

void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase, Backend be) {
  use_openmp(be, dim) ? omp::apply_fock_phase(amp, dim, stride, ncav, bit, phase)
                      : serial::apply_fock_phase(amp, dim, stride, ncav, bit, phase);
}

void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn, Backend be) {
  use_openmp(be, dim) ? omp::apply_jc(amp, dim, stride, ncav, cs, sn)
                      : serial::apply_jc(amp, dim, stride, ncav, cs, sn);
}

void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m, Backend be) {
  use_openmp(be, dim) ? omp::apply_cavity_matrix(amp, dim, ncav, m)
                      : serial::apply_cavity_matrix(amp, dim, ncav, m);
}

cplx inner(const cplx* a, const cplx* b, std::size_t dim, Backend be) {
  return use_openmp(be, dim) ? omp::inner(a, b, dim) : serial::inner(a, b, dim);
}

double norm_sqr(const cplx* a, std::size_t dim, Backend be) {
  return use_openmp(be, dim) ? omp::norm_sqr(a, dim) : serial::norm_sqr(a, dim);
}

double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit, Backend be) {
  return use_openmp(be, dim) ? omp::branch_prob(amp, dim, stride, bit)
                             : serial::branch_prob(amp, dim, stride, bit);
}

void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor,
              Backend be) {
  use_openmp(be, dim) ? omp::collapse(amp, dim, stride, keep_bit, factor)
                      : serial::collapse(amp, dim, stride, keep_bit, factor);
}

void scale(cplx* amp, std::size_t dim, double factor, Backend be) {
  use_openmp(be, dim) ? omp::scale(amp, dim, factor) : serial::scale(amp, dim, factor);
}

}  // namespace cqt::kernels
