#include "cqtsim/kernels.hpp"

#include <vector>

namespace cqt::kernels::serial {

void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m) {
  const std::size_t outer = dim / (2 * stride);
  for (std::size_t ob = 0; ob < outer; ++ob) {
    cplx* base = amp + ob * 2 * stride;
    for (std::size_t s = 0; s < stride; ++s) {
      const cplx x0 = base[s];
      const cplx x1 = base[s + stride];
      base[s] = m[0] * x0 + m[1] * x1;
      base[s + stride] = m[2] * x0 + m[3] * x1;
    }
  }
}

void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase) {
  const std::size_t outer = dim / (2 * stride);
  const std::size_t off = static_cast<std::size_t>(bit) * stride;
  for (std::size_t ob = 0; ob < outer; ++ob) {
    cplx* base = amp + ob * 2 * stride + off;
    for (std::size_t s = 0; s < stride; ++s) base[s] *= phase[s % ncav];
  }
}

void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn) {
  const std::size_t outer = dim / (2 * stride);
  const std::size_t qblocks = stride / ncav;
  for (std::size_t ob = 0; ob < outer; ++ob) {
    for (std::size_t q = 0; q < qblocks; ++q) {
      cplx* f0 = amp + ob * 2 * stride + q * ncav;  // atom bit 0 (lower level)
      cplx* e0 = f0 + stride;                       // atom bit 1 (upper level)
      for (std::size_t n = 1; n < ncav; ++n) {
        const cplx f = f0[n];
        const cplx e = e0[n - 1];
        const cplx mix(sn[n] * f.imag(), -sn[n] * f.real());  // -i*sin*f
        const cplx mix2(sn[n] * e.imag(), -sn[n] * e.real());
        f0[n] = cs[n] * f + mix2;
        e0[n - 1] = cs[n] * e + mix;
      }
    }
  }
}

void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m) {
  const std::size_t blocks = dim / ncav;
  std::vector<cplx> scratch(ncav);
  for (std::size_t b = 0; b < blocks; ++b) {
    cplx* x = amp + b * ncav;
    for (std::size_t r = 0; r < ncav; ++r) {
      cplx acc{0.0, 0.0};
      const cplx* row = m + r * ncav;
      for (std::size_t c = 0; c < ncav; ++c) acc += row[c] * x[c];
      scratch[r] = acc;
    }
    for (std::size_t r = 0; r < ncav; ++r) x[r] = scratch[r];
  }
}

cplx inner(const cplx* a, const cplx* b, std::size_t dim) {
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < dim; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm_sqr(const cplx* a, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) acc += std::norm(a[i]);
  return acc;
}

double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit) {
  const std::size_t outer = dim / (2 * stride);
  const std::size_t off = static_cast<std::size_t>(bit) * stride;
  double acc = 0.0;
  for (std::size_t ob = 0; ob < outer; ++ob) {
    const cplx* base = amp + ob * 2 * stride + off;
    for (std::size_t s = 0; s < stride; ++s) acc += std::norm(base[s]);
  }
  return acc;
}

void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor) {
  const std::size_t outer = dim / (2 * stride);
  for (std::size_t ob = 0; ob < outer; ++ob) {
    cplx* base = amp + ob * 2 * stride;
    cplx* keep = base + static_cast<std::size_t>(keep_bit) * stride;
    cplx* drop = base + static_cast<std::size_t>(1 - keep_bit) * stride;
    for (std::size_t s = 0; s < stride; ++s) {
      keep[s] *= factor;
      drop[s] = cplx{0.0, 0.0};
    }
  }
}

void scale(cplx* amp, std::size_t dim, double factor) {
  for (std::size_t i = 0; i < dim; ++i) amp[i] *= factor;
}

}  // namespace cqt::kernels::serial
