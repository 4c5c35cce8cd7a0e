#pragma once

#include <cstddef>

#include "cqtsim/common.hpp"

// Amplitude-level kernels for a register laid out as
//   amp[((b1*2 + b2)*2 + ...)*ncav + n]
// (atoms most significant in site order, cavity least significant, stride 1).
// Every kernel exists twice: kernels::serial is the reference implementation,
// kernels::omp the OpenMP-parallel one. The dispatching wrappers pick the
// backend; Backend::automatic goes parallel only above kOmpThreshold so the
// protocol-sized states (dim ~ 1e3) never pay thread overhead.

namespace cqt::kernels {

enum class Backend { serial, openmp, automatic };

inline constexpr std::size_t kOmpThreshold = std::size_t{1} << 15;

namespace serial {

// 2x2 update across an atom of the given stride: (x0, x1) -> m * (x0, x1),
// m row-major, column j = image of basis state j.
void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m);

// amp[idx] *= phase[n] for every idx whose atom bit equals `bit`; n = idx % ncav.
void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase);

// Resonant exchange blocks {(f,n),(e,n-1)}, n in [1, ncav): rotation by
// cs[n] = cos(theta_n), sn[n] = sin(theta_n) with the -i off-diagonal phase.
// (f,0) and (e,ncav-1) are untouched.
void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn);

// Dense ncav x ncav (row-major) matrix applied to the cavity factor of every
// atomic configuration.
void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m);

cplx inner(const cplx* a, const cplx* b, std::size_t dim);  // conjugate-linear in a
double norm_sqr(const cplx* a, std::size_t dim);

// Probability mass of the atom branch with the given bit value.
double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit);

// Zero the complementary branch and multiply the kept one by `factor`.
void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor);

void scale(cplx* amp, std::size_t dim, double factor);

}  // namespace serial

namespace omp {

void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m);
void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase);
void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn);
void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m);
cplx inner(const cplx* a, const cplx* b, std::size_t dim);
double norm_sqr(const cplx* a, std::size_t dim);
double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit);
void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor);
void scale(cplx* amp, std::size_t dim, double factor);

}  // namespace omp

bool use_openmp(Backend be, std::size_t dim);

void apply_gate2(cplx* amp, std::size_t dim, std::size_t stride, const cplx* m,
                 Backend be = Backend::automatic);
void apply_fock_phase(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, int bit,
                      const cplx* phase, Backend be = Backend::automatic);
void apply_jc(cplx* amp, std::size_t dim, std::size_t stride, std::size_t ncav, const double* cs,
              const double* sn, Backend be = Backend::automatic);
void apply_cavity_matrix(cplx* amp, std::size_t dim, std::size_t ncav, const cplx* m,
                         Backend be = Backend::automatic);
cplx inner(const cplx* a, const cplx* b, std::size_t dim, Backend be = Backend::automatic);
double norm_sqr(const cplx* a, std::size_t dim, Backend be = Backend::automatic);
double branch_prob(const cplx* amp, std::size_t dim, std::size_t stride, int bit,
                   Backend be = Backend::automatic);
void collapse(cplx* amp, std::size_t dim, std::size_t stride, int keep_bit, double factor,
              Backend be = Backend::automatic);
void scale(cplx* amp, std::size_t dim, double factor, Backend be = Backend::automatic);

}  // namespace cqt::kernels
