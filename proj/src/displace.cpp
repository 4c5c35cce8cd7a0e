#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "cqtsim/kernels.hpp"
#include "cqtsim/ops.hpp"

namespace cqt {

namespace {

// exp(beta a^dag - conj(beta) a) on the truncated space, via the spectral
// decomposition of the Hermitian generator H = i(beta a^dag - conj(beta) a):
// D = V exp(-i Lambda) V^dag. Unitary up to eigensolver roundoff.
cvec build_displacement(cplx beta, std::size_t ncav) {
  using Mat = Eigen::MatrixXcd;
  const auto n = static_cast<Eigen::Index>(ncav);
  Mat h = Mat::Zero(n, n);
  const cplx i{0.0, 1.0};
  for (Eigen::Index r = 0; r + 1 < n; ++r) {
    const double root = std::sqrt(static_cast<double>(r + 1));
    // a^dag |r> = sqrt(r+1) |r+1>  ->  H_{r+1,r} = i beta sqrt(r+1)
    h(r + 1, r) = i * beta * root;
    h(r, r + 1) = std::conj(h(r + 1, r));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Mat d = es.eigenvectors() *
          (es.eigenvalues().array() * cplx{0.0, -1.0}).exp().matrix().asDiagonal() *
          es.eigenvectors().adjoint();
  cvec out(ncav * ncav);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) out[static_cast<std::size_t>(r * n + c)] = d(r, c);
  }
  return out;
}

// Protocol runs displace by the same few amplitudes thousands of times;
// memoize the matrix. Shared pointers keep entries valid without holding the
// lock during the matvec.
std::shared_ptr<const cvec> displacement_matrix(cplx beta, std::size_t ncav) {
  using Key = std::tuple<double, double, std::size_t>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const cvec>> cache;
  const Key key{beta.real(), beta.imag(), ncav};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto mat = std::make_shared<const cvec>(build_displacement(beta, ncav));
  std::lock_guard<std::mutex> lock(mu);
  return cache.try_emplace(key, std::move(mat)).first->second;
}

}  // namespace

CompositeState displace(const CompositeState& state, cplx beta, double tail_tol) {
  if (!state.has_cavity()) throw UsageError("displacement requires a cavity");
  const std::size_t ncav = state.ncav();
  auto mat = displacement_matrix(beta, ncav);
  CompositeState out = state;
  kernels::apply_cavity_matrix(out.amp_mut().data(), out.dim(), ncav, mat->data());
  const double mass = top_level_mass(out);
  if (mass > tail_tol)
    throw TruncationError("displacement pushed probability mass onto the Fock cutoff", mass);
  return out;
}

}  // namespace cqt
