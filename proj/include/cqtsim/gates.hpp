#pragma once

#include <array>
#include <cmath>
#include <string>

#include "cqtsim/common.hpp"

namespace cqt {

/// 2x2 unitary on one atom. Row-major storage in the basis order
/// (level 0, level 1) of the target site; column j is the image of basis
/// state j. Presets cover the Ramsey rotations and the classical-message
/// corrections used by the protocols.
struct Gate2 {
  std::array<cplx, 4> m;
  std::string name = "CUSTOM";

  static Gate2 identity() { return {{1, 0, 0, 1}, "IDENTITY"}; }
  /// (1/sqrt2) [[1,1],[-1,1]]: the beam-splitter-style Ramsey rotation.
  static Gate2 r_h() {
    const double s = 1.0 / std::sqrt(2.0);
    return {{s, s, -s, s}, "R_H"};
  }
  /// (1/sqrt2) [[1,-1],[1,1]]: the unravelling rotation used before readout.
  static Gate2 k() {
    const double s = 1.0 / std::sqrt(2.0);
    return {{s, -s, s, s}, "K"};
  }
  /// [[0,-1],[1,0]]: swaps the Bell families (Phi <-> Psi).
  static Gate2 r5() { return {{0, -1, 1, 0}, "R5"}; }
  static Gate2 z_corr() { return {{1, 0, 0, -1}, "Z_CORR"}; }
  static Gate2 x_corr() { return {{0, 1, 1, 0}, "X_CORR"}; }
  static Gate2 xz_corr() { return {{0, 1, -1, 0}, "XZ_CORR"}; }
  static Gate2 custom(const std::array<cplx, 4>& mat) { return {mat, "CUSTOM"}; }

  /// max |(U^dag U - 1)_{ij}|
  double unitarity_defect() const {
    const cplx a = m[0], b = m[1], c = m[2], d = m[3];
    const cplx g00 = std::conj(a) * a + std::conj(c) * c - 1.0;
    const cplx g01 = std::conj(a) * b + std::conj(c) * d;
    const cplx g11 = std::conj(b) * b + std::conj(d) * d - 1.0;
    return std::max({std::abs(g00), std::abs(g01), std::abs(g11)});
  }
  bool is_unitary(double tol = 1e-12) const { return unitarity_defect() <= tol; }
};

}  // namespace cqt
