#pragma once

#include <complex>
#include <vector>

namespace cqt {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace cqt
