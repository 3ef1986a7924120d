#pragma once

#include "qsim/state.hpp"

#include <cmath>
#include <complex>

namespace qsim::testutil {

inline double max_abs_diff(const VectorC<double>& a, const VectorC<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const MatrixC<double>& a, const MatrixC<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Distance up to a global phase: min over phase of max entry difference.
inline double phase_free_diff(const VectorC<double>& a, const VectorC<double>& b) {
  std::complex<double> ov = (a.adjoint() * b)(0, 0);
  const double m = std::abs(ov);
  const std::complex<double> ph = (m > 1e-30) ? ov / m : std::complex<double>(1.0);
  return (a * ph - b).cwiseAbs().maxCoeff();
}

}  // namespace qsim::testutil
