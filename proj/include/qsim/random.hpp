// Seeded random state and operator generation.
//
// Uniform and gaussian variates are hand-rolled from mt19937_64 words because
// the standard distribution objects may emit different sequences across
// standard library implementations; byte-identical output requires pinning
// the whole pipeline to the (specified) mt19937_64 word sequence.

#pragma once

#include "qsim/state.hpp"

#include <cmath>
#include <random>

namespace qsim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0,1) with 53 significant bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; caches the second variate.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t word() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Haar-like random pure state: complex gaussian amplitudes, normalized.
inline StateVector<double> random_state(int qubit_count, Rng& rng) {
  VectorC<double> v(Index{1} << qubit_count);
  for (Index i = 0; i < v.size(); ++i) {
    const double re = rng.gaussian();
    const double im = rng.gaussian();
    v(i) = std::complex<double>(re, im);
  }
  return normalize(StateVector<double>(qubit_count, std::move(v))).first;
}

// Real-amplitude random state (all protocols here use real amplitudes).
inline StateVector<double> random_real_state(int qubit_count, Rng& rng) {
  VectorC<double> v(Index{1} << qubit_count);
  for (Index i = 0; i < v.size(); ++i) v(i) = std::complex<double>(rng.gaussian(), 0.0);
  return normalize(StateVector<double>(qubit_count, std::move(v))).first;
}

// Haar-distributed unitary via Ginibre ensemble + QR with phase fixing.
inline MatrixC<double> random_unitary(Index dim, Rng& rng) {
  MatrixC<double> g(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c)
      g(r, c) = std::complex<double>(rng.gaussian(), rng.gaussian());
  Eigen::HouseholderQR<MatrixC<double>> qr(g);
  MatrixC<double> q = qr.householderQ();
  MatrixC<double> rmat = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index c = 0; c < dim; ++c) {
    std::complex<double> d = rmat(c, c);
    const double m = std::abs(d);
    std::complex<double> ph = (m > 0.0) ? d / m : std::complex<double>(1.0);
    q.col(c) *= ph;
  }
  return q;
}

}  // namespace qsim
