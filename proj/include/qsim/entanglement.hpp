// Entanglement measures for two- and three-qubit registers.
//
// The three-qubit tangle is computed from the degree-4 hyperdeterminant of
// the amplitude tensor (primary path). An independent monogamy-based residual
// combining one-qubit purity with pairwise mixed-state concurrences is kept
// alongside as a cross-check oracle.

#pragma once

#include "qsim/state.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace qsim {

// Pure two-qubit concurrence: 2 |a00 a11 - a01 a10|.
template <typename T>
T concurrence(const StateVector<T>& s) {
  if (s.qubit_count() != 2) throw std::invalid_argument("concurrence needs 2 qubits");
  return T(2) * std::abs(s.amp(0) * s.amp(3) - s.amp(1) * s.amp(2));
}

// Pure three-qubit tangle via the quartic hyperdeterminant:
//   tau = 4 |d1 - 2 d2 + 4 d3|
// with d1, d2, d3 the standard symmetric combinations of the eight amplitudes.
template <typename T>
T three_tangle(const StateVector<T>& s) {
  if (s.qubit_count() != 3) throw std::invalid_argument("three_tangle needs 3 qubits");
  using C = std::complex<T>;
  // a(b0,b1,b2) = amp(4 b0 + 2 b1 + b2)
  const C a000 = s.amp(0), a001 = s.amp(1), a010 = s.amp(2), a011 = s.amp(3);
  const C a100 = s.amp(4), a101 = s.amp(5), a110 = s.amp(6), a111 = s.amp(7);

  const C d1 = a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110 +
               a010 * a010 * a101 * a101 + a100 * a100 * a011 * a011;
  const C d2 = a000 * a111 * a011 * a100 + a000 * a111 * a101 * a010 +
               a000 * a111 * a110 * a001 + a011 * a100 * a101 * a010 +
               a011 * a100 * a110 * a001 + a101 * a010 * a110 * a001;
  const C d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;

  return T(4) * std::abs(d1 - T(2) * d2 + T(4) * d3);
}

// Schmidt coefficients (descending singular values) across the bipartition
// side_a | complement. Length min(2^|A|, 2^|B|); squares sum to norm_sq.
template <typename T>
std::vector<T> schmidt(const StateVector<T>& s, std::vector<int> side_a) {
  const int n = s.qubit_count();
  if (side_a.empty() || static_cast<int>(side_a.size()) >= n)
    throw std::invalid_argument("bipartition must be a proper nonempty subset");
  std::sort(side_a.begin(), side_a.end());
  for (size_t j = 0; j + 1 < side_a.size(); ++j)
    if (side_a[j] == side_a[j + 1]) throw std::invalid_argument("duplicate qubit");
  for (int q : side_a)
    if (q < 0 || q >= n) throw std::invalid_argument("qubit out of range");

  std::vector<int> side_b;
  {
    size_t j = 0;
    for (int q = 0; q < n; ++q) {
      if (j < side_a.size() && side_a[j] == q) { ++j; continue; }
      side_b.push_back(q);
    }
  }
  const int ka = static_cast<int>(side_a.size());
  const int kb = static_cast<int>(side_b.size());
  const Index da = Index{1} << ka, db = Index{1} << kb;
  MatrixC<T> m(da, db);
  for (Index ia = 0; ia < da; ++ia) {
    Index abits = 0;
    for (int k = 0; k < ka; ++k)
      abits |= ((ia >> (ka - 1 - k)) & Index{1}) << (n - 1 - side_a[k]);
    for (Index ib = 0; ib < db; ++ib) {
      Index bbits = 0;
      for (int k = 0; k < kb; ++k)
        bbits |= ((ib >> (kb - 1 - k)) & Index{1}) << (n - 1 - side_b[k]);
      m(ia, ib) = s.amp(abits | bbits);
    }
  }
  Eigen::JacobiSVD<MatrixC<T>> svd(m);
  const auto& sv = svd.singularValues();
  std::vector<T> out(sv.data(), sv.data() + sv.size());
  return out;
}

// Mixed-state two-qubit concurrence (spin-flip construction):
//   rho_tilde = (Y tensor Y) conj(rho) (Y tensor Y),
//   C = max(0, l1 - l2 - l3 - l4) with l_i the descending square roots of the
//   eigenvalues of rho * rho_tilde.
template <typename T>
T mixed_concurrence(const DensityMatrix<T>& rho) {
  if (rho.qubit_count() != 2)
    throw std::invalid_argument("mixed_concurrence needs 2 qubits");
  using C = std::complex<T>;
  MatrixC<T> yy = MatrixC<T>::Zero(4, 4);
  // Y tensor Y is real: antidiagonal (-1, 1, 1, -1).
  yy(0, 3) = C(-1); yy(1, 2) = C(1); yy(2, 1) = C(1); yy(3, 0) = C(-1);
  MatrixC<T> tilde = yy * rho.matrix().conjugate() * yy;

  // The spectrum of rho * tilde equals that of sqrt(rho) * tilde * sqrt(rho),
  // which is Hermitian PSD; solving the similar Hermitian problem avoids the
  // O(sqrt(eps)) eigenvalue noise of the non-normal product.
  // Eigenvalues below this are spectral zeros; without this clamp the square
  // root inflates O(eps) solver noise to O(sqrt(eps)).
  auto clamped = [](T ev) { return ev < T(kExactTol) ? T(0) : ev; };

  Eigen::SelfAdjointEigenSolver<MatrixC<T>> rho_es(rho.matrix());
  MatrixC<T> root = MatrixC<T>::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    root += std::sqrt(clamped(rho_es.eigenvalues()(i))) *
            rho_es.eigenvectors().col(i) * rho_es.eigenvectors().col(i).adjoint();
  MatrixC<T> herm = root * tilde * root;
  herm = ((herm + herm.adjoint()) / T(2)).eval();

  Eigen::SelfAdjointEigenSolver<MatrixC<T>> es(herm);
  std::array<T, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(clamped(es.eigenvalues()(i)));
  std::sort(lam.begin(), lam.end(), std::greater<T>());
  return std::max(T(0), lam[0] - lam[1] - lam[2] - lam[3]);
}

// Monogamy residual for a pure three-qubit state, seen from qubit 0:
//   tau_res = 4 det(rho_0) - C(rho_01)^2 - C(rho_02)^2.
// For pure inputs this equals the hyperdeterminant tangle up to solver noise.
template <typename T>
T ckw_residual_tangle(const StateVector<T>& s) {
  if (s.qubit_count() != 3)
    throw std::invalid_argument("ckw_residual_tangle needs 3 qubits");
  auto rho_a = partial_trace(s, {0});
  const T det_a = (rho_a.matrix()(0, 0) * rho_a.matrix()(1, 1) -
                   rho_a.matrix()(0, 1) * rho_a.matrix()(1, 0))
                      .real();
  const T c_ab = mixed_concurrence(partial_trace(s, {0, 1}));
  const T c_ac = mixed_concurrence(partial_trace(s, {0, 2}));
  return T(4) * det_a - c_ab * c_ab - c_ac * c_ac;
}

template <typename T>
struct EntanglementReport {
  std::optional<T> concurrence;   // two-qubit registers
  std::optional<T> three_tangle;  // three-qubit registers
  std::vector<T> schmidt_coeffs;  // across the requested bipartition
};

template <typename T>
EntanglementReport<T> entanglement_report(const StateVector<T>& s,
                                          const std::vector<int>& side_a) {
  EntanglementReport<T> rep;
  if (s.qubit_count() == 2) rep.concurrence = concurrence(s);
  if (s.qubit_count() == 3) rep.three_tangle = three_tangle(s);
  rep.schmidt_coeffs = schmidt(s, side_a);
  return rep;
}

}  // namespace qsim
