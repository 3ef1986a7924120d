// Dense state-vector core for few-qubit registers.
//
// Conventions (frozen, reported by the CLI in every output):
//   * qubit 0 is the leftmost ket symbol and the most significant bit of the
//     amplitude index: i = sum_k b_k * 2^(n-1-k).
//   * Bell basis: phi+- = (|00> +- |11>)/sqrt(2), psi+- = (|01> +- |10>)/sqrt(2).
//
// All operations are pure functions on immutable values.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsim {

using Index = Eigen::Index;

template <typename T = double>
using VectorC = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;
template <typename T = double>
using MatrixC = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

// Tolerance tiers: exact algebra vs quantities passing through eigen/root solves.
inline constexpr double kExactTol = 1e-12;
inline constexpr double kRootTol = 1e-9;
// Squared norm below which a measurement branch is impossible.
inline constexpr double kZeroNormSq = 1e-24;

// Bit value of qubit q in basis index i of an n-qubit register (MSB-first).
inline Index bit_of(Index i, int q, int n) { return (i >> (n - 1 - q)) & Index{1}; }

// Pure n-qubit state; n = 0 is the single-amplitude scalar register left after
// measuring every qubit. The `normalized` tag is a caller assertion maintained
// by normalize() and unitary apply_op().
template <typename T = double>
class StateVector {
 public:
  using Scalar = T;
  using Cplx = std::complex<T>;
  using Vector = VectorC<T>;

  StateVector(int qubit_count, Vector amps, bool normalized = false)
      : qubit_count_(qubit_count), amps_(std::move(amps)), normalized_(normalized) {
    if (qubit_count_ < 0 || qubit_count_ > 24)
      throw std::invalid_argument("qubit_count out of supported range [0,24]");
    if (amps_.size() != (Index{1} << qubit_count_))
      throw std::invalid_argument("amplitude count must equal 2^qubit_count");
    if (!amps_.allFinite()) throw std::invalid_argument("non-finite amplitude");
  }

  static StateVector basis(int qubit_count, Index i) {
    Vector v = Vector::Zero(Index{1} << qubit_count);
    if (i < 0 || i >= v.size()) throw std::invalid_argument("basis index out of range");
    v(i) = Cplx(1);
    return StateVector(qubit_count, std::move(v), true);
  }

  static StateVector from_amps(int qubit_count, std::initializer_list<Cplx> amps,
                               bool normalized = false) {
    Vector v(static_cast<Index>(amps.size()));
    Index k = 0;
    for (const Cplx& a : amps) v(k++) = a;
    return StateVector(qubit_count, std::move(v), normalized);
  }

  int qubit_count() const { return qubit_count_; }
  Index dim() const { return amps_.size(); }
  const Vector& amps() const { return amps_; }
  Cplx amp(Index i) const { return amps_(i); }
  T norm_sq() const { return amps_.squaredNorm(); }
  bool is_normalized() const { return normalized_; }

 private:
  int qubit_count_;
  Vector amps_;
  bool normalized_;
};

// Square 2x2 or 4x4 operator acting on one or two qubits.
template <typename T = double>
class QubitOperator {
 public:
  using Matrix = MatrixC<T>;

  explicit QubitOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4))
      throw std::invalid_argument("operator must be 2x2 or 4x4");
    if (!m_.allFinite()) throw std::invalid_argument("non-finite operator entry");
  }

  Index dim() const { return m_.rows(); }
  int qubit_span() const { return m_.rows() == 2 ? 1 : 2; }
  const Matrix& matrix() const { return m_; }

  bool is_unitary(T tol = T(kExactTol)) const {
    Matrix d = m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols());
    return d.cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Matrix m_;
};

template <typename T = double>
QubitOperator<T> identity_op() {
  return QubitOperator<T>(MatrixC<T>::Identity(2, 2));
}

template <typename T = double>
QubitOperator<T> pauli_x() {
  MatrixC<T> m(2, 2);
  m << std::complex<T>(0), std::complex<T>(1), std::complex<T>(1), std::complex<T>(0);
  return QubitOperator<T>(m);
}

template <typename T = double>
QubitOperator<T> pauli_y() {
  MatrixC<T> m(2, 2);
  m << std::complex<T>(0), std::complex<T>(0, -1), std::complex<T>(0, 1),
      std::complex<T>(0);
  return QubitOperator<T>(m);
}

template <typename T = double>
QubitOperator<T> pauli_z() {
  MatrixC<T> m(2, 2);
  m << std::complex<T>(1), std::complex<T>(0), std::complex<T>(0), std::complex<T>(-1);
  return QubitOperator<T>(m);
}

// |0> -> (|0>+|1>)/sqrt2, |1> -> (|0>-|1>)/sqrt2.
template <typename T = double>
QubitOperator<T> hadamard() {
  const T h = T(1) / std::sqrt(T(2));
  MatrixC<T> m(2, 2);
  m << std::complex<T>(h), std::complex<T>(h), std::complex<T>(h), std::complex<T>(-h);
  return QubitOperator<T>(m);
}

// |0> -> u|0>+v|1>, |1> -> v|0>-u|1> with v = sqrt(1-u^2).
template <typename T = double>
QubitOperator<T> nonmax_hadamard(T u) {
  if (u < T(0) || u > T(1)) throw std::invalid_argument("u must lie in [0,1]");
  const T v = std::sqrt(T(1) - u * u);
  MatrixC<T> m(2, 2);
  m << std::complex<T>(u), std::complex<T>(v), std::complex<T>(v), std::complex<T>(-u);
  return QubitOperator<T>(m);
}

// Kronecker composition: qubits of `a` become the leading (leftmost) qubits.
template <typename T>
StateVector<T> tensor(const StateVector<T>& a, const StateVector<T>& b) {
  const Index db = b.dim();
  VectorC<T> out(a.dim() * db);
  for (Index ia = 0; ia < a.dim(); ++ia)
    for (Index ib = 0; ib < db; ++ib) out(ia * db + ib) = a.amp(ia) * b.amp(ib);
  return StateVector<T>(a.qubit_count() + b.qubit_count(), std::move(out),
                        a.is_normalized() && b.is_normalized());
}

namespace detail {

inline void check_targets(int qubit_count, const std::vector<int>& targets,
                          Index op_dim) {
  Index need = 1;
  for (size_t j = 0; j < targets.size(); ++j) {
    const int t = targets[j];
    if (t < 0 || t >= qubit_count) throw std::invalid_argument("target qubit out of range");
    for (size_t k = j + 1; k < targets.size(); ++k)
      if (targets[k] == t) throw std::invalid_argument("duplicate target qubit");
    need <<= 1;
  }
  if (need != op_dim)
    throw std::invalid_argument("operator dimension does not match target count");
}

// Scatter a local index onto target bit positions (targets[0] = local MSB).
inline Index scatter_bits(Index local, const std::vector<int>& targets, int n) {
  Index out = 0;
  const int k = static_cast<int>(targets.size());
  for (int j = 0; j < k; ++j)
    out |= ((local >> (k - 1 - j)) & Index{1}) << (n - 1 - targets[j]);
  return out;
}

}  // namespace detail

// Applies op to the listed qubits; linear in the input. The normalized tag
// survives only when op is unitary.
template <typename T>
StateVector<T> apply_op(const StateVector<T>& s, const QubitOperator<T>& op,
                        const std::vector<int>& targets) {
  const int n = s.qubit_count();
  detail::check_targets(n, targets, op.dim());
  const Index d = op.dim();
  Index target_mask = 0;
  for (int t : targets) target_mask |= Index{1} << (n - 1 - t);

  VectorC<T> out = VectorC<T>::Zero(s.dim());
  for (Index base = 0; base < s.dim(); ++base) {
    if (base & target_mask) continue;
    for (Index r = 0; r < d; ++r) {
      std::complex<T> acc(0);
      for (Index c = 0; c < d; ++c)
        acc += op.matrix()(r, c) * s.amp(base | detail::scatter_bits(c, targets, n));
      out(base | detail::scatter_bits(r, targets, n)) = acc;
    }
  }
  return StateVector<T>(n, std::move(out),
                        s.is_normalized() && op.is_unitary(T(kExactTol)));
}

// Returns (unit-norm state, prior squared norm); a near-zero norm marks an
// impossible branch.
template <typename T>
std::pair<StateVector<T>, T> normalize(const StateVector<T>& s) {
  const T ns = s.norm_sq();
  if (ns < T(kZeroNormSq))
    throw std::domain_error("zero-norm state: impossible measurement branch");
  VectorC<T> v = s.amps() / std::sqrt(ns);
  return {StateVector<T>(s.qubit_count(), std::move(v), true), ns};
}

template <typename T>
std::complex<T> overlap(const StateVector<T>& a, const StateVector<T>& b) {
  if (a.qubit_count() != b.qubit_count())
    throw std::invalid_argument("qubit_count mismatch");
  return (a.amps().adjoint() * b.amps())(0, 0);
}

// |<a|b>|^2; invariant under a global phase of either argument.
template <typename T>
T fidelity(const StateVector<T>& a, const StateVector<T>& b) {
  const std::complex<T> ov = overlap(a, b);
  return std::norm(ov);
}

enum class BellLabel { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr BellLabel kBellLabels[4] = {BellLabel::PhiPlus, BellLabel::PhiMinus,
                                             BellLabel::PsiPlus, BellLabel::PsiMinus};

inline std::string to_string(BellLabel b) {
  switch (b) {
    case BellLabel::PhiPlus: return "phi+";
    case BellLabel::PhiMinus: return "phi-";
    case BellLabel::PsiPlus: return "psi+";
    case BellLabel::PsiMinus: return "psi-";
  }
  throw std::invalid_argument("bad BellLabel");
}

// Amplitudes of the Bell vector over the local 2-qubit basis (sorted as
// |00>,|01>,|10>,|11> with the pair's first qubit as the left symbol).
template <typename T = double>
VectorC<T> bell_local_vector(BellLabel b) {
  const T h = T(1) / std::sqrt(T(2));
  VectorC<T> v = VectorC<T>::Zero(4);
  switch (b) {
    case BellLabel::PhiPlus: v(0) = h; v(3) = h; break;
    case BellLabel::PhiMinus: v(0) = h; v(3) = -h; break;
    case BellLabel::PsiPlus: v(1) = h; v(2) = h; break;
    case BellLabel::PsiMinus: v(1) = h; v(2) = -h; break;
  }
  return v;
}

template <typename T = double>
StateVector<T> bell_state(BellLabel b) {
  return StateVector<T>(2, bell_local_vector<T>(b), true);
}

template <typename T>
struct BellProjection {
  T prob = T(0);
  std::optional<StateVector<T>> residual;  // absent for a zero-probability outcome
};

// Projects `pair` onto a Bell vector; the measured pair is removed from the
// register and the remaining qubits keep their original order.
template <typename T>
BellProjection<T> project_bell(const StateVector<T>& s, std::pair<int, int> pair,
                               BellLabel outcome) {
  const int n = s.qubit_count();
  if (n < 2) throw std::invalid_argument("need at least two qubits");
  if (pair.first == pair.second) throw std::invalid_argument("pair qubits must differ");
  for (int q : {pair.first, pair.second})
    if (q < 0 || q >= n) throw std::invalid_argument("pair qubit out of range");

  const VectorC<T> bell = bell_local_vector<T>(outcome);
  const std::vector<int> pts{pair.first, pair.second};
  const int m = n - 2;
  VectorC<T> resid = VectorC<T>::Zero(Index{1} << m);

  // Remaining qubits in ascending original order.
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (q != pair.first && q != pair.second) rest.push_back(q);

  for (Index j = 0; j < resid.size(); ++j) {
    Index base = 0;
    for (int k = 0; k < m; ++k)
      base |= ((j >> (m - 1 - k)) & Index{1}) << (n - 1 - rest[k]);
    std::complex<T> acc(0);
    for (Index local = 0; local < 4; ++local)
      acc += std::conj(bell(local)) * s.amp(base | detail::scatter_bits(local, pts, n));
    resid(j) = acc;
  }

  BellProjection<T> out;
  out.prob = resid.squaredNorm();
  if (out.prob >= T(kZeroNormSq)) {
    resid /= std::sqrt(out.prob);
    out.residual = StateVector<T>(m, std::move(resid), true);
  } else {
    out.prob = T(0);
  }
  return out;
}

// Hermitian, unit-trace density operator over an n-qubit register.
template <typename T = double>
class DensityMatrix {
 public:
  using Matrix = MatrixC<T>;

  DensityMatrix(int qubit_count, Matrix m) : qubit_count_(qubit_count), m_(std::move(m)) {
    if (qubit_count_ < 0 || qubit_count_ > 12)
      throw std::invalid_argument("qubit_count out of supported range");
    const Index d = Index{1} << qubit_count_;
    if (m_.rows() != d || m_.cols() != d)
      throw std::invalid_argument("density matrix dimension mismatch");
    if (!m_.allFinite()) throw std::invalid_argument("non-finite density entry");
  }

  static DensityMatrix from_pure(const StateVector<T>& s) {
    return DensityMatrix(s.qubit_count(), s.amps() * s.amps().adjoint());
  }

  int qubit_count() const { return qubit_count_; }
  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  T trace() const { return m_.trace().real(); }

  bool is_hermitian(T tol = T(kExactTol)) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  T min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  // Hermitian + unit trace + positive semidefinite, all within tol.
  void validate(T tol = T(kRootTol)) const {
    if (!is_hermitian(tol)) throw std::domain_error("density matrix not hermitian");
    if (std::abs(trace() - T(1)) > tol)
      throw std::domain_error("density matrix trace differs from 1");
    if (min_eigenvalue() < -tol)
      throw std::domain_error("density matrix has a negative eigenvalue");
  }

 private:
  int qubit_count_;
  Matrix m_;
};

// Reduced density matrix over `keep` (ascending original order preserved).
template <typename T>
DensityMatrix<T> partial_trace(const StateVector<T>& s, std::vector<int> keep) {
  const int n = s.qubit_count();
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  std::sort(keep.begin(), keep.end());
  for (size_t j = 0; j + 1 < keep.size(); ++j)
    if (keep[j] == keep[j + 1]) throw std::invalid_argument("duplicate keep qubit");
  for (int q : keep)
    if (q < 0 || q >= n) throw std::invalid_argument("keep qubit out of range");

  std::vector<int> traced;
  {
    size_t j = 0;
    for (int q = 0; q < n; ++q) {
      if (j < keep.size() && keep[j] == q) { ++j; continue; }
      traced.push_back(q);
    }
  }

  const int a = static_cast<int>(keep.size());
  const int b = static_cast<int>(traced.size());
  const Index da = Index{1} << a, db = Index{1} << b;
  MatrixC<T> rho = MatrixC<T>::Zero(da, da);
  for (Index i = 0; i < da; ++i) {
    Index ibase = 0;
    for (int k = 0; k < a; ++k)
      ibase |= ((i >> (a - 1 - k)) & Index{1}) << (n - 1 - keep[k]);
    for (Index j = 0; j < da; ++j) {
      Index jbase = 0;
      for (int k = 0; k < a; ++k)
        jbase |= ((j >> (a - 1 - k)) & Index{1}) << (n - 1 - keep[k]);
      std::complex<T> acc(0);
      for (Index e = 0; e < db; ++e) {
        Index ebits = 0;
        for (int k = 0; k < b; ++k)
          ebits |= ((e >> (b - 1 - k)) & Index{1}) << (n - 1 - traced[k]);
        acc += s.amp(ibase | ebits) * std::conj(s.amp(jbase | ebits));
      }
      rho(i, j) = acc;
    }
  }
  return DensityMatrix<T>(a, std::move(rho));
}

}  // namespace qsim
