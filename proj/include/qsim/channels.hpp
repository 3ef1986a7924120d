// Weak measurements, amplitude damping, feed-forward, and the exact
// jump/no-jump trajectory branching engine.

#pragma once

#include "qsim/state.hpp"
#include "qsim/trajectory.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace qsim {

enum class WeakOutcome { M1, M2 };

// Two-outcome pre-weak measurement of strength p:
//   M1 = diag(sqrt(p), sqrt(1-p)),  M2 = diag(sqrt(1-p), sqrt(p)).
template <typename T = double>
class WeakMeasurement {
 public:
  explicit WeakMeasurement(T p) : p_(p) {
    if (!(p >= T(0) && p <= T(1))) throw std::invalid_argument("p must lie in [0,1]");
  }

  T p() const { return p_; }

  QubitOperator<T> element(WeakOutcome o) const {
    const T a = std::sqrt(o == WeakOutcome::M1 ? p_ : T(1) - p_);
    const T b = std::sqrt(o == WeakOutcome::M1 ? T(1) - p_ : p_);
    MatrixC<T> m = MatrixC<T>::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return QubitOperator<T>(m);
  }

  // max |(M1'M1 + M2'M2) - I| entry; zero for a well-formed pair.
  T completeness_defect() const {
    const MatrixC<T> m1 = element(WeakOutcome::M1).matrix();
    const MatrixC<T> m2 = element(WeakOutcome::M2).matrix();
    MatrixC<T> s = m1.adjoint() * m1 + m2.adjoint() * m2 - MatrixC<T>::Identity(2, 2);
    return s.cwiseAbs().maxCoeff();
  }

 private:
  T p_;
};

// Post-weak measurement of strength p1. The pass element damps one basis
// amplitude; the fail element is the completing projector-like operator.
//   suppress-zero: O = diag(sqrt(1-p1), 1), O' = diag(sqrt(p1), 0)
//   suppress-one:  O = diag(1, sqrt(1-p1)), O' = diag(0, sqrt(p1))
enum class PostWeakOrientation { SuppressZero, SuppressOne };

template <typename T = double>
class PostWeakMeasurement {
 public:
  PostWeakMeasurement(T p1, PostWeakOrientation orient) : p1_(p1), orient_(orient) {
    if (!(p1 >= T(0) && p1 <= T(1))) throw std::invalid_argument("p1 must lie in [0,1]");
  }

  T p1() const { return p1_; }
  PostWeakOrientation orientation() const { return orient_; }

  QubitOperator<T> pass_element() const {
    MatrixC<T> m = MatrixC<T>::Zero(2, 2);
    if (orient_ == PostWeakOrientation::SuppressZero) {
      m(0, 0) = std::sqrt(T(1) - p1_);
      m(1, 1) = T(1);
    } else {
      m(0, 0) = T(1);
      m(1, 1) = std::sqrt(T(1) - p1_);
    }
    return QubitOperator<T>(m);
  }

  QubitOperator<T> fail_element() const {
    MatrixC<T> m = MatrixC<T>::Zero(2, 2);
    if (orient_ == PostWeakOrientation::SuppressZero)
      m(0, 0) = std::sqrt(p1_);
    else
      m(1, 1) = std::sqrt(p1_);
    return QubitOperator<T>(m);
  }

  T completeness_defect() const {
    const MatrixC<T> o = pass_element().matrix();
    const MatrixC<T> f = fail_element().matrix();
    MatrixC<T> s = o.adjoint() * o + f.adjoint() * f - MatrixC<T>::Identity(2, 2);
    return s.cwiseAbs().maxCoeff();
  }

 private:
  T p1_;
  PostWeakOrientation orient_;
};

// Amplitude damping of magnitude r = 1 - e^{-Gamma tau}:
//   K1 = [[1,0],[0,sqrt(1-r)]] (no jump), K2 = [[0,sqrt(r)],[0,0]] (jump).
template <typename T = double>
class AmplitudeDamping {
 public:
  static AmplitudeDamping from_r(T r) {
    if (!(r >= T(0) && r <= T(1))) throw std::invalid_argument("r must lie in [0,1]");
    return AmplitudeDamping(r);
  }

  static AmplitudeDamping from_gamma_tau(T gamma_tau) {
    if (!(gamma_tau >= T(0))) throw std::invalid_argument("gamma_tau must be >= 0");
    return AmplitudeDamping(-std::expm1(-gamma_tau));
  }

  T r() const { return r_; }

  QubitOperator<T> no_jump_element() const {
    MatrixC<T> m = MatrixC<T>::Zero(2, 2);
    m(0, 0) = T(1);
    m(1, 1) = std::sqrt(T(1) - r_);
    return QubitOperator<T>(m);
  }

  QubitOperator<T> jump_element() const {
    MatrixC<T> m = MatrixC<T>::Zero(2, 2);
    m(0, 1) = std::sqrt(r_);
    return QubitOperator<T>(m);
  }

  T completeness_defect() const {
    const MatrixC<T> k1 = no_jump_element().matrix();
    const MatrixC<T> k2 = jump_element().matrix();
    MatrixC<T> s = k1.adjoint() * k1 + k2.adjoint() * k2 - MatrixC<T>::Identity(2, 2);
    return s.cwiseAbs().maxCoeff();
  }

 private:
  explicit AmplitudeDamping(T r) : r_(r) {}
  T r_;
};

namespace detail {

// Apply one measurement element at qubit q and package the outcome branch.
template <typename T>
TrajectoryBranch<T> outcome_branch(const StateVector<T>& s, int q,
                                   const QubitOperator<T>& element,
                                   const std::string& label) {
  TrajectoryBranch<T> b;
  b.path = {label};
  StateVector<T> raw = apply_op(s, element, {q});
  const T prob = raw.norm_sq();
  b.cond_prob = prob;
  b.joint_prob = prob;
  if (prob >= T(kZeroNormSq)) {
    b.state = normalize(raw).first;
  } else {
    b.cond_prob = T(0);
    b.joint_prob = T(0);
  }
  return b;
}

}  // namespace detail

// Branch on the pre-weak measurement at qubit q: labels M1, M2.
template <typename T>
std::array<TrajectoryBranch<T>, 2> pre_weak_branch(const StateVector<T>& s, int q, T p) {
  WeakMeasurement<T> w(p);
  return {detail::outcome_branch(s, q, w.element(WeakOutcome::M1), "M1"),
          detail::outcome_branch(s, q, w.element(WeakOutcome::M2), "M2")};
}

// Branch on amplitude damping at qubit q: labels no-jump, jump.
template <typename T>
std::array<TrajectoryBranch<T>, 2> damping_branch(const StateVector<T>& s, int q, T r) {
  auto ch = AmplitudeDamping<T>::from_r(r);
  return {detail::outcome_branch(s, q, ch.no_jump_element(), "no-jump"),
          detail::outcome_branch(s, q, ch.jump_element(), "jump")};
}

// Branch on the post-weak measurement at qubit q: labels post-pass, post-fail.
template <typename T>
std::array<TrajectoryBranch<T>, 2> post_weak_branch(const StateVector<T>& s, int q, T p1,
                                                    PostWeakOrientation orient) {
  PostWeakMeasurement<T> pw(p1, orient);
  return {detail::outcome_branch(s, q, pw.pass_element(), "post-pass"),
          detail::outcome_branch(s, q, pw.fail_element(), "post-fail")};
}

// Post-weak strength that makes the no-jump pass state equal the input:
//   p1 = 1 - (1-p) e^{-Gamma tau} / p.
// A negative value means the damping is too strong for this p.
template <typename T>
T optimal_p1(T p, T gamma_tau) {
  if (!(p > T(0) && p <= T(1))) throw std::invalid_argument("p must lie in (0,1]");
  if (!(gamma_tau >= T(0))) throw std::invalid_argument("gamma_tau must be >= 0");
  const T p1 = T(1) - (T(1) - p) * std::exp(-gamma_tau) / p;
  if (p1 < T(0)) throw std::domain_error("recovery infeasible: required p1 is negative");
  return p1;
}

// Generalization used by the three-qubit pipeline:
//   p1 = 1 - v^2 (1-p) e^{-Gamma tau} / (u^2 p).
template <typename T>
T optimal_p1_w(T p, T gamma_tau, T u, T v) {
  if (!(p > T(0) && p <= T(1))) throw std::invalid_argument("p must lie in (0,1]");
  if (!(gamma_tau >= T(0))) throw std::invalid_argument("gamma_tau must be >= 0");
  if (std::abs(u * u + v * v - T(1)) > T(kExactTol))
    throw std::invalid_argument("u^2 + v^2 must equal 1");
  if (u == T(0)) throw std::invalid_argument("u must be nonzero");
  const T p1 = T(1) - v * v * (T(1) - p) * std::exp(-gamma_tau) / (u * u * p);
  if (p1 < T(0)) throw std::domain_error("recovery infeasible: required p1 is negative");
  return p1;
}

// Feed-forward after the pre-weak outcome: identity for M1, bit flip for M2.
// Both are involutions, so the reversal operator is the operator itself.
template <typename T = double>
QubitOperator<T> feed_forward_for(WeakOutcome o) {
  return o == WeakOutcome::M1 ? identity_op<T>() : pauli_x<T>();
}

// Kronecker product with identities so a 2x2 element acts on qubit q of n.
template <typename T>
MatrixC<T> embed_on_qubit(const MatrixC<T>& op2, int q, int n) {
  MatrixC<T> out = MatrixC<T>::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    const MatrixC<T>& factor =
        (k == q) ? op2 : MatrixC<T>(MatrixC<T>::Identity(2, 2));
    MatrixC<T> next(out.rows() * factor.rows(), out.cols() * factor.cols());
    for (Index i = 0; i < out.rows(); ++i)
      for (Index j = 0; j < out.cols(); ++j)
        next.block(i * factor.rows(), j * factor.cols(), factor.rows(), factor.cols()) =
            out(i, j) * factor;
    out = std::move(next);
  }
  return out;
}

// Independent density-operator reference: rho -> K1 rho K1' + K2 rho K2'.
template <typename T>
DensityMatrix<T> channel_density_oracle(const DensityMatrix<T>& rho,
                                        const AmplitudeDamping<T>& ch, int q) {
  const int n = rho.qubit_count();
  if (q < 0 || q >= n) throw std::invalid_argument("qubit out of range");
  const MatrixC<T> k1 = embed_on_qubit(ch.no_jump_element().matrix(), q, n);
  const MatrixC<T> k2 = embed_on_qubit(ch.jump_element().matrix(), q, n);
  MatrixC<T> out =
      k1 * rho.matrix() * k1.adjoint() + k2 * rho.matrix() * k2.adjoint();
  return DensityMatrix<T>(n, std::move(out));
}

// Full single-qubit protection pipeline, both measurement branches:
//   M1: M1 -> (F1 = I) -> damping -> I -> suppress-zero post-weak
//   M2: M2 -> (F2 = X) -> damping -> X -> suppress-one  post-weak
// With p1 at its optimal value, each (Mi, no-jump, post-pass) leaf restores
// the input exactly and the two success paths share the same joint
// probability (1-p) e^{-Gamma tau}.
template <typename T>
ProtocolReport<T> protect_unknown_qubit(std::complex<T> alpha, std::complex<T> beta,
                                        T p, const AmplitudeDamping<T>& channel,
                                        T gamma_tau,
                                        std::optional<T> p1_override = std::nullopt) {
  const T nrm = std::norm(alpha) + std::norm(beta);
  if (std::abs(nrm - T(1)) > T(kExactTol))
    throw std::invalid_argument("input amplitudes must be normalized");

  const T p1 = p1_override.has_value() ? *p1_override : optimal_p1(p, gamma_tau);
  if (!(p1 >= T(0) && p1 <= T(1)))
    throw std::domain_error("p1 outside [0,1]: recovery infeasible");

  VectorC<T> amps(2);
  amps << alpha, beta;
  const StateVector<T> input(1, amps, true);

  ProtocolReport<T> report;
  report.parameters = {{"p", p}, {"gamma_tau", gamma_tau}, {"r", channel.r()},
                       {"p1", p1}, {"alpha_re", alpha.real()}, {"alpha_im", alpha.imag()},
                       {"beta_re", beta.real()}, {"beta_im", beta.imag()}};
  report.degenerate = (p == T(0) || p == T(1) || channel.r() == T(1));

  auto weak = pre_weak_branch(input, 0, p);
  for (int wi = 0; wi < 2; ++wi) {
    TrajectoryBranch<T>& wb = weak[wi];
    const WeakOutcome outcome = (wi == 0) ? WeakOutcome::M1 : WeakOutcome::M2;
    const auto ff = feed_forward_for<T>(outcome);
    const PostWeakOrientation orient = (wi == 0) ? PostWeakOrientation::SuppressZero
                                                 : PostWeakOrientation::SuppressOne;
    if (!wb.state.has_value()) {
      // Dead measurement branch; emit its four dead leaves for completeness.
      for (const char* d : {"jump", "no-jump"})
        for (const char* pp : {"post-fail", "post-pass"}) {
          TrajectoryBranch<T> leaf;
          leaf.path = {wb.path[0], d, pp};
          report.branches.push_back(std::move(leaf));
        }
      continue;
    }
    const StateVector<T> sent = apply_op(*wb.state, ff, {0});
    auto damp = damping_branch(sent, 0, channel.r());
    for (auto& db : damp) {
      TrajectoryBranch<T> after_damp = chain(wb, db);
      if (!after_damp.state.has_value()) {
        for (const char* pp : {"post-fail", "post-pass"}) {
          TrajectoryBranch<T> leaf;
          leaf.path = after_damp.path;
          leaf.path.push_back(pp);
          report.branches.push_back(std::move(leaf));
        }
        continue;
      }
      const StateVector<T> reversed = apply_op(*after_damp.state, ff, {0});
      auto post = post_weak_branch(reversed, 0, p1, orient);
      for (auto& pb : post) report.branches.push_back(chain(after_damp, pb));
    }
  }
  std::sort(report.branches.begin(), report.branches.end(), path_less<T>);

  T total = T(0);
  for (const auto& b : report.branches) total += b.joint_prob;
  report.metrics["leaf_prob_sum"] = total;

  auto find_leaf = [&](const std::vector<std::string>& path) -> const TrajectoryBranch<T>* {
    for (const auto& b : report.branches)
      if (b.path == path) return &b;
    return nullptr;
  };
  const auto* m1s = find_leaf({"M1", "no-jump", "post-pass"});
  const auto* m2s = find_leaf({"M2", "no-jump", "post-pass"});
  if (m1s != nullptr) {
    report.metrics["success_path_prob"] = m1s->joint_prob;
    if (m1s->state.has_value())
      report.metrics["recovered_fidelity_m1"] = fidelity(*m1s->state, input);
    report.final_state = m1s->state;
    if (m1s->state.has_value())
      report.target_fidelity = fidelity(*m1s->state, input);
  }
  if (m2s != nullptr) {
    report.metrics["m2_success_path_prob"] = m2s->joint_prob;
    if (m2s->state.has_value())
      report.metrics["recovered_fidelity_m2"] = fidelity(*m2s->state, input);
  }
  // Both probability readings of the intermediate no-jump stage; the channel
  // survival factor e^{-Gamma tau} equals 1 - r exactly.
  const T njm1_joint =
      std::norm(alpha) * p + std::norm(beta) * (T(1) - p) * (T(1) - channel.r());
  report.metrics["m1_outcome_prob"] = weak[0].joint_prob;
  report.metrics["m2_outcome_prob"] = weak[1].joint_prob;
  report.metrics["no_jump_prob_joint_m1"] = njm1_joint;
  if (weak[0].joint_prob > T(0))
    report.metrics["no_jump_prob_conditional_m1"] = njm1_joint / weak[0].joint_prob;
  report.labels["pipeline"] = "protect";
  return report;
}

template <typename T>
ProtocolReport<T> protect_unknown_qubit(std::complex<T> alpha, std::complex<T> beta,
                                        T p, T gamma_tau,
                                        std::optional<T> p1_override = std::nullopt) {
  return protect_unknown_qubit(alpha, beta, p,
                               AmplitudeDamping<T>::from_gamma_tau(gamma_tau), gamma_tau,
                               p1_override);
}

}  // namespace qsim
