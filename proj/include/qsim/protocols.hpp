// Protocol drivers composed from the state core and the channel engine:
// two-qubit maximal-entanglement generation, economical cloning, W-type
// three-qubit generation, and the non-orthogonal-pair teleportation table.

#pragma once

#include "qsim/channels.hpp"
#include "qsim/entanglement.hpp"
#include "qsim/state.hpp"
#include "qsim/trajectory.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qsim {

namespace detail {

// Scale each listed index sector so its squared mass becomes 1/2 (empty
// sectors skipped), then renormalize globally. The per-sector divisor
// sqrt(2 * mass) reproduces the published per-branch amplitude tables; it is
// not a linear quantum operation, which is exactly why both normalization
// modes exist.
template <typename T>
StateVector<T> sector_mass_halve(const StateVector<T>& s,
                                 const std::vector<std::vector<Index>>& sectors) {
  VectorC<T> v = s.amps();
  for (const auto& sector : sectors) {
    T mass = T(0);
    for (Index i : sector) mass += std::norm(v(i));
    if (mass < T(kZeroNormSq)) continue;
    const T scale = T(1) / std::sqrt(T(2) * mass);
    for (Index i : sector) v(i) *= scale;
  }
  return normalize(StateVector<T>(s.qubit_count(), std::move(v))).first;
}

// Scale listed sectors by given positive weights, then renormalize globally.
template <typename T>
StateVector<T> sector_scale(const StateVector<T>& s,
                            const std::vector<std::pair<std::vector<Index>, T>>& scaled) {
  VectorC<T> v = s.amps();
  for (const auto& [sector, scale] : scaled)
    for (Index i : sector) v(i) *= scale;
  return normalize(StateVector<T>(s.qubit_count(), std::move(v))).first;
}

// The four-leaf protected transmission of qubit q: the M1 outcome is pursued
// through the channel and the post-measurement filter; the M2 outcome and the
// jump / post-fail paths terminate the protocol. Leaves are returned in
// canonical path order.
template <typename T>
struct TransmissionTree {
  std::vector<TrajectoryBranch<T>> leaves;   // {M1,jump}, {M1,nj,pf}, {M1,nj,pp}, {M2}
  TrajectoryBranch<T> success;               // the {M1, no-jump, post-pass} leaf
  TrajectoryBranch<T> jump;                  // the {M1, jump} leaf
  T m1_prob = T(0);
};

template <typename T>
TransmissionTree<T> transmit_protected(const StateVector<T>& s, int q, T p, T r, T p1) {
  TransmissionTree<T> tree;
  auto weak = pre_weak_branch(s, q, p);
  tree.m1_prob = weak[0].joint_prob;

  if (weak[0].state.has_value()) {
    auto damp = damping_branch(*weak[0].state, q, r);
    tree.jump = chain(weak[0], damp[1]);
    auto nj = chain(weak[0], damp[0]);
    if (nj.state.has_value()) {
      auto post = post_weak_branch(*nj.state, q, p1, PostWeakOrientation::SuppressZero);
      tree.success = chain(nj, post[0]);
      tree.leaves.push_back(tree.jump);
      tree.leaves.push_back(chain(nj, post[1]));
      tree.leaves.push_back(tree.success);
    } else {
      tree.jump.path = {"M1", "jump"};
      tree.success.path = {"M1", "no-jump", "post-pass"};
      TrajectoryBranch<T> dead_fail;
      dead_fail.path = {"M1", "no-jump", "post-fail"};
      tree.leaves.push_back(tree.jump);
      tree.leaves.push_back(dead_fail);
      tree.leaves.push_back(tree.success);
    }
  } else {
    tree.jump.path = {"M1", "jump"};
    tree.success.path = {"M1", "no-jump", "post-pass"};
    TrajectoryBranch<T> dead_fail;
    dead_fail.path = {"M1", "no-jump", "post-fail"};
    tree.leaves.push_back(tree.jump);
    tree.leaves.push_back(dead_fail);
    tree.leaves.push_back(tree.success);
  }
  tree.leaves.push_back(weak[1]);
  std::sort(tree.leaves.begin(), tree.leaves.end(), path_less<T>);
  return tree;
}

// Published post-filter recombination on qubit q: per amplitude pair (a, b)
// over that qubit emit ((a-b)/sqrt2, (a+b)/sqrt2). This is the printed
// superposition table of the two-qubit procedure; it differs from the plain
// Hadamard by a sign flip of the second input (H after Z).
template <typename T>
QubitOperator<T> printed_recombination() {
  const T h = T(1) / std::sqrt(T(2));
  MatrixC<T> m(2, 2);
  m << std::complex<T>(h), std::complex<T>(-h), std::complex<T>(h), std::complex<T>(h);
  return QubitOperator<T>(m);
}

}  // namespace detail

// --- Two-qubit maximal-entanglement generation -----------------------------

// Pipeline: weak measurement (M1 pursued) on the transmitted qubit 1, damping,
// post-measurement filter at the recovery strength, then the recombination on
// qubit 1. `paper` mode renormalizes the two qubit-0 sectors separately on the
// published branches (and uses the printed recombination); `physical` mode
// normalizes globally and applies the plain Hadamard.
template <typename T>
ProtocolReport<T> bell_generate(std::complex<T> alpha, std::complex<T> beta,
                                std::complex<T> gamma, std::complex<T> delta, T p,
                                const AmplitudeDamping<T>& channel, T gamma_tau,
                                NormalizationMode mode,
                                std::optional<T> p1_override = std::nullopt) {
  const T total =
      std::norm(alpha) + std::norm(beta) + std::norm(gamma) + std::norm(delta);
  if (std::abs(total - T(1)) > T(kExactTol))
    throw std::invalid_argument("input amplitudes must be normalized");
  if (T(2) * std::abs(alpha * delta - beta * gamma) <= T(kExactTol))
    throw std::invalid_argument("input must be entangled (product state rejected)");

  const T p1 = p1_override.has_value() ? *p1_override : optimal_p1(p, gamma_tau);
  if (!(p1 >= T(0) && p1 <= T(1)))
    throw std::domain_error("p1 outside [0,1]: recovery infeasible");
  const T r = channel.r();

  VectorC<T> amps(4);
  amps << alpha, beta, gamma, delta;
  const StateVector<T> input(2, amps, true);

  ProtocolReport<T> report;
  report.mode = mode;
  report.parameters = {{"p", p}, {"gamma_tau", gamma_tau}, {"r", r}, {"p1", p1},
                       {"alpha_re", alpha.real()}, {"alpha_im", alpha.imag()},
                       {"beta_re", beta.real()},   {"beta_im", beta.imag()},
                       {"gamma_re", gamma.real()}, {"gamma_im", gamma.imag()},
                       {"delta_re", delta.real()}, {"delta_im", delta.imag()}};
  report.labels["pipeline"] = "bell";
  report.degenerate = (p == T(0) || p == T(1) || r == T(1));

  auto tree = detail::transmit_protected(input, 1, p, r, p1);
  const std::vector<std::vector<Index>> sectors{{0, 1}, {2, 3}};

  // Jump leaf: published branch uses per-sector renormalization.
  std::optional<StateVector<T>> jump_paper, jump_phys;
  if (tree.jump.state.has_value()) {
    jump_phys = tree.jump.state;
    jump_paper = detail::sector_mass_halve(*tree.jump.state, sectors);
  }
  const auto& jump_state = (mode == NormalizationMode::Paper) ? jump_paper : jump_phys;

  // Success leaf before recombination, in both normalizations.
  std::optional<StateVector<T>> pre_paper, pre_phys;
  if (tree.success.state.has_value()) {
    pre_phys = tree.success.state;
    pre_paper = detail::sector_mass_halve(*tree.success.state, sectors);
  }

  std::optional<StateVector<T>> final_paper, final_phys;
  if (pre_paper.has_value())
    final_paper = apply_op(*pre_paper, detail::printed_recombination<T>(), {1});
  if (pre_phys.has_value()) final_phys = apply_op(*pre_phys, hadamard<T>(), {1});
  const auto& final_state =
      (mode == NormalizationMode::Paper) ? final_paper : final_phys;

  // Assemble leaves with mode-dependent states on the published branches.
  for (auto& leaf : tree.leaves) {
    if (leaf.path == std::vector<std::string>{"M1", "jump"}) leaf.state = jump_state;
    if (leaf.path == std::vector<std::string>{"M1", "no-jump", "post-pass"})
      leaf.state = final_state;
  }
  report.branches = tree.leaves;

  T leaf_sum = T(0);
  for (const auto& b : report.branches) leaf_sum += b.joint_prob;
  report.metrics["leaf_prob_sum"] = leaf_sum;
  report.metrics["m1_outcome_prob"] = tree.m1_prob;
  report.metrics["success_joint_prob"] = tree.success.joint_prob;
  report.metrics["jump_prob"] = tree.jump.joint_prob;

  const auto target = bell_state<T>(BellLabel::PhiPlus);
  if (final_paper.has_value())
    report.metrics["bell_fidelity_paper"] = fidelity(*final_paper, target);
  if (final_phys.has_value())
    report.metrics["bell_fidelity_physical"] = fidelity(*final_phys, target);
  if (final_state.has_value()) {
    report.final_state = final_state;
    report.target_fidelity = fidelity(*final_state, target);
    report.metrics["bell_fidelity"] = *report.target_fidelity;
    report.metrics["final_concurrence"] = concurrence(*final_state);
    report.entanglement = entanglement_report(*final_state, {0});
  }
  if (jump_state.has_value()) {
    report.metrics["jump_concurrence"] = concurrence(*jump_state);
    auto sv = schmidt(*jump_state, {0});
    report.metrics["jump_schmidt_0"] = sv[0];
    report.metrics["jump_schmidt_1"] = sv[1];
  }

  // The published final-state claim holds under the printed recombination;
  // when the plain Hadamard pipeline disagrees on the published input family
  // (beta = -alpha, delta = gamma), surface it instead of reconciling.
  const bool published_family = std::abs(beta + alpha) <= T(kExactTol) &&
                                std::abs(delta - gamma) <= T(kExactTol);
  if (published_family && final_paper.has_value() && final_phys.has_value()) {
    const T fp = fidelity(*final_phys, target);
    if (std::abs(fidelity(*final_paper, target) - fp) > T(1e-9)) {
      report.discrepancies.push_back(
          {"final state is the maximally entangled pair",
           "the plain Hadamard pipeline yields a different Bell vector than the "
           "printed recombination on the published input family",
           static_cast<double>(fp)});
    }
  }
  return report;
}

template <typename T>
ProtocolReport<T> bell_generate(std::complex<T> alpha, std::complex<T> beta,
                                std::complex<T> gamma, std::complex<T> delta, T p,
                                T gamma_tau, NormalizationMode mode,
                                std::optional<T> p1_override = std::nullopt) {
  return bell_generate(alpha, beta, gamma, delta, p,
                       AmplitudeDamping<T>::from_gamma_tau(gamma_tau), gamma_tau, mode,
                       p1_override);
}

// --- Economical cloning -----------------------------------------------------

// Two-qubit unitary acting on (src, fresh): |00> -> |00>,
// |10> -> cos(angle)|10> + sin(angle)|01>, completed orthonormally on the
// fresh=|1> sector (unobservable under the blank-fresh precondition).
template <typename T>
QubitOperator<T> economical_clone_op(T angle) {
  const T c = std::cos(angle), s = std::sin(angle);
  MatrixC<T> m = MatrixC<T>::Zero(4, 4);
  m(0, 0) = T(1);
  m(1, 1) = c;  m(1, 2) = s;
  m(2, 1) = -s; m(2, 2) = c;
  m(3, 3) = T(1);
  return QubitOperator<T>(m);
}

template <typename T>
StateVector<T> economical_clone(const StateVector<T>& s, int src, int fresh, T angle) {
  const int n = s.qubit_count();
  if (src < 0 || src >= n || fresh < 0 || fresh >= n || src == fresh)
    throw std::invalid_argument("invalid clone qubits");
  T fresh_one_mass = T(0);
  for (Index i = 0; i < s.dim(); ++i)
    if (bit_of(i, fresh, n)) fresh_one_mass += std::norm(s.amp(i));
  if (fresh_one_mass > T(kExactTol))
    throw std::invalid_argument("fresh qubit must be blank (|0>)");
  return apply_op(s, economical_clone_op(angle), {src, fresh});
}

// --- W-type generation ------------------------------------------------------

// Three-qubit W-type target with a symmetric splitter (u = v), built from an
// explicit (sin, cos) pair: either (|000> + cos|110> + sin|101>)/sqrt2 or,
// with the leading qubit flipped, (|100> + cos|010> + sin|001>)/sqrt2.
template <typename T>
StateVector<T> w_target_from(T s, T c, bool flip_first) {
  const T h = T(1) / std::sqrt(T(2));
  VectorC<T> v = VectorC<T>::Zero(8);
  if (!flip_first) {
    v(0) = h;          // |000>
    v(6) = h * c;      // |110>
    v(5) = h * s;      // |101>
  } else {
    v(4) = h;          // |100>
    v(2) = h * c;      // |010>
    v(1) = h * s;      // |001>
  }
  return StateVector<T>(3, v, true);
}

template <typename T>
StateVector<T> w_target_symmetric(T angle, bool flip_first) {
  return w_target_from(std::sin(angle), std::cos(angle), flip_first);
}

// Closed-form final state of the W pipeline at the recovery strength for
// general splitter u (v = sqrt(1-u^2)); its published normalizer is
// identically 1 because (v^2-u^2)^2 + 1 = 2(u^4+v^4).
template <typename T>
StateVector<T> w_target_general(T angle, T u, bool flip_first) {
  const T v2 = T(1) - u * u;
  const T u2 = u * u;
  const T h = T(1) / std::sqrt(T(2));
  const T c = std::cos(angle), s = std::sin(angle);
  const T root = std::sqrt(T(2) * (u2 * u2 + v2 * v2));
  VectorC<T> amps = VectorC<T>::Zero(8);
  amps(0) = h;
  amps(4) = h * s * (v2 - u2) / root;
  amps(5) = h * s * (v2 + u2) / root;
  amps(6) = h * c;
  StateVector<T> out(3, amps, true);
  if (flip_first) out = apply_op(out, pauli_x<T>(), {0});
  return out;
}

// Pipeline: maximally entangled pair (qubits 0,1) + blank qubit 2 ->
// economical clone (1 -> 2) -> non-maximal splitter on 2 -> protected
// transmission of 2 (M1, no-jump, post-pass pursued) -> Hadamard on 2 ->
// optional bit flip on 0. `paper` mode renormalizes the intermediate with the
// published sector divisors sqrt(2 k1), sqrt(2 k2).
template <typename T>
ProtocolReport<T> w_generate(T angle, T u, T p, const AmplitudeDamping<T>& channel,
                             T gamma_tau, NormalizationMode mode, bool apply_flip,
                             std::optional<T> p1_override = std::nullopt) {
  if (!(u > T(0) && u < T(1)))
    throw std::invalid_argument("u must lie strictly inside (0,1)");
  const T v = std::sqrt(T(1) - u * u);
  const T p1 = p1_override.has_value() ? *p1_override : optimal_p1_w(p, gamma_tau, u, v);
  if (!(p1 >= T(0) && p1 <= T(1)))
    throw std::domain_error("p1 outside [0,1]: recovery infeasible");
  const T r = channel.r();

  ProtocolReport<T> report;
  report.mode = mode;
  report.parameters = {{"clone_angle", angle}, {"u", u}, {"v", v}, {"p", p},
                       {"gamma_tau", gamma_tau}, {"r", r}, {"p1", p1},
                       {"sigma_x_applied", apply_flip ? T(1) : T(0)}};
  report.labels["pipeline"] = "wstate";
  report.degenerate = (p == T(0) || p == T(1) || r == T(1));

  // Source pair + blank third qubit, cloned and split.
  auto pair = bell_state<T>(BellLabel::PhiPlus);
  auto with_blank = tensor(pair, StateVector<T>::basis(1, 0));
  auto cloned = economical_clone(with_blank, 1, 2, angle);
  auto split = apply_op(cloned, nonmax_hadamard(u), {2});

  auto tree = detail::transmit_protected(split, 2, p, r, p1);

  // Published sector weights of the intermediate: qubit-0/1 sectors
  // {000,001,110,111} and {100,101} carry k1 and k2.
  const T w_pass = p * (T(1) - p1);
  const T w_decay = (T(1) - p) * (T(1) - r);
  const T k1 = u * u * w_pass + v * v * w_decay;
  const T k2 = v * v * w_pass + u * u * w_decay;
  report.metrics["k1"] = k1;
  report.metrics["k2"] = k2;

  std::optional<StateVector<T>> inter_paper, inter_phys;
  if (tree.success.state.has_value()) {
    inter_phys = tree.success.state;
    std::vector<std::pair<std::vector<Index>, T>> scaled;
    if (k1 >= T(kZeroNormSq))
      scaled.push_back({{0, 1, 6, 7}, T(1) / std::sqrt(k1)});
    if (k2 >= T(kZeroNormSq)) scaled.push_back({{4, 5}, T(1) / std::sqrt(k2)});
    inter_paper = detail::sector_scale(*tree.success.state, scaled);
  }
  const auto& intermediate =
      (mode == NormalizationMode::Paper) ? inter_paper : inter_phys;

  std::optional<StateVector<T>> final_paper, final_phys;
  auto finish = [&](const StateVector<T>& s) {
    auto out = apply_op(s, hadamard<T>(), {2});
    if (apply_flip) out = apply_op(out, pauli_x<T>(), {0});
    return out;
  };
  if (inter_paper.has_value()) final_paper = finish(*inter_paper);
  if (inter_phys.has_value()) final_phys = finish(*inter_phys);
  const auto& final_state =
      (mode == NormalizationMode::Paper) ? final_paper : final_phys;

  for (auto& leaf : tree.leaves) {
    if (leaf.path == std::vector<std::string>{"M1", "no-jump", "post-pass"})
      leaf.state = final_state;
  }
  report.branches = tree.leaves;

  T leaf_sum = T(0);
  for (const auto& b : report.branches) leaf_sum += b.joint_prob;
  report.metrics["leaf_prob_sum"] = leaf_sum;
  report.metrics["m1_outcome_prob"] = tree.m1_prob;
  report.metrics["success_joint_prob"] = tree.success.joint_prob;
  report.metrics["jump_prob"] = tree.jump.joint_prob;

  report.intermediate = intermediate;
  if (intermediate.has_value())
    report.metrics["intermediate_three_tangle"] = three_tangle(*intermediate);

  const auto target_general = w_target_general(angle, u, apply_flip);
  const auto target_symmetric = w_target_symmetric(angle, apply_flip);
  // The published general-u normalizer; algebraically 1 for every u.
  const T u2 = u * u, v2 = v * v;
  report.metrics["target_normalizer"] =
      std::sqrt(((v2 - u2) * (v2 - u2) + T(1)) / (T(2) * (u2 * u2 + v2 * v2)));

  if (final_paper.has_value())
    report.metrics["w_fidelity_paper"] = fidelity(*final_paper, target_general);
  if (final_phys.has_value())
    report.metrics["w_fidelity_physical"] = fidelity(*final_phys, target_general);
  if (final_state.has_value()) {
    report.final_state = final_state;
    report.target_fidelity = fidelity(*final_state, target_general);
    report.metrics["w_fidelity"] = *report.target_fidelity;
    report.metrics["w_fidelity_symmetric"] = fidelity(*final_state, target_symmetric);
    report.metrics["final_three_tangle"] = three_tangle(*final_state);
    report.entanglement = entanglement_report(*final_state, {0});
  }

  if (intermediate.has_value() &&
      report.metrics["intermediate_three_tangle"] > T(1e-9)) {
    report.discrepancies.push_back(
        {"intermediate three-qubit state has zero tangle",
         "hyperdeterminant tangle of the intermediate exceeds tolerance",
         static_cast<double>(report.metrics["intermediate_three_tangle"])});
  }
  if (inter_paper.has_value() && inter_phys.has_value()) {
    const T agree = fidelity(*inter_paper, *inter_phys);
    report.metrics["intermediate_mode_agreement"] = agree;
    if (mode == NormalizationMode::Physical && std::abs(agree - T(1)) > T(kExactTol)) {
      report.discrepancies.push_back(
          {"intermediate coefficients match the published table",
           "global renormalization disagrees with the published sector divisors "
           "for an asymmetric splitter (u != v)",
           static_cast<double>(agree)});
    }
  }
  return report;
}

template <typename T>
ProtocolReport<T> w_generate(T angle, T u, T p, T gamma_tau, NormalizationMode mode,
                             bool apply_flip,
                             std::optional<T> p1_override = std::nullopt) {
  return w_generate(angle, u, p, AmplitudeDamping<T>::from_gamma_tau(gamma_tau),
                    gamma_tau, mode, apply_flip, p1_override);
}

// --- Teleportation of a non-orthogonal pair ----------------------------------

// The two states to be teleported: chi1 = x|0> + y|1> and chi2 rotated from it
// with overlap <chi1|chi2> = s, both exactly normalized.
template <typename T>
std::pair<StateVector<T>, StateVector<T>> chi_pair(T x, T s) {
  if (!(x >= T(0) && x <= T(1))) throw std::invalid_argument("x must lie in [0,1]");
  if (!(s >= T(0) && s <= T(1))) throw std::invalid_argument("s must lie in [0,1]");
  const T y = std::sqrt(T(1) - x * x);
  const T q = std::sqrt(T(1) - s * s);
  VectorC<T> c1(2), c2(2);
  c1 << std::complex<T>(x), std::complex<T>(y);
  c2 << std::complex<T>(s * x + y * q), std::complex<T>(s * y - x * q);
  return {StateVector<T>(1, c1, true), StateVector<T>(1, c2, true)};
}

// Amplitude ratios parameterizing the case table: with chi2 = (m, n),
//   K = x m / (y n),  L = x n / (y m).
template <typename T>
T k_param(T x, T s) {
  auto [c1, c2] = chi_pair(x, s);
  const T num = x * c2.amp(0).real();
  const T den = std::sqrt(T(1) - x * x) * c2.amp(1).real();
  if (std::abs(den) <= T(kExactTol))
    throw std::domain_error("K undefined: vanishing denominator");
  return num / den;
}

template <typename T>
T l_param(T x, T s) {
  auto [c1, c2] = chi_pair(x, s);
  const T num = x * c2.amp(1).real();
  const T den = std::sqrt(T(1) - x * x) * c2.amp(0).real();
  if (std::abs(den) <= T(kExactTol))
    throw std::domain_error("L undefined: vanishing denominator");
  return num / den;
}

enum class TeleportCaseId { Ia, Ib, IIa, IIb, IIIa, IIIb, IVa, IVb };

inline constexpr TeleportCaseId kTeleportCases[8] = {
    TeleportCaseId::Ia,   TeleportCaseId::Ib,  TeleportCaseId::IIa,
    TeleportCaseId::IIb,  TeleportCaseId::IIIa, TeleportCaseId::IIIb,
    TeleportCaseId::IVa,  TeleportCaseId::IVb};

inline std::string to_string(TeleportCaseId id) {
  switch (id) {
    case TeleportCaseId::Ia: return "Ia";
    case TeleportCaseId::Ib: return "Ib";
    case TeleportCaseId::IIa: return "IIa";
    case TeleportCaseId::IIb: return "IIb";
    case TeleportCaseId::IIIa: return "IIIa";
    case TeleportCaseId::IIIb: return "IIIb";
    case TeleportCaseId::IVa: return "IVa";
    case TeleportCaseId::IVb: return "IVb";
  }
  throw std::invalid_argument("bad TeleportCaseId");
}

inline std::optional<TeleportCaseId> parse_teleport_case(const std::string& s) {
  for (TeleportCaseId id : kTeleportCases)
    if (to_string(id) == s) return id;
  return std::nullopt;
}

enum class CorrectionKind { Identity, FlipX, FlipZ, FlipMinusIY };

namespace detail {

enum class AngleForm { RationalMinus, RationalPlus, RadicalPlus, RadicalMinus };
enum class RatioParam { K, L };

struct CaseSpec {
  BellLabel first;                      // required outcome on the first pair
  std::array<BellLabel, 2> second;      // outcome family on the second pair
  const char* classical_bits;
  CorrectionKind correction;
  AngleForm form;
  RatioParam ratio;
  int target_index;                     // 0 -> chi1, 1 -> chi2
};

inline const CaseSpec& case_spec(TeleportCaseId id) {
  static const CaseSpec table[8] = {
      // Ia
      {BellLabel::PsiPlus, {BellLabel::PhiPlus, BellLabel::PhiMinus}, "00",
       CorrectionKind::Identity, AngleForm::RationalMinus, RatioParam::K, 0},
      // Ib
      {BellLabel::PsiPlus, {BellLabel::PhiPlus, BellLabel::PhiMinus}, "01",
       CorrectionKind::FlipX, AngleForm::RadicalPlus, RatioParam::K, 1},
      // IIa
      {BellLabel::PsiMinus, {BellLabel::PhiPlus, BellLabel::PhiMinus}, "10",
       CorrectionKind::FlipZ, AngleForm::RationalPlus, RatioParam::K, 0},
      // IIb
      {BellLabel::PsiMinus, {BellLabel::PhiPlus, BellLabel::PhiMinus}, "11",
       CorrectionKind::FlipMinusIY, AngleForm::RadicalMinus, RatioParam::K, 1},
      // IIIa
      {BellLabel::PsiPlus, {BellLabel::PsiPlus, BellLabel::PsiMinus}, "00",
       CorrectionKind::Identity, AngleForm::RadicalPlus, RatioParam::L, 1},
      // IIIb
      {BellLabel::PsiPlus, {BellLabel::PsiPlus, BellLabel::PsiMinus}, "00",
       CorrectionKind::Identity, AngleForm::RationalMinus, RatioParam::L, 0},
      // IVa
      {BellLabel::PsiMinus, {BellLabel::PsiPlus, BellLabel::PsiMinus}, "10",
       CorrectionKind::FlipZ, AngleForm::RadicalMinus, RatioParam::L, 1},
      // IVb
      {BellLabel::PsiMinus, {BellLabel::PsiPlus, BellLabel::PsiMinus}, "10",
       CorrectionKind::FlipZ, AngleForm::RationalPlus, RatioParam::L, 0},
  };
  return table[static_cast<int>(id)];
}

template <typename T>
QubitOperator<T> correction_op(CorrectionKind k) {
  switch (k) {
    case CorrectionKind::Identity: return identity_op<T>();
    case CorrectionKind::FlipX: return pauli_x<T>();
    case CorrectionKind::FlipZ: return pauli_z<T>();
    case CorrectionKind::FlipMinusIY: {
      MatrixC<T> m(2, 2);
      m << std::complex<T>(0), std::complex<T>(-1), std::complex<T>(1),
          std::complex<T>(0);
      return QubitOperator<T>(m);
    }
  }
  throw std::invalid_argument("bad CorrectionKind");
}

inline std::string correction_name(CorrectionKind k) {
  switch (k) {
    case CorrectionKind::Identity: return "I";
    case CorrectionKind::FlipX: return "X";
    case CorrectionKind::FlipZ: return "Z";
    case CorrectionKind::FlipMinusIY: return "-iY";
  }
  throw std::invalid_argument("bad CorrectionKind");
}

}  // namespace detail

// Resource angle for a case: (sin, cos) in one of four closed forms over the
// ratio t (K or L). Radical forms require 2 - t^2 >= 0.
template <typename T>
std::pair<T, T> case_angle(TeleportCaseId id, T x, T s) {
  const auto& spec = detail::case_spec(id);
  const T t = (spec.ratio == detail::RatioParam::K) ? k_param(x, s) : l_param(x, s);
  switch (spec.form) {
    case detail::AngleForm::RationalMinus:
      return {(t * t - T(1)) / (t * t + T(1)), -T(2) * t / (t * t + T(1))};
    case detail::AngleForm::RationalPlus:
      return {(t * t - T(1)) / (t * t + T(1)), T(2) * t / (t * t + T(1))};
    case detail::AngleForm::RadicalPlus: {
      const T rad = T(2) - t * t;
      if (rad < T(0)) throw std::domain_error("case undefined here: negative radicand");
      const T rt = std::sqrt(rad);
      return {(rt + t) / T(2), (rt - t) / T(2)};
    }
    case detail::AngleForm::RadicalMinus: {
      const T rad = T(2) - t * t;
      if (rad < T(0)) throw std::domain_error("case undefined here: negative radicand");
      const T rt = std::sqrt(rad);
      return {(t + rt) / T(2), (t - rt) / T(2)};
    }
  }
  throw std::invalid_argument("bad AngleForm");
}

// Two disjoint sender pairs over qubits {0,1,2,3}; the receiver holds qubit 4.
struct PairingChoice {
  std::array<std::pair<int, int>, 2> pairs;
};

inline void validate_pairing(const PairingChoice& pc) {
  std::array<int, 4> qs{pc.pairs[0].first, pc.pairs[0].second, pc.pairs[1].first,
                        pc.pairs[1].second};
  for (int q : qs)
    if (q < 0 || q > 3) throw std::invalid_argument("pairing qubit out of range");
  for (size_t i = 0; i < qs.size(); ++i)
    for (size_t j = i + 1; j < qs.size(); ++j)
      if (qs[i] == qs[j]) throw std::invalid_argument("pairing qubits must be disjoint");
}

inline std::string to_string(const PairingChoice& pc) {
  auto one = [](std::pair<int, int> p) {
    return std::to_string(p.first) + std::to_string(p.second);
  };
  return one(pc.pairs[0]) + "-" + one(pc.pairs[1]);
}

inline constexpr PairingChoice kDefaultPairing{{{{0, 2}, {1, 3}}}};

// Enumerate the 16 joint Bell outcomes of the chosen pairing on the composite
// chi1 (q0) x chi2 (q1) x three-qubit resource (q2,q3,q4), classify the
// receiver residual as QUBIT or BIT, and apply the case's correction on the
// outcomes matching the published pattern.
template <typename T>
ProtocolReport<T> teleport_case(TeleportCaseId id, T x, T s,
                                const PairingChoice& pairing = kDefaultPairing) {
  validate_pairing(pairing);
  const auto& spec = detail::case_spec(id);
  const auto [sin_a, cos_a] = case_angle(id, x, s);

  auto [chi1, chi2] = chi_pair(x, s);
  const auto resource = w_target_from(sin_a, cos_a, true);
  auto composite = tensor(tensor(chi1, chi2), resource);

  ProtocolReport<T> report;
  report.mode = NormalizationMode::Physical;
  report.parameters = {{"x", x}, {"s", s}, {"sin_alpha", sin_a}, {"cos_alpha", cos_a}};
  report.labels["pipeline"] = "teleport";
  report.labels["case"] = to_string(id);
  report.labels["pairing"] = to_string(pairing);
  report.labels["classical_bits"] = spec.classical_bits;
  report.labels["correction"] = detail::correction_name(spec.correction);
  report.labels["target"] = (spec.target_index == 0) ? "chi1" : "chi2";
  const T ratio =
      (spec.ratio == detail::RatioParam::K) ? k_param(x, s) : l_param(x, s);
  report.metrics[(spec.ratio == detail::RatioParam::K) ? "k_ratio" : "l_ratio"] = ratio;
  report.metrics["sin_alpha"] = sin_a;
  report.metrics["cos_alpha"] = cos_a;
  report.metrics["angle_identity_defect"] =
      std::abs(sin_a * sin_a + cos_a * cos_a - T(1));
  report.metrics["overlap_s"] = overlap(chi1, chi2).real();

  const StateVector<T>& target = (spec.target_index == 0) ? chi1 : chi2;
  const auto correction = detail::correction_op<T>(spec.correction);

  auto remap = [&](int q) {
    int d = 0;
    if (pairing.pairs[0].first < q) ++d;
    if (pairing.pairs[0].second < q) ++d;
    return q - d;
  };
  const std::pair<int, int> second_local{remap(pairing.pairs[1].first),
                                         remap(pairing.pairs[1].second)};

  T prob_sum = T(0), qubit_mass = T(0), bit_mass = T(0);
  T best = T(0);
  std::optional<StateVector<T>> best_state;
  for (BellLabel b1 : kBellLabels) {
    auto r1 = project_bell(composite, pairing.pairs[0], b1);
    for (BellLabel b2 : kBellLabels) {
      TeleportOutcome<T> out;
      out.first = b1;
      out.second = b2;
      out.matches_pattern =
          (b1 == spec.first) && (b2 == spec.second[0] || b2 == spec.second[1]);
      if (r1.residual.has_value()) {
        auto r2 = project_bell(*r1.residual, second_local, b2);
        out.joint_prob = r1.prob * r2.prob;
        if (r2.residual.has_value() && out.joint_prob > T(0)) {
          const StateVector<T>& bob = *r2.residual;
          const T m0 = std::norm(bob.amp(0));
          out.classification = (std::max(m0, T(1) - m0) >= T(1) - T(kRootTol))
                                   ? OutcomeClass::Bit
                                   : OutcomeClass::Qubit;
          if (out.matches_pattern) {
            auto corrected = apply_op(bob, correction, {0});
            out.corrected_fidelity = fidelity(corrected, target);
            out.state = corrected;
            if (!best_state.has_value() || *out.corrected_fidelity > best) {
              best = *out.corrected_fidelity;
              best_state = corrected;
            }
          } else {
            out.state = bob;
          }
          (out.classification == OutcomeClass::Qubit ? qubit_mass : bit_mass) +=
              out.joint_prob;
        } else {
          out.classification = OutcomeClass::Bit;  // inert: outcome never occurs
        }
      } else {
        out.classification = OutcomeClass::Bit;
      }
      prob_sum += out.joint_prob;
      report.outcomes.push_back(std::move(out));
    }
  }

  report.metrics["prob_sum"] = prob_sum;
  report.metrics["qubit_outcome_prob"] = qubit_mass;
  report.metrics["bit_outcome_prob"] = bit_mass;
  report.metrics["best_fidelity"] = best;
  report.final_state = best_state;
  report.target_fidelity = best;

  for (const auto& out : report.outcomes) {
    if (!out.matches_pattern || !out.corrected_fidelity.has_value()) continue;
    if (*out.corrected_fidelity < T(1) - T(kRootTol)) {
      report.discrepancies.push_back(
          {"every outcome in the published pattern yields the claimed target",
           "outcome (" + to_string(out.first) + ", " + to_string(out.second) +
               ") of case " + to_string(id) +
               " does not reproduce the target after the published correction",
           static_cast<double>(*out.corrected_fidelity)});
    }
  }
  return report;
}

// One row of the pairing search: a pairing, whether the pattern assignment is
// swapped between the two pairs, and the best matched fidelity it achieves.
template <typename T>
struct PairingRow {
  PairingChoice pairing;
  bool swapped = false;
  T best_fidelity = T(0);
  bool reproduced = false;
};

template <typename T>
struct PairingReport {
  std::vector<PairingRow<T>> rows;  // 3 pairings x 2 assignments, fixed order
  int best_index = 0;
};

// Evaluate every disjoint pairing of {0,1,2,3} under both pattern assignments.
template <typename T>
PairingReport<T> search_pairings(TeleportCaseId id, T x, T s) {
  static const PairingChoice base[3] = {PairingChoice{{{{0, 1}, {2, 3}}}},
                                        PairingChoice{{{{0, 2}, {1, 3}}}},
                                        PairingChoice{{{{0, 3}, {1, 2}}}}};
  PairingReport<T> out;
  for (const auto& pc : base) {
    for (bool swapped : {false, true}) {
      PairingChoice use = pc;
      if (swapped) std::swap(use.pairs[0], use.pairs[1]);
      auto rep = teleport_case(id, x, s, use);
      PairingRow<T> row;
      row.pairing = pc;
      row.swapped = swapped;
      row.best_fidelity = rep.metrics.at("best_fidelity");
      row.reproduced = row.best_fidelity >= T(1) - T(kRootTol);
      out.rows.push_back(row);
    }
  }
  for (size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].best_fidelity > out.rows[out.best_index].best_fidelity)
      out.best_index = static_cast<int>(i);
  return out;
}

}  // namespace qsim
