#include "doctest.h"

#include "qsim/channels.hpp"
#include "qsim/random.hpp"
#include "test_util.hpp"

#include <cmath>
#include <complex>

using namespace qsim;
using qsim::testutil::max_abs_diff;
using Cplx = std::complex<double>;

TEST_CASE("measurement and channel element sets are complete") {
  for (double p : {0.0, 0.1, 0.37, 0.5, 0.8, 1.0}) {
    CHECK(WeakMeasurement<double>(p).completeness_defect() <= 1e-12);
    CHECK(PostWeakMeasurement<double>(p, PostWeakOrientation::SuppressZero)
              .completeness_defect() <= 1e-12);
    CHECK(PostWeakMeasurement<double>(p, PostWeakOrientation::SuppressOne)
              .completeness_defect() <= 1e-12);
    CHECK(AmplitudeDamping<double>::from_r(p).completeness_defect() <= 1e-12);
  }
  CHECK_THROWS_AS(WeakMeasurement<double>(1.5), std::invalid_argument);
  CHECK_THROWS_AS(AmplitudeDamping<double>::from_r(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(AmplitudeDamping<double>::from_gamma_tau(-1.0), std::invalid_argument);
}

TEST_CASE("damping magnitude from the exponential form") {
  CHECK(AmplitudeDamping<double>::from_gamma_tau(0.0).r() == 0.0);
  CHECK(std::abs(AmplitudeDamping<double>::from_gamma_tau(std::log(2.0)).r() - 0.5) <=
        1e-15);
  // Tiny rates stay accurate: r = 1 - e^{-g} for g = 1e-12 is g to first order.
  CHECK(AmplitudeDamping<double>::from_gamma_tau(1e-12).r() ==
        doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("pre_weak_branch: fixed outcome states and probabilities") {
  const double a = 0.6, b = 0.8, p = 0.3;
  auto in = StateVector<double>::from_amps(1, {Cplx(a), Cplx(b)}, true);
  auto branches = pre_weak_branch(in, 0, p);

  const double n_m1 = a * a * p + b * b * (1.0 - p);
  CHECK(branches[0].path == std::vector<std::string>{"M1"});
  CHECK(std::abs(branches[0].joint_prob - n_m1) <= 1e-12);
  REQUIRE(branches[0].state.has_value());
  // M1 yields (a sqrt(p), b sqrt(1-p)) / sqrt(N).
  CHECK(std::abs(branches[0].state->amp(0) - Cplx(a * std::sqrt(p) / std::sqrt(n_m1))) <=
        1e-12);
  CHECK(std::abs(branches[0].state->amp(1) -
                 Cplx(b * std::sqrt(1.0 - p) / std::sqrt(n_m1))) <= 1e-12);

  CHECK(branches[1].path == std::vector<std::string>{"M2"});
  CHECK(std::abs(branches[0].joint_prob + branches[1].joint_prob - 1.0) <= 1e-12);
}

TEST_CASE("pre_weak_branch: p=1 degenerates to a projective measurement") {
  const double a = 0.6, b = 0.8;
  auto in = StateVector<double>::from_amps(1, {Cplx(a), Cplx(b)}, true);
  auto branches = pre_weak_branch(in, 0, 1.0);
  CHECK(std::abs(branches[0].joint_prob - a * a) <= 1e-12);
  CHECK(std::abs(branches[0].state->amp(0) - Cplx(1.0)) <= 1e-12);
  CHECK(std::abs(branches[1].joint_prob - b * b) <= 1e-12);
  CHECK(std::abs(branches[1].state->amp(1) - Cplx(1.0)) <= 1e-12);
}

TEST_CASE("pre_weak_branch: probabilities sum to one on random states") {
  Rng rng(211);
  for (int rep = 0; rep < 100; ++rep) {
    auto s = random_state(2, rng);
    const double p = rng.uniform();
    auto branches = pre_weak_branch(s, rep % 2, p);
    CHECK(std::abs(branches[0].joint_prob + branches[1].joint_prob - 1.0) <= 1e-12);
  }
}

TEST_CASE("damping_branch: r=0 leaves the state untouched") {
  Rng rng(223);
  auto s = random_state(1, rng);
  auto branches = damping_branch(s, 0, 0.0);
  CHECK(branches[0].path == std::vector<std::string>{"no-jump"});
  CHECK(std::abs(branches[0].joint_prob - 1.0) <= 1e-12);
  CHECK(max_abs_diff(branches[0].state->amps(), s.amps()) <= 1e-12);
  CHECK(branches[1].joint_prob == 0.0);
  CHECK_FALSE(branches[1].state.has_value());
}

TEST_CASE("damping_branch: joint accounting through the measurement chain") {
  // Joint probability along (M1, jump) equals |b|^2 (1-p) r.
  const double a = 0.6, b = 0.8, p = 0.3, gt = 0.7;
  const double r = -std::expm1(-gt);
  auto in = StateVector<double>::from_amps(1, {Cplx(a), Cplx(b)}, true);

  auto weak = pre_weak_branch(in, 0, p);
  auto damp = damping_branch(*weak[0].state, 0, r);
  auto joint_jump = chain(weak[0], damp[1]);
  CHECK(std::abs(joint_jump.joint_prob - b * b * (1.0 - p) * r) <= 1e-12);
  // The jump resets the qubit to |0>.
  CHECK(std::abs(joint_jump.state->amp(0) - Cplx(1.0)) <= 1e-12);

  // No-jump branch carries (a sqrt(p), b sqrt((1-p) e^{-gt})) normalized.
  auto joint_nj = chain(weak[0], damp[0]);
  const double mass = a * a * p + b * b * (1.0 - p) * std::exp(-gt);
  CHECK(std::abs(joint_nj.joint_prob - mass) <= 1e-12);
  CHECK(std::abs(joint_nj.state->amp(0) - Cplx(a * std::sqrt(p / mass))) <= 1e-12);
  CHECK(std::abs(joint_nj.state->amp(1) -
                 Cplx(b * std::sqrt((1.0 - p) * std::exp(-gt) / mass))) <= 1e-12);
}

TEST_CASE("post_weak_branch: p1=0 passes with certainty") {
  Rng rng(227);
  auto s = random_state(1, rng);
  auto branches = post_weak_branch(s, 0, 0.0, PostWeakOrientation::SuppressZero);
  CHECK(branches[0].path == std::vector<std::string>{"post-pass"});
  CHECK(std::abs(branches[0].joint_prob - 1.0) <= 1e-12);
  CHECK(max_abs_diff(branches[0].state->amps(), s.amps()) <= 1e-12);
  CHECK(branches[1].joint_prob == 0.0);
}

TEST_CASE("post_weak_branch: suppress-zero fail element collapses to |0>") {
  Rng rng(229);
  auto s = random_state(1, rng);
  auto branches = post_weak_branch(s, 0, 0.4, PostWeakOrientation::SuppressZero);
  CHECK(std::abs(branches[0].joint_prob + branches[1].joint_prob - 1.0) <= 1e-12);
  REQUIRE(branches[1].state.has_value());
  CHECK(std::abs(std::abs(branches[1].state->amp(0)) - 1.0) <= 1e-12);
  CHECK(std::abs(branches[1].state->amp(1)) <= 1e-12);
}

TEST_CASE("optimal_p1: fixed values and feasibility boundary") {
  CHECK(std::abs(optimal_p1(0.5, 0.0) - 0.0) <= 1e-15);
  CHECK(std::abs(optimal_p1(0.8, std::log(2.0)) - 0.875) <= 1e-15);
  CHECK_THROWS_AS(optimal_p1(0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(optimal_p1(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(optimal_p1(0.5, -1.0), std::invalid_argument);
  // p=1 gives p1=1 for any damping strength.
  CHECK(std::abs(optimal_p1(1.0, 3.0) - 1.0) <= 1e-15);
}

TEST_CASE("optimal_p1_w: fixed values, reduction, feasibility") {
  const double h = 1.0 / std::sqrt(2.0);
  for (double p : {0.5, 0.7, 0.9})
    for (double gt : {0.0, 0.3, 1.0}) {
      if (p < (1.0 - p) * std::exp(-gt)) continue;
      CHECK(std::abs(optimal_p1_w(p, gt, h, h) - optimal_p1(p, gt)) <= 1e-12);
    }
  const double u = std::sqrt(0.8), v = std::sqrt(0.2);
  CHECK(std::abs(optimal_p1_w(0.5, 0.0, u, v) - 0.75) <= 1e-12);
  CHECK_THROWS_AS(optimal_p1_w(0.5, 0.0, std::sqrt(0.2), std::sqrt(0.8)),
                  std::domain_error);
  CHECK_THROWS_AS(optimal_p1_w(0.5, 0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_p1_w(0.5, 0.0, 0.9, 0.9), std::invalid_argument);
}

TEST_CASE("feed_forward_for: identity and bit flip, both involutions") {
  auto f1 = feed_forward_for<double>(WeakOutcome::M1);
  auto f2 = feed_forward_for<double>(WeakOutcome::M2);
  CHECK(max_abs_diff(f1.matrix(), MatrixC<double>::Identity(2, 2)) <= 1e-15);
  CHECK(max_abs_diff(f2.matrix(), pauli_x<double>().matrix()) <= 1e-15);
  CHECK(max_abs_diff(MatrixC<double>(f1.matrix() * f1.matrix()),
                     MatrixC<double>::Identity(2, 2)) <= 1e-15);
  CHECK(max_abs_diff(MatrixC<double>(f2.matrix() * f2.matrix()),
                     MatrixC<double>::Identity(2, 2)) <= 1e-15);
}

TEST_CASE("channel_density_oracle: fixed points and trace preservation") {
  auto one = StateVector<double>::basis(1, 1);
  auto rho1 = DensityMatrix<double>::from_pure(one);

  auto unchanged = channel_density_oracle(rho1, AmplitudeDamping<double>::from_r(0.0), 0);
  CHECK(max_abs_diff(unchanged.matrix(), rho1.matrix()) <= 1e-15);

  auto decayed = channel_density_oracle(rho1, AmplitudeDamping<double>::from_r(1.0), 0);
  auto rho0 = DensityMatrix<double>::from_pure(StateVector<double>::basis(1, 0));
  CHECK(max_abs_diff(decayed.matrix(), rho0.matrix()) <= 1e-15);

  Rng rng(233);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = random_state(2, rng);
    auto rho = DensityMatrix<double>::from_pure(s);
    auto out = channel_density_oracle(rho, AmplitudeDamping<double>::from_r(0.37), 1);
    CHECK(std::abs(out.trace() - 1.0) <= 1e-12);
    CHECK_NOTHROW(out.validate());
  }
}

TEST_CASE("trajectory unraveling reproduces the density-operator evolution") {
  Rng rng(239);
  for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (int rep = 0; rep < 40; ++rep) {
      const int n = 1 + static_cast<int>(rng.word() % 2);
      const int q = static_cast<int>(rng.word() % n);
      auto s = random_state(n, rng);
      auto branches = damping_branch(s, q, r);
      MatrixC<double> mix = MatrixC<double>::Zero(s.dim(), s.dim());
      for (const auto& b : branches) {
        if (!b.state.has_value()) continue;
        mix += b.joint_prob * (b.state->amps() * b.state->amps().adjoint());
      }
      auto oracle = channel_density_oracle(DensityMatrix<double>::from_pure(s),
                                           AmplitudeDamping<double>::from_r(r), q);
      CHECK(max_abs_diff(mix, oracle.matrix()) <= 1e-12);
    }
  }
}

TEST_CASE("protect_unknown_qubit: fixed success probabilities and exact recovery") {
  const double h = 1.0 / std::sqrt(2.0);

  auto rep1 = protect_unknown_qubit(Cplx(h), Cplx(h), 0.5, 0.0);
  CHECK(std::abs(rep1.metrics.at("success_path_prob") - 0.5) <= 1e-12);
  CHECK(std::abs(rep1.metrics.at("recovered_fidelity_m1") - 1.0) <= 1e-12);
  CHECK(std::abs(rep1.metrics.at("recovered_fidelity_m2") - 1.0) <= 1e-12);

  auto rep2 = protect_unknown_qubit(Cplx(h), Cplx(h), 0.8, std::log(2.0));
  CHECK(std::abs(rep2.metrics.at("success_path_prob") - 0.1) <= 1e-12);
  CHECK(std::abs(rep2.metrics.at("recovered_fidelity_m1") - 1.0) <= 1e-12);
  // The mirror branch succeeds with the same joint probability.
  CHECK(std::abs(rep2.metrics.at("m2_success_path_prob") - 0.1) <= 1e-12);
  CHECK(std::abs(rep2.metrics.at("recovered_fidelity_m2") - 1.0) <= 1e-12);
}

TEST_CASE("protect_unknown_qubit: branch tree shape and total probability") {
  auto rep = protect_unknown_qubit(Cplx(0.6), Cplx(0.8), 0.7, 0.4);
  REQUIRE(rep.branches.size() == 8);
  CHECK(std::is_sorted(rep.branches.begin(), rep.branches.end(), path_less<double>));
  CHECK(std::abs(rep.metrics.at("leaf_prob_sum") - 1.0) <= 1e-12);
  for (const auto& b : rep.branches) {
    REQUIRE(b.path.size() == 3);
    if (b.state.has_value()) CHECK(std::abs(b.state->norm_sq() - 1.0) <= 1e-12);
  }
  CHECK_FALSE(rep.degenerate);
  // Both probability readings of the no-jump stage are reported.
  const double joint = rep.metrics.at("no_jump_prob_joint_m1");
  const double cond = rep.metrics.at("no_jump_prob_conditional_m1");
  CHECK(std::abs(joint - cond * rep.metrics.at("m1_outcome_prob")) <= 1e-12);
}

TEST_CASE("protect_unknown_qubit: success probability ignores the input state") {
  Rng rng(241);
  const double p = 0.7, gt = 0.6;
  const double expect = (1.0 - p) * std::exp(-gt);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = random_state(1, rng);
    auto report = protect_unknown_qubit(s.amp(0), s.amp(1), p, gt);
    CHECK(std::abs(report.metrics.at("success_path_prob") - expect) <= 1e-12);
    CHECK(std::abs(report.metrics.at("m2_success_path_prob") - expect) <= 1e-12);
    CHECK(std::abs(report.metrics.at("recovered_fidelity_m1") - 1.0) <= 1e-12);
    CHECK(std::abs(report.metrics.at("recovered_fidelity_m2") - 1.0) <= 1e-12);
  }
}

TEST_CASE("protect_unknown_qubit: the decay-free pole stays put where operators are diagonal") {
  // For input |0>, every operator along the M1 tree and the (M2, no-jump)
  // leaves is diagonal, so the state never leaves |0>. The (M2, jump) leaves
  // end in |1>: the mirror deliberately flips before the channel, and the
  // flipped-back jump output is X K2 X |0> ~ |1>.
  auto rep = protect_unknown_qubit(Cplx(1.0), Cplx(0.0), 0.6, 0.5);
  for (const auto& b : rep.branches) {
    if (!b.state.has_value()) continue;
    if (b.path[0] == "M1" || b.path[1] == "no-jump") {
      CHECK(std::abs(std::abs(b.state->amp(0)) - 1.0) <= 1e-12);
    } else {
      CHECK(std::abs(std::abs(b.state->amp(1)) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("protect_unknown_qubit: degenerate and infeasible parameter handling") {
  const double h = 1.0 / std::sqrt(2.0);
  CHECK_THROWS_AS(protect_unknown_qubit(Cplx(h), Cplx(h), 0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(protect_unknown_qubit(Cplx(h), Cplx(h), 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(protect_unknown_qubit(Cplx(0.9), Cplx(0.1), 0.5, 0.0),
                  std::invalid_argument);  // unnormalized input

  auto deg = protect_unknown_qubit(Cplx(h), Cplx(h), 1.0, 0.5);
  CHECK(deg.degenerate);
  CHECK(std::abs(deg.metrics.at("leaf_prob_sum") - 1.0) <= 1e-12);

  // Explicit p1 override allows p=0 (projective), still flagged degenerate.
  auto deg0 = protect_unknown_qubit<double>(Cplx(h), Cplx(h), 0.0,
                                            AmplitudeDamping<double>::from_r(0.5), 0.0,
                                            0.25);
  CHECK(deg0.degenerate);
}
