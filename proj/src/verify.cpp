#include "verify.hpp"

#include "qsim/channels.hpp"
#include "qsim/entanglement.hpp"
#include "qsim/protocols.hpp"
#include "qsim/random.hpp"
#include "report_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qsim::app {

namespace {

using Cplx = std::complex<double>;

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const std::vector<double> kPGrid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
const std::vector<double> kGtGrid = {0.25, 0.5, 1.0, 2.0};

bool feasible(double p, double gt) {
  return p > 0 && p >= (1.0 - p) * std::exp(-gt) - 1e-15;
}

struct ErrTracker {
  double max_err = 0.0;
  void note(double err) { max_err = std::max(max_err, std::abs(err)); }
};

// ---- 1: success probability over the feasible strength grid ----------------

CriterionResult criterion_success_prob(std::uint64_t seed) {
  CriterionResult res{1, "success probability on the feasible strength grid",
                      false, 0.0, 1e-12, ""};
  Rng rng(seed + 1);
  ErrTracker err;
  double worst_var = 0.0;
  int points = 0;
  for (double p : kPGrid)
    for (double gt : kGtGrid) {
      if (!feasible(p, gt)) continue;
      ++points;
      const double expect = (1.0 - p) * std::exp(-gt);
      double mean = 0.0, m2 = 0.0;
      for (int i = 0; i < 100; ++i) {
        auto s = random_state(1, rng);
        auto rep = protect_unknown_qubit(s.amp(0), s.amp(1), p, gt);
        const double v = rep.metrics.at("success_path_prob");
        err.note(v - expect);
        const double delta = v - mean;
        mean += delta / (i + 1);
        m2 += delta * (v - mean);
      }
      worst_var = std::max(worst_var, m2 / 99.0);
    }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol && worst_var < 1e-20 && points > 0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d feasible grid points x 100 random states, worst variance %.3g",
                points, worst_var);
  res.detail = buf;
  return res;
}

// ---- 2: protected transmission returns the input on both branches ----------

CriterionResult criterion_protection(std::uint64_t seed) {
  CriterionResult res{2, "protected qubit recovered on both weak-outcome branches",
                      false, 0.0, 1e-12, ""};
  Rng rng(seed + 2);
  ErrTracker err;
  int points = 0;
  for (double p : kPGrid)
    for (double gt : kGtGrid) {
      if (!feasible(p, gt)) continue;
      ++points;
      for (int i = 0; i < 100; ++i) {
        auto s = random_state(1, rng);
        auto rep = protect_unknown_qubit(s.amp(0), s.amp(1), p, gt);
        err.note(1.0 - rep.metrics.at("recovered_fidelity_m1"));
        err.note(1.0 - rep.metrics.at("recovered_fidelity_m2"));
      }
    }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol && points > 0;
  res.detail = std::to_string(points) + " feasible grid points x 100 random states";
  return res;
}

// Random real pair (a, g) with 2a^2 + 2g^2 = 1, common sign, plus a feasible
// channel strength.
struct FamilyDraw {
  double a, g, p, gt;
};

FamilyDraw draw_family(Rng& rng) {
  const double sign = (rng.word() & 1) ? 1.0 : -1.0;
  const double theta = rng.uniform(0.02, M_PI / 2.0 - 0.02);
  FamilyDraw d;
  d.a = sign * std::cos(theta) * kInvSqrt2;
  d.g = sign * std::sin(theta) * kInvSqrt2;
  do {
    d.p = rng.uniform(0.35, 0.95);
    d.gt = rng.uniform(0.0, 1.0);
  } while (!feasible(d.p, d.gt));
  return d;
}

// ---- 3: generated pair hits the maximally entangled target -----------------

CriterionResult criterion_bell(std::uint64_t seed) {
  CriterionResult res{3, "pair generation: unit fidelity and outcome probability 1/2",
                      false, 0.0, 1e-12, "100 random amplitude pairs, matched signs"};
  Rng rng(seed + 3);
  ErrTracker err;
  for (int i = 0; i < 100; ++i) {
    const auto d = draw_family(rng);
    auto rep = bell_generate(Cplx(d.a), Cplx(-d.a), Cplx(d.g), Cplx(d.g), d.p, d.gt,
                             NormalizationMode::Paper);
    err.note(rep.metrics.at("bell_fidelity") - 1.0);
    err.note(rep.metrics.at("m1_outcome_prob") - 0.5);
  }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol;
  return res;
}

// ---- 4: decay branch is a product state -------------------------------------

CriterionResult criterion_jump_product(std::uint64_t seed) {
  CriterionResult res{4, "decay branch of pair generation is a product state",
                      false, 0.0, 1e-10, "100 random amplitude pairs"};
  Rng rng(seed + 4);
  ErrTracker err;
  for (int i = 0; i < 100; ++i) {
    const auto d = draw_family(rng);
    auto rep = bell_generate(Cplx(d.a), Cplx(-d.a), Cplx(d.g), Cplx(d.g), d.p, d.gt,
                             NormalizationMode::Paper);
    err.note(rep.metrics.at("jump_schmidt_0") - 1.0);
    err.note(rep.metrics.at("jump_schmidt_1"));
    err.note(rep.metrics.at("jump_concurrence"));
  }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol;
  return res;
}

// ---- 5: two-branch unraveling reproduces the Kraus channel ------------------

CriterionResult criterion_unraveling(std::uint64_t seed) {
  CriterionResult res{5, "trajectory mixture equals the Kraus channel image",
                      false, 0.0, 1e-12, "200 random states x 5 decay strengths"};
  Rng rng(seed + 5);
  ErrTracker err;
  for (int i = 0; i < 200; ++i) {
    const int n = (i < 100) ? 1 : 2;
    const int q = (n == 2) ? static_cast<int>(rng.word() % 2) : 0;
    auto s = random_state(n, rng);
    for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto ch = AmplitudeDamping<double>::from_r(r);
      auto branches = damping_branch(s, q, r);
      MatrixC<double> mix = MatrixC<double>::Zero(s.dim(), s.dim());
      for (const auto& b : branches)
        if (b.state.has_value())
          mix += b.joint_prob * (b.state->amps() * b.state->amps().adjoint());
      auto direct = channel_density_oracle(DensityMatrix<double>::from_pure(s), ch, q);
      err.note((mix - direct.matrix()).cwiseAbs().maxCoeff());
    }
  }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol;
  return res;
}

// ---- 6: W-type generation ----------------------------------------------------

CriterionResult criterion_wstate() {
  CriterionResult res{6, "W-type generation: zero intermediate tangle, exact targets",
                      false, 0.0, 1e-12, ""};
  const std::vector<double> angles = {0.0, M_PI / 8, M_PI / 4, 3 * M_PI / 8, M_PI / 2};
  ErrTracker tangle_err, fid_err;
  int tangle_points = 0;
  for (double angle : angles)
    for (double u : {0.5, 0.6, 0.8})
      for (double p : kPGrid)
        for (double gt : kGtGrid) {
          const double v = std::sqrt(1.0 - u * u);
          if (p <= 0 || 1.0 - v * v * (1.0 - p) * std::exp(-gt) / (u * u * p) < 0)
            continue;
          auto rep = w_generate(angle, u, p, gt, NormalizationMode::Paper, false);
          tangle_err.note(rep.metrics.at("intermediate_three_tangle"));
          ++tangle_points;
        }
  for (double angle : angles)
    for (double p : kPGrid)
      for (double gt : kGtGrid) {
        if (!feasible(p, gt)) continue;  // u = v reduces to the plain threshold
        for (bool flip : {false, true}) {
          auto rep =
              w_generate(angle, kInvSqrt2, p, gt, NormalizationMode::Paper, flip);
          fid_err.note(rep.metrics.at("w_fidelity") - 1.0);
          fid_err.note(rep.metrics.at("w_fidelity_symmetric") - 1.0);
        }
      }
  res.passed = fid_err.max_err <= 1e-12 && tangle_err.max_err <= 1e-9;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "tangle <= %.3g over %d feasible points (tol 1e-9); "
                "target fidelity err %.3g (tol 1e-12), both orientations",
                tangle_err.max_err, tangle_points, fid_err.max_err);
  res.detail = buf;
  res.max_err = fid_err.max_err;
  return res;
}

// ---- 7: entanglement measures cross-validate --------------------------------

CriterionResult criterion_entanglement(std::uint64_t seed) {
  CriterionResult res{7, "tangle formulas agree; fixed points and invariance hold",
                      false, 0.0, 1e-8, ""};
  Rng rng(seed + 7);
  ErrTracker cross_err, fixed_err, lu_err;
  for (int i = 0; i < 200; ++i) {
    auto s = random_state(3, rng);
    cross_err.note(three_tangle(s) - ckw_residual_tangle(s));
  }
  VectorC<double> ghz_amps = VectorC<double>::Zero(8);
  ghz_amps(0) = Cplx(kInvSqrt2);
  ghz_amps(7) = Cplx(kInvSqrt2);
  StateVector<double> ghz(3, ghz_amps, true);
  fixed_err.note(three_tangle(ghz) - 1.0);
  VectorC<double> w_amps = VectorC<double>::Zero(8);
  w_amps(1) = w_amps(2) = w_amps(4) = Cplx(1.0 / std::sqrt(3.0));
  StateVector<double> w_state(3, w_amps, true);
  fixed_err.note(three_tangle(w_state));
  for (int i = 0; i < 100; ++i) {
    auto s = random_state(3, rng);
    auto rotated = s;
    for (int q = 0; q < 3; ++q)
      rotated =
          apply_op(rotated, QubitOperator<double>(random_unitary(2, rng)), {q});
    lu_err.note(three_tangle(s) - three_tangle(rotated));
  }
  res.max_err = cross_err.max_err;
  res.passed = cross_err.max_err <= 1e-8 && fixed_err.max_err <= 1e-10 &&
               lu_err.max_err <= 1e-9;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "cross-formula %.3g (tol 1e-8); fixed points %.3g (tol 1e-10); "
                "local-unitary drift %.3g (tol 1e-9)",
                cross_err.max_err, fixed_err.max_err, lu_err.max_err);
  res.detail = buf;
  return res;
}

// ---- 8: prepared pair overlap equals s ---------------------------------------

CriterionResult criterion_overlap() {
  CriterionResult res{8, "prepared pair overlap equals the requested s",
                      false, 0.0, 1e-12, "9 x 11 (x, s) grid"};
  ErrTracker err;
  for (int ix = 1; ix <= 9; ++ix)
    for (int is = 0; is <= 10; ++is) {
      const double x = ix / 10.0, s = is / 10.0;
      auto [c1, c2] = chi_pair(x, s);
      err.note(overlap(c1, c2).real() - s);
      err.note(c1.norm_sq() - 1.0);
      err.note(c2.norm_sq() - 1.0);
    }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol;
  return res;
}

// ---- 9: case angles satisfy the trigonometric identity ----------------------

CriterionResult criterion_case_angles(std::uint64_t seed) {
  CriterionResult res{9, "case angles: unit identity on valid domains",
                      false, 0.0, 1e-12, ""};
  Rng rng(seed + 9);
  ErrTracker err;
  int defined = 0, undefined = 0;
  for (int i = 0; i < 125; ++i) {
    const double x = rng.uniform(0.05, 0.95);
    const double s = rng.uniform(0.0, 1.0);
    for (TeleportCaseId id : kTeleportCases) {
      try {
        auto [sn, cs] = case_angle(id, x, s);
        err.note(sn * sn + cs * cs - 1.0);
        ++defined;
      } catch (const std::domain_error&) {
        ++undefined;
      }
    }
  }
  // A point that must be reported undefined: the ratio exceeds sqrt(2) here.
  bool undefined_detected = false;
  try {
    case_angle(TeleportCaseId::Ib, 0.6, 0.3);
  } catch (const std::domain_error&) {
    undefined_detected = true;
  }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol && defined > 0 && undefined_detected;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d defined / %d undefined of 1000 samples",
                defined, undefined);
  res.detail = buf;
  return res;
}

// ---- 10: teleportation table: determinism and completeness ------------------

CriterionResult criterion_teleport_table(VerificationReport& out) {
  CriterionResult res{10, "teleportation table: deterministic search, complete sums",
                      false, 0.0, 1e-12, ""};
  const std::vector<double> xs = {0.15, 0.3, 0.45, 0.6, 0.75};
  const std::vector<double> ss = {0.1, 0.3, 0.5, 0.7, 0.9};
  ErrTracker sum_err;
  bool deterministic = true, complete = true;
  for (TeleportCaseId id : kTeleportCases) {
    int evaluated = 0, reproduced = 0;
    double worst_best = 1.0;
    int variant_misses = 0;
    for (double x : xs)
      for (double s : ss) {
        PairingReport<double> first, second;
        try {
          first = search_pairings(id, x, s);
          second = search_pairings(id, x, s);
        } catch (const std::domain_error&) {
          continue;  // undefined parameterization: masked, not an error
        }
        ++evaluated;
        if (first.rows.size() != 6 || second.rows.size() != 6) complete = false;
        if (first.best_index != second.best_index) deterministic = false;
        for (size_t i = 0; i < first.rows.size() && i < second.rows.size(); ++i) {
          if (first.rows[i].best_fidelity != second.rows[i].best_fidelity ||
              first.rows[i].swapped != second.rows[i].swapped)
            deterministic = false;
        }
        auto rep = teleport_case(id, x, s, first.rows[first.best_index].pairing);
        if (rep.outcomes.size() != 16) complete = false;
        sum_err.note(rep.metrics.at("prob_sum") - 1.0);
        if (first.rows[first.best_index].reproduced)
          ++reproduced;
        else
          worst_best =
              std::min(worst_best, first.rows[first.best_index].best_fidelity);
        variant_misses += static_cast<int>(rep.discrepancies.size());
      }
    char buf[240];
    if (reproduced == evaluated) {
      std::snprintf(buf, sizeof(buf),
                    "case %s: REPRODUCED at all %d defined grid points",
                    to_string(id).c_str(), evaluated);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "case %s: reproduced at %d/%d defined grid points "
                    "(worst best-pairing fidelity %.17g)",
                    to_string(id).c_str(), reproduced, evaluated, worst_best);
      out.ledger.push_back(
          {"case " + to_string(id) + " reproduces its target at every point",
           std::string(buf), worst_best});
    }
    if (variant_misses > 0) {
      char vbuf[240];
      std::snprintf(vbuf, sizeof(vbuf),
                    "case %s: %d within-pattern outcome(s) across the grid return "
                    "a different state under the tabulated correction",
                    to_string(id).c_str(), variant_misses);
      out.ledger.push_back(
          {"both outcomes of the classical-bit pattern of case " + to_string(id) +
               " return the target",
           std::string(vbuf), std::nullopt});
    }
  }
  res.max_err = sum_err.max_err;
  res.passed = sum_err.max_err <= res.tol && deterministic && complete;
  res.detail = std::string("8 cases x 5x5 grid; deterministic=") +
               (deterministic ? "yes" : "no") + ", complete=" +
               (complete ? "yes" : "no");
  return res;
}

// ---- 11: physical-mode pair output against an independent oracle ------------

// Straight-line re-derivation with bare scalar arithmetic (no operator
// machinery): weak element, decay survival, filter, plain Hadamard, one
// global normalization at the end.
std::array<double, 4> straight_line_pair(double a, double g, double p, double gt) {
  const double p1 = 1.0 - (1.0 - p) * std::exp(-gt) / p;
  const double sp = std::sqrt(p), sq = std::sqrt(1.0 - p);
  const double surv = std::sqrt(std::exp(-gt));
  const double keep = std::sqrt(1.0 - p1);
  double v[4] = {a * sp, -a * sq * surv, g * sp, g * sq * surv};
  v[0] *= keep;
  v[2] *= keep;
  const double h = kInvSqrt2;
  std::array<double, 4> out = {h * (v[0] + v[1]), h * (v[0] - v[1]),
                               h * (v[2] + v[3]), h * (v[2] - v[3])};
  double norm = 0.0;
  for (double x : out) norm += x * x;
  for (double& x : out) x /= std::sqrt(norm);
  return out;
}

CriterionResult criterion_physical_mode(std::uint64_t seed) {
  CriterionResult res{11, "physical mode matches the independent straight-line oracle",
                      false, 0.0, 1e-10,
                      "100 random amplitude pairs, closed form and oracle"};
  Rng rng(seed + 11);
  ErrTracker err;
  for (int i = 0; i < 100; ++i) {
    const auto d = draw_family(rng);
    auto rep = bell_generate(Cplx(d.a), Cplx(-d.a), Cplx(d.g), Cplx(d.g), d.p, d.gt,
                             NormalizationMode::Physical);
    const auto oracle = straight_line_pair(d.a, d.g, d.p, d.gt);
    VectorC<double> expect(4);
    for (int k = 0; k < 4; ++k) expect(k) = Cplx(oracle[k]);
    // Closed form: (a|01> + g|10>) / sqrt(a^2 + g^2).
    const double nrm = std::sqrt(d.a * d.a + d.g * d.g);
    VectorC<double> closed = VectorC<double>::Zero(4);
    closed(1) = Cplx(d.a / nrm);
    closed(2) = Cplx(d.g / nrm);

    const auto& amps = rep.final_state->amps();
    auto phase_free = [](const VectorC<double>& lhs, const VectorC<double>& rhs) {
      Cplx ph = lhs.adjoint() * rhs;
      if (std::abs(ph) < 1e-300) return 2.0;
      ph /= std::abs(ph);
      return (lhs * ph - rhs).cwiseAbs().maxCoeff();
    };
    err.note(phase_free(amps, expect));
    err.note(phase_free(amps, closed));
  }
  res.max_err = err.max_err;
  res.passed = err.max_err <= res.tol;
  return res;
}

}  // namespace

VerificationReport run_verification(std::uint64_t seed) {
  VerificationReport report;
  report.criteria.push_back(criterion_success_prob(seed));
  report.criteria.push_back(criterion_protection(seed));
  report.criteria.push_back(criterion_bell(seed));
  report.criteria.push_back(criterion_jump_product(seed));
  report.criteria.push_back(criterion_unraveling(seed));
  report.criteria.push_back(criterion_wstate());
  report.criteria.push_back(criterion_entanglement(seed));
  report.criteria.push_back(criterion_overlap());
  report.criteria.push_back(criterion_case_angles(seed));
  report.criteria.push_back(criterion_teleport_table(report));
  report.criteria.push_back(criterion_physical_mode(seed));

  // Physical-mode readings that contradict published claims, at representative
  // points; carried verbatim from the protocol reports.
  auto bell_phys = bell_generate(Cplx(0.5), Cplx(-0.5), Cplx(0.5), Cplx(0.5), 0.6,
                                 0.5, NormalizationMode::Physical);
  for (const auto& d : bell_phys.discrepancies) report.ledger.push_back(d);
  auto w_phys =
      w_generate(M_PI / 5, 0.8, 0.6, 0.4, NormalizationMode::Physical, false);
  for (const auto& d : w_phys.discrepancies) report.ledger.push_back(d);

  return report;
}

std::string format_verification(const VerificationReport& report) {
  std::ostringstream out;
  int passed = 0;
  for (const auto& c : report.criteria) {
    char line[400];
    std::snprintf(line, sizeof(line), "[%s] %02d %s (max err %.3g, tol %.3g)\n",
                  c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), c.max_err,
                  c.tol);
    out << line;
    if (!c.detail.empty()) out << "         " << c.detail << "\n";
    if (c.passed) ++passed;
  }
  if (!report.ledger.empty()) {
    out << "discrepancies (claims not reproduced as stated):\n";
    for (const auto& d : report.ledger) {
      out << "  - " << d.claim << "\n    " << d.detail;
      if (d.observed.has_value()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " [observed %.17g]", *d.observed);
        out << buf;
      }
      out << "\n";
    }
  }
  out << "result: " << (passed == static_cast<int>(report.criteria.size()) ? "PASS"
                                                                           : "FAIL")
      << " (" << passed << "/" << report.criteria.size() << ")\n";
  return out.str();
}

std::string verification_to_json(const VerificationReport& report,
                                 std::uint64_t seed) {
  JsonWriter w;
  w.begin_object();
  w.key("command").value("verify");
  w.key("parameters").begin_object();
  w.key("seed").value(static_cast<double>(seed));
  write_conventions(w);
  w.end_object();
  w.key("criteria").begin_array();
  for (const auto& c : report.criteria) {
    w.begin_object();
    w.key("id").value(static_cast<double>(c.id));
    w.key("name").value(c.name);
    w.key("passed").value(c.passed);
    w.key("max_err").value(c.max_err);
    w.key("tol").value(c.tol);
    w.key("detail").value(c.detail);
    w.end_object();
  }
  w.end_array();
  w.key("discrepancies").begin_array();
  for (const auto& d : report.ledger) {
    w.begin_object();
    w.key("claim").value(d.claim);
    w.key("detail").value(d.detail);
    w.key("observed");
    if (d.observed.has_value())
      w.value(*d.observed);
    else
      w.value_null();
    w.end_object();
  }
  w.end_array();
  w.key("passed").value(report.all_passed());
  w.end_object();
  return w.str() + "\n";
}

}  // namespace qsim::app
