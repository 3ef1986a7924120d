// Branch bookkeeping for measurement trajectories and protocol reports.

#pragma once

#include "qsim/entanglement.hpp"
#include "qsim/state.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsim {

// One branch of a measurement tree. `path` holds the ordered outcome labels
// (drawn from M1, M2, jump, no-jump, post-pass, post-fail); `joint_prob` is
// the product of conditional probabilities along the path; `cond_prob` is the
// probability of the final step given its prefix. Impossible branches keep
// joint_prob 0 and carry no state.
template <typename T>
struct TrajectoryBranch {
  std::vector<std::string> path;
  T joint_prob = T(0);
  T cond_prob = T(0);
  std::optional<StateVector<T>> state;
};

// Chain a child step after a parent branch: concatenated path, multiplied
// joint probability. A dead parent stays dead.
template <typename T>
TrajectoryBranch<T> chain(const TrajectoryBranch<T>& parent,
                          const TrajectoryBranch<T>& step) {
  TrajectoryBranch<T> out;
  out.path = parent.path;
  out.path.insert(out.path.end(), step.path.begin(), step.path.end());
  out.cond_prob = step.cond_prob;
  out.joint_prob = parent.joint_prob * step.cond_prob;
  if (parent.state.has_value() && step.state.has_value() && out.joint_prob > T(0))
    out.state = step.state;
  return out;
}

template <typename T>
bool path_less(const TrajectoryBranch<T>& a, const TrajectoryBranch<T>& b) {
  return a.path < b.path;
}

// Renormalization policy for the protocol pipelines. `paper` reproduces the
// published per-sector divisors (not a linear quantum operation); `physical`
// applies one global renormalization after each measurement element.
enum class NormalizationMode { Paper, Physical };

inline std::string to_string(NormalizationMode m) {
  return m == NormalizationMode::Paper ? "paper" : "physical";
}

// A published claim the computed numbers fail to reproduce, kept verbatim in
// every report instead of being reconciled silently.
struct Discrepancy {
  std::string claim;
  std::string detail;
  std::optional<double> observed;
};

enum class OutcomeClass { Qubit, Bit };

inline std::string to_string(OutcomeClass c) {
  return c == OutcomeClass::Qubit ? "QUBIT" : "BIT";
}

// One Bell-outcome combination in the teleportation enumeration.
template <typename T>
struct TeleportOutcome {
  BellLabel first;
  BellLabel second;
  T joint_prob = T(0);
  OutcomeClass classification = OutcomeClass::Qubit;
  bool matches_pattern = false;
  std::optional<T> corrected_fidelity;      // to the claimed target, when matched
  std::optional<StateVector<T>> state;      // receiver residual (corrected when matched)
};

// Common result shape for every protocol driver.
template <typename T>
struct ProtocolReport {
  std::vector<TrajectoryBranch<T>> branches;           // canonical path order
  std::optional<StateVector<T>> intermediate;          // pre-recombination state
  std::optional<StateVector<T>> final_state;
  std::optional<T> target_fidelity;
  std::map<std::string, T> metrics;                    // probabilities and fidelities
  std::optional<EntanglementReport<T>> entanglement;
  NormalizationMode mode = NormalizationMode::Paper;
  std::map<std::string, T> parameters;
  std::map<std::string, std::string> labels;
  std::vector<Discrepancy> discrepancies;
  bool degenerate = false;
  std::vector<TeleportOutcome<T>> outcomes;            // teleportation only
};

}  // namespace qsim
