// Parameter sweeps: parse grid specs of the form
//   name=start:stop:step[,name=start:stop:step...]
// and evaluate one protocol per grid point in row-major declared order.
// Points where the protocol is undefined (infeasible recovery strength,
// undefined case angle) become rows with status UNDEFINED instead of errors.

#pragma once

#include "report_json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsim::app {

struct GridAxis {
  std::string name;
  double start = 0, stop = 0, step = 0;
  std::vector<double> values;
};

// Throws std::invalid_argument on malformed syntax, empty axes, duplicate
// names, or a grid larger than 1e6 points.
std::vector<GridAxis> parse_grid(const std::string& spec);

struct SweepConfig {
  std::string protocol;  // protect | bell | wstate | teleport
  std::vector<GridAxis> axes;
  NormalizationMode mode = NormalizationMode::Paper;
  std::map<std::string, double> fixed;     // non-swept parameter overrides
  std::optional<double> p1_override;       // engine picks optimal when absent
  std::optional<TeleportCaseId> case_id;   // teleport only
  std::string pairing = "search";          // teleport only
  std::vector<double> bell_amps;           // bell only; empty -> published family
  bool flip = false;                       // wstate only
};

SweepTable run_sweep(const SweepConfig& config);

}  // namespace qsim::app
