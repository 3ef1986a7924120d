#include "sweep.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace qsim::app {

namespace {

constexpr double kMaxGridPoints = 1e6;

GridAxis parse_axis(const std::string& segment) {
  const auto eq = segment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("grid axis needs name=start:stop:step, got '" +
                                segment + "'");
  GridAxis axis;
  axis.name = segment.substr(0, eq);
  const std::string spec = segment.substr(eq + 1);

  const auto c1 = spec.find(':');
  const auto c2 = (c1 == std::string::npos) ? std::string::npos : spec.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("grid axis '" + axis.name +
                                "' needs start:stop:step");
  try {
    size_t used = 0;
    axis.start = std::stod(spec.substr(0, c1), &used);
    axis.stop = std::stod(spec.substr(c1 + 1, c2 - c1 - 1), &used);
    axis.step = std::stod(spec.substr(c2 + 1), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("grid axis '" + axis.name +
                                "' has a non-numeric bound");
  }
  if (!(axis.step > 0))
    throw std::invalid_argument("grid axis '" + axis.name + "' needs step > 0");
  const double span = (axis.stop - axis.start) / axis.step;
  const long long count = static_cast<long long>(std::floor(span + 1e-9)) + 1;
  if (count < 1)
    throw std::invalid_argument("grid axis '" + axis.name + "' is empty");
  axis.values.reserve(static_cast<size_t>(count));
  for (long long i = 0; i < count; ++i) {
    double v = axis.start + static_cast<double>(i) * axis.step;
    if (std::abs(v - axis.stop) < axis.step * 1e-9) v = axis.stop;
    axis.values.push_back(v);
  }
  return axis;
}

// gamma_tau and r describe the same channel; rows always report both.
struct ChannelStrength {
  double gamma_tau;
  double r;
};

ChannelStrength strength_from(const std::map<std::string, double>& params) {
  if (params.count("r")) {
    const double r = params.at("r");
    if (r < 0 || r > 1) throw std::domain_error("r outside [0, 1]");
    return {-std::log1p(-r), r};
  }
  const double gt = params.count("gamma_tau") ? params.at("gamma_tau") : 0.5;
  if (gt < 0) throw std::domain_error("gamma_tau negative");
  return {gt, -std::expm1(-gt)};
}

void check_axis_names(const std::vector<GridAxis>& axes,
                      const std::set<std::string>& allowed) {
  bool has_gt = false, has_r = false;
  for (const auto& axis : axes) {
    if (!allowed.count(axis.name))
      throw std::invalid_argument("unsupported sweep axis '" + axis.name + "'");
    has_gt |= axis.name == "gamma_tau";
    has_r |= axis.name == "r";
  }
  if (has_gt && has_r)
    throw std::invalid_argument("sweep over both gamma_tau and r is ambiguous");
}

}  // namespace

std::vector<GridAxis> parse_grid(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("empty grid spec");
  std::vector<GridAxis> axes;
  std::set<std::string> seen;
  size_t pos = 0;
  while (pos <= spec.size()) {
    auto next = spec.find(',', pos);
    if (next == std::string::npos) next = spec.size();
    axes.push_back(parse_axis(spec.substr(pos, next - pos)));
    if (!seen.insert(axes.back().name).second)
      throw std::invalid_argument("duplicate grid axis '" + axes.back().name + "'");
    pos = next + 1;
    if (next == spec.size()) break;
  }
  double total = 1;
  for (const auto& axis : axes) total *= static_cast<double>(axis.values.size());
  if (total > kMaxGridPoints) throw std::invalid_argument("grid exceeds 1e6 points");
  return axes;
}

namespace {

PairingChoice pairing_from_string(const std::string& s) {
  for (const PairingChoice& pc :
       {PairingChoice{{{{0, 2}, {1, 3}}}}, PairingChoice{{{{0, 3}, {1, 2}}}},
        PairingChoice{{{{0, 1}, {2, 3}}}}})
    if (to_string(pc) == s) return pc;
  throw std::invalid_argument("unknown pairing '" + s + "'");
}

using Row = std::vector<Cell>;

// Degenerate runs (e.g. r = 1, where the success leaf is dead) omit some
// metrics; those cells stay empty rather than failing the row.
Cell metric_cell(const ProtocolReport<double>& rep, const std::string& name) {
  const auto it = rep.metrics.find(name);
  return it == rep.metrics.end() ? Cell{} : Cell{it->second};
}

Row protect_row(const SweepConfig& cfg, const std::map<std::string, double>& params) {
  const double p = params.count("p") ? params.at("p") : 0.5;
  const auto ch = strength_from(params);
  const double inv = 1.0 / std::sqrt(2.0);
  Row row{Cell{p}, Cell{ch.gamma_tau}, Cell{ch.r}, Cell{}, Cell{}, Cell{}, Cell{},
          Cell{std::string("OK")}};
  try {
    auto rep = protect_unknown_qubit(std::complex<double>(inv),
                                     std::complex<double>(inv), p, ch.gamma_tau,
                                     cfg.p1_override);
    row[3] = rep.parameters.at("p1");
    row[4] = metric_cell(rep, "success_path_prob");
    row[5] = metric_cell(rep, "recovered_fidelity_m1");
    row[6] = metric_cell(rep, "recovered_fidelity_m2");
  } catch (const std::domain_error&) {
    row.back() = std::string("UNDEFINED");
  } catch (const std::invalid_argument&) {
    row.back() = std::string("UNDEFINED");
  }
  return row;
}

Row bell_row(const SweepConfig& cfg, const std::map<std::string, double>& params) {
  const double p = params.count("p") ? params.at("p") : 0.5;
  const auto ch = strength_from(params);
  std::vector<double> amps = cfg.bell_amps;
  if (amps.empty()) amps = {0.5, -0.5, 0.5, 0.5};
  Row row{Cell{p}, Cell{ch.gamma_tau}, Cell{ch.r}, Cell{}, Cell{}, Cell{}, Cell{},
          Cell{}, Cell{std::string("OK")}};
  try {
    auto rep = bell_generate(std::complex<double>(amps[0]), std::complex<double>(amps[1]),
                             std::complex<double>(amps[2]), std::complex<double>(amps[3]),
                             p, ch.gamma_tau, cfg.mode, cfg.p1_override);
    row[3] = rep.parameters.at("p1");
    row[4] = metric_cell(rep, "m1_outcome_prob");
    row[5] = metric_cell(rep, "success_joint_prob");
    row[6] = metric_cell(rep, "bell_fidelity");
    row[7] = metric_cell(rep, "jump_concurrence");
  } catch (const std::domain_error&) {
    row.back() = std::string("UNDEFINED");
  } catch (const std::invalid_argument&) {
    row.back() = std::string("UNDEFINED");
  }
  return row;
}

Row wstate_row(const SweepConfig& cfg, const std::map<std::string, double>& params) {
  const double angle =
      params.count("clone_angle") ? params.at("clone_angle") : M_PI / 4.0;
  const double u = params.count("u") ? params.at("u") : 1.0 / std::sqrt(2.0);
  const double p = params.count("p") ? params.at("p") : 0.5;
  const auto ch = strength_from(params);
  Row row{Cell{angle}, Cell{u}, Cell{p}, Cell{ch.gamma_tau}, Cell{ch.r}, Cell{},
          Cell{}, Cell{}, Cell{std::string("OK")}};
  try {
    auto rep = w_generate(angle, u, p, ch.gamma_tau, cfg.mode, cfg.flip,
                          cfg.p1_override);
    row[5] = rep.parameters.at("p1");
    row[6] = metric_cell(rep, "w_fidelity");
    row[7] = metric_cell(rep, "intermediate_three_tangle");
  } catch (const std::domain_error&) {
    row.back() = std::string("UNDEFINED");
  } catch (const std::invalid_argument&) {
    row.back() = std::string("UNDEFINED");
  }
  return row;
}

Row teleport_row(const SweepConfig& cfg, const std::map<std::string, double>& params) {
  const double x = params.count("x") ? params.at("x") : 0.6;
  const double s = params.count("s") ? params.at("s") : 0.3;
  Row row{Cell{to_string(*cfg.case_id)}, Cell{x}, Cell{s}, Cell{}, Cell{},
          Cell{}, Cell{}, Cell{}, Cell{std::string("OK")}};
  try {
    PairingChoice pairing = kDefaultPairing;
    std::string pairing_name = cfg.pairing;
    if (cfg.pairing == "search") {
      auto search = search_pairings(*cfg.case_id, x, s);
      pairing = search.rows[search.best_index].pairing;
      pairing_name = to_string(pairing);
    } else {
      pairing = pairing_from_string(cfg.pairing);
    }
    auto rep = teleport_case(*cfg.case_id, x, s, pairing);
    row[3] = metric_cell(rep, "sin_alpha");
    row[4] = metric_cell(rep, "cos_alpha");
    row[5] = pairing_name;
    row[6] = metric_cell(rep, "best_fidelity");
    row[7] = metric_cell(rep, "prob_sum");
  } catch (const std::domain_error&) {
    row.back() = std::string("UNDEFINED");
  }
  return row;
}

}  // namespace

SweepTable run_sweep(const SweepConfig& config) {
  SweepTable table;
  std::set<std::string> allowed;
  if (config.protocol == "protect" || config.protocol == "bell") {
    allowed = {"p", "gamma_tau", "r"};
    table.columns = (config.protocol == "protect")
                        ? std::vector<std::string>{"p", "gamma_tau", "r", "p1",
                                                   "success_path_prob",
                                                   "recovered_fidelity_m1",
                                                   "recovered_fidelity_m2", "status"}
                        : std::vector<std::string>{"p", "gamma_tau", "r", "p1",
                                                   "m1_outcome_prob",
                                                   "success_joint_prob",
                                                   "bell_fidelity",
                                                   "jump_concurrence", "status"};
  } else if (config.protocol == "wstate") {
    allowed = {"clone_angle", "u", "p", "gamma_tau", "r"};
    table.columns = {"clone_angle", "u",  "p",
                     "gamma_tau",   "r",  "p1",
                     "w_fidelity",  "intermediate_three_tangle", "status"};
  } else if (config.protocol == "teleport") {
    if (!config.case_id.has_value())
      throw std::invalid_argument("teleport sweep needs --case");
    allowed = {"x", "s"};
    table.columns = {"case",    "x",       "s",        "sin_alpha", "cos_alpha",
                     "pairing", "best_fidelity", "prob_sum", "status"};
  } else {
    throw std::invalid_argument("unknown sweep protocol '" + config.protocol + "'");
  }
  check_axis_names(config.axes, allowed);
  if (config.protocol != "teleport" && config.pairing != "search")
    throw std::invalid_argument("--pairing applies to teleport sweeps only");

  // Row-major over declared axes: the last axis varies fastest.
  size_t total = 1;
  for (const auto& axis : config.axes) total *= axis.values.size();
  std::vector<size_t> idx(config.axes.size(), 0);
  for (size_t row_i = 0; row_i < total; ++row_i) {
    std::map<std::string, double> params = config.fixed;
    for (size_t a = 0; a < config.axes.size(); ++a)
      params[config.axes[a].name] = config.axes[a].values[idx[a]];

    if (config.protocol == "protect")
      table.rows.push_back(protect_row(config, params));
    else if (config.protocol == "bell")
      table.rows.push_back(bell_row(config, params));
    else if (config.protocol == "wstate")
      table.rows.push_back(wstate_row(config, params));
    else
      table.rows.push_back(teleport_row(config, params));

    for (size_t a = config.axes.size(); a-- > 0;) {
      if (++idx[a] < config.axes[a].values.size()) break;
      idx[a] = 0;
    }
  }
  return table;
}

}  // namespace qsim::app
