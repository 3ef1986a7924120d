#include "cli.hpp"

#include "report_json.hpp"
#include "sweep.hpp"
#include "verify.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace qsim::app {

namespace {

using Cplx = std::complex<double>;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("QSIM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return 12345;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file '" + out_path + "'");
  out << text;
}

NormalizationMode parse_mode(const std::string& mode) {
  if (mode == "paper") return NormalizationMode::Paper;
  if (mode == "physical") return NormalizationMode::Physical;
  throw std::invalid_argument("--mode must be paper or physical, got '" + mode + "'");
}

std::optional<double> parse_p1(const std::string& p1) {
  if (p1 == "auto") return std::nullopt;
  try {
    size_t used = 0;
    const double v = std::stod(p1, &used);
    if (used != p1.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("--p1 must be a number or 'auto', got '" + p1 + "'");
  }
}

std::vector<double> parse_amps(const std::string& spec, size_t expected) {
  std::vector<double> vals;
  size_t pos = 0;
  while (pos <= spec.size()) {
    auto next = spec.find(',', pos);
    if (next == std::string::npos) next = spec.size();
    try {
      size_t used = 0;
      const std::string tok = spec.substr(pos, next - pos);
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("--amps needs comma-separated numbers");
    }
    pos = next + 1;
    if (next == spec.size()) break;
  }
  if (vals.size() != expected)
    throw std::invalid_argument("--amps needs exactly " + std::to_string(expected) +
                                " comma-separated values");
  double norm_sq = 0;
  for (double v : vals) norm_sq += v * v;
  if (norm_sq < 1e-24) throw std::invalid_argument("--amps must not all be zero");
  for (double& v : vals) v /= std::sqrt(norm_sq);  // accept 0.7071-style inputs
  return vals;
}

// Per-subcommand channel strength flags; --gamma-tau and --r are exclusive.
struct ChannelFlags {
  double gamma_tau = 0.5;
  double r = 0.0;
  CLI::Option* gt_opt = nullptr;
  CLI::Option* r_opt = nullptr;

  void attach(CLI::App* sub) {
    gt_opt = sub->add_option("--gamma-tau", gamma_tau,
                             "decay exponent Gamma*tau (>= 0)");
    r_opt = sub->add_option("--r", r, "decay probability r in [0, 1]");
    gt_opt->excludes(r_opt);
    r_opt->excludes(gt_opt);
  }

  double resolve() const {
    if (r_opt->count() > 0) {
      if (r < 0 || r > 1) throw std::invalid_argument("--r outside [0, 1]");
      return -std::log1p(-r);
    }
    if (gamma_tau < 0) throw std::invalid_argument("--gamma-tau negative");
    return gamma_tau;
  }
};

PairingChoice pairing_from_name(const std::string& name) {
  for (const PairingChoice& pc :
       {PairingChoice{{{{0, 2}, {1, 3}}}}, PairingChoice{{{{0, 3}, {1, 2}}}},
        PairingChoice{{{{0, 1}, {2, 3}}}}})
    if (to_string(pc) == name) return pc;
  throw std::invalid_argument("--pairing must be 02-13, 03-12, 01-23, or search");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "Exact small-register simulator: weak-measurement-protected transmission, "
      "entangled-pair and W-type state generation, and teleportation of a "
      "non-orthogonal state pair."};
  app.require_subcommand(1);

  // protect
  auto* protect = app.add_subcommand(
      "protect", "transmit one qubit through the protected channel");
  double pr_alpha = 1.0, pr_beta = 0.0, pr_p = 0.5;
  std::string pr_p1 = "auto", pr_out, pr_format = "json";
  ChannelFlags pr_ch;
  protect->add_option("--alpha", pr_alpha, "|0> amplitude (normalized with --beta)")
      ->required();
  protect->add_option("--beta", pr_beta, "|1> amplitude (normalized with --alpha)")
      ->required();
  protect->add_option("--p", pr_p, "weak measurement strength in (0, 1]")->required();
  pr_ch.attach(protect);
  protect->add_option("--p1", pr_p1, "recovery strength, number or 'auto'");
  protect->add_option("--format", pr_format, "json");
  protect->add_option("--out", pr_out, "output path (default stdout)");

  // bell
  auto* bell = app.add_subcommand("bell",
                                  "generate an entangled pair from a protected qubit");
  std::string bl_amps = "0.5,-0.5,0.5,0.5", bl_p1 = "auto", bl_mode = "paper";
  std::string bl_out, bl_format = "json";
  double bl_p = 0.5;
  ChannelFlags bl_ch;
  bell->add_option("--amps", bl_amps, "a,b,c,d input amplitudes (normalized)");
  bell->add_option("--p", bl_p, "weak measurement strength in (0, 1]")->required();
  bl_ch.attach(bell);
  bell->add_option("--p1", bl_p1, "recovery strength, number or 'auto'");
  bell->add_option("--mode", bl_mode, "paper | physical");
  bell->add_option("--format", bl_format, "json");
  bell->add_option("--out", bl_out, "output path (default stdout)");

  // wstate
  auto* wstate = app.add_subcommand(
      "wstate", "generate a W-type state via economical cloning");
  double ws_angle = M_PI / 4.0, ws_u = 1.0 / std::sqrt(2.0), ws_p = 0.5;
  std::string ws_p1 = "auto", ws_mode = "paper", ws_out, ws_format = "json";
  bool ws_flip = false;
  ChannelFlags ws_ch;
  wstate->add_option("--clone-angle", ws_angle, "cloning angle in radians");
  wstate->add_option("--u", ws_u, "splitter coefficient u in (0, 1)");
  wstate->add_option("--p", ws_p, "weak measurement strength in (0, 1]")->required();
  ws_ch.attach(wstate);
  wstate->add_option("--p1", ws_p1, "recovery strength, number or 'auto'");
  wstate->add_option("--mode", ws_mode, "paper | physical");
  wstate->add_flag("--flip", ws_flip, "apply the bit flip on qubit 0 at the end");
  wstate->add_option("--format", ws_format, "json");
  wstate->add_option("--out", ws_out, "output path (default stdout)");

  // teleport
  auto* teleport = app.add_subcommand(
      "teleport", "run one case of the non-orthogonal pair teleportation table");
  std::string tp_case, tp_pairing = "search", tp_out, tp_format = "json";
  double tp_x = 0.0, tp_s = 0.0;
  teleport->add_option("--case", tp_case, "Ia, Ib, IIa, IIb, IIIa, IIIb, IVa, IVb")
      ->required();
  teleport->add_option("--x", tp_x, "first-state |0> amplitude in [0, 1]")
      ->required();
  teleport->add_option("--s", tp_s, "pair overlap in [0, 1]")->required();
  teleport->add_option("--pairing", tp_pairing, "02-13 | 03-12 | 01-23 | search");
  teleport->add_option("--format", tp_format, "json");
  teleport->add_option("--out", tp_out, "output path (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "evaluate a protocol over a grid");
  std::string sw_protocol, sw_grid, sw_case, sw_pairing = "search";
  std::string sw_amps, sw_p1 = "auto", sw_mode = "paper", sw_out, sw_format = "json";
  double sw_p = 0, sw_gt = 0, sw_r = 0, sw_u = 0, sw_angle = 0, sw_x = 0, sw_s = 0;
  bool sw_flip = false;
  sweep->add_option("--protocol", sw_protocol, "protect | bell | wstate | teleport")
      ->required();
  sweep->add_option("--grid", sw_grid, "name=start:stop:step[,name=...]")->required();
  auto* sw_p_opt = sweep->add_option("--p", sw_p, "fixed weak strength");
  auto* sw_gt_opt = sweep->add_option("--gamma-tau", sw_gt, "fixed decay exponent");
  auto* sw_r_opt = sweep->add_option("--r", sw_r, "fixed decay probability");
  sw_gt_opt->excludes(sw_r_opt);
  sw_r_opt->excludes(sw_gt_opt);
  auto* sw_u_opt = sweep->add_option("--u", sw_u, "fixed splitter coefficient");
  auto* sw_angle_opt = sweep->add_option("--clone-angle", sw_angle, "fixed angle");
  auto* sw_x_opt = sweep->add_option("--x", sw_x, "fixed first-state amplitude");
  auto* sw_s_opt = sweep->add_option("--s", sw_s, "fixed overlap");
  sweep->add_option("--amps", sw_amps, "fixed pair-generation amplitudes");
  sweep->add_option("--case", sw_case, "teleport case id");
  sweep->add_option("--pairing", sw_pairing, "teleport pairing or search");
  sweep->add_option("--p1", sw_p1, "recovery strength, number or 'auto'");
  sweep->add_option("--mode", sw_mode, "paper | physical");
  sweep->add_flag("--flip", sw_flip, "W-type generation bit-flip variant");
  sweep->add_option("--format", sw_format, "json | csv");
  sweep->add_option("--out", sw_out, "output path (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "run the full verification suite");
  std::uint64_t vf_seed = default_seed();
  std::string vf_out, vf_format = "text";
  verify->add_option("--seed", vf_seed, "ensemble seed (env QSIM_SEED, then 12345)");
  verify->add_option("--format", vf_format, "text | json");
  verify->add_option("--out", vf_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    auto check_json_only = [](const std::string& format) {
      if (format != "json")
        throw std::invalid_argument("--format " + format +
                                    " is only available for sweep (csv) and "
                                    "verify (text); this command emits json");
    };

    if (protect->parsed()) {
      check_json_only(pr_format);
      const double norm = std::hypot(pr_alpha, pr_beta);
      if (norm < 1e-12)
        throw std::invalid_argument("--alpha and --beta must not both be zero");
      auto rep = protect_unknown_qubit(Cplx(pr_alpha / norm), Cplx(pr_beta / norm),
                                       pr_p, pr_ch.resolve(), parse_p1(pr_p1));
      emit(report_to_json(rep, "protect"), pr_out);
      return 0;
    }

    if (bell->parsed()) {
      check_json_only(bl_format);
      const auto amps = parse_amps(bl_amps, 4);
      auto rep = bell_generate(Cplx(amps[0]), Cplx(amps[1]), Cplx(amps[2]),
                               Cplx(amps[3]), bl_p, bl_ch.resolve(),
                               parse_mode(bl_mode), parse_p1(bl_p1));
      emit(report_to_json(rep, "bell"), bl_out);
      return 0;
    }

    if (wstate->parsed()) {
      check_json_only(ws_format);
      auto rep = w_generate(ws_angle, ws_u, ws_p, ws_ch.resolve(),
                            parse_mode(ws_mode), ws_flip, parse_p1(ws_p1));
      emit(report_to_json(rep, "wstate"), ws_out);
      return 0;
    }

    if (teleport->parsed()) {
      check_json_only(tp_format);
      const auto id = parse_teleport_case(tp_case);
      if (!id.has_value())
        throw std::invalid_argument("--case must be one of Ia..IVb, got '" +
                                    tp_case + "'");
      if (tp_pairing == "search") {
        auto search = search_pairings(*id, tp_x, tp_s);
        auto rep =
            teleport_case(*id, tp_x, tp_s, search.rows[search.best_index].pairing);
        emit(report_to_json(rep, "teleport", &search), tp_out);
      } else {
        auto rep = teleport_case(*id, tp_x, tp_s, pairing_from_name(tp_pairing));
        emit(report_to_json(rep, "teleport"), tp_out);
      }
      return 0;
    }

    if (sweep->parsed()) {
      if (sw_format != "json" && sw_format != "csv")
        throw std::invalid_argument("--format must be json or csv for sweep");
      SweepConfig config;
      config.protocol = sw_protocol;
      config.axes = parse_grid(sw_grid);
      config.mode = parse_mode(sw_mode);
      config.p1_override = parse_p1(sw_p1);
      config.pairing = sw_pairing;
      config.flip = sw_flip;
      if (sw_p_opt->count()) config.fixed["p"] = sw_p;
      if (sw_gt_opt->count()) config.fixed["gamma_tau"] = sw_gt;
      if (sw_r_opt->count()) config.fixed["r"] = sw_r;
      if (sw_u_opt->count()) config.fixed["u"] = sw_u;
      if (sw_angle_opt->count()) config.fixed["clone_angle"] = sw_angle;
      if (sw_x_opt->count()) config.fixed["x"] = sw_x;
      if (sw_s_opt->count()) config.fixed["s"] = sw_s;
      if (!sw_amps.empty()) config.bell_amps = parse_amps(sw_amps, 4);
      if (!sw_case.empty()) {
        config.case_id = parse_teleport_case(sw_case);
        if (!config.case_id.has_value())
          throw std::invalid_argument("--case must be one of Ia..IVb, got '" +
                                      sw_case + "'");
      }
      if (config.pairing != "search") pairing_from_name(config.pairing);
      auto table = run_sweep(config);
      std::map<std::string, std::string> params{{"grid", sw_grid},
                                                {"mode", sw_mode},
                                                {"p1", sw_p1}};
      if (config.case_id.has_value()) params["case"] = to_string(*config.case_id);
      if (config.protocol == "teleport") params["pairing"] = sw_pairing;
      emit(sw_format == "csv" ? sweep_to_csv(table)
                              : sweep_to_json(table, sw_protocol, params),
           sw_out);
      return 0;
    }

    if (verify->parsed()) {
      if (vf_format != "text" && vf_format != "json")
        throw std::invalid_argument("--format must be text or json for verify");
      auto report = run_verification(vf_seed);
      emit(vf_format == "json" ? verification_to_json(report, vf_seed)
                               : format_verification(report),
           vf_out);
      return report.all_passed() ? 0 : 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace qsim::app
