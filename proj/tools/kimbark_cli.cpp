// Command-line front end: simulate, assess, cct, export-kimbark.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kimbark/kimbark.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kHardErrorExit = 10;

struct CommonArgs {
  std::string case_ref;
  int fault_bus = 0;
  double tcl = 0.0;
  double tend = -1.0;  // negative: default to tcl + horizon
  double step = 1e-3;
  double horizon = 1.5;
  std::string out_dir = "out";
  std::string config;  // consumed before parsing; declared so help shows it
  kimbark::IdentificationParams id_params{};
  kimbark::DetectionParams det_params{};
};

// A bare case name resolves through KIMBARK_CASE_DIR so bundled cases can be
// addressed as e.g. "ts1" from anywhere.
fs::path resolve_case_path(const std::string& ref) {
  if (fs::exists(ref)) return ref;
  if (const char* dir = std::getenv("KIMBARK_CASE_DIR")) {
    const fs::path base(dir);
    if (fs::exists(base / ref)) return base / ref;
    if (fs::exists(base / (ref + ".json"))) return base / (ref + ".json");
    throw kimbark::UsageError("case not found: \"" + ref +
                              "\" (tried the literal path, $KIMBARK_CASE_DIR/" + ref +
                              ", $KIMBARK_CASE_DIR/" + ref + ".json)");
  }
  throw kimbark::UsageError("case not found: \"" + ref +
                            "\" (no such file; KIMBARK_CASE_DIR is not set)");
}

std::string json_scalar_to_token(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  throw kimbark::UsageError("config: unsupported value type for \"" + v.dump() + "\"");
}

// Turns a flat JSON object into CLI tokens and splices them in right after the
// subcommand. User-supplied flags come later on the line and win because every
// option takes its last occurrence.
void expand_config(std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw kimbark::UsageError("--config requires a file path");
      path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      break;
    }
  }
  if (!path) return;
  std::ifstream in(*path, std::ios::binary);
  if (!in) throw kimbark::UsageError("cannot open config file: " + *path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw kimbark::UsageError("config: invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw kimbark::UsageError("config: expected a JSON object");

  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) {
        if (!joined.empty()) joined += ',';
        joined += json_scalar_to_token(e);
      }
      tokens.push_back("--" + key);
      tokens.push_back(joined);
      continue;
    }
    tokens.push_back("--" + key);
    tokens.push_back(json_scalar_to_token(value));
  }
  if (args.empty()) throw kimbark::UsageError("config: no subcommand given");
  args.insert(args.begin() + 1, tokens.begin(), tokens.end());
}

std::vector<int> parse_id_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw kimbark::UsageError("invalid machine id \"" + item + "\" in list \"" + csv + "\"");
    }
  }
  return out;
}

void add_common_options(CLI::App* cmd, CommonArgs& a, bool with_times = true) {
  const auto last = CLI::MultiOptionPolicy::TakeLast;
  cmd->add_option("--case", a.case_ref, "case file path or bundled case name")
      ->required()
      ->multi_option_policy(last);
  cmd->add_option("--fault-bus", a.fault_bus, "bus struck by the fault")
      ->required()
      ->multi_option_policy(last);
  if (with_times) {
    cmd->add_option("--tcl", a.tcl, "fault clearing time, s")
        ->required()
        ->multi_option_policy(last);
    cmd->add_option("--tend", a.tend, "end of the window, s (default: tcl + horizon)")
        ->multi_option_policy(last);
  }
  cmd->add_option("--step", a.step, "integration step, s")->multi_option_policy(last);
  cmd->add_option("--horizon", a.horizon, "assessment window beyond clearing, s")
      ->multi_option_policy(last);
  cmd->add_option("--out", a.out_dir, "output directory")->multi_option_policy(last);
  cmd->add_option("--config", a.config, "JSON file of option defaults (flags given here win)")
      ->multi_option_policy(last);
  cmd->add_option("--id-window", a.id_params.window,
                  "identification observation delay past clearing, s")
      ->multi_option_policy(last);
  cmd->add_option("--id-energy-frac", a.id_params.energy_fraction,
                  "identification kinetic-energy admission fraction")
      ->multi_option_policy(last);
  cmd->add_option("--id-floor", a.id_params.min_disturbance,
                  "identification minimum disturbance, rad")
      ->multi_option_policy(last);
  cmd->add_option("--eps-f", a.det_params.eps_f, "accelerating-power dead band, p.u.")
      ->multi_option_policy(last);
  cmd->add_option("--eps-omega", a.det_params.eps_omega, "speed dead band, rad/s")
      ->multi_option_policy(last);
}

double effective_tend(const CommonArgs& a) {
  if (a.tend >= 0.0) return a.tend;
  // Keep the default end on the grid even for unusual steps.
  const double raw = a.tcl + a.horizon;
  return static_cast<double>(std::lround(raw / a.step)) * a.step;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw kimbark::UsageError("cannot write output file: " + p.string());
  return os;
}

int run_simulate(const CommonArgs& a) {
  const kimbark::PowerSystemCase sys = kimbark::load_case_file(resolve_case_path(a.case_ref));
  const kimbark::StagedNetwork net = kimbark::build_staged_network(sys, a.fault_bus);
  const kimbark::Trajectory traj = kimbark::simulate(net, a.tcl, effective_tend(a), a.step);

  auto csv = open_output(a.out_dir, "trajectory.csv");
  kimbark::write_trajectory_csv(csv, traj);
  auto txt = open_output(a.out_dir, "summary.txt");
  kimbark::write_simulate_summary(txt, traj, net, a.case_ref);
  kimbark::write_simulate_summary(std::cout, traj, net, a.case_ref);
  std::cout << "wrote: " << (fs::path(a.out_dir) / "trajectory.csv").string() << " "
            << (fs::path(a.out_dir) / "summary.txt").string() << "\n";
  return 0;
}

int run_assess(const CommonArgs& a, const std::string& monitor_csv) {
  const kimbark::PowerSystemCase sys = kimbark::load_case_file(resolve_case_path(a.case_ref));
  const kimbark::StagedNetwork net = kimbark::build_staged_network(sys, a.fault_bus);
  kimbark::AssessmentOptions opt;
  opt.h = a.step;
  opt.identification = a.id_params;
  opt.detection = a.det_params;
  opt.monitored = parse_id_list(monitor_csv);
  const kimbark::CaseAssessment res =
      kimbark::run_assessment(net, a.tcl, effective_tend(a), opt);

  auto events_csv = open_output(a.out_dir, "events.csv");
  kimbark::write_events_csv(events_csv, res.events);
  auto report_csv = open_output(a.out_dir, "report.csv");
  kimbark::write_assessment_csv(report_csv, res.report);
  auto report_txt = open_output(a.out_dir, "report.txt");
  kimbark::write_assessment_text(report_txt, res, a.case_ref, a.fault_bus);
  std::vector<std::string> written = {"events.csv", "report.csv", "report.txt"};
  for (int bus : res.report.critical) {
    const std::string name = "kimbark_" + std::to_string(bus) + ".csv";
    auto os = open_output(a.out_dir, name);
    kimbark::write_kimbark_csv(os, kimbark::kimbark_curve(res.trajectory, bus));
    written.push_back(name);
  }

  kimbark::write_assessment_text(std::cout, res, a.case_ref, a.fault_bus);
  std::cout << "wrote:";
  for (const auto& name : written) std::cout << " " << (fs::path(a.out_dir) / name).string();
  std::cout << "\n";
  return kimbark::verdict_exit_code(res.report.system);
}

int run_cct(const CommonArgs& a, double t_lo, double t_hi, double tol) {
  const kimbark::PowerSystemCase sys = kimbark::load_case_file(resolve_case_path(a.case_ref));
  kimbark::CctParams prm;
  prm.h = a.step;
  prm.horizon = a.horizon;
  prm.tol = tol;
  prm.identification = a.id_params;
  prm.detection = a.det_params;
  const kimbark::CctResult res = kimbark::cct_bisect(sys, a.fault_bus, t_lo, t_hi, prm);

  auto txt = open_output(a.out_dir, "cct.txt");
  kimbark::write_cct_text(txt, res, a.case_ref, a.fault_bus);
  kimbark::write_cct_text(std::cout, res, a.case_ref, a.fault_bus);
  std::cout << "wrote: " << (fs::path(a.out_dir) / "cct.txt").string() << "\n";
  return 0;
}

int run_export(const CommonArgs& a, const std::string& machine_csv) {
  const kimbark::PowerSystemCase sys = kimbark::load_case_file(resolve_case_path(a.case_ref));
  const kimbark::StagedNetwork net = kimbark::build_staged_network(sys, a.fault_bus);
  const kimbark::Trajectory traj = kimbark::simulate(net, a.tcl, effective_tend(a), a.step);
  std::vector<int> machines = parse_id_list(machine_csv);
  if (machines.empty()) machines = traj.machine_buses;

  std::cout << "wrote:";
  for (int bus : machines) {
    const std::string name = "kimbark_" + std::to_string(bus) + ".csv";
    auto os = open_output(a.out_dir, name);
    kimbark::write_kimbark_csv(os, kimbark::kimbark_curve(traj, bus));
    std::cout << " " << (fs::path(a.out_dir) / name).string();
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-swing transient stability assessment on per-machine equal-area curves"};
  app.require_subcommand(1);

  CommonArgs sim_args, assess_args, cct_args, export_args;
  std::string monitor_csv, machine_csv;
  double t_lo = 0.0, t_hi = 0.0, tol = 1e-3;

  auto* sim = app.add_subcommand("simulate", "integrate one fault and write the trajectory");
  add_common_options(sim, sim_args);

  auto* asc = app.add_subcommand("assess", "judge stability from per-machine swing milestones");
  add_common_options(asc, assess_args);
  asc->add_option("--monitor", monitor_csv,
                  "comma-separated machine buses to watch (default: the critical set)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* cct = app.add_subcommand("cct", "bisect the critical clearing time");
  add_common_options(cct, cct_args, /*with_times=*/false);
  cct->add_option("--t-lo", t_lo, "stable-side bracket endpoint, s")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cct->add_option("--t-hi", t_hi, "unstable-side bracket endpoint, s")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cct->add_option("--tol", tol, "bracket width target, s")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* exp = app.add_subcommand("export-kimbark", "write per-machine angle/power curves");
  add_common_options(exp, export_args);
  exp->add_option("--machine", machine_csv,
                  "comma-separated machine buses to export (default: all)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    expand_config(args);
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (sim->parsed()) return run_simulate(sim_args);
    if (asc->parsed()) return run_assess(assess_args, monitor_csv);
    if (cct->parsed()) return run_cct(cct_args, t_lo, t_hi, tol);
    if (exp->parsed()) return run_export(export_args, machine_csv);
    return kHardErrorExit;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kHardErrorExit;
  } catch (const kimbark::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHardErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHardErrorExit;
  }
}
