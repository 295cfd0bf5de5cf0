#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "kimbark/assessment.hpp"
#include "kimbark/dynamics.hpp"
#include "kimbark/equal_area.hpp"

namespace kimbark {

// All numeric output funnels through one formatter so reruns of the same
// computation produce byte-identical files.
[[nodiscard]] inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,stage,machine,delta,omega,theta,omega_rel,pe,f\n";
  for (const auto& s : traj.samples) {
    for (std::size_t i = 0; i < traj.machine_buses.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      os << format_g9(s.t) << ',' << stage_label(s.stage) << ',' << traj.machine_buses[i] << ','
         << format_g9(s.delta[k]) << ',' << format_g9(s.omega[k]) << ','
         << format_g9(s.theta[k]) << ',' << format_g9(s.omega_rel[k]) << ','
         << format_g9(s.pe[k]) << ',' << format_g9(s.f[k]) << '\n';
    }
  }
}

inline void write_kimbark_csv(std::ostream& os, const KimbarkCurve& c) {
  os << "t,theta,f,omega_rel,stage\n";
  for (const auto& p : c.points)
    os << format_g9(p.t) << ',' << format_g9(p.theta) << ',' << format_g9(p.f) << ','
       << format_g9(p.omega_rel) << ',' << stage_label(p.stage) << '\n';
}

inline void write_events_csv(std::ostream& os, const std::vector<SwingEvent>& events) {
  os << "machine,kind,time,theta,residual_ke,a_acc,a_dec\n";
  for (const auto& e : events)
    os << e.machine_bus << ',' << event_kind_label(e.kind) << ',' << format_g9(e.time) << ','
       << format_g9(e.theta) << ',' << format_g9(e.residual_ke) << ',' << format_g9(e.a_acc)
       << ',' << format_g9(e.a_dec) << '\n';
}

inline void write_assessment_csv(std::ostream& os, const AssessmentReport& rep) {
  os << "event_order,time,machine,kind,verdict_so_far\n";
  int order = 1;
  for (const auto& e : rep.timeline)
    os << order++ << ',' << format_g9(e.event.time) << ',' << e.event.machine_bus << ','
       << event_kind_label(e.event.kind) << ',' << verdict_label(e.verdict_so_far) << '\n';
}

namespace detail {

inline void write_id_list(std::ostream& os, const std::vector<int>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? " " : "") << ids[i];
  if (ids.empty()) os << "(none)";
}

}  // namespace detail

inline void write_simulate_summary(std::ostream& os, const Trajectory& traj,
                                   const StagedNetwork& net, const std::string& case_label) {
  os << "case: " << case_label << '\n'
     << "fault bus: " << net.fault_bus << '\n'
     << "machines: " << traj.machine_buses.size() << '\n'
     << "t_cl: " << format_g9(traj.t_cl) << '\n'
     << "t_end: " << format_g9(traj.t_end) << '\n'
     << "h: " << format_g9(traj.h) << '\n'
     << "samples: " << traj.samples.size() << '\n'
     << "equilibrium residual: " << format_g9(net.equilibrium_residual) << '\n';
  const auto& last = traj.samples.back();
  Eigen::Index worst = 0;
  last.theta.cwiseAbs().maxCoeff(&worst);
  os << "final delta_coi: " << format_g9(last.coi.delta_coi) << '\n'
     << "final omega_coi: " << format_g9(last.coi.omega_coi) << '\n'
     << "max |theta| at t_end: " << format_g9(last.theta.cwiseAbs().maxCoeff()) << " (machine "
     << traj.machine_buses[static_cast<std::size_t>(worst)] << ")\n"
     << "max |theta| overall: " << format_g9(max_angle_excursion(traj)) << '\n';
}

inline void write_assessment_text(std::ostream& os, const CaseAssessment& a,
                                  const std::string& case_label, int fault_bus) {
  const auto& rep = a.report;
  os << "case: " << case_label << '\n'
     << "fault bus: " << fault_bus << '\n'
     << "t_cl: " << format_g9(a.trajectory.t_cl) << '\n'
     << "t_end: " << format_g9(a.trajectory.t_end) << '\n'
     << "h: " << format_g9(a.trajectory.h) << '\n';
  if (a.horizon_extended) os << "horizon extended once (initial window was undecided)\n";
  os << "critical machines: ";
  detail::write_id_list(os, rep.critical);
  os << '\n';
  if (!a.critical.disturbed) os << "disturbance below threshold: no machine left rest\n";
  os << "monitored machines: ";
  detail::write_id_list(os, rep.monitored);
  os << '\n';

  os << "events:\n";
  if (rep.timeline.empty()) os << "  (none inside the horizon)\n";
  for (const auto& e : rep.timeline)
    os << "  " << event_kind_label(e.event.kind) << " machine " << e.event.machine_bus
       << " at t=" << format_g9(e.event.time) << "  theta=" << format_g9(e.event.theta)
       << "  residual_ke=" << format_g9(e.event.residual_ke)
       << "  verdict so far: " << verdict_label(e.verdict_so_far) << '\n';
  for (int m : rep.missing) os << "  machine " << m << ": no event inside the horizon\n";

  os << "system verdict: " << verdict_label(rep.system);
  if (rep.verdict_time) os << " at t=" << format_g9(*rep.verdict_time);
  os << '\n';
  if (rep.leading_losp) {
    os << "leading liberated machine: " << rep.leading_losp->machine_bus
       << " at t=" << format_g9(rep.leading_losp->time)
       << (rep.leading_losp_definitive ? "" : " (not definitive: subset monitoring)") << '\n';
    for (const auto& e : rep.lagging_losps)
      os << "lagging liberated machine: " << e.machine_bus << " at t=" << format_g9(e.time)
         << '\n';
  }
}

inline void write_cct_text(std::ostream& os, const CctResult& res, const std::string& case_label,
                           int fault_bus) {
  os << "case: " << case_label << '\n' << "fault bus: " << fault_bus << '\n';
  if (res.tol_clamped)
    os << "warning: tolerance below the integration step, clamped to "
       << format_g9(res.tol_effective) << '\n';
  os << "evaluations:\n";
  for (const auto& e : res.evaluations)
    os << "  t_cl=" << format_g9(e.t_cl) << "  verdict=" << verdict_label(e.verdict)
       << (e.horizon_extended ? " (horizon extended)" : "") << '\n';
  os << "critical clearing time bracket: [" << format_g9(res.t_stable) << ", "
     << format_g9(res.t_unstable) << "]\n";
}

}  // namespace kimbark
