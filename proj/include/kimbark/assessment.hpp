#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kimbark/dynamics.hpp"
#include "kimbark/equal_area.hpp"
#include "kimbark/errors.hpp"
#include "kimbark/network.hpp"

namespace kimbark {

enum class Verdict { Stable, Unstable, CriticalStable, Undecided };

[[nodiscard]] constexpr const char* verdict_label(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::CriticalStable: return "critical-stable";
    default: return "undecided";
  }
}

[[nodiscard]] constexpr int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::Stable: return 0;
    case Verdict::Unstable: return 1;
    case Verdict::CriticalStable: return 3;
    default: return 2;
  }
}

struct TimelineEntry {
  SwingEvent event;
  Verdict verdict_so_far = Verdict::Undecided;
};

struct AssessmentReport {
  std::vector<int> critical;   // severity order from identification
  std::vector<int> monitored;  // equals critical unless a subset was requested
  Verdict system = Verdict::Undecided;
  std::optional<double> verdict_time;
  std::vector<TimelineEntry> timeline;  // monitored machines' events in time order
  std::optional<SwingEvent> leading_losp;
  std::vector<SwingEvent> lagging_losps;
  // True when the earliest monitored liberation is provably the system's
  // earliest; monitoring only a lagging machine cannot establish that.
  bool leading_losp_definitive = false;
  std::vector<int> missing;  // monitored machines with no event inside the horizon
};

// System verdict over a monitored subset of the critical machines. The system
// is unstable as soon as any monitored machine liberates; it is stable only
// when every critical machine is seen to reach stationarity, so a strict
// subset with no liberation stays undecided.
[[nodiscard]] inline AssessmentReport assess_subset(const std::map<int, SwingEvent>& events,
                                                    const std::vector<int>& critical,
                                                    const std::vector<int>& monitored) {
  for (int m : monitored)
    if (std::find(critical.begin(), critical.end(), m) == critical.end())
      throw UsageError("monitored machine " + std::to_string(m) +
                       " is not in the critical set");
  if (monitored.empty() && !critical.empty())
    throw UsageError("monitored set must not be empty");

  AssessmentReport rep;
  rep.critical = critical;
  rep.monitored = monitored;

  if (critical.empty()) {
    // No machine was disturbed enough to watch: nothing can liberate.
    rep.system = Verdict::Stable;
    return rep;
  }

  for (int m : monitored) {
    const auto it = events.find(m);
    if (it == events.end())
      rep.missing.push_back(m);
    else
      rep.timeline.push_back({it->second, Verdict::Undecided});
  }
  std::sort(rep.timeline.begin(), rep.timeline.end(),
            [](const TimelineEntry& a, const TimelineEntry& b) {
              if (a.event.time != b.event.time) return a.event.time < b.event.time;
              return a.event.machine_bus < b.event.machine_bus;
            });

  bool any_dlp = false, any_cdsp = false;
  for (const auto& e : rep.timeline) {
    if (e.event.kind == EventKind::Dlp) any_dlp = true;
    if (e.event.kind == EventKind::Cdsp) any_cdsp = true;
  }

  const bool covers_critical = monitored.size() == critical.size();
  if (any_dlp) {
    rep.system = Verdict::Unstable;
  } else if (!rep.missing.empty() || !covers_critical) {
    rep.system = Verdict::Undecided;
  } else {
    rep.system = any_cdsp ? Verdict::CriticalStable : Verdict::Stable;
  }

  // Running verdict after each event, for the event-by-event report.
  std::size_t seen = 0;
  bool dlp_so_far = false, cdsp_so_far = false;
  for (auto& e : rep.timeline) {
    ++seen;
    if (e.event.kind == EventKind::Dlp) dlp_so_far = true;
    if (e.event.kind == EventKind::Cdsp) cdsp_so_far = true;
    if (dlp_so_far)
      e.verdict_so_far = Verdict::Unstable;
    else if (seen == monitored.size() && covers_critical && rep.missing.empty())
      e.verdict_so_far = cdsp_so_far ? Verdict::CriticalStable : Verdict::Stable;
    else
      e.verdict_so_far = Verdict::Undecided;
  }

  for (const auto& e : rep.timeline) {
    if (e.event.kind != EventKind::Dlp) continue;
    if (!rep.leading_losp)
      rep.leading_losp = e.event;
    else
      rep.lagging_losps.push_back(e.event);
  }

  if (rep.system == Verdict::Unstable) {
    rep.verdict_time = rep.leading_losp->time;
    // Compare against every critical machine that produced an event; a machine
    // silent through the horizon cannot hide an earlier liberation.
    double earliest = rep.leading_losp->time;
    bool definitive = true;
    for (int m : critical) {
      const auto it = events.find(m);
      if (it == events.end()) continue;
      if (it->second.kind == EventKind::Dlp && it->second.time < earliest - 1e-15)
        definitive = false;
    }
    rep.leading_losp_definitive = definitive;
  } else if (rep.system == Verdict::Stable || rep.system == Verdict::CriticalStable) {
    double last = 0.0;
    for (const auto& e : rep.timeline) last = std::max(last, e.event.time);
    rep.verdict_time = last;
  }
  return rep;
}

[[nodiscard]] inline AssessmentReport assess(const std::map<int, SwingEvent>& events,
                                             const std::vector<int>& critical) {
  return assess_subset(events, critical, critical);
}

struct AssessmentOptions {
  double h = 1e-3;
  IdentificationParams identification{};
  DetectionParams detection{};
  std::vector<int> monitored{};  // empty: watch the full critical set
};

struct CaseAssessment {
  Trajectory trajectory;
  CriticalSet critical;
  std::vector<SwingEvent> events;  // every machine that produced one, in time order
  AssessmentReport report;
  bool horizon_extended = false;
};

namespace detail {

[[nodiscard]] inline CaseAssessment assess_once(const StagedNetwork& net, double t_cl,
                                                double t_end, const AssessmentOptions& opt) {
  CaseAssessment out;
  out.trajectory = simulate(net, t_cl, t_end, opt.h);
  out.critical = identify_critical(out.trajectory, opt.identification);
  std::map<int, SwingEvent> by_bus;
  for (int bus : out.trajectory.machine_buses) {
    const KimbarkCurve curve = kimbark_curve(out.trajectory, bus);
    if (const auto ev = detect_event(curve, opt.detection)) {
      by_bus.emplace(bus, *ev);
      out.events.push_back(*ev);
    }
  }
  std::sort(out.events.begin(), out.events.end(), [](const SwingEvent& a, const SwingEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.machine_bus < b.machine_bus;
  });
  const std::vector<int>& monitored =
      opt.monitored.empty() ? out.critical.machines : opt.monitored;
  out.report = assess_subset(by_bus, out.critical.machines, monitored);
  return out;
}

}  // namespace detail

// Full pipeline for one fault: integrate, identify the critical machines,
// detect each machine's first milestone, and apply the unity verdict. When the
// horizon expires with a monitored machine still silent, the window is doubled
// once; an undecided verdict that survives the extension is final.
[[nodiscard]] inline CaseAssessment run_assessment(const StagedNetwork& net, double t_cl,
                                                   double t_end,
                                                   const AssessmentOptions& opt = {}) {
  CaseAssessment out = detail::assess_once(net, t_cl, t_end, opt);
  if (out.report.system == Verdict::Undecided && !out.report.missing.empty()) {
    const double extended_end = t_cl + 2.0 * (t_end - t_cl);
    out = detail::assess_once(net, t_cl, extended_end, opt);
    out.horizon_extended = true;
  }
  return out;
}

// Largest angle excursion from the common frame over the whole trajectory;
// crossing 2*pi is the classical loss-of-synchronism criterion used as an
// independent cross-check of the verdicts.
[[nodiscard]] inline double max_angle_excursion(const Trajectory& traj) {
  double mx = 0.0;
  for (const auto& s : traj.samples) mx = std::max(mx, s.theta.cwiseAbs().maxCoeff());
  return mx;
}

struct CctParams {
  double h = 1e-3;
  double horizon = 1.5;  // assessment window beyond each trial clearing time
  double tol = 1e-3;
  IdentificationParams identification{};
  DetectionParams detection{};
};

struct CctEvaluation {
  double t_cl = 0.0;
  Verdict verdict = Verdict::Undecided;
  bool horizon_extended = false;
};

struct CctResult {
  double t_stable = 0.0;    // largest clearing time observed stable
  double t_unstable = 0.0;  // smallest clearing time observed unstable
  double tol_effective = 0.0;
  bool tol_clamped = false;
  std::vector<CctEvaluation> evaluations;  // bracket endpoints, then midpoints
};

// Bisects the clearing time on the integration grid. Critically stable counts
// as stable; a verdict still undecided after the one horizon extension is
// treated as unstable, which can only widen the reported bracket, never
// narrow it past the true boundary.
[[nodiscard]] inline CctResult cct_bisect(const PowerSystemCase& sys, int fault_bus, double t_lo,
                                          double t_hi, const CctParams& prm = {}) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw UsageError("cct_bisect: need 0 < t_lo < t_hi");
  long k_lo = detail::snap_to_grid(t_lo, prm.h, "t_lo");
  long k_hi = detail::snap_to_grid(t_hi, prm.h, "t_hi");

  CctResult res;
  res.tol_effective = prm.tol;
  if (prm.tol < prm.h) {
    // The grid cannot resolve brackets finer than one step.
    res.tol_effective = prm.h;
    res.tol_clamped = true;
  }

  const StagedNetwork net = build_staged_network(sys, fault_bus);
  AssessmentOptions opt;
  opt.h = prm.h;
  opt.identification = prm.identification;
  opt.detection = prm.detection;

  const auto side_of = [&](long k) {
    const double tcl = static_cast<double>(k) * prm.h;
    const CaseAssessment a = run_assessment(net, tcl, tcl + prm.horizon, opt);
    Verdict v = a.report.system;
    res.evaluations.push_back({tcl, v, a.horizon_extended});
    return v == Verdict::Stable || v == Verdict::CriticalStable;
  };

  if (!side_of(k_lo)) throw UsageError("cct_bisect: t_lo is not on the stable side");
  if (side_of(k_hi)) throw UsageError("cct_bisect: t_hi is not on the unstable side");

  while (static_cast<double>(k_hi - k_lo) * prm.h > res.tol_effective + 1e-12 &&
         k_hi - k_lo > 1) {
    const long k_mid = k_lo + (k_hi - k_lo) / 2;
    if (side_of(k_mid))
      k_lo = k_mid;
    else
      k_hi = k_mid;
  }
  res.t_stable = static_cast<double>(k_lo) * prm.h;
  res.t_unstable = static_cast<double>(k_hi) * prm.h;
  return res;
}

}  // namespace kimbark
