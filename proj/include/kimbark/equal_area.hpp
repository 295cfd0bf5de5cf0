#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "kimbark/dynamics.hpp"
#include "kimbark/errors.hpp"

namespace kimbark {

struct KimbarkPoint {
  double t = 0.0;
  double theta = 0.0;      // machine angle relative to the common frame, rad
  double f = 0.0;          // accelerating power in the common frame, p.u.
  double omega_rel = 0.0;  // speed relative to the common frame, rad/s
  Stage stage = Stage::FaultOn;
};

// One machine's angle/power trace, the plane the equal-area argument lives in.
struct KimbarkCurve {
  int machine_bus = 0;
  std::size_t machine_index = 0;
  double inertia = 0.0;
  double h = 0.0;
  double t_cl = 0.0;
  std::size_t clearing_index = 0;  // first post-fault point (the duplicate)
  std::vector<KimbarkPoint> points;
};

enum class EventKind { Dsp, Dlp, Cdsp };

[[nodiscard]] constexpr const char* event_kind_label(EventKind k) {
  switch (k) {
    case EventKind::Dsp: return "DSP";
    case EventKind::Dlp: return "DLP";
    default: return "CDSP";
  }
}

// First post-fault swing milestone of one machine. A DSP (stationarity) ends
// the forward swing with kinetic energy exhausted; a DLP (liberation) is an
// accelerating-power sign reversal reached while still moving, after which the
// machine cannot be held; a CDSP is both within time resolution.
struct SwingEvent {
  int machine_bus = 0;
  EventKind kind = EventKind::Dsp;
  double time = 0.0;
  double theta = 0.0;        // interpolated angle at the event
  double residual_ke = 0.0;  // 0.5 * M * omega_rel^2 at the event
  double a_acc = 0.0;        // kinetic energy injected by the fault
  double a_dec = 0.0;        // decelerating area absorbed up to the event
};

struct DetectionParams {
  double eps_f = 1e-6;      // accelerating-power dead band, p.u.
  double eps_omega = 1e-6;  // speed dead band, rad/s
};

[[nodiscard]] inline KimbarkCurve kimbark_curve(const Trajectory& traj, int machine_bus) {
  const int mi = traj.machine_index(machine_bus);
  if (mi < 0) throw UsageError("unknown machine bus " + std::to_string(machine_bus));
  KimbarkCurve c;
  c.machine_bus = machine_bus;
  c.machine_index = static_cast<std::size_t>(mi);
  c.inertia = traj.inertia[mi];
  c.h = traj.h;
  c.t_cl = traj.t_cl;
  c.clearing_index = traj.clearing_index;
  c.points.reserve(traj.samples.size());
  for (const auto& s : traj.samples)
    c.points.push_back({s.t, s.theta[mi], s.f[mi], s.omega_rel[mi], s.stage});
  return c;
}

struct AreaPair {
  double a_acc = 0.0;
  double a_dec = 0.0;
};

// Accelerating area = kinetic energy at clearing; decelerating area is the
// work integral of -f along the post-fault curve, as a function of time so it
// stays single-valued after the swing reverses: A_dec(t) = -int f * omega_rel dt.
[[nodiscard]] inline AreaPair areas(const KimbarkCurve& c, double upto) {
  const auto& p = c.points;
  const std::size_t s = c.clearing_index;
  if (upto < c.t_cl - 1e-12) throw UsageError("areas: time precedes the clearing instant");
  if (upto > p.back().t + 1e-12) throw UsageError("areas: time exceeds the trajectory");
  AreaPair out;
  const double w_cl = p[s].omega_rel;
  out.a_acc = 0.5 * c.inertia * w_cl * w_cl;
  double acc = 0.0;
  for (std::size_t k = s; k + 1 < p.size(); ++k) {
    const double ga = -p[k].f * p[k].omega_rel;
    if (p[k + 1].t <= upto) {
      const double gb = -p[k + 1].f * p[k + 1].omega_rel;
      acc += 0.5 * (ga + gb) * (p[k + 1].t - p[k].t);
      continue;
    }
    const double span = p[k + 1].t - p[k].t;
    const double lam = (upto - p[k].t) / span;
    if (lam > 0.0) {
      const double f_u = p[k].f + (p[k + 1].f - p[k].f) * lam;
      const double w_u = p[k].omega_rel + (p[k + 1].omega_rel - p[k].omega_rel) * lam;
      acc += 0.5 * (ga + (-f_u * w_u)) * lam * span;
    }
    break;
  }
  out.a_dec = acc;
  return out;
}

// Scans the post-fault samples of one curve for its first swing milestone.
// The swing direction sigma is the sign of omega_rel at clearing (or at the
// first sample where it leaves the dead band); all crossings are evaluated on
// the sigma-folded signals so backward swings are handled symmetrically.
[[nodiscard]] inline std::optional<SwingEvent> detect_event(const KimbarkCurve& c,
                                                            const DetectionParams& prm = {}) {
  const auto& p = c.points;
  const std::size_t s = c.clearing_index;
  if (s >= p.size()) throw UsageError("detect_event: curve has no post-fault samples");

  double sigma = 0.0;
  for (std::size_t k = s; k < p.size(); ++k) {
    if (std::abs(p[k].omega_rel) > prm.eps_omega) {
      sigma = p[k].omega_rel > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  if (sigma == 0.0) {
    // Never left the dead band: the machine is stationary from clearing on.
    SwingEvent ev;
    ev.machine_bus = c.machine_bus;
    ev.kind = EventKind::Dsp;
    ev.time = p[s].t;
    ev.theta = p[s].theta;
    ev.residual_ke = 0.5 * c.inertia * p[s].omega_rel * p[s].omega_rel;
    const AreaPair ar = areas(c, p[s].t);
    ev.a_acc = ar.a_acc;
    ev.a_dec = ar.a_dec;
    return ev;
  }

  const double eps_t = c.h / 10.0;  // coincidence resolution for CDSP
  for (std::size_t k = s; k + 1 < p.size(); ++k) {
    const double wa = sigma * p[k].omega_rel;
    const double wb = sigma * p[k + 1].omega_rel;
    std::optional<double> t_dsp;
    if (wa > 0.0 && wb <= 0.0) {
      const double lam = wa / (wa - wb);
      t_dsp = p[k].t + lam * (p[k + 1].t - p[k].t);
    }

    const double fa = sigma * p[k].f;
    const double fb = sigma * p[k + 1].f;
    std::optional<double> t_dlp;
    if (fa < 0.0 && fb >= 0.0) {
      // Sustained reversal only: the sample one full step past the crossing
      // must clear the dead band, which filters grazing touches of zero.
      const bool sustained =
          k + 2 < p.size() ? sigma * p[k + 2].f > prm.eps_f : fb > prm.eps_f;
      if (sustained) {
        const double lam = fa / (fa - fb);
        const double tt = p[k].t + lam * (p[k + 1].t - p[k].t);
        const double w_t = p[k].omega_rel + (p[k + 1].omega_rel - p[k].omega_rel) * lam;
        if (sigma * w_t > prm.eps_omega) t_dlp = tt;  // liberation requires motion
      }
    }

    EventKind kind;
    double tt;
    if (t_dsp && t_dlp) {
      if (std::abs(*t_dsp - *t_dlp) <= eps_t) {
        kind = EventKind::Cdsp;
        tt = *t_dsp;
      } else if (*t_dsp < *t_dlp) {
        kind = EventKind::Dsp;
        tt = *t_dsp;
      } else {
        kind = EventKind::Dlp;
        tt = *t_dlp;
      }
    } else if (t_dsp) {
      kind = EventKind::Dsp;
      tt = *t_dsp;
    } else if (t_dlp) {
      kind = EventKind::Dlp;
      tt = *t_dlp;
    } else {
      continue;
    }

    const double lam = (tt - p[k].t) / (p[k + 1].t - p[k].t);
    SwingEvent ev;
    ev.machine_bus = c.machine_bus;
    ev.kind = kind;
    ev.time = tt;
    ev.theta = p[k].theta + (p[k + 1].theta - p[k].theta) * lam;
    const double w_t = p[k].omega_rel + (p[k + 1].omega_rel - p[k].omega_rel) * lam;
    ev.residual_ke = 0.5 * c.inertia * w_t * w_t;
    const AreaPair ar = areas(c, tt);
    ev.a_acc = ar.a_acc;
    ev.a_dec = ar.a_dec;
    return ev;
  }
  return std::nullopt;
}

struct IdentificationParams {
  double window = 0.03;           // observation delay past clearing, s
  double energy_fraction = 0.055; // kinetic-energy admission threshold
  double min_disturbance = 0.02;  // rad; below this the fault left no mark
};

struct CriticalSet {
  std::vector<int> machines;  // bus ids, most severely disturbed first
  bool disturbed = false;
};

// Severity-ordered critical machines, read off one observation sample shortly
// after clearing. Membership is the union of an angle cut (largest gap in the
// sorted |theta| profile) and an energy cut (kinetic energy within a fraction
// of the maximum); ordering is by combined angle/energy rank.
[[nodiscard]] inline CriticalSet identify_critical(const Trajectory& traj,
                                                   const IdentificationParams& prm = {}) {
  const auto n = static_cast<std::size_t>(traj.inertia.size());
  const double t_obs = traj.t_cl + prm.window;
  if (traj.t_end + 1e-12 < t_obs)
    throw UsageError("identify_critical: trajectory ends before the observation instant");

  std::size_t kb = traj.clearing_index;
  double best = std::abs(traj.samples[kb].t - t_obs);
  for (std::size_t k = traj.clearing_index; k < traj.samples.size(); ++k) {
    const double d = std::abs(traj.samples[k].t - t_obs);
    if (d < best) {
      best = d;
      kb = k;
    }
  }
  const auto& obs = traj.samples[kb];
  const auto& init = traj.samples.front();

  CriticalSet out;
  double max_dth = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_dth = std::max(max_dth, std::abs(obs.theta[i] - init.theta[i]));
  if (max_dth < prm.min_disturbance) return out;  // fault left no usable signature
  out.disturbed = true;

  std::vector<double> a(n), ke(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::abs(obs.theta[i]);
    ke[i] = 0.5 * traj.inertia[i] * obs.omega_rel[i] * obs.omega_rel[i];
  }

  std::vector<std::size_t> desc(n);
  std::iota(desc.begin(), desc.end(), 0);
  std::stable_sort(desc.begin(), desc.end(),
                   [&a](std::size_t i, std::size_t j) { return a[i] > a[j]; });
  std::size_t cut = 0;
  double best_gap = -1.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double gap = a[desc[j]] - a[desc[j + 1]];
    if (gap > best_gap) {
      best_gap = gap;
      cut = j;
    }
  }
  std::vector<bool> member(n, false);
  for (std::size_t j = 0; j <= cut; ++j) member[desc[j]] = true;

  const double ke_max = *std::max_element(ke.begin(), ke.end());
  for (std::size_t i = 0; i < n; ++i)
    if (ke[i] >= prm.energy_fraction * ke_max) member[i] = true;

  // Rank both signals ascending; the shared order statistic makes the two
  // severity measures commensurable without unit juggling.
  const auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> asc(n);
    std::iota(asc.begin(), asc.end(), 0);
    std::stable_sort(asc.begin(), asc.end(),
                     [&v](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(n);
    const double den = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t pos = 0; pos < n; ++pos) r[asc[pos]] = static_cast<double>(pos) / den;
    return r;
  };
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rk = ranks(ke);

  std::vector<std::size_t> crit;
  for (std::size_t i = 0; i < n; ++i)
    if (member[i]) crit.push_back(i);
  std::stable_sort(crit.begin(), crit.end(), [&](std::size_t i, std::size_t j) {
    const double si = ra[i] + rk[i], sj = ra[j] + rk[j];
    if (si != sj) return si > sj;
    return traj.machine_buses[i] < traj.machine_buses[j];
  });
  for (std::size_t i : crit) out.machines.push_back(traj.machine_buses[i]);
  return out;
}

}  // namespace kimbark
