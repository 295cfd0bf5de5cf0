#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kimbark/errors.hpp"
#include "kimbark/network.hpp"

namespace kimbark {

enum class Stage { FaultOn, PostFault };

[[nodiscard]] constexpr const char* stage_label(Stage s) {
  return s == Stage::FaultOn ? "fault-on" : "post-fault";
}

// Pe_i = sum_j Ei Ej (Gij cos(di - dj) + Bij sin(di - dj)) on the given matrix.
[[nodiscard]] inline Eigen::VectorXd electrical_power(const ComplexMatrix& y,
                                                      const Eigen::VectorXd& emf,
                                                      const Eigen::VectorXd& delta) {
  return detail::electrical_power_of(y, emf, delta);
}

struct CoiFrame {
  double delta_coi = 0.0;
  double omega_coi = 0.0;
  double p_coi = 0.0;  // sum of accelerating powers, absorbed by the frame
};

[[nodiscard]] inline CoiFrame coi_aggregate(const Eigen::VectorXd& inertia,
                                            const Eigen::VectorXd& delta,
                                            const Eigen::VectorXd& omega,
                                            const Eigen::VectorXd& pm,
                                            const Eigen::VectorXd& pe) {
  const double mt = inertia.sum();
  CoiFrame coi;
  coi.delta_coi = inertia.dot(delta) / mt;
  coi.omega_coi = inertia.dot(omega) / mt;
  coi.p_coi = (pm - pe).sum();
  return coi;
}

// One integration sample: machine-frame state plus its projection into the
// inertia-weighted common frame. The projections satisfy, by construction,
// sum(M * theta) = 0, sum(M * omega_rel) = 0, sum(f) = 0.
struct SystemState {
  double t = 0.0;
  Stage stage = Stage::FaultOn;
  Eigen::VectorXd delta;
  Eigen::VectorXd omega;  // speed deviation from synchronous, rad/s
  Eigen::VectorXd pe;
  Eigen::VectorXd theta;      // delta - delta_coi
  Eigen::VectorXd omega_rel;  // omega - omega_coi
  Eigen::VectorXd f;          // Pm - Pe - (M / MT) * P_coi
  CoiFrame coi;
};

[[nodiscard]] inline SystemState relative_state(double t, Stage stage, const StagedNetwork& net,
                                                const ComplexMatrix& y,
                                                const Eigen::VectorXd& delta,
                                                const Eigen::VectorXd& omega) {
  SystemState s;
  s.t = t;
  s.stage = stage;
  s.delta = delta;
  s.omega = omega;
  s.pe = electrical_power(y, net.emf, delta);
  s.coi = coi_aggregate(net.inertia, delta, omega, net.mechanical_power, s.pe);
  const double mt = net.inertia.sum();
  s.theta = delta.array() - s.coi.delta_coi;
  s.omega_rel = omega.array() - s.coi.omega_coi;
  s.f = net.mechanical_power - s.pe - net.inertia * (s.coi.p_coi / mt);
  return s;
}

struct Trajectory {
  // Samples on the uniform grid, with the clearing instant recorded twice:
  // once under the fault-on matrix and once under the post-fault matrix.
  std::vector<SystemState> samples;
  std::vector<int> machine_buses;
  Eigen::VectorXd inertia;
  double t_cl = 0.0;
  double t_end = 0.0;
  double h = 0.0;
  std::size_t clearing_index = 0;  // index of the post-fault duplicate

  [[nodiscard]] int machine_index(int bus_id) const {
    for (std::size_t i = 0; i < machine_buses.size(); ++i)
      if (machine_buses[i] == bus_id) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

// Times must sit on the integration grid; event interpolation and the
// duplicated clearing sample both assume exact stage boundaries.
[[nodiscard]] inline long snap_to_grid(double t, double h, const char* name) {
  const long k = std::lround(t / h);
  if (std::abs(static_cast<double>(k) * h - t) > 1e-6 * h)
    throw UsageError(std::string(name) + " must be an integer multiple of the step h");
  return k;
}

}  // namespace detail

// Integrates the classical swing model with fixed-step RK4 through the
// fault-on window [0, t_cl] and the post-fault window [t_cl, t_end].
[[nodiscard]] inline Trajectory simulate(const StagedNetwork& net, double t_cl, double t_end,
                                         double h) {
  if (h <= 0.0) throw UsageError("step h must be positive");
  if (t_cl <= 0.0) throw UsageError("clearing time must be positive");
  if (t_end <= t_cl) throw UsageError("end time must exceed the clearing time");
  const long k_cl = detail::snap_to_grid(t_cl, h, "clearing time");
  const long k_end = detail::snap_to_grid(t_end, h, "end time");

  Trajectory traj;
  traj.machine_buses = net.machine_buses;
  traj.inertia = net.inertia;
  traj.t_cl = t_cl;
  traj.t_end = t_end;
  traj.h = h;
  traj.clearing_index = static_cast<std::size_t>(k_cl) + 1;
  traj.samples.reserve(static_cast<std::size_t>(k_end) + 2);

  Eigen::VectorXd d = net.delta0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(net.delta0.size());
  const auto accel = [&net](const ComplexMatrix& y, const Eigen::VectorXd& dd) {
    return Eigen::VectorXd((net.mechanical_power - electrical_power(y, net.emf, dd))
                               .cwiseQuotient(net.inertia));
  };

  traj.samples.push_back(relative_state(0.0, Stage::FaultOn, net, net.fault_on, d, w));
  for (long k = 0; k < k_end; ++k) {
    const bool on_fault = k < k_cl;
    const ComplexMatrix& y = on_fault ? net.fault_on : net.post_fault;
    const Eigen::VectorXd k1d = w, k1w = accel(y, d);
    const Eigen::VectorXd k2d = w + (h / 2) * k1w, k2w = accel(y, d + (h / 2) * k1d);
    const Eigen::VectorXd k3d = w + (h / 2) * k2w, k3w = accel(y, d + (h / 2) * k2d);
    const Eigen::VectorXd k4d = w + h * k3w, k4w = accel(y, d + h * k3d);
    d += (h / 6) * (k1d + 2 * k2d + 2 * k3d + k4d);
    w += (h / 6) * (k1w + 2 * k2w + 2 * k3w + k4w);
    if (!d.allFinite() || !w.allFinite())
      throw SimulationError("state became non-finite at t = " +
                            std::to_string(static_cast<double>(k + 1) * h));
    const double t = static_cast<double>(k + 1) * h;
    if (k + 1 == k_cl) {
      traj.samples.push_back(relative_state(t, Stage::FaultOn, net, net.fault_on, d, w));
      traj.samples.push_back(relative_state(t, Stage::PostFault, net, net.post_fault, d, w));
    } else {
      const Stage stage = k + 1 < k_cl ? Stage::FaultOn : Stage::PostFault;
      const ComplexMatrix& yr = stage == Stage::FaultOn ? net.fault_on : net.post_fault;
      traj.samples.push_back(relative_state(t, stage, net, yr, d, w));
    }
  }
  return traj;
}

}  // namespace kimbark
