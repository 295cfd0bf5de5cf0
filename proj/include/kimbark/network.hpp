#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kimbark/case.hpp"
#include "kimbark/errors.hpp"

namespace kimbark {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Bus admittance matrix over the case's buses in declaration order. Loads are
// folded in as constant shunts computed at the solved voltage magnitudes, which
// keeps the operating point an exact equilibrium of the reduced model.
[[nodiscard]] inline ComplexMatrix bus_admittance(const PowerSystemCase& sys,
                                                  bool with_load_shunts = true) {
  const auto n = static_cast<Eigen::Index>(sys.buses.size());
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (const auto& br : sys.branches) {
    const auto i = static_cast<Eigen::Index>(sys.bus_index(br.from));
    const auto j = static_cast<Eigen::Index>(sys.bus_index(br.to));
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex bc(0.0, br.b / 2.0);
    const double a = br.tap;
    y(i, i) += (ys + bc) / (a * a);
    y(j, j) += ys + bc;
    y(i, j) -= ys / a;
    y(j, i) -= ys / a;
  }
  if (with_load_shunts) {
    for (std::size_t k = 0; k < sys.buses.size(); ++k) {
      const auto& bus = sys.buses[k];
      if (bus.load_p == 0.0 && bus.load_q == 0.0) continue;
      y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) +=
          Complex(bus.load_p, -bus.load_q) / (bus.vm * bus.vm);
    }
  }
  return y;
}

// Eliminates every node not listed in `retained` by Gaussian reduction:
// Y' = Yrr - Yre * Yee^-1 * Yer. Row order of the result follows `retained`.
[[nodiscard]] inline ComplexMatrix kron_reduce(const ComplexMatrix& y,
                                               const std::vector<int>& retained) {
  const auto n = y.rows();
  if (y.cols() != n) throw NetworkError("kron_reduce: matrix is not square");
  if (retained.empty()) throw NetworkError("kron_reduce: retained set is empty");
  std::vector<bool> keep(static_cast<std::size_t>(n), false);
  for (int idx : retained) {
    if (idx < 0 || idx >= n)
      throw NetworkError("kron_reduce: retained index " + std::to_string(idx) + " out of range");
    if (keep[static_cast<std::size_t>(idx)])
      throw NetworkError("kron_reduce: retained index " + std::to_string(idx) + " repeated");
    keep[static_cast<std::size_t>(idx)] = true;
  }
  std::vector<int> elim;
  for (int i = 0; i < n; ++i)
    if (!keep[static_cast<std::size_t>(i)]) elim.push_back(i);

  const auto nr = static_cast<Eigen::Index>(retained.size());
  const auto ne = static_cast<Eigen::Index>(elim.size());
  ComplexMatrix yrr(nr, nr), yre(nr, ne), yer(ne, nr), yee(ne, ne);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nr; ++j) yrr(i, j) = y(retained[i], retained[j]);
  if (ne == 0) return yrr;
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < ne; ++j) yre(i, j) = y(retained[i], elim[j]);
  for (Eigen::Index i = 0; i < ne; ++i)
    for (Eigen::Index j = 0; j < nr; ++j) yer(i, j) = y(elim[i], retained[j]);
  for (Eigen::Index i = 0; i < ne; ++i)
    for (Eigen::Index j = 0; j < ne; ++j) yee(i, j) = y(elim[i], elim[j]);

  Eigen::FullPivLU<ComplexMatrix> lu(yee);
  if (!lu.isInvertible())
    throw NetworkError("kron_reduce: eliminated block is singular (isolated subnetwork)");
  return yrr - yre * lu.solve(yer);
}

// The three admittance matrices a staged fault simulation runs on, reduced to
// generator internal nodes, plus the machine parameters aligned with them.
struct StagedNetwork {
  ComplexMatrix pre_fault;
  ComplexMatrix fault_on;
  ComplexMatrix post_fault;  // fault cleared by restoring the network: equals pre_fault
  Eigen::VectorXd emf;       // internal voltage magnitudes
  Eigen::VectorXd delta0;    // internal voltage angles at the operating point, rad
  Eigen::VectorXd mechanical_power;
  Eigen::VectorXd inertia;
  std::vector<int> machine_buses;  // terminal bus ids; defines machine order throughout
  int fault_bus = 0;
  double equilibrium_residual = 0.0;  // max |Pm - Pe(delta0)| on the pre-fault matrix
};

namespace detail {

[[nodiscard]] inline Eigen::VectorXd electrical_power_of(const ComplexMatrix& y,
                                                         const Eigen::VectorXd& emf,
                                                         const Eigen::VectorXd& delta) {
  const auto n = emf.size();
  Eigen::VectorXd pe(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex yij = y(i, j);
      const double dij = delta[i] - delta[j];
      s += emf[i] * emf[j] * (yij.real() * std::cos(dij) + yij.imag() * std::sin(dij));
    }
    pe[i] = s;
  }
  return pe;
}

}  // namespace detail

// Builds the pre-fault / fault-on / post-fault matrices for a solid fault at
// `fault_bus`. The faulted bus is pinned to ground by deleting its row and
// column before reduction; clearing restores the intact network.
[[nodiscard]] inline StagedNetwork build_staged_network(const PowerSystemCase& sys,
                                                        int fault_bus) {
  const int fb = sys.bus_index(fault_bus);
  if (fb < 0) throw NetworkError("unknown fault bus " + std::to_string(fault_bus));

  const auto nb = static_cast<Eigen::Index>(sys.buses.size());
  const auto ng = static_cast<Eigen::Index>(sys.generators.size());

  StagedNetwork net;
  net.fault_bus = fault_bus;
  net.emf.resize(ng);
  net.delta0.resize(ng);
  net.mechanical_power.resize(ng);
  net.inertia.resize(ng);
  for (Eigen::Index k = 0; k < ng; ++k) {
    const auto& g = sys.generators[static_cast<std::size_t>(k)];
    const auto& bus = sys.buses[static_cast<std::size_t>(sys.bus_index(g.bus))];
    // Internal voltage behind the transient reactance at the operating point.
    const Complex v = std::polar(bus.vm, bus.va);
    const Complex i_term = std::conj(Complex(g.p, g.q) / v);
    const Complex e = v + Complex(0.0, g.xd_t) * i_term;
    net.emf[k] = std::abs(e);
    net.delta0[k] = std::arg(e);
    net.mechanical_power[k] = g.pm;
    net.inertia[k] = g.m;
    net.machine_buses.push_back(g.bus);
  }

  // Augmented matrix: case buses followed by one internal node per machine.
  ComplexMatrix aug = ComplexMatrix::Zero(nb + ng, nb + ng);
  aug.topLeftCorner(nb, nb) = bus_admittance(sys);
  for (Eigen::Index k = 0; k < ng; ++k) {
    const auto& g = sys.generators[static_cast<std::size_t>(k)];
    const auto i = static_cast<Eigen::Index>(sys.bus_index(g.bus));
    const auto gi = nb + k;
    const Complex yg = 1.0 / Complex(0.0, g.xd_t);
    aug(gi, gi) += yg;
    aug(i, i) += yg;
    aug(gi, i) -= yg;
    aug(i, gi) -= yg;
  }

  std::vector<int> internal;
  for (Eigen::Index k = 0; k < ng; ++k) internal.push_back(static_cast<int>(nb + k));
  net.pre_fault = kron_reduce(aug, internal);

  // Grounding the faulted bus pins its voltage at zero, which is exactly a
  // row/column deletion in the augmented matrix.
  ComplexMatrix faulted(nb + ng - 1, nb + ng - 1);
  std::vector<int> rest;
  for (Eigen::Index i = 0; i < nb + ng; ++i)
    if (i != static_cast<Eigen::Index>(fb)) rest.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (std::size_t j = 0; j < rest.size(); ++j)
      faulted(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          aug(rest[i], rest[j]);
  std::vector<int> internal_shifted;
  for (Eigen::Index k = 0; k < ng; ++k) internal_shifted.push_back(static_cast<int>(nb + k - 1));
  net.fault_on = kron_reduce(faulted, internal_shifted);
  net.post_fault = net.pre_fault;

  const Eigen::VectorXd pe0 = detail::electrical_power_of(net.pre_fault, net.emf, net.delta0);
  net.equilibrium_residual = (net.mechanical_power - pe0).cwiseAbs().maxCoeff();
  return net;
}

}  // namespace kimbark
