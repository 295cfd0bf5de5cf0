#include <catch_amalgamated.hpp>

#include <complex>
#include <string>

#include "kimbark/case.hpp"
#include "kimbark/network.hpp"

using kimbark::Complex;
using kimbark::ComplexMatrix;

namespace {

std::string cases_dir() { return KIMBARK_CASES_DIR; }

// Small connected test network, diagonally dominant like a real Y matrix.
ComplexMatrix three_node() {
  ComplexMatrix y(3, 3);
  y << Complex(4, -8), Complex(-2, 4), Complex(-1, 2),
       Complex(-2, 4), Complex(5, -10), Complex(-2, 3),
       Complex(-1, 2), Complex(-2, 3), Complex(4, -6);
  return y;
}

}  // namespace

TEST_CASE("three-node reduction matches the hand-computed elimination") {
  const ComplexMatrix red = kimbark::kron_reduce(three_node(), {0, 1});
  REQUIRE(red.rows() == 2);
  // Frozen values of Yrr - Yre * Yee^-1 * Yer worked out by hand for this matrix.
  CHECK_THAT(red(0, 0).real(), Catch::Matchers::WithinAbs(3.76923076923, 1e-10));
  CHECK_THAT(red(0, 0).imag(), Catch::Matchers::WithinAbs(-7.34615384615, 1e-10));
  CHECK_THAT(red(0, 1).real(), Catch::Matchers::WithinAbs(-2.5, 1e-10));
  CHECK_THAT(red(0, 1).imag(), Catch::Matchers::WithinAbs(5.0, 1e-10));
  CHECK_THAT(red(1, 1).real(), Catch::Matchers::WithinAbs(4.0, 1e-10));
  CHECK_THAT(red(1, 1).imag(), Catch::Matchers::WithinAbs(-8.5, 1e-10));
  CHECK(std::abs(red(1, 0) - red(0, 1)) < 1e-12);
}

TEST_CASE("retaining every node is the identity, in the requested order") {
  const ComplexMatrix y = three_node();
  const ComplexMatrix same = kimbark::kron_reduce(y, {0, 1, 2});
  CHECK((same - y).cwiseAbs().maxCoeff() == 0.0);
  const ComplexMatrix perm = kimbark::kron_reduce(y, {2, 0, 1});
  CHECK(perm(0, 0) == y(2, 2));
  CHECK(perm(1, 2) == y(0, 1));
}

TEST_CASE("reduction is exact for passive eliminated nodes") {
  // With zero injection at the eliminated node, the reduced matrix must
  // reproduce the full network's response at the retained nodes exactly.
  const ComplexMatrix y = three_node();
  Eigen::VectorXcd inj(3);
  inj << Complex(1.0, 0.5), Complex(-0.25, 2.0), Complex(0.0, 0.0);
  const Eigen::VectorXcd v = y.fullPivLu().solve(inj);
  const ComplexMatrix red = kimbark::kron_reduce(y, {0, 1});
  const Eigen::VectorXcd back = red * v.head(2);
  CHECK((back - inj.head(2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("degenerate reductions are rejected") {
  ComplexMatrix y = three_node();
  SECTION("isolated eliminated node") {
    y.row(2).setZero();
    y.col(2).setZero();
    CHECK_THROWS_AS(kimbark::kron_reduce(y, {0, 1}), kimbark::NetworkError);
  }
  SECTION("empty retained set") {
    CHECK_THROWS_AS(kimbark::kron_reduce(y, {}), kimbark::NetworkError);
  }
  SECTION("retained index out of range") {
    CHECK_THROWS_AS(kimbark::kron_reduce(y, {0, 3}), kimbark::NetworkError);
  }
  SECTION("retained index repeated") {
    CHECK_THROWS_AS(kimbark::kron_reduce(y, {0, 0}), kimbark::NetworkError);
  }
  SECTION("non-square matrix") {
    CHECK_THROWS_AS(kimbark::kron_reduce(ComplexMatrix::Zero(2, 3), {0}), kimbark::NetworkError);
  }
}

TEST_CASE("staged matrices on the bundled 39-bus case") {
  const auto sys = kimbark::load_case_file(cases_dir() + "/ts1.json");
  const auto net = kimbark::build_staged_network(sys, 2);

  REQUIRE(net.machine_buses.size() == 10);
  for (int b = 30; b <= 39; ++b) CHECK(net.machine_buses[b - 30] == b);
  CHECK(net.fault_bus == 2);

  // The underlying network has no phase shifters, so every stage is symmetric.
  for (const ComplexMatrix* y : {&net.pre_fault, &net.fault_on, &net.post_fault}) {
    CHECK(y->rows() == 10);
    CHECK((*y - y->transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK((net.pre_fault - net.post_fault).cwiseAbs().maxCoeff() == 0.0);
  CHECK((net.pre_fault - net.fault_on).cwiseAbs().maxCoeff() > 1e-3);

  // The operating point baked into the case is an equilibrium of the reduction.
  CHECK(net.equilibrium_residual < 1e-6);

  CHECK_THROWS_AS(kimbark::build_staged_network(sys, 99), kimbark::NetworkError);
}

TEST_CASE("two-machine staged network has the closed-form transfer admittance") {
  const auto sys = kimbark::load_case_file(cases_dir() + "/omib.json");
  const auto net = kimbark::build_staged_network(sys, 1);

  // Series path: xd1 + line + xd2 = 0.1 + 0.35 + 0.05, all reactive.
  CHECK_THAT(std::abs(net.pre_fault(0, 1)), Catch::Matchers::WithinAbs(2.0, 1e-12));
  CHECK(std::abs(net.pre_fault(0, 1).real()) < 1e-12);
  CHECK(net.equilibrium_residual < 1e-9);

  // Grounding machine 1's terminal cuts its every path to the other machine.
  CHECK(std::abs(net.fault_on(0, 1)) < 1e-12);

  // Internal voltage construction: E = V + j xd_t * conj(S / V).
  const auto& bus = sys.buses[0];
  const auto& gen = sys.generators[0];
  const Complex v = std::polar(bus.vm, bus.va);
  const Complex e = v + Complex(0.0, gen.xd_t) * std::conj(Complex(gen.p, gen.q) / v);
  CHECK_THAT(net.emf[0], Catch::Matchers::WithinAbs(std::abs(e), 1e-14));
  CHECK_THAT(net.delta0[0], Catch::Matchers::WithinAbs(std::arg(e), 1e-14));
}

TEST_CASE("load shunts enter the admittance diagonal") {
  const auto sys = kimbark::load_case_file(cases_dir() + "/ts1.json");
  const ComplexMatrix bare = kimbark::bus_admittance(sys, false);
  const ComplexMatrix loaded = kimbark::bus_admittance(sys, true);
  CHECK((loaded - bare).cwiseAbs().maxCoeff() > 0.0);
  // Off-diagonal entries are untouched by shunt loads.
  ComplexMatrix diff = loaded - bare;
  diff.diagonal().setZero();
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
  // Bus 39 carries the largest load; its shunt is (P - jQ) / vm^2.
  const int i = sys.bus_index(39);
  const auto& b39 = sys.buses[static_cast<std::size_t>(i)];
  const Complex expect = Complex(b39.load_p, -b39.load_q) / (b39.vm * b39.vm);
  CHECK(std::abs((loaded(i, i) - bare(i, i)) - expect) < 1e-12);
}
