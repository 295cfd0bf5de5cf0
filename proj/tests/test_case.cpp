#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>
#include <string>

#include "kimbark/case.hpp"

using Catch::Matchers::ContainsSubstring;

namespace {

std::string cases_dir() { return KIMBARK_CASES_DIR; }

// Smallest case exercising every documented field, including the optional ones.
nlohmann::json minimal_case() {
  return nlohmann::json::parse(R"({
    "system": {"base_mva": 100.0, "frequency_hz": 60.0},
    "buses": [
      {"id": 1, "type": "pv", "vm": 1.0, "va": 0.1, "load_p": 0.5, "load_q": 0.2},
      {"id": 2, "type": "slack", "vm": 1.02, "va": 0.0},
      {"id": 3, "type": "pq", "vm": 0.98, "va": -0.05, "load_p": 1.0, "load_q": 0.3}
    ],
    "branches": [
      {"from": 1, "to": 2, "r": 0.01, "x": 0.35, "b": 0.2},
      {"from": 2, "to": 3, "r": 0.0, "x": 0.05, "b": 0.0, "tap": 1.025}
    ],
    "generators": [
      {"bus": 1, "m": 0.05, "xd_t": 0.1, "pm": 0.8, "p": 0.8, "q": 0.1},
      {"bus": 2, "m": 5.0, "xd_t": 0.05, "pm": 0.7, "p": 0.7, "q": 0.2}
    ]})");
}

kimbark::PowerSystemCase load(const nlohmann::json& doc) {
  return kimbark::load_case(doc.dump());
}

}  // namespace

TEST_CASE("bundled 39-bus case loads with the expected shape") {
  const auto sys = kimbark::load_case_file(cases_dir() + "/ts1.json");
  CHECK(sys.buses.size() == 39);
  CHECK(sys.branches.size() == 46);
  CHECK(sys.generators.size() == 10);
  CHECK(sys.base_mva == 100.0);
  CHECK(sys.frequency_hz == 60.0);

  // Machine order follows the file; buses 30..39 carry the generators.
  for (int b = 30; b <= 39; ++b) CHECK(sys.generator_index(b) == b - 30);

  // The bus-39 unit runs with its inertia reduced to 100 s (M = 2H / omega_s),
  // not the stock 500 s value; this is what stresses the backward swing.
  const auto& g39 = sys.generators[9];
  CHECK_THAT(g39.m, Catch::Matchers::WithinRel(2.0 * 100.0 / sys.omega_s(), 1e-12));
  CHECK(g39.m < 0.6);
  CHECK_THAT(sys.total_inertia(), Catch::Matchers::WithinRel(2.03028656, 1e-6));

  CHECK(sys.bus_index(1) == 0);
  CHECK(sys.bus_index(40) == -1);
  CHECK(sys.find_bus(39) != nullptr);
  CHECK(sys.find_bus(40) == nullptr);
}

TEST_CASE("bundled two-machine case loads") {
  const auto sys = kimbark::load_case_file(cases_dir() + "/omib.json");
  CHECK(sys.buses.size() == 2);
  CHECK(sys.branches.size() == 1);
  CHECK(sys.generators.size() == 2);
  CHECK(sys.generators[0].m == 0.05);
  CHECK(sys.generators[1].m == 5.0);
}

TEST_CASE("case field names are frozen") {
  const auto sys = load(minimal_case());
  CHECK(sys.base_mva == 100.0);
  CHECK(sys.frequency_hz == 60.0);
  REQUIRE(sys.buses.size() == 3);
  CHECK(sys.buses[0].id == 1);
  CHECK(sys.buses[0].type == kimbark::BusType::Pv);
  CHECK(sys.buses[0].vm == 1.0);
  CHECK(sys.buses[0].va == 0.1);
  CHECK(sys.buses[0].load_p == 0.5);
  CHECK(sys.buses[0].load_q == 0.2);
  CHECK(sys.buses[1].type == kimbark::BusType::Slack);
  CHECK(sys.buses[1].load_p == 0.0);  // optional, defaults to zero
  CHECK(sys.buses[2].type == kimbark::BusType::Pq);
  REQUIRE(sys.branches.size() == 2);
  CHECK(sys.branches[0].r == 0.01);
  CHECK(sys.branches[0].x == 0.35);
  CHECK(sys.branches[0].b == 0.2);
  CHECK(sys.branches[0].tap == 1.0);  // optional, defaults to one
  CHECK(sys.branches[1].tap == 1.025);
  REQUIRE(sys.generators.size() == 2);
  CHECK(sys.generators[0].bus == 1);
  CHECK(sys.generators[0].m == 0.05);
  CHECK(sys.generators[0].xd_t == 0.1);
  CHECK(sys.generators[0].pm == 0.8);
  CHECK(sys.generators[0].p == 0.8);
  CHECK(sys.generators[0].q == 0.1);
}

TEST_CASE("generator inertia accepts H seconds as an alternative") {
  auto doc = minimal_case();
  doc["generators"][0].erase("m");
  doc["generators"][0]["h"] = 9.42477796076938;  // H = m * omega_s / 2 for m = 0.05
  const auto sys = load(doc);
  CHECK_THAT(sys.generators[0].m, Catch::Matchers::WithinRel(0.05, 1e-12));

  SECTION("both m and h is ambiguous") {
    doc["generators"][0]["m"] = 0.05;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("generators[0]") &&
                             ContainsSubstring("exactly one of \"m\" or \"h\"")));
  }
  SECTION("neither m nor h") {
    doc["generators"][0].erase("h");
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("exactly one of \"m\" or \"h\"")));
  }
}

TEST_CASE("case validation reports the offending field") {
  auto ok = minimal_case();
  CHECK_NOTHROW(load(ok));

  SECTION("missing top-level block") {
    auto doc = ok;
    doc.erase("system");
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("system")));
  }
  SECTION("unknown bus type") {
    auto doc = ok;
    doc["buses"][0]["type"] = "swing";
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("buses[0].type") && ContainsSubstring("swing")));
  }
  SECTION("duplicate bus id") {
    auto doc = ok;
    doc["buses"][1]["id"] = 1;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("buses[1].id")));
  }
  SECTION("dangling branch endpoint") {
    auto doc = ok;
    doc["branches"][0]["to"] = 99;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("branches[0].to") && ContainsSubstring("99")));
  }
  SECTION("branch self-loop") {
    auto doc = ok;
    doc["branches"][0]["to"] = 1;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("branches[0]")));
  }
  SECTION("non-positive reactance") {
    auto doc = ok;
    doc["branches"][1]["x"] = 0.0;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("branches[1].x")));
  }
  SECTION("non-positive tap") {
    auto doc = ok;
    doc["branches"][1]["tap"] = -1.0;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("branches[1].tap")));
  }
  SECTION("unknown generator bus") {
    auto doc = ok;
    doc["generators"][0]["bus"] = 7;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("generators[0].bus")));
  }
  SECTION("second generator on one bus") {
    auto doc = ok;
    doc["generators"][1]["bus"] = 1;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("generators[1].bus")));
  }
  SECTION("non-positive inertia") {
    auto doc = ok;
    doc["generators"][0]["m"] = 0.0;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("generators[0].m")));
  }
  SECTION("non-positive transient reactance") {
    auto doc = ok;
    doc["generators"][1]["xd_t"] = -0.1;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("generators[1].xd_t")));
  }
  SECTION("non-positive voltage magnitude") {
    auto doc = ok;
    doc["buses"][2]["vm"] = 0.0;
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("buses[2].vm")));
  }
  SECTION("wrong value type") {
    auto doc = ok;
    doc["buses"][0]["vm"] = "one";
    CHECK_THROWS_MATCHES(load(doc), kimbark::CaseError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("buses[0].vm")));
  }
}

TEST_CASE("malformed input is rejected up front") {
  CHECK_THROWS_AS(kimbark::load_case("{ not json"), kimbark::CaseError);
  CHECK_THROWS_AS(kimbark::load_case("[1, 2, 3]"), kimbark::CaseError);
  CHECK_THROWS_MATCHES(kimbark::load_case_file("/nonexistent/case.json"), kimbark::CaseError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("cannot open")));
}
