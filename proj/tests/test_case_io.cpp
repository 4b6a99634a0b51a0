#include <doctest.h>

#include <fstream>

#include "gridsync/case_io.hpp"
#include "gridsync/errors.hpp"
#include "gridsync/powerflow.hpp"
#include "test_util.hpp"

using namespace gridsync;

TEST_CASE("MATPOWER reader reproduces the JSON case electrically") {
    const NetworkCase a = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const NetworkCase b = load_case(testutil::data_path("ieee9.m"), CaseFormat::MatpowerM,
                                    testutil::data_path("ieee9_dyn.json"));
    REQUIRE(a.buses.size() == b.buses.size());
    REQUIRE(a.branches.size() == b.branches.size());
    const AdmittanceMatrix Ya = build_admittance(a);
    const AdmittanceMatrix Yb = build_admittance(b);
    CHECK((Ya.Y - Yb.Y).cwiseAbs().maxCoeff() < 1e-12);

    const PowerFlowSolution sa = solve_power_flow(a, Ya);
    const PowerFlowSolution sb = solve_power_flow(b, Yb);
    REQUIRE(sa.converged);
    REQUIRE(sb.converged);
    CHECK((sa.vm - sb.vm).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((sa.va - sb.va).cwiseAbs().maxCoeff() < 1e-9);

    // dynamic parameters came from the sidecar
    for (size_t i = 0; i < a.generators.size(); ++i) {
        CHECK(b.generators[i].inertia_M == doctest::Approx(a.generators[i].inertia_M));
        CHECK(b.generators[i].damping_D == doctest::Approx(a.generators[i].damping_D));
    }
}

TEST_CASE("MATPOWER case without a sidecar is rejected") {
    CHECK_THROWS_AS(load_case(testutil::data_path("ieee9.m"), CaseFormat::MatpowerM),
                    ParseError);
}

TEST_CASE("malformed JSON raises a parse error") {
    const auto tmp = std::filesystem::temp_directory_path() / "gridsync_malformed.json";
    {
        std::ofstream out(tmp);
        out << "{ \"base_mva\": 100.0, \"buses\": [ oops\n";
    }
    CHECK_THROWS_AS(load_case(tmp, CaseFormat::Json), ParseError);
    std::filesystem::remove(tmp);
}

TEST_CASE("generator on a nonexistent bus is a validation error") {
    const auto tmp = std::filesystem::temp_directory_path() / "gridsync_badbus.json";
    {
        std::ofstream out(tmp);
        out << R"({
          "base_mva": 100.0, "base_freq": 60.0,
          "buses": [{"id": 1, "kind": "slack", "voltage_setpoint": 1.0}],
          "branches": [],
          "generators": [{"bus": 99, "tech": "SG", "H": 5.0, "D": 0.03,
                          "rating_mva": 100.0, "dispatch_p": 0.1}],
          "loads": []
        })";
    }
    CHECK_THROWS_AS(load_case(tmp, CaseFormat::Json), ValidationError);
    std::filesystem::remove(tmp);
}

TEST_CASE("sidecar accepting H converts to M with the case base frequency") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    // H = 6 s at 60 Hz -> M = 2*6/(2*pi*60)
    CHECK(net.generators[0].inertia_M ==
          doctest::Approx(12.0 / (2.0 * std::numbers::pi * 60.0)).epsilon(1e-12));
}

TEST_CASE("39-bus case loads and carries ten dynamic generators") {
    const NetworkCase net = load_case(testutil::data_path("ieee39.json"), CaseFormat::Json);
    CHECK(net.buses.size() == 39);
    CHECK(net.branches.size() == 46);
    CHECK(net.dynamic_generator_count() == 10);
}
