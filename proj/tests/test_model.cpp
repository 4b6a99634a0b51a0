#include <doctest.h>

#include <fstream>
#include <numbers>

#include "gridsync/case_io.hpp"
#include "gridsync/errors.hpp"
#include "gridsync/network.hpp"
#include "test_util.hpp"

using namespace gridsync;

TEST_CASE("well-formed 9-bus case validates clean") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    CHECK(net.buses.size() == 9);
    CHECK(net.branches.size() == 9);
    CHECK(net.generators.size() == 3);
    const ValidationReport rep = validate_case(net);
    CHECK(rep.ok());
    CHECK(rep.issues.empty());
}

TEST_CASE("validation is pure: same case, same report") {
    NetworkCase net = testutil::two_gen_case();
    net.generators[1].damping_D = 0.0;
    const std::string a = validate_case(net).summary();
    const std::string b = validate_case(net).summary();
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("all-GFL case reports the stability precondition") {
    NetworkCase net = testutil::two_gen_case();
    for (auto& g : net.generators) {
        g.tech = GenTech::Gfl;
        g.inertia_M = 0.0;
        g.damping_D = 0.0;
    }
    const ValidationReport rep = validate_case(net);
    CHECK(!rep.ok());
    bool found = false;
    for (const auto& i : rep.issues) found |= i.code == "no_dynamic_generator";
    CHECK(found);
}

TEST_CASE("droop generator with zero damping violates the damping invariant") {
    NetworkCase net = testutil::two_gen_case();
    net.generators[1].tech = GenTech::GfmDroop;
    net.generators[1].damping_D = 0.0;
    const ValidationReport rep = validate_case(net);
    CHECK(!rep.ok());
    bool found = false;
    for (const auto& i : rep.issues) found |= i.code == "bad_damping";
    CHECK(found);
}

TEST_CASE("dangling references and missing slack are reported") {
    NetworkCase net = testutil::two_gen_case();
    net.generators[0].bus = 99;
    net.buses[0].kind = BusKind::Pv;
    const ValidationReport rep = validate_case(net);
    bool dangling = false, slack = false;
    for (const auto& i : rep.issues) {
        dangling |= i.code == "dangling_bus_ref";
        slack |= i.code == "slack_count";
    }
    CHECK(dangling);
    CHECK(slack);
}

TEST_CASE("dispatch above rating is flagged") {
    NetworkCase net = testutil::two_gen_case();
    net.generators[0].rating_S = 30.0;  // dispatch 0.4 pu * 100 MVA = 40 MVA
    const ValidationReport rep = validate_case(net);
    bool found = false;
    for (const auto& i : rep.issues) found |= i.code == "dispatch_exceeds_rating";
    CHECK(found);
}

TEST_CASE("load_case of serialize_case is the identity") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const std::string text = serialize_case(net);
    const auto tmp = std::filesystem::temp_directory_path() / "gridsync_roundtrip.json";
    {
        std::ofstream out(tmp);
        out << text;
    }
    const NetworkCase back = load_case(tmp, CaseFormat::Json);
    REQUIRE(back.buses.size() == net.buses.size());
    REQUIRE(back.branches.size() == net.branches.size());
    REQUIRE(back.generators.size() == net.generators.size());
    REQUIRE(back.loads.size() == net.loads.size());
    CHECK(back.base_mva == net.base_mva);
    CHECK(back.base_freq == net.base_freq);
    for (size_t i = 0; i < net.buses.size(); ++i) {
        CHECK(back.buses[i].id == net.buses[i].id);
        CHECK(back.buses[i].kind == net.buses[i].kind);
        CHECK(back.buses[i].voltage_setpoint == net.buses[i].voltage_setpoint);
    }
    for (size_t i = 0; i < net.branches.size(); ++i) {
        CHECK(back.branches[i].series_impedance == net.branches[i].series_impedance);
        CHECK(back.branches[i].shunt_susceptance == net.branches[i].shunt_susceptance);
    }
    for (size_t i = 0; i < net.generators.size(); ++i) {
        CHECK(back.generators[i].inertia_M == net.generators[i].inertia_M);
        CHECK(back.generators[i].damping_D == net.generators[i].damping_D);
        CHECK(back.generators[i].dispatch_P == net.generators[i].dispatch_P);
        CHECK(back.generators[i].rating_S == net.generators[i].rating_S);
        CHECK(back.generators[i].tech == net.generators[i].tech);
    }
    std::filesystem::remove(tmp);
}

TEST_CASE("inertia constant H converts to M and back") {
    GeneratorSpec g;
    g.inertia_M = 2.0 * 6.0 / (2.0 * std::numbers::pi * 60.0);
    CHECK(g.inertia_constant_H(60.0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("GFL generators stay tagged with zeroed dynamics") {
    NetworkCase net = testutil::two_gen_case();
    net.generators.push_back({3, GenTech::Gfl, 0.0, 0.0, 50.0, 0.2, 0.0});
    const ValidationReport rep = validate_case(net);
    CHECK(rep.ok());  // warning-free GFL with zero M, D
    CHECK(net.dynamic_generator_count() == 2);
    CHECK(net.generators[2].is_dynamic() == false);
}
