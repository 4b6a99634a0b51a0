#include "gridsync/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "gridsync/errors.hpp"

namespace gridsync {

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Slack: return "slack";
        case BusKind::Pv: return "pv";
        case BusKind::Pq: return "pq";
    }
    return "?";
}

std::string to_string(GenTech tech) {
    switch (tech) {
        case GenTech::Sg: return "SG";
        case GenTech::GfmVsm: return "GFM_VSM";
        case GenTech::GfmDroop: return "GFM_DROOP";
        case GenTech::Gfl: return "GFL";
    }
    return "?";
}

BusKind bus_kind_from_string(const std::string& s) {
    if (s == "slack") return BusKind::Slack;
    if (s == "pv") return BusKind::Pv;
    if (s == "pq") return BusKind::Pq;
    throw ParseError("unknown bus kind '" + s + "' (expected slack|pv|pq)");
}

GenTech gen_tech_from_string(const std::string& s) {
    if (s == "SG") return GenTech::Sg;
    if (s == "GFM_VSM") return GenTech::GfmVsm;
    if (s == "GFM_DROOP") return GenTech::GfmDroop;
    if (s == "GFL") return GenTech::Gfl;
    throw ParseError("unknown generator tech '" + s + "' (expected SG|GFM_VSM|GFM_DROOP|GFL)");
}

double GeneratorSpec::inertia_constant_H(double base_freq) const {
    return inertia_M * std::numbers::pi * base_freq;  // H = M * omega_base / 2
}

double NetworkCase::omega_base() const { return 2.0 * std::numbers::pi * base_freq; }

const BusSpec* NetworkCase::find_bus(int id) const {
    for (const auto& b : buses)
        if (b.id == id) return &b;
    return nullptr;
}

int NetworkCase::bus_index(int id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

int NetworkCase::slack_bus_id() const {
    for (const auto& b : buses)
        if (b.kind == BusKind::Slack) return b.id;
    return -1;
}

std::vector<GeneratorSpec> NetworkCase::dynamic_generators() const {
    std::vector<GeneratorSpec> out;
    for (const auto& g : generators)
        if (g.is_dynamic()) out.push_back(g);
    return out;
}

size_t NetworkCase::dynamic_generator_count() const {
    return static_cast<size_t>(
        std::count_if(generators.begin(), generators.end(),
                      [](const GeneratorSpec& g) { return g.is_dynamic(); }));
}

bool ValidationReport::ok() const {
    return std::none_of(issues.begin(), issues.end(),
                        [](const ValidationIssue& i) { return !i.is_warning; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& i : issues)
        os << (i.is_warning ? "warning" : "error") << " [" << i.code << "] " << i.location << ": "
           << i.message << "\n";
    return os.str();
}

namespace {

void add_issue(ValidationReport& rep, std::string code, std::string loc, std::string msg,
               bool warning = false) {
    rep.issues.push_back({std::move(code), std::move(msg), std::move(loc), warning});
}

}  // namespace

ValidationReport validate_case(const NetworkCase& net) {
    ValidationReport rep;

    if (net.base_mva <= 0) add_issue(rep, "bad_base", "case", "base_mva must be positive");
    if (net.base_freq <= 0) add_issue(rep, "bad_base", "case", "base_freq must be positive");

    std::set<int> ids;
    int slack_count = 0;
    for (const auto& b : net.buses) {
        if (!ids.insert(b.id).second)
            add_issue(rep, "duplicate_bus", "bus " + std::to_string(b.id), "duplicate bus id");
        if (b.kind == BusKind::Slack) ++slack_count;
        if (b.kind != BusKind::Pq && b.voltage_setpoint <= 0)
            add_issue(rep, "bad_voltage_setpoint", "bus " + std::to_string(b.id),
                      "voltage setpoint must be positive");
    }
    if (slack_count != 1)
        add_issue(rep, "slack_count", "case",
                  "exactly one slack bus required, found " + std::to_string(slack_count));

    for (size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        const std::string loc = "branch " + std::to_string(k);
        if (!ids.count(br.from_bus) || !ids.count(br.to_bus))
            add_issue(rep, "dangling_bus_ref", loc, "branch endpoint references a missing bus");
        if (br.from_bus == br.to_bus) add_issue(rep, "self_loop", loc, "branch endpoints coincide");
        if (std::abs(br.series_impedance) <= 0)
            add_issue(rep, "zero_impedance", loc, "series impedance magnitude must be positive");
    }

    size_t dynamic_count = 0;
    for (size_t k = 0; k < net.generators.size(); ++k) {
        const auto& g = net.generators[k];
        const std::string loc = "generator " + std::to_string(k);
        if (!ids.count(g.bus)) add_issue(rep, "dangling_bus_ref", loc, "generator bus is missing");
        switch (g.tech) {
            case GenTech::Sg:
            case GenTech::GfmVsm:
                if (g.inertia_M <= 0) add_issue(rep, "bad_inertia", loc, "M must be positive");
                if (g.damping_D <= 0) add_issue(rep, "bad_damping", loc, "D must be positive");
                break;
            case GenTech::GfmDroop:
                if (g.inertia_M <= 0)
                    add_issue(rep, "bad_inertia", loc, "M must be positive (small) for droop GFM");
                if (g.damping_D <= 0) add_issue(rep, "bad_damping", loc, "D must be positive");
                break;
            case GenTech::Gfl:
                // GFL carries M = D = 0 in storage but stays tagged so reports
                // can state penetration.
                if (g.inertia_M != 0 || g.damping_D != 0)
                    add_issue(rep, "gfl_dynamics_ignored", loc,
                              "M and D are ignored for GFL generators", /*warning=*/true);
                break;
        }
        if (g.tech != GenTech::Gfl) ++dynamic_count;
        if (g.rating_S < 0) add_issue(rep, "bad_rating", loc, "rating_S must be non-negative");
        if (g.dispatch_P < 0)
            add_issue(rep, "bad_dispatch", loc, "dispatch_P must be non-negative");
        else if (g.rating_S > 0 && g.dispatch_P * net.base_mva > g.rating_S * (1 + 1e-9))
            add_issue(rep, "dispatch_exceeds_rating", loc,
                      "dispatch exceeds MVA rating (reserve-margin convention)");
    }
    if (dynamic_count == 0 && !net.generators.empty())
        add_issue(rep, "no_dynamic_generator", "case",
                  "no dynamic (non-GFL) generator present; synchronization is infeasible");

    for (size_t k = 0; k < net.loads.size(); ++k) {
        if (!ids.count(net.loads[k].bus))
            add_issue(rep, "dangling_bus_ref", "load " + std::to_string(k), "load bus is missing");
    }

    // A PV bus whose only generators are GFL cannot actually regulate voltage;
    // folding then assumes Q = 0 for the GFL and shifts the equilibrium.
    for (const auto& b : net.buses) {
        if (b.kind != BusKind::Pv) continue;
        bool any = false, any_dynamic = false;
        for (const auto& g : net.generators) {
            if (g.bus != b.id) continue;
            any = true;
            any_dynamic |= g.is_dynamic();
        }
        if (any && !any_dynamic)
            add_issue(rep, "gfl_only_pv_bus", "bus " + std::to_string(b.id),
                      "PV bus held only by GFL generators; fold assumes their Q", true);
    }

    return rep;
}

}  // namespace gridsync
