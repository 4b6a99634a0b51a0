#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridsync {

using Complex = std::complex<double>;

enum class BusKind { Slack, Pv, Pq };

enum class GenTech { Sg, GfmVsm, GfmDroop, Gfl };

std::string to_string(BusKind kind);
std::string to_string(GenTech tech);
BusKind bus_kind_from_string(const std::string& s);
GenTech gen_tech_from_string(const std::string& s);

struct BusSpec {
    int id = 0;
    BusKind kind = BusKind::Pq;
    double voltage_setpoint = 1.0;  // p.u., used for slack/pv
    double angle_setpoint = 0.0;    // rad, used for slack
};

struct BranchSpec {
    int from_bus = 0;
    int to_bus = 0;
    Complex series_impedance;      // r + jx, p.u.
    double shunt_susceptance = 0;  // total line charging, p.u.
};

// Inertia is stored as M = 2H/omega_base in p.u.*s^2/rad, the coefficient
// that multiplies the speed derivative in the equation of motion; damping D
// is p.u. power per rad/s of speed deviation.  Case files may specify the
// inertia constant H in seconds instead, which is converted on load.
struct GeneratorSpec {
    int bus = 0;
    GenTech tech = GenTech::Sg;
    double inertia_M = 0.0;   // p.u.*s^2/rad; 0 for GFL
    double damping_D = 0.0;   // p.u./(rad/s); 0 for GFL
    double rating_S = 0.0;    // MVA capacity
    double dispatch_P = 0.0;  // p.u. active power setpoint
    double gfl_Q = 0.0;       // p.u. reactive injection assumed for GFL folding

    bool is_dynamic() const { return tech != GenTech::Gfl; }
    double inertia_constant_H(double base_freq) const;  // seconds
};

struct LoadSpec {
    int bus = 0;
    double P = 0.0;  // p.u. consumed
    double Q = 0.0;  // p.u. consumed
};

// The single source of truth for a study.  Immutable after construction;
// safe to share read-only across concurrent workers.
struct NetworkCase {
    double base_mva = 100.0;
    double base_freq = 60.0;  // Hz
    std::vector<BusSpec> buses;
    std::vector<BranchSpec> branches;
    std::vector<GeneratorSpec> generators;
    std::vector<LoadSpec> loads;

    double omega_base() const;  // 2*pi*base_freq, rad/s

    const BusSpec* find_bus(int id) const;
    int bus_index(int id) const;  // dense index into buses, -1 if absent
    int slack_bus_id() const;     // -1 if no slack

    std::vector<GeneratorSpec> dynamic_generators() const;
    size_t dynamic_generator_count() const;
};

struct ValidationIssue {
    std::string code;      // stable identifier, e.g. "dangling_bus_ref"
    std::string message;
    std::string location;  // "bus 5", "generator 2", ...
    bool is_warning = false;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const;  // true when no non-warning issue is present
    std::string summary() const;
};

// Checks every type invariant plus the stability precondition that at least
// one non-GFL generator is present.  Pure: same case, same report.
ValidationReport validate_case(const NetworkCase& net);

}  // namespace gridsync
