#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridsync/modal.hpp"
#include "gridsync/network.hpp"
#include "gridsync/simulate.hpp"

namespace gridsync {

enum class TechMixPolicy {
    AllSg,        // base: every generator a synchronous machine
    AllGfmVsm,    // same parameters, VSM labels
    AllGfmDroop,  // 0.01x inertia, 2x damping, droop labels
    GflFraction,  // each non-slack generator replaced by GFL with probability
                  // gfl_fraction; the slack generator always stays dynamic
};

std::string to_string(TechMixPolicy p);
TechMixPolicy tech_mix_from_string(const std::string& s);

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool valid() const { return lo >= 0.0 && hi >= lo; }
};

struct SweepConfig {
    int n_scenarios = 1000;
    std::uint64_t seed = 42;
    Range inertia_range{0.8, 8.0};      // inertia constant H, seconds
    Range damping_range{0.005, 0.05};   // D, p.u. per rad/s
    Range load_scale_range{0.8, 1.2};   // global multiplier on all loads
    Range rating_range{1.0, 2.5};       // rating_S as multiple of dispatch
    TechMixPolicy tech_mix = TechMixPolicy::AllSg;
    double gfl_fraction = 0.5;          // used by GflFraction
    bool per_load_scaling = false;      // draw one multiplier per load instead
                                        // of one global factor
    // Event applied to every scenario: power step at the largest-rating
    // non-reference generator.
    double step_magnitude = -0.05;      // p.u.
    double horizon = 20.0;              // s
    PowerFlowOptions pf;
    int threads = 0;                    // 0 = hardware concurrency
};

struct SweepRecord {
    int scenario_id = 0;
    double h_agg = 0.0;      // capacity-weighted inertia constant, s
    double d_agg = 0.0;      // capacity-weighted damping
    double load_scale = 0.0;
    std::string tech_assignment;  // e.g. "SG,SG,GFL"
    bool case_valid = false;
    bool powerflow_converged = false;
    bool analyzed = false;  // eigenvalues computed
    Verdict verdict = Verdict::Unstable;
    double max_re_lambda = 0.0;
    bool has_nadir = false;
    double nadir_hz = 0.0;   // worst per-generator frequency minimum
    double coi_nadir_hz = 0.0;
    std::string diagnostic;  // failure note, empty on success
};

// Deterministic function of (cfg.seed, scenario_id): draws per-generator H
// and D, the load scaling, ratings, and the technology assignment, in that
// documented order.  Invalid draws are returned (and recorded), not thrown.
NetworkCase sample_scenario(const SweepConfig& cfg, const NetworkCase& base, int scenario_id);

// Capacity-weighted aggregates H_agg = sum H_i S_i / sum S_i (and likewise
// for damping) over all generators.  Throws PreconditionError when the total
// capacity is zero.
std::pair<double, double> aggregate(const std::vector<GeneratorSpec>& gens, double base_freq);

// Runs the full pipeline per scenario (power flow -> reduction ->
// linearization -> eigenvalues -> simulation -> metrics); every scenario
// yields a record regardless of failure mode, ordered by scenario_id.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const NetworkCase& base);

// Versioned records CSV (schema v1), 12 significant digits, byte-stable.
void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records);

// Heatmap rows (d_agg, h_agg, nadir, verdict) with 59.5 Hz / 48.5 Hz
// threshold flags, for converged scenarios with a nadir.
void emit_heatmap(std::ostream& os, const std::vector<SweepRecord>& records);

}  // namespace gridsync
