#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gridsync/linearize.hpp"

namespace gridsync {

enum class PerturbationKind { PowerStep, SpeedImpulse };

struct Perturbation {
    PerturbationKind kind = PerturbationKind::PowerStep;
    int target_bus = -1;     // bus of the perturbed generator; -1 = default
                             // (largest-rating non-reference generator)
    double magnitude = 0.0;  // p.u. power (step) or rad/s (impulse)
    double start_time = 0.0; // s
};

struct SimulationTrace {
    Eigen::VectorXd times;            // s, uniform grid from 0
    Eigen::MatrixXd speeds;           // rows=samples, cols=gens, rad/s deviation
    Eigen::MatrixXd relative_angles;  // rows=samples, cols=n-1, rad
    std::vector<int> gen_buses;       // column order (reference last)
    double base_freq = 60.0;

    // f_i(t) = base_freq + w_i(t)/(2*pi), Hz
    Eigen::MatrixXd frequency() const;
    // Center-of-inertia frequency, inertia-weighted mean over generators.
    Eigen::VectorXd coi_frequency(const std::vector<GenParams>& gens) const;
};

struct SimulateOptions {
    double horizon = 30.0;  // s
    double dt = 1e-3;       // s; <= 0 picks dt automatically from the spectrum
    bool allow_unstable = false;
    // Small-signal bounds on perturbation magnitudes.
    double max_power_step = 0.1;                       // p.u.
    double max_speed_impulse = 2.0 * 3.14159265358979; // rad/s (1 Hz)
};

// Integrates dx/dt = A x + b u(t) with the exact matrix-exponential stepper
// for piecewise-constant input (a power step enters through b at the target's
// speed row scaled by 1/M; a speed impulse is a state jump at start_time).
// Halving dt reproduces shared samples to roundoff.  Throws PreconditionError
// when dt violates the resolution guard dt <= 0.1/max|Im lambda| or the model
// is unstable without allow_unstable.
SimulationTrace simulate_response(const StateSpaceModel& model, const Perturbation& pert,
                                  const SimulateOptions& opts = {});

// Response to several perturbations applied together (superposition holds).
SimulationTrace simulate_response(const StateSpaceModel& model,
                                  const std::vector<Perturbation>& perts,
                                  const SimulateOptions& opts = {});

struct FrequencyMetrics {
    double nadir_hz = 0.0;       // min of center-of-inertia frequency
    double rise_time_s = 0.0;    // 10% -> 90% traversal of the excursion
    double peak_time_s = 0.0;    // time of the extremum
    double settling_time_s = 0.0;  // last exit from the 2%-of-excursion band
    double f_final_hz = 0.0;     // trace end value
    std::vector<double> per_gen_nadir_hz;  // per generator, trace column order
};

// Extracts metrics from the center-of-inertia frequency of a trace.  Throws
// PreconditionError("no event") when the trace never leaves the baseline.
FrequencyMetrics compute_metrics(const SimulationTrace& trace,
                                 const std::vector<GenParams>& gens);

}  // namespace gridsync
