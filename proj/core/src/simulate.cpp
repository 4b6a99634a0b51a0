#include "gridsync/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "gridsync/errors.hpp"

namespace gridsync {

namespace {

// exp([A f; 0 0] * h) = [Phi, Gamma*f; 0, 1]: one exact step of
// dx/dt = A x + f over h.
struct ExactStep {
    Eigen::MatrixXd Phi;
    Eigen::VectorXd Gf;

    static ExactStep make(const Eigen::MatrixXd& A, const Eigen::VectorXd& f, double h) {
        const Eigen::Index N = A.rows();
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(N + 1, N + 1);
        aug.topLeftCorner(N, N) = A * h;
        aug.topRightCorner(N, 1) = f * h;
        const Eigen::MatrixXd E = aug.exp();
        return {E.topLeftCorner(N, N), E.topRightCorner(N, 1)};
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return Phi * x + Gf; }
};

}  // namespace

Eigen::MatrixXd SimulationTrace::frequency() const {
    return (speeds / (2.0 * std::numbers::pi)).array() + base_freq;
}

Eigen::VectorXd SimulationTrace::coi_frequency(const std::vector<GenParams>& gens) const {
    if (static_cast<Eigen::Index>(gens.size()) != speeds.cols())
        throw PreconditionError("coi_frequency: generator list does not match trace columns");
    Eigen::VectorXd w(speeds.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gens[static_cast<size_t>(i)].M;
    const double total = w.sum();
    return (speeds * w / total / (2.0 * std::numbers::pi)).array() + base_freq;
}

SimulationTrace simulate_response(const StateSpaceModel& model,
                                  const std::vector<Perturbation>& perts,
                                  const SimulateOptions& opts) {
    const int n = model.n_gens();
    const Eigen::Index N = model.dim();

    Eigen::EigenSolver<Eigen::MatrixXd> es(model.A, /*computeEigenvectors=*/false);
    const double max_im = es.eigenvalues().imag().cwiseAbs().maxCoeff();
    const double max_re = es.eigenvalues().real().maxCoeff();
    const double norm_A = model.A.cwiseAbs().rowwise().sum().maxCoeff();
    if (!opts.allow_unstable && max_re > 1e-9 * norm_A)
        throw PreconditionError("model is unstable (max Re lambda = " + std::to_string(max_re) +
                                "); pass allow_unstable to simulate anyway");

    double dt = opts.dt;
    const double guard = max_im > 0 ? 0.1 / max_im : std::numeric_limits<double>::infinity();
    if (dt <= 0) {
        dt = std::min({1e-3, 0.5 * guard, opts.horizon / 100.0});
    } else if (dt > guard) {
        throw PreconditionError("dt = " + std::to_string(dt) +
                                " violates the resolution guard 0.1/max|Im lambda| = " +
                                std::to_string(guard));
    }
    if (opts.horizon <= 0) throw PreconditionError("horizon must be positive");

    // Map each perturbation to its speed row.
    struct Event {
        double time;
        int row;           // state row
        double jump;       // speed impulse, rad/s
        double forcing;    // added to the constant forcing vector
    };
    std::vector<Event> events;
    for (const auto& p : perts) {
        if (p.start_time < 0) throw PreconditionError("perturbation start_time must be >= 0");
        int gi = -1;
        if (p.target_bus < 0) {
            // default: the largest-inertia non-reference generator
            double best = -1.0;
            for (int k = 0; k + 1 < n; ++k)
                if (model.gens[static_cast<size_t>(k)].M > best) {
                    best = model.gens[static_cast<size_t>(k)].M;
                    gi = k;
                }
            if (gi < 0) gi = n - 1;  // single-generator model
        } else {
            for (int k = 0; k < n; ++k)
                if (model.gens[static_cast<size_t>(k)].bus == p.target_bus) gi = k;
            if (gi < 0)
                throw PreconditionError("perturbation target bus " +
                                        std::to_string(p.target_bus) +
                                        " hosts no dynamic generator");
        }
        const int row = n - 1 + gi;
        if (p.kind == PerturbationKind::PowerStep) {
            if (std::abs(p.magnitude) > opts.max_power_step)
                throw PreconditionError("power step exceeds the small-signal bound " +
                                        std::to_string(opts.max_power_step) + " p.u.");
            events.push_back(
                {p.start_time, row, 0.0, p.magnitude / model.gens[static_cast<size_t>(gi)].M});
        } else {
            if (std::abs(p.magnitude) > opts.max_speed_impulse)
                throw PreconditionError("speed impulse exceeds the small-signal bound " +
                                        std::to_string(opts.max_speed_impulse) + " rad/s");
            events.push_back({p.start_time, row, p.magnitude, 0.0});
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });

    const auto steps = static_cast<Eigen::Index>(std::llround(opts.horizon / dt));
    SimulationTrace trace;
    trace.base_freq = model.base_freq;
    trace.times.resize(steps + 1);
    trace.speeds.resize(steps + 1, n);
    trace.relative_angles.resize(steps + 1, n - 1);
    for (const auto& g : model.gens) trace.gen_buses.push_back(g.bus);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(N);
    size_t next_event = 0;
    bool forcing_dirty = false;
    const double eps = 1e-12 * std::max(1.0, opts.horizon);
    auto apply_events_at = [&](double t) {
        while (next_event < events.size() && events[next_event].time <= t + eps) {
            const auto& e = events[next_event];
            x(e.row) += e.jump;
            if (e.forcing != 0.0) {
                f(e.row) += e.forcing;
                forcing_dirty = true;
            }
            ++next_event;
        }
    };
    auto record = [&](Eigen::Index k, double t) {
        trace.times(k) = t;
        trace.relative_angles.row(k) = x.head(n - 1).transpose();
        trace.speeds.row(k) = x.tail(n).transpose();
    };

    apply_events_at(0.0);
    record(0, 0.0);

    ExactStep full = ExactStep::make(model.A, f, dt);
    forcing_dirty = false;
    for (Eigen::Index k = 1; k <= steps; ++k) {
        const double t0 = static_cast<double>(k - 1) * dt;
        const double t1 = static_cast<double>(k) * dt;
        if (forcing_dirty) {
            full = ExactStep::make(model.A, f, dt);
            forcing_dirty = false;
        }
        if (next_event >= events.size() || events[next_event].time >= t1 - eps) {
            x = full.apply(x);
        } else {
            // Split the step exactly at every event inside (t0, t1).
            double cur = t0;
            while (next_event < events.size() && events[next_event].time < t1 - eps) {
                const double te = std::max(events[next_event].time, cur);
                if (te > cur + eps) x = ExactStep::make(model.A, f, te - cur).apply(x);
                cur = te;
                apply_events_at(cur);
            }
            x = ExactStep::make(model.A, f, t1 - cur).apply(x);
            forcing_dirty = true;  // conservative: rebuild the full step next time
        }
        apply_events_at(t1);  // boundary events take effect from t1 on
        record(k, t1);
    }
    return trace;
}

SimulationTrace simulate_response(const StateSpaceModel& model, const Perturbation& pert,
                                  const SimulateOptions& opts) {
    return simulate_response(model, std::vector<Perturbation>{pert}, opts);
}

FrequencyMetrics compute_metrics(const SimulationTrace& trace,
                                 const std::vector<GenParams>& gens) {
    const Eigen::Index ns = trace.times.size();
    if (ns == 0) throw PreconditionError("empty trace");
    if (trace.speeds.cwiseAbs().maxCoeff() == 0.0 &&
        trace.relative_angles.cwiseAbs().maxCoeff() == 0.0)
        throw PreconditionError("no event: trace never left the pre-disturbance equilibrium");

    const Eigen::VectorXd coi = trace.coi_frequency(gens);
    const Eigen::VectorXd dev = coi.array() - trace.base_freq;

    Eigen::Index k_ext = 0;
    const double excursion = dev.cwiseAbs().maxCoeff(&k_ext);

    FrequencyMetrics m;
    m.nadir_hz = coi.minCoeff();
    m.f_final_hz = coi(ns - 1);
    m.peak_time_s = excursion > 0.0 ? trace.times(k_ext) : 0.0;

    if (excursion > 0.0) {
        const double lo = 0.1 * excursion, hi = 0.9 * excursion;
        Eigen::Index k10 = -1, k90 = -1;
        for (Eigen::Index k = 0; k < ns; ++k) {
            const double a = std::abs(dev(k));
            if (k10 < 0 && a >= lo) k10 = k;
            if (k90 < 0 && a >= hi) k90 = k;
            if (k90 >= 0) break;
        }
        m.rise_time_s = (k10 >= 0 && k90 >= 0) ? trace.times(k90) - trace.times(k10) : 0.0;

        const double band = 0.02 * excursion;
        Eigen::Index last_out = -1;
        for (Eigen::Index k = 0; k < ns; ++k)
            if (std::abs(coi(k) - m.f_final_hz) > band) last_out = k;
        m.settling_time_s = (last_out >= 0 && last_out + 1 < ns) ? trace.times(last_out + 1) : 0.0;
    }

    const Eigen::MatrixXd f = trace.frequency();
    m.per_gen_nadir_hz.resize(static_cast<size_t>(f.cols()));
    for (Eigen::Index c = 0; c < f.cols(); ++c)
        m.per_gen_nadir_hz[static_cast<size_t>(c)] = f.col(c).minCoeff();
    return m;
}

}  // namespace gridsync
