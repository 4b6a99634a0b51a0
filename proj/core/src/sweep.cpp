#include "gridsync/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>

#include "gridsync/errors.hpp"
#include "gridsync/report.hpp"
#include "gridsync/rng.hpp"

namespace gridsync {

std::string to_string(TechMixPolicy p) {
    switch (p) {
        case TechMixPolicy::AllSg: return "all_sg";
        case TechMixPolicy::AllGfmVsm: return "all_gfm_vsm";
        case TechMixPolicy::AllGfmDroop: return "all_gfm_droop";
        case TechMixPolicy::GflFraction: return "gfl_fraction";
    }
    return "?";
}

TechMixPolicy tech_mix_from_string(const std::string& s) {
    if (s == "all_sg") return TechMixPolicy::AllSg;
    if (s == "all_gfm_vsm") return TechMixPolicy::AllGfmVsm;
    if (s == "all_gfm_droop") return TechMixPolicy::AllGfmDroop;
    if (s == "gfl_fraction") return TechMixPolicy::GflFraction;
    throw ParseError("unknown tech mix preset '" + s +
                     "' (expected all_sg|all_gfm_vsm|all_gfm_droop|gfl_fraction)");
}

NetworkCase sample_scenario(const SweepConfig& cfg, const NetworkCase& base, int scenario_id) {
    // Draw order is part of the records contract: per-generator H, then D,
    // then load scaling, then rating multipliers, then technology draws.
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(scenario_id));
    NetworkCase net = base;
    const double wb = net.omega_base();
    const int slack = net.slack_bus_id();

    std::vector<double> H(net.generators.size()), D(net.generators.size());
    for (auto& h : H) h = rng.uniform(cfg.inertia_range.lo, cfg.inertia_range.hi);
    for (auto& d : D) d = rng.uniform(cfg.damping_range.lo, cfg.damping_range.hi);

    std::vector<double> load_scale(net.loads.size(),
                                   rng.uniform(cfg.load_scale_range.lo, cfg.load_scale_range.hi));
    if (cfg.per_load_scaling)
        for (size_t i = 1; i < load_scale.size(); ++i)
            load_scale[i] = rng.uniform(cfg.load_scale_range.lo, cfg.load_scale_range.hi);
    double total_before = 0.0, total_after = 0.0;
    for (size_t i = 0; i < net.loads.size(); ++i) {
        total_before += net.loads[i].P;
        net.loads[i].P *= load_scale[i];
        net.loads[i].Q *= load_scale[i];
        total_after += net.loads[i].P;
    }
    // Non-slack dispatch follows the load so the slack bus is not left to
    // absorb the whole change.
    const double dispatch_scale = total_before > 0 ? total_after / total_before : 1.0;
    for (auto& g : net.generators)
        if (g.bus != slack) g.dispatch_P *= dispatch_scale;

    for (size_t k = 0; k < net.generators.size(); ++k) {
        auto& g = net.generators[k];
        const double mult = rng.uniform(cfg.rating_range.lo, cfg.rating_range.hi);
        if (g.dispatch_P > 0) g.rating_S = g.dispatch_P * net.base_mva * mult;
        g.inertia_M = 2.0 * H[k] / wb;
        g.damping_D = D[k];
        g.tech = GenTech::Sg;
    }
    switch (cfg.tech_mix) {
        case TechMixPolicy::AllSg:
            break;
        case TechMixPolicy::AllGfmVsm:
            for (auto& g : net.generators) g.tech = GenTech::GfmVsm;
            break;
        case TechMixPolicy::AllGfmDroop:
            for (auto& g : net.generators) {
                g.tech = GenTech::GfmDroop;
                g.inertia_M *= 0.01;
                g.damping_D *= 2.0;
            }
            break;
        case TechMixPolicy::GflFraction:
            for (auto& g : net.generators) {
                const bool to_gfl = rng.next_double() < cfg.gfl_fraction;
                if (to_gfl && g.bus != slack) {
                    g.tech = GenTech::Gfl;
                    g.inertia_M = 0.0;
                    g.damping_D = 0.0;
                }
            }
            break;
    }
    // A bus whose generators all became GFL can no longer regulate voltage.
    for (auto& b : net.buses) {
        if (b.kind != BusKind::Pv) continue;
        bool any = false, any_dynamic = false;
        for (const auto& g : net.generators) {
            if (g.bus != b.id) continue;
            any = true;
            any_dynamic |= g.is_dynamic();
        }
        if (any && !any_dynamic) b.kind = BusKind::Pq;
    }
    return net;
}

std::pair<double, double> aggregate(const std::vector<GeneratorSpec>& gens, double base_freq) {
    double sw = 0.0, swh = 0.0, swd = 0.0;
    for (const auto& g : gens) {
        sw += g.rating_S;
        swh += g.rating_S * g.inertia_constant_H(base_freq);
        swd += g.rating_S * g.damping_D;
    }
    if (sw <= 0.0) throw PreconditionError("aggregate: total generator capacity is zero");
    return {swh / sw, swd / sw};
}

namespace {

SweepRecord evaluate_scenario(const SweepConfig& cfg, const NetworkCase& base, int sid) {
    SweepRecord rec;
    rec.scenario_id = sid;
    NetworkCase net = sample_scenario(cfg, base, sid);

    {
        std::string techs;
        for (const auto& g : net.generators) {
            if (!techs.empty()) techs += "|";
            techs += to_string(g.tech);
        }
        rec.tech_assignment = techs;
    }
    rec.load_scale = base.loads.empty() || base.loads[0].P == 0.0
                         ? 1.0
                         : net.loads[0].P / base.loads[0].P;
    try {
        std::tie(rec.h_agg, rec.d_agg) = aggregate(net.generators, net.base_freq);
    } catch (const Error& e) {
        rec.diagnostic = e.what();
        return rec;
    }

    const ValidationReport rep = validate_case(net);
    rec.case_valid = rep.ok();
    if (!rec.case_valid) {
        rec.diagnostic = "invalid case: " + rep.issues.front().code;
        return rec;
    }
    try {
        const AdmittanceMatrix Y = build_admittance(net);
        const PowerFlowSolution sol = solve_power_flow(net, Y, cfg.pf);
        rec.powerflow_converged = sol.converged;
        if (!sol.converged) {
            rec.diagnostic = "power flow did not converge";
            return rec;
        }
        const ReducedNetwork red = reduce_to_generators(net, Y, sol);
        const Laplacian lap = build_laplacian(red);
        const StateSpaceModel model = assemble_state_matrix(lap, red, net);
        const ModalResult modal = eigen_analysis(model);
        rec.analyzed = true;
        rec.verdict = modal.verdict;
        rec.max_re_lambda = modal.max_re;

        // Scenario event: speed impulse at the largest-rating non-reference
        // generator.  Severity is the worst per-generator frequency once the
        // injected kick has propagated (t >= response window); the first
        // instants are the disturbance itself, not the system's answer to it.
        int target_bus = -1;
        double best = -1.0;
        for (const auto& g : net.generators) {
            if (!g.is_dynamic() || g.bus == model.reference_bus) continue;
            if (g.rating_S > best) {
                best = g.rating_S;
                target_bus = g.bus;
            }
        }
        Perturbation pert;
        pert.kind = PerturbationKind::SpeedImpulse;
        pert.target_bus = target_bus;  // -1 falls back to largest inertia
        pert.magnitude = -0.5;
        SimulateOptions sopts;
        sopts.horizon = cfg.horizon;
        sopts.dt = -1.0;  // resolution picked from the spectrum
        sopts.allow_unstable = true;
        const SimulationTrace trace = simulate_response(model, pert, sopts);
        const Eigen::MatrixXd f = trace.frequency();
        const double window = std::min(1.0, 0.25 * cfg.horizon);
        double nadir = trace.base_freq;
        for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
            if (trace.times(k) < window) continue;
            nadir = std::min(nadir, f.row(k).minCoeff());
        }
        rec.nadir_hz = nadir;
        rec.coi_nadir_hz = trace.coi_frequency(model.gens).minCoeff();
        rec.has_nadir = true;
    } catch (const Error& e) {
        rec.diagnostic = e.what();
    }
    return rec;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const NetworkCase& base) {
    if (cfg.n_scenarios < 1) throw PreconditionError("n_scenarios must be >= 1");
    if (!cfg.inertia_range.valid() || !cfg.damping_range.valid() ||
        !cfg.load_scale_range.valid() || !cfg.rating_range.valid())
        throw PreconditionError("sweep ranges must satisfy 0 <= lo <= hi");

    std::vector<SweepRecord> records(static_cast<size_t>(cfg.n_scenarios));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads =
        cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                        : std::min(hw, static_cast<unsigned>(cfg.n_scenarios));

    // Scenarios are independent; records land in their own slots, so the
    // result is identical for any thread count.
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int sid = next.fetch_add(1);
            if (sid >= cfg.n_scenarios) return;
            records[static_cast<size_t>(sid)] = evaluate_scenario(cfg, base, sid);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return records;
}

void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "# gridsync sweep records schema v1\n";
    os << "scenario_id,h_agg_s,d_agg,load_scale,tech_assignment,case_valid,"
          "powerflow_converged,verdict,max_re_lambda,nadir_hz,coi_nadir_hz,diagnostic\n";
    for (const auto& r : records) {
        std::string diag = r.diagnostic;
        for (auto& c : diag)
            if (c == ',' || c == '\n') c = ';';
        os << r.scenario_id << ',' << format_sig(r.h_agg) << ',' << format_sig(r.d_agg) << ','
           << format_sig(r.load_scale) << ',' << r.tech_assignment << ','
           << (r.case_valid ? 1 : 0) << ',' << (r.powerflow_converged ? 1 : 0) << ','
           << (r.analyzed ? to_string(r.verdict) : std::string()) << ','
           << (r.analyzed ? format_sig(r.max_re_lambda) : std::string()) << ','
           << (r.has_nadir ? format_sig(r.nadir_hz) : std::string()) << ','
           << (r.has_nadir ? format_sig(r.coi_nadir_hz) : std::string()) << ','
           << diag << '\n';
    }
}

void emit_heatmap(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "d_agg,h_agg_s,nadir_hz,verdict,below_59_5,below_48_5\n";
    for (const auto& r : records) {
        if (!r.powerflow_converged || !r.has_nadir) continue;
        os << format_sig(r.d_agg) << ',' << format_sig(r.h_agg) << ',' << format_sig(r.nadir_hz)
           << ',' << to_string(r.verdict) << ',' << (r.nadir_hz < 59.5 ? 1 : 0) << ','
           << (r.nadir_hz < 48.5 ? 1 : 0) << '\n';
    }
}

}  // namespace gridsync
