#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gridsync/case_io.hpp"
#include "gridsync/errors.hpp"
#include "gridsync/linearize.hpp"
#include "gridsync/modal.hpp"
#include "gridsync/oracles.hpp"
#include "gridsync/report.hpp"
#include "gridsync/simulate.hpp"
#include "gridsync/sweep.hpp"

namespace fs = std::filesystem;
using namespace gridsync;

namespace {

constexpr const char* kVersion = "0.3.0";

// Exit codes: 0 success/stable, 1 error, 2 analyzed-unstable, 3 degenerate
// input (no event).
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitDegenerate = 3;

struct GlobalArgs {
    std::string case_path;
    std::string dyn_path;
    std::string out_dir;
    std::uint64_t seed = 42;
    std::string format = "json";
};

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%FT%TZ", &tm);
    return buf;
}

NetworkCase load_from(const GlobalArgs& g) {
    return load_case_auto(g.case_path, g.dyn_path.empty() ? fs::path{} : fs::path(g.dyn_path));
}

std::ofstream open_out(const GlobalArgs& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    const fs::path p = fs::path(g.out_dir) / name;
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

void emit_manifest(const GlobalArgs& g, const std::string& command_line,
                   const std::string& started) {
    RunManifest m;
    m.tool_version = kVersion;
    m.command_line = command_line;
    m.seed = g.seed;
    m.started_at = started;
    m.finished_at = iso_now();
    m.input_digests.emplace_back(g.case_path, fnv1a64_file(g.case_path));
    if (!g.dyn_path.empty()) m.input_digests.emplace_back(g.dyn_path, fnv1a64_file(g.dyn_path));
    auto out = open_out(g, "manifest.json");
    write_manifest_json(out, m);
}

bool parse_range(const std::string& text, Range& r) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return false;
    try {
        r.lo = std::stod(text.substr(0, colon));
        r.hi = std::stod(text.substr(colon + 1));
    } catch (...) {
        return false;
    }
    return r.valid();
}

StateSpaceModel analyze_pipeline(const NetworkCase& net, int reference_bus,
                                 ReducedNetwork* red_out = nullptr,
                                 Laplacian* lap_out = nullptr) {
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    if (!sol.converged)
        throw NumericalError("power flow did not converge (mismatch " +
                             std::to_string(sol.max_mismatch) + " after " +
                             std::to_string(sol.iterations) + " iterations)");
    ReducedNetwork red = reduce_to_generators(net, Y, sol);
    Laplacian lap = build_laplacian(red);
    StateSpaceModel model = assemble_state_matrix(lap, red, net, reference_bus);
    if (red_out) *red_out = std::move(red);
    if (lap_out) *lap_out = std::move(lap);
    return model;
}

int default_target_bus(const NetworkCase& net, const StateSpaceModel& model) {
    int bus = -1;
    double best = -1.0;
    for (const auto& g : net.generators) {
        if (!g.is_dynamic() || g.bus == model.reference_bus) continue;
        if (g.rating_S > best) {
            best = g.rating_S;
            bus = g.bus;
        }
    }
    return bus;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridsync: small-signal synchronization analysis for power networks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--case", g.case_path, "network case file (.json or MATPOWER .m)");
    app.add_option("--dyn", g.dyn_path, "dynamic-parameter JSON sidecar");
    app.add_option("--out-dir", g.out_dir, "directory for output files")->default_val("out");
    app.add_option("--seed", g.seed, "random seed for sweeps");
    app.add_option("--format", g.format, "solution format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    // global flags are accepted on either side of the subcommand
    app.fallthrough();

    auto* c_validate = app.add_subcommand("validate", "check case invariants");
    auto* c_pf = app.add_subcommand("powerflow", "solve the AC power flow");
    double pf_tol = 1e-8;
    int pf_maxit = 50;
    c_pf->add_option("--tol", pf_tol, "mismatch tolerance, p.u.");
    c_pf->add_option("--max-iter", pf_maxit, "iteration cap");

    auto* c_reduce = app.add_subcommand("reduce", "fold loads/GFL and Kron-reduce");

    auto* c_analyze = app.add_subcommand("analyze", "assemble the state matrix and classify modes");
    int reference_bus = -1;
    bool with_loci = false;
    c_analyze->add_option("--reference-bus", reference_bus, "reference generator bus");
    c_analyze->add_flag("--loci", with_loci, "emit eigenvalue loci for the stock M/D scalings");

    auto* c_sim = app.add_subcommand("simulate", "integrate the response to a perturbation");
    std::string pert_kind = "step";
    double magnitude = -0.05, start_time = 0.0, horizon = 30.0, dt = -1.0;
    int target_bus = -1;
    bool allow_unstable = false;
    c_sim->add_option("--kind", pert_kind, "perturbation kind: step|impulse")
        ->check(CLI::IsMember({"step", "impulse"}));
    c_sim->add_option("--magnitude", magnitude, "p.u. power (step) or rad/s (impulse)");
    c_sim->add_option("--target-bus", target_bus, "perturbed generator bus");
    c_sim->add_option("--start", start_time, "event time, s");
    c_sim->add_option("--horizon", horizon, "simulation span, s");
    c_sim->add_option("--dt", dt, "sample step, s (<=0: automatic)");
    c_sim->add_option("--reference-bus", reference_bus, "reference generator bus");
    c_sim->add_flag("--allow-unstable", allow_unstable, "simulate unstable models");

    auto* c_sweep = app.add_subcommand("sweep", "Monte Carlo inertia/damping/loading screening");
    SweepConfig cfg;
    std::string h_range, d_range, load_range, rating_range, tech_mix = "all_sg";
    c_sweep->add_option("--n", cfg.n_scenarios, "scenario count")->default_val(1000);
    c_sweep->add_option("--h-range", h_range, "inertia constant range lo:hi, s");
    c_sweep->add_option("--d-range", d_range, "damping range lo:hi");
    c_sweep->add_option("--load-range", load_range, "load scaling range lo:hi");
    c_sweep->add_option("--rating-range", rating_range, "rating multiple range lo:hi");
    c_sweep->add_option("--tech-mix", tech_mix,
                        "preset: all_sg|all_gfm_vsm|all_gfm_droop|gfl_fraction");
    c_sweep->add_option("--gfl-fraction", cfg.gfl_fraction, "GFL probability per generator");
    c_sweep->add_option("--horizon", cfg.horizon, "per-scenario simulation span, s");
    c_sweep->add_option("--threads", cfg.threads, "worker threads (0: hardware)");
    std::string records_name = "records.csv";
    c_sweep->add_option("--out", records_name, "records CSV filename");

    auto* c_verify = app.add_subcommand("verify", "run the independent verification oracles");

    CLI11_PARSE(app, argc, argv);

    std::ostringstream cmdline;
    for (int i = 0; i < argc; ++i) cmdline << (i ? " " : "") << argv[i];
    const std::string started = iso_now();

    try {
        if (app.got_subcommand(c_validate)) {
            const NetworkCase net =
                parse_case(g.case_path,
                           fs::path(g.case_path).extension() == ".m" ? CaseFormat::MatpowerM
                                                                     : CaseFormat::Json,
                           g.dyn_path.empty() ? fs::path{} : fs::path(g.dyn_path));
            const ValidationReport rep = validate_case(net);
            std::cout << rep.summary();
            if (rep.ok()) {
                std::cout << "ok: " << net.buses.size() << " buses, " << net.branches.size()
                          << " branches, " << net.generators.size() << " generators\n";
                return kExitOk;
            }
            return kExitError;
        }

        if (app.got_subcommand(c_pf)) {
            const NetworkCase net = load_from(g);
            const AdmittanceMatrix Y = build_admittance(net);
            const PowerFlowSolution sol = solve_power_flow(net, Y, {pf_tol, pf_maxit});
            if (g.format == "csv") {
                auto out = open_out(g, "solution.csv");
                write_solution_csv(out, net, sol);
                write_solution_csv(std::cout, net, sol);
            } else {
                auto out = open_out(g, "solution.json");
                write_solution_json(out, net, sol);
                write_solution_json(std::cout, net, sol);
            }
            emit_manifest(g, cmdline.str(), started);
            if (!sol.converged) {
                std::cerr << "error: power flow did not converge (mismatch " << sol.max_mismatch
                          << ")\n";
                return kExitError;
            }
            return kExitOk;
        }

        if (app.got_subcommand(c_reduce)) {
            const NetworkCase net = load_from(g);
            const AdmittanceMatrix Y = build_admittance(net);
            const PowerFlowSolution sol = solve_power_flow(net, Y);
            if (!sol.converged) {
                std::cerr << "error: power flow did not converge\n";
                return kExitError;
            }
            const ReducedNetwork red = reduce_to_generators(net, Y, sol);
            auto out = open_out(g, "reduced.json");
            write_reduced_json(out, red);
            write_reduced_json(std::cout, red);
            emit_manifest(g, cmdline.str(), started);
            return kExitOk;
        }

        if (app.got_subcommand(c_analyze)) {
            const NetworkCase net = load_from(g);
            ReducedNetwork red;
            Laplacian lap;
            const StateSpaceModel model = analyze_pipeline(net, reference_bus, &red, &lap);
            const ModalResult modal = eigen_analysis(model);
            {
                auto out = open_out(g, "modal.json");
                write_modal_json(out, model, modal);
            }
            {
                auto out = open_out(g, "state_matrix.csv");
                write_state_matrix_csv(out, model);
            }
            {
                auto out = open_out(g, "state_matrix.json");
                write_state_matrix_json(out, model);
            }
            if (with_loci) {
                const std::vector<ScalingScenario> scenarios = {
                    {"base", 1.0, 1.0},         {"D_x2", 1.0, 2.0},
                    {"D_x0.5", 1.0, 0.5},       {"M_x2", 2.0, 1.0},
                    {"M_x0.5", 0.5, 1.0},       {"MD_x0.1", 0.1, 0.1},
                    {"droop_like", 0.01, 2.0},
                };
                const auto rows = sensitivity_sweep(lap, red, net, scenarios, reference_bus);
                auto out = open_out(g, "loci.csv");
                write_loci_csv(out, rows);
            }
            write_modal_json(std::cout, model, modal);
            emit_manifest(g, cmdline.str(), started);
            return modal.verdict == Verdict::Unstable ? kExitUnstable : kExitOk;
        }

        if (app.got_subcommand(c_sim)) {
            const NetworkCase net = load_from(g);
            const StateSpaceModel model = analyze_pipeline(net, reference_bus);
            Perturbation pert;
            pert.kind = pert_kind == "step" ? PerturbationKind::PowerStep
                                            : PerturbationKind::SpeedImpulse;
            pert.magnitude = magnitude;
            pert.start_time = start_time;
            pert.target_bus = target_bus >= 0 ? target_bus : default_target_bus(net, model);
            SimulateOptions opts;
            opts.horizon = horizon;
            opts.dt = dt;
            opts.allow_unstable = allow_unstable;
            if (allow_unstable) {
                const ModalResult modal = eigen_analysis(model);
                if (modal.verdict == Verdict::Unstable)
                    std::cerr << "warning: simulating an unstable model (max Re lambda = "
                              << modal.max_re << ")\n";
            }
            const SimulationTrace trace = simulate_response(model, pert, opts);
            FrequencyMetrics metrics;
            try {
                metrics = compute_metrics(trace, model.gens);
            } catch (const PreconditionError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitDegenerate;
            }
            {
                auto out = open_out(g, "trace.csv");
                write_trace_csv(out, trace);
            }
            {
                auto out = open_out(g, "metrics.json");
                write_metrics_json(out, metrics, trace);
            }
            write_metrics_json(std::cout, metrics, trace);
            emit_manifest(g, cmdline.str(), started);
            return kExitOk;
        }

        if (app.got_subcommand(c_sweep)) {
            const NetworkCase net = load_from(g);
            cfg.seed = g.seed;
            if (!h_range.empty() && !parse_range(h_range, cfg.inertia_range))
                throw PreconditionError("--h-range expects lo:hi with 0 <= lo <= hi");
            if (!d_range.empty() && !parse_range(d_range, cfg.damping_range))
                throw PreconditionError("--d-range expects lo:hi with 0 <= lo <= hi");
            if (!load_range.empty() && !parse_range(load_range, cfg.load_scale_range))
                throw PreconditionError("--load-range expects lo:hi with 0 <= lo <= hi");
            if (!rating_range.empty() && !parse_range(rating_range, cfg.rating_range))
                throw PreconditionError("--rating-range expects lo:hi with 0 <= lo <= hi");
            cfg.tech_mix = tech_mix_from_string(tech_mix);
            const auto records = run_sweep(cfg, net);
            {
                auto out = open_out(g, records_name);
                write_records_csv(out, records);
            }
            {
                auto out = open_out(g, "heatmap.csv");
                emit_heatmap(out, records);
            }
            emit_manifest(g, cmdline.str(), started);
            int converged = 0, stable = 0;
            for (const auto& r : records) {
                converged += r.powerflow_converged;
                stable += r.powerflow_converged && r.verdict != Verdict::Unstable;
            }
            std::cout << "{\"scenarios\": " << records.size() << ", \"converged\": " << converged
                      << ", \"stable\": " << stable << "}\n";
            return kExitOk;
        }

        if (app.got_subcommand(c_verify)) {
            const NetworkCase net = load_from(g);
            const auto reports = run_all_oracles(net);
            write_oracles_json(std::cout, reports);
            {
                auto out = open_out(g, "oracles.json");
                write_oracles_json(out, reports);
            }
            emit_manifest(g, cmdline.str(), started);
            for (const auto& r : reports)
                if (r.applicable && !r.pass) return kExitUnstable;
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
