#include "gridsync/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "gridsync/errors.hpp"

namespace gridsync {

using nlohmann::json;

std::string format_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_solution_csv(std::ostream& os, const NetworkCase& net, const PowerFlowSolution& sol) {
    os << "bus,vm_pu,angle_rad,p_pu,q_pu\n";
    for (size_t i = 0; i < net.buses.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        os << net.buses[i].id << ',' << format_sig(sol.vm(k)) << ',' << format_sig(sol.va(k))
           << ',' << format_sig(sol.s_inj(k).real()) << ',' << format_sig(sol.s_inj(k).imag())
           << '\n';
    }
}

void write_solution_json(std::ostream& os, const NetworkCase& net, const PowerFlowSolution& sol) {
    json j;
    j["converged"] = sol.converged;
    j["iterations"] = sol.iterations;
    j["max_mismatch"] = sol.max_mismatch;
    j["buses"] = json::array();
    for (size_t i = 0; i < net.buses.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        j["buses"].push_back({{"bus", net.buses[i].id},
                              {"vm_pu", sol.vm(k)},
                              {"angle_rad", sol.va(k)},
                              {"p_pu", sol.s_inj(k).real()},
                              {"q_pu", sol.s_inj(k).imag()}});
    }
    os << j.dump(2) << '\n';
}

void write_reduced_json(std::ostream& os, const ReducedNetwork& red) {
    json j;
    j["boundary_buses"] = red.boundary_buses;
    j["eliminated"] = red.elimination_log;
    json rows = json::array();
    for (Eigen::Index i = 0; i < red.Y_red.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < red.Y_red.cols(); ++k)
            row.push_back({red.Y_red(i, k).real(), red.Y_red(i, k).imag()});
        rows.push_back(row);
    }
    j["y_red"] = rows;
    j["vm"] = std::vector<double>(red.vm.data(), red.vm.data() + red.vm.size());
    j["va"] = std::vector<double>(red.va.data(), red.va.data() + red.va.size());
    os << j.dump(2) << '\n';
}

void write_state_matrix_csv(std::ostream& os, const StateSpaceModel& model) {
    os << "state";
    for (const auto& l : model.state_labels) os << ',' << l;
    os << '\n';
    for (Eigen::Index i = 0; i < model.A.rows(); ++i) {
        os << model.state_labels[static_cast<size_t>(i)];
        for (Eigen::Index k = 0; k < model.A.cols(); ++k) os << ',' << format_sig(model.A(i, k));
        os << '\n';
    }
}

void write_state_matrix_json(std::ostream& os, const StateSpaceModel& model) {
    json j;
    j["state_labels"] = model.state_labels;
    j["reference_bus"] = model.reference_bus;
    j["base_freq"] = model.base_freq;
    json rows = json::array();
    for (Eigen::Index i = 0; i < model.A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < model.A.cols(); ++k) row.push_back(model.A(i, k));
        rows.push_back(row);
    }
    j["A"] = rows;
    j["generators"] = json::array();
    for (const auto& g : model.gens)
        j["generators"].push_back({{"bus", g.bus},
                                   {"tech", to_string(g.tech)},
                                   {"M", g.M},
                                   {"D", g.D},
                                   {"damping_factor", g.d}});
    os << j.dump(2) << '\n';
}

void write_modal_json(std::ostream& os, const StateSpaceModel& model, const ModalResult& modal) {
    json j;
    j["verdict"] = to_string(modal.verdict);
    j["max_re_lambda"] = modal.max_re;
    j["dominant_mode"] = modal.dominant_mode;
    j["tol_marginal"] = modal.tol_marginal;
    j["reference_bus"] = model.reference_bus;
    j["state_dim"] = model.dim();
    j["eigenvalues"] = json::array();
    for (Eigen::Index i = 0; i < modal.eigenvalues.size(); ++i)
        j["eigenvalues"].push_back(
            {{"re", modal.eigenvalues(i).real()}, {"im", modal.eigenvalues(i).imag()}});
    j["internal_modes"] = json::array();
    for (const auto& m : modal.internal_modes)
        j["internal_modes"].push_back(
            {{"eig_index", m.eig_index}, {"zeta", m.zeta}, {"omega_n_rad_s", m.omega_n}});
    j["coupling_modes"] = json::array();
    for (const auto& m : modal.coupling_modes)
        j["coupling_modes"].push_back({{"eig_index", m.eig_index}, {"k_d", m.k_d}});
    j["generators"] = json::array();
    for (const auto& g : model.gens)
        j["generators"].push_back({{"bus", g.bus},
                                   {"tech", to_string(g.tech)},
                                   {"M", g.M},
                                   {"D", g.D},
                                   {"damping_factor", g.d}});
    os << j.dump(2) << '\n';
}

void write_loci_csv(std::ostream& os, const std::vector<LociRow>& rows) {
    os << "scenario,eig_index,real,imag,class,zeta,omega_n\n";
    for (const auto& r : rows)
        os << r.scenario << ',' << r.eig_index << ',' << format_sig(r.re) << ','
           << format_sig(r.im) << ',' << r.mode_class << ',' << format_sig(r.zeta) << ','
           << format_sig(r.omega_n) << '\n';
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
    const Eigen::MatrixXd f = trace.frequency();
    os << "time_s";
    for (size_t g = 0; g < trace.gen_buses.size(); ++g)
        os << ",f_hz_bus" << trace.gen_buses[g];
    for (size_t g = 0; g + 1 < trace.gen_buses.size(); ++g)
        os << ",delta_rad_bus" << trace.gen_buses[g];
    os << '\n';
    for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
        os << format_sig(trace.times(k));
        for (Eigen::Index c = 0; c < f.cols(); ++c) os << ',' << format_sig(f(k, c));
        for (Eigen::Index c = 0; c < trace.relative_angles.cols(); ++c)
            os << ',' << format_sig(trace.relative_angles(k, c));
        os << '\n';
    }
}

void write_metrics_json(std::ostream& os, const FrequencyMetrics& metrics,
                        const SimulationTrace& trace) {
    json j;
    j["nadir_hz"] = metrics.nadir_hz;
    j["rise_time_s"] = metrics.rise_time_s;
    j["peak_time_s"] = metrics.peak_time_s;
    j["settling_time_s"] = metrics.settling_time_s;
    j["f_final_hz"] = metrics.f_final_hz;
    json per = json::object();
    for (size_t g = 0; g < metrics.per_gen_nadir_hz.size(); ++g)
        per["bus" + std::to_string(trace.gen_buses[g])] = metrics.per_gen_nadir_hz[g];
    j["per_gen_nadir_hz"] = per;
    os << j.dump(2) << '\n';
}

void write_oracles_json(std::ostream& os, const std::vector<OracleReport>& reports) {
    json j = json::array();
    for (const auto& r : reports)
        j.push_back({{"name", r.name},
                     {"applicable", r.applicable},
                     {"pass", r.pass},
                     {"max_abs_error", r.max_abs_error},
                     {"max_rel_error", r.max_rel_error},
                     {"tolerance", r.tolerance},
                     {"detail", r.detail}});
    os << j.dump(2) << '\n';
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file for digest: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

void write_manifest_json(std::ostream& os, const RunManifest& manifest) {
    json j;
    j["tool_version"] = manifest.tool_version;
    j["command_line"] = manifest.command_line;
    j["seed"] = manifest.seed;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["inputs"] = json::array();
    char hex[20];
    for (const auto& [path, digest] : manifest.input_digests) {
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest));
        j["inputs"].push_back({{"path", path}, {"fnv1a64", hex}});
    }
    os << j.dump(2) << '\n';
}

}  // namespace gridsync
