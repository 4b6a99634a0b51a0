#include "gridsync/case_io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gridsync/errors.hpp"

namespace gridsync {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

double to_M(const json& g, double omega_base, const std::string& where) {
    const bool has_M = g.contains("M");
    const bool has_H = g.contains("H");
    if (has_M && has_H) throw ParseError(where + ": specify either M or H, not both");
    if (has_M) return g.at("M").get<double>();
    if (has_H) return 2.0 * g.at("H").get<double>() / omega_base;
    return 0.0;
}

GeneratorSpec parse_generator(const json& g, double omega_base, const std::string& where) {
    GeneratorSpec spec;
    spec.bus = g.at("bus").get<int>();
    spec.tech = gen_tech_from_string(g.value("tech", std::string("SG")));
    spec.inertia_M = to_M(g, omega_base, where);
    spec.damping_D = g.value("D", 0.0);
    spec.rating_S = g.value("rating_mva", 0.0);
    spec.dispatch_P = g.value("dispatch_p", 0.0);
    spec.gfl_Q = g.value("gfl_q", 0.0);
    if (spec.tech == GenTech::Gfl) {
        spec.inertia_M = 0.0;
        spec.damping_D = 0.0;
    }
    return spec;
}

NetworkCase load_json_case(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    NetworkCase net;
    try {
        net.base_mva = j.at("base_mva").get<double>();
        net.base_freq = j.at("base_freq").get<double>();
        const double wb = 2.0 * std::numbers::pi * net.base_freq;

        for (const auto& b : j.at("buses")) {
            BusSpec bus;
            bus.id = b.at("id").get<int>();
            bus.kind = bus_kind_from_string(b.at("kind").get<std::string>());
            bus.voltage_setpoint = b.value("voltage_setpoint", 1.0);
            bus.angle_setpoint = b.value("angle_setpoint", 0.0);
            net.buses.push_back(bus);
        }
        for (const auto& br : j.at("branches")) {
            BranchSpec branch;
            branch.from_bus = br.at("from").get<int>();
            branch.to_bus = br.at("to").get<int>();
            branch.series_impedance = {br.at("r").get<double>(), br.at("x").get<double>()};
            branch.shunt_susceptance = br.value("b", 0.0);
            net.branches.push_back(branch);
        }
        int gen_no = 0;
        for (const auto& g : j.at("generators")) {
            net.generators.push_back(
                parse_generator(g, wb, path.string() + ": generator " + std::to_string(gen_no)));
            ++gen_no;
        }
        if (j.contains("loads")) {
            for (const auto& l : j.at("loads")) {
                LoadSpec load;
                load.bus = l.at("bus").get<int>();
                load.P = l.value("p", 0.0);
                load.Q = l.value("q", 0.0);
                net.loads.push_back(load);
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return net;
}

// --- MATPOWER .m reader -------------------------------------------------
//
// Accepts the common mpc.<table> = [ ... ]; layout.  Rows are newline- or
// semicolon-separated, values whitespace-separated.  Comments (%) stripped.

struct MatpowerTables {
    double baseMVA = 100.0;
    std::vector<std::vector<double>> bus, gen, branch;
    std::vector<std::string> ignored;
};

std::vector<std::vector<double>> parse_matrix(const std::string& body, const std::string& table) {
    std::vector<std::vector<double>> rows;
    std::string row_text;
    auto flush_row = [&]() {
        std::istringstream rs(row_text);
        std::vector<double> row;
        double v;
        while (rs >> v) row.push_back(v);
        if (!rs.eof() && rs.fail()) {
            std::string bad;
            std::istringstream(row_text) >> bad;
            throw ParseError("mpc." + table + ": non-numeric entry in row '" + row_text + "'");
        }
        if (!row.empty()) rows.push_back(std::move(row));
        row_text.clear();
    };
    for (char c : body) {
        if (c == ';' || c == '\n') {
            flush_row();
        } else {
            row_text += c;
        }
    }
    flush_row();
    return rows;
}

MatpowerTables parse_matpower(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::string text, line;
    while (std::getline(in, line)) {
        const auto pct = line.find('%');
        if (pct != std::string::npos) line.erase(pct);
        text += line;
        text += '\n';
    }

    MatpowerTables t;
    size_t pos = 0;
    while ((pos = text.find("mpc.", pos)) != std::string::npos) {
        size_t name_end = text.find_first_of(" =\t\n", pos + 4);
        if (name_end == std::string::npos) break;
        const std::string name = text.substr(pos + 4, name_end - pos - 4);
        size_t eq = text.find('=', name_end);
        if (eq == std::string::npos) break;
        size_t val_start = text.find_first_not_of(" \t\n", eq + 1);
        if (val_start == std::string::npos) break;

        if (text[val_start] == '[') {
            size_t close = text.find(']', val_start);
            if (close == std::string::npos)
                throw ParseError(path.string() + ": unterminated matrix mpc." + name);
            const std::string body = text.substr(val_start + 1, close - val_start - 1);
            if (name == "bus")
                t.bus = parse_matrix(body, name);
            else if (name == "gen")
                t.gen = parse_matrix(body, name);
            else if (name == "branch")
                t.branch = parse_matrix(body, name);
            else
                t.ignored.push_back(name);
            pos = close + 1;
        } else {
            size_t end = text.find(';', val_start);
            const std::string value = text.substr(val_start, end - val_start);
            if (name == "baseMVA") {
                t.baseMVA = std::stod(value);
            } else if (name != "version") {
                t.ignored.push_back(name);
            }
            pos = (end == std::string::npos) ? text.size() : end + 1;
        }
    }
    if (t.bus.empty() || t.branch.empty())
        throw ParseError(path.string() + ": missing mpc.bus or mpc.branch table");
    return t;
}

NetworkCase load_matpower_case(const std::filesystem::path& path) {
    const MatpowerTables t = parse_matpower(path);
    for (const auto& name : t.ignored)
        std::cerr << "warning: ignoring MATPOWER table mpc." << name << "\n";

    NetworkCase net;
    net.base_mva = t.baseMVA;
    net.base_freq = 60.0;  // MATPOWER does not carry frequency; sidecar may override

    for (const auto& row : t.bus) {
        if (row.size() < 8) throw ParseError(path.string() + ": short mpc.bus row");
        BusSpec bus;
        bus.id = static_cast<int>(row[0]);
        const int type = static_cast<int>(row[1]);
        bus.kind = (type == 3) ? BusKind::Slack : (type == 2) ? BusKind::Pv : BusKind::Pq;
        bus.voltage_setpoint = row[7] > 0 ? row[7] : 1.0;
        bus.angle_setpoint = row.size() > 8 ? row[8] * std::numbers::pi / 180.0 : 0.0;
        net.buses.push_back(bus);
        if (row[2] != 0.0 || row[3] != 0.0)
            net.loads.push_back({bus.id, row[2] / t.baseMVA, row[3] / t.baseMVA});
        if (row.size() > 5 && (row[4] != 0.0 || row[5] != 0.0))
            std::cerr << "warning: bus " << bus.id << " shunt (GS/BS) ignored\n";
    }
    for (const auto& row : t.branch) {
        if (row.size() < 5) throw ParseError(path.string() + ": short mpc.branch row");
        if (row.size() > 10 && row[10] == 0.0) continue;  // out of service
        BranchSpec br;
        br.from_bus = static_cast<int>(row[0]);
        br.to_bus = static_cast<int>(row[1]);
        br.series_impedance = {row[2], row[3]};
        br.shunt_susceptance = row[4];
        if (row.size() > 8 && row[8] != 0.0 && row[8] != 1.0)
            std::cerr << "warning: branch " << br.from_bus << "-" << br.to_bus
                      << " tap ratio ignored (treated as 1.0)\n";
        net.branches.push_back(br);
    }
    for (const auto& row : t.gen) {
        if (row.size() < 2) throw ParseError(path.string() + ": short mpc.gen row");
        if (row.size() > 7 && row[7] <= 0) continue;  // out of service
        GeneratorSpec g;
        g.bus = static_cast<int>(row[0]);
        g.dispatch_P = row[1] / t.baseMVA;
        g.rating_S = row.size() > 6 ? row[6] : 0.0;  // mBase as a capacity hint
        const int bi = net.bus_index(g.bus);
        if (bi >= 0 && row.size() > 5 && row[5] > 0 &&
            net.buses[bi].kind != BusKind::Pq)
            net.buses[bi].voltage_setpoint = row[5];
        net.generators.push_back(g);
    }
    return net;
}

}  // namespace

void apply_dyn_sidecar(NetworkCase& net, const std::filesystem::path& dyn_path) {
    const json j = read_json_file(dyn_path);
    if (j.contains("base_freq")) net.base_freq = j.at("base_freq").get<double>();
    const double wb = net.omega_base();
    if (!j.contains("generators"))
        throw ParseError(dyn_path.string() + ": sidecar must contain a generators[] array");

    // Sidecar entries are matched to case generators by bus id, in file order
    // for multiple units at one bus.
    std::vector<size_t> used;
    int entry_no = 0;
    for (const auto& g : j.at("generators")) {
        const std::string where = dyn_path.string() + ": entry " + std::to_string(entry_no);
        const int bus = g.at("bus").get<int>();
        size_t target = net.generators.size();
        for (size_t k = 0; k < net.generators.size(); ++k) {
            if (net.generators[k].bus == bus &&
                std::find(used.begin(), used.end(), k) == used.end()) {
                target = k;
                break;
            }
        }
        if (target == net.generators.size())
            throw ParseError(where + ": no unmatched case generator at bus " +
                             std::to_string(bus));
        used.push_back(target);
        auto& spec = net.generators[target];
        spec.tech = gen_tech_from_string(g.value("tech", std::string("SG")));
        spec.inertia_M = to_M(g, wb, where);
        spec.damping_D = g.value("D", 0.0);
        if (g.contains("rating_mva")) spec.rating_S = g.at("rating_mva").get<double>();
        spec.gfl_Q = g.value("gfl_q", 0.0);
        if (spec.tech == GenTech::Gfl) {
            spec.inertia_M = 0.0;
            spec.damping_D = 0.0;
        }
        ++entry_no;
    }
    if (used.size() != net.generators.size())
        throw ParseError(dyn_path.string() + ": sidecar covers " + std::to_string(used.size()) +
                         " of " + std::to_string(net.generators.size()) + " generators");
}

NetworkCase parse_case(const std::filesystem::path& path, CaseFormat format,
                       const std::filesystem::path& dyn_path) {
    NetworkCase net;
    switch (format) {
        case CaseFormat::Json:
            net = load_json_case(path);
            if (!dyn_path.empty()) apply_dyn_sidecar(net, dyn_path);
            break;
        case CaseFormat::MatpowerM:
            if (dyn_path.empty())
                throw ParseError("MATPOWER cases carry no dynamic data; --dyn sidecar required");
            net = load_matpower_case(path);
            apply_dyn_sidecar(net, dyn_path);
            break;
    }
    return net;
}

NetworkCase load_case(const std::filesystem::path& path, CaseFormat format,
                      const std::filesystem::path& dyn_path) {
    NetworkCase net = parse_case(path, format, dyn_path);
    const ValidationReport rep = validate_case(net);
    if (!rep.ok()) throw ValidationError(path.string() + ":\n" + rep.summary());
    return net;
}

NetworkCase load_case_auto(const std::filesystem::path& path,
                           const std::filesystem::path& dyn_path) {
    const CaseFormat fmt =
        path.extension() == ".m" ? CaseFormat::MatpowerM : CaseFormat::Json;
    return load_case(path, fmt, dyn_path);
}

std::string serialize_case(const NetworkCase& net) {
    json j;
    j["base_mva"] = net.base_mva;
    j["base_freq"] = net.base_freq;
    j["buses"] = json::array();
    for (const auto& b : net.buses) {
        json e{{"id", b.id}, {"kind", to_string(b.kind)}};
        if (b.kind != BusKind::Pq) e["voltage_setpoint"] = b.voltage_setpoint;
        if (b.kind == BusKind::Slack) e["angle_setpoint"] = b.angle_setpoint;
        j["buses"].push_back(e);
    }
    j["branches"] = json::array();
    for (const auto& br : net.branches) {
        j["branches"].push_back({{"from", br.from_bus},
                                 {"to", br.to_bus},
                                 {"r", br.series_impedance.real()},
                                 {"x", br.series_impedance.imag()},
                                 {"b", br.shunt_susceptance}});
    }
    j["generators"] = json::array();
    for (const auto& g : net.generators) {
        json e{{"bus", g.bus},        {"tech", to_string(g.tech)},
               {"M", g.inertia_M},    {"D", g.damping_D},
               {"rating_mva", g.rating_S}, {"dispatch_p", g.dispatch_P}};
        if (g.gfl_Q != 0.0) e["gfl_q"] = g.gfl_Q;
        j["generators"].push_back(e);
    }
    j["loads"] = json::array();
    for (const auto& l : net.loads)
        j["loads"].push_back({{"bus", l.bus}, {"p", l.P}, {"q", l.Q}});
    return j.dump(2) + "\n";
}

}  // namespace gridsync
