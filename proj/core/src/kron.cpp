#include "gridsync/kron.hpp"

#include <algorithm>
#include <cmath>

#include "gridsync/errors.hpp"

namespace gridsync {

namespace {
constexpr double kZeroPivot = 1e-12;
}

AdmittanceMatrix fold_constant_elements(const NetworkCase& net, const AdmittanceMatrix& Y,
                                        const PowerFlowSolution& sol) {
    if (!sol.converged)
        throw PreconditionError("fold_constant_elements requires a converged power flow");
    Eigen::MatrixXcd Yf = Y.Y;
    const Eigen::Index nb = Yf.rows();
    // Consumed complex power per bus: loads minus GFL injections.
    Eigen::VectorXcd consumed = Eigen::VectorXcd::Zero(nb);
    for (const auto& l : net.loads) consumed(net.bus_index(l.bus)) += Complex(l.P, l.Q);
    for (const auto& g : net.generators)
        if (g.tech == GenTech::Gfl)
            consumed(net.bus_index(g.bus)) -= Complex(g.dispatch_P, g.gfl_Q);

    for (Eigen::Index i = 0; i < nb; ++i) {
        if (consumed(i) == Complex(0.0, 0.0)) continue;
        const double v2 = sol.vm(i) * sol.vm(i);
        if (v2 <= 0.0)
            throw NumericalError("cannot fold load at zero-voltage bus " +
                                 std::to_string(net.buses[static_cast<size_t>(i)].id));
        Yf(i, i) += std::conj(consumed(i)) / v2;
    }
    return {std::move(Yf)};
}

ReducedNetwork kron_reduce(const AdmittanceMatrix& Y_folded, const std::vector<int>& boundary_ids,
                           const NetworkCase& net, const PowerFlowSolution& sol) {
    const Eigen::Index nb = Y_folded.Y.rows();
    std::vector<int> boundary = boundary_ids;
    std::sort(boundary.begin(), boundary.end());
    boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
    for (int id : boundary)
        if (net.bus_index(id) < 0)
            throw PreconditionError("boundary bus " + std::to_string(id) + " does not exist");

    // Eliminate interior buses ascending by bus id, one node per Kron step.
    std::vector<int> alive;  // dense indices still present
    std::vector<int> to_eliminate;
    for (Eigen::Index i = 0; i < nb; ++i) {
        const int id = net.buses[static_cast<size_t>(i)].id;
        if (std::binary_search(boundary.begin(), boundary.end(), id))
            alive.push_back(static_cast<int>(i));
        else
            to_eliminate.push_back(static_cast<int>(i));
    }
    std::sort(to_eliminate.begin(), to_eliminate.end(),
              [&](int a, int b) { return net.buses[a].id < net.buses[b].id; });

    Eigen::MatrixXcd Y = Y_folded.Y;
    std::vector<int> present(static_cast<size_t>(nb), 1);
    ReducedNetwork red;
    for (int p : to_eliminate) {
        const Complex pivot = Y(p, p);
        if (std::abs(pivot) < kZeroPivot)
            throw NumericalError("zero Kron pivot at bus " + std::to_string(net.buses[p].id) +
                                 " (isolated or degenerate interior node)");
        for (Eigen::Index i = 0; i < nb; ++i) {
            if (!present[i] || i == p) continue;
            const Complex yip = Y(i, p);
            if (yip == Complex(0.0, 0.0)) continue;
            for (Eigen::Index k = 0; k < nb; ++k) {
                if (!present[k] || k == p) continue;
                Y(i, k) -= yip * Y(p, k) / pivot;
            }
        }
        present[p] = 0;
        red.elimination_log.push_back(net.buses[p].id);
    }

    const Eigen::Index m = static_cast<Eigen::Index>(alive.size());
    red.Y_red.resize(m, m);
    red.vm.resize(m);
    red.va.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) red.Y_red(a, b) = Y(alive[a], alive[b]);
        red.vm(a) = sol.vm(alive[a]);
        red.va(a) = sol.va(alive[a]);
    }
    red.boundary_buses = boundary;
    return red;
}

ReducedNetwork reduce_to_generators(const NetworkCase& net, const AdmittanceMatrix& Y,
                                    const PowerFlowSolution& sol) {
    std::vector<int> boundary;
    for (const auto& g : net.generators)
        if (g.is_dynamic() &&
            std::find(boundary.begin(), boundary.end(), g.bus) == boundary.end())
            boundary.push_back(g.bus);
    if (boundary.empty())
        throw ValidationError("no dynamic (non-GFL) generator present; nothing to retain");
    const AdmittanceMatrix folded = fold_constant_elements(net, Y, sol);
    return kron_reduce(folded, boundary, net, sol);
}

}  // namespace gridsync
