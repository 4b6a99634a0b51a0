#include "gridsync/linearize.hpp"

#include <algorithm>
#include <cmath>

#include "gridsync/errors.hpp"

namespace gridsync {

double Laplacian::row_sum_error() const { return H.rowwise().sum().cwiseAbs().maxCoeff(); }

Laplacian build_laplacian(const ReducedNetwork& red) {
    const Eigen::Index n = red.Y_red.rows();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double tij = red.va(i) - red.va(j);
            const double term = red.vm(i) * red.vm(j) *
                                (red.Y_red(i, j).imag() * std::cos(tij) -
                                 red.Y_red(i, j).real() * std::sin(tij));
            H(i, j) = -term;
            diag += term;
        }
        H(i, i) = diag;
    }
    return {std::move(H)};
}

Eigen::MatrixXd StateSpaceModel::block_h_i() const {
    const int n = n_gens();
    return A.block(n - 1, 0, n - 1, n - 1);
}

Eigen::RowVectorXd StateSpaceModel::block_h_n() const {
    const int n = n_gens();
    return A.block(2 * n - 2, 0, 1, n - 1);
}

Eigen::VectorXd StateSpaceModel::block_d_i() const {
    const int n = n_gens();
    return A.block(n - 1, n - 1, n - 1, n - 1).diagonal();
}

double StateSpaceModel::block_d_n() const {
    const int n = n_gens();
    return A(2 * n - 2, 2 * n - 2);
}

StateSpaceModel assemble_state_matrix(const Laplacian& lap, const ReducedNetwork& red,
                                      const NetworkCase& net, int reference_bus) {
    const int n = static_cast<int>(red.boundary_buses.size());
    if (lap.H.rows() != n) throw PreconditionError("Laplacian order != boundary size");

    // One dynamic generator per boundary bus; multiple units at a bus are
    // merged by summing M, D (parallel machines on one swing node).
    std::vector<GenParams> gens(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) gens[k].bus = red.boundary_buses[k];
    for (const auto& g : net.generators) {
        if (!g.is_dynamic()) continue;
        const auto it =
            std::find(red.boundary_buses.begin(), red.boundary_buses.end(), g.bus);
        if (it == red.boundary_buses.end()) continue;
        auto& gp = gens[static_cast<size_t>(it - red.boundary_buses.begin())];
        gp.M += g.inertia_M;
        gp.D += g.damping_D;
        gp.tech = g.tech;
    }
    for (auto& gp : gens) {
        if (gp.M <= 0.0)
            throw NumericalError(
                "generator at bus " + std::to_string(gp.bus) +
                " has zero inertia; all-GFL operation is infeasible (zero Jacobian denominator)");
        gp.d = gp.D / gp.M;
    }

    if (reference_bus < 0) {
        const int slack = net.slack_bus_id();
        const auto it = std::find(red.boundary_buses.begin(), red.boundary_buses.end(), slack);
        if (it != red.boundary_buses.end()) {
            reference_bus = slack;
        } else {
            reference_bus =
                std::max_element(gens.begin(), gens.end(),
                                 [](const GenParams& a, const GenParams& b) { return a.M < b.M; })
                    ->bus;
        }
    }
    const auto ref_it = std::find(red.boundary_buses.begin(), red.boundary_buses.end(),
                                  reference_bus);
    if (ref_it == red.boundary_buses.end())
        throw PreconditionError("reference generator bus " + std::to_string(reference_bus) +
                                " is not a dynamic-generator bus");
    const int ref = static_cast<int>(ref_it - red.boundary_buses.begin());

    // Reorder so the reference generator is last.
    std::vector<int> order;
    for (int k = 0; k < n; ++k)
        if (k != ref) order.push_back(k);
    order.push_back(ref);

    Eigen::MatrixXd Hp(n, n);
    std::vector<GenParams> gp(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
        gp[a] = gens[order[a]];
        for (int b = 0; b < n; ++b) Hp(a, b) = lap.H(order[a], order[b]);
    }

    StateSpaceModel model;
    model.gens = std::move(gp);
    model.reference_bus = reference_bus;
    model.base_freq = net.base_freq;
    const int dim = 2 * n - 1;
    model.A = Eigen::MatrixXd::Zero(dim, dim);

    // Angle rows [0 | I | -1]: d/dt delta_{j,ref} = w_j - w_ref.
    for (int j = 0; j < n - 1; ++j) {
        model.A(j, n - 1 + j) = 1.0;
        model.A(j, 2 * n - 2) = -1.0;
    }
    // Speed rows: relative-angle columns are the first n-1 columns of H
    // (H rows sum to zero, so the reference column's contribution vanishes).
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n - 1; ++j)
            model.A(n - 1 + i, j) = -Hp(i, j) / model.gens[i].M;
        model.A(n - 1 + i, n - 1 + i) = -model.gens[i].d;
    }

    model.state_labels.reserve(static_cast<size_t>(dim));
    for (int j = 0; j < n - 1; ++j)
        model.state_labels.push_back("delta(" + std::to_string(model.gens[j].bus) + "," +
                                     std::to_string(reference_bus) + ")");
    for (int i = 0; i < n; ++i)
        model.state_labels.push_back("omega(" + std::to_string(model.gens[i].bus) + ")");
    return model;
}

StateSpaceModel linearize_case(const NetworkCase& net, int reference_bus) {
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    if (!sol.converged)
        throw NumericalError("power flow did not converge (max mismatch " +
                             std::to_string(sol.max_mismatch) + ")");
    const ReducedNetwork red = reduce_to_generators(net, Y, sol);
    const Laplacian lap = build_laplacian(red);
    return assemble_state_matrix(lap, red, net, reference_bus);
}

}  // namespace gridsync
