#include "gridsync/powerflow.hpp"

#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "gridsync/errors.hpp"

namespace gridsync {

double AdmittanceMatrix::symmetry_error() const {
    return (Y - Y.transpose()).cwiseAbs().maxCoeff();
}

AdmittanceMatrix build_admittance(const NetworkCase& net) {
    const int nb = static_cast<int>(net.buses.size());
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(nb, nb);
    for (const auto& br : net.branches) {
        const int i = net.bus_index(br.from_bus);
        const int j = net.bus_index(br.to_bus);
        if (i < 0 || j < 0) throw ValidationError("branch references a missing bus");
        const Complex ys = 1.0 / br.series_impedance;
        const Complex half_charging(0.0, br.shunt_susceptance / 2.0);
        Y(i, j) -= ys;
        Y(j, i) -= ys;
        Y(i, i) += ys + half_charging;
        Y(j, j) += ys + half_charging;
    }
    return {std::move(Y)};
}

Eigen::VectorXcd PowerFlowSolution::phasors() const {
    Eigen::VectorXcd v(vm.size());
    for (Eigen::Index i = 0; i < vm.size(); ++i)
        v(i) = std::polar(vm(i), va(i));
    return v;
}

Eigen::VectorXd scheduled_active(const NetworkCase& net) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.buses.size()));
    for (const auto& g : net.generators) p(net.bus_index(g.bus)) += g.dispatch_P;
    for (const auto& l : net.loads) p(net.bus_index(l.bus)) -= l.P;
    return p;
}

Eigen::VectorXd scheduled_reactive(const NetworkCase& net) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.buses.size()));
    for (const auto& g : net.generators)
        if (g.tech == GenTech::Gfl) q(net.bus_index(g.bus)) += g.gfl_Q;
    for (const auto& l : net.loads) q(net.bus_index(l.bus)) -= l.Q;
    return q;
}

Eigen::VectorXd compute_injections(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                                   const AdmittanceMatrix& Y) {
    const Eigen::Index nb = Y.Y.rows();
    if (vm.size() != nb || va.size() != nb)
        throw PreconditionError("compute_injections: dimension mismatch between solution and Y");
    Eigen::VectorXd p(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        double acc = vm(i) * vm(i) * Y.Y(i, i).real();
        for (Eigen::Index j = 0; j < nb; ++j) {
            if (j == i) continue;
            const double tij = va(i) - va(j);
            acc += vm(i) * vm(j) *
                   (Y.Y(i, j).imag() * std::sin(tij) + Y.Y(i, j).real() * std::cos(tij));
        }
        p(i) = acc;
    }
    return p;
}

InjectionJacobian injection_jacobian(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                                     const AdmittanceMatrix& Y) {
    const Eigen::Index nb = Y.Y.rows();
    if (vm.size() != nb || va.size() != nb)
        throw PreconditionError("injection_jacobian: dimension mismatch");
    Eigen::VectorXcd v(nb);
    for (Eigen::Index i = 0; i < nb; ++i) v(i) = std::polar(vm(i), va(i));
    const Eigen::VectorXcd s = v.cwiseProduct((Y.Y * v).conjugate());

    InjectionJacobian J;
    J.dP_dva.resize(nb, nb);
    J.dP_dvm.resize(nb, nb);
    J.dQ_dva.resize(nb, nb);
    J.dQ_dvm.resize(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            if (i == j) continue;
            const double tij = va(i) - va(j);
            const double g = Y.Y(i, j).real(), b = Y.Y(i, j).imag();
            J.dP_dva(i, j) = vm(i) * vm(j) * (g * std::sin(tij) - b * std::cos(tij));
            J.dP_dvm(i, j) = vm(i) * (g * std::cos(tij) + b * std::sin(tij));
            J.dQ_dva(i, j) = -vm(i) * vm(j) * (g * std::cos(tij) + b * std::sin(tij));
            J.dQ_dvm(i, j) = vm(i) * (g * std::sin(tij) - b * std::cos(tij));
        }
        J.dP_dva(i, i) = -s(i).imag() - Y.Y(i, i).imag() * vm(i) * vm(i);
        J.dP_dvm(i, i) = s(i).real() / vm(i) + Y.Y(i, i).real() * vm(i);
        J.dQ_dva(i, i) = s(i).real() - Y.Y(i, i).real() * vm(i) * vm(i);
        J.dQ_dvm(i, i) = s(i).imag() / vm(i) - Y.Y(i, i).imag() * vm(i);
    }
    return J;
}

PowerFlowSolution solve_power_flow(const NetworkCase& net, const AdmittanceMatrix& Y,
                                   const PowerFlowOptions& opts) {
    if (opts.tolerance <= 0) throw PreconditionError("power flow tolerance must be positive");
    const int nb = static_cast<int>(net.buses.size());
    if (Y.order() != nb) throw PreconditionError("admittance matrix order != bus count");

    std::vector<int> nonslack, pq;
    int slack = -1;
    for (int i = 0; i < nb; ++i) {
        switch (net.buses[i].kind) {
            case BusKind::Slack: slack = i; break;
            case BusKind::Pv: nonslack.push_back(i); break;
            case BusKind::Pq:
                nonslack.push_back(i);
                pq.push_back(i);
                break;
        }
    }
    if (slack < 0) throw ValidationError("no slack bus");

    const Eigen::VectorXd p_sched = scheduled_active(net);
    const Eigen::VectorXd q_sched = scheduled_reactive(net);

    // Flat start: setpoint magnitudes, slack angle everywhere.
    PowerFlowSolution sol;
    sol.vm = Eigen::VectorXd::Ones(nb);
    sol.va = Eigen::VectorXd::Constant(nb, net.buses[slack].angle_setpoint);
    for (int i = 0; i < nb; ++i)
        if (net.buses[i].kind != BusKind::Pq) sol.vm(i) = net.buses[i].voltage_setpoint;

    const auto& M = Y.Y;
    const int n_th = static_cast<int>(nonslack.size());
    const int n_v = static_cast<int>(pq.size());

    auto complex_injections = [&](const PowerFlowSolution& s) {
        const Eigen::VectorXcd v = s.phasors();
        return Eigen::VectorXcd((M * v).conjugate().cwiseProduct(v));
    };

    for (int it = 0; it <= opts.max_iterations; ++it) {
        const Eigen::VectorXcd s_inj = complex_injections(sol);
        Eigen::VectorXd mismatch(n_th + n_v);
        for (int k = 0; k < n_th; ++k)
            mismatch(k) = p_sched(nonslack[k]) - s_inj(nonslack[k]).real();
        for (int k = 0; k < n_v; ++k)
            mismatch(n_th + k) = q_sched(pq[k]) - s_inj(pq[k]).imag();

        sol.iterations = it;
        sol.max_mismatch = mismatch.size() ? mismatch.cwiseAbs().maxCoeff() : 0.0;
        sol.s_inj = s_inj;
        if (sol.max_mismatch <= opts.tolerance) {
            sol.converged = true;
            return sol;
        }
        if (it == opts.max_iterations) break;

        const InjectionJacobian jac = injection_jacobian(sol.vm, sol.va, Y);
        Eigen::MatrixXd J(n_th + n_v, n_th + n_v);
        for (int r = 0; r < n_th; ++r) {
            for (int c = 0; c < n_th; ++c) J(r, c) = jac.dP_dva(nonslack[r], nonslack[c]);
            for (int c = 0; c < n_v; ++c) J(r, n_th + c) = jac.dP_dvm(nonslack[r], pq[c]);
        }
        for (int r = 0; r < n_v; ++r) {
            for (int c = 0; c < n_th; ++c) J(n_th + r, c) = jac.dQ_dva(pq[r], nonslack[c]);
            for (int c = 0; c < n_v; ++c) J(n_th + r, n_th + c) = jac.dQ_dvm(pq[r], pq[c]);
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw NumericalError("singular power-flow Jacobian at iteration " +
                                 std::to_string(it) + " (voltage collapse or infeasible dispatch)");
        const Eigen::VectorXd dx = lu.solve(mismatch);
        for (int k = 0; k < n_th; ++k) sol.va(nonslack[k]) += dx(k);
        for (int k = 0; k < n_v; ++k) sol.vm(pq[k]) += dx(n_th + k);
    }
    sol.converged = false;  // diagnostics already populated
    return sol;
}

}  // namespace gridsync
