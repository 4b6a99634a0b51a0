#pragma once

#include <Eigen/Dense>

#include "gridsync/network.hpp"

namespace gridsync {

// Bus admittance matrix Y = G + jB, dense, ordered like net.buses.
struct AdmittanceMatrix {
    Eigen::MatrixXcd Y;

    int order() const { return static_cast<int>(Y.rows()); }
    double symmetry_error() const;  // max |Y - Y^T|
};

// Y_ij = -y_series(i,j) for connected i != j;
// Y_ii = sum of incident series admittances plus half line charging.
AdmittanceMatrix build_admittance(const NetworkCase& net);

struct PowerFlowSolution {
    Eigen::VectorXd vm;      // p.u. magnitude per bus
    Eigen::VectorXd va;      // rad per bus
    Eigen::VectorXcd s_inj;  // computed complex injection per bus, p.u.
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;  // p.u.

    Eigen::VectorXcd phasors() const;  // vm * exp(j*va)
};

struct PowerFlowOptions {
    double tolerance = 1e-8;  // p.u. mismatch
    int max_iterations = 50;
};

// Full Newton-Raphson in polar coordinates from a flat start.  PV buses hold
// voltage magnitude; the slack bus holds magnitude and angle.  Non-convergence
// is reported in the solution; a singular Jacobian throws NumericalError.
PowerFlowSolution solve_power_flow(const NetworkCase& net, const AdmittanceMatrix& Y,
                                   const PowerFlowOptions& opts = {});

// Active power injection per bus evaluated from voltages:
//   P_i = V_i^2 G_ii + sum_{j != i} V_i V_j [B_ij sin(d_i - d_j) + G_ij cos(d_i - d_j)]
Eigen::VectorXd compute_injections(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                                   const AdmittanceMatrix& Y);

// Scheduled net injection per bus (generation minus load), p.u.
Eigen::VectorXd scheduled_active(const NetworkCase& net);
Eigen::VectorXd scheduled_reactive(const NetworkCase& net);

// Partial derivatives of the injection equations at (vm, va); the blocks the
// Newton iteration assembles its Jacobian from.
struct InjectionJacobian {
    Eigen::MatrixXd dP_dva, dP_dvm, dQ_dva, dQ_dvm;
};

InjectionJacobian injection_jacobian(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                                     const AdmittanceMatrix& Y);

}  // namespace gridsync
