#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gridsync/network.hpp"
#include "gridsync/powerflow.hpp"

namespace gridsync {

// Network reduced to the buses hosting dynamic (non-GFL) generators.
struct ReducedNetwork {
    std::vector<int> boundary_buses;   // bus ids, ascending
    Eigen::MatrixXcd Y_red;            // effective admittance over boundary buses
    std::vector<int> elimination_log;  // eliminated bus ids in elimination order
    // Equilibrium restricted to the boundary, in boundary_buses order.
    Eigen::VectorXd vm;
    Eigen::VectorXd va;
};

// Replaces every load and every GFL injection by a constant shunt admittance
// y = conj(S)/|V|^2 on the bus diagonal, where S is the element's consumed
// complex power at the equilibrium (GFL enters as negative load).  Throws
// NumericalError on a zero-voltage bus.
AdmittanceMatrix fold_constant_elements(const NetworkCase& net, const AdmittanceMatrix& Y,
                                        const PowerFlowSolution& sol);

// Kron-eliminates every non-boundary bus one node at a time, ascending bus id:
//   Y_ik <- Y_ik - Y_ip Y_pk / Y_pp.
// The boundary voltage-current relation of the folded network is preserved
// exactly.  Throws NumericalError when an elimination pivot |Y_pp| < 1e-12.
ReducedNetwork kron_reduce(const AdmittanceMatrix& Y_folded, const std::vector<int>& boundary_ids,
                           const NetworkCase& net, const PowerFlowSolution& sol);

// Convenience: fold + reduce to the dynamic-generator buses of the case.
ReducedNetwork reduce_to_generators(const NetworkCase& net, const AdmittanceMatrix& Y,
                                    const PowerFlowSolution& sol);

}  // namespace gridsync
