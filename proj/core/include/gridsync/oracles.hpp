#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsync/kron.hpp"
#include "gridsync/linearize.hpp"
#include "gridsync/modal.hpp"

namespace gridsync {

// Result of one independent verification route.  Oracles never share a code
// path with the implementation they check.
struct OracleReport {
    std::string name;
    bool applicable = true;
    bool pass = false;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// Schur complement of the interior block via a dense LU solve, compared
// entrywise with kron_reduce.  Tolerance 1e-10 (relative to the largest
// entry).  A singular interior block reports oracle-inapplicable.
OracleReport schur_oracle(const AdmittanceMatrix& Y_folded, const std::vector<int>& boundary_ids,
                          const NetworkCase& net, const PowerFlowSolution& sol);

// Central finite differences of the reduced-network injections with respect
// to boundary angles, compared with build_laplacian.  Default step 1e-6 rad,
// tolerance 1e-5 relative.
OracleReport fd_jacobian_oracle(const ReducedNetwork& red, const Laplacian& lap,
                                double step = 1e-6);

// Roots of det p(lambda) for the cubic matrix polynomial of the
// characteristic matrix, found by eigendecomposition of the block companion
// linearization.  det p has degree 3(n-1): the 2n-1 system eigenvalues plus
// an analytic (n-2)-fold root at d_n, which is removed before matching.
// Applicable for 2 <= n <= 4; match tolerance 1e-6 (Hausdorff).
OracleReport polyroot_oracle(const StateSpaceModel& model, const ModalResult& modal);

// All applicable oracles for a case, in a fixed order.
std::vector<OracleReport> run_all_oracles(const NetworkCase& net);

}  // namespace gridsync
