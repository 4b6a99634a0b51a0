#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsync/kron.hpp"
#include "gridsync/network.hpp"

namespace gridsync {

// Sensitivity of boundary active-power injections to boundary angles at the
// equilibrium:
//   H_ij = -V_i V_j [B_ij cos(d_i - d_j) - G_ij sin(d_i - d_j)],  i != j
//   H_ii = -sum_{j != i} H_ij
// Rows sum to zero exactly (a uniform angle shift changes no injection).
struct Laplacian {
    Eigen::MatrixXd H;  // p.u. power per radian, boundary order

    double row_sum_error() const;  // max |row sum|
};

Laplacian build_laplacian(const ReducedNetwork& red);

struct GenParams {
    int bus = 0;
    GenTech tech = GenTech::Sg;
    double M = 0.0;  // p.u.*s^2/rad
    double D = 0.0;  // p.u./(rad/s)
    double d = 0.0;  // D/M, 1/s
};

// Linear swing dynamics about the equilibrium with the reference generator's
// angle removed.  State ordering: (n-1) relative angles delta_{i,ref} followed
// by n absolute speed deviations; generators are ordered with the reference
// generator last.
//
//   d/dt delta_{i,ref} = w_i - w_ref
//   d/dt w_i           = -M_i^-1 sum_{j<n} H_ij delta_{j,ref} - (D_i/M_i) w_i
//
// The angle block of A is [0 | I | -1]; the speed block carries -M^-1 times
// the first n-1 columns of H (exact because H rows sum to zero) and -D_i/M_i
// on the diagonal, so stability corresponds to non-positive real parts.
struct StateSpaceModel {
    Eigen::MatrixXd A;                      // (2n-1) x (2n-1)
    std::vector<std::string> state_labels;  // "delta(b,ref)" x (n-1), "omega(b)" x n
    std::vector<GenParams> gens;            // reference generator last
    int reference_bus = 0;
    double base_freq = 60.0;

    int n_gens() const { return static_cast<int>(gens.size()); }
    int dim() const { return static_cast<int>(A.rows()); }

    // Blocks of A in the partitioned layout used by the characteristic matrix:
    // h_i (n-1)x(n-1), h_n 1x(n-1), d_i diagonal entries, d_n scalar.
    Eigen::MatrixXd block_h_i() const;
    Eigen::RowVectorXd block_h_n() const;
    Eigen::VectorXd block_d_i() const;
    double block_d_n() const;
};

// Assembles the state matrix from the Laplacian and the dynamic generators in
// red.boundary_buses order.  reference_bus < 0 picks the default: the dynamic
// generator at the slack bus, else the largest-inertia generator.  Throws
// NumericalError if any retained generator has M <= 0.
StateSpaceModel assemble_state_matrix(const Laplacian& lap, const ReducedNetwork& red,
                                      const NetworkCase& net, int reference_bus = -1);

// End-to-end convenience: power flow -> fold -> Kron -> Laplacian -> A.
StateSpaceModel linearize_case(const NetworkCase& net, int reference_bus = -1);

}  // namespace gridsync
