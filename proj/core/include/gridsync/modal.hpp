#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsync/linearize.hpp"

namespace gridsync {

enum class Verdict { Stable, Marginal, Unstable };

std::string to_string(Verdict v);

struct InternalMode {
    int eig_index = 0;      // index of the +Im member of the conjugate pair
    double zeta = 0.0;      // damping ratio
    double omega_n = 0.0;   // natural frequency, rad/s
};

struct CouplingMode {
    int eig_index = 0;
    double k_d = 0.0;  // eigenvalue is -k_d; positive for stable modes
};

struct ModalResult {
    Eigen::VectorXcd eigenvalues;   // 2n-1 values, 1/s
    Eigen::MatrixXcd eigenvectors;  // columns matching eigenvalues
    std::vector<InternalMode> internal_modes;
    std::vector<CouplingMode> coupling_modes;
    Verdict verdict = Verdict::Unstable;
    int dominant_mode = 0;  // index of eigenvalue with largest real part
    double max_re = 0.0;
    double tol_marginal = 0.0;
};

// Computes the spectrum of A, classifies modes and renders the verdict:
// stable iff max Re(lambda) < -tol, marginal iff |max Re| <= tol, with
// tol = 1e-9 * ||A||_inf.  Throws NumericalError if the solver fails or the
// eigenvalue sum deviates from trace(A) beyond 1e-8 relative.
ModalResult eigen_analysis(const StateSpaceModel& model);

// Coefficients of the cubic matrix polynomial p(l) = a l^3 + b l^2 + g l + x
// whose determinant vanishes at the system eigenvalues:
//   a = I,  b = -d_i - d_n I,  g = d_i d_n - h_i + 1 (x) h_n,
//   x = h_i d_n - d_i (1 (x) h_n)
// with h_i, h_n, d_i, d_n the partitioned blocks of A.
struct CharacteristicCoeffs {
    Eigen::MatrixXd alpha, beta, gamma, xi;  // each (n-1) x (n-1)

    int order() const { return static_cast<int>(alpha.rows()); }
};

CharacteristicCoeffs characteristic_coefficients(const StateSpaceModel& model);

// det(alpha l^3 + beta l^2 + gamma l + xi)
std::complex<double> det_characteristic(const CharacteristicCoeffs& coeffs,
                                        std::complex<double> lambda);

// Homogeneous-damping shortcut: for uniform damping factor d_s (the signed
// factor, -D/M for a stable machine) the 2(n-1) internal modes are
//   l = 0.5 d_s +- 0.5 sqrt(d_s^2 + 4 l_h)
// over the eigenvalues l_h of the relative submatrix h = h_i - 1 (x) h_n.
std::vector<std::complex<double>> homogeneous_eigen(const Eigen::MatrixXd& h_rel, double d_s);

// Derives (h_rel, d_s) from a model whose generators share the same D/M and
// applies the shortcut.  Throws PreconditionError when per-generator damping
// factors differ by more than 1e-9 relative.
std::vector<std::complex<double>> homogeneous_eigen(const StateSpaceModel& model);

// Assigns every eigenvalue to exactly one class: conjugate pairs become
// internal modes (zeta, omega_n), real eigenvalues become coupling modes.
void classify_modes(ModalResult& result);

// One row of the eigenvalue loci table emitted by parameter sweeps.
struct LociRow {
    std::string scenario;
    int eig_index = 0;
    double re = 0.0;
    double im = 0.0;
    std::string mode_class;  // "internal" | "coupling"
    double zeta = 0.0;
    double omega_n = 0.0;
};

struct ScalingScenario {
    std::string name;
    double scale_M = 1.0;  // applied to every generator
    double scale_D = 1.0;
};

// Re-assembles the state matrix under each (M, D) scaling and collects the
// full spectrum per scenario.  The base case must be analyzable; scenario
// rows are emitted in input order.
std::vector<LociRow> sensitivity_sweep(const Laplacian& lap, const ReducedNetwork& red,
                                       const NetworkCase& net,
                                       const std::vector<ScalingScenario>& scenarios,
                                       int reference_bus = -1);

}  // namespace gridsync
