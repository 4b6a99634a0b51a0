#include "gridsync/modal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "gridsync/errors.hpp"

namespace gridsync {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Marginal: return "marginal";
        case Verdict::Unstable: return "unstable";
    }
    return "?";
}

void classify_modes(ModalResult& result) {
    result.internal_modes.clear();
    result.coupling_modes.clear();
    const Eigen::Index m = result.eigenvalues.size();
    const double scale = result.eigenvalues.size()
                             ? result.eigenvalues.cwiseAbs().maxCoeff()
                             : 0.0;
    const double im_tol = 1e-12 * (1.0 + scale);
    std::vector<bool> seen(static_cast<size_t>(m), false);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto l = result.eigenvalues(i);
        if (std::abs(l.imag()) <= im_tol) {
            seen[static_cast<size_t>(i)] = true;
            result.coupling_modes.push_back({static_cast<int>(i), -l.real()});
            continue;
        }
        if (seen[static_cast<size_t>(i)] || l.imag() < 0) continue;
        // find the conjugate partner
        Eigen::Index partner = -1;
        double best = std::numeric_limits<double>::max();
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == i || seen[static_cast<size_t>(j)] || result.eigenvalues(j).imag() >= 0)
                continue;
            const double dist = std::abs(result.eigenvalues(j) - std::conj(l));
            if (dist < best) {
                best = dist;
                partner = j;
            }
        }
        if (partner < 0) continue;  // defect; counted below via invariants
        seen[static_cast<size_t>(i)] = seen[static_cast<size_t>(partner)] = true;
        const double omega_n = std::abs(l);
        result.internal_modes.push_back({static_cast<int>(i), -l.real() / omega_n, omega_n});
    }
    std::sort(result.internal_modes.begin(), result.internal_modes.end(),
              [](const InternalMode& a, const InternalMode& b) { return a.omega_n < b.omega_n; });
    std::sort(result.coupling_modes.begin(), result.coupling_modes.end(),
              [](const CouplingMode& a, const CouplingMode& b) { return a.k_d < b.k_d; });
}

ModalResult eigen_analysis(const StateSpaceModel& model) {
    const Eigen::Index dim = model.A.rows();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(model.A, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigensolver failed on the state matrix");

    ModalResult res;
    res.eigenvalues = solver.eigenvalues();
    res.eigenvectors = solver.eigenvectors();

    // Cross-check: eigenvalue sum must reproduce trace(A).
    const double tr = model.A.trace();
    const double sum_re = res.eigenvalues.real().sum();
    const double denom = std::max(1.0, std::abs(tr));
    if (std::abs(sum_re - tr) / denom > 1e-8)
        throw NumericalError("eigenvalue sum deviates from trace(A) beyond 1e-8 relative");

    const double norm_A = model.A.cwiseAbs().rowwise().sum().maxCoeff();
    res.tol_marginal = 1e-9 * norm_A;
    Eigen::Index dominant = 0;
    res.eigenvalues.real().maxCoeff(&dominant);
    res.dominant_mode = static_cast<int>(dominant);
    res.max_re = res.eigenvalues(dominant).real();
    if (res.max_re < -res.tol_marginal)
        res.verdict = Verdict::Stable;
    else if (res.max_re <= res.tol_marginal)
        res.verdict = Verdict::Marginal;
    else
        res.verdict = Verdict::Unstable;

    classify_modes(res);
    const size_t classified = 2 * res.internal_modes.size() + res.coupling_modes.size();
    if (classified != static_cast<size_t>(dim))
        throw NumericalError("mode classification did not cover the spectrum");
    return res;
}

CharacteristicCoeffs characteristic_coefficients(const StateSpaceModel& model) {
    const int n = model.n_gens();
    const int m = n - 1;
    const Eigen::MatrixXd h_i = model.block_h_i();
    const Eigen::RowVectorXd h_n = model.block_h_n();
    const Eigen::VectorXd d_i = model.block_d_i();
    const double d_n = model.block_d_n();

    CharacteristicCoeffs c;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd one_hn = Eigen::VectorXd::Ones(m) * h_n;  // 1 (x) h_n
    c.alpha = I;
    c.beta = -Eigen::MatrixXd(d_i.asDiagonal()) - d_n * I;
    c.gamma = Eigen::MatrixXd(d_i.asDiagonal()) * d_n - h_i + one_hn;
    c.xi = h_i * d_n - Eigen::MatrixXd(d_i.asDiagonal()) * one_hn;
    return c;
}

std::complex<double> det_characteristic(const CharacteristicCoeffs& coeffs,
                                        std::complex<double> lambda) {
    const int m = coeffs.order();
    if (m == 0) return {1.0, 0.0};
    Eigen::MatrixXcd p = coeffs.alpha.cast<std::complex<double>>() * (lambda * lambda * lambda) +
                         coeffs.beta.cast<std::complex<double>>() * (lambda * lambda) +
                         coeffs.gamma.cast<std::complex<double>>() * lambda +
                         coeffs.xi.cast<std::complex<double>>();
    return p.determinant();
}

std::vector<std::complex<double>> homogeneous_eigen(const Eigen::MatrixXd& h_rel, double d_s) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(h_rel, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigensolver failed on the relative submatrix h");
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<size_t>(2 * h_rel.rows()));
    for (Eigen::Index k = 0; k < h_rel.rows(); ++k) {
        const std::complex<double> lh = solver.eigenvalues()(k);
        const std::complex<double> disc = std::sqrt(d_s * d_s + 4.0 * lh);
        out.push_back(0.5 * d_s + 0.5 * disc);
        out.push_back(0.5 * d_s - 0.5 * disc);
    }
    return out;
}

std::vector<std::complex<double>> homogeneous_eigen(const StateSpaceModel& model) {
    const int n = model.n_gens();
    double dmin = model.gens[0].d, dmax = model.gens[0].d;
    for (const auto& g : model.gens) {
        dmin = std::min(dmin, g.d);
        dmax = std::max(dmax, g.d);
    }
    if (dmax - dmin > 1e-9 * std::max(1.0, dmax))
        throw PreconditionError("heterogeneous damping factors: relative spread " +
                                std::to_string((dmax - dmin) / std::max(1e-300, dmax)) +
                                " exceeds 1e-9");
    const Eigen::MatrixXd h_rel =
        model.block_h_i() - Eigen::VectorXd::Ones(n - 1) * model.block_h_n();
    const double d_s = model.block_d_n();  // signed: -D/M on the diagonal
    return homogeneous_eigen(h_rel, d_s);
}

std::vector<LociRow> sensitivity_sweep(const Laplacian& lap, const ReducedNetwork& red,
                                       const NetworkCase& net,
                                       const std::vector<ScalingScenario>& scenarios,
                                       int reference_bus) {
    std::vector<LociRow> rows;
    for (const auto& sc : scenarios) {
        NetworkCase scaled = net;
        for (auto& g : scaled.generators) {
            if (!g.is_dynamic()) continue;
            g.inertia_M *= sc.scale_M;
            g.damping_D *= sc.scale_D;
        }
        const StateSpaceModel model = assemble_state_matrix(lap, red, scaled, reference_bus);
        const ModalResult modal = eigen_analysis(model);
        for (Eigen::Index k = 0; k < modal.eigenvalues.size(); ++k) {
            LociRow row;
            row.scenario = sc.name;
            row.eig_index = static_cast<int>(k);
            row.re = modal.eigenvalues(k).real();
            row.im = modal.eigenvalues(k).imag();
            row.mode_class = "internal";
            for (const auto& cm : modal.coupling_modes) {
                if (cm.eig_index == k) {
                    row.mode_class = "coupling";
                    row.zeta = 0.0;
                    row.omega_n = 0.0;
                }
            }
            if (row.mode_class == "internal") {
                const double omega_n = std::abs(modal.eigenvalues(k));
                row.omega_n = omega_n;
                row.zeta = omega_n > 0 ? -row.re / omega_n : 0.0;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace gridsync
