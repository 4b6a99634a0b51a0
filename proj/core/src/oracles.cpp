#include "gridsync/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "gridsync/errors.hpp"

namespace gridsync {

OracleReport schur_oracle(const AdmittanceMatrix& Y_folded, const std::vector<int>& boundary_ids,
                          const NetworkCase& net, const PowerFlowSolution& sol) {
    OracleReport rep;
    rep.name = "schur_complement";
    rep.tolerance = 1e-10;

    std::vector<int> boundary = boundary_ids;
    std::sort(boundary.begin(), boundary.end());
    std::vector<int> bidx, iidx;
    for (size_t i = 0; i < net.buses.size(); ++i) {
        if (std::binary_search(boundary.begin(), boundary.end(), net.buses[i].id))
            bidx.push_back(static_cast<int>(i));
        else
            iidx.push_back(static_cast<int>(i));
    }
    const auto nb = static_cast<Eigen::Index>(bidx.size());
    const auto ni = static_cast<Eigen::Index>(iidx.size());
    Eigen::MatrixXcd Ybb(nb, nb), Ybi(nb, ni), Yib(ni, nb), Yii(ni, ni);
    for (Eigen::Index a = 0; a < nb; ++a) {
        for (Eigen::Index b = 0; b < nb; ++b) Ybb(a, b) = Y_folded.Y(bidx[a], bidx[b]);
        for (Eigen::Index b = 0; b < ni; ++b) Ybi(a, b) = Y_folded.Y(bidx[a], iidx[b]);
    }
    for (Eigen::Index a = 0; a < ni; ++a) {
        for (Eigen::Index b = 0; b < nb; ++b) Yib(a, b) = Y_folded.Y(iidx[a], bidx[b]);
        for (Eigen::Index b = 0; b < ni; ++b) Yii(a, b) = Y_folded.Y(iidx[a], iidx[b]);
    }

    Eigen::MatrixXcd schur;
    if (ni == 0) {
        schur = Ybb;
    } else {
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(Yii);
        if (!lu.isInvertible()) {
            rep.applicable = false;
            rep.detail = "interior block is singular; Schur complement undefined";
            return rep;
        }
        schur = Ybb - Ybi * lu.solve(Yib);
    }

    Eigen::MatrixXcd reduced;
    try {
        reduced = kron_reduce(Y_folded, boundary, net, sol).Y_red;
    } catch (const Error& e) {
        rep.pass = false;
        rep.detail = std::string("kron_reduce failed: ") + e.what();
        return rep;
    }
    rep.max_abs_error = (reduced - schur).cwiseAbs().maxCoeff();
    const double scale = std::max(1e-300, schur.cwiseAbs().maxCoeff());
    rep.max_rel_error = rep.max_abs_error / scale;
    rep.pass = rep.max_rel_error <= rep.tolerance;
    return rep;
}

namespace {

// Boundary active injections evaluated directly from S = V conj(Y V); kept
// separate from compute_injections so the finite-difference route stays
// independent of the implementation it checks.
Eigen::VectorXd boundary_injections(const Eigen::MatrixXcd& Y, const Eigen::VectorXd& vm,
                                    const Eigen::VectorXd& va) {
    Eigen::VectorXcd v(vm.size());
    for (Eigen::Index i = 0; i < vm.size(); ++i) v(i) = std::polar(vm(i), va(i));
    const Eigen::VectorXcd s = v.cwiseProduct((Y * v).conjugate());
    return s.real();
}

}  // namespace

OracleReport fd_jacobian_oracle(const ReducedNetwork& red, const Laplacian& lap, double step) {
    OracleReport rep;
    rep.name = "finite_difference_laplacian";
    rep.tolerance = 1e-5;
    const Eigen::Index n = red.Y_red.rows();
    Eigen::MatrixXd fd(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd up = red.va, dn = red.va;
        up(j) += step;
        dn(j) -= step;
        fd.col(j) = (boundary_injections(red.Y_red, red.vm, up) -
                     boundary_injections(red.Y_red, red.vm, dn)) /
                    (2.0 * step);
    }
    rep.max_abs_error = (fd - lap.H).cwiseAbs().maxCoeff();
    // unit floor: an (numerically) angle-independent injection has H ~ 0 and
    // only differencing noise to compare against
    const double scale = std::max(1.0, lap.H.cwiseAbs().maxCoeff());
    rep.max_rel_error = rep.max_abs_error / scale;
    rep.pass = rep.max_rel_error <= rep.tolerance;
    return rep;
}

OracleReport polyroot_oracle(const StateSpaceModel& model, const ModalResult& modal) {
    OracleReport rep;
    rep.name = "characteristic_polynomial_roots";
    rep.tolerance = 1e-6;
    const int n = model.n_gens();
    if (n < 2 || n > 4) {
        rep.applicable = false;
        rep.detail = "companion route is used only for 2 <= n <= 4 (got n = " +
                     std::to_string(n) + ")";
        return rep;
    }
    const CharacteristicCoeffs c = characteristic_coefficients(model);
    const int m = c.order();

    // Block companion linearization of the monic cubic matrix polynomial.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(3 * m, 3 * m);
    comp.block(0, m, m, m).setIdentity();
    comp.block(m, 2 * m, m, m).setIdentity();
    comp.block(2 * m, 0, m, m) = -c.xi;
    comp.block(2 * m, m, m, m) = -c.gamma;
    comp.block(2 * m, 2 * m, m, m) = -c.beta;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        rep.pass = false;
        rep.detail = "companion eigensolver failed";
        return rep;
    }
    std::vector<std::complex<double>> roots(es.eigenvalues().data(),
                                            es.eigenvalues().data() + 3 * m);

    // det p carries an analytic (n-2)-fold root at d_n on top of the system
    // spectrum; peel those off before matching.
    const double d_n = model.block_d_n();
    const double scale =
        std::max(1.0, modal.eigenvalues.size() ? modal.eigenvalues.cwiseAbs().maxCoeff() : 0.0);
    for (int k = 0; k < n - 2; ++k) {
        auto it = std::min_element(roots.begin(), roots.end(),
                                   [&](const std::complex<double>& a,
                                       const std::complex<double>& b) {
                                       return std::abs(a - d_n) < std::abs(b - d_n);
                                   });
        if (std::abs(*it - d_n) > rep.tolerance * scale) {
            rep.pass = false;
            rep.detail = "expected analytic root at d_n not found";
            return rep;
        }
        roots.erase(it);
    }

    double hausdorff = 0.0;
    for (const auto& r : roots) {
        double best = std::numeric_limits<double>::max();
        for (Eigen::Index i = 0; i < modal.eigenvalues.size(); ++i)
            best = std::min(best, std::abs(r - modal.eigenvalues(i)));
        hausdorff = std::max(hausdorff, best);
    }
    for (Eigen::Index i = 0; i < modal.eigenvalues.size(); ++i) {
        double best = std::numeric_limits<double>::max();
        for (const auto& r : roots) best = std::min(best, std::abs(r - modal.eigenvalues(i)));
        hausdorff = std::max(hausdorff, best);
    }
    rep.max_abs_error = hausdorff;
    rep.max_rel_error = hausdorff / scale;
    rep.pass = rep.max_rel_error <= rep.tolerance;
    return rep;
}

std::vector<OracleReport> run_all_oracles(const NetworkCase& net) {
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    if (!sol.converged) throw NumericalError("power flow did not converge; oracles need an equilibrium");
    const AdmittanceMatrix folded = fold_constant_elements(net, Y, sol);
    std::vector<int> boundary;
    for (const auto& g : net.generators)
        if (g.is_dynamic() &&
            std::find(boundary.begin(), boundary.end(), g.bus) == boundary.end())
            boundary.push_back(g.bus);
    const ReducedNetwork red = kron_reduce(folded, boundary, net, sol);
    const Laplacian lap = build_laplacian(red);
    const StateSpaceModel model = assemble_state_matrix(lap, red, net);
    const ModalResult modal = eigen_analysis(model);

    std::vector<OracleReport> out;
    out.push_back(schur_oracle(folded, boundary, net, sol));
    out.push_back(fd_jacobian_oracle(red, lap));
    out.push_back(polyroot_oracle(model, modal));
    return out;
}

}  // namespace gridsync
