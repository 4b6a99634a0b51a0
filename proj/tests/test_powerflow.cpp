#include <doctest.h>

#include <random>

#include "gridsync/case_io.hpp"
#include "gridsync/errors.hpp"
#include "gridsync/powerflow.hpp"
#include "test_util.hpp"

using namespace gridsync;

TEST_CASE("single branch z = j0.1 gives the textbook 2x2 admittance") {
    const NetworkCase net = testutil::two_bus(0.1);
    const AdmittanceMatrix Y = build_admittance(net);
    CHECK(Y.Y(0, 0) == Complex(0.0, -10.0));
    CHECK(Y.Y(0, 1) == Complex(0.0, 10.0));
    CHECK(Y.Y(1, 0) == Complex(0.0, 10.0));
    CHECK(Y.Y(1, 1) == Complex(0.0, -10.0));
}

TEST_CASE("a pure shunt changes only its own diagonal") {
    NetworkCase net = testutil::two_bus(0.1);
    const AdmittanceMatrix before = build_admittance(net);
    net.branches[0].shunt_susceptance = 0.1;  // b/2 = 0.05 at each end
    const AdmittanceMatrix after = build_admittance(net);
    CHECK(std::abs(after.Y(0, 0) - before.Y(0, 0) - Complex(0.0, 0.05)) < 1e-14);
    CHECK(std::abs(after.Y(1, 1) - before.Y(1, 1) - Complex(0.0, 0.05)) < 1e-14);
    CHECK(after.Y(0, 1) == before.Y(0, 1));
}

TEST_CASE("9-bus admittance is symmetric and matches scalar assembly") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const AdmittanceMatrix Y = build_admittance(net);
    CHECK(Y.symmetry_error() < 1e-14);

    // independent element-by-element scalar loop
    const int nb = static_cast<int>(net.buses.size());
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(nb, nb);
    for (const auto& br : net.branches) {
        const int i = net.bus_index(br.from_bus), j = net.bus_index(br.to_bus);
        const Complex ys = Complex(1.0, 0.0) / br.series_impedance;
        ref(i, i) += ys + Complex(0, br.shunt_susceptance / 2);
        ref(j, j) += ys + Complex(0, br.shunt_susceptance / 2);
        ref(i, j) -= ys;
        ref(j, i) -= ys;
    }
    CHECK((Y.Y - ref).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("no-load flat start is immediately converged") {
    const NetworkCase net = testutil::two_bus(0.1);
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    CHECK(sol.converged);
    CHECK(sol.iterations <= 1);
    CHECK(sol.vm(1) == doctest::Approx(1.0));
    CHECK(sol.va(1) == doctest::Approx(0.0));
}

TEST_CASE("9-bus converges quickly from flat start with tiny residual") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    REQUIRE(sol.converged);
    CHECK(sol.iterations <= 6);
    CHECK(sol.max_mismatch <= 1e-8);
    CHECK(sol.va(net.bus_index(1)) == 0.0);  // slack angle pinned

    // residual evaluated independently of the solver
    const Eigen::VectorXd p = compute_injections(sol.vm, sol.va, Y);
    const Eigen::VectorXd p_sched = scheduled_active(net);
    for (int i = 0; i < 9; ++i) {
        if (net.buses[static_cast<size_t>(i)].kind == BusKind::Slack) continue;
        CHECK(std::abs(p(i) - p_sched(i)) <= 1e-8);
    }
}

TEST_CASE("load scaled x20 fails with a diagnostic instead of nonsense") {
    NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    for (auto& l : net.loads) {
        l.P *= 20.0;
        l.Q *= 20.0;
    }
    const AdmittanceMatrix Y = build_admittance(net);
    bool diagnosed = false;
    try {
        const PowerFlowSolution sol = solve_power_flow(net, Y);
        diagnosed = !sol.converged;
    } catch (const NumericalError&) {
        diagnosed = true;  // singular Jacobian is the other allowed outcome
    }
    CHECK(diagnosed);
}

TEST_CASE("injections vanish on a purely reactive network at flat voltage") {
    const NetworkCase net = testutil::two_bus(0.25);
    const AdmittanceMatrix Y = build_admittance(net);
    const Eigen::VectorXd vm = Eigen::VectorXd::Ones(2);
    const Eigen::VectorXd va = Eigen::VectorXd::Zero(2);
    const Eigen::VectorXd p = compute_injections(vm, va, Y);
    CHECK(p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lossless line conserves active power end to end") {
    const NetworkCase net = testutil::two_bus(0.1, 0.4, 0.0);
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    REQUIRE(sol.converged);
    const Eigen::VectorXd p = compute_injections(sol.vm, sol.va, Y);
    CHECK(p(0) == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(p(1) == doctest::Approx(-0.4).epsilon(1e-9));
}

TEST_CASE("complex power balances against an independent S = V (YV)* evaluation") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    REQUIRE(sol.converged);

    const Eigen::VectorXcd v = sol.phasors();
    const Eigen::VectorXcd i = Y.Y * v;
    const Complex total_inj = v.cwiseProduct(i.conjugate()).sum();
    // sum of injections = series + shunt losses, computed branch by branch
    Complex branch_losses(0, 0);
    for (const auto& br : net.branches) {
        const int a = net.bus_index(br.from_bus), b = net.bus_index(br.to_bus);
        const Complex flow = (v(a) - v(b)) / br.series_impedance;
        branch_losses += std::norm(flow) * br.series_impedance;
        const Complex shunt(0.0, -br.shunt_susceptance / 2.0);
        branch_losses += std::norm(v(a)) * shunt + std::norm(v(b)) * shunt;
    }
    CHECK(std::abs(total_inj - branch_losses) < 1e-8);
}

TEST_CASE("injection jacobian matches finite differences at random interior points") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const AdmittanceMatrix Y = build_admittance(net);
    std::mt19937 rng(20240911);
    std::uniform_real_distribution<double> dv(0.95, 1.05), da(-0.2, 0.2);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd vm(9), va(9);
        for (int i = 0; i < 9; ++i) {
            vm(i) = dv(rng);
            va(i) = da(rng);
        }
        const InjectionJacobian J = injection_jacobian(vm, va, Y);
        const double h = 1e-6;
        double worst = 0.0;
        for (int j = 0; j < 9; ++j) {
            Eigen::VectorXd up = va, dn = va;
            up(j) += h;
            dn(j) -= h;
            const Eigen::VectorXd col =
                (compute_injections(vm, up, Y) - compute_injections(vm, dn, Y)) / (2 * h);
            worst = std::max(worst, (col - J.dP_dva.col(j)).cwiseAbs().maxCoeff());

            Eigen::VectorXd vup = vm, vdn = vm;
            vup(j) += h;
            vdn(j) -= h;
            const Eigen::VectorXd colv =
                (compute_injections(vup, va, Y) - compute_injections(vdn, va, Y)) / (2 * h);
            worst = std::max(worst, (colv - J.dP_dvm.col(j)).cwiseAbs().maxCoeff());
        }
        const double scale = J.dP_dva.cwiseAbs().maxCoeff();
        CHECK(worst / scale < 1e-6);
    }
}

TEST_CASE("dimension mismatch is rejected") {
    const NetworkCase net = testutil::two_bus(0.1);
    const AdmittanceMatrix Y = build_admittance(net);
    const Eigen::VectorXd wrong = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(compute_injections(wrong, wrong, Y), PreconditionError);
}

TEST_CASE("admittance row sums equal the total shunt admittance per bus") {
    const NetworkCase net = load_case(testutil::data_path("ieee9.json"), CaseFormat::Json);
    const AdmittanceMatrix Y = build_admittance(net);
    Eigen::VectorXcd shunt = Eigen::VectorXcd::Zero(9);
    for (const auto& br : net.branches) {
        shunt(net.bus_index(br.from_bus)) += Complex(0.0, br.shunt_susceptance / 2.0);
        shunt(net.bus_index(br.to_bus)) += Complex(0.0, br.shunt_susceptance / 2.0);
    }
    const Eigen::VectorXcd row_sums = Y.Y.rowwise().sum();
    CHECK((row_sums - shunt).cwiseAbs().maxCoeff() < 1e-13);
}
