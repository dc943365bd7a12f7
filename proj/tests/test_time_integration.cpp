#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "polywave/assembly.hpp"
#include "polywave/errors.hpp"
#include "polywave/time_integration.hpp"

using namespace polywave;

namespace {

SecondOrderSystem oscillator(double omega) {
    SecondOrderSystem sys;
    sys.mass = BlockDiagMatrix::identity(1, 1);
    sys.ktilde.n_rows = sys.ktilde.n_cols = 1;
    sys.ktilde.row_offsets = {0, 1};
    sys.ktilde.cols = {0};
    sys.ktilde.vals = {omega * omega};
    return sys;
}

// One-step amplification matrix of the scheme on the scalar oscillator,
// columns = images of the unit states (psi, psi_dot, psi_ddot).
std::array<double, 9> amplification_matrix(double omega, const IntegratorConfig& cfg) {
    std::array<double, 9> a{};
    for (int j = 0; j < 3; ++j) {
        SecondOrderSystem sys = oscillator(omega);
        State s;
        s.t = 0.0;
        s.psi = {j == 0 ? 1.0 : 0.0};
        s.psi_dot = {j == 1 ? 1.0 : 0.0};
        s.psi_ddot = {j == 2 ? 1.0 : 0.0};
        generalized_alpha_step(s, sys, cfg);
        a[0 * 3 + j] = s.psi[0];
        a[1 * 3 + j] = s.psi_dot[0];
        a[2 * 3 + j] = s.psi_ddot[0];
    }
    return a;
}

// Roots of the characteristic cubic det(A - lambda I) via Cardano.
std::array<std::complex<double>, 3> eigenvalues3(const std::array<double, 9>& a) {
    const double tr = a[0] + a[4] + a[8];
    const double m2 = a[0] * a[4] - a[1] * a[3] + a[0] * a[8] - a[2] * a[6] +
                      a[4] * a[8] - a[5] * a[7];
    const double det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
                       a[2] * (a[3] * a[7] - a[4] * a[6]);
    // lambda^3 - tr lambda^2 + m2 lambda - det = 0.
    const std::complex<double> b(-tr, 0), c(m2, 0), d(-det, 0);
    const std::complex<double> p = c - b * b / 3.0;
    const std::complex<double> q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const std::complex<double> disc = q * q / 4.0 + p * p * p / 27.0;
    const std::complex<double> sq = std::sqrt(disc);
    std::complex<double> u = std::pow(-q / 2.0 + sq, 1.0 / 3.0);
    if (std::abs(u) < 1e-30) u = std::pow(-q / 2.0 - sq, 1.0 / 3.0);
    const std::complex<double> v = std::abs(u) > 1e-30 ? -p / (3.0 * u) : 0.0;
    const std::complex<double> w(-0.5, 0.5 * std::sqrt(3.0));
    std::array<std::complex<double>, 3> roots;
    roots[0] = u + v - b / 3.0;
    roots[1] = u * w + v * std::conj(w) - b / 3.0;
    roots[2] = u * std::conj(w) + v * w - b / 3.0;
    return roots;
}

double spectral_radius(double omega, const IntegratorConfig& cfg) {
    auto roots = eigenvalues3(amplification_matrix(omega, cfg));
    double r = 0.0;
    for (const auto& z : roots) r = std::max(r, std::abs(z));
    return r;
}

} // namespace

TEST_SUITE("time_integration") {

    TEST_CASE("average-acceleration Newmark: spectral radius 1, exact phase formula") {
        IntegratorConfig cfg;
        cfg.beta_nm = 0.25;
        cfg.gamma_nm = 0.5;
        for (double wdt : {0.1, 0.5, 1.0, 2.0}) {
            const double omega = 3.7;
            cfg.dt = wdt / omega;
            auto roots = eigenvalues3(amplification_matrix(omega, cfg));
            double rho = 0.0;
            double phase = 0.0;
            for (const auto& z : roots) {
                if (std::abs(z) > rho) rho = std::abs(z);
                if (std::abs(std::imag(z)) > 1e-8) phase = std::abs(std::arg(z));
            }
            CHECK(std::abs(rho - 1.0) <= 1e-13);
            // Discrete phase of the principal pair: 2 atan(omega dt / 2).
            CHECK(phase == doctest::Approx(2.0 * std::atan(wdt / 2.0)).epsilon(1e-11));
        }
    }

    TEST_CASE("generalized-alpha: stability at the channel parameters") {
        IntegratorConfig cfg;
        cfg.scheme = Scheme::generalized_alpha;
        cfg.beta_nm = 4.0 / 9.0;
        cfg.gamma_nm = 5.0 / 6.0;
        cfg.alpha_m = 0.0;
        cfg.alpha_f = 1.0 / 3.0;
        const double omega = 2.2;
        for (double wdt : {0.25, 0.5, 1.0, 2.0}) {
            cfg.dt = wdt / omega;
            CHECK(spectral_radius(omega, cfg) <= 1.0 + 1e-12);
        }
        // High frequencies are damped.
        cfg.dt = 10.0 / omega;
        CHECK(spectral_radius(omega, cfg) < 1.0 - 1e-6);
    }

    TEST_CASE("generalized-alpha with zero alphas equals Newmark bitwise") {
        SecondOrderSystem sys_a = oscillator(2.0);
        SecondOrderSystem sys_b = oscillator(2.0);
        IntegratorConfig nm;
        nm.scheme = Scheme::newmark;
        nm.beta_nm = 0.3;
        nm.gamma_nm = 0.55;
        nm.dt = 0.05;
        IntegratorConfig ga = nm;
        ga.scheme = Scheme::generalized_alpha;
        ga.alpha_m = 0.0;
        ga.alpha_f = 0.0;

        State a, b;
        a.psi = {0.7};
        a.psi_dot = {-0.3};
        a.psi_ddot = {-4.0 * 0.7};
        b = a;
        for (int step = 0; step < 50; ++step) {
            newmark_step(a, sys_a, nm);
            generalized_alpha_step(b, sys_b, ga);
            CHECK(a.psi[0] == b.psi[0]);
            CHECK(a.psi_dot[0] == b.psi_dot[0]);
            CHECK(a.psi_ddot[0] == b.psi_ddot[0]);
        }
    }

    TEST_CASE("initial acceleration: zero data and scalar closed form") {
        SecondOrderSystem sys = oscillator(3.0);
        std::vector<double> zero = {0.0};
        auto a0 = compute_initial_acceleration(zero, zero, sys);
        CHECK(a0[0] == 0.0);

        // psi_ddot(0) = -omega^2 psi0 for the oscillator.
        std::vector<double> psi0 = {0.4}, psi1 = {0.0};
        auto a1 = compute_initial_acceleration(psi0, psi1, sys);
        CHECK(a1[0] == doctest::Approx(-9.0 * 0.4).epsilon(1e-14));
    }

    TEST_CASE("initial acceleration: single-cell p=0 closed form") {
        PolyMesh mesh = finalize_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}}, {0, 0, 1, 1});
        DgSpace space = build_space(mesh, 0);
        MaterialParams mat = MaterialParams::uniform(1.0, 0.0, 0.0, 1.0);
        StabilizationParams stab{10.0, 0};
        GlobalOperators ops = assemble_operators(space, mat, stab);

        SecondOrderSystem sys;
        sys.mass = ops.mass;
        sys.ktilde = ops.ktilde;
        sys.ktilde_diag_index = ops.ktilde_diag_index;
        sys.b_over_c2_block = {0.0};

        // Ktilde = P at p = 0: integral over the boundary of chi * (1/area).
        // chi = beta c^2 p^2 / h is zero at p = 0, so Ktilde = 0.
        std::vector<double> psi0 = {2.0}, psi1 = {0.0};
        auto a0 = compute_initial_acceleration(psi0, psi1, sys);
        CHECK(a0[0] == 0.0);

        // With p=1 and constant initial data the acceleration solves
        // M a = -Ktilde psi0.
        DgSpace space1 = build_space(mesh, 1);
        GlobalOperators ops1 = assemble_operators(space1, mat, {10.0, 1});
        SecondOrderSystem sys1;
        sys1.mass = ops1.mass;
        sys1.ktilde = ops1.ktilde;
        sys1.ktilde_diag_index = ops1.ktilde_diag_index;
        sys1.b_over_c2_block = {0.0};
        std::vector<double> c0 = project(space1, [](Point2) { return 1.0; });
        std::vector<double> c1(space1.n_dofs, 0.0);
        auto acc = compute_initial_acceleration(c0, c1, sys1);
        std::vector<double> kpsi(space1.n_dofs);
        spmv(ops1.ktilde, c0, kpsi, Exec::serial);
        for (int i = 0; i < space1.n_dofs; ++i)
            CHECK(acc[i] == doctest::Approx(-kpsi[i]).epsilon(1e-12).scale(1.0));
    }

    TEST_CASE("linear problems exit the fixed point after one solve") {
        SecondOrderSystem sys = oscillator(1.5);
        State s;
        s.psi = {1.0};
        s.psi_dot = {0.0};
        s.psi_ddot = {-1.5 * 1.5};
        IntegratorConfig cfg;
        cfg.dt = 0.01;
        StepReport rep = newmark_step(s, sys, cfg);
        CHECK(rep.fixed_point_iters == 1);
        CHECK(rep.rel_change == 0.0);
    }

    TEST_CASE("nonconvergence and degeneracy raise numeric errors") {
        SecondOrderSystem sys = oscillator(1.0);
        sys.nonlinear_mass = [](std::span<const double> psi_dot, double* degen) {
            BlockDiagMatrix n = BlockDiagMatrix::zero(1, 1);
            n.block(0)[0] = 0.4 * std::sin(3.0 * psi_dot[0]);
            if (degen) *degen = 0.2;
            return n;
        };
        State s;
        s.psi = {1.0};
        s.psi_dot = {2.0};
        s.psi_ddot = {0.0};
        IntegratorConfig cfg;
        cfg.dt = 0.5;
        cfg.max_fixed_point_iters = 1;
        CHECK_THROWS_AS(newmark_step(s, sys, cfg), NumericError);

        SecondOrderSystem sys2 = oscillator(1.0);
        sys2.nonlinear_mass = [](std::span<const double>, double* degen) {
            if (degen) *degen = 1.5; // degenerate factor
            return BlockDiagMatrix::zero(1, 1);
        };
        State s2;
        s2.psi = {1.0};
        s2.psi_dot = {2.0};
        s2.psi_ddot = {0.0};
        IntegratorConfig cfg2;
        cfg2.dt = 0.5;
        CHECK_THROWS_AS(newmark_step(s2, sys2, cfg2), NumericError);
    }

    TEST_CASE("zero data and forcing stay identically zero") {
        SecondOrderSystem sys = oscillator(2.0);
        State s;
        s.psi = {0.0};
        s.psi_dot = {0.0};
        s.psi_ddot = {0.0};
        IntegratorConfig cfg;
        cfg.dt = 0.1;
        cfg.final_time = 1.0;
        auto reports = run(s, sys, cfg);
        CHECK(reports.size() == 10);
        CHECK(s.psi[0] == 0.0);
        CHECK(s.psi_dot[0] == 0.0);
        CHECK(s.t == doctest::Approx(1.0));
    }

    TEST_CASE("energy conservation: linear undamped wave, 1000 steps") {
        const Rect dom{0.0, 0.0, 1.0, 2.0 / 3.0 * std::sqrt(3.0)};
        PolyMesh mesh = generate_hex_mesh(dom, 4);
        const int p = 2;
        DgSpace space = build_space(mesh, p);
        MaterialParams mat = MaterialParams::uniform(1.0, 0.0, 0.0, 1.0);
        GlobalOperators ops = assemble_operators(space, mat, {10.0, p});

        SecondOrderSystem sys;
        sys.mass = ops.mass;
        sys.ktilde = ops.ktilde;
        sys.ktilde_diag_index = ops.ktilde_diag_index;
        sys.b_over_c2_block.assign(mesh.n_cells(), 0.0);

        std::mt19937_64 rng(77);
        auto u01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
        State s;
        s.psi.resize(space.n_dofs);
        s.psi_dot.resize(space.n_dofs);
        for (double& x : s.psi) x = 2.0 * u01() - 1.0;
        for (double& x : s.psi_dot) x = 2.0 * u01() - 1.0;
        s.psi_ddot = compute_initial_acceleration(s.psi, s.psi_dot, sys);

        auto energy = [&](const State& st) {
            std::vector<double> tmp(space.n_dofs);
            spmv(sys.ktilde, st.psi, tmp, Exec::serial);
            double e = 0.0;
            for (int i = 0; i < space.n_dofs; ++i)
                e += 0.5 * st.psi_dot[i] * st.psi_dot[i] + 0.5 * st.psi[i] * tmp[i];
            return e;
        };
        const double e0 = energy(s);
        REQUIRE(e0 > 0.0);

        IntegratorConfig cfg;
        cfg.beta_nm = 0.25;
        cfg.gamma_nm = 0.5;
        cfg.dt = 1e-3;
        cfg.final_time = 1.0;
        run(s, sys, cfg);
        CHECK(std::abs(energy(s) - e0) / e0 <= 1e-8);
    }
}
