#pragma once

#include <functional>

#include "polywave/sparse.hpp"

namespace polywave {

struct State {
    double t = 0.0;
    std::vector<double> psi;
    std::vector<double> psi_dot;
    std::vector<double> psi_ddot;
};

enum class Scheme { newmark, generalized_alpha };

struct IntegratorConfig {
    Scheme scheme = Scheme::newmark;
    double beta_nm = 0.25;
    double gamma_nm = 0.5;
    double alpha_m = 0.0;
    double alpha_f = 0.0;
    double dt = 1e-3;
    double final_time = 1.0;
    double tol = 1e-5; // fixed-point relative tolerance
    int max_fixed_point_iters = 100;
    double cg_tol = 1e-12;
    int cg_max_iter = -1;
    Exec exec = Exec::parallel;

    void validate() const;
};

struct StepReport {
    int fixed_point_iters = 0;
    double rel_change = 0.0;
    double degeneracy_max = 0.0; // max |2k psi_dot_h| at quadrature points
    int cg_iters_total = 0;
};

/// M psi_ddot - N(psi_dot) psi_ddot + Ktilde (psi + (b/c^2) psi_dot) = load(t),
/// with everything the stepper needs behind value/closure members so that both
/// the assembled PDE and small test systems fit.
struct SecondOrderSystem {
    BlockDiagMatrix mass;
    CsrMatrix ktilde;
    std::vector<double> b_over_c2_block; // per block; empty means zero
    std::vector<int> ktilde_diag_index;  // filled on demand
    std::function<BlockDiagMatrix(std::span<const double> psi_dot, double* degeneracy_max)>
        nonlinear_mass; // null for linear problems
    std::function<void(double t, std::span<double> out)> load; // null for homogeneous

    int n() const { return mass.rows(); }

    // Stepper workspace, reused across steps.
    struct Scratch {
        CsrMatrix a_eff;
        BlockDiagMatrix eff;
        std::vector<double> psi_star, psidot_star, s_block, rhs_base, aux, aux_n, tmp;
        std::vector<double> accel, accel_new, psidot_k, rhs, y;
        bool warm = false;
    };
    Scratch scratch;
};

/// psi_ddot(0) from consistency of the semi-discrete system at the initial time.
std::vector<double> compute_initial_acceleration(std::span<const double> psi0,
                                                 std::span<const double> psi1,
                                                 SecondOrderSystem& sys, double t0 = 0.0);

/// One step of the Chung-Hulbert generalized-alpha predictor-corrector with the
/// lagged-nonlinearity fixed point; alpha_m = alpha_f = 0 is the Newmark scheme.
StepReport generalized_alpha_step(State& state, SecondOrderSystem& sys,
                                  const IntegratorConfig& cfg);
StepReport newmark_step(State& state, SecondOrderSystem& sys, const IntegratorConfig& cfg);

using StepCallback = std::function<void(int step, const State&, const StepReport&)>;

/// Integrate from state.t to final_time; the callback sees every accepted step.
std::vector<StepReport> run(State& state, SecondOrderSystem& sys, const IntegratorConfig& cfg,
                            const StepCallback& on_step = nullptr);

} // namespace polywave
