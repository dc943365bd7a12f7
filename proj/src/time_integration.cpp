#include "polywave/time_integration.hpp"

#include <cmath>

#include "polywave/errors.hpp"

namespace polywave {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("IntegratorConfig: dt must be positive");
    if (!(beta_nm > 0.0 && beta_nm <= 1.0))
        throw ConfigError("IntegratorConfig: beta_nm must be in (0,1]");
    if (!(tol > 0.0)) throw ConfigError("IntegratorConfig: TOL must be positive");
    if (max_fixed_point_iters < 1)
        throw ConfigError("IntegratorConfig: max_fixed_point_iters must be >= 1");
}

namespace {

void ensure_diag_index(SecondOrderSystem& sys) {
    if (!sys.ktilde_diag_index.empty()) return;
    const int nb = sys.mass.block_size;
    sys.ktilde_diag_index.resize(static_cast<std::size_t>(sys.n()) * nb);
    for (int b = 0; b < sys.mass.n_blocks; ++b) {
        const int off = b * nb;
        for (int i = 0; i < nb; ++i) {
            const int base = sys.ktilde.find(off + i, off);
            if (base < 0)
                throw NumericError("SecondOrderSystem: ktilde pattern lacks diagonal blocks");
            for (int j = 0; j < nb; ++j)
                sys.ktilde_diag_index[static_cast<std::size_t>(off + i) * nb + j] = base + j;
        }
    }
}

double boc2_of_block(const SecondOrderSystem& sys, int block) {
    return sys.b_over_c2_block.empty() ? 0.0 : sys.b_over_c2_block[block];
}

// out = psi + (b/c^2) psi_dot, per-block coefficient.
void aux_state(const SecondOrderSystem& sys, std::span<const double> psi,
               std::span<const double> psi_dot, std::span<double> out) {
    const int nb = sys.mass.block_size;
    for (int b = 0; b < sys.mass.n_blocks; ++b) {
        const double s = boc2_of_block(sys, b);
        for (int i = 0; i < nb; ++i) {
            const int j = b * nb + i;
            out[j] = psi[j] + s * psi_dot[j];
        }
    }
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

std::vector<double> compute_initial_acceleration(std::span<const double> psi0,
                                                 std::span<const double> psi1,
                                                 SecondOrderSystem& sys, double t0) {
    const int n = sys.n();
    std::vector<double> aux(n), rhs(n, 0.0), kaux(n);
    if (sys.load) sys.load(t0, rhs);
    aux_state(sys, psi0, psi1, aux);
    spmv(sys.ktilde, aux, kaux, Exec::serial);
    for (int i = 0; i < n; ++i) rhs[i] -= kaux[i];

    BlockDiagMatrix eff = sys.mass;
    if (sys.nonlinear_mass) {
        double degen = 0.0;
        BlockDiagMatrix nl = sys.nonlinear_mass(psi1, &degen);
        if (degen >= 1.0)
            throw NumericError("compute_initial_acceleration: degenerate effective mass "
                               "(max |2k psi_dot| = " +
                               std::to_string(degen) + ")");
        for (std::size_t i = 0; i < eff.blocks.size(); ++i) eff.blocks[i] -= nl.blocks[i];
    }
    return solve_block_diag(eff, rhs);
}

StepReport generalized_alpha_step(State& state, SecondOrderSystem& sys,
                                  const IntegratorConfig& cfg) {
    cfg.validate();
    ensure_diag_index(sys);
    const int n = sys.n();
    const int nb = sys.mass.block_size;
    const double dt = cfg.dt;
    const double beta = cfg.beta_nm, gamma = cfg.gamma_nm;
    const double am = cfg.alpha_m, af = cfg.alpha_f;

    auto& ws = sys.scratch;
    if (ws.a_eff.n_rows != n) {
        ws.a_eff = sys.ktilde;
        ws.eff = sys.mass;
        ws.psi_star.resize(n);
        ws.psidot_star.resize(n);
        ws.s_block.resize(sys.mass.n_blocks);
        ws.rhs_base.resize(n);
        ws.aux.resize(n);
        ws.aux_n.resize(n);
        ws.tmp.resize(n);
        ws.accel.resize(n);
        ws.accel_new.resize(n);
        ws.psidot_k.resize(n);
        ws.rhs.resize(n);
        ws.y.assign(n, 0.0);
        ws.warm = false;
    }
    std::vector<double>&psi_star = ws.psi_star, &psidot_star = ws.psidot_star,
                       &s_block = ws.s_block, &rhs_base = ws.rhs_base, &aux = ws.aux,
                       &aux_n = ws.aux_n, &tmp = ws.tmp, &accel = ws.accel,
                       &accel_new = ws.accel_new, &psidot_k = ws.psidot_k, &rhs = ws.rhs,
                       &y = ws.y;
    CsrMatrix& a_eff = ws.a_eff;
    BlockDiagMatrix& eff = ws.eff;

    // Predictors.
    for (int i = 0; i < n; ++i) {
        psi_star[i] = state.psi[i] + dt * state.psi_dot[i] +
                      dt * dt * (0.5 - beta) * state.psi_ddot[i];
        psidot_star[i] = state.psi_dot[i] + dt * (1.0 - gamma) * state.psi_ddot[i];
    }

    // Per-block scaling s = beta dt^2 + gamma dt (b/c^2); the corrector solves
    // the symmetric system in y = s a.
    for (int b = 0; b < sys.mass.n_blocks; ++b)
        s_block[b] = beta * dt * dt + gamma * dt * boc2_of_block(sys, b);

    const double t_f = state.t + (1.0 - af) * dt;

    // Iterate-independent right-hand side:
    // load(t_f) - Ktilde [(1-af)(psi* + Dbc2 psidot*) + af (psi_n + Dbc2 psidot_n)].
    std::fill(rhs_base.begin(), rhs_base.end(), 0.0);
    if (sys.load) sys.load(t_f, rhs_base);
    aux_state(sys, psi_star, psidot_star, aux);
    aux_state(sys, state.psi, state.psi_dot, aux_n);
    for (int i = 0; i < n; ++i) aux[i] = (1.0 - af) * aux[i] + af * aux_n[i];
    spmv(sys.ktilde, aux, tmp, cfg.exec);
    for (int i = 0; i < n; ++i) rhs_base[i] -= tmp[i];

    std::copy(state.psi_ddot.begin(), state.psi_ddot.end(), accel.begin());
    if (!sys.nonlinear_mass)
        std::copy(sys.mass.blocks.begin(), sys.mass.blocks.end(), eff.blocks.begin());

    StepReport report;
    const bool linear = !sys.nonlinear_mass;
    const int kappa_max = linear ? 1 : cfg.max_fixed_point_iters;

    for (int kappa = 1; kappa <= kappa_max; ++kappa) {
        // Effective mass with the nonlinear block frozen at the current iterate.
        if (sys.nonlinear_mass) {
            for (int i = 0; i < n; ++i) psidot_k[i] = psidot_star[i] + gamma * dt * accel[i];
            double degen = 0.0;
            BlockDiagMatrix nl = sys.nonlinear_mass(psidot_k, &degen);
            report.degeneracy_max = degen;
            if (degen >= 1.0)
                throw NumericError("time step at t = " + std::to_string(state.t) +
                                   ": degeneracy (max |2k psi_dot| = " + std::to_string(degen) +
                                   " >= 1)");
            for (std::size_t i = 0; i < eff.blocks.size(); ++i)
                eff.blocks[i] = sys.mass.blocks[i] - nl.blocks[i];
        }

        // A = (1-am)(M-N) S^{-1} + (1-af) Ktilde, SPD in the scaled unknown.
        const double kscale = 1.0 - af;
        for (std::size_t i = 0; i < a_eff.vals.size(); ++i)
            a_eff.vals[i] = kscale * sys.ktilde.vals[i];
        for (int b = 0; b < sys.mass.n_blocks; ++b) {
            const double mscale = (1.0 - am) / s_block[b];
            const double* blk = eff.block(b);
            const int off = b * nb;
            for (int i = 0; i < nb; ++i) {
                const std::size_t base = static_cast<std::size_t>(off + i) * nb;
                for (int j = 0; j < nb; ++j)
                    a_eff.vals[sys.ktilde_diag_index[base + j]] += mscale * blk[i * nb + j];
            }
        }

        rhs = rhs_base;
        if (am != 0.0) {
            block_diag_matvec(eff, state.psi_ddot, tmp, cfg.exec);
            for (int i = 0; i < n; ++i) rhs[i] -= am * tmp[i];
        }

        BlockJacobi precond = BlockJacobi::build(a_eff, nb);
        SolveReport solve = solve_spd(a_eff, rhs, y, precond, cfg.cg_tol, cfg.cg_max_iter,
                                      cfg.exec, ws.warm);
        ws.warm = true;
        report.cg_iters_total += solve.iterations;
        for (int b = 0; b < sys.mass.n_blocks; ++b) {
            const double inv_s = 1.0 / s_block[b];
            for (int i = 0; i < nb; ++i) accel_new[b * nb + i] = y[b * nb + i] * inv_s;
        }
        report.fixed_point_iters = kappa;

        if (linear) {
            // No lagged term: the first corrector solve is the fixed point.
            accel.swap(accel_new);
            report.rel_change = 0.0;
            break;
        }
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = accel_new[i] - accel[i];
            diff += d * d;
        }
        const double denom = std::max(norm2(accel_new), 1e-300);
        report.rel_change = std::sqrt(diff) / denom;
        accel.swap(accel_new);
        if (report.rel_change < cfg.tol) break;
        if (kappa == kappa_max)
            throw NumericError("time step at t = " + std::to_string(state.t) +
                               ": fixed point did not converge in " + std::to_string(kappa_max) +
                               " iterations (relative change " +
                               std::to_string(report.rel_change) + ")");
    }

    for (int i = 0; i < n; ++i) {
        state.psi[i] = psi_star[i] + beta * dt * dt * accel[i];
        state.psi_dot[i] = psidot_star[i] + gamma * dt * accel[i];
        state.psi_ddot[i] = accel[i];
    }
    state.t += dt;
    return report;
}

StepReport newmark_step(State& state, SecondOrderSystem& sys, const IntegratorConfig& cfg) {
    IntegratorConfig nm = cfg;
    nm.scheme = Scheme::newmark;
    nm.alpha_m = 0.0;
    nm.alpha_f = 0.0;
    return generalized_alpha_step(state, sys, nm);
}

std::vector<StepReport> run(State& state, SecondOrderSystem& sys, const IntegratorConfig& cfg,
                            const StepCallback& on_step) {
    cfg.validate();
    const double t0 = state.t;
    const double horizon = cfg.final_time - t0;
    if (horizon <= 0.0) return {};
    const long long n_steps = std::llround(horizon / cfg.dt);
    if (n_steps < 1) throw ConfigError("run: final_time shorter than one step");

    std::vector<StepReport> reports;
    reports.reserve(static_cast<std::size_t>(n_steps));
    for (long long step = 1; step <= n_steps; ++step) {
        StepReport rep = cfg.scheme == Scheme::newmark ? newmark_step(state, sys, cfg)
                                                       : generalized_alpha_step(state, sys, cfg);
        state.t = t0 + static_cast<double>(step) * cfg.dt;
        reports.push_back(rep);
        if (on_step) on_step(static_cast<int>(step), state, rep);
    }
    return reports;
}

} // namespace polywave
