#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "polywave/assembly.hpp"
#include "polywave/time_integration.hpp"

namespace polywave {

struct ExactSolution {
    std::function<double(Point2, double)> psi;
    std::function<Point2(Point2, double)> grad_psi;
    std::function<double(Point2, double)> psi_dot;
    std::function<Point2(Point2, double)> grad_psi_dot;
};

struct ErrorReport {
    double l2_error = 0.0;        // ||psi - psi_h||_L2
    double h1_broken_error = 0.0; // ||grad_h (psi - psi_h)||_L2
    double jump_norm = 0.0;       // ||sqrt(chi) [[psi~ - psi~_h]]||_F
    double energy_norm_error = 0.0;
    double t = 0.0;
};

/// Error norms at state.t against the exact solution, with elevated quadrature
/// (volume degree 2p+4, faces exact to 2p+5). The auxiliary combination
/// psi~ = psi + (b/c^2) psi_dot enters the gradient and jump pieces.
ErrorReport error_norms(const State& state, const ExactSolution& exact, const DgSpace& space,
                        const MaterialParams& mat, const StabilizationParams& stab);

struct EnergyComponents {
    double kinetic = 0.0;             // ||sqrt(alpha_h) psi_dot||^2
    double damping_accumulated = 0.0; // int_0^t (b/c^2)||sqrt(alpha_h) psi_ddot||^2
    double gradient = 0.0;            // c^2 ||grad_h psi~||^2
    double jump = 0.0;                // ||sqrt(chi) [[psi~]]||^2
    double total = 0.0;
    bool degenerate = false; // alpha_h <= 0 sampled somewhere
};

EnergyComponents discrete_energy(const State& state, double accumulated_damping,
                                 const DgSpace& space, const MaterialParams& mat,
                                 const StabilizationParams& stab);

/// Per-step energy evaluation with face traces and gradient tables cached once.
class EnergyEvaluator {
  public:
    EnergyEvaluator(const DgSpace& space, const MaterialParams& mat,
                    const StabilizationParams& stab);
    EnergyComponents eval(const State& state, double accumulated_damping) const;

  private:
    const DgSpace* space_;
    MaterialParams mat_;
    std::vector<FaceCache> cache_;
    std::vector<std::vector<double>> gx_, gy_; // [cell][q * n_loc + i]
};

/// Instantaneous damping integrand (b/c^2)||sqrt(alpha_h) psi_ddot||^2 with the
/// region-local factor inside the integral; the caller accumulates it in time.
double damping_rate(const State& state, const DgSpace& space, const MaterialParams& mat);

/// sqrt(psi' M psi) for the orthonormal modal basis (Parseval).
double field_l2_norm(std::span<const double> coeffs);

/// Q = max over stored states of ||psi_h(t_n)||_L2.
double quantity_of_interest(std::span<const State> trajectory);

struct ConvergenceRow {
    int level = 0;
    int n_elem = 0;
    double h_max = 0.0;
    double l2_err = 0.0;
    double h1_err = 0.0;
    double energy_err = 0.0;
    double rate_l2 = 0.0;
    double rate_h1 = 0.0;
    double rate_energy = 0.0;
    bool has_rates = false;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
};

/// Pairwise log rates against h_max: r = ln(e_i/e_{i+1}) / ln(h_i/h_{i+1}).
/// Rows with a zero error are marked rate-less.
void convergence_rates(ConvergenceTable& table);
double pair_rate(double e_coarse, double e_fine, double h_coarse, double h_fine);

struct QoIFit {
    double q1 = 0.0; // extrapolated value Q_f(0)
    double q2 = 0.0;
    double residual = 0.0;
    int p = 0;
    std::vector<std::pair<double, double>> pairs;
};

/// Least squares for Q_f(h) = q1 + q2 h^{p+1}.
QoIFit fit_qoi(std::span<const std::pair<double, double>> pairs, int p);

/// Max over random coefficient vectors of
/// ||chi^{-1/2} {{grad_h v}}||_F * c sqrt(beta) / ||grad_h v||_L2.
/// Samples with vanishing gradients are skipped; throws when all are.
double trace_ratio_diagnostic(const DgSpace& space, const MaterialParams& mat,
                              const StabilizationParams& stab, int n_samples,
                              std::uint64_t rng_seed);

} // namespace polywave
