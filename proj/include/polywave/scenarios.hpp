#pragma once

#include <optional>
#include <string>

#include "polywave/analysis.hpp"
#include "polywave/assembly.hpp"

namespace polywave {

/// A complete experiment definition. Callbacks are pure; the Dirichlet data's
/// time derivative is always supplied analytically.
struct Scenario {
    std::string name;
    Rect domain;
    MaterialParams material;
    std::function<int(Point2)> region_of;               // null: everything region 0
    TimeField source;                                   // null: no volume source
    BoundaryField dirichlet_g;                          // required
    BoundaryField dirichlet_g_dot;                      // required
    std::function<double(Point2)> initial_psi;          // psi(.,0)
    std::function<double(Point2)> initial_psi_dot;      // psi_dot(.,0)
    std::optional<ExactSolution> exact;
    std::function<double(Point2, double)> manufactured_residual; // null unless manufactured
    double final_time = 1.0;
    IntegratorConfig default_integrator;
    double default_penalty_beta = 10.0;
};

Scenario test_case_1();
Scenario test_case_2(double amplitude = 0.01);
Scenario piecewise_material_2d(double amplitude = 0.01);

/// Acoustic pressure u = rho psi_dot (region-local rho), as coefficients.
std::vector<double> pressure_field(const State& state, const DgSpace& space,
                                   const MaterialParams& mat);

/// Spatial excitation window of the channel scenario, on the x = 0 side.
double channel_window(double y, double height);

/// Ramped-sine excitation (f t / 2)^2 A sin(w t) for t < 2/f, A sin(w t) after;
/// `cutoff` replaces the tail with zero (pulse form). Derivative is analytic.
double excitation_signal(double t, double freq, double amplitude, bool cutoff);
double excitation_signal_dot(double t, double freq, double amplitude, bool cutoff);

} // namespace polywave
