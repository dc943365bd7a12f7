#include "polywave/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace polywave {

namespace {
constexpr double kPi = std::numbers::pi;
}

Scenario test_case_1() {
    Scenario s;
    s.name = "test_case_1";
    s.domain = {0.0, 0.0, 1.0, 2.0 / 3.0 * std::sqrt(3.0)};
    s.material = MaterialParams::uniform(1.0, 1e-5, 1e-4, 1.0);
    s.final_time = 0.8;

    const double c = 1.0, b = 1e-5;
    const double k = s.material.regions[0].k();
    const double w = 4.0 * kPi;

    auto psi = [w](Point2 x, double t) { return std::sin(w * x.x) * std::sin(w * t); };
    auto psi_dot = [w](Point2 x, double t) { return w * std::sin(w * x.x) * std::cos(w * t); };
    s.exact = ExactSolution{
        psi,
        [w](Point2 x, double t) {
            return Point2{w * std::cos(w * x.x) * std::sin(w * t), 0.0};
        },
        psi_dot,
        [w](Point2 x, double t) {
            return Point2{w * w * std::cos(w * x.x) * std::cos(w * t), 0.0};
        },
    };

    // Source making psi exact: the nonlinear bracket carries 128 pi^3 k so that
    // (1-2k psi_dot) psi_ddot - c^2 lap psi - b lap psi_dot - f vanishes identically.
    auto source = [c, b, k, w](Point2 x, double t) {
        const double sx = std::sin(w * x.x);
        return (16.0 * kPi * kPi * (c * c - 1.0) * std::sin(w * t) +
                64.0 * kPi * kPi * kPi * b * std::cos(w * t)) *
                   sx +
               128.0 * kPi * kPi * kPi * k * std::sin(w * t) * std::cos(w * t) * sx * sx;
    };
    s.source = source;
    s.manufactured_residual = [c, b, k, w, source](Point2 x, double t) {
        const double sx = std::sin(w * x.x);
        const double pd = w * sx * std::cos(w * t);
        const double pdd = -w * w * sx * std::sin(w * t);
        const double lap = -w * w * sx * std::sin(w * t);
        const double lap_dot = -w * w * w * sx * std::cos(w * t);
        return (1.0 - 2.0 * k * pd) * pdd - c * c * lap - b * lap_dot - source(x, t);
    };

    s.dirichlet_g = [psi](Point2 x, double t, int) { return psi(x, t); };
    s.dirichlet_g_dot = [psi_dot](Point2 x, double t, int) { return psi_dot(x, t); };
    s.initial_psi = [](Point2) { return 0.0; };
    s.initial_psi_dot = [w](Point2 x) { return w * std::sin(w * x.x); };

    s.default_integrator.scheme = Scheme::newmark;
    s.default_integrator.beta_nm = 0.25;
    s.default_integrator.gamma_nm = 0.5;
    s.default_integrator.dt = 5e-4;
    s.default_integrator.final_time = s.final_time;
    s.default_penalty_beta = 10.0;
    return s;
}

double channel_window(double y, double height) {
    const double edge = 0.25 * height; // flat part between H/4 and 3H/4
    if (y <= 0.0 || y >= height) return 0.0;
    if (y < edge) {
        const double r = (y - edge) / edge;
        return std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
    if (y > height - edge) {
        const double r = (y - (height - edge)) / edge;
        return std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
    return 1.0;
}

double excitation_signal(double t, double freq, double amplitude, bool cutoff) {
    const double w = 2.0 * kPi * freq;
    if (t < 2.0 / freq) {
        const double ramp = 0.5 * freq * t;
        return ramp * ramp * amplitude * std::sin(w * t);
    }
    return cutoff ? 0.0 : amplitude * std::sin(w * t);
}

double excitation_signal_dot(double t, double freq, double amplitude, bool cutoff) {
    const double w = 2.0 * kPi * freq;
    if (t < 2.0 / freq) {
        const double ramp = 0.5 * freq * t;
        return amplitude *
               (0.5 * freq * freq * t * std::sin(w * t) + ramp * ramp * w * std::cos(w * t));
    }
    return cutoff ? 0.0 : amplitude * w * std::cos(w * t);
}

namespace {

Scenario channel_base(double amplitude, bool cutoff) {
    Scenario s;
    const double height = 0.02;
    const double length = 3.0 / std::sqrt(3.0) * 0.02;
    s.domain = {0.0, 0.0, length, height};
    s.final_time = 2.4e-5;

    const double freq = 210e3;
    // tag 0 is the left side; excitation lives there only.
    s.dirichlet_g = [=](Point2 x, double t, int tag) {
        if (tag != 0) return 0.0;
        return channel_window(x.y, height) * excitation_signal(t, freq, amplitude, cutoff);
    };
    s.dirichlet_g_dot = [=](Point2 x, double t, int tag) {
        if (tag != 0) return 0.0;
        return channel_window(x.y, height) * excitation_signal_dot(t, freq, amplitude, cutoff);
    };
    s.initial_psi = [](Point2) { return 0.0; };
    s.initial_psi_dot = [](Point2) { return 0.0; };

    s.default_integrator.scheme = Scheme::generalized_alpha;
    s.default_integrator.beta_nm = 4.0 / 9.0;
    s.default_integrator.gamma_nm = 5.0 / 6.0;
    s.default_integrator.alpha_m = 0.0;
    s.default_integrator.alpha_f = 1.0 / 3.0;
    s.default_integrator.dt = 2e-9;
    s.default_integrator.final_time = s.final_time;
    s.default_penalty_beta = 10.0;
    return s;
}

} // namespace

Scenario test_case_2(double amplitude) {
    Scenario s = channel_base(amplitude, /*cutoff=*/false);
    s.name = "test_case_2";
    s.material = MaterialParams::uniform(1500.0, 6e-9, 7.0, 1000.0);
    return s;
}

Scenario piecewise_material_2d(double amplitude) {
    Scenario s = channel_base(amplitude, /*cutoff=*/true);
    s.name = "piecewise_material_2d";
    s.material.regions = {{1500.0, 6e-9, 5.0, 1000.0}, {3000.0, 4e-9, 7.0, 2000.0}};
    s.material.validate();
    const double mid = 0.5 * (s.domain.xmin + s.domain.xmax);
    s.region_of = [mid](Point2 x) { return x.x < mid ? 0 : 1; };
    s.default_penalty_beta = 250.0;
    return s;
}

std::vector<double> pressure_field(const State& state, const DgSpace& space,
                                   const MaterialParams& mat) {
    std::vector<double> u(state.psi_dot.size());
    for (int c = 0; c < space.mesh->n_cells(); ++c) {
        const double rho = mat.of_cell(space.mesh->cells[c]).rho;
        const int off = space.offsets[c];
        for (int i = 0; i < space.n_loc; ++i) u[off + i] = rho * state.psi_dot[off + i];
    }
    return u;
}

} // namespace polywave
