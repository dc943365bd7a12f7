#pragma once

#include <memory>
#include <optional>

#include "polywave/scenarios.hpp"

namespace polywave {

struct MeshSpec {
    enum class Generator { hex, voronoi, file };
    Generator generator = Generator::hex;
    int n_rows = 8;
    int n_seeds = 100;
    int lloyd_iters = 3;
    std::uint64_t rng_seed = 1;
    std::string path;
};

PolyMesh make_mesh(const MeshSpec& spec, const Rect& domain);

struct RecorderConfig {
    bool energy = true;
    bool qoi = true;
    int snapshot_stride = 0; // 0: no snapshots
    std::vector<Point2> probes;
};

struct IntegratorOverrides {
    std::optional<std::string> scheme;
    std::optional<double> beta_nm, gamma_nm, alpha_m, alpha_f, dt, final_time, tol;
    std::optional<int> max_fixed_point_iters;

    IntegratorConfig materialize(const Scenario& s) const;
};

struct RunConfig {
    std::string scenario = "test_case_1";
    std::optional<double> amplitude;
    MeshSpec mesh;
    std::vector<MeshSpec> levels;
    std::vector<int> p_list;
    int degree = 2;
    std::optional<double> penalty_beta;
    double dt_scale_exponent = 0.0; // per-level dt = dt * (h_l / h_0)^e
    IntegratorOverrides integrator;
    std::string output_dir = ".";
    RecorderConfig recorders;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_string(const std::string& text);

Scenario scenario_by_name(const std::string& name, std::optional<double> amplitude);

/// A fully assembled, ready-to-step problem. Not movable: the space and the
/// system closures point into this object.
struct Problem {
    PolyMesh mesh;
    Scenario scenario;
    MaterialParams material;
    StabilizationParams stab;
    DgSpace space;
    GlobalOperators ops;
    SecondOrderSystem system;
    State initial;

    Problem() = default;
    Problem(const Problem&) = delete;
    Problem& operator=(const Problem&) = delete;
};

std::unique_ptr<Problem> build_problem(const Scenario& scenario, PolyMesh mesh, int degree,
                                       double penalty_beta, Exec exec = Exec::parallel);

struct RunResult {
    std::vector<double> times;       // t_0 .. t_N
    std::vector<StepReport> reports; // per accepted step
    std::vector<EnergyComponents> energy;
    std::vector<double> l2_norms; // per recorded time, ||psi_h||
    double qoi = 0.0;
    State final_state;
    std::optional<ErrorReport> final_error;
};

/// Time-steps the problem, evaluating recorders per step; pure in-memory.
/// Runs the manufactured-residual gate first when the scenario carries one.
RunResult run_simulation(Problem& prob, const IntegratorConfig& cfg,
                         const RecorderConfig& recorders);

/// CLI entry points; write CSV outputs under config.output_dir.
void cmd_mesh(const RunConfig& config);
void cmd_run(const RunConfig& config);
void cmd_convergence(const RunConfig& config);
void cmd_qoi(const RunConfig& config);

/// Field snapshot: coefficients plus a point-sampled variant for plotting.
void write_field_snapshot(const std::string& path_base, const DgSpace& space,
                          std::span<const double> coeffs, const std::string& field_name, double t);

} // namespace polywave
