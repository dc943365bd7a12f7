#include "polywave/study.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "polywave/errors.hpp"

namespace polywave {

using nlohmann::json;

PolyMesh make_mesh(const MeshSpec& spec, const Rect& domain) {
    switch (spec.generator) {
    case MeshSpec::Generator::hex:
        return generate_hex_mesh(domain, spec.n_rows);
    case MeshSpec::Generator::voronoi:
        return generate_voronoi_mesh(domain, spec.n_seeds, spec.lloyd_iters, spec.rng_seed);
    case MeshSpec::Generator::file:
        return read_mesh(spec.path);
    }
    throw ConfigError("make_mesh: unknown generator");
}

IntegratorConfig IntegratorOverrides::materialize(const Scenario& s) const {
    IntegratorConfig cfg = s.default_integrator;
    if (scheme) {
        if (*scheme == "newmark")
            cfg.scheme = Scheme::newmark;
        else if (*scheme == "generalized_alpha")
            cfg.scheme = Scheme::generalized_alpha;
        else
            throw ConfigError("integrator.scheme must be 'newmark' or 'generalized_alpha'");
    }
    if (beta_nm) cfg.beta_nm = *beta_nm;
    if (gamma_nm) cfg.gamma_nm = *gamma_nm;
    if (alpha_m) cfg.alpha_m = *alpha_m;
    if (alpha_f) cfg.alpha_f = *alpha_f;
    if (dt) cfg.dt = *dt;
    if (final_time) cfg.final_time = *final_time;
    if (tol) cfg.tol = *tol;
    if (max_fixed_point_iters) cfg.max_fixed_point_iters = *max_fixed_point_iters;
    cfg.validate();
    return cfg;
}

Scenario scenario_by_name(const std::string& name, std::optional<double> amplitude) {
    if (name == "test_case_1") {
        if (amplitude) throw ConfigError("test_case_1 has no amplitude override");
        return test_case_1();
    }
    if (name == "test_case_2") return test_case_2(amplitude.value_or(0.01));
    if (name == "piecewise_material_2d") return piecewise_material_2d(amplitude.value_or(0.01));
    throw ConfigError("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config parsing with strict key checking.

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
}

MeshSpec parse_mesh_spec(const json& j, const std::string& where) {
    check_keys(j, {"generator", "n_rows", "n_seeds", "lloyd_iters", "rng_seed", "path"}, where);
    MeshSpec spec;
    const std::string gen = j.value("generator", "hex");
    if (gen == "hex")
        spec.generator = MeshSpec::Generator::hex;
    else if (gen == "voronoi")
        spec.generator = MeshSpec::Generator::voronoi;
    else if (gen == "file")
        spec.generator = MeshSpec::Generator::file;
    else
        throw ConfigError(where + ".generator must be hex|voronoi|file");
    spec.n_rows = j.value("n_rows", spec.n_rows);
    spec.n_seeds = j.value("n_seeds", spec.n_seeds);
    spec.lloyd_iters = j.value("lloyd_iters", spec.lloyd_iters);
    spec.rng_seed = j.value("rng_seed", spec.rng_seed);
    spec.path = j.value("path", spec.path);
    if (spec.generator == MeshSpec::Generator::file && spec.path.empty())
        throw ConfigError(where + ": file generator needs 'path'");
    return spec;
}

RunConfig parse_config(const json& j) {
    check_keys(j,
               {"scenario", "overrides", "mesh", "levels", "p_list", "degree", "penalty_beta",
                "dt_scale_exponent", "integrator", "output_dir", "recorders"},
               "config");
    RunConfig cfg;
    cfg.scenario = j.value("scenario", cfg.scenario);
    if (j.contains("overrides")) {
        check_keys(j["overrides"], {"amplitude"}, "overrides");
        if (j["overrides"].contains("amplitude"))
            cfg.amplitude = j["overrides"]["amplitude"].get<double>();
    }
    if (j.contains("mesh")) cfg.mesh = parse_mesh_spec(j["mesh"], "mesh");
    if (j.contains("levels")) {
        int i = 0;
        for (const auto& jj : j["levels"])
            cfg.levels.push_back(parse_mesh_spec(jj, "levels[" + std::to_string(i++) + "]"));
    }
    if (j.contains("p_list")) cfg.p_list = j["p_list"].get<std::vector<int>>();
    cfg.degree = j.value("degree", cfg.degree);
    if (j.contains("penalty_beta")) cfg.penalty_beta = j["penalty_beta"].get<double>();
    cfg.dt_scale_exponent = j.value("dt_scale_exponent", 0.0);
    if (j.contains("integrator")) {
        const json& ji = j["integrator"];
        check_keys(ji,
                   {"scheme", "beta_nm", "gamma_nm", "alpha_m", "alpha_f", "dt", "final_time",
                    "tol", "max_fixed_point_iters"},
                   "integrator");
        auto opt = [&](const char* k) -> std::optional<double> {
            if (ji.contains(k)) return ji[k].get<double>();
            return std::nullopt;
        };
        if (ji.contains("scheme")) cfg.integrator.scheme = ji["scheme"].get<std::string>();
        cfg.integrator.beta_nm = opt("beta_nm");
        cfg.integrator.gamma_nm = opt("gamma_nm");
        cfg.integrator.alpha_m = opt("alpha_m");
        cfg.integrator.alpha_f = opt("alpha_f");
        cfg.integrator.dt = opt("dt");
        cfg.integrator.final_time = opt("final_time");
        cfg.integrator.tol = opt("tol");
        if (ji.contains("max_fixed_point_iters"))
            cfg.integrator.max_fixed_point_iters = ji["max_fixed_point_iters"].get<int>();
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("recorders")) {
        const json& jr = j["recorders"];
        check_keys(jr, {"energy", "qoi", "snapshot_stride", "probes"}, "recorders");
        cfg.recorders.energy = jr.value("energy", cfg.recorders.energy);
        cfg.recorders.qoi = jr.value("qoi", cfg.recorders.qoi);
        cfg.recorders.snapshot_stride = jr.value("snapshot_stride", 0);
        if (jr.contains("probes"))
            for (const auto& jp : jr["probes"]) {
                if (!jp.is_array() || jp.size() != 2)
                    throw ConfigError("recorders.probes entries must be [x, y]");
                cfg.recorders.probes.push_back({jp[0].get<double>(), jp[1].get<double>()});
            }
    }
    return cfg;
}

} // namespace

RunConfig parse_config_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_string(text);
}

// ---------------------------------------------------------------------------
// Problem assembly and simulation driver.

std::unique_ptr<Problem> build_problem(const Scenario& scenario, PolyMesh mesh, int degree,
                                       double penalty_beta, Exec exec) {
    auto prob = std::make_unique<Problem>();
    prob->mesh = std::move(mesh);
    prob->scenario = scenario;
    if (scenario.region_of) tag_regions(prob->mesh, scenario.region_of);
    prob->material = scenario.material;
    prob->stab = {penalty_beta > 0 ? penalty_beta : scenario.default_penalty_beta, degree};
    prob->space = build_space(prob->mesh, degree, exec);
    prob->ops = assemble_operators(prob->space, prob->material, prob->stab, exec);

    Problem* p = prob.get();
    SecondOrderSystem& sys = prob->system;
    sys.mass = prob->ops.mass;
    sys.ktilde = prob->ops.ktilde;
    sys.ktilde_diag_index = prob->ops.ktilde_diag_index;
    sys.b_over_c2_block.resize(prob->mesh.n_cells());
    for (int c = 0; c < prob->mesh.n_cells(); ++c)
        sys.b_over_c2_block[c] = prob->material.of_cell(prob->mesh.cells[c]).b_over_c2();

    sys.load = [p, exec](double t, std::span<double> out) {
        std::vector<double> w = assemble_dirichlet_vector(
            p->space, p->scenario.dirichlet_g, p->scenario.dirichlet_g_dot, p->material,
            p->ops.face_cache, t);
        if (p->scenario.source) {
            std::vector<double> f = assemble_source(p->space, p->scenario.source, t, exec);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += f[i];
        }
        std::copy(w.begin(), w.end(), out.begin());
    };
    if (prob->material.nonlinear()) {
        sys.nonlinear_mass = [p, exec](std::span<const double> psi_dot, double* degen) {
            return assemble_nonlinear_mass(p->space, psi_dot, p->material, exec, degen);
        };
    }

    prob->initial.t = 0.0;
    prob->initial.psi = project(prob->space, scenario.initial_psi, exec);
    prob->initial.psi_dot = project(prob->space, scenario.initial_psi_dot, exec);
    prob->initial.psi_ddot =
        compute_initial_acceleration(prob->initial.psi, prob->initial.psi_dot, sys, 0.0);
    return prob;
}

namespace {

void manufactured_gate(const Scenario& s) {
    if (!s.manufactured_residual) return;
    std::mt19937_64 rng(20250808);
    auto uniform01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
        const Point2 x{s.domain.xmin + uniform01() * s.domain.width(),
                       s.domain.ymin + uniform01() * s.domain.height()};
        const double t = uniform01() * s.final_time;
        worst = std::max(worst, std::abs(s.manufactured_residual(x, t)));
    }
    if (worst > 1e-10)
        throw NumericError("manufactured-solution residual gate failed: |residual| = " +
                           std::to_string(worst));
}

} // namespace

RunResult run_simulation(Problem& prob, const IntegratorConfig& cfg,
                         const RecorderConfig& recorders) {
    manufactured_gate(prob.scenario);
    RunResult result;
    State state = prob.initial;

    std::optional<EnergyEvaluator> energy;
    double damping_acc = 0.0;
    double damping_prev = 0.0;
    if (recorders.energy) {
        energy.emplace(prob.space, prob.material, prob.stab);
        damping_prev = damping_rate(state, prob.space, prob.material);
        result.energy.push_back(energy->eval(state, damping_acc));
    }
    result.times.push_back(state.t);
    result.l2_norms.push_back(field_l2_norm(state.psi));
    result.qoi = result.l2_norms.back();

    auto on_step = [&](int /*step*/, const State& s, const StepReport&) {
        result.times.push_back(s.t);
        const double l2 = field_l2_norm(s.psi);
        result.l2_norms.push_back(l2);
        result.qoi = std::max(result.qoi, l2);
        if (energy) {
            const double rate = damping_rate(s, prob.space, prob.material);
            damping_acc += 0.5 * cfg.dt * (damping_prev + rate);
            damping_prev = rate;
            result.energy.push_back(energy->eval(s, damping_acc));
        }
    };

    result.reports = run(state, prob.system, cfg, on_step);
    result.final_state = std::move(state);
    if (prob.scenario.exact)
        result.final_error = error_norms(result.final_state, *prob.scenario.exact, prob.space,
                                         prob.material, prob.stab);
    return result;
}

// ---------------------------------------------------------------------------
// CSV and snapshot output.

namespace {

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file " + path);
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

int locate_cell(const PolyMesh& mesh, Point2 p) {
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        bool inside = false;
        const std::size_t n = pts.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            if ((pts[i].y > p.y) != (pts[j].y > p.y) &&
                p.x < (pts[j].x - pts[i].x) * (p.y - pts[i].y) / (pts[j].y - pts[i].y) + pts[i].x)
                inside = !inside;
        }
        if (inside) return c;
    }
    return -1;
}

} // namespace

void write_field_snapshot(const std::string& path_base, const DgSpace& space,
                          std::span<const double> coeffs, const std::string& field_name,
                          double t) {
    {
        std::ofstream out(path_base + ".coeffs");
        if (!out) throw IoError("cannot open " + path_base + ".coeffs");
        out << "fieldsnap 1\n";
        out << "field " << field_name << "\n";
        out << "time " << fmt(t) << "\n";
        out << "degree " << space.degree << "\n";
        out << "cells " << space.mesh->n_cells() << "\n";
        for (int c = 0; c < space.mesh->n_cells(); ++c) {
            const double* v = &coeffs[space.offsets[c]];
            for (int i = 0; i < space.n_loc; ++i) out << (i ? " " : "") << fmt(v[i]);
            out << "\n";
        }
    }
    {
        std::ofstream out(path_base + ".samples");
        if (!out) throw IoError("cannot open " + path_base + ".samples");
        out << "x,y," << field_name << "\n";
        const PolyMesh& mesh = *space.mesh;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            auto emit = [&](Point2 p) {
                out << fmt(p.x) << ',' << fmt(p.y) << ','
                    << fmt(evaluate_field(space, c, p, coeffs)) << "\n";
            };
            emit(mesh.cells[c].centroid);
            for (int v : mesh.cells[c].vertex_ids) emit(mesh.vertices[v]);
        }
    }
}

void cmd_mesh(const RunConfig& config) {
    const Scenario scenario = scenario_by_name(config.scenario, config.amplitude);
    PolyMesh mesh = make_mesh(config.mesh, scenario.domain);
    std::filesystem::create_directories(config.output_dir);
    write_mesh(mesh, config.output_dir + "/mesh.txt");
    const MeshQualityReport q = mesh_quality(mesh);
    auto out = open_out(config.output_dir, "mesh_quality.csv");
    out << "n_cells,h_max,h_min,h_ratio,min_area_to_h2,max_vertex_count,max_subtriangle_count,"
           "n_flagged\n";
    out << mesh.n_cells() << ',' << fmt(q.h_max) << ',' << fmt(q.h_min) << ',' << fmt(q.h_ratio)
        << ',' << fmt(q.min_area_to_h2) << ',' << q.max_vertex_count << ','
        << q.max_subtriangle_count << ',' << q.flagged_cells.size() << "\n";
}

void cmd_run(const RunConfig& config) {
    const Scenario scenario = scenario_by_name(config.scenario, config.amplitude);
    PolyMesh mesh = make_mesh(config.mesh, scenario.domain);
    auto prob = build_problem(scenario, std::move(mesh), config.degree,
                              config.penalty_beta.value_or(-1.0));
    const IntegratorConfig cfg = config.integrator.materialize(scenario);

    // Stream per-step and probe CSVs while stepping; bulk recorders in memory.
    auto steps_csv = open_out(config.output_dir, "steps.csv");
    steps_csv << "step,t,fp_iters,rel_change,degeneracy_max,cg_iters\n";

    std::ofstream probes_csv;
    std::vector<int> probe_cells;
    if (!config.recorders.probes.empty()) {
        probes_csv = open_out(config.output_dir, "probes.csv");
        probes_csv << "step,t";
        for (std::size_t i = 0; i < config.recorders.probes.size(); ++i)
            probes_csv << ",psi_" << i << ",pressure_" << i;
        probes_csv << "\n";
        for (Point2 p : config.recorders.probes) {
            const int c = locate_cell(prob->mesh, p);
            if (c < 0) throw ConfigError("probe point outside the domain");
            probe_cells.push_back(c);
        }
    }

    if (config.recorders.snapshot_stride > 0)
        write_mesh(prob->mesh, config.output_dir + "/mesh.txt");

    manufactured_gate(prob->scenario);
    RunResult result;
    State state = prob->initial;
    std::optional<EnergyEvaluator> energy;
    double damping_acc = 0.0, damping_prev = 0.0;
    if (config.recorders.energy) {
        energy.emplace(prob->space, prob->material, prob->stab);
        damping_prev = damping_rate(state, prob->space, prob->material);
        result.energy.push_back(energy->eval(state, damping_acc));
    }
    result.times.push_back(state.t);
    result.l2_norms.push_back(field_l2_norm(state.psi));
    result.qoi = result.l2_norms.back();

    auto emit_probes = [&](int step, const State& s) {
        if (probe_cells.empty()) return;
        probes_csv << step << ',' << fmt(s.t);
        for (std::size_t i = 0; i < probe_cells.size(); ++i) {
            const Point2 p = config.recorders.probes[i];
            const int c = probe_cells[i];
            const double rho = prob->material.of_cell(prob->mesh.cells[c]).rho;
            const double psi = evaluate_field(prob->space, c, p, s.psi);
            const double pd = evaluate_field(prob->space, c, p, s.psi_dot);
            probes_csv << ',' << fmt(psi) << ',' << fmt(rho * pd);
        }
        probes_csv << "\n";
    };
    emit_probes(0, state);
    if (config.recorders.snapshot_stride > 0)
        write_field_snapshot(config.output_dir + "/snapshot_000000", prob->space, state.psi, "psi",
                             state.t);

    auto on_step = [&](int step, const State& s, const StepReport& rep) {
        steps_csv << step << ',' << fmt(s.t) << ',' << rep.fixed_point_iters << ','
                  << fmt(rep.rel_change) << ',' << fmt(rep.degeneracy_max) << ','
                  << rep.cg_iters_total << "\n";
        result.times.push_back(s.t);
        const double l2 = field_l2_norm(s.psi);
        result.l2_norms.push_back(l2);
        result.qoi = std::max(result.qoi, l2);
        if (energy) {
            const double rate = damping_rate(s, prob->space, prob->material);
            damping_acc += 0.5 * cfg.dt * (damping_prev + rate);
            damping_prev = rate;
            result.energy.push_back(energy->eval(s, damping_acc));
        }
        emit_probes(step, s);
        if (config.recorders.snapshot_stride > 0 && step % config.recorders.snapshot_stride == 0) {
            char tag[32];
            std::snprintf(tag, sizeof tag, "snapshot_%06d", step);
            write_field_snapshot(config.output_dir + "/" + tag, prob->space, s.psi, "psi", s.t);
        }
    };
    result.reports = run(state, prob->system, cfg, on_step);

    if (config.recorders.energy) {
        auto out = open_out(config.output_dir, "energy.csv");
        out << "step,t,E_total,E_kin,E_damp,E_grad,E_jump\n";
        for (std::size_t i = 0; i < result.energy.size(); ++i) {
            const EnergyComponents& e = result.energy[i];
            out << i << ',' << fmt(result.times[i]) << ',' << fmt(e.total) << ','
                << fmt(e.kinetic) << ',' << fmt(e.damping_accumulated) << ',' << fmt(e.gradient)
                << ',' << fmt(e.jump) << "\n";
        }
    }
    if (config.recorders.qoi) {
        auto out = open_out(config.output_dir, "qoi.csv");
        out << "step,t,l2_norm\n";
        for (std::size_t i = 0; i < result.l2_norms.size(); ++i)
            out << i << ',' << fmt(result.times[i]) << ',' << fmt(result.l2_norms[i]) << "\n";
    }
    if (prob->scenario.exact) {
        const ErrorReport err =
            error_norms(state, *prob->scenario.exact, prob->space, prob->material, prob->stab);
        auto out = open_out(config.output_dir, "errors.csv");
        out << "t,l2_error,h1_broken_error,jump_norm,energy_norm_error\n";
        out << fmt(err.t) << ',' << fmt(err.l2_error) << ',' << fmt(err.h1_broken_error) << ','
            << fmt(err.jump_norm) << ',' << fmt(err.energy_norm_error) << "\n";
        std::printf("final errors: L2 %.6e, broken-H1 %.6e, energy %.6e\n", err.l2_error,
                    err.h1_broken_error, err.energy_norm_error);
    }
    std::printf("run complete: %zu steps, QoI %.12e\n", result.reports.size(), result.qoi);
}

void cmd_convergence(const RunConfig& config) {
    if (config.levels.empty()) throw ConfigError("convergence study needs a 'levels' list");
    const Scenario scenario = scenario_by_name(config.scenario, config.amplitude);
    if (!scenario.exact)
        throw ConfigError("convergence study needs a scenario with an exact solution");
    const IntegratorConfig base_cfg = config.integrator.materialize(scenario);

    ConvergenceTable table;
    double h0 = 0.0;
    for (std::size_t level = 0; level < config.levels.size(); ++level) {
        PolyMesh mesh = make_mesh(config.levels[level], scenario.domain);
        auto prob = build_problem(scenario, std::move(mesh), config.degree,
                                  config.penalty_beta.value_or(-1.0));
        const double h = mesh_quality(prob->mesh).h_max;
        if (level == 0) h0 = h;
        IntegratorConfig cfg = base_cfg;
        if (config.dt_scale_exponent != 0.0)
            cfg.dt = base_cfg.dt * std::pow(h / h0, config.dt_scale_exponent);
        RecorderConfig rec;
        rec.energy = false;
        rec.qoi = false;
        RunResult res = run_simulation(*prob, cfg, rec);
        ConvergenceRow row;
        row.level = static_cast<int>(level);
        row.n_elem = prob->mesh.n_cells();
        row.h_max = h;
        row.l2_err = res.final_error->l2_error;
        row.h1_err = res.final_error->h1_broken_error;
        row.energy_err = res.final_error->energy_norm_error;
        table.rows.push_back(row);
        std::printf("level %d: n_elem %d, h_max %.4e, L2 %.6e, H1 %.6e\n", row.level, row.n_elem,
                    row.h_max, row.l2_err, row.h1_err);
    }
    convergence_rates(table);

    auto out = open_out(config.output_dir, "convergence.csv");
    out << "level,n_elem,h_max,inv_sqrt_n,l2_err,h1_err,energy_err,rate_l2,rate_h1\n";
    for (const ConvergenceRow& r : table.rows) {
        out << r.level << ',' << r.n_elem << ',' << fmt(r.h_max) << ','
            << fmt(1.0 / std::sqrt(r.n_elem)) << ',' << fmt(r.l2_err) << ',' << fmt(r.h1_err)
            << ',' << fmt(r.energy_err) << ',';
        if (r.has_rates)
            out << fmt(r.rate_l2) << ',' << fmt(r.rate_h1);
        else
            out << ',';
        out << "\n";
    }
}

void cmd_qoi(const RunConfig& config) {
    const Scenario scenario = scenario_by_name(config.scenario, config.amplitude);
    const IntegratorConfig cfg = config.integrator.materialize(scenario);
    RecorderConfig rec;
    rec.energy = false;

    if (!config.levels.empty()) {
        std::vector<std::pair<double, double>> pairs;
        auto out = open_out(config.output_dir, "qoi_h_sweep.csv");
        out << "h,n_elem,Q\n";
        for (const MeshSpec& spec : config.levels) {
            PolyMesh mesh = make_mesh(spec, scenario.domain);
            auto prob = build_problem(scenario, std::move(mesh), config.degree,
                                      config.penalty_beta.value_or(-1.0));
            RunResult res = run_simulation(*prob, cfg, rec);
            const double h = mesh_quality(prob->mesh).h_max;
            pairs.push_back({h, res.qoi});
            out << fmt(h) << ',' << prob->mesh.n_cells() << ',' << fmt(res.qoi) << "\n";
            std::printf("h %.5e (n=%d): Q = %.12e\n", h, prob->mesh.n_cells(), res.qoi);
        }
        if (pairs.size() >= 3) {
            const QoIFit fit = fit_qoi(pairs, config.degree);
            auto fout = open_out(config.output_dir, "qoi_fit.csv");
            fout << "q1,q2,residual,p\n";
            fout << fmt(fit.q1) << ',' << fmt(fit.q2) << ',' << fmt(fit.residual) << ',' << fit.p
                 << "\n";
            std::printf("fit: Q(h) = %.9e + %.6e * h^%d\n", fit.q1, fit.q2, fit.p + 1);
        }
    } else if (!config.p_list.empty()) {
        auto out = open_out(config.output_dir, "qoi_p_sweep.csv");
        out << "p,n_elem,Q\n";
        for (int p : config.p_list) {
            PolyMesh mesh = make_mesh(config.mesh, scenario.domain);
            auto prob =
                build_problem(scenario, std::move(mesh), p, config.penalty_beta.value_or(-1.0));
            RunResult res = run_simulation(*prob, cfg, rec);
            out << p << ',' << prob->mesh.n_cells() << ',' << fmt(res.qoi) << "\n";
            std::printf("p %d (n=%d): Q = %.12e\n", p, prob->mesh.n_cells(), res.qoi);
        }
    } else {
        throw ConfigError("qoi study needs 'levels' (h-sweep) or 'p_list' (p-sweep)");
    }
}

} // namespace polywave
