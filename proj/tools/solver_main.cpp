#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "polywave/errors.hpp"
#include "polywave/study.hpp"

using namespace polywave;

int main(int argc, char** argv) {
    if (const char* env = std::getenv("SOLVER_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }

    CLI::App app{"Discontinuous Galerkin solver for nonlinear acoustic waves on polygonal meshes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int degree_override = -1;
    int levels_limit = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--p", degree_override, "polynomial degree (overrides config)");
        sub->add_option("--levels", levels_limit, "use only the first N levels");
    };
    CLI::App* sub_mesh = app.add_subcommand("mesh", "generate a mesh and its quality report");
    CLI::App* sub_run = app.add_subcommand("run", "run a single simulation");
    CLI::App* sub_conv = app.add_subcommand("convergence", "h-refinement error study");
    CLI::App* sub_qoi = app.add_subcommand("qoi", "quantity-of-interest study");
    for (CLI::App* sub : {sub_mesh, sub_run, sub_conv, sub_qoi}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = parse_config_file(config_path);
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (degree_override > 0) config.degree = degree_override;
        if (levels_limit > 0 && static_cast<int>(config.levels.size()) > levels_limit)
            config.levels.resize(levels_limit);

        if (sub_mesh->parsed()) cmd_mesh(config);
        if (sub_run->parsed()) cmd_run(config);
        if (sub_conv->parsed()) cmd_convergence(config);
        if (sub_qoi->parsed()) cmd_qoi(config);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    }
}
