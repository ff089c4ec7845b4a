// qbem — spectral densities and emitter dynamics near Drude bodies
//
//   qbem spectra   --config run.json [--out dir] [--threads n]
//   qbem dynamics  --config run.json [--out dir] [--threads n]
//   qbem validate  --config run.json [--out dir] [--threads n]
//   qbem mesh-info --config mesh.off|run.json [--out dir]
//
// Exit codes: 0 ok, 1 check failure, 2 config/input error, 3 numerical failure.

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "qbem/errors.hpp"
#include "qbem/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral densities and emitter dynamics near Drude bodies"};
    app.require_subcommand(1);
    std::string config, out;
    int threads = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON configuration (mesh-info also accepts an OFF file)")->required();
        sub->add_option("--out", out, "output directory (overrides outputs.dir)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* spectra = app.add_subcommand("spectra", "spectral density matrices on the frequency grid");
    auto* dynamics = app.add_subcommand("dynamics", "emitter populations and negativity");
    auto* validate = app.add_subcommand("validate", "run the physics self-checks");
    auto* mesh_info = app.add_subcommand("mesh-info", "geometry summary");
    for (auto* s : {spectra, dynamics, validate, mesh_info}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (mesh_info->parsed()) return qbem::cmd_mesh_info(config, out, std::cout);
        qbem::RunConfig cfg = qbem::load_config(config);
        if (!out.empty()) cfg.out_dir = out;
        if (spectra->parsed()) return qbem::cmd_spectra(cfg, std::cerr);
        if (dynamics->parsed()) return qbem::cmd_dynamics(cfg, std::cerr);
        if (validate->parsed()) return qbem::cmd_validate(cfg, std::cerr);
    } catch (const qbem::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const qbem::MeshError& e) {
        std::cerr << "error: mesh: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const qbem::NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
