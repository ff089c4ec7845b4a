// pipeline.hpp — end-to-end runs behind the command-line front-end
#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qbem/config.hpp"
#include "qbem/dynamics.hpp"
#include "qbem/power.hpp"
#include "qbem/spectral.hpp"

namespace qbem {

// Bodies, basis and operator for one configuration. Not copyable: the assembler
// keeps references to the mesh and basis.
struct Scene {
    TriangleMesh mesh;
    RwgBasis basis;
    std::vector<DipoleSource> emitters;
    std::unique_ptr<OperatorAssembler> op;

    Scene() = default;
    Scene(const Scene&) = delete;
    Scene& operator=(const Scene&) = delete;
};

// Loads or generates all bodies and checks that every emitter lies outside them.
std::unique_ptr<Scene> build_scene(const RunConfig& cfg);
TriangleMesh build_geometry(const RunConfig& cfg);

struct SpectraRun {
    SpectralTable table;
    std::vector<PowerMatrices> powers;
};

// Powers and spectral densities on the given frequencies. At the listed indices the
// radiated power is also integrated over the far field (order quad_order).
SpectraRun run_spectra(const Scene& scene, const RunConfig& cfg, const std::vector<double>& omegas,
                       const std::vector<std::size_t>& quad_indices = {}, int quad_order = 48,
                       std::ostream* log = nullptr);

// 0.8 pi / d_omega of the bath the configuration asks for.
double dynamics_horizon(const RunConfig& cfg);

void write_spectra_csv(std::ostream& out, const SpectralTable& table);

struct DynamicsRun {
    Trajectory traj;
    std::size_t n_modes = 0;
    std::size_t dim = 0;
    double d_omega = 0.0;
    double horizon = 0.0;            // 0.8 pi / d_omega
    double closure = 0.0;
    double truncation_delta = -1.0;  // negative when the spot-check is skipped
    double energy_drift = 0.0;
    double max_norm_drift = 0.0;
    double max_sector_leak = 0.0;
};

struct DynamicsOptions {
    bool truncation_check = true;
    PropagationOptions prop;
};

// Bath, Hamiltonian and propagation from a spectral table whose dipoles match cfg.
DynamicsRun run_dynamics(const SpectralTable& table, const RunConfig& cfg, const DynamicsOptions& opts = {});

void write_dynamics_csv(std::ostream& out, const Trajectory& traj, double omega_p);

// Commands; return the process exit code or throw ConfigError / MeshError / NumericalError.
int cmd_spectra(const RunConfig& cfg, std::ostream& log);
int cmd_dynamics(const RunConfig& cfg, std::ostream& log);
int cmd_validate(const RunConfig& cfg, std::ostream& log);
// path: an OFF file or a JSON configuration whose geometry is summarised.
int cmd_mesh_info(const std::string& path, const std::string& out_dir, std::ostream& out);

}  // namespace qbem
