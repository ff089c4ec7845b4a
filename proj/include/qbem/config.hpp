// config.hpp — JSON run configuration
#pragma once

#include <string>
#include <vector>

#include "qbem/bem.hpp"
#include "qbem/power.hpp"
#include "qbem/spectral.hpp"

namespace qbem {

struct GeometryEntry {
    std::string mesh_path;  // OFF file; empty for generated shapes
    ShapeSpec shape;
};

struct EmitterSpec {
    Vec3 position = Vec3::Zero();
    Vec3 orientation = Vec3::UnitZ();
    double mu = 1e-3;
    double Omega = 0.54;
};

struct Tolerances {
    double sum_rule = 0.02;
    double asymmetry = 0.02;       // pre-projection anti-Hermitian part
    double hermitian = 1e-8;
    double psd = 1e-10;
    double gamma_symmetry = 1e-6;
    double radiated_power = 0.005;  // analytic vs quadrature
    double vacuum = 0.01;
    double closure = 0.01;
    double truncation = 0.02;
    double lossless_absorption = 1e-4;
    double norm = 1e-8;
};

struct RunConfig {
    std::vector<GeometryEntry> geometry;
    DrudeMaterial material;
    std::vector<EmitterSpec> emitters;

    double w_min = 0.3, w_max = 1.1;
    int w_count = 161;

    double beta_M = kInfBeta, beta_S = kInfBeta;

    int n_freq = 100;
    int n_max = 2;
    bool rwa = false;
    double bath_lo = 0.0, bath_hi = 0.0;  // optional window inside the spectral grid (0: whole grid)

    std::string initial_state = "bell_minus";
    CVec initial_vector;  // set when the config gives explicit amplitudes

    double t_max = 100.0;
    int t_count = 101;

    std::string out_dir = "out";
    bool svg = false;
    unsigned seed = 0;

    BemOptions bem;
    PowerOptions power;
    Tolerances tol;
    int prad_check_points = 5;  // frequencies used by the validate radiated-power check

    std::string base_dir;  // resolves relative mesh paths

    std::vector<double> frequencies() const;
    std::vector<double> times() const;
    std::vector<double> dipole_moments() const;
};

// Parse and schema-check a configuration; throws ConfigError with the offending key.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace qbem
