#include "qbem/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qbem/errors.hpp"
#include "qbem/svg.hpp"

namespace qbem {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::string prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("outputs: cannot create directory '" + dir + "': " + ec.message());
    return dir;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("outputs: cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

json check(double residual, double tolerance, bool pass) {
    return json{{"residual", residual}, {"tolerance", tolerance}, {"pass", pass}};
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ------------------------------------------------------------------ scene

TriangleMesh build_geometry(const RunConfig& cfg) {
    TriangleMesh all;
    for (std::size_t g = 0; g < cfg.geometry.size(); ++g) {
        const auto& e = cfg.geometry[g];
        TriangleMesh m;
        try {
            m = e.mesh_path.empty() ? generate_shape(e.shape) : load_off_file(e.mesh_path);  // build_scene validates
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("geometry[" + std::to_string(g) + "]: " + ex.what());
        }
        append_mesh(all, m);
    }
    return all;
}

std::unique_ptr<Scene> build_scene(const RunConfig& cfg) {
    auto scene = std::make_unique<Scene>();
    scene->mesh = build_geometry(cfg);
    if (!scene->mesh.triangles.empty()) {
        validate(scene->mesh);
        for (std::size_t i = 0; i < cfg.emitters.size(); ++i) {
            const Vec3& p = cfg.emitters[i].position;
            if (is_inside(scene->mesh, p))
                throw ConfigError("emitters[" + std::to_string(i) + "] lies inside a body");
            for (std::size_t t = 0; t < scene->mesh.triangles.size(); ++t)
                if ((scene->mesh.centroid(static_cast<int>(t)) - p).norm() < 1e-9)
                    throw ConfigError("emitters[" + std::to_string(i) + "] lies on a body surface");
        }
        scene->basis = build_rwg(scene->mesh);
    }
    for (const auto& e : cfg.emitters) scene->emitters.push_back({e.position, e.orientation, e.mu});
    scene->op = std::make_unique<OperatorAssembler>(scene->mesh, scene->basis, cfg.bem);
    return scene;
}

// ------------------------------------------------------------------ spectra

SpectraRun run_spectra(const Scene& scene, const RunConfig& cfg, const std::vector<double>& omegas,
                       const std::vector<std::size_t>& quad_indices, int quad_order, std::ostream* log) {
    SpectraRun run;
    run.table.mu = cfg.dipole_moments();
    run.table.omega_p = cfg.material.omega_p;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        auto t0 = std::chrono::steady_clock::now();
        PowerOptions popts = cfg.power;
        popts.prad_quadrature_order = 0;
        for (auto q : quad_indices)
            if (q == k) popts.prad_quadrature_order = quad_order;
        PowerMatrices pm = compute_powers(*scene.op, omegas[k], cfg.material, scene.emitters, popts);
        run.table.points.push_back(spectral_from_powers(pm));
        run.powers.push_back(std::move(pm));
        if (log)
            *log << "[spectra] omega " << std::fixed << std::setprecision(4) << omegas[k] << "  ("
                 << k + 1 << "/" << omegas.size() << ", " << std::setprecision(1) << elapsed(t0) << " s)\n"
                 << std::defaultfloat << std::setprecision(6) << std::flush;
    }
    run.table.check();
    return run;
}

void write_spectra_csv(std::ostream& out, const SpectralTable& table) {
    const std::size_t n = table.n_emitters();
    const double j0 = table.j0();
    out << "omega_over_wp";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
            if (n > 9) ij = std::to_string(i + 1) + "_" + std::to_string(j + 1);
            out << ",ReJM_" << ij << ",ImJM_" << ij << ",ReJS_" << ij << ",ImJS_" << ij << ",Gamma_" << ij;
        }
    out << '\n';
    for (const auto& p : table.points) {
        out << sci(p.omega / table.omega_p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
                out << ',' << sci(p.JM(a, b).real() / j0) << ',' << sci(p.JM(a, b).imag() / j0) << ','
                    << sci(p.JS(a, b).real() / j0) << ',' << sci(p.JS(a, b).imag() / j0) << ','
                    << sci(p.Gamma(a, b) / j0);
            }
        out << '\n';
    }
}

// ------------------------------------------------------------------ dynamics

double dynamics_horizon(const RunConfig& cfg) {
    double lo = cfg.bath_hi > 0.0 ? cfg.bath_lo : cfg.w_min;
    double hi = cfg.bath_hi > 0.0 ? cfg.bath_hi : cfg.w_max;
    return 0.8 * kPi * cfg.n_freq / (hi - lo);
}

namespace {

SurrogateBath make_bath(const EffectiveSpectral& eff, const RunConfig& cfg, int n_freq) {
    if (cfg.bath_hi > 0.0) {
        if (cfg.bath_lo < eff.omega[eff.n_negative] - 1e-12 || cfg.bath_hi > eff.omega.back() + 1e-12)
            throw ConfigError("bath.window: must lie inside the frequency grid");
        return discretize_bath(eff, n_freq, cfg.bath_lo, cfg.bath_hi);
    }
    return discretize_bath(eff, n_freq);
}

CVec initial_emitter_state(const RunConfig& cfg) {
    return cfg.initial_state == "explicit" ? cfg.initial_vector : named_emitter_state(cfg.initial_state);
}

std::vector<double> omegas_of(const RunConfig& cfg) {
    std::vector<double> w;
    for (const auto& e : cfg.emitters) w.push_back(e.Omega);
    return w;
}

}  // namespace

DynamicsRun run_dynamics(const SpectralTable& table, const RunConfig& cfg, const DynamicsOptions& opts) {
    if (cfg.emitters.size() != 2) throw ConfigError("dynamics: exactly two emitters are required");
    DynamicsRun run;
    EffectiveSpectral eff = dress(table, cfg.beta_M, cfg.beta_S);
    SurrogateBath bath = make_bath(eff, cfg, cfg.n_freq);
    run.d_omega = bath.d_omega;
    run.horizon = 0.8 * bath.horizon();
    if (cfg.t_max > run.horizon * (1.0 + 1e-12))
        throw ConfigError("time_grid.t_max = " + std::to_string(cfg.t_max) + " exceeds the bath horizon " +
                          std::to_string(run.horizon));
    const std::vector<double> times = cfg.times();
    run.closure = correlator_closure(eff, bath, times);
    run.n_modes = bath.modes.size();

    const CVec e0 = initial_emitter_state(cfg);
    if (opts.truncation_check && !bath.modes.empty()) {
        // n_max 2 against 3 on a coarser bath over its own horizon
        std::size_t per_bin = std::max<std::size_t>(1, bath.modes.size() / static_cast<std::size_t>(cfg.n_freq));
        int nc = std::max(2, std::min(cfg.n_freq / 4, static_cast<int>(48 / per_bin)));
        SurrogateBath coarse = make_bath(eff, cfg, nc);
        double tc = std::min(cfg.t_max, 0.8 * coarse.horizon());
        std::vector<double> tt(41);
        for (int i = 0; i < 41; ++i) tt[i] = tc * i / 40.0;
        Hamiltonian h2(omegas_of(cfg), coarse, 2, cfg.rwa), h3(omegas_of(cfg), coarse, 3, cfg.rwa);
        Trajectory a = propagate(h2, product_with_vacuum(h2, e0), tt, opts.prop);
        Trajectory b = propagate(h3, product_with_vacuum(h3, e0), tt, opts.prop);
        double diff = 0.0, scale = 1e-300;
        for (std::size_t i = 0; i < tt.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                diff = std::max(diff, std::abs(a.p_e[i][k] - b.p_e[i][k]));
                scale = std::max(scale, a.p_e[i][k]);
            }
            diff = std::max(diff, std::abs(a.negativity[i] - b.negativity[i]));
            scale = std::max(scale, a.negativity[i]);
        }
        run.truncation_delta = diff / scale;
    }

    Hamiltonian H(omegas_of(cfg), bath, cfg.n_max, cfg.rwa);
    run.dim = H.dim();
    run.traj = propagate(H, product_with_vacuum(H, e0), times, opts.prop);
    const auto& tr = run.traj;
    double e_ref = tr.energy.front();
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        run.energy_drift = std::max(run.energy_drift, std::abs(tr.energy[i] - e_ref) / std::max(1.0, std::abs(e_ref)));
        run.max_norm_drift = std::max(run.max_norm_drift, tr.norm_drift[i]);
        run.max_sector_leak = std::max(run.max_sector_leak, tr.sector_leak[i]);
    }
    return run;
}

void write_dynamics_csv(std::ostream& out, const Trajectory& traj, double omega_p) {
    out << "t_wp,p_e_1,p_e_2,negativity,norm_drift\n";
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        double p2 = traj.p_e[i].size() > 1 ? traj.p_e[i][1] : 0.0;
        out << sci(traj.t[i] * omega_p) << ',' << sci(traj.p_e[i][0]) << ',' << sci(p2) << ','
            << sci(traj.negativity[i]) << ',' << sci(traj.norm_drift[i]) << '\n';
    }
}

// ------------------------------------------------------------------ commands

int cmd_spectra(const RunConfig& cfg, std::ostream& log) {
    auto scene = build_scene(cfg);
    const std::string dir = prepare_dir(cfg.out_dir);
    log << "[spectra] " << scene->mesh.n_triangles() << " triangles, " << scene->basis.size()
        << " basis functions, " << cfg.w_count << " frequencies\n";
    SpectraRun run = run_spectra(*scene, cfg, cfg.frequencies(), {}, 48, &log);
    const auto& tb = run.table;
    {
        std::ofstream out(dir + "/spectra.csv");
        if (!out) throw ConfigError("outputs: cannot write spectra.csv");
        write_spectra_csv(out, tb);
    }
    json pts = json::array();
    double worst_sum = 0.0;
    std::size_t peak = 0;
    for (std::size_t k = 0; k < tb.points.size(); ++k) {
        const auto& p = tb.points[k];
        double sr = sum_rule_residual(p);
        worst_sum = std::max(worst_sum, sr);
        if (p.JS(0, 0).real() > tb.points[peak].JS(0, 0).real()) peak = k;
        pts.push_back({{"omega", p.omega},
                       {"sum_rule_residual", sr},
                       {"asym_M", p.asym_M},
                       {"asym_S", p.asym_S},
                       {"asym_Gamma", p.asym_G},
                       {"sphere_order", run.powers[k].sphere_order},
                       {"rcond", run.powers[k].rcond}});
    }
    json j{{"J0", tb.j0()},
           {"omega_p", tb.omega_p},
           {"n_emitters", tb.n_emitters()},
           {"triangles", scene->mesh.n_triangles()},
           {"basis_functions", scene->basis.size()},
           {"max_sum_rule_residual", worst_sum},
           {"JS_11_peak_omega_over_wp", tb.points[peak].omega / tb.omega_p},
           {"points", pts}};
    write_json(dir + "/spectra.json", j);
    if (cfg.svg) {
        std::vector<double> x;
        for (const auto& p : tb.points) x.push_back(p.omega / tb.omega_p);
        const std::size_t n = tb.n_emitters();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t jj = i; jj < n; ++jj) {
                Series m{"Re JM/J0", {}}, s{"Re JS/J0", {}};
                for (const auto& p : tb.points) {
                    m.y.push_back(p.JM(i, jj).real() / tb.j0());
                    s.y.push_back(p.JS(i, jj).real() / tb.j0());
                }
                std::string ij = std::to_string(i + 1) + std::to_string(jj + 1);
                write_line_chart(dir + "/spectra_" + ij + ".svg", "spectral densities, pair " + ij, "omega / omega_p", x,
                                 {m, s});
            }
    }
    log << "[spectra] wrote " << dir << "/spectra.csv (max sum-rule residual " << worst_sum << ")\n";
    return 0;
}

int cmd_dynamics(const RunConfig& cfg, std::ostream& log) {
    if (cfg.emitters.size() != 2) throw ConfigError("dynamics: exactly two emitters are required");
    double hz = dynamics_horizon(cfg);
    if (cfg.t_max > hz * (1.0 + 1e-12))
        throw ConfigError("time_grid.t_max = " + std::to_string(cfg.t_max) + " exceeds the bath horizon " +
                          std::to_string(hz) + " (0.8 pi / d_omega)");
    auto scene = build_scene(cfg);
    const std::string dir = prepare_dir(cfg.out_dir);
    SpectraRun sp = run_spectra(*scene, cfg, cfg.frequencies(), {}, 48, &log);
    double worst_sum = 0.0;
    for (const auto& p : sp.table.points) worst_sum = std::max(worst_sum, sum_rule_residual(p));
    log << "[dynamics] propagating\n";
    DynamicsRun run = run_dynamics(sp.table, cfg);
    {
        std::ofstream out(dir + "/dynamics.csv");
        if (!out) throw ConfigError("outputs: cannot write dynamics.csv");
        write_dynamics_csv(out, run.traj, cfg.material.omega_p);
    }
    bool trunc_ok = run.truncation_delta < cfg.tol.truncation;
    json j{{"sum_rule_residual", worst_sum},
           {"correlator_closure", run.closure},
           {"truncation_delta", run.truncation_delta},
           {"truncation_pass", trunc_ok},
           {"energy_drift", run.energy_drift},
           {"max_norm_drift", run.max_norm_drift},
           {"max_sector_leak", run.max_sector_leak},
           {"bath_modes", run.n_modes},
           {"hilbert_dim", run.dim},
           {"d_omega", run.d_omega},
           {"horizon", run.horizon},
           {"krylov_substeps", run.traj.substeps}};
    write_json(dir + "/dynamics.json", j);
    if (cfg.svg) {
        std::vector<double> x;
        for (double t : run.traj.t) x.push_back(t * cfg.material.omega_p);
        write_line_chart(dir + "/negativity.svg", "negativity", "t omega_p", x, {{"N(rho_12)", run.traj.negativity}});
    }
    if (!trunc_ok)
        throw NumericalError("dynamics: truncation spot-check changed observables by " +
                             std::to_string(run.truncation_delta) + " (threshold " +
                             std::to_string(cfg.tol.truncation) + ")");
    log << "[dynamics] wrote " << dir << "/dynamics.csv\n";
    return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
    const std::string dir = prepare_dir(cfg.out_dir);
    json report = json::object();
    bool all_ok = true;
    auto add = [&](const std::string& name, double residual, double tol, bool pass) {
        report[name] = check(residual, tol, pass);
        all_ok = all_ok && pass;
        log << "[validate] " << std::left << std::setw(26) << name << (pass ? "pass" : "FAIL") << "  residual "
            << std::setprecision(4) << residual << " (tolerance " << tol << ")\n";
    };
    auto finish = [&]() {
        write_json(dir + "/validate.json", report);
        return all_ok ? 0 : 1;
    };

    // mesh topology first: nothing else is meaningful on a broken surface
    TriangleMesh mesh = build_geometry(cfg);
    if (!mesh.triangles.empty()) {
        MeshReport mr = inspect(mesh);
        add("mesh", static_cast<double>(mr.problems.size()), 0.0, mr.problems.empty());
        for (const auto& p : mr.problems) log << "[validate]   " << p << '\n';
        if (!mr.problems.empty()) return finish();
    }

    auto scene = build_scene(cfg);
    const auto omegas = cfg.frequencies();
    std::vector<std::size_t> qidx;
    const int nq = std::max(1, std::min<int>(cfg.prad_check_points, static_cast<int>(omegas.size())));
    for (int i = 0; i < nq; ++i)
        qidx.push_back(nq == 1 ? 0 : static_cast<std::size_t>(std::lround(double(i) * (omegas.size() - 1) / (nq - 1))));
    SpectraRun sp = run_spectra(*scene, cfg, omegas, qidx, 48, &log);
    const auto& tb = sp.table;

    double herm = 0.0, asym = 0.0, psd = 0.0, gsym = 0.0, gpsd = 0.0, sum = 0.0, imb = 0.0;
    for (const auto& p : tb.points) {
        for (const CMat* A : {&p.JM, &p.JS}) {
            double n = A->norm();
            if (n > 0.0) herm = std::max(herm, (*A - A->adjoint()).cwiseAbs().maxCoeff() / n);
        }
        asym = std::max({asym, p.asym_M, p.asym_S});
        // a lossless body leaves J_M at flux-integration noise; lossless_absorption covers it instead
        if (cfg.material.nu > 0.0) psd = std::min(psd, min_eigen_ratio(p.JM));
        psd = std::min(psd, min_eigen_ratio(p.JS));
        gsym = std::max(gsym, p.asym_G);
        gpsd = std::min(gpsd, min_eigen_ratio(p.Gamma.cast<cplx>()));
        sum = std::max(sum, sum_rule_residual(p));
        imb = std::max(imb, imag_balance_residual(p));
    }
    add("hermitian", herm, cfg.tol.hermitian, herm < cfg.tol.hermitian);
    add("pre_projection_asymmetry", asym, cfg.tol.asymmetry, asym < cfg.tol.asymmetry);
    add("psd", -psd, cfg.tol.psd, -psd <= cfg.tol.psd);
    add("gamma_symmetric", gsym, cfg.tol.gamma_symmetry, gsym < cfg.tol.gamma_symmetry);
    add("gamma_positive", -gpsd, cfg.tol.psd, -gpsd <= cfg.tol.psd);
    add("sum_rule", sum, cfg.tol.sum_rule, sum < cfg.tol.sum_rule);
    add("poynting_imaginary", imb, cfg.tol.sum_rule, imb < cfg.tol.sum_rule);

    double prad = 0.0;
    for (auto q : qidx) {
        const auto& pm = sp.powers[q];
        prad = std::max(prad, (pm.P_rad - pm.P_rad_quad).norm() / pm.P_rad_quad.norm());
    }
    add("radiated_power_quadrature", prad, cfg.tol.radiated_power, prad < cfg.tol.radiated_power);

    if (cfg.material.nu == 0.0 && !scene->mesh.triangles.empty()) {
        double ratio = 0.0;
        for (const auto& pm : sp.powers) ratio = std::max(ratio, pm.P_abs.cwiseAbs().maxCoeff() / pm.P_em.cwiseAbs().maxCoeff());
        add("lossless_absorption", ratio, cfg.tol.lossless_absorption, ratio < cfg.tol.lossless_absorption);
    }

    {
        // vacuum limit for the same emitters
        RunConfig vac = cfg;
        vac.geometry.clear();
        auto vs = build_scene(vac);
        double err = 0.0;
        for (double w : omegas) {
            PowerMatrices pm = compute_powers(*vs->op, w, cfg.material, vs->emitters);
            SpectralPoint p = spectral_from_powers(pm);
            RMat g = vacuum_gamma(w, vs->emitters) / (2.0 * kPi);
            err = std::max(err, (p.JS.real() - g).norm() / g.norm());
        }
        add("vacuum_limit", err, cfg.tol.vacuum, err < cfg.tol.vacuum);
    }

    {
        EffectiveSpectral eff = dress(tb, cfg.beta_M, cfg.beta_S);
        SurrogateBath bath = make_bath(eff, cfg, cfg.n_freq);
        double hz = 0.8 * bath.horizon();
        std::vector<double> tt(101);
        for (int i = 0; i <= 100; ++i) tt[i] = hz * i / 100.0;
        double cl = correlator_closure(eff, bath, tt);
        add("correlator_closure", cl, cfg.tol.closure, cl < cfg.tol.closure);
    }

    {
        // PPT soundness on random separable two-qubit mixtures
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> nd;
        auto random_state = [&]() {
            CVec v(2);
            v << cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng));
            return CVec(v / v.norm());
        };
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            CMat rho = CMat::Zero(4, 4);
            double wsum = 0.0;
            for (int k = 0; k < 4; ++k) {
                double w = std::abs(nd(rng)) + 1e-3;
                CVec a = random_state(), b = random_state();
                CVec ab(4);
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y) ab[2 * x + y] = a[x] * b[y];
                rho += w * ab * ab.adjoint();
                wsum += w;
            }
            worst = std::max(worst, negativity(rho / wsum));
        }
        add("ppt_separable", worst, 1e-12, worst <= 1e-12);
    }
    return finish();
}

int cmd_mesh_info(const std::string& path, const std::string& out_dir, std::ostream& out) {
    TriangleMesh mesh;
    if (fs::path(path).extension() == ".off") {
        mesh = load_off_file(path);
    } else {
        mesh = build_geometry(load_config(path));
    }
    MeshReport rep = inspect(mesh);
    json j{{"vertices", mesh.n_vertices()},
           {"triangles", mesh.n_triangles()},
           {"interior_edges", rep.interior_edges},
           {"area", mesh.total_area()},
           {"volume", mesh.volume()},
           {"bodies", mesh.n_bodies()},
           {"watertight", rep.watertight},
           {"problems", rep.problems}};
    out << j.dump(2) << '\n';
    if (!out_dir.empty()) write_json(prepare_dir(out_dir) + "/mesh_info.json", j);
    return 0;
}

}  // namespace qbem
