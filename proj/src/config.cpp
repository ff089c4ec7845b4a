#include "qbem/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qbem/errors.hpp"

namespace qbem {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

void only_keys(const json& j, const std::string& where, const std::set<std::string>& keys) {
    if (!j.is_object()) bad(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key())) bad(where, "unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where, "expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) bad(where, "expected true or false");
    return j.get<bool>();
}

Vec3 vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) bad(where, "expected [x, y, z]");
    return Vec3(num(j[0], where), num(j[1], where), num(j[2], where));
}

double beta(const json& j, const std::string& where) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInfBeta;
        bad(where, "expected a positive number or \"inf\"");
    }
    double b = num(j, where);
    if (!(b > 0.0)) bad(where, "must be positive");
    return b;
}

GeometryEntry geometry_entry(const json& g, const std::string& where, const std::string& base) {
    only_keys(g, where, {"shape", "mesh_path", "radius", "dims", "center", "refine", "divisions", "axis"});
    GeometryEntry e;
    if (g.contains("mesh_path")) {
        if (g.contains("shape")) bad(where, "give either 'shape' or 'mesh_path'");
        if (!g["mesh_path"].is_string()) bad(where + ".mesh_path", "expected a string");
        std::filesystem::path p = g["mesh_path"].get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base) / p;
        e.mesh_path = p.string();
        return e;
    }
    if (!g.contains("shape") || !g["shape"].is_string()) bad(where, "missing 'shape' or 'mesh_path'");
    ShapeSpec& s = e.shape;
    s.kind = g["shape"].get<std::string>();
    if (s.kind != "sphere" && s.kind != "box" && s.kind != "cylinder") bad(where + ".shape", "unknown shape '" + s.kind + "'");
    if (g.contains("radius")) s.dims.push_back(num(g["radius"], where + ".radius"));
    if (g.contains("dims")) {
        if (!g["dims"].is_array()) bad(where + ".dims", "expected an array");
        if (!s.dims.empty() && s.kind != "cylinder") bad(where, "give either 'radius' or 'dims'");
        for (const auto& d : g["dims"]) s.dims.push_back(num(d, where + ".dims"));
    }
    std::size_t want = s.kind == "sphere" ? 1 : s.kind == "box" ? 3 : 2;
    if (s.dims.size() != want) bad(where, "shape '" + s.kind + "' needs " + std::to_string(want) + " dimension(s)");
    for (double d : s.dims)
        if (!(d > 0.0)) bad(where, "dimensions must be positive");
    if (g.contains("center")) s.center = vec3(g["center"], where + ".center");
    if (g.contains("axis")) {
        s.axis = vec3(g["axis"], where + ".axis");
        if (s.axis.norm() == 0.0) bad(where + ".axis", "zero vector");
    }
    if (g.contains("refine")) s.refine = integer(g["refine"], where + ".refine");
    if (s.refine < 0 || s.refine > 8) bad(where + ".refine", "must be in [0, 8]");
    if (g.contains("divisions")) {
        if (s.kind != "sphere") bad(where + ".divisions", "only spheres accept 'divisions'");
        s.divisions = integer(g["divisions"], where + ".divisions");
        if (s.divisions < 1 || s.divisions > 64) bad(where + ".divisions", "must be in [1, 64]");
    }
    return e;
}

}  // namespace

std::vector<double> RunConfig::frequencies() const {
    std::vector<double> w(w_count);
    for (int i = 0; i < w_count; ++i)
        w[i] = w_count == 1 ? w_min : w_min + (w_max - w_min) * i / (w_count - 1);
    return w;
}

std::vector<double> RunConfig::times() const {
    std::vector<double> t(t_count);
    for (int i = 0; i < t_count; ++i) t[i] = t_count == 1 ? 0.0 : t_max * i / (t_count - 1);
    return t;
}

std::vector<double> RunConfig::dipole_moments() const {
    std::vector<double> mu;
    for (const auto& e : emitters) mu.push_back(e.mu);
    return mu;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    only_keys(j, "config",
              {"geometry", "material", "emitters", "frequency_grid", "temperatures", "bath", "initial_state",
               "time_grid", "outputs", "seed", "bem", "power", "tolerances"});
    RunConfig c;
    c.base_dir = base_dir;

    if (j.contains("geometry")) {
        if (!j["geometry"].is_array()) bad("geometry", "expected a list");
        for (std::size_t i = 0; i < j["geometry"].size(); ++i)
            c.geometry.push_back(geometry_entry(j["geometry"][i], "geometry[" + std::to_string(i) + "]", base_dir));
    }
    if (j.contains("material")) {
        const auto& m = j["material"];
        only_keys(m, "material", {"omega_p", "nu"});
        if (m.contains("omega_p")) c.material.omega_p = num(m["omega_p"], "material.omega_p");
        if (m.contains("nu")) c.material.nu = num(m["nu"], "material.nu");
        if (!(c.material.omega_p > 0.0)) bad("material.omega_p", "must be positive");
        if (!(c.material.nu >= 0.0)) bad("material.nu", "must be non-negative");
    }
    if (!j.contains("emitters") || !j["emitters"].is_array() || j["emitters"].empty())
        bad("emitters", "expected a non-empty list");
    for (std::size_t i = 0; i < j["emitters"].size(); ++i) {
        const auto& e = j["emitters"][i];
        std::string w = "emitters[" + std::to_string(i) + "]";
        only_keys(e, w, {"position", "orientation", "mu", "Omega"});
        EmitterSpec s;
        if (!e.contains("position")) bad(w, "missing 'position'");
        s.position = vec3(e["position"], w + ".position");
        if (e.contains("orientation")) s.orientation = vec3(e["orientation"], w + ".orientation");
        if (s.orientation.norm() == 0.0) bad(w + ".orientation", "zero vector");
        s.orientation.normalize();
        if (e.contains("mu")) s.mu = num(e["mu"], w + ".mu");
        if (!(s.mu > 0.0)) bad(w + ".mu", "must be positive");
        if (e.contains("Omega")) s.Omega = num(e["Omega"], w + ".Omega");
        if (!(s.Omega > 0.0)) bad(w + ".Omega", "must be positive");
        c.emitters.push_back(s);
    }
    if (j.contains("frequency_grid")) {
        const auto& f = j["frequency_grid"];
        only_keys(f, "frequency_grid", {"min", "max", "count"});
        if (f.contains("min")) c.w_min = num(f["min"], "frequency_grid.min");
        if (f.contains("max")) c.w_max = num(f["max"], "frequency_grid.max");
        if (f.contains("count")) c.w_count = integer(f["count"], "frequency_grid.count");
    }
    if (!(c.w_min > 0.0)) bad("frequency_grid.min", "must be positive");
    if (c.w_count < 1) bad("frequency_grid.count", "must be at least 1");
    if (c.w_count > 1 && !(c.w_max > c.w_min)) bad("frequency_grid", "max must exceed min");
    if (j.contains("temperatures")) {
        const auto& t = j["temperatures"];
        only_keys(t, "temperatures", {"beta_M", "beta_S"});
        if (t.contains("beta_M")) c.beta_M = beta(t["beta_M"], "temperatures.beta_M");
        if (t.contains("beta_S")) c.beta_S = beta(t["beta_S"], "temperatures.beta_S");
    }
    if (j.contains("bath")) {
        const auto& b = j["bath"];
        only_keys(b, "bath", {"n_freq", "n_max", "rwa", "window"});
        if (b.contains("n_freq")) c.n_freq = integer(b["n_freq"], "bath.n_freq");
        if (b.contains("n_max")) c.n_max = integer(b["n_max"], "bath.n_max");
        if (b.contains("rwa")) c.rwa = boolean(b["rwa"], "bath.rwa");
        if (b.contains("window")) {
            const auto& w = b["window"];
            if (!w.is_array() || w.size() != 2) bad("bath.window", "expected [lo, hi]");
            c.bath_lo = num(w[0], "bath.window");
            c.bath_hi = num(w[1], "bath.window");
            if (!(c.bath_hi > c.bath_lo) || !(c.bath_lo > 0.0)) bad("bath.window", "expected 0 < lo < hi");
        }
        if (c.n_freq < 2) bad("bath.n_freq", "must be at least 2");
        if (c.n_max < 1 || c.n_max > 3) bad("bath.n_max", "must be in [1, 3]");
    }
    if (j.contains("initial_state")) {
        const auto& s = j["initial_state"];
        if (s.is_string()) {
            c.initial_state = s.get<std::string>();
            static const std::set<std::string> names{"bell_plus", "bell_minus", "eg", "ge", "gg", "ee"};
            if (!names.count(c.initial_state)) bad("initial_state", "unknown state '" + c.initial_state + "'");
        } else if (s.is_array() && s.size() == 4) {
            c.initial_state = "explicit";
            c.initial_vector = CVec(4);
            for (int i = 0; i < 4; ++i) {
                if (s[i].is_array() && s[i].size() == 2)
                    c.initial_vector[i] = cplx(num(s[i][0], "initial_state"), num(s[i][1], "initial_state"));
                else
                    c.initial_vector[i] = num(s[i], "initial_state");
            }
            if (c.initial_vector.norm() == 0.0) bad("initial_state", "zero vector");
        } else {
            bad("initial_state", "expected a state name or 4 amplitudes");
        }
    }
    if (j.contains("time_grid")) {
        const auto& t = j["time_grid"];
        only_keys(t, "time_grid", {"t_max", "count"});
        if (t.contains("t_max")) c.t_max = num(t["t_max"], "time_grid.t_max");
        if (t.contains("count")) c.t_count = integer(t["count"], "time_grid.count");
        if (!(c.t_max > 0.0)) bad("time_grid.t_max", "must be positive");
        if (c.t_count < 2) bad("time_grid.count", "must be at least 2");
    }
    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        only_keys(o, "outputs", {"dir", "svg"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) bad("outputs.dir", "expected a string");
            c.out_dir = o["dir"].get<std::string>();
        }
        if (o.contains("svg")) c.svg = boolean(o["svg"], "outputs.svg");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) bad("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<unsigned>();
    }
    if (j.contains("bem")) {
        const auto& b = j["bem"];
        only_keys(b, "bem", {"near_factor", "near_outer_order", "rhs_order", "field_order", "cond_limit"});
        if (b.contains("near_factor")) c.bem.near_factor = num(b["near_factor"], "bem.near_factor");
        if (b.contains("near_outer_order")) c.bem.near_outer_order = integer(b["near_outer_order"], "bem.near_outer_order");
        if (b.contains("rhs_order")) c.bem.rhs_order = integer(b["rhs_order"], "bem.rhs_order");
        if (b.contains("field_order")) c.bem.field_order = integer(b["field_order"], "bem.field_order");
        if (b.contains("cond_limit")) c.bem.cond_limit = num(b["cond_limit"], "bem.cond_limit");
    }
    if (j.contains("power")) {
        const auto& p = j["power"];
        only_keys(p, "power", {"sphere_order_start", "sphere_order_step", "sphere_order_max", "sphere_tol", "force_surface",
                               "prad_check_points"});
        if (p.contains("sphere_order_start")) c.power.sphere_order_start = integer(p["sphere_order_start"], "power.sphere_order_start");
        if (p.contains("sphere_order_step")) c.power.sphere_order_step = integer(p["sphere_order_step"], "power.sphere_order_step");
        if (p.contains("sphere_order_max")) c.power.sphere_order_max = integer(p["sphere_order_max"], "power.sphere_order_max");
        if (p.contains("sphere_tol")) c.power.sphere_tol = num(p["sphere_tol"], "power.sphere_tol");
        if (p.contains("force_surface")) c.power.force_surface = boolean(p["force_surface"], "power.force_surface");
        if (p.contains("prad_check_points")) c.prad_check_points = integer(p["prad_check_points"], "power.prad_check_points");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        only_keys(t, "tolerances", {"sum_rule", "asymmetry", "hermitian", "psd", "gamma_symmetry", "radiated_power", "vacuum",
                                    "closure", "truncation", "lossless_absorption", "norm"});
        auto set = [&](const char* k, double& v) {
            if (t.contains(k)) v = num(t[k], std::string("tolerances.") + k);
        };
        set("sum_rule", c.tol.sum_rule);
        set("asymmetry", c.tol.asymmetry);
        set("hermitian", c.tol.hermitian);
        set("psd", c.tol.psd);
        set("gamma_symmetry", c.tol.gamma_symmetry);
        set("radiated_power", c.tol.radiated_power);
        set("vacuum", c.tol.vacuum);
        set("closure", c.tol.closure);
        set("truncation", c.tol.truncation);
        set("lossless_absorption", c.tol.lossless_absorption);
        set("norm", c.tol.norm);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string base = std::filesystem::path(path).parent_path().string();
    return parse_config(ss.str(), base.empty() ? "." : base);
}

}  // namespace qbem
