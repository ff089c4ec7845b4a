#include "qbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace qbem {

int TriangleMesh::n_bodies() const {
    int n = 0;
    for (int b : body) n = std::max(n, b + 1);
    return n;
}

double TriangleMesh::area(int t) const {
    return 0.5 * (corner(t, 1) - corner(t, 0)).cross(corner(t, 2) - corner(t, 0)).norm();
}

Vec3 TriangleMesh::normal(int t) const {
    return (corner(t, 1) - corner(t, 0)).cross(corner(t, 2) - corner(t, 0)).normalized();
}

Vec3 TriangleMesh::centroid(int t) const {
    return (corner(t, 0) + corner(t, 1) + corner(t, 2)) / 3.0;
}

double TriangleMesh::diameter(int t) const {
    return std::max({(corner(t, 1) - corner(t, 0)).norm(), (corner(t, 2) - corner(t, 1)).norm(),
                     (corner(t, 0) - corner(t, 2)).norm()});
}

double TriangleMesh::total_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += area(static_cast<int>(t));
    return s;
}

double TriangleMesh::body_volume(int b) const {
    double v = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        if (body[t] != b) continue;
        int ti = static_cast<int>(t);
        v += corner(ti, 0).dot(corner(ti, 1).cross(corner(ti, 2)));
    }
    return v / 6.0;
}

double TriangleMesh::volume() const {
    double v = 0.0;
    for (int b = 0; b < n_bodies(); ++b) v += body_volume(b);
    return v;
}

namespace {

using EdgeKey = std::pair<int, int>;

struct EdgeUse {
    int tri;
    bool forward;  // edge traversed min -> max in the triangle's cyclic order
};

std::map<EdgeKey, std::vector<EdgeUse>> edge_map(const TriangleMesh& mesh) {
    std::map<EdgeKey, std::vector<EdgeUse>> edges;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int u = tri[k], v = tri[(k + 1) % 3];
            edges[{std::min(u, v), std::max(u, v)}].push_back({static_cast<int>(t), u < v});
        }
    }
    return edges;
}

std::string edge_name(const EdgeKey& e) {
    return "edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")";
}

}  // namespace

MeshReport inspect(const TriangleMesh& mesh) {
    MeshReport rep;
    auto fail = [&](const std::string& msg) {
        rep.watertight = false;
        rep.problems.push_back(msg);
    };
    if (mesh.triangles.empty()) fail("mesh has no triangles");
    if (mesh.body.size() != mesh.triangles.size()) fail("body id array size mismatch");
    double scale = 0.0;
    for (const auto& v : mesh.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    scale = std::max(scale, 1e-300);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= static_cast<int>(mesh.vertices.size())) {
                fail("triangle " + std::to_string(t) + " references missing vertex " +
                     std::to_string(tri[k]));
                return rep;
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] ||
            mesh.area(static_cast<int>(t)) < 1e-14 * scale * scale)
            fail("triangle " + std::to_string(t) + " is degenerate");
    }
    for (const auto& [e, uses] : edge_map(mesh)) {
        if (uses.size() == 1) {
            fail(edge_name(e) + " is a boundary edge (used by triangle " +
                 std::to_string(uses[0].tri) + " only)");
        } else if (uses.size() > 2) {
            fail(edge_name(e) + " is non-manifold (" + std::to_string(uses.size()) + " triangles)");
        } else if (uses[0].forward == uses[1].forward) {
            fail(edge_name(e) + " has inconsistent orientation (triangles " +
                 std::to_string(uses[0].tri) + ", " + std::to_string(uses[1].tri) + ")");
        } else if (!mesh.body.empty() && mesh.body.size() == mesh.triangles.size() &&
                   mesh.body[uses[0].tri] != mesh.body[uses[1].tri]) {
            fail(edge_name(e) + " joins triangles of different bodies");
        } else {
            ++rep.interior_edges;
        }
    }
    if (rep.watertight) {
        for (int b = 0; b < mesh.n_bodies(); ++b) {
            if (mesh.body_volume(b) <= 0.0)
                fail("body " + std::to_string(b) + " has inward-facing normals (non-positive volume)");
        }
    }
    return rep;
}

void validate(const TriangleMesh& mesh) {
    auto rep = inspect(mesh);
    if (!rep.problems.empty()) throw MeshError("mesh validation: " + rep.problems.front());
}

TriangleMesh load_off(std::istream& in) {
    std::vector<std::string> tokens_line;
    std::string line;
    auto next_line = [&](std::string& out) -> bool {
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            out = line;
            return true;
        }
        return false;
    };
    std::string l;
    if (!next_line(l)) throw MeshError("load_off: empty input");
    {
        std::istringstream ss(l);
        std::string head;
        ss >> head;
        if (head != "OFF") throw MeshError("load_off: first line must be 'OFF'");
    }
    if (!next_line(l)) throw MeshError("load_off: missing count line");
    long nv = -1, nf = -1, ne = -1;
    {
        std::istringstream ss(l);
        if (!(ss >> nv >> nf >> ne) || nv < 0 || nf < 0)
            throw MeshError("load_off: malformed count line '" + l + "'");
    }
    TriangleMesh mesh;
    mesh.vertices.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        if (!next_line(l)) throw MeshError("load_off: unexpected end of file in vertex list");
        std::istringstream ss(l);
        double x, y, z;
        if (!(ss >> x >> y >> z))
            throw MeshError("load_off: malformed vertex " + std::to_string(i));
        mesh.vertices.emplace_back(x, y, z);
    }
    for (long f = 0; f < nf; ++f) {
        if (!next_line(l)) throw MeshError("load_off: unexpected end of file in face list");
        std::istringstream ss(l);
        int n, a, b, c;
        if (!(ss >> n)) throw MeshError("load_off: malformed face " + std::to_string(f));
        if (n != 3) throw MeshError("load_off: face " + std::to_string(f) + " is not a triangle");
        if (!(ss >> a >> b >> c)) throw MeshError("load_off: malformed face " + std::to_string(f));
        if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
            throw MeshError("load_off: face " + std::to_string(f) + " has out-of-range index");
        mesh.triangles.push_back({a, b, c});
    }
    label_components(mesh);
    return mesh;
}

TriangleMesh load_off_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("load_off: cannot open '" + path + "'");
    return load_off(in);
}

TriangleMesh load_mesh(const std::string& path) {
    TriangleMesh mesh = load_off_file(path);
    validate(mesh);
    return mesh;
}

void write_off(std::ostream& out, const TriangleMesh& mesh) {
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void label_components(TriangleMesh& mesh) {
    const int nt = static_cast<int>(mesh.triangles.size());
    std::vector<int> parent(nt);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [e, uses] : edge_map(mesh)) {
        for (std::size_t k = 1; k < uses.size(); ++k) {
            int a = find(uses[0].tri), b = find(uses[k].tri);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::map<int, int> ids;
    mesh.body.assign(nt, 0);
    for (int t = 0; t < nt; ++t) {
        int r = find(t);
        auto it = ids.find(r);
        if (it == ids.end()) it = ids.emplace(r, static_cast<int>(ids.size())).first;
        mesh.body[t] = it->second;
    }
}

void append_mesh(TriangleMesh& a, const TriangleMesh& b) {
    int off = static_cast<int>(a.vertices.size());
    int boff = a.triangles.empty() ? 0 : a.n_bodies();
    a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (std::size_t t = 0; t < b.triangles.size(); ++t) {
        const auto& tri = b.triangles[t];
        a.triangles.push_back({tri[0] + off, tri[1] + off, tri[2] + off});
        a.body.push_back(b.body[t] + boff);
    }
}

namespace {

// Vertex pool that merges coincident points so generated patches share edges.
class VertexPool {
public:
    explicit VertexPool(double tol) : tol_(tol) {}
    int add(const Vec3& p) {
        auto key = std::array<long long, 3>{std::llround(p.x() / tol_), std::llround(p.y() / tol_),
                                            std::llround(p.z() / tol_)};
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(pts_.size());
        pts_.push_back(p);
        index_.emplace(key, id);
        return id;
    }
    std::vector<Vec3> take() { return std::move(pts_); }

private:
    double tol_;
    std::vector<Vec3> pts_;
    std::map<std::array<long long, 3>, int> index_;
};

TriangleMesh make_sphere(double radius, int n) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Vec3> ico = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : ico) v.normalize();
    const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                              {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                              {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                              {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    VertexPool pool(1e-10);
    TriangleMesh mesh;
    for (const auto& f : faces) {
        const Vec3 &A = ico[f[0]], &B = ico[f[1]], &C = ico[f[2]];
        auto vid = [&](int i, int j) {
            Vec3 p = A + (B - A) * (double(i) / n) + (C - A) * (double(j) / n);
            return pool.add(p.normalized());
        };
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n - i; ++j) {
                mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
                if (i + j + 1 < n)
                    mesh.triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
            }
        }
    }
    mesh.vertices = pool.take();
    for (auto& v : mesh.vertices) v *= radius;
    return mesh;
}

// Adds a planar grid patch origin + s*u + t*v (s, t in [0,1]); u x v points outward.
void add_patch(TriangleMesh& mesh, VertexPool& pool, const Vec3& origin, const Vec3& u,
               const Vec3& v, int nu, int nv) {
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            auto p = [&](int a, int b) {
                return pool.add(origin + u * (double(a) / nu) + v * (double(b) / nv));
            };
            int p00 = p(i, j), p10 = p(i + 1, j), p11 = p(i + 1, j + 1), p01 = p(i, j + 1);
            mesh.triangles.push_back({p00, p10, p11});
            mesh.triangles.push_back({p00, p11, p01});
        }
    }
}

TriangleMesh make_box(const Vec3& L, int refine) {
    int n[3];
    double lmin = L.minCoeff();
    for (int a = 0; a < 3; ++a) {
        n[a] = refine == 0 ? 1
                           : std::max(1, static_cast<int>(std::lround(L[a] / lmin))) *
                                 (1 << (refine - 1));
    }
    VertexPool pool(1e-10 * L.maxCoeff());
    TriangleMesh mesh;
    Vec3 lo = -0.5 * L;
    Vec3 ex(L.x(), 0, 0), ey(0, L.y(), 0), ez(0, 0, L.z());
    add_patch(mesh, pool, lo, ey, ex, n[1], n[0]);                 // z = lo, normal -z
    add_patch(mesh, pool, lo + ez, ex, ey, n[0], n[1]);            // z = hi
    add_patch(mesh, pool, lo, ex, ez, n[0], n[2]);                 // y = lo, normal -y
    add_patch(mesh, pool, lo + ey, ez, ex, n[2], n[0]);            // y = hi
    add_patch(mesh, pool, lo, ez, ey, n[2], n[1]);                 // x = lo, normal -x
    add_patch(mesh, pool, lo + ex, ey, ez, n[1], n[2]);            // x = hi
    mesh.vertices = pool.take();
    return mesh;
}

TriangleMesh make_cylinder(double radius, double height, int refine) {
    const int nth = 8 * (1 << refine);
    const int nr = 1 << refine;
    const double h_arc = 2.0 * kPi * radius / nth;
    const int nz = std::max(1, static_cast<int>(std::lround(height / h_arc)));
    VertexPool pool(1e-10 * std::max(radius, height));
    TriangleMesh mesh;
    auto ring = [&](double r, double z, int k) {
        double a = 2.0 * kPi * (k % nth) / nth;
        return pool.add(Vec3(r * std::cos(a), r * std::sin(a), z));
    };
    const double z0 = -0.5 * height, z1 = 0.5 * height;
    for (int l = 0; l < nz; ++l) {
        double za = z0 + height * l / nz, zb = z0 + height * (l + 1) / nz;
        for (int k = 0; k < nth; ++k) {
            int a = ring(radius, za, k), b = ring(radius, za, k + 1);
            int c = ring(radius, zb, k + 1), d = ring(radius, zb, k);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    }
    for (int cap = 0; cap < 2; ++cap) {
        double z = cap == 0 ? z0 : z1;
        int centre = pool.add(Vec3(0, 0, z));
        for (int q = 0; q < nr; ++q) {
            double ri = radius * q / nr, ro = radius * (q + 1) / nr;
            for (int k = 0; k < nth; ++k) {
                int o0 = ring(ro, z, k), o1 = ring(ro, z, k + 1);
                if (q == 0) {
                    if (cap == 1) mesh.triangles.push_back({centre, o0, o1});
                    else mesh.triangles.push_back({centre, o1, o0});
                } else {
                    int i0 = ring(ri, z, k), i1 = ring(ri, z, k + 1);
                    if (cap == 1) {
                        mesh.triangles.push_back({i0, o0, o1});
                        mesh.triangles.push_back({i0, o1, i1});
                    } else {
                        mesh.triangles.push_back({i0, o1, o0});
                        mesh.triangles.push_back({i0, i1, o1});
                    }
                }
            }
        }
    }
    mesh.vertices = pool.take();
    return mesh;
}

}  // namespace

TriangleMesh generate_shape(const ShapeSpec& spec) {
    if (spec.refine < 0 || spec.refine > 8)
        throw std::invalid_argument("generate_shape: refine must be in [0, 8]");
    for (double d : spec.dims)
        if (!(d > 0.0)) throw std::invalid_argument("generate_shape: dimensions must be positive");
    TriangleMesh mesh;
    if (spec.kind == "sphere") {
        if (spec.dims.size() != 1) throw std::invalid_argument("generate_shape: sphere needs {radius}");
        int n = spec.divisions > 0 ? spec.divisions : (1 << spec.refine);
        mesh = make_sphere(spec.dims[0], n);
    } else if (spec.kind == "box") {
        if (spec.dims.size() != 3) throw std::invalid_argument("generate_shape: box needs {lx, ly, lz}");
        mesh = make_box(Vec3(spec.dims[0], spec.dims[1], spec.dims[2]), spec.refine);
    } else if (spec.kind == "cylinder") {
        if (spec.dims.size() != 2)
            throw std::invalid_argument("generate_shape: cylinder needs {radius, height}");
        mesh = make_cylinder(spec.dims[0], spec.dims[1], spec.refine);
        Vec3 ax = spec.axis.normalized();
        Eigen::Matrix3d rot = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), ax).toRotationMatrix();
        for (auto& v : mesh.vertices) v = rot * v;
    } else {
        throw std::invalid_argument("generate_shape: unknown shape '" + spec.kind + "'");
    }
    for (auto& v : mesh.vertices) v += spec.center;
    mesh.body.assign(mesh.triangles.size(), 0);
    return mesh;
}

double winding_number(const TriangleMesh& mesh, const Vec3& p) {
    double omega = 0.0;
    for (const auto& t : mesh.triangles) {
        Vec3 a = mesh.vertices[t[0]] - p, b = mesh.vertices[t[1]] - p, c = mesh.vertices[t[2]] - p;
        double la = a.norm(), lb = b.norm(), lc = c.norm();
        double num = a.dot(b.cross(c));
        double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        omega += 2.0 * std::atan2(num, den);
    }
    return omega / (4.0 * kPi);
}

bool is_inside(const TriangleMesh& mesh, const Vec3& p) {
    return winding_number(mesh, p) > 0.5;
}

Vec3 RwgBasis::eval(const TriangleMesh& mesh, int n, int t, const Vec3& r) const {
    (void)mesh;
    for (const auto& h : halves[t])
        if (h.fn == n) return h.coef * (r - h.vertex);
    return Vec3::Zero();
}

RwgBasis build_rwg(const TriangleMesh& mesh) {
    validate(mesh);
    RwgBasis basis;
    basis.halves.assign(mesh.triangles.size(), {});
    std::vector<int> filled(mesh.triangles.size(), 0);
    for (const auto& [e, uses] : edge_map(mesh)) {
        RwgFunction f;
        f.a = e.first;
        f.b = e.second;
        const EdgeUse& up = uses[0].forward ? uses[0] : uses[1];
        const EdgeUse& um = uses[0].forward ? uses[1] : uses[0];
        f.t_plus = up.tri;
        f.t_minus = um.tri;
        auto free_vertex = [&](int t) {
            for (int k = 0; k < 3; ++k) {
                int v = mesh.triangles[t][k];
                if (v != f.a && v != f.b) return v;
            }
            throw MeshError("build_rwg: degenerate triangle " + std::to_string(t));
        };
        f.v_plus = free_vertex(f.t_plus);
        f.v_minus = free_vertex(f.t_minus);
        f.length = (mesh.vertices[f.a] - mesh.vertices[f.b]).norm();
        f.area_plus = mesh.area(f.t_plus);
        f.area_minus = mesh.area(f.t_minus);
        f.centroid_plus = mesh.centroid(f.t_plus);
        f.centroid_minus = mesh.centroid(f.t_minus);
        f.body = mesh.body[f.t_plus];
        int id = static_cast<int>(basis.fns.size());
        basis.fns.push_back(f);
        basis.halves[f.t_plus][filled[f.t_plus]++] =
            HalfRwg{id, f.length / (2.0 * f.area_plus), mesh.vertices[f.v_plus]};
        basis.halves[f.t_minus][filled[f.t_minus]++] =
            HalfRwg{id, -f.length / (2.0 * f.area_minus), mesh.vertices[f.v_minus]};
    }
    return basis;
}

}  // namespace qbem
