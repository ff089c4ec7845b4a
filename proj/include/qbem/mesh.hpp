// mesh.hpp — closed triangle meshes, shape generators and RWG basis
#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbem/types.hpp"

namespace qbem {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;  // counter-clockwise seen from outside
    std::vector<int> body;                      // body id per triangle

    std::size_t n_vertices() const { return vertices.size(); }
    std::size_t n_triangles() const { return triangles.size(); }
    int n_bodies() const;

    Vec3 corner(int t, int k) const { return vertices[triangles[t][k]]; }
    double area(int t) const;
    Vec3 normal(int t) const;  // unit outward normal
    Vec3 centroid(int t) const;
    double diameter(int t) const;  // longest edge

    double total_area() const;
    double volume() const;             // all bodies
    double body_volume(int b) const;
};

struct MeshReport {
    bool watertight = true;
    std::size_t interior_edges = 0;  // edges shared by exactly two oppositely oriented triangles
    std::vector<std::string> problems;
};

// Topology and orientation checks; never throws.
MeshReport inspect(const TriangleMesh& mesh);
// Throws MeshError naming the first offending edge or triangle.
void validate(const TriangleMesh& mesh);

TriangleMesh load_off(std::istream& in);
TriangleMesh load_off_file(const std::string& path);
// load_off_file followed by validate.
TriangleMesh load_mesh(const std::string& path);
void write_off(std::ostream& out, const TriangleMesh& mesh);

struct ShapeSpec {
    std::string kind;            // sphere | box | cylinder
    std::vector<double> dims;    // sphere: {r}; box: {lx, ly, lz}; cylinder: {r, h}
    Vec3 center = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();   // cylinder axis
    int refine = 0;
    int divisions = 0;           // sphere: geodesic frequency override (0 -> 2^refine)
};

TriangleMesh generate_shape(const ShapeSpec& spec);

// Appends b to a with body ids shifted past a's bodies.
void append_mesh(TriangleMesh& a, const TriangleMesh& b);
// Assigns body ids by edge-connected components.
void label_components(TriangleMesh& mesh);

// Signed solid-angle sum of a closed surface seen from p, divided by 4*pi.
double winding_number(const TriangleMesh& mesh, const Vec3& p);
bool is_inside(const TriangleMesh& mesh, const Vec3& p);

// Half of an RWG function living on one triangle: f(r) = coef * (r - vertex),
// coef = sign * length / (2 * area); divergence = 2 * coef.
struct HalfRwg {
    int fn = -1;
    double coef = 0.0;
    Vec3 vertex;
};

struct RwgFunction {
    int a = -1, b = -1;       // shared edge vertices, a < b
    int t_plus = -1, t_minus = -1;
    int v_plus = -1, v_minus = -1;  // free vertices
    double length = 0.0;
    double area_plus = 0.0, area_minus = 0.0;
    Vec3 centroid_plus, centroid_minus;
    int body = 0;

    Vec3 dipole_arm() const { return centroid_plus - centroid_minus; }
    Vec3 center() const { return 0.5 * (centroid_plus + centroid_minus); }
};

struct RwgBasis {
    std::vector<RwgFunction> fns;
    std::vector<std::array<HalfRwg, 3>> halves;  // per triangle, one per edge

    std::size_t size() const { return fns.size(); }
    // Value of function n at point r on triangle t (zero off its support).
    Vec3 eval(const TriangleMesh& mesh, int n, int t, const Vec3& r) const;
};

RwgBasis build_rwg(const TriangleMesh& mesh);

}  // namespace qbem
