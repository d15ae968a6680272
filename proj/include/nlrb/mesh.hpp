#ifndef NLRB_MESH_HPP
#define NLRB_MESH_HPP

#include <stdexcept>
#include <vector>

namespace nlrb {

/// Uniform 1D mesh on (a, b) with n_el elements. Basis functions are the P1
/// hats at interior nodes, extended by zero outside (a, b); the endpoints
/// carry no degrees of freedom (homogeneous volume constraint).
struct Mesh1D {
    double a = 0.0;
    double b = 1.0;
    int n_el = 0;
    double h = 0.0;

    double node(int i) const { return a + i * h; }
    int n_interior() const { return n_el - 1; }
    double diameter() const { return b - a; }
};

/// Interior (constrained) degrees of freedom: global nodes 1 .. n_el-1.
struct DofMap {
    std::vector<int> interior_nodes;

    static DofMap from_mesh(const Mesh1D& mesh) {
        DofMap d;
        d.interior_nodes.reserve(mesh.n_el - 1);
        for (int i = 1; i < mesh.n_el; ++i) d.interior_nodes.push_back(i);
        return d;
    }
};

inline Mesh1D build_mesh(double a, double b, int n_el) {
    if (n_el < 2) throw std::invalid_argument("build_mesh: n_el must be >= 2");
    if (!(a < b)) throw std::invalid_argument("build_mesh: requires a < b");
    Mesh1D m;
    m.a = a;
    m.b = b;
    m.n_el = n_el;
    m.h = (b - a) / n_el;
    return m;
}

/// Nearest multiple of h measured from the mesh origin; used to align
/// interaction radii with element boundaries.
inline double snap_to_grid(const Mesh1D& mesh, double delta) {
    long long m = static_cast<long long>(delta / mesh.h + 0.5);
    return m * mesh.h;
}

}  // namespace nlrb

#endif
