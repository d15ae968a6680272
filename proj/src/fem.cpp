#include "nlrb/fem.hpp"

#include <algorithm>
#include <cmath>

#include "nlrb/quadrature.hpp"

namespace nlrb {

SymMatrix assemble_mass(const Mesh1D& mesh) {
    const int n = mesh.n_interior();
    const double h = mesh.h;
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        m.set(i, i, 2.0 * h / 3.0);
        if (i + 1 < n) m.set(i, i + 1, h / 6.0);
    }
    return m;
}

SymMatrix assemble_h1_gram(const Mesh1D& mesh) {
    const int n = mesh.n_interior();
    const double h = mesh.h;
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        m.set(i, i, 2.0 / h);
        if (i + 1 < n) m.set(i, i + 1, -1.0 / h);
    }
    return m;
}

Vector assemble_load(const Mesh1D& mesh, const std::function<double(double)>& f,
                     const std::vector<double>& jumps, int gauss_order) {
    if (gauss_order < 3) throw std::invalid_argument("assemble_load: Gauss order must be >= 3");
    const int n = mesh.n_interior();
    Vector rhs = Vector::Zero(n);
    const GaussRule& rule = gauss_legendre(gauss_order);

    for (int e = 0; e < mesh.n_el; ++e) {
        const double x0 = mesh.node(e);
        const double x1 = mesh.node(e + 1);
        // split the element at supplied jump points
        std::vector<double> cuts{x0, x1};
        for (double j : jumps)
            if (j > x0 && j < x1) cuts.push_back(j);
        std::sort(cuts.begin(), cuts.end());

        double left_acc = 0.0;   // \int f * N_left over the element
        double right_acc = 0.0;  // \int f * N_right
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double lo = cuts[c], hi = cuts[c + 1];
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (size_t q = 0; q < rule.nodes.size(); ++q) {
                const double x = mid + half * rule.nodes[q];
                const double fx = f(x);
                if (!std::isfinite(fx))
                    throw std::runtime_error("assemble_load: non-finite load value");
                const double w = rule.weights[q] * half;
                left_acc += w * fx * (x1 - x) / mesh.h;
                right_acc += w * fx * (x - x0) / mesh.h;
            }
        }
        if (e >= 1) rhs[e - 1] += left_acc;       // interior node e
        if (e + 1 <= n) rhs[e] += right_acc;      // interior node e+1
    }
    return rhs;
}

}  // namespace nlrb
