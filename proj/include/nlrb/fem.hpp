#ifndef NLRB_FEM_HPP
#define NLRB_FEM_HPP

#include <functional>
#include <vector>

#include "nlrb/linalg.hpp"
#include "nlrb/mesh.hpp"

namespace nlrb {

/// P1 mass matrix on interior DoFs (tridiagonal: 2h/3 diagonal, h/6 off).
SymMatrix assemble_mass(const Mesh1D& mesh);

/// Stiffness of \int u' v' on interior DoFs (2/h diagonal, -1/h off). Used
/// only for estimator norms.
SymMatrix assemble_h1_gram(const Mesh1D& mesh);

/// Load vector (\int F phi_i). Fixed Gauss quadrature per element; elements
/// are split at the supplied jump locations so characteristic-function data
/// integrates exactly.
Vector assemble_load(const Mesh1D& mesh, const std::function<double(double)>& f,
                     const std::vector<double>& jumps = {}, int gauss_order = 5);

}  // namespace nlrb

#endif
