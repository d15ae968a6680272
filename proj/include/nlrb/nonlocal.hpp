#ifndef NLRB_NONLOCAL_HPP
#define NLRB_NONLOCAL_HPP

#include "nlrb/kernel.hpp"
#include "nlrb/linalg.hpp"
#include "nlrb/mesh.hpp"
#include "nlrb/quadrature.hpp"

namespace nlrb {

/// Stiffness of the nonlocal form
///   A_ij = \int\int_{|x-x'|<delta} (phi_i(x)-phi_i(x'))(phi_j(x)-phi_j(x'))
///          gamma_hat(|x-x'|) dx' dx
/// on interior DoFs, with hats extended by zero outside the domain.
///
/// delta must be finite and a multiple of h (snap upstream); this keeps the
/// truncation circle aligned with element boundaries, so every element-pair
/// integrand is smooth up to the diagonal singularity. For the fractional
/// family all pair integrals reduce to power/log primitives and are evaluated
/// in closed form; custom radial profiles go through Gauss quadrature with
/// geometric splits toward the singular point (see QuadratureConfig).
///
/// Rows are computed independently, so the OpenMP path is bit-identical to
/// the serial reference.
SymMatrix assemble_nonlocal(const Mesh1D& mesh, const KernelSpec& spec,
                            const QuadratureConfig& cfg = {});

/// Serial reference implementation (same entry evaluation, plain row loop).
SymMatrix assemble_nonlocal_serial(const Mesh1D& mesh, const KernelSpec& spec,
                                   const QuadratureConfig& cfg = {});

/// A(infinity, s) = A(delta', s) + C(delta', 1, s) * M for delta' >= diam(Omega).
/// The result is independent of delta' up to round-off; delta' is snapped to
/// the mesh like any interaction radius.
SymMatrix assemble_fractional_laplace(const Mesh1D& mesh, double s, double delta_p,
                                      const QuadratureConfig& cfg = {});

/// Independent validation integrator: one stiffness entry (DoF indices) by
/// adaptive nested quadrature of the double integral, to cfg.oracle_tol.
/// Deliberately shares no code with the closed-form assembly path.
double oracle_entry(const Mesh1D& mesh, const KernelSpec& spec, int i, int j,
                    const QuadratureConfig& cfg = {});

}  // namespace nlrb

#endif
