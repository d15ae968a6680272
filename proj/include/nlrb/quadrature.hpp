#ifndef NLRB_QUADRATURE_HPP
#define NLRB_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace nlrb {

/// Knobs for the numeric assembly paths (custom radial kernels) and the
/// adaptive reference integrator.
struct QuadratureConfig {
    int outer_order = 4;            ///< Gauss points per element
    int singular_split_levels = 8;  ///< geometric refinement levels toward the diagonal
    double oracle_tol = 1e-10;      ///< relative tolerance of the adaptive reference integrator

    void validate() const;
};

/// Gauss-Legendre rule on [-1, 1]; nodes/weights computed by Newton iteration
/// on the Legendre recurrence.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

/// Integrate f over [lo, hi] with a fixed Gauss rule.
double gauss_integrate(const std::function<double(double)>& f, double lo, double hi, int order);

/// Adaptive Gauss-Kronrod (7-15) with recursive bisection.
/// Throws if the requested tolerance is not reached within the depth budget.
double adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol, double abs_floor = 1e-300, int max_depth = 100);

// --- stable power/log primitives for the closed-form pair integrals ---

/// \int_{t0}^{t1} t^mu dt, stable for mu near (and at) -1; t0 may be 0 when
/// mu > -1.
double pow_int(double t0, double t1, double mu);

/// \int_{t0}^{t1} t^j (t^e - 1)/e dt for integer j >= 0 (limit e -> 0 gives
/// \int t^j log t dt). Stable across e ~ 0; t0 may be 0.
double powm1_over_e_int(int j, double e, double t0, double t1);

/// (t^e - 1)/e evaluated stably (log t at e == 0).
double powm1_over_e(double t, double e);

}  // namespace nlrb

#endif
