#ifndef NLRB_AFFINE_S_HPP
#define NLRB_AFFINE_S_HPP

#include <optional>
#include <vector>

#include "nlrb/kernel.hpp"
#include "nlrb/linalg.hpp"
#include "nlrb/mesh.hpp"
#include "nlrb/nonlocal.hpp"

namespace nlrb {

/// Chebyshev anchor grid on [s_min, s_max]:
/// s_m = (s_min + s_max)/2 - (s_max - s_min)/2 * cos(m pi / M), endpoints exact.
struct SGrid {
    double s_min = 0.0;
    double s_max = 0.0;
    std::vector<double> nodes;

    int M() const { return static_cast<int>(nodes.size()) - 1; }
};

SGrid chebyshev_nodes(double s_min, double s_max, int M);

/// Lagrange basis values Theta_m(s) = prod_{j != m} (s - s_j)/(s_m - s_j);
/// they sum to one and may be negative.
std::vector<double> lagrange_coefficients(double s, const SGrid& grid);

/// Regularization exponent s_hat = (s1 + s2)/2 for the admissible (s1, s2)
/// choice; the interval must satisfy one of the two admissibility cases
/// (narrow interval left of 1/2, or right of 1/2 with room below 1).
struct ShatChoice {
    double s_hat;
    double s1;
    double s2;
};
ShatChoice compute_shat(double s_min, double s_max, double eps);

/// sigma = (s_max - s_min) / (2 eps_hat(s_max)) with eps_hat(s) = s1 + s2 - 2s.
/// Throws if eps_hat(s_max) <= 0; the caller must check sigma < 1 for the
/// exponential-decay guarantee.
double compute_sigma(double s_min, double s_max, double s1, double s2);

/// C(delta) = 4(1/e + delta^{eps_hat(s_min)+1}) for delta > 1, 4/e otherwise.
double compute_Cdelta(double delta, double eps_hat_smin);

/// Default regularization weight rho = 2 C(delta) sigma^{M+1} (requires
/// sigma < 1; callers must supply rho themselves otherwise).
double default_rho(double C_delta, double sigma, int M);

enum class RhoRule { sigma_scaled, plain };

struct RegularizationSpec {
    ShatChoice shat;
    double sigma = 0.0;
    double C_delta = 0.0;
    double rho = 0.0;
    double eps = 0.0;

    double eps_hat(double s) const { return shat.s1 + shat.s2 - 2.0 * s; }
};

/// Chebyshev anchors A(s_m) at a fixed delta (the infinite-range case is
/// folded in through the splitting identity: the stored anchors then carry
/// the interpolated mass term, keeping the decomposition fully affine),
/// plus the regularization Gram at s_hat.
struct AffineDecompositionS {
    SGrid grid;
    std::vector<SymMatrix> matrices;
    SymMatrix mass;
    SymMatrix reg_gram;  ///< fractional Gram at s_hat, same delta as anchors
    RegularizationSpec reg;
    double delta = 0.0;        ///< anchor interaction radius (finite)
    bool infinite_range = false;
    double delta_prime = 0.0;  ///< splitting radius when infinite_range

    std::vector<double> coefficients(double s) const { return lagrange_coefficients(s, grid); }
};

AffineDecompositionS build_affine_s(const Mesh1D& mesh, double delta, const SGrid& grid,
                                    double eps, RhoRule rho_rule = RhoRule::sigma_scaled,
                                    std::optional<double> rho_override = std::nullopt,
                                    const QuadratureConfig& cfg = {});

/// sum_m Theta_m(s) A(s_m) + rho * G_shat. At a Chebyshev node with rho = 0
/// this returns the anchor bitwise.
SymMatrix regularized_matrix_eval(const AffineDecompositionS& dec, double s,
                                  std::optional<double> rho_override = std::nullopt);

/// f(s) = (2 / c_{1,s}) F.
Vector rhs_scale(const Vector& f_vec, double s);

/// First Appendix bound for sup_{xi in [0, delta]} xi^alpha |log xi|^k:
/// (k/(e alpha))^k + delta^alpha (log delta)_+^k.
double log_sup_bound(double alpha, int k, double delta);

/// C(k, eps_hat) = 2^k ((k/(e eps_hat))^k + delta^{eps_hat} (log delta)_+^k);
/// reported next to measured derivative/interpolation errors.
double derivative_bound_constant(int k, double eps_hat, double delta);

}  // namespace nlrb

#endif
