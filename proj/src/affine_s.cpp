#include "nlrb/affine_s.hpp"

#include <cmath>

#include "nlrb/fem.hpp"

namespace nlrb {

SGrid chebyshev_nodes(double s_min, double s_max, int M) {
    if (!(0.0 < s_min && s_min < s_max && s_max < 1.0))
        throw std::invalid_argument("chebyshev_nodes: need 0 < s_min < s_max < 1");
    if (M < 1) throw std::invalid_argument("chebyshev_nodes: M must be >= 1");
    SGrid g;
    g.s_min = s_min;
    g.s_max = s_max;
    g.nodes.resize(M + 1);
    for (int m = 0; m <= M; ++m)
        g.nodes[m] = 0.5 * (s_min + s_max) -
                     0.5 * (s_max - s_min) * std::cos(m * M_PI / M);
    g.nodes.front() = s_min;
    g.nodes.back() = s_max;
    return g;
}

std::vector<double> lagrange_coefficients(double s, const SGrid& grid) {
    const int M = grid.M();
    std::vector<double> theta(M + 1);
    for (int m = 0; m <= M; ++m) {
        double prod = 1.0;
        for (int j = 0; j <= M; ++j) {
            if (j == m) continue;
            prod *= (s - grid.nodes[j]) / (grid.nodes[m] - grid.nodes[j]);
        }
        theta[m] = prod;
    }
    return theta;
}

ShatChoice compute_shat(double s_min, double s_max, double eps) {
    if (!(0.0 < s_min && s_min < s_max && s_max < 1.0))
        throw std::invalid_argument("compute_shat: need 0 < s_min < s_max < 1");
    if (eps < 0.0) throw std::invalid_argument("compute_shat: eps must be >= 0");
    const double width = s_max - s_min;
    if (s_min <= 0.5) {
        if (width >= 0.2)
            throw std::invalid_argument(
                "compute_shat: interval too wide (needs s_max - s_min < 1/5 for s_min <= 1/2); "
                "subdivide [s_min, s_max] into admissible subintervals");
        if (eps >= 0.5 - 2.5 * width)
            throw std::invalid_argument("compute_shat: eps too large for this interval");
        return {s_min + 0.25 - 0.5 * eps, s_min, s_min + 0.5 - eps};
    }
    if (width >= (2.0 / 3.0) * (1.0 - s_max))
        throw std::invalid_argument(
            "compute_shat: interval too wide (needs s_max - s_min < (2/3)(1 - s_max) for "
            "s_min > 1/2); subdivide [s_min, s_max] into admissible subintervals");
    if (eps >= 1.0 - s_max - 1.5 * width)
        throw std::invalid_argument("compute_shat: eps too large for this interval");
    return {0.5 * (s_min + 1.0) - 0.5 * eps, s_min, 1.0 - eps};
}

double compute_sigma(double s_min, double s_max, double s1, double s2) {
    const double eps_hat_max = s1 + s2 - 2.0 * s_max;
    if (!(eps_hat_max > 0.0))
        throw std::invalid_argument("compute_sigma: eps_hat(s_max) must be positive");
    return (s_max - s_min) / (2.0 * eps_hat_max);
}

double compute_Cdelta(double delta, double eps_hat_smin) {
    if (!(delta > 0.0) || std::isinf(delta))
        throw std::invalid_argument(
            "compute_Cdelta: needs a finite positive delta (the infinite-range case goes "
            "through the splitting radius)");
    if (delta <= 1.0) return 4.0 / M_E;
    return 4.0 * (1.0 / M_E + std::pow(delta, eps_hat_smin + 1.0));
}

double default_rho(double C_delta, double sigma, int M) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument(
            "default_rho: sigma must lie in (0,1); supply rho explicitly otherwise");
    return 2.0 * C_delta * std::pow(sigma, M + 1);
}

AffineDecompositionS build_affine_s(const Mesh1D& mesh, double delta, const SGrid& grid,
                                    double eps, RhoRule rho_rule,
                                    std::optional<double> rho_override,
                                    const QuadratureConfig& cfg) {
    AffineDecompositionS dec;
    dec.grid = grid;
    dec.infinite_range = std::isinf(delta);
    dec.mass = assemble_mass(mesh);

    double delta_eff = delta;
    if (dec.infinite_range) {
        dec.delta_prime = snap_to_grid(mesh, mesh.diameter());
        delta_eff = dec.delta_prime;
    } else {
        delta_eff = snap_to_grid(mesh, delta);
    }
    dec.delta = delta_eff;

    dec.matrices.reserve(grid.nodes.size());
    for (double sm : grid.nodes) {
        SymMatrix a = assemble_nonlocal(mesh, KernelSpec::fractional(sm, delta_eff), cfg);
        if (dec.infinite_range)
            a.axpy(splitting_constant(delta_eff, 1, sm, mesh.diameter()), dec.mass);
        dec.matrices.push_back(std::move(a));
    }

    RegularizationSpec reg;
    reg.eps = eps;
    reg.shat = compute_shat(grid.s_min, grid.s_max, eps);
    reg.sigma = compute_sigma(grid.s_min, grid.s_max, reg.shat.s1, reg.shat.s2);
    reg.C_delta = compute_Cdelta(delta_eff, reg.eps_hat(grid.s_min));
    if (rho_override) {
        reg.rho = *rho_override;
    } else if (rho_rule == RhoRule::plain) {
        reg.rho = 2.0 * reg.C_delta;
    } else {
        reg.rho = default_rho(reg.C_delta, reg.sigma, grid.M());
    }
    if (!(reg.rho > reg.C_delta * std::pow(reg.sigma, grid.M() + 1)))
        throw std::invalid_argument(
            "build_affine_s: rho violates the coercivity condition rho > C(delta) sigma^{M+1}");
    dec.reg = reg;

    dec.reg_gram = assemble_nonlocal(mesh, KernelSpec::fractional(reg.shat.s_hat, delta_eff), cfg);
    if (dec.infinite_range)
        dec.reg_gram.axpy(splitting_constant(delta_eff, 1, reg.shat.s_hat, mesh.diameter()),
                          dec.mass);
    return dec;
}

SymMatrix regularized_matrix_eval(const AffineDecompositionS& dec, double s,
                                  std::optional<double> rho_override) {
    const double rho = rho_override.value_or(dec.reg.rho);
    const std::vector<double> theta = dec.coefficients(s);

    if (rho == 0.0) {
        for (size_t m = 0; m < dec.grid.nodes.size(); ++m)
            if (s == dec.grid.nodes[m]) return dec.matrices[m];
    }
    SymMatrix out(dec.matrices.front().n());
    for (size_t m = 0; m < theta.size(); ++m)
        if (theta[m] != 0.0) out.axpy(theta[m], dec.matrices[m]);
    if (rho != 0.0) out.axpy(rho, dec.reg_gram);
    return out;
}

Vector rhs_scale(const Vector& f_vec, double s) {
    return (2.0 / scaling_constant(1, s)) * f_vec;
}

double log_sup_bound(double alpha, int k, double delta) {
    if (!(alpha > 0.0) || k < 1 || !(delta > 0.0))
        throw std::invalid_argument("log_sup_bound: need alpha > 0, k >= 1, delta > 0");
    const double first = std::pow(k / (M_E * alpha), k);
    const double logp = delta > 1.0 ? std::log(delta) : 0.0;
    return first + std::pow(delta, alpha) * std::pow(logp, k);
}

double derivative_bound_constant(int k, double eps_hat, double delta) {
    if (!(eps_hat > 0.0) || k < 1 || !(delta > 0.0))
        throw std::invalid_argument("derivative_bound_constant: need eps_hat > 0, k >= 1, delta > 0");
    return std::pow(2.0, k) * log_sup_bound(eps_hat, k, delta);
}

}  // namespace nlrb
