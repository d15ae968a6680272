#include "nlrb/kernel.hpp"

namespace nlrb {

double kernel_eval(const KernelSpec& spec, double r) {
    if (r < 0.0) throw std::domain_error("kernel_eval: negative radius");
    if (r == 0.0)
        throw std::domain_error("kernel_eval: singular at r = 0; integrate analytically instead");
    if (r >= spec.delta) return 0.0;
    if (spec.family == KernelFamily::fractional_truncated)
        return std::pow(r, -(1.0 + 2.0 * spec.s));
    return spec.radial_profile(r);
}

double scaling_constant(int n, double s) {
    if (n < 1) throw std::invalid_argument("scaling_constant: n must be >= 1");
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("scaling_constant: s must lie in the open interval (0,1)");
    const double log_c = 2.0 * s * std::log(2.0) + std::log(s) + std::lgamma(s + 0.5 * n) -
                         0.5 * n * std::log(M_PI) - std::lgamma(1.0 - s);
    return std::exp(log_c);
}

double splitting_constant(double delta_p, int n, double s, double domain_diameter) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("splitting_constant: s outside (0,1)");
    if (delta_p < domain_diameter)
        throw std::invalid_argument(
            "splitting_constant: delta' must be >= diam(Omega); the splitting identity is invalid "
            "otherwise");
    return 2.0 * std::pow(M_PI, 0.5 * n) /
           (std::tgamma(0.5 * n) * std::pow(delta_p, 2.0 * s) * s);
}

}  // namespace nlrb
