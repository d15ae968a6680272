#ifndef NLRB_KERNEL_HPP
#define NLRB_KERNEL_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace nlrb {

enum class KernelFamily { fractional_truncated, custom_radial };

/// Radial interaction kernel gamma(x, x'; mu) = gamma_hat(|x - x'|), truncated
/// at the interaction radius delta. The shipped instance is the truncated
/// fractional profile r^{-(1+2s)} in one dimension; a custom radial profile
/// may be supplied instead (it must be non-negative and bounded below near 0).
struct KernelSpec {
    KernelFamily family = KernelFamily::fractional_truncated;
    double s = 0.5;                                      ///< fractional power, in (0,1)
    double delta = std::numeric_limits<double>::infinity();  ///< interaction radius, (0, inf]
    std::function<double(double)> radial_profile;        ///< custom family only

    static KernelSpec fractional(double s, double delta) {
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("KernelSpec: s must lie in (0,1)");
        if (!(delta > 0.0)) throw std::invalid_argument("KernelSpec: delta must be positive");
        KernelSpec k;
        k.family = KernelFamily::fractional_truncated;
        k.s = s;
        k.delta = delta;
        return k;
    }

    static KernelSpec custom(std::function<double(double)> profile, double delta) {
        if (!profile) throw std::invalid_argument("KernelSpec: missing radial profile");
        if (!(delta > 0.0 && std::isfinite(delta)))
            throw std::invalid_argument("KernelSpec: custom kernels need a finite delta");
        KernelSpec k;
        k.family = KernelFamily::custom_radial;
        k.delta = delta;
        k.radial_profile = std::move(profile);
        return k;
    }

    bool infinite_range() const { return std::isinf(delta); }
};

/// gamma_hat(r): r^{-(1+2s)} for 0 < r < delta, 0 for r >= delta.
/// Pointwise evaluation at r = 0 is an error; integration near 0 is handled
/// analytically by the assembly routines.
double kernel_eval(const KernelSpec& spec, double r);

/// c_{n,s} = 2^{2s} s Gamma(s + n/2) / (pi^{n/2} Gamma(1 - s)), via lgamma.
double scaling_constant(int n, double s);

/// C(delta', n, s) = 2 pi^{n/2} / (Gamma(n/2) (delta')^{2s} s), the mass-term
/// coefficient that turns a truncated assembly into the infinite-range one.
/// Only valid for delta' >= diam(Omega), which the caller supplies.
double splitting_constant(double delta_p, int n, double s, double domain_diameter);

}  // namespace nlrb

#endif
