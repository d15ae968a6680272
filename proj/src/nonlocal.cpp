#include "nlrb/nonlocal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nlrb/fem.hpp"

namespace nlrb {

namespace {

// --- P1 hat bookkeeping (node indices are global: 0 .. n_el) ---------------

// Affine extension of hat k restricted to element e, evaluated at mesh node
// `node`. Integer arithmetic, so shared-node cancellations are exact.
inline double hat_val_at_node(int k, int e, int node) {
    if (e == k - 1) return static_cast<double>(node - (k - 1));
    if (e == k) return static_cast<double>((k + 1) - node);
    return 0.0;
}

inline double hat_slope(int k, int e, double h) {
    if (e == k - 1) return 1.0 / h;
    if (e == k) return -1.0 / h;
    return 0.0;
}

// Affine extension of hat k restricted to element e, at an arbitrary point.
inline double hat_affine_eval(const Mesh1D& mesh, int k, int e, double x) {
    return hat_val_at_node(k, e, e) + hat_slope(k, e, mesh.h) * (x - mesh.node(e));
}

// Coefficients (in t = c - x) of the three r-power terms of the pair
// integrand: (B_k)(B_l) = Q0 + Q1 r + Q2 r^2 with B = A(x) + kappa r.
struct PairCoeffs {
    std::array<double, 3> q0;  // Q0(t) = q0[0] + q0[1] t + q0[2] t^2
    std::array<double, 2> q1;
    double q2;
};

PairCoeffs pair_coeffs_at(const Mesh1D& mesh, int k, int l, int ie, int io, int ref_node) {
    const double h = mesh.h;
    const double ak = hat_val_at_node(k, ie, ref_node) - hat_val_at_node(k, io, ref_node);
    const double al = hat_val_at_node(l, ie, ref_node) - hat_val_at_node(l, io, ref_node);
    const double bk = hat_slope(k, ie, h) - hat_slope(k, io, h);
    const double bl = hat_slope(l, ie, h) - hat_slope(l, io, h);
    const double kk = -hat_slope(k, io, h);
    const double kl = -hat_slope(l, io, h);
    PairCoeffs c;
    c.q0 = {ak * al, -(ak * bl + al * bk), bk * bl};
    c.q1 = {ak * kl + al * kk, -(bk * kl + bl * kk)};
    c.q2 = kk * kl;
    return c;
}

// --- closed-form path (fractional family) ----------------------------------

struct FractionalOps {
    const Mesh1D& mesh;
    double s;
    double delta;
    int m;  // delta / h

    // sum_j coeff_j * \int_{t0}^{t1} t^j (t^e - 1)/e dt, skipping exact-zero
    // coefficients (they would otherwise multiply divergent primitives at
    // t0 = 0).
    static double outer_sum(const double* coeff, int count, double e, double t0, double t1) {
        double acc = 0.0;
        for (int j = 0; j < count; ++j)
            if (coeff[j] != 0.0) acc += coeff[j] * powm1_over_e_int(j, e, t0, t1);
        return acc;
    }

    static double plain_sum(const double* coeff, int count, double t0, double t1) {
        double acc = 0.0;
        for (int j = 0; j < count; ++j)
            if (coeff[j] != 0.0) acc += coeff[j] * pow_int(t0, t1, static_cast<double>(j));
        return acc;
    }

    double outer_all(const PairCoeffs& c, int ref_node, int ie) const {
        const double h = mesh.h;
        const double t0 = (ref_node - ie - 1) * h;
        const double t1 = (ref_node - ie) * h;
        double acc = outer_sum(c.q0.data(), 3, 0.0 - 2.0 * s, t0, t1);
        acc += outer_sum(c.q1.data(), 2, 1.0 - 2.0 * s, t0, t1);
        const double q2c[1] = {c.q2};
        acc += outer_sum(q2c, 1, 2.0 - 2.0 * s, t0, t1);
        return acc;
    }

    double pair_integral(int ie, int io, int k, int l) const {
        const double h = mesh.h;
        const int d = io - ie;
        if (d == 0) {
            const double bk = hat_slope(k, ie, h), bl = hat_slope(l, ie, h);
            if (bk == 0.0 || bl == 0.0) return 0.0;
            return 2.0 * bk * bl * std::pow(h, 3.0 - 2.0 * s) /
                   ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
        }
        if (d > m) return 0.0;
        const PairCoeffs c0 = pair_coeffs_at(mesh, k, l, ie, io, io);
        if (d <= m - 1) {
            const PairCoeffs c1 = pair_coeffs_at(mesh, k, l, ie, io, io + 1);
            return outer_all(c1, io + 1, ie) - outer_all(c0, io, ie);
        }
        // d == m: upper limit is the constant delta across the element
        const double t0 = (io - ie - 1) * h;
        const double t1 = (io - ie) * h;
        double acc = powm1_over_e(delta, 0.0 - 2.0 * s) * plain_sum(c0.q0.data(), 3, t0, t1);
        acc += powm1_over_e(delta, 1.0 - 2.0 * s) * plain_sum(c0.q1.data(), 2, t0, t1);
        const double q2c[1] = {c0.q2};
        acc += powm1_over_e(delta, 2.0 - 2.0 * s) * plain_sum(q2c, 1, t0, t1);
        return acc - outer_all(c0, io, ie);
    }

    // 2 \int_e phi_k phi_l(x) * (kernel mass of the strip outside the block
    // [node_lo, node_hi]) dx; covers far interior pairs and the exterior
    // collar in one closed form (the swapped-roles half is the factor 2).
    double mass_outside(int e, int k, int l, int node_lo, int node_hi) const {
        const double h = mesh.h;
        const double es = -2.0 * s;
        const double pihat_delta = powm1_over_e(delta, es);
        double acc = 0.0;

        // left side: t = x - x_{node_lo} on [u0, u0 + h]
        {
            const int off = e - node_lo;
            if (off <= m - 1) {
                const double pk0 = hat_val_at_node(k, e, node_lo);
                const double pl0 = hat_val_at_node(l, e, node_lo);
                const double bk = hat_slope(k, e, h), bl = hat_slope(l, e, h);
                const double c[3] = {pk0 * pl0, pk0 * bl + pl0 * bk, bk * bl};
                const double u0 = off * h, u1 = (off + 1) * h;
                for (int j = 0; j < 3; ++j) {
                    if (c[j] == 0.0) continue;
                    acc += c[j] * (pihat_delta * pow_int(u0, u1, static_cast<double>(j)) -
                                   powm1_over_e_int(j, es, u0, u1));
                }
            }
        }
        // right side: w = x_{node_hi} - x on [w0, w0 + h]
        {
            const int off = node_hi - e - 1;
            if (off <= m - 1) {
                const double pk0 = hat_val_at_node(k, e, node_hi);
                const double pl0 = hat_val_at_node(l, e, node_hi);
                const double bk = hat_slope(k, e, h), bl = hat_slope(l, e, h);
                const double c[3] = {pk0 * pl0, -(pk0 * bl + pl0 * bk), bk * bl};
                const double w0 = off * h, w1 = (off + 1) * h;
                for (int j = 0; j < 3; ++j) {
                    if (c[j] == 0.0) continue;
                    acc += c[j] * (pihat_delta * pow_int(w0, w1, static_cast<double>(j)) -
                                   powm1_over_e_int(j, es, w0, w1));
                }
            }
        }
        return 2.0 * acc;
    }
};

// --- numeric path (custom radial profiles) ---------------------------------

struct CustomOps {
    const Mesh1D& mesh;
    const KernelSpec& spec;
    const QuadratureConfig& cfg;
    int m;

    double gamma(double r) const { return r >= spec.delta ? 0.0 : spec.radial_profile(r); }

    // \int_{r0}^{r1} r^q gamma(r) dr with a geometric split toward r = 0.
    double inner_rq(int q, double r0, double r1) const {
        if (r1 <= r0) return 0.0;
        auto f = [&](double r) { return std::pow(r, q) * gamma(r); };
        if (r0 > 0.25 * r1) return gauss_integrate(f, r0, r1, cfg.outer_order);
        double acc = 0.0;
        double hi = r1;
        for (int lev = 0; lev < cfg.singular_split_levels && hi > 2.0 * r0; ++lev) {
            double lo = std::max(r0, 0.5 * hi);
            acc += gauss_integrate(f, lo, hi, cfg.outer_order);
            hi = lo;
        }
        if (hi > r0) acc += gauss_integrate(f, r0, hi, cfg.outer_order);
        return acc;
    }

    // kernel mass of (t, delta)
    double tail_mass(double t) const {
        if (t >= spec.delta) return 0.0;
        return inner_rq(0, t, spec.delta);
    }

    double outer_with_splits(const std::function<double(double)>& f, double lo, double hi,
                             bool singular_at_lo, bool singular_at_hi) const {
        if (!singular_at_lo && !singular_at_hi)
            return gauss_integrate(f, lo, hi, cfg.outer_order);
        double acc = 0.0;
        // geometric refinement toward the singular end
        double a = lo, b = hi;
        if (singular_at_lo) {
            double right = hi;
            for (int lev = 0; lev < cfg.singular_split_levels; ++lev) {
                double leftp = lo + (right - lo) * 0.5;
                acc += gauss_integrate(f, leftp, right, cfg.outer_order);
                right = leftp;
            }
            acc += gauss_integrate(f, lo, right, cfg.outer_order);
            return acc;
        }
        // singular at hi
        double left = a;
        for (int lev = 0; lev < cfg.singular_split_levels; ++lev) {
            double rightp = b - (b - left) * 0.5;
            acc += gauss_integrate(f, left, rightp, cfg.outer_order);
            left = rightp;
        }
        acc += gauss_integrate(f, left, b, cfg.outer_order);
        return acc;
    }

    double pair_integral(int ie, int io, int k, int l) const {
        const double h = mesh.h;
        const int d = io - ie;
        if (d == 0) {
            const double bk = hat_slope(k, ie, h), bl = hat_slope(l, ie, h);
            if (bk == 0.0 || bl == 0.0) return 0.0;
            const double hi = std::min(h, spec.delta);
            auto f = [&](double r) { return (h - r) * r * r * gamma(r); };
            double acc = 0.0;
            double top = hi;
            for (int lev = 0; lev < cfg.singular_split_levels; ++lev) {
                const double lo2 = 0.5 * top;
                acc += gauss_integrate(f, lo2, top, cfg.outer_order);
                top = lo2;
            }
            acc += gauss_integrate(f, 0.0, top, cfg.outer_order);
            return 2.0 * bk * bl * acc;
        }
        if (d > m) return 0.0;
        const double xo = mesh.node(io);
        auto w = [&](double x) {
            const double r0 = xo - x;
            const double r1 = std::min(xo + h - x, spec.delta);
            if (r1 <= r0) return 0.0;
            const double ak = hat_affine_eval(mesh, k, ie, x) - hat_affine_eval(mesh, k, io, x);
            const double al = hat_affine_eval(mesh, l, ie, x) - hat_affine_eval(mesh, l, io, x);
            const double kk = -hat_slope(k, io, h), kl = -hat_slope(l, io, h);
            return (ak * al) * inner_rq(0, r0, r1) + (ak * kl + al * kk) * inner_rq(1, r0, r1) +
                   (kk * kl) * inner_rq(2, r0, r1);
        };
        return outer_with_splits(w, mesh.node(ie), mesh.node(ie + 1), false,
                                 /*singular at shared node*/ d == 1);
    }

    double mass_outside(int e, int k, int l, int node_lo, int node_hi) const {
        const double h = mesh.h;
        const double xlo = mesh.node(node_lo), xhi = mesh.node(node_hi);
        auto f = [&](double x) {
            const double pk = hat_affine_eval(mesh, k, e, x);
            const double pl = hat_affine_eval(mesh, l, e, x);
            return pk * pl * (tail_mass(x - xlo) + tail_mass(xhi - x));
        };
        const bool sing_lo = (e == node_lo);
        const bool sing_hi = (e == node_hi - 1);
        return 2.0 * outer_with_splits(f, mesh.node(e), mesh.node(e + 1), sing_lo, sing_hi);
    }
};

// --- entry orchestration ----------------------------------------------------

template <typename Ops>
double entry_value(const Ops& ops, const Mesh1D& mesh, int m, int k, int l) {
    if (l - k > m + 1) return 0.0;

    // support elements of both hats; all indices are valid for interior nodes
    int cand[4] = {k - 1, k, l - 1, l};
    std::sort(cand, cand + 4);
    int ns = static_cast<int>(std::unique(cand, cand + 4) - cand);

    auto touches_k = [&](int e, int ep) {
        return e == k - 1 || e == k || ep == k - 1 || ep == k;
    };
    auto touches_l = [&](int e, int ep) {
        return e == l - 1 || e == l || ep == l - 1 || ep == l;
    };

    double val = 0.0;
    for (int a = 0; a < ns; ++a) {
        for (int b = a; b < ns; ++b) {
            const int e = cand[a], ep = cand[b];
            if (!touches_k(e, ep) || !touches_l(e, ep)) continue;
            const double w = (e == ep) ? 1.0 : 2.0;
            val += w * ops.pair_integral(e, ep, k, l);
        }
    }
    if (l - k <= 1) {
        // strip mass outside the contiguous support block, including the
        // exterior of the domain (collar)
        const int node_lo = k - 1, node_hi = l + 1;
        for (int e = k - 1; e <= l; ++e) {
            if (!(e == k - 1 || e == k) || !(e == l - 1 || e == l)) continue;  // common support
            val += ops.mass_outside(e, k, l, node_lo, node_hi);
        }
    }
    return val;
}

int snapped_multiple(const Mesh1D& mesh, double delta) {
    const double ratio = delta / mesh.h;
    const long long m = std::llround(ratio);
    if (m < 1)
        throw std::invalid_argument("assemble_nonlocal: delta below h cannot be snapped");
    if (std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(
            "assemble_nonlocal: delta is not a multiple of h; snap it to the mesh first");
    return static_cast<int>(m);
}

template <typename Ops>
SymMatrix assemble_rows(const Ops& ops, const Mesh1D& mesh, int m, bool parallel) {
    const int n = mesh.n_interior();
    SymMatrix a(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int k = 1; k <= n; ++k) {
        const int lmax = std::min(n, k + m + 1);
        for (int l = k; l <= lmax; ++l) a.set(k - 1, l - 1, entry_value(ops, mesh, m, k, l));
    }
    (void)parallel;
    return a;
}

SymMatrix assemble_impl(const Mesh1D& mesh, const KernelSpec& spec, const QuadratureConfig& cfg,
                        bool parallel) {
    if (spec.infinite_range())
        throw std::invalid_argument(
            "assemble_nonlocal: infinite delta is defined through the splitting identity; use "
            "assemble_fractional_laplace");
    if (mesh.n_el < 2) throw std::invalid_argument("assemble_nonlocal: invalid mesh");
    const int m = snapped_multiple(mesh, spec.delta);
    if (spec.family == KernelFamily::fractional_truncated) {
        FractionalOps ops{mesh, spec.s, spec.delta, m};
        return assemble_rows(ops, mesh, m, parallel);
    }
    cfg.validate();
    CustomOps ops{mesh, spec, cfg, m};
    return assemble_rows(ops, mesh, m, parallel);
}

}  // namespace

SymMatrix assemble_nonlocal(const Mesh1D& mesh, const KernelSpec& spec,
                            const QuadratureConfig& cfg) {
    return assemble_impl(mesh, spec, cfg, true);
}

SymMatrix assemble_nonlocal_serial(const Mesh1D& mesh, const KernelSpec& spec,
                                   const QuadratureConfig& cfg) {
    return assemble_impl(mesh, spec, cfg, false);
}

SymMatrix assemble_fractional_laplace(const Mesh1D& mesh, double s, double delta_p,
                                      const QuadratureConfig& cfg) {
    if (delta_p < mesh.diameter())
        throw std::invalid_argument(
            "assemble_fractional_laplace: delta' must be >= diam(Omega)");
    const double dp = snap_to_grid(mesh, delta_p);
    SymMatrix a = assemble_nonlocal(mesh, KernelSpec::fractional(s, dp), cfg);
    const double c = splitting_constant(dp, 1, s, mesh.diameter());
    SymMatrix mass = assemble_mass(mesh);
    a.axpy(c, mass);
    return a;
}

double oracle_entry(const Mesh1D& mesh, const KernelSpec& spec, int i, int j,
                    const QuadratureConfig& cfg) {
    cfg.validate();
    const int k = i + 1, l = j + 1;  // global node indices
    const int n = mesh.n_interior();
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::invalid_argument("oracle_entry: index out of range");
    const double h = mesh.h;
    const double delta = spec.delta;
    if (std::abs(k - l) * h > delta + 2.0 * h) return 0.0;

    auto hat = [&](int node, double x) {
        const double t = std::abs(x - mesh.node(node));
        return t >= h ? 0.0 : 1.0 - t / h;
    };
    auto integrand = [&](double x, double xp) {
        if (x == xp) return 0.0;  // measure-zero point of the a.e.-defined integrand
        return (hat(k, x) - hat(k, xp)) * (hat(l, x) - hat(l, xp)) *
               kernel_eval(spec, std::abs(x - xp));
    };

    const double tol = cfg.oracle_tol;
    double total = 0.0;

    // interior element-pair boxes (ordered pairs)
    for (int e = 0; e < mesh.n_el; ++e) {
        const double x0 = mesh.node(e), x1 = mesh.node(e + 1);
        const bool e_touches = (e == k - 1 || e == k || e == l - 1 || e == l);
        for (int ep = 0; ep < mesh.n_el; ++ep) {
            if (std::max(0, std::abs(ep - e) - 1) * h >= delta) continue;
            const bool ep_touches = (ep == k - 1 || ep == k || ep == l - 1 || ep == l);
            if (!e_touches && !ep_touches) continue;
            const double y0 = mesh.node(ep), y1 = mesh.node(ep + 1);
            auto outer = [&](double x) {
                const double lo = std::max(y0, x - delta);
                const double hi = std::min(y1, x + delta);
                if (hi <= lo) return 0.0;
                auto inner = [&](double xp) { return integrand(x, xp); };
                double v = 0.0;
                if (lo < x && x < hi) {
                    v = adaptive_integrate(inner, lo, x, 0.1 * tol) +
                        adaptive_integrate(inner, x, hi, 0.1 * tol);
                } else {
                    v = adaptive_integrate(inner, lo, hi, 0.1 * tol);
                }
                return v;
            };
            total += adaptive_integrate(outer, x0, x1, tol);
        }
    }

    // exterior collar: 2 \int phi_k phi_l(x) \int_{outside, |x-x'|<delta} gamma
    auto collar = [&](double x) {
        const double pk = hat(k, x), pl = hat(l, x);
        if (pk == 0.0 || pl == 0.0) return 0.0;
        double mass = 0.0;
        auto g = [&](double r) { return kernel_eval(spec, r); };
        if (x - mesh.a < delta) mass += adaptive_integrate(g, x - mesh.a, delta, 0.1 * tol);
        if (mesh.b - x < delta) mass += adaptive_integrate(g, mesh.b - x, delta, 0.1 * tol);
        return 2.0 * pk * pl * mass;
    };
    for (int e = std::max(0, std::min(k, l) - 1); e <= std::min(mesh.n_el - 1, std::max(k, l));
         ++e) {
        if (!(e == k - 1 || e == k) || !(e == l - 1 || e == l)) continue;
        total += adaptive_integrate(collar, mesh.node(e), mesh.node(e + 1), tol);
    }
    return total;
}

}  // namespace nlrb
