#include "nlrb/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nlrb {

void QuadratureConfig::validate() const {
    if (outer_order < 2) throw std::invalid_argument("QuadratureConfig: outer_order must be >= 2");
    if (singular_split_levels < 1)
        throw std::invalid_argument("QuadratureConfig: singular_split_levels must be >= 1");
    if (!(oracle_tol > 0.0)) throw std::invalid_argument("QuadratureConfig: oracle_tol must be > 0");
}

namespace {

GaussRule make_gauss_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Legendre P_n and derivative via the three-term recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// Gauss-Kronrod 7-15 nodes/weights (positive half).
constexpr double kGK15X[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kGK15WK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGK15WG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GKResult {
    double kronrod;
    double err;
    double abs_mass;  // integral of |f|, the floor for attainable accuracy
};

GKResult gk15(const std::function<double(double)>& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(c);
    double ik = kGK15WK[7] * fc;
    double ig = kGK15WG[3] * fc;
    double ia = kGK15WK[7] * std::abs(fc);
    for (int i = 0; i < 7; ++i) {
        double fa = f(c - half * kGK15X[i]);
        double fb = f(c + half * kGK15X[i]);
        ik += kGK15WK[i] * (fa + fb);
        ia += kGK15WK[i] * (std::abs(fa) + std::abs(fb));
        if (i % 2 == 1) ig += kGK15WG[i / 2] * (fa + fb);
    }
    ik *= half;
    ig *= half;
    ia *= half;
    return {ik, std::abs(ik - ig), ia};
}

double adapt_rec(const std::function<double(double)>& f, double lo, double hi, double tol,
                 int depth, int max_depth, double& unresolved) {
    GKResult r = gk15(f, lo, hi);
    // the abs-mass floor stops refinement once round-off dominates
    const bool converged = r.err <= tol || r.err <= 1e-14 * r.abs_mass;
    if (converged || depth >= max_depth) {
        if (!converged) unresolved += r.err;
        return r.kronrod;
    }
    double mid = 0.5 * (lo + hi);
    double child_tol = 0.65 * tol;
    return adapt_rec(f, lo, mid, child_tol, depth + 1, max_depth, unresolved) +
           adapt_rec(f, mid, hi, child_tol, depth + 1, max_depth, unresolved);
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 1 || order > 64) throw std::invalid_argument("gauss_legendre: order out of range");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gauss_rule(order)).first;
    return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double lo, double hi, int order) {
    const GaussRule& rule = gauss_legendre(order);
    const double c = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(c + half * rule.nodes[i]);
    return sum * half;
}

double adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol, double abs_floor, int max_depth) {
    if (lo == hi) return 0.0;
    GKResult first = gk15(f, lo, hi);
    double scale = std::max(std::abs(first.kronrod), 1e-3 * first.abs_mass) + abs_floor;
    double tol = rel_tol * scale;
    double unresolved = 0.0;
    double result = adapt_rec(f, lo, hi, tol, 0, max_depth, unresolved);
    if (unresolved > 5.0 * rel_tol * (std::abs(result) + abs_floor))
        throw std::runtime_error("adaptive_integrate: tolerance not reached within budget");
    return result;
}

double pow_int(double t0, double t1, double mu) {
    if (t0 == t1) return 0.0;
    const double p = mu + 1.0;
    if (t0 == 0.0) {
        if (!(p > 0.0)) throw std::domain_error("pow_int: divergent at lower limit 0");
        return std::pow(t1, p) / p;
    }
    const double L = std::log(t1 / t0);
    if (p == 0.0) return L;
    return std::pow(t0, p) * std::expm1(p * L) / p;
}

double powm1_over_e(double t, double e) {
    if (std::abs(e) < 1e-12) return std::log(t);
    return std::expm1(e * std::log(t)) / e;
}

namespace {

// antiderivatives of t^j log^k t, evaluated at t (0 at t = 0, valid for j >= 0)
double prim_logk(double t, int j, int k) {
    if (t == 0.0) return 0.0;
    const double p = j + 1.0;
    const double lt = std::log(t);
    const double tp = std::pow(t, p);
    switch (k) {
        case 1: return tp * (lt / p - 1.0 / (p * p));
        case 2: return tp * (lt * lt / p - 2.0 * lt / (p * p) + 2.0 / (p * p * p));
        case 3:
            return tp * (lt * lt * lt / p - 3.0 * lt * lt / (p * p) + 6.0 * lt / (p * p * p) -
                         6.0 / (p * p * p * p));
        default: throw std::logic_error("prim_logk: unsupported k");
    }
}

}  // namespace

double powm1_over_e_int(int j, double e, double t0, double t1) {
    if (t0 == t1) return 0.0;
    if (std::abs(e) >= 1e-6) {
        return (pow_int(t0, t1, j + e) - pow_int(t0, t1, static_cast<double>(j))) / e;
    }
    // series in e around the log limit; truncation below 1e-13 relative
    double v = prim_logk(t1, j, 1) - prim_logk(t0, j, 1);
    v += 0.5 * e * (prim_logk(t1, j, 2) - prim_logk(t0, j, 2));
    v += (e * e / 6.0) * (prim_logk(t1, j, 3) - prim_logk(t0, j, 3));
    return v;
}

}  // namespace nlrb
