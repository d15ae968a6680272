#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlrb/fem.hpp"
#include "nlrb/nonlocal.hpp"

using namespace nlrb;

namespace {

// second reference integrator, refinement strategy different from the
// adaptive oracle: tensor Gauss on boxes geometrically graded toward the
// diagonal within each element pair
double graded_tensor_entry(const Mesh1D& mesh, const KernelSpec& spec, int i, int j) {
    const int k = i + 1, l = j + 1;
    const double h = mesh.h;
    auto hat = [&](int node, double x) {
        const double t = std::abs(x - mesh.node(node));
        return t >= h ? 0.0 : 1.0 - t / h;
    };
    auto integrand = [&](double x, double xp) {
        const double r = std::abs(x - xp);
        if (r >= spec.delta || r == 0.0) return 0.0;
        return (hat(k, x) - hat(k, xp)) * (hat(l, x) - hat(l, xp)) *
               std::pow(r, -(1.0 + 2.0 * spec.s));
    };
    auto box = [&](double x0, double x1, double y0, double y1, int order) {
        const GaussRule& rule = gauss_legendre(order);
        double acc = 0.0;
        for (size_t a = 0; a < rule.nodes.size(); ++a) {
            const double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * rule.nodes[a];
            for (size_t b = 0; b < rule.nodes.size(); ++b) {
                const double y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * rule.nodes[b];
                acc += rule.weights[a] * rule.weights[b] * integrand(x, y);
            }
        }
        return acc * 0.25 * (x1 - x0) * (y1 - y0);
    };
    // pair of touching/identical elements: split the square into strips
    // |x - x'| in [w 2^{-q-1}, w 2^{-q}] approximated by dyadic sub-boxes
    auto singular_pair = [&](double x0, double y0) {
        double acc = 0.0;
        const int levels = 20;
        // dyadic grading along both axes toward the diagonal of the square
        auto cell = [&](double ax, double bx, double ay, double by) {
            return box(ax, bx, ay, by, 10);
        };
        std::function<double(double, double, double, double, int)> rec =
            [&](double ax, double bx, double ay, double by, int depth) -> double {
            const double mindist = std::max(0.0, std::max(ay - bx, ax - by));
            const double size = std::max(bx - ax, by - ay);
            if (depth >= levels || mindist > 0.5 * size) return cell(ax, bx, ay, by);
            const double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
            return rec(ax, mx, ay, my, depth + 1) + rec(mx, bx, ay, my, depth + 1) +
                   rec(ax, mx, my, by, depth + 1) + rec(mx, bx, my, by, depth + 1);
        };
        acc = rec(x0, x0 + h, y0, y0 + h, 0);
        return acc;
    };

    double total = 0.0;
    for (int e = 0; e < mesh.n_el; ++e) {
        for (int ep = 0; ep < mesh.n_el; ++ep) {
            const bool touches = (e == k - 1 || e == k || e == l - 1 || e == l) ||
                                 (ep == k - 1 || ep == k || ep == l - 1 || ep == l);
            if (!touches) continue;
            if (std::max(0, std::abs(ep - e) - 1) * h >= spec.delta) continue;
            if (std::abs(ep - e) <= 1)
                total += singular_pair(mesh.node(e), mesh.node(ep));
            else
                total += box(mesh.node(e), mesh.node(e + 1), mesh.node(ep), mesh.node(ep + 1), 12);
        }
    }
    // exterior collar
    auto collar_mass = [&](double t) {
        if (t >= spec.delta) return 0.0;
        return pow_int(t, spec.delta, -(1.0 + 2.0 * spec.s));
    };
    const GaussRule& rule = gauss_legendre(16);
    for (int e = 0; e < mesh.n_el; ++e) {
        double acc = 0.0;
        for (size_t a = 0; a < rule.nodes.size(); ++a) {
            const double x = mesh.node(e) + 0.5 * h * (1.0 + rule.nodes[a]);
            acc += 0.5 * h * rule.weights[a] * hat(k, x) * hat(l, x) *
                   (collar_mass(x - mesh.a) + collar_mass(mesh.b - x));
        }
        total += 2.0 * acc;
    }
    return total;
}

}  // namespace

TEST_CASE("openmp assembly is bit-identical to the serial reference") {
    for (int n_el : {16, 64}) {
        Mesh1D mesh = build_mesh(0.0, 1.0, n_el);
        for (double s : {1.0 / 3.0, 0.5}) {
            KernelSpec spec = KernelSpec::fractional(s, 8 * mesh.h);
            SymMatrix a = assemble_nonlocal(mesh, spec);
            SymMatrix b = assemble_nonlocal_serial(mesh, spec);
            CHECK((a.mat() - b.mat()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("assembled matrix structure") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 32);
    for (double s : {1.0 / 3.0, 0.5}) {
        for (double delta : {0.25, 1.0}) {
            KernelSpec spec = KernelSpec::fractional(s, delta);
            SymMatrix a = assemble_nonlocal(mesh, spec);
            // exact symmetry and SPD
            CHECK((a.mat() - a.mat().transpose()).cwiseAbs().maxCoeff() == 0.0);
            CHECK_NOTHROW(CholeskyFactor{a});
            // zero pattern beyond delta + 2h
            const int m = static_cast<int>(std::lround(delta / mesh.h));
            for (int i = 0; i < a.n(); ++i)
                for (int j = 0; j < a.n(); ++j) {
                    if (std::abs(i - j) > m + 1) CHECK(a(i, j) == 0.0);
                    if (std::abs(i - j) == m) CHECK(a(i, j) != 0.0);
                }
        }
    }
}

TEST_CASE("strip monotonicity in delta") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 32);
    KernelSpec k1 = KernelSpec::fractional(0.5, 0.125);
    KernelSpec k2 = KernelSpec::fractional(0.5, 0.5);
    SymMatrix a1 = assemble_nonlocal(mesh, k1);
    SymMatrix a2 = assemble_nonlocal(mesh, k2);
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        Vector v(a1.n());
        for (int i = 0; i < v.size(); ++i) v[i] = U(eng);
        CHECK(a1.quad(v) <= a2.quad(v) * (1.0 + 1e-12));
    }
}

TEST_CASE("entries match the adaptive oracle") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 32);
    std::mt19937_64 eng(11);
    for (double s : {1.0 / 3.0, 0.5}) {
        for (double delta : {0.25, 1.0}) {
            KernelSpec spec = KernelSpec::fractional(s, delta);
            SymMatrix a = assemble_nonlocal(mesh, spec);
            const int m = static_cast<int>(std::lround(delta / mesh.h));
            std::uniform_int_distribution<int> row(0, a.n() - 1);
            for (int t = 0; t < 6; ++t) {
                const int i = row(eng);
                const int span = std::min(m + 1, a.n() - 1 - i);
                const int j = i + static_cast<int>(eng() % (span + 1));
                const double o = oracle_entry(mesh, spec, i, j);
                CHECK(a(i, j) ==
                      doctest::Approx(o).epsilon(1e-6).scale(std::abs(o) + 1e-12));
            }
            // structured picks: diagonal, adjacent, truncation distance
            for (int j : {8, 9, 8 + std::min(m, a.n() - 9)}) {
                const double o = oracle_entry(mesh, spec, 8, j);
                CHECK(a(8, j) == doctest::Approx(o).epsilon(1e-6).scale(std::abs(o) + 1e-12));
            }
        }
    }
}

TEST_CASE("oracle properties") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 16);
    KernelSpec spec = KernelSpec::fractional(0.5, 0.25);
    // symmetry
    CHECK(oracle_entry(mesh, spec, 3, 6) ==
          doctest::Approx(oracle_entry(mesh, spec, 6, 3)).epsilon(1e-9));
    // far pair is exactly zero
    CHECK(oracle_entry(mesh, spec, 0, 14) == 0.0);
}

TEST_CASE("second reference integrator agrees") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 16);
    for (double s : {1.0 / 3.0, 0.5}) {
        KernelSpec spec = KernelSpec::fractional(s, 0.25);
        SymMatrix a = assemble_nonlocal(mesh, spec);
        for (auto [i, j] : {std::pair{4, 4}, {4, 5}, {2, 6}}) {
            const double g = graded_tensor_entry(mesh, spec, i, j);
            CHECK(a(i, j) == doctest::Approx(g).epsilon(2e-6).scale(std::abs(g) + 1e-12));
        }
    }
}

TEST_CASE("custom radial path: fractional profile reproduces the closed form") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 16);
    const double s = 0.4, delta = 0.25;
    KernelSpec closed = KernelSpec::fractional(s, delta);
    KernelSpec custom = KernelSpec::custom(
        [s](double r) { return std::pow(r, -(1.0 + 2.0 * s)); }, delta);
    QuadratureConfig cfg;
    cfg.outer_order = 12;
    cfg.singular_split_levels = 40;
    SymMatrix a = assemble_nonlocal(mesh, closed);
    SymMatrix b = assemble_nonlocal(mesh, custom, cfg);
    const double scale = a.mat().cwiseAbs().maxCoeff();
    CHECK((a.mat() - b.mat()).cwiseAbs().maxCoeff() <= 2e-6 * scale);
}

TEST_CASE("custom radial path: bounded profile vs oracle") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 16);
    KernelSpec custom =
        KernelSpec::custom([](double r) { return std::exp(-4.0 * r * r); }, 0.25);
    QuadratureConfig cfg;
    cfg.outer_order = 8;
    cfg.singular_split_levels = 20;
    SymMatrix a = assemble_nonlocal(mesh, custom, cfg);
    for (auto [i, j] : {std::pair{5, 5}, {5, 6}, {3, 7}}) {
        const double o = oracle_entry(mesh, custom, i, j, cfg);
        CHECK(a(i, j) == doctest::Approx(o).epsilon(1e-6).scale(std::abs(o) + 1e-12));
    }
}

TEST_CASE("splitting invariance and fractional-Laplace assembly") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 32);
    for (double s : {1.0 / 3.0, 0.5}) {
        SymMatrix ref = assemble_fractional_laplace(mesh, s, 1.0);
        const double scale = ref.mat().cwiseAbs().maxCoeff();
        for (double dp : {1.5, 2.0}) {
            SymMatrix other = assemble_fractional_laplace(mesh, s, dp);
            CHECK((ref.mat() - other.mat()).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        }
        CHECK_NOTHROW(CholeskyFactor{ref});
    }
    CHECK_THROWS_AS(assemble_fractional_laplace(mesh, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("scaling consistency between operator and data scaling") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 32);
    const double s = 0.4;
    SymMatrix a = assemble_fractional_laplace(mesh, s, 1.0);
    Vector big_f = assemble_load(mesh, [](double) { return -1.0; });
    const double c = scaling_constant(1, s);

    // (c/2) A u = F  and  A u = (2/c) F  are the same system
    SymMatrix scaled = a;
    scaled.scale(0.5 * c);
    Vector u1 = CholeskyFactor(scaled).solve(big_f);
    Vector u2 = CholeskyFactor(a).solve((2.0 / c) * big_f);
    CHECK((u1 - u2).norm() <= 1e-12 * u1.norm());
}

TEST_CASE("delta snapping errors") {
    Mesh1D mesh = build_mesh(0.0, 1.0, 32);
    CHECK_THROWS_AS(assemble_nonlocal(mesh, KernelSpec::fractional(0.5, 1.3 * mesh.h)),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_nonlocal(mesh, KernelSpec::fractional(0.5, 0.4 * mesh.h)),
                    std::invalid_argument);
    // infinite delta must go through the splitting
    CHECK_THROWS_AS(
        assemble_nonlocal(mesh, KernelSpec::fractional(
                                    0.5, std::numeric_limits<double>::infinity())),
        std::invalid_argument);
}
