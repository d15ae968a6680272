#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlrb/fem.hpp"
#include "nlrb/mesh.hpp"

using namespace nlrb;

TEST_CASE("build_mesh basics") {
    Mesh1D m = build_mesh(0.0, 1.0, 512);
    CHECK(m.h == std::pow(2.0, -9));
    CHECK(m.n_interior() == 511);

    Mesh1D m2 = build_mesh(0.0, 1.0, 2);
    CHECK(m2.n_interior() == 1);
    CHECK(m2.h == 0.5);

    Mesh1D m3 = build_mesh(0.0, 1.0, 128);
    CHECK(m3.h == std::pow(2.0, -7));
    CHECK(m3.n_interior() == 127);

    CHECK(DofMap::from_mesh(m3).interior_nodes.size() == 127);
    CHECK(DofMap::from_mesh(m3).interior_nodes.front() == 1);
    CHECK(DofMap::from_mesh(m3).interior_nodes.back() == 127);

    CHECK_THROWS_AS(build_mesh(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(1.0, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(1.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("mass matrix entries and SPD") {
    Mesh1D m = build_mesh(0.0, 1.0, 16);
    SymMatrix mass = assemble_mass(m);
    const double h = m.h;
    for (int i = 0; i < mass.n(); ++i) {
        CHECK(mass(i, i) == doctest::Approx(2.0 * h / 3.0).epsilon(1e-15));
        if (i + 1 < mass.n()) CHECK(mass(i, i + 1) == doctest::Approx(h / 6.0).epsilon(1e-15));
        if (i + 2 < mass.n()) CHECK(mass(i, i + 2) == 0.0);
    }
    // interior row sums equal h (integral of the hat)
    for (int i = 1; i + 1 < mass.n(); ++i) {
        double sum = 0.0;
        for (int j = 0; j < mass.n(); ++j) sum += mass(i, j);
        CHECK(sum == doctest::Approx(h).epsilon(1e-14));
    }
    CHECK_NOTHROW(CholeskyFactor{mass});

    Mesh1D tiny = build_mesh(0.0, 1.0, 2);
    SymMatrix mt = assemble_mass(tiny);
    CHECK(mt.n() == 1);
    CHECK(mt(0, 0) == doctest::Approx(2.0 * tiny.h / 3.0));
}

TEST_CASE("h1 gram entries") {
    Mesh1D m = build_mesh(0.0, 1.0, 16);
    SymMatrix g = assemble_h1_gram(m);
    const double h = m.h;
    CHECK(g(0, 0) == doctest::Approx(2.0 / h));
    CHECK(g(0, 1) == doctest::Approx(-1.0 / h));
    // constant vector is annihilated away from the boundary
    Vector ones = Vector::Ones(g.n());
    Vector img = g.apply(ones);
    for (int i = 1; i + 1 < g.n(); ++i) CHECK(std::abs(img[i]) < 1e-12);
    CHECK(img[0] == doctest::Approx(1.0 / h));
    // hat energy
    Vector e = Vector::Zero(g.n());
    e[4] = 1.0;
    CHECK(g.quad(e) == doctest::Approx(2.0 / h));
    CHECK_NOTHROW(CholeskyFactor{g});
}

TEST_CASE("load vectors") {
    Mesh1D m = build_mesh(0.0, 1.0, 16);
    const double h = m.h;

    Vector neg = assemble_load(m, [](double) { return -1.0; });
    for (int i = 0; i < neg.size(); ++i) CHECK(neg[i] == doctest::Approx(-h).epsilon(1e-14));

    Vector zero = assemble_load(m, [](double) { return 0.0; });
    CHECK(zero.norm() == 0.0);

    // linear data integrates exactly: \int x phi_i = h x_i
    Vector lin = assemble_load(m, [](double x) { return x; });
    for (int i = 0; i < lin.size(); ++i)
        CHECK(lin[i] == doctest::Approx(h * m.node(i + 1)).epsilon(1e-13));

    // characteristic function with the jump at a node
    Vector chi = assemble_load(m, [](double x) { return x >= 0.5 ? 1.0 : 0.0; }, {0.5});
    for (int i = 0; i < chi.size(); ++i) {
        const double x = m.node(i + 1);
        if (x < 0.5 - 1e-12)
            CHECK(std::abs(chi[i]) < 1e-15);
        else if (std::abs(x - 0.5) < 1e-12)
            CHECK(chi[i] == doctest::Approx(h / 2.0).epsilon(1e-13));
        else
            CHECK(chi[i] == doctest::Approx(h).epsilon(1e-13));
    }

    // a jump inside an element, integrated exactly thanks to the split
    Mesh1D m4 = build_mesh(0.0, 1.0, 4);
    const double c = 0.3;
    Vector vj = assemble_load(m4, [c](double x) { return x >= c ? 1.0 : 0.0; }, {c});
    // node 1 at 0.25: \int_{0.3}^{0.5} phi_1 = analytic value
    // phi_1 on [0.25, 0.5] is (0.5 - x)/0.25
    const double expected = (0.5 - 0.3) * (0.5 - 0.3) / (2.0 * 0.25);
    CHECK(vj[0] == doctest::Approx(expected).epsilon(1e-13));

    // linearity in F
    Vector f1 = assemble_load(m, [](double x) { return std::sin(3 * x); });
    Vector f2 = assemble_load(m, [](double x) { return 2.0 * std::sin(3 * x); });
    CHECK((f2 - 2.0 * f1).norm() < 1e-15);

    CHECK_THROWS(assemble_load(m, [](double) { return std::nan(""); }));
}

TEST_CASE("gram norms") {
    Mesh1D m = build_mesh(0.0, 1.0, 128);
    SymMatrix mass = assemble_mass(m);

    Vector z = Vector::Zero(mass.n());
    CHECK(gram_norm(mass, z) == 0.0);

    SymMatrix eye(3);
    for (int i = 0; i < 3; ++i) eye.set(i, i, 1.0);
    Vector e = Vector::Zero(3);
    e[1] = 1.0;
    CHECK(gram_norm(eye, e) == 1.0);

    // interpolant of sin(pi x): L2 norm approx sqrt(1/2)
    Vector v(mass.n());
    for (int i = 0; i < v.size(); ++i) v[i] = std::sin(M_PI * m.node(i + 1));
    CHECK(gram_norm(mass, v) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));

    // homogeneity
    CHECK(gram_norm(mass, -3.5 * v) == doctest::Approx(3.5 * gram_norm(mass, v)).epsilon(1e-14));

    CHECK_THROWS_AS(gram_norm(eye, v), std::invalid_argument);
}
