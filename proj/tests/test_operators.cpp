#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bioconv/operators.hpp"

using namespace bioconv;

namespace {

MacGrid grid(int n, double L1 = 1.0, double L2 = 1.0, double L3 = 1.0) {
    return MacGrid(ChamberDomain(L1, L2, L3), {n, n, n});
}

template <class F>
ScalarField sample(const MacGrid& g, F&& f) {
    ScalarField s(g);
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) {
                const auto x = g.cell_position(i, j, k);
                s.at(i, j, k) = f(x[0], x[1], x[2]);
            }
    return s;
}

template <class F>
VectorField sample_faces(const MacGrid& g, F&& f) {
    VectorField v(g);
    for (int m = 0; m < 3; ++m) {
        const auto d = g.face_dims(m);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const auto x = g.face_position(m, i, j, k);
                    v.at(m, i, j, k) = f(m, x[0], x[1], x[2]);
                }
    }
    return v;
}

double max_abs(const ScalarField& s) {
    double m = 0.0;
    for (double v : s.values()) m = std::max(m, std::abs(v));
    return m;
}

// sum over all faces including boundary ones
double full_face_dot(const VectorField& a, const VectorField& b) {
    double acc = 0.0;
    for (int m = 0; m < 3; ++m)
        for (std::size_t q = 0; q < a.component(m).size(); ++q) acc += a.component(m)[q] * b.component(m)[q];
    return acc * a.grid().cell_volume();
}

}  // namespace

TEST_CASE("grid layout") {
    const MacGrid g(ChamberDomain(2, 1, 1), {8, 4, 4});
    CHECK(g.h(0) == 0.25);
    CHECK(g.cell_count() == 128);
    CHECK(g.face_count(0) == 9 * 16);
    CHECK(g.cell_index(1, 2, 3) == 1 + 8 * (2 + 4 * 3));
    CHECK_THROWS_AS(MacGrid(ChamberDomain(1, 1, 1), {3, 4, 4}), std::invalid_argument);
    const MacGrid other(ChamberDomain(1, 1, 1), {8, 4, 4});
    CHECK_THROWS_AS(dot(ScalarField(g), ScalarField(other)), GridMismatch);
}

TEST_CASE("gradient of a constant vanishes") {
    const auto g = grid(6);
    const auto v = gradient(ScalarField(g, 3.5));
    for (int m = 0; m < 3; ++m)
        for (double x : v.component(m)) CHECK(x == 0.0);
}

TEST_CASE("divergence of (x, -y, 0) vanishes") {
    const auto g = grid(6);
    const auto v = sample_faces(g, [](int m, double x, double y, double) { return m == 0 ? x : (m == 1 ? -y : 0.0); });
    CHECK(max_abs(divergence(v)) <= 1e-12);
}

TEST_CASE("laplacian of x^2 is 2 in interior cells") {
    const auto g = grid(8);
    const auto s = sample(g, [](double x, double, double) { return x * x; });
    const auto l = laplacian_scalar(s);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 1; i < 7; ++i) CHECK(l.at(i, j, k) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("div grad equals the Neumann Laplacian; summation by parts") {
    const auto g = grid(7);
    const auto s = random_zero_mean(g, 11);
    const auto lap = laplacian_scalar(s);
    const auto dg = divergence(gradient(s));
    for (std::size_t q = 0; q < s.size(); ++q) CHECK(std::abs(lap[q] - dg[q]) <= 1e-9 * (1.0 + std::abs(lap[q])));

    // <grad s, v> + <s, div v> = boundary term sum(s_b v_b) dA
    VectorField v(g);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int m = 0; m < 3; ++m)
        for (double& x : v.component(m)) x = U(rng);
    const double lhs = full_face_dot(gradient(s), v) + dot(s, divergence(v));
    double boundary = 0.0;
    for (int m = 0; m < 3; ++m) {
        const auto d = g.face_dims(m);
        const double area = g.cell_volume() / g.h(m);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    if (!g.boundary_face(m, i, j, k)) continue;
                    std::array<int, 3> c{i, j, k};
                    const bool hi = c[m] == g.n(m);
                    if (hi) c[m] -= 1;
                    boundary += (hi ? 1.0 : -1.0) * s.at(c[0], c[1], c[2]) * v.at(m, i, j, k) * area;
                }
    }
    CHECK(std::abs(lhs - boundary) <= 1e-12 * (1.0 + std::abs(boundary)));
}

TEST_CASE("curl fields are discretely divergence free with no-slip walls") {
    const auto g = grid(8);
    const auto u = random_divergence_free(g, 3);
    CHECK(max_abs(divergence(u)) <= 1e-12);
    for (int m = 0; m < 3; ++m) {
        const auto d = g.face_dims(m);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i)
                    if (g.boundary_face(m, i, j, k)) CHECK(u.at(m, i, j, k) == 0.0);
    }
    CHECK(v_norm(u) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("advection: trivial cases and skew symmetry") {
    const auto g = grid(8);
    const auto u = random_divergence_free(g, 9);
    CHECK(max_abs(advect_scalar(u, ScalarField(g, 2.0))) <= 1e-12);
    CHECK(max_abs(advect_scalar(VectorField(g), random_zero_mean(g, 1))) == 0.0);
    const auto s = random_zero_mean(g, 2);
    const auto t = random_zero_mean(g, 3);
    const double us = v_norm(u) * l2_norm(s);
    CHECK(std::abs(dot(advect_scalar(u, s), s)) <= 1e-12 * us * l2_norm(s) * 100);
    CHECK(std::abs(dot(advect_scalar(u, s), t) + dot(advect_scalar(u, t), s)) <= 1e-12 * us * l2_norm(t) * 100);
    const auto v = random_divergence_free(g, 10);
    const auto w = random_divergence_free(g, 11);
    CHECK(std::abs(dot(advect_velocity(u, v), v)) <= 1e-12);
    CHECK(std::abs(dot(advect_velocity(u, v), w) + dot(advect_velocity(u, w), v)) <= 1e-12);
}

TEST_CASE("chemotaxis term: trivial cases and conservation") {
    const auto g = grid(8);
    const auto r = default_consumption_function(1.0, 0.5);
    const auto c = sample(g, [](double x, double y, double z) { return 0.5 + 0.3 * std::cos(x) * std::sin(y + z); });
    CHECK(max_abs(chemotaxis_term(ScalarField(g), c, r, 0.7)) == 0.0);
    CHECK(max_abs(chemotaxis_term(ScalarField(g, 1.0), ScalarField(g, 0.4), r, 0.7)) == 0.0);
    const auto n = sample(g, [](double x, double, double z) { return 1.0 + 0.2 * x * z; });
    CHECK(std::abs(integral(chemotaxis_term(n, c, r, 0.7))) <= 1e-14);
}

TEST_CASE("chemotaxis term converges at second order on a manufactured pair") {
    // n = 1 + 0.5 cos(pi x), c = 0.6 + 0.2 cos(pi x) cos(pi z), r on its rising edge
    const auto r = default_consumption_function(2.0, 1.0);
    auto exact = [&](double x, double, double z) {
        const double pi = std::numbers::pi;
        const double n = 1.0 + 0.5 * std::cos(pi * x);
        const double nx = -0.5 * pi * std::sin(pi * x);
        const double c = 0.6 + 0.2 * std::cos(pi * x) * std::cos(pi * z);
        const double cx = -0.2 * pi * std::sin(pi * x) * std::cos(pi * z);
        const double cz = -0.2 * pi * std::cos(pi * x) * std::sin(pi * z);
        const double cxx = -0.2 * pi * pi * std::cos(pi * x) * std::cos(pi * z);
        const double czz = cxx;
        const double rc = r(c), rp = r.slope(c);
        // div(n r(c) grad c)
        return nx * rc * cx + n * rp * (cx * cx + cz * cz) + n * rc * (cxx + czz);
    };
    // the coarsest grids are pre-asymptotic for this pair
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const auto g = grid(n);
        const auto ns = sample(g, [](double x, double, double) { return 1.0 + 0.5 * std::cos(std::numbers::pi * x); });
        const auto cs = sample(g, [](double x, double, double z) {
            return 0.6 + 0.2 * std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * z);
        });
        const auto t = chemotaxis_term(ns, cs, r, 1.0);
        double err = 0.0;
        for (int k = 1; k < n - 1; ++k)
            for (int j = 1; j < n - 1; ++j)
                for (int i = 1; i < n - 1; ++i) {
                    const auto x = g.cell_position(i, j, k);
                    err = std::max(err, std::abs(t.at(i, j, k) - exact(x[0], x[1], x[2])));
                }
        if (prev > 0.0) CHECK(std::log2(prev / err) >= (n == 64 ? 1.9 : 1.75));
        prev = err;
    }
}

TEST_CASE("V norm of a sine eigenfield") {
    // u = (0, 0, sin(pi x) sin(pi y) sin(pi z)), ||grad u||^2 = 3 pi^2 / 8 on the unit cube
    double prev = 0.0;
    for (int n : {8, 16, 32}) {
        const auto g = grid(n);
        const auto u = sample_faces(g, [](int m, double x, double y, double z) {
            const double pi = std::numbers::pi;
            return m == 2 ? std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * z) : 0.0;
        });
        const double err = std::abs(v_norm(u) - std::numbers::pi * std::sqrt(3.0 / 8.0));
        if (prev > 0.0) CHECK(std::log2(prev / err) >= 1.8);
        prev = err;
    }
    const auto g = grid(8);
    const auto u = random_divergence_free(g, 1);
    auto u2 = u;
    u2 *= 2.0;
    CHECK(v_norm(u2) == doctest::Approx(2.0 * v_norm(u)).epsilon(1e-15));
}

TEST_CASE("V norm is the energy of the velocity Laplacian") {
    const auto g = grid(6);
    const auto u = random_divergence_free(g, 4);
    const double e = -dot(laplacian_velocity(u), u);
    CHECK(v_norm(u) * v_norm(u) == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("ghosts: pure Neumann with chi = 0, Robin relation otherwise") {
    const auto g = grid(6);
    const auto r = default_consumption_function(1.0, 0.5);
    const ScalarField n(g, 0.7), c(g, 0.4);
    const auto cg = oxygen_ghosts(c, OxygenTopBc::neumann, 0.0);
    const auto ng = bacteria_ghosts(n, c, cg, r, 0.0);
    for (const auto& side : ng.side)
        for (double v : side) CHECK(v == 0.7);

    const auto c2 = sample(g, [](double x, double y, double z) { return 0.3 + 0.1 * x + 0.05 * y * z; });
    const auto n2 = sample(g, [](double x, double, double z) { return 1.0 + 0.1 * x * z; });
    const auto cgd = oxygen_ghosts(c2, OxygenTopBc::dirichlet, 0.5);
    const auto ngd = bacteria_ghosts(n2, c2, cgd, r, 0.8);
    CHECK(bacteria_boundary_flux_residual(n2, c2, ngd, cgd, r, 0.8) <= 1e-12);
    // lower side stays Neumann
    for (std::size_t q = 0; q < cgd.side[4].size(); ++q) {
        const auto p = side_cell(g, 4, static_cast<int>(q % 6), static_cast<int>(q / 6));
        CHECK(cgd.side[4][q] == c2.at(p[0], p[1], p[2]));
    }
}
