#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bioconv/linsolve.hpp"

using namespace bioconv;

namespace {

SparseMatrix poisson_1d(int n, bool neumann = false) {
    std::vector<Triplet> t;
    const double h = 1.0 / (n + 1);
    for (int i = 0; i < n; ++i) {
        double diag = 2.0;
        if (neumann && (i == 0 || i == n - 1)) diag = 1.0;
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i), diag / (h * h)});
        if (i > 0) t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i - 1), -1.0 / (h * h)});
        if (i + 1 < n) t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1), -1.0 / (h * h)});
    }
    return SparseMatrix(n, n, std::move(t));
}

SparseMatrix poisson_2d(int n) {
    std::vector<Triplet> t;
    auto id = [n](int i, int j) { return static_cast<std::size_t>(i + n * j); };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            t.push_back({id(i, j), id(i, j), 4.0});
            if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
            if (i + 1 < n) t.push_back({id(i, j), id(i + 1, j), -1.0});
            if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
            if (j + 1 < n) t.push_back({id(i, j), id(i, j + 1), -1.0});
        }
    return SparseMatrix(static_cast<std::size_t>(n * n), static_cast<std::size_t>(n * n), std::move(t));
}

double recomputed_residual(const SparseMatrix& A, const std::vector<double>& x, std::span<const double> b) {
    const auto Ax = A.multiply(x);
    double r = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        r += (b[i] - Ax[i]) * (b[i] - Ax[i]);
        nb += b[i] * b[i];
    }
    return std::sqrt(r / nb);
}

}  // namespace

TEST_CASE("options validation") {
    SolveOptions o;
    CHECK_NOTHROW(o.validate());
    o.tolerance = 1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o.tolerance = 1e-8;
    o.max_iterations = 0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
}

TEST_CASE("identity system solves in one iteration") {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 10; ++i) t.push_back({i, i, 1.0});
    SparseMatrix I(10, 10, t);
    std::vector<double> b{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    SolveOptions o;
    o.preconditioner = Preconditioning::none;
    const auto r = solve_spd(I, b, o);
    CHECK(r.stats.iterations == 1);
    for (std::size_t i = 0; i < 10; ++i) CHECK(r.x[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("CG on an eigenvector converges in one iteration") {
    const int n = 40;
    const auto A = poisson_1d(n);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = std::sin(std::numbers::pi * (i + 1) / (n + 1));
    SolveOptions o;
    o.preconditioner = Preconditioning::none;
    const auto r = solve_spd(A, b, o);
    CHECK(r.stats.iterations == 1);
    CHECK(r.stats.converged);
}

TEST_CASE("random SPD matches the dense oracle") {
    const std::size_t n = 50;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> M(n * n);
    for (double& v : M) v = U(rng);
    DenseMatrix D(n, n);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += M[i * n + k] * M[j * n + k];
            if (i == j) s += 1.0;
            D(i, j) = s;
            t.push_back({i, j, s});
        }
    SparseMatrix A(n, n, t);
    std::vector<double> b(n);
    for (double& v : b) v = U(rng);
    SolveOptions o;
    o.tolerance = 1e-13;
    o.preconditioner = Preconditioning::jacobi;
    const auto cg = solve_spd(A, b, o);
    const auto dense = dense_direct(D, b);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(cg.x[i] - dense.x[i]) <= 1e-10 * (1.0 + std::abs(dense.x[i])));
}

TEST_CASE("reported residual equals an independent recomputation") {
    const auto A = poisson_2d(20);
    std::vector<double> b(A.rows());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::cos(0.37 * static_cast<double>(i));
    for (auto method : {SolveMethod::cg, SolveMethod::bicgstab, SolveMethod::gmres}) {
        for (auto pc : {Preconditioning::none, Preconditioning::jacobi, Preconditioning::ilu0, Preconditioning::milu0}) {
            SolveOptions o;
            o.method = method;
            o.preconditioner = pc;
            o.tolerance = 1e-9;
            const auto r = solve_general(A, b, o);
            CAPTURE(to_string(method));
            CAPTURE(to_string(pc));
            CHECK(r.stats.converged);
            CHECK(r.stats.residual <= 1e-9);
            CHECK(std::abs(r.stats.residual - recomputed_residual(A, r.x, b)) <= 1e-13);
        }
    }
}

TEST_CASE("CG iteration growth on the refined Poisson family is at most O(1/h)") {
    std::vector<int> its;
    for (int n : {16, 32, 64, 128}) {
        const auto A = poisson_1d(n);
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) b[i] = 1.0 + 0.5 * std::sin(7.0 * i);
        SolveOptions o;
        o.preconditioner = Preconditioning::none;
        o.tolerance = 1e-10;
        its.push_back(solve_spd(A, b, o).stats.iterations);
    }
    for (std::size_t q = 1; q < its.size(); ++q) CHECK(its[q] <= 2 * 2 * its[q - 1]);
}

TEST_CASE("nonsymmetric convection-diffusion with GMRES and BiCGSTAB") {
    const int n = 30;
    std::vector<Triplet> t;
    auto id = [n](int i, int j) { return static_cast<std::size_t>(i + n * j); };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            t.push_back({id(i, j), id(i, j), 4.0});
            if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0 - 0.8});
            if (i + 1 < n) t.push_back({id(i, j), id(i + 1, j), -1.0 + 0.8});
            if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
            if (j + 1 < n) t.push_back({id(i, j), id(i, j + 1), -1.0});
        }
    SparseMatrix A(n * n, n * n, t);
    std::vector<double> b(A.rows(), 1.0);
    SolveOptions o;
    o.tolerance = 1e-11;
    o.method = SolveMethod::gmres;
    const auto g = solve_general(A, b, o);
    o.method = SolveMethod::bicgstab;
    const auto s = solve_general(A, b, o);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(g.x[i] == doctest::Approx(s.x[i]).epsilon(1e-8));
}

TEST_CASE("non-convergence is reported with history") {
    const auto A = poisson_2d(30);
    std::vector<double> b(A.rows(), 1.0);
    SolveOptions o;
    o.preconditioner = Preconditioning::none;
    o.max_iterations = 3;
    o.tolerance = 1e-12;
    try {
        solve_spd(A, b, o);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK_FALSE(e.stats().converged);
        CHECK(e.stats().history.size() == 3);
    }
}

TEST_CASE("bordered pure-Neumann solve") {
    const int n = 50;
    const auto K = poisson_1d(n, true);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = std::cos(std::numbers::pi * (i + 0.5) / n) + 0.3;
    SolveOptions o;
    o.tolerance = 1e-12;
    const auto r = solve_bordered(K, b, o);
    double s = 0.0;
    for (double v : r.x) s += v;
    CHECK(std::abs(s) <= 1e-10);
    // the multiplier absorbs the mean of b
    CHECK(r.multiplier == doctest::Approx(0.3).epsilon(1e-9));
    auto Kx = K.multiply(r.x);
    for (int i = 0; i < n; ++i) CHECK(Kx[i] + r.multiplier == doctest::Approx(b[i]).epsilon(1e-8));
}

TEST_CASE("dense direct: identity, random, ill-conditioned, singular") {
    DenseMatrix I(5, 5);
    for (std::size_t i = 0; i < 5; ++i) I(i, i) = 1.0;
    std::vector<double> b{1, -2, 3, -4, 5};
    const auto ri = dense_direct(I, b);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ri.x[i] == b[i]);

    const std::size_t n = 100;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    DenseMatrix A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = U(rng);
    std::vector<double> bb(n);
    for (double& v : bb) v = U(rng);
    const auto r = dense_direct(A, bb);
    const auto Ax = A.multiply(r.x);
    double res = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res += (Ax[i] - bb[i]) * (Ax[i] - bb[i]);
        nb += bb[i] * bb[i];
    }
    CHECK(std::sqrt(res / nb) <= 1e-11);
    CHECK(std::abs(std::sqrt(res / nb) - r.residual) <= 1e-13);

    // Hilbert-like 10x10: residual contract still enforced
    DenseMatrix H(10, 10);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) H(i, j) = 1.0 / static_cast<double>(i + j + 1);
    std::vector<double> hb(10, 1.0);
    try {
        const auto rh = dense_direct(H, hb);
        CHECK(rh.residual <= 1e-11);
    } catch (const SingularMatrixError& e) {
        CHECK(std::string(e.what()).find("residual contract") != std::string::npos);
    }

    DenseMatrix S(3, 3, {1, 2, 3, 2, 4, 6, 1, 1, 1});
    try {
        dense_direct(S, std::vector<double>{1, 2, 3});
        FAIL("expected singular");
    } catch (const SingularMatrixError& e) {
        CHECK(e.smallest_pivot() < 1e-12);
    }
}
