#include "doctest.h"

#include <cmath>
#include <random>

#include "bioconv/model.hpp"

using namespace bioconv;

namespace {

PhysicalParams unit_params() {
    PhysicalParams p;
    p.eta = p.D_n = p.D_c = p.rho = p.V_b = p.n_r = p.L = p.chi_bar = p.c_air = p.k = p.g = 1.0;
    p.rho_b = 2.0;
    return p;
}

}  // namespace

TEST_CASE("dimensionless groups from unit parameters") {
    const auto d = dimensionless_from_physical(unit_params());
    CHECK(d.S_c == 1.0);
    CHECK(d.gamma == 1.0);
    CHECK(d.chi == 1.0);
    CHECK(d.delta == 1.0);
    CHECK(d.beta == 1.0);
}

TEST_CASE("dimensionless groups: hand values") {
    auto p = unit_params();
    p.D_c = 2.0;
    p.D_n = 4.0;
    CHECK(dimensionless_from_physical(p).delta == 0.5);

    p = unit_params();
    p.eta = 2e-3;
    p.D_n = 1e-9;
    p.rho = 1e3;
    p.rho_b = 1.1e3;
    CHECK(std::abs(dimensionless_from_physical(p).S_c - 2e3) <= 1e-14 * 2e3);
}

TEST_CASE("dimensionless groups match defining ratios") {
    PhysicalParams p;
    p.eta = 1.0e-3;
    p.D_n = 2.0e-10;
    p.D_c = 2.0e-9;
    p.rho = 1.0e3;
    p.rho_b = 1.1e3;
    p.V_b = 1.0e-18;
    p.n_r = 1.0e15;
    p.L = 1.0e-3;
    p.chi_bar = 1.0e-9;
    p.c_air = 2.0e23;
    p.k = 1.0e6;
    p.g = 9.81;
    const auto d = dimensionless_from_physical(p);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    CHECK(rel(d.S_c, p.eta / (p.D_n * p.rho)) <= 1e-14);
    CHECK(rel(d.gamma, p.V_b * p.n_r * (p.rho_b - p.rho) * p.L * p.L * p.L / (p.eta * p.D_n)) <= 1e-14);
    CHECK(rel(d.chi, p.chi_bar * p.c_air / p.D_n) <= 1e-14);
    CHECK(rel(d.delta, p.D_c / p.D_n) <= 1e-14);
    CHECK(rel(d.beta, p.k * p.n_r * p.L * p.L / (p.c_air * p.D_n)) <= 1e-14);

    // identity: delta S_c rho D_n / eta = D_c / D_n
    CHECK(rel(d.delta * d.S_c * p.rho * p.D_n / p.eta, p.D_c / p.D_n) <= 1e-14);
    // scaling eta and D_c together leaves delta / S_c unchanged
    auto q = p;
    q.eta *= 3.0;
    q.D_c *= 3.0;
    const auto e = dimensionless_from_physical(q);
    CHECK(rel(e.delta / e.S_c, d.delta / d.S_c) <= 1e-14);
}

TEST_CASE("non-positive physical field is named") {
    auto p = unit_params();
    p.D_c = -1.0;
    try {
        dimensionless_from_physical(p);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("D_c") != std::string::npos);
    }
    p = unit_params();
    p.rho_b = 0.5;
    CHECK_THROWS_AS(dimensionless_from_physical(p), std::invalid_argument);
}

TEST_CASE("chamber domain") {
    ChamberDomain d(2.0, 1.0, 0.5);
    CHECK(d.measure() == 1.0);
    CHECK(d.max_edge() == 2.0);
    CHECK(d.min_edge() == 0.5);
    CHECK_THROWS_AS(ChamberDomain(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("default consumption function") {
    const auto r = default_consumption_function(1.2, 0.3);
    CHECK(r(0.75) == 1.0);
    CHECK(r(-0.1) == 0.0);
    CHECK(r(1.6) == 0.0);
    CHECK(r.norm_inf == 1.0);
    CHECK(r.norm_l1 == doctest::Approx(1.2));
    CHECK(r.norm_lip == doctest::Approx(1.5 / 0.3));
    CHECK(r.support_lo == 0.0);
    CHECK(r.support_hi == doctest::Approx(1.5));

    // adaptive Simpson of |r| as an independent quadrature oracle
    std::function<double(double, double, double, double, double, int)> simpson =
        [&](double a, double b, double fa, double fm, double fb, int depth) -> double {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = std::abs(r(lm)), frm = std::abs(r(rm));
        const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
        const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
        if (depth > 40 || std::abs(left + right - whole) < 1e-14) return left + right;
        return simpson(a, m, fa, flm, fm, depth + 1) + simpson(m, b, fm, frm, fb, depth + 1);
    };
    double total = 0.0;
    const double cuts[] = {0.0, 0.3, 1.2, 1.5};
    for (int s = 0; s < 3; ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        total += simpson(a, b, std::abs(r(a)), std::abs(r(0.5 * (a + b))), std::abs(r(b)), 0);
    }
    CHECK(std::abs(total - r.norm_l1) <= 1e-10);
}

TEST_CASE("consumption audit accepts honest norms and rejects understated ones") {
    const auto r = default_consumption_function(0.4, 0.2);
    const auto audit = validate_consumption(r);
    CHECK(audit.ok);
    CHECK(audit.max_value <= 1.0);
    CHECK(audit.max_difference_quotient <= r.norm_lip);

    auto bad = r;
    bad.norm_lip = 1.0;
    CHECK_FALSE(validate_consumption(bad).ok);
    auto bad_l1 = r;
    bad_l1.norm_l1 = 0.3;
    CHECK_FALSE(validate_consumption(bad_l1).ok);
}
