#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "bioconv/certificate.hpp"
#include "bioconv/double_double.hpp"
#include "cert_oracle.hpp"
#include "json.hpp"

using namespace bioconv;

namespace {

DomainConstants make_constants(double ctr, double cpoi, double c1 = 0.3) {
    DomainConstants dc;
    dc.C_poi_dirichlet = cpoi;
    dc.C_poi_meanzero = cpoi;
    dc.C_tr = ctr;
    dc.C_1 = c1;
    dc.method_poi_dirichlet = dc.method_poi_meanzero = dc.method_tr = dc.method_1 = "declared";
    return dc;
}

ConsumptionFunction r_with(double inf, double l1, double lip) {
    return custom_consumption_function([](double) { return 0.0; }, inf, l1, lip, 0.0, 1.0);
}

CertificateInputs small_inputs() {
    CertificateInputs in;
    in.constants = make_constants(0.05, 1.0 / std::numbers::pi);
    in.constants.C_poi_dirichlet = 1.0 / (std::numbers::pi * std::sqrt(3.0));
    in.constants.C_1 = 0.367;
    in.measure = 1.0;
    in.groups = {1.0, 1.0, 0.05, 2.0, 0.1};
    in.gravity = 1.0;
    in.r_inf = 1.0;
    in.r_l1 = 0.4;
    in.r_lip = 7.5;
    in.alpha1 = 0.5;
    in.alpha2 = 0.3;
    in.f_n_norm = 0.03;
    in.f_c_norm = 0.03;
    in.F_norm = 0.04;
    return in;
}

double ulps(double a, double b) { return std::abs(a - b) / std::numeric_limits<double>::epsilon() / std::abs(b); }

}  // namespace

TEST_CASE("analytic domain constants on the unit cube") {
    const auto dc = domain_constants(ChamberDomain(1, 1, 1), ConstantsMode::analytic);
    CHECK(dc.C_poi_dirichlet == doctest::Approx(1.0 / (std::numbers::pi * std::sqrt(3.0))).epsilon(1e-15));
    CHECK(dc.C_poi_dirichlet == doctest::Approx(0.18377).epsilon(1e-4));
    CHECK(dc.C_poi_meanzero == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(dc.C_tr == doctest::Approx(6.0));
    CHECK(dc.C_1 > 0.0);
    CHECK(dc.method_tr == "analytic");
    const auto dc2 = domain_constants(ChamberDomain(2, 1, 1), ConstantsMode::analytic);
    CHECK(dc2.C_poi_meanzero == doctest::Approx(2.0 * dc.C_poi_meanzero).epsilon(1e-15));
    CHECK_THROWS_AS(domain_constants(ChamberDomain(1, 1, 1e-7), ConstantsMode::analytic), std::invalid_argument);
}

TEST_CASE("trace constant dominates the constant function") {
    // phi = 1: |boundary| / |Omega|
    for (auto L : {std::array<double, 3>{1, 1, 1}, {2, 1, 0.5}, {10, 10, 10}}) {
        const auto dc = domain_constants(ChamberDomain(L[0], L[1], L[2]), ConstantsMode::analytic);
        const double ratio = 2.0 * (L[0] * L[1] + L[1] * L[2] + L[0] * L[2]) / (L[0] * L[1] * L[2]);
        CHECK(dc.C_tr >= ratio);
    }
}

TEST_CASE("discrete domain constants stay within 1% of analytic bounds") {
    const ChamberDomain dom(1.0, 1.0, 0.5);
    const auto a = domain_constants(dom, ConstantsMode::analytic);
    const auto d = domain_constants(dom, ConstantsMode::discrete, std::array<int, 3>{16, 16, 16});
    CHECK(d.C_poi_meanzero <= 1.01 * a.C_poi_meanzero);
    CHECK(d.C_poi_dirichlet <= 1.01 * a.C_poi_dirichlet);
    CHECK(d.C_tr <= 1.01 * a.C_tr);
    CHECK(d.C_1 <= 1.01 * a.C_1);
    // Rayleigh quotients against the closed-form discrete eigenvalues
    const double h = 1.0 / 16;
    const double lam_n = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
    CHECK(d.C_poi_meanzero == doctest::Approx(1.0 / std::sqrt(lam_n)).epsilon(1e-10));
    const double h3 = 0.5 / 16;
    const double lam_d = 2.0 * lam_n + 4.0 / (h3 * h3) * std::pow(std::sin(std::numbers::pi * h3 / 1.0), 2);
    CHECK(d.C_poi_dirichlet == doctest::Approx(1.0 / std::sqrt(lam_d)).epsilon(1e-10));
    CHECK(d.method_poi_meanzero.rfind("discrete", 0) == 0);
    CHECK_THROWS_AS(domain_constants(dom, ConstantsMode::discrete, std::array<int, 3>{4, 8, 8}), std::invalid_argument);
}

TEST_CASE("overrides are tagged as declared") {
    auto dc = domain_constants(ChamberDomain(1, 1, 1), ConstantsMode::analytic);
    ConstantOverrides o;
    o.C_tr = 0.05;
    dc = apply_overrides(dc, o);
    CHECK(dc.C_tr == 0.05);
    CHECK(dc.method_tr == "declared");
    CHECK(dc.method_1 == "analytic");
    o.C_tr = -1.0;
    CHECK_THROWS_AS(apply_overrides(dc, o), std::invalid_argument);
}

TEST_CASE("thetas: hand values") {
    const auto r0 = r_with(1.0, 0.4, 1.0);
    {
        const auto [t1, t2] = thetas(make_constants(1e-300, 1.0), 0.3, r0);
        CHECK(t1 == 1.0);
        CHECK(t2 == 1.0);
    }
    {
        const auto [t1, t2] = thetas(make_constants(0.2, 1.0), 0.0, r0);
        CHECK(t1 == 1.0);
        CHECK(ulps(t2, 4.0 / 3.0) <= 2.0);
    }
    {
        const auto [t1, t2] = thetas(make_constants(0.2, 1.0), 0.5, r0);
        CHECK(ulps(t1, 10.0 / 9.0) <= 2.0);
        CHECK(t2 >= 1.0);
    }
    try {
        thetas(make_constants(0.6, 1.0), 0.0, r0);
        FAIL("expected violation");
    } catch (const HypothesisViolation& e) {
        CHECK(e.slack() < 0.0);
        CHECK(e.inequality().find("C_tr C_poi") != std::string::npos);
    }
}

TEST_CASE("gamma0: collapsed and homogeneous cases") {
    DimensionlessGroups g{1.0, 1.0, 0.0, 1.0, 1.0};
    const auto r = r_with(1.0, 0.4, 1.0);
    CHECK(gamma0(make_constants(1e-300, 1.0), ChamberDomain(1, 1, 1), g, r, 0.5, 2.0, 5.0) == 2.0);
    g.chi = 0.3;
    CHECK(gamma0(make_constants(0.1, 0.5), ChamberDomain(1, 1, 1), g, r, 0.5, 0.0, 0.0) == 0.0);
}

TEST_CASE("gamma0 is monotone in the data norms") {
    const DimensionlessGroups g{1.0, 1.0, 0.2, 1.5, 0.4};
    const auto r = r_with(1.0, 0.3, 2.0);
    const auto dc = make_constants(0.05, 0.4);
    const ChamberDomain dom(1, 1, 1);
    double prev = -1.0;
    for (double fn = 0.0; fn <= 1.0; fn += 0.1) {
        const double v = gamma0(dc, dom, g, r, 0.5, fn, 0.2);
        CHECK(v >= prev);
        prev = v;
    }
    prev = -1.0;
    for (double fc = 0.0; fc <= 1.0; fc += 0.1) {
        const double v = gamma0(dc, dom, g, r, 0.5, 0.2, fc);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("gammas: limiting cases") {
    const DimensionlessGroups g{2.0, 0.7, 0.1, 1.0, 0.1};
    const auto dc = make_constants(0.1, 0.5);
    const auto out = gammas(dc, g, 1.3, r_with(1.0, 0.2, 1.0), 0.0, 0.0);
    CHECK(out.gamma1 == doctest::Approx(0.7 * 1.3 * 0.5).epsilon(1e-15));
    const auto tiny = gammas(dc, g, 1.0, r_with(1.0, 1e-300, 1.0), 0.0, 0.0);
    CHECK(tiny.gamma2 == doctest::Approx(1.0 - 0.1).epsilon(1e-15));
    CHECK_THROWS_AS(gammas(dc, g, 1.0, r_with(1.0, 0.9, 1.0), 0.0, 0.0), HypothesisViolation);
}

TEST_CASE("existence checks") {
    auto in = small_inputs();
    in.groups.chi = 0.0;
    in.groups.beta = 0.0;
    for (const auto& c : check_existence(in)) CHECK(c.satisfied);

    in = small_inputs();
    in.constants.C_tr = 0.9;
    in.constants.C_poi_meanzero = 1.0;
    const auto cs = check_existence(in);
    const auto& tp = cs[1];
    CHECK(tp.name == "trace_poincare");
    CHECK_FALSE(tp.satisfied);
    CHECK(tp.slack == doctest::Approx(0.1 - 0.9).epsilon(1e-14));

    // (iii): threshold in nbar
    in = small_inputs();
    in.groups.chi = 0.5;
    in.groups.beta = 0.5;
    const auto base = build_certificate(in);
    const double thr = in.measure / (in.groups.chi * in.groups.beta * in.r_inf * in.r_inf *
                                     std::pow(in.constants.C_poi_meanzero, 2) * base.theta1 * base.theta2);
    in.alpha1 = 0.999 * thr * in.measure;
    CHECK(check_existence(in)[2].satisfied);
    in.alpha1 = 1.001 * thr * in.measure;
    const auto after = check_existence(in);
    CHECK_FALSE(after[2].satisfied);
    // the alpha1 form fails at the same point
    CHECK(after[3].satisfied == after[2].satisfied);
}

TEST_CASE("uniqueness checks: homogeneous data") {
    auto in = small_inputs();
    in.f_n_norm = in.f_c_norm = in.F_norm = 0.0;
    const auto rep = check_uniqueness(in);
    CHECK(rep.pi_value == 0.0);
    for (const auto& c : rep.checks) CHECK(c.satisfied);
}

TEST_CASE("uniqueness: lipschitz smallness fails at equality") {
    auto in = small_inputs();
    // make Gamma0 exactly 1/(C_1 |r|_Lip) by picking C_1 |r|_Lip = 1/Gamma0
    const auto c0 = build_certificate(in);
    in.r_lip = 1.0 / (in.constants.C_1 * c0.gamma0);
    const auto rep = check_uniqueness(in);
    const auto it = std::find_if(rep.checks.begin(), rep.checks.end(),
                                 [](const HypothesisCheck& c) { return c.name == "lipschitz_smallness"; });
    REQUIRE(it != rep.checks.end());
    CHECK(std::abs(it->lhs - 1.0) <= 4e-16);
    if (it->lhs >= 1.0) CHECK_FALSE(it->satisfied);
}

TEST_CASE("a-priori bounds") {
    auto in = small_inputs();
    in.f_n_norm = in.f_c_norm = in.F_norm = 0.0;
    auto b = apriori_bounds(in);
    CHECK(b.u_bound == 0.0);
    CHECK(b.n_bound == 0.0);
    CHECK(b.c_bound == 0.0);
    in.f_c_norm = 0.1;
    in.groups.chi = 0.0;  // Gamma0 stays 0
    const double c1 = apriori_bounds(in).c_bound;
    in.f_c_norm = 0.2;
    CHECK(apriori_bounds(in).c_bound == doctest::Approx(2.0 * c1).epsilon(1e-15));
}

TEST_CASE("gossez feasibility") {
    auto in = small_inputs();
    auto gz = gossez_lambda_feasibility(in);
    CHECK(gz.feasible);
    CHECK(gz.lambda2 == 1.0);
    CHECK(gz.lambda2 < gz.K1 * gz.lambda3);
    CHECK(gz.lambda3 < gz.K2 * gz.lambda2);
    CHECK(gz.lambda1 < gz.K3 * gz.lambda2);

    in.groups.chi = 0.0;
    gz = gossez_lambda_feasibility(in);
    CHECK(std::isinf(gz.K1));
    CHECK(gz.feasible);
    CHECK(gz.lambda3 < gz.K2);

    // tune beta so that K1 K2 hits 4 and then 1
    in = small_inputs();
    const auto base = gossez_lambda_feasibility(in);
    const double prod = base.K1 * base.K2;
    in.groups.beta *= std::sqrt(prod / 4.0);  // K2 scales like 1/beta^2
    gz = gossez_lambda_feasibility(in);
    CHECK(gz.K1 * gz.K2 == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(gz.feasible);
    in.groups.beta *= 2.0;
    gz = gossez_lambda_feasibility(in);
    CHECK(gz.K1 * gz.K2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("certificate: double and double-double agree; oracle agreement on a fixed suite") {
    for (const auto& in : oracle::fixed_suite(20)) {
        const auto cert = build_certificate(in);
        CHECK(cert.precision_defects.empty());
        const auto ref = oracle::evaluate(in);
        CHECK(oracle::max_discrepancy(cert, ref) <= 1e-13);
        for (const auto* list : {&cert.existence_checks, &cert.uniqueness_checks}) {
            for (const auto& c : *list) {
                if (std::isfinite(c.lhs) && std::isfinite(c.rhs)) {
                    CHECK(std::abs((c.rhs - c.lhs) - c.slack) <= 1e-12 * std::max(1.0, std::abs(c.slack)));
                }
            }
        }
        CHECK(cert.theta1 >= 1.0);
        CHECK(cert.theta2 >= 1.0);
        CHECK(cert.gamma0 >= 0.0);
    }
}

TEST_CASE("satisfied checks have positive recorded denominators") {
    const auto cert = build_certificate(small_inputs());
    CHECK(cert.existence_ok());
    CHECK(cert.uniqueness_ok());
    for (const auto& d : cert.denominators) CHECK(d.value > 0.0);
}

TEST_CASE("undefined values serialise as null") {
    auto in = small_inputs();
    in.constants.C_tr = 0.9;
    const auto cert = build_certificate(in);
    CHECK_FALSE(cert.existence_ok());
    CHECK(std::isnan(cert.theta2));
    const auto j = nlohmann::json::parse(certificate_to_json(cert));
    CHECK(j["values"]["theta2"].is_null());
    CHECK(j["existence_ok"] == false);
    CHECK(j["gossez"]["witness"].is_null());
    const auto text = certificate_to_text(cert);
    CHECK(text.find("existence.trace_poincare = FAIL") != std::string::npos);
}

TEST_CASE("double-double arithmetic") {
    const DoubleDouble third = DoubleDouble(1.0) / DoubleDouble(3.0);
    const DoubleDouble back = third * DoubleDouble(3.0);
    CHECK(std::abs((back - DoubleDouble(1.0)).to_double()) <= 1e-31);
    const DoubleDouble s = sqrt(DoubleDouble(2.0));
    CHECK(std::abs((s * s - DoubleDouble(2.0)).to_double()) <= 1e-30);
    const DoubleDouble big = DoubleDouble(1e16) + DoubleDouble(1.0);
    CHECK((big - DoubleDouble(1e16)).to_double() == 1.0);
}
