#include <cmath>

#include "doctest.h"
#include "json.hpp"

#include "bioconv/config.hpp"
#include "bioconv/verify.hpp"

using namespace bioconv;

namespace {

// Fourth-order central difference of f along axis a.
double d1(const ScalarFn& f, Point x, int a, double h) {
    const auto at = [&](double s) {
        Point y = x;
        y[static_cast<std::size_t>(a)] += s * h;
        return f(y);
    };
    return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
}

double d2(const ScalarFn& f, Point x, int a, double h) {
    const auto at = [&](double s) {
        Point y = x;
        y[static_cast<std::size_t>(a)] += s * h;
        return f(y);
    };
    return (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h * h);
}

ScalarFn component(const VectorFn& v, int a) {
    return [v, a](const Point& x) { return v(x)[static_cast<std::size_t>(a)]; };
}

struct PdeResidual {
    double momentum = 0.0;
    double divergence = 0.0;
    double bacteria = 0.0;
    double oxygen = 0.0;
};

// Residual of the continuous equations at x, using only the fields and r.
PdeResidual pde_residual(const MmsCase& mc, const Point& x) {
    const double h = 1e-3;
    const auto& g = mc.groups;
    const double nbar = mc.alpha1 / mc.domain.measure();
    const double cbar = mc.alpha2 / mc.domain.measure();
    const ScalarFn n = [&](const Point& y) { return nbar + mc.n_hat(y); };
    const ScalarFn c = [&](const Point& y) { return cbar + mc.c_hat(y); };
    const Point u = mc.u(x);
    PdeResidual res;
    const Point F = mc.F(x);
    for (int i = 0; i < 3; ++i) {
        const ScalarFn ui = component(mc.u, i);
        double lap = 0.0, adv = 0.0;
        for (int j = 0; j < 3; ++j) {
            lap += d2(ui, x, j, h);
            adv += u[static_cast<std::size_t>(j)] * d1(ui, x, j, h);
        }
        double lhs = -g.S_c * lap + adv + g.S_c * d1(mc.p, x, i, h);
        if (i == 2) lhs += g.gamma * g.S_c * mc.gravity * mc.n_hat(x);
        res.momentum = std::max(res.momentum, std::abs(lhs - F[static_cast<std::size_t>(i)]));
        res.divergence += d1(ui, x, i, h);
    }
    res.divergence = std::abs(res.divergence);

    double lap_n = 0.0, lap_c = 0.0, adv_n = 0.0, adv_c = 0.0, chem = 0.0;
    for (int j = 0; j < 3; ++j) {
        lap_n += d2(n, x, j, h);
        lap_c += d2(c, x, j, h);
        adv_n += u[static_cast<std::size_t>(j)] * d1(n, x, j, h);
        adv_c += u[static_cast<std::size_t>(j)] * d1(c, x, j, h);
        const ScalarFn flux = [&, j](const Point& y) { return n(y) * mc.r(c(y)) * d1(c, y, j, h); };
        chem += d1(flux, x, j, 1e-2);
    }
    res.bacteria = std::abs(-lap_n + adv_n + g.chi * chem - mc.f_n(x));
    res.oxygen = std::abs(-g.delta * lap_c + adv_c + g.beta * mc.r(c(x)) * n(x) - mc.f_c(x));
    return res;
}

PicardOptions tight() {
    PicardOptions o;
    o.tolerance = 1e-12;
    return o;
}

RunConfig small_config(int cells) {
    RunConfig cfg = load_config(BIOCONV_SOURCE_DIR "/configs/small_data.toml");
    cfg.cells = {cells, cells, cells};
    return cfg;
}

}  // namespace

TEST_CASE("manufactured case registry") {
    const auto names = mms_case_names();
    CHECK(names == std::vector<std::string>{"rest", "stratified"});
    for (const auto& n : names) CHECK(mms_case(n).name == n);
    CHECK_THROWS_AS(mms_case("vortex"), std::invalid_argument);
}

TEST_CASE("rest case has vanishing sources") {
    const MmsCase mc = mms_case("rest");
    for (double t : {0.1, 0.37, 0.5, 0.93}) {
        const Point x{t, 1.0 - t, 0.5 * t};
        CHECK(mc.f_n(x) == 0.0);
        CHECK(mc.f_c(x) == 0.0);
        CHECK(mc.F(x) == Point{0.0, 0.0, 0.0});
    }
    // background oxygen lies outside the support of r
    CHECK(mc.r(mc.alpha2 / mc.domain.measure()) == 0.0);
}

TEST_CASE("stratified sources satisfy the continuous equations") {
    const MmsCase mc = mms_case("stratified");
    double worst_m = 0.0, worst_d = 0.0, worst_n = 0.0, worst_c = 0.0;
    for (double a : {0.13, 0.41, 0.77})
        for (double b : {0.22, 0.58})
            for (double z : {0.09, 0.5, 0.86}) {
                const PdeResidual r = pde_residual(mc, {a, b, z});
                worst_m = std::max(worst_m, r.momentum);
                worst_d = std::max(worst_d, r.divergence);
                worst_n = std::max(worst_n, r.bacteria);
                worst_c = std::max(worst_c, r.oxygen);
            }
    CHECK(worst_m < 1e-6);
    CHECK(worst_d < 1e-8);
    CHECK(worst_n < 1e-6);
    CHECK(worst_c < 1e-6);
}

TEST_CASE("manufactured fields satisfy the wall conditions") {
    CHECK(mms_boundary_residual(mms_case("stratified")) <= 1e-12);
    CHECK(mms_boundary_residual(mms_case("rest")) == 0.0);
}

TEST_CASE("observed orders") {
    const std::vector<double> e{4.0, 1.0, 0.25};
    const auto o = observed_orders(e);
    REQUIRE(o.size() == 2);
    CHECK(o[0] == 2.0);
    CHECK(o[1] == 2.0);
    CHECK(observed_orders(std::vector<double>{1.0}).empty());
}

TEST_CASE("convergence study validates its grid sequence") {
    CHECK_THROWS_AS(convergence_study("stratified", {4, 8}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study("stratified", {4, 8, 12}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study("vortex", {4, 8, 16}), std::invalid_argument);
}

TEST_CASE("rest case is reproduced to machine precision") {
    const ConvergenceTable t = convergence_study("rest", {4, 8, 16}, tight());
    CHECK(t.machine_precision);
    for (const auto& r : t.rows) {
        CHECK(r.errors.u_v <= 1e-12);
        CHECK(r.errors.n_h1 <= 1e-12);
        CHECK(r.errors.c_h1 <= 1e-12);
    }
    const auto j = nlohmann::json::parse(t.to_json());
    CHECK(j["machine_precision"] == true);
    CHECK(j["rows"].size() == 3);
}

TEST_CASE("stratified case converges at second order on coarse grids") {
    const ConvergenceTable t = convergence_study("stratified", {4, 8, 16}, tight());
    REQUIRE(t.rows.size() == 3);
    CHECK(std::isnan(t.rows[0].order_n));
    CHECK(t.non_monotone.empty());
    CHECK_FALSE(t.machine_precision);
    // the coarsest pair is pre-asymptotic; the finer one must be close to 2
    CHECK(t.rows[2].order_n > 1.8);
    CHECK(t.rows[2].order_c > 1.8);
    CHECK(t.rows[2].order_u > 1.8);
    CHECK(t.to_csv().find("case,cells,h,err_n_h1") == 0);
    CHECK(t.to_text().find("stratified") != std::string::npos);
}

TEST_CASE("solves are bitwise deterministic") {
    const MmsCase mc = mms_case("stratified");
    const MacGrid g(mc.domain, {8, 8, 8});
    const ProblemData d = discretize(mc, g);
    const SolveOutcome a = solve_stationary(FieldState(g, mc.alpha1, mc.alpha2), d, tight());
    const SolveOutcome b = solve_stationary(FieldState(g, mc.alpha1, mc.alpha2), d, tight());
    CHECK(a.state.u.flatten() == b.state.u.flatten());
    CHECK(a.state.p.values() == b.state.p.values());
    CHECK(a.state.n_hat.values() == b.state.n_hat.values());
    CHECK(a.state.c_hat.values() == b.state.c_hat.values());
    CHECK(a.report.iterations == b.report.iterations);
}

TEST_CASE("discretize rejects a grid on another domain") {
    const MmsCase mc = mms_case("stratified");
    CHECK_THROWS_AS(discretize(mc, MacGrid(ChamberDomain(2.0, 1.0, 1.0), {4, 4, 4})), std::invalid_argument);
}

TEST_CASE("a-priori audit against certificate bounds") {
    const RunConfig cfg = small_config(8);
    const Certificate cert = make_certificate(cfg);
    const MacGrid g = make_grid(cfg);

    const AprioriAudit zero = audit_apriori(FieldState(g, cfg.alpha1, cfg.alpha2), cert);
    REQUIRE(zero.checks.size() == 3);
    CHECK(zero.all_pass());
    CHECK(zero.checks[0].name == "n_hat_h1");
    CHECK(zero.checks[1].name == "u_v");
    CHECK(zero.checks[2].name == "c_hat_h1");

    // a state far above every bound
    FieldState big = random_state(g, cfg.alpha1, cfg.alpha2, 5, 10.0);
    const AprioriAudit bad = audit_apriori(big, cert);
    CHECK_FALSE(bad.all_pass());
    for (const auto& c : bad.checks) CHECK(c.margin == doctest::Approx(c.bound - c.value));

    // undefined bounds never pass
    RunConfig forced = cfg;
    forced.overrides.C_tr = 0.9;
    const AprioriAudit undefined = audit_apriori(FieldState(g, cfg.alpha1, cfg.alpha2), make_certificate(forced));
    CHECK_FALSE(undefined.all_pass());
    const auto j = nlohmann::json::parse(undefined.to_json());
    CHECK(j["checks"][0]["bound"].is_null());
}

TEST_CASE("flux audit of a solved state") {
    const RunConfig cfg = small_config(8);
    const ProblemData d = make_problem(cfg);
    const SolveOutcome out = solve_stationary(FieldState(d.grid, cfg.alpha1, cfg.alpha2), d, tight());
    const FluxAudit a = flux_audit(out.state, d);
    CHECK(a.bacteria_flux < 1e-10);
    CHECK(a.divergence < 1e-9);
    CHECK(a.mean_n_hat == 0.0);
    CHECK(a.mean_c_hat == 0.0);
    CHECK(coupled_residual(out.state, d) < 1e-8);
}

TEST_CASE("Newton oracle: zero data and small data on 4^3") {
    RunConfig cfg = small_config(4);
    cfg.sources = {};
    const OracleComparison zero = oracle_equivalence(make_problem(cfg), tight());
    CHECK(zero.picard_converged);
    CHECK(zero.newton_converged);
    CHECK(zero.max_discrepancy < 1e-12);

    const OracleComparison small = oracle_equivalence(make_problem(small_config(4)), tight());
    CHECK(small.picard_converged);
    CHECK(small.newton_converged);
    CHECK(small.newton_residual < 1e-12);
    CHECK(small.max_discrepancy < 1e-8);
    CHECK(small.message.empty());
}

TEST_CASE("Newton oracle refuses unsupported problems") {
    RunConfig cfg = small_config(4);
    cfg.solver.oxygen_top = OxygenTopBc::dirichlet;
    const ProblemData d = make_problem(cfg);
    CHECK_THROWS_AS(newton_solve(d, FieldState(d.grid, cfg.alpha1, cfg.alpha2)), std::invalid_argument);
    const ProblemData big = make_problem(small_config(24));
    CHECK_THROWS_AS(newton_solve(big, FieldState(big.grid, cfg.alpha1, cfg.alpha2)), std::invalid_argument);
}

TEST_CASE("oracle comparison reports a divergent Picard run") {
    RunConfig cfg = small_config(4);
    cfg.groups.chi = 50.0;
    cfg.groups.beta = 50.0;
    cfg.sources.f_n_amplitude = 1.0;
    PicardOptions o = tight();
    o.max_outer = 60;
    const OracleComparison cmp = oracle_equivalence(make_problem(cfg), o);
    CHECK_FALSE(cmp.picard_converged);
    CHECK(cmp.message.find("Picard") != std::string::npos);
}
