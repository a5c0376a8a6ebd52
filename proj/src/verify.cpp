#include "bioconv/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "bioconv/assembly.hpp"

namespace bioconv {

namespace {

constexpr double kPi = std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

MmsCase rest_case() {
    MmsCase mc;
    mc.name = "rest";
    mc.groups = {1.0, 0.5, 0.2, 1.5, 0.5};
    // c = 0.8 lies beyond the support [0, 0.3] of r, so consumption vanishes
    mc.r = default_consumption_function(0.2, 0.1);
    mc.alpha1 = 0.5;
    mc.alpha2 = 0.8;
    const auto zero_s = [](const Point&) { return 0.0; };
    const auto zero_v = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
    mc.u = zero_v;
    mc.p = zero_s;
    mc.n_hat = zero_s;
    mc.c_hat = zero_s;
    mc.grad_n_hat = zero_v;
    mc.grad_c_hat = zero_v;
    mc.f_n = zero_s;
    mc.f_c = zero_s;
    mc.F = zero_v;
    return mc;
}

MmsCase stratified_case() {
    MmsCase mc;
    mc.name = "stratified";
    mc.groups = {1.0, 0.5, 0.2, 1.5, 0.5};
    mc.gravity = 1.0;
    mc.r = default_consumption_function(1.2, 1.0);
    mc.alpha1 = 0.5;
    mc.alpha2 = 0.5;
    const double U = 0.5, P = 0.3, en = 0.1, ec = 0.2;
    const double L1 = mc.domain.edge(0), L2 = mc.domain.edge(1), L3 = mc.domain.edge(2);
    const double k1 = kPi / L1, k2 = kPi / L2, k3 = kPi / L3;
    const double nbar = mc.alpha1 / mc.domain.measure();
    const double cbar = mc.alpha2 / mc.domain.measure();
    const DimensionlessGroups gr = mc.groups;
    const double grav = mc.gravity;
    const ConsumptionFunction r = mc.r;

    // u = curl-type field of psi = U sin^2(k1 x) sin^2(k2 y) sin(k3 z): (d_y psi, -d_x psi, 0)
    struct Vel {
        Point u;
        Point lap;
        std::array<Point, 3> grad;  // grad[i][j] = d_j u_i
    };
    const auto vel = [=](const Point& x) {
        const double a = k1 * x[0], b = k2 * x[1], z = k3 * x[2];
        const double sa = std::sin(a), sb = std::sin(b), Z = std::sin(z), Zc = std::cos(z);
        const double s2a = std::sin(2 * a), s2b = std::sin(2 * b), c2a = std::cos(2 * a), c2b = std::cos(2 * b);
        Vel v{};
        v.u = {U * k2 * sa * sa * s2b * Z, -U * k1 * s2a * sb * sb * Z, 0.0};
        v.grad[0] = {U * k2 * k1 * s2a * s2b * Z, U * k2 * k2 * 2 * sa * sa * c2b * Z, U * k2 * k3 * sa * sa * s2b * Zc};
        v.grad[1] = {-U * k1 * k1 * 2 * c2a * sb * sb * Z, -U * k1 * k2 * s2a * s2b * Z, -U * k1 * k3 * s2a * sb * sb * Zc};
        v.grad[2] = {0.0, 0.0, 0.0};
        v.lap = {U * k2 * (2 * k1 * k1 * c2a * s2b * Z - 4 * k2 * k2 * sa * sa * s2b * Z - k3 * k3 * sa * sa * s2b * Z),
                 -U * k1 * (-4 * k1 * k1 * s2a * sb * sb * Z + 2 * k2 * k2 * s2a * c2b * Z - k3 * k3 * s2a * sb * sb * Z),
                 0.0};
        return v;
    };
    const auto nfun = [=](const Point& x) {
        return en * (std::cos(k3 * x[2]) + 0.5 * std::cos(k1 * x[0]) * std::cos(k2 * x[1]));
    };
    const auto ngrad = [=](const Point& x) {
        return Point{-0.5 * en * k1 * std::sin(k1 * x[0]) * std::cos(k2 * x[1]),
                     -0.5 * en * k2 * std::cos(k1 * x[0]) * std::sin(k2 * x[1]), -en * k3 * std::sin(k3 * x[2])};
    };
    const auto nlap = [=](const Point& x) {
        return -en * (k3 * k3 * std::cos(k3 * x[2]) + 0.5 * (k1 * k1 + k2 * k2) * std::cos(k1 * x[0]) * std::cos(k2 * x[1]));
    };
    const auto cfun = [=](const Point& x) { return ec * std::cos(k3 * x[2]); };
    const auto cgrad = [=](const Point& x) { return Point{0.0, 0.0, -ec * k3 * std::sin(k3 * x[2])}; };
    const auto clap = [=](const Point& x) { return -ec * k3 * k3 * std::cos(k3 * x[2]); };
    const auto pgrad = [=](const Point& x) {
        const double ca = std::cos(k1 * x[0]), cb = std::cos(k2 * x[1]), cz = std::cos(k3 * x[2]);
        return Point{-P * k1 * std::sin(k1 * x[0]) * cb * cz, -P * k2 * ca * std::sin(k2 * x[1]) * cz,
                     -P * k3 * ca * cb * std::sin(k3 * x[2])};
    };
    const auto dotp = [](const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };

    mc.u = [=](const Point& x) { return vel(x).u; };
    mc.p = [=](const Point& x) { return P * std::cos(k1 * x[0]) * std::cos(k2 * x[1]) * std::cos(k3 * x[2]); };
    mc.n_hat = nfun;
    mc.c_hat = cfun;
    mc.grad_n_hat = ngrad;
    mc.grad_c_hat = cgrad;
    mc.F = [=](const Point& x) {
        const Vel v = vel(x);
        const Point gp = pgrad(x);
        Point out{};
        for (std::size_t i = 0; i < 3; ++i) out[i] = -gr.S_c * v.lap[i] + dotp(v.u, v.grad[i]) + gr.S_c * gp[i];
        out[2] += gr.gamma * gr.S_c * grav * nfun(x);  // minus gamma S_c n_hat (0,0,-g)
        return out;
    };
    mc.f_n = [=](const Point& x) {
        const Point u = vel(x).u;
        const Point gn = ngrad(x), gc = cgrad(x);
        const double n = nbar + nfun(x), c = cbar + cfun(x);
        const double chem = r(c) * dotp(gn, gc) + n * r.slope(c) * dotp(gc, gc) + n * r(c) * clap(x);
        return -nlap(x) + dotp(u, gn) + gr.chi * chem;
    };
    mc.f_c = [=](const Point& x) {
        const Point u = vel(x).u;
        const double n = nbar + nfun(x), c = cbar + cfun(x);
        return -gr.delta * clap(x) + dotp(u, cgrad(x)) + gr.beta * r(c) * n;
    };
    return mc;
}

template <class F>
void each_cell(const MacGrid& g, F&& f) {
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) f(i, j, k);
}

template <class F>
void each_interior_face(const MacGrid& g, int a, F&& f) {
    const auto d = g.face_dims(a);
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i)
                if (!g.boundary_face(a, i, j, k)) f(i, j, k);
}

ScalarField sample(const MacGrid& g, const ScalarFn& fn) {
    ScalarField s(g);
    each_cell(g, [&](int i, int j, int k) { s.at(i, j, k) = fn(g.cell_position(i, j, k)); });
    return s;
}

VectorField sample(const MacGrid& g, const VectorFn& fn) {
    VectorField v(g);
    for (int a = 0; a < 3; ++a)
        each_interior_face(g, a, [&](int i, int j, int k) {
            v.at(a, i, j, k) = fn(g.face_position(a, i, j, k))[static_cast<std::size_t>(a)];
        });
    return v;
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(6) << std::scientific << v;
    return os.str();
}

nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::vector<std::string> mms_case_names() { return {"rest", "stratified"}; }

MmsCase mms_case(const std::string& name) {
    if (name == "rest") return rest_case();
    if (name == "stratified") return stratified_case();
    throw std::invalid_argument("unknown manufactured case '" + name + "'");
}

ProblemData discretize(const MmsCase& mc, const MacGrid& grid) {
    if (grid.domain().edges() != mc.domain.edges())
        throw std::invalid_argument("discretize: grid domain differs from the case domain");
    ProblemData d(grid);
    d.groups = mc.groups;
    d.gravity = mc.gravity;
    d.r = mc.r;
    d.alpha1 = mc.alpha1;
    d.alpha2 = mc.alpha2;
    d.f_n = sample(grid, mc.f_n);
    d.f_c = sample(grid, mc.f_c);
    d.F = sample(grid, mc.F);
    return d;
}

FieldState sample_exact(const MmsCase& mc, const MacGrid& grid) {
    FieldState s(grid, mc.alpha1, mc.alpha2);
    s.u = sample(grid, mc.u);
    s.p = sample(grid, mc.p);
    project_zero_sum(s.p.values());
    s.n_hat = sample(grid, mc.n_hat);
    s.c_hat = sample(grid, mc.c_hat);
    enforce_means(s);
    return s;
}

double mms_boundary_residual(const MmsCase& mc, int samples) {
    const auto& L = mc.domain.edges();
    double worst = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        for (int side = 0; side < 2; ++side) {
            for (int a = 0; a <= samples; ++a)
                for (int b = 0; b <= samples; ++b) {
                    Point x{};
                    const int t0 = (axis + 1) % 3, t1 = (axis + 2) % 3;
                    x[static_cast<std::size_t>(axis)] = side * L[static_cast<std::size_t>(axis)];
                    x[static_cast<std::size_t>(t0)] = L[static_cast<std::size_t>(t0)] * a / samples;
                    x[static_cast<std::size_t>(t1)] = L[static_cast<std::size_t>(t1)] * b / samples;
                    const Point u = mc.u(x);
                    for (double v : u) worst = std::max(worst, std::abs(v));
                    for (const VectorFn* f : {&mc.grad_n_hat, &mc.grad_c_hat})
                        worst = std::max(worst, std::abs((*f)(x)[static_cast<std::size_t>(axis)]));
                }
        }
    }
    return worst;
}

MmsErrors mms_errors(const FieldState& computed, const FieldState& exact) {
    FieldState d = computed;
    d.u -= exact.u;
    d.n_hat -= exact.n_hat;
    d.c_hat -= exact.c_hat;
    return {h1_seminorm(d.n_hat), h1_seminorm(d.c_hat), v_norm(d.u)};
}

std::vector<double> observed_orders(std::span<const double> errors) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) out.push_back(std::log2(errors[i] / errors[i + 1]));
    return out;
}

double ConvergenceTable::min_order_n() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) m = std::min(m, rows[i].order_n);
    return m;
}
double ConvergenceTable::min_order_c() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) m = std::min(m, rows[i].order_c);
    return m;
}
double ConvergenceTable::min_order_u() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) m = std::min(m, rows[i].order_u);
    return m;
}

std::string ConvergenceTable::to_text() const {
    std::ostringstream os;
    os << "case " << case_name << "\n";
    os << std::left << std::setw(8) << "cells" << std::setw(14) << "h" << std::setw(14) << "err_n_h1" << std::setw(8)
       << "order" << std::setw(14) << "err_c_h1" << std::setw(8) << "order" << std::setw(14) << "err_u_v"
       << std::setw(8) << "order" << "picard\n";
    for (const auto& r : rows) {
        auto ord = [](double v) {
            if (std::isnan(v)) return std::string("-");
            std::ostringstream o;
            o << std::fixed << std::setprecision(3) << v;
            return o.str();
        };
        os << std::left << std::setw(8) << r.cells << std::setw(14) << num(r.h) << std::setw(14) << num(r.errors.n_h1)
           << std::setw(8) << ord(r.order_n) << std::setw(14) << num(r.errors.c_h1) << std::setw(8) << ord(r.order_c)
           << std::setw(14) << num(r.errors.u_v) << std::setw(8) << ord(r.order_u) << r.picard_iterations << "\n";
    }
    if (machine_precision) os << "errors at machine precision on every grid\n";
    for (const auto& f : non_monotone) os << "warning: non-monotone errors for " << f << "\n";
    return os.str();
}

std::string ConvergenceTable::to_csv() const {
    std::ostringstream os;
    os << "case,cells,h,err_n_h1,order_n,err_c_h1,order_c,err_u_v,order_u,picard_iterations\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << case_name << "," << r.cells << "," << r.h << "," << r.errors.n_h1 << "," << r.order_n << ","
           << r.errors.c_h1 << "," << r.order_c << "," << r.errors.u_v << "," << r.order_u << "," << r.picard_iterations
           << "\n";
    }
    return os.str();
}

std::string ConvergenceTable::to_json(int indent) const {
    nlohmann::json j;
    j["kind"] = "convergence";
    j["case"] = case_name;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["rows"].push_back({{"cells", r.cells},
                             {"h", r.h},
                             {"err_n_h1", jnum(r.errors.n_h1)},
                             {"err_c_h1", jnum(r.errors.c_h1)},
                             {"err_u_v", jnum(r.errors.u_v)},
                             {"order_n", jnum(r.order_n)},
                             {"order_c", jnum(r.order_c)},
                             {"order_u", jnum(r.order_u)},
                             {"picard_iterations", r.picard_iterations}});
    }
    j["non_monotone"] = non_monotone;
    j["machine_precision"] = machine_precision;
    return j.dump(indent);
}

ConvergenceTable convergence_study(const std::string& case_name, const std::vector<int>& grids,
                                   const PicardOptions& opts, int jobs) {
    if (grids.size() < 3) throw std::invalid_argument("convergence_study: at least three grids are required");
    for (std::size_t i = 1; i < grids.size(); ++i) {
        if (grids[i] != 2 * grids[i - 1])
            throw std::invalid_argument("convergence_study: grids must form a halving sequence");
    }
    if (jobs < 1) throw std::invalid_argument("convergence_study: jobs must be >= 1");
    const MmsCase mc = mms_case(case_name);
    ConvergenceTable table;
    table.case_name = case_name;
    table.rows.resize(grids.size());

    const auto solve_row = [&](std::size_t idx) {
        const int n = grids[idx];
        const MacGrid g(mc.domain, {n, n, n});
        const ProblemData data = discretize(mc, g);
        const SolveOutcome out = solve_stationary(FieldState(g, mc.alpha1, mc.alpha2), data, opts);
        ConvergenceRow& row = table.rows[idx];
        row.cells = n;
        row.h = g.h(0);
        row.errors = mms_errors(out.state, sample_exact(mc, g));
        row.picard_iterations = out.report.iterations;
    };
    if (jobs == 1) {
        for (std::size_t i = 0; i < grids.size(); ++i) solve_row(i);
    } else {
        // largest grids first so the long solves start early
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(grids.size());
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(grids.size())); ++t) {
            pool.emplace_back([&] {
                for (std::size_t k; (k = next++) < grids.size();) {
                    const std::size_t idx = grids.size() - 1 - k;
                    try {
                        solve_row(idx);
                    } catch (...) {
                        errors[idx] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        ConvergenceRow& row = table.rows[i];
        row.order_n = row.order_c = row.order_u = kNaN;
        if (i > 0) {
            const auto& prev = table.rows[i - 1].errors;
            row.order_n = std::log2(prev.n_h1 / row.errors.n_h1);
            row.order_c = std::log2(prev.c_h1 / row.errors.c_h1);
            row.order_u = std::log2(prev.u_v / row.errors.u_v);
        }
    }
    bool tiny = true;
    for (const auto& r : table.rows)
        tiny = tiny && r.errors.n_h1 < 1e-12 && r.errors.c_h1 < 1e-12 && r.errors.u_v < 1e-12;
    table.machine_precision = tiny;
    if (!tiny) {
        const auto check = [&](const char* name, auto get) {
            for (std::size_t i = 1; i < table.rows.size(); ++i)
                if (!(get(table.rows[i].errors) < get(table.rows[i - 1].errors))) {
                    table.non_monotone.emplace_back(name);
                    return;
                }
        };
        check("n", [](const MmsErrors& e) { return e.n_h1; });
        check("c", [](const MmsErrors& e) { return e.c_h1; });
        check("u", [](const MmsErrors& e) { return e.u_v; });
    }
    return table;
}

bool AprioriAudit::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AprioriCheck& c) { return c.pass; });
}

std::string AprioriAudit::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << "apriori." << c.name << " = " << (c.pass ? "PASS" : "FAIL") << "  value=" << num(c.value)
           << " bound=" << num(c.bound) << " margin=" << num(c.margin) << "\n";
    }
    return os.str();
}

std::string AprioriAudit::to_json(int indent) const {
    nlohmann::json j;
    j["kind"] = "apriori_audit";
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
        j["checks"].push_back(
            {{"name", c.name}, {"value", jnum(c.value)}, {"bound", jnum(c.bound)}, {"margin", jnum(c.margin)}, {"pass", c.pass}});
    j["all_pass"] = all_pass();
    return j.dump(indent);
}

AprioriAudit audit_apriori(const FieldState& state, const Certificate& certificate) {
    const DiscreteNorms d = discrete_norms(state);
    AprioriAudit audit;
    const auto add = [&](const char* name, double value, double bound) {
        AprioriCheck c{name, value, bound, bound - value, false};
        c.pass = std::isfinite(bound) && value <= bound;
        audit.checks.push_back(c);
    };
    add("n_hat_h1", d.n_h1, certificate.apriori.n_bound);
    add("u_v", d.u_v, certificate.apriori.u_bound);
    add("c_hat_h1", d.c_h1, certificate.apriori.c_bound);
    return audit;
}

FluxAudit flux_audit(const FieldState& state, const ProblemData& data) {
    FluxAudit a;
    const ScalarField n = state.n();
    const ScalarField c = state.c();
    const BoundaryGhosts cg = oxygen_ghosts(c, data.oxygen_top, data.alpha2 / data.grid.measure());
    const BoundaryGhosts ng = bacteria_ghosts(n, c, cg, data.r, data.groups.chi);
    a.bacteria_flux = bacteria_boundary_flux_residual(n, c, ng, cg, data.r, data.groups.chi);
    a.divergence = l2_norm(divergence_no_penetration(state.u));
    a.mean_n_hat = mean(state.n_hat);
    a.mean_c_hat = mean(state.c_hat);
    return a;
}

// Newton oracle ---------------------------------------------------------------

namespace {

struct CoupledLayout {
    explicit CoupledLayout(const MacGrid& g) : grid(g) {
        for (int a = 0; a < 3; ++a)
            each_interior_face(g, a, [&](int i, int j, int k) {
                faces.push_back(face_offset(g, a) + g.face_index(a, i, j, k));
            });
        nc = g.cell_count();
    }
    [[nodiscard]] std::size_t size() const { return faces.size() + 3 * nc + 3; }
    [[nodiscard]] std::size_t p0() const { return faces.size(); }
    [[nodiscard]] std::size_t n0() const { return faces.size() + nc; }
    [[nodiscard]] std::size_t c0() const { return faces.size() + 2 * nc; }
    [[nodiscard]] std::size_t mu0() const { return faces.size() + 3 * nc; }

    MacGrid grid;
    std::vector<std::size_t> faces;
    std::size_t nc = 0;
};

std::vector<double> pack(const CoupledLayout& L, const FieldState& s, const std::array<double, 3>& mu) {
    std::vector<double> x(L.size(), 0.0);
    const auto uf = s.u.flatten();
    for (std::size_t q = 0; q < L.faces.size(); ++q) x[q] = uf[L.faces[q]];
    for (std::size_t q = 0; q < L.nc; ++q) {
        x[L.p0() + q] = s.p[q];
        x[L.n0() + q] = s.n_hat[q];
        x[L.c0() + q] = s.c_hat[q];
    }
    for (std::size_t m = 0; m < 3; ++m) x[L.mu0() + m] = mu[m];
    return x;
}

FieldState unpack(const CoupledLayout& L, std::span<const double> x, double a1, double a2) {
    const MacGrid& g = L.grid;
    FieldState s(g, a1, a2);
    std::vector<double> uf(g.face_count(0) + g.face_count(1) + g.face_count(2), 0.0);
    for (std::size_t q = 0; q < L.faces.size(); ++q) uf[L.faces[q]] = x[q];
    s.u = VectorField::unflatten(g, uf);
    for (std::size_t q = 0; q < L.nc; ++q) {
        s.p[q] = x[L.p0() + q];
        s.n_hat[q] = x[L.n0() + q];
        s.c_hat[q] = x[L.c0() + q];
    }
    return s;
}

// Coupled residual without the multipliers, packed like the unknowns
// (the last three slots hold the sums of p, n_hat, c_hat).
std::vector<double> raw_residual(const CoupledLayout& L, const FieldState& s, const ProblemData& d) {
    const MacGrid& g = L.grid;
    const auto& gr = d.groups;
    VectorField mom = laplacian_velocity(s.u);
    mom *= -gr.S_c;
    mom += advect_velocity(s.u, s.u);
    VectorField gp = gradient(s.p);
    gp *= gr.S_c;
    mom += gp;
    mom -= buoyancy_force(s.n_hat, gr, d.gravity);
    mom -= d.F;
    const ScalarField div = divergence_no_penetration(s.u);

    const ScalarField n = s.n(), c = s.c();
    ScalarField rn = laplacian_scalar(s.n_hat);
    rn *= -1.0;
    rn += advect_scalar(s.u, s.n_hat);
    rn += chemotaxis_term(n, c, d.r, gr.chi);
    rn -= d.f_n;

    ScalarField rc = laplacian_scalar(s.c_hat);
    rc *= -gr.delta;
    rc += advect_scalar(s.u, s.c_hat);
    for (std::size_t q = 0; q < rc.size(); ++q) rc[q] += gr.beta * d.r(c[q]) * n[q];
    rc -= d.f_c;

    std::vector<double> out(L.size(), 0.0);
    const auto mf = mom.flatten();
    for (std::size_t q = 0; q < L.faces.size(); ++q) out[q] = mf[L.faces[q]];
    double sp = 0.0, sn = 0.0, sc = 0.0;
    for (std::size_t q = 0; q < L.nc; ++q) {
        out[L.p0() + q] = div[q];
        out[L.n0() + q] = rn[q];
        out[L.c0() + q] = rc[q];
        sp += s.p[q];
        sn += s.n_hat[q];
        sc += s.c_hat[q];
    }
    out[L.mu0()] = sp;
    out[L.mu0() + 1] = sn;
    out[L.mu0() + 2] = sc;
    (void)g;
    return out;
}

std::vector<double> full_residual(const CoupledLayout& L, std::span<const double> x, const ProblemData& d) {
    const FieldState s = unpack(L, x, d.alpha1, d.alpha2);
    std::vector<double> r = raw_residual(L, s, d);
    for (std::size_t q = 0; q < L.nc; ++q) {
        r[L.p0() + q] += x[L.mu0()];
        r[L.n0() + q] += x[L.mu0() + 1];
        r[L.c0() + q] += x[L.mu0() + 2];
    }
    return r;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double coupled_residual(const FieldState& state, const ProblemData& data) {
    const CoupledLayout L(data.grid);
    std::vector<double> r = raw_residual(L, state, data);
    for (std::size_t block : {L.p0(), L.n0(), L.c0()}) {
        double m = 0.0;
        for (std::size_t q = 0; q < L.nc; ++q) m += r[block + q];
        m /= static_cast<double>(L.nc);
        for (std::size_t q = 0; q < L.nc; ++q) r[block + q] -= m;
    }
    return max_abs(std::span<const double>(r).first(L.mu0()));
}

NewtonResult newton_solve(const ProblemData& data, const FieldState& initial, double tol, int max_iterations) {
    if (data.oxygen_top != OxygenTopBc::neumann)
        throw std::invalid_argument("newton_solve: only the Neumann oxygen top condition is supported");
    const CoupledLayout L(data.grid);
    const std::size_t N = L.size();
    if (N > 20000) throw std::invalid_argument("newton_solve: more than 20000 unknowns");
    NewtonResult res{initial, false, 0, 0.0, {}, {}};
    std::vector<double> x = pack(L, initial, {0.0, 0.0, 0.0});
    std::vector<double> r = full_residual(L, x, data);
    double scale = 1.0;
    for (std::size_t q = 0; q < L.mu0(); ++q) scale = std::max(scale, std::abs(r[q]));
    res.residual = max_abs(r);
    res.history.push_back(res.residual);

    for (int it = 1; it <= max_iterations && !(res.residual <= tol * scale); ++it) {
        DenseMatrix J(N, N);
        for (std::size_t j = 0; j < N; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
            const double xj = x[j];
            x[j] = xj + h;
            const auto rp = full_residual(L, x, data);
            x[j] = xj - h;
            const auto rm = full_residual(L, x, data);
            x[j] = xj;
            for (std::size_t i = 0; i < N; ++i) J(i, j) = (rp[i] - rm[i]) / (2.0 * h);
        }
        std::vector<double> step;
        try {
            step = LuFactorization(std::move(J)).solve(r);
        } catch (const SingularMatrixError& e) {
            res.message = std::string("singular Jacobian: ") + e.what();
            res.state = unpack(L, x, data.alpha1, data.alpha2);
            return res;
        }
        for (std::size_t q = 0; q < N; ++q) x[q] -= step[q];
        r = full_residual(L, x, data);
        res.residual = max_abs(r);
        res.history.push_back(res.residual);
        res.iterations = it;
        if (!std::isfinite(res.residual)) break;
    }
    res.converged = res.residual <= tol * scale;
    if (!res.converged) {
        res.message = "Newton did not reach residual " + num(tol * scale) + " (last " + num(res.residual) + ")";
    }
    res.state = unpack(L, x, data.alpha1, data.alpha2);
    return res;
}

OracleComparison oracle_equivalence(const ProblemData& data, const PicardOptions& opts) {
    OracleComparison cmp;
    const FieldState zero(data.grid, data.alpha1, data.alpha2);
    FieldState picard = zero;
    try {
        const SolveOutcome out = solve_stationary(zero, data, opts);
        picard = out.state;
        cmp.picard_converged = out.report.converged;
        cmp.picard_iterations = out.report.iterations;
    } catch (const PicardDivergence& e) {
        cmp.message = std::string("Picard: ") + e.what();
    }
    const NewtonResult newton = newton_solve(data, zero);
    cmp.newton_converged = newton.converged;
    cmp.newton_iterations = newton.iterations;
    cmp.newton_residual = newton.residual;
    if (!newton.converged) cmp.message += (cmp.message.empty() ? "" : "; ") + ("Newton: " + newton.message);

    FieldState diff = picard;
    diff.u -= newton.state.u;
    diff.p -= newton.state.p;
    diff.n_hat -= newton.state.n_hat;
    diff.c_hat -= newton.state.c_hat;
    // absolute below a tiny reference, where a ratio would amplify roundoff
    const auto rel = [](double d, double ref) { return ref > 1e-12 ? d / ref : d; };
    cmp.discrepancy_u = rel(v_norm(diff.u), v_norm(newton.state.u));
    cmp.discrepancy_p = rel(l2_norm(diff.p), l2_norm(newton.state.p));
    cmp.discrepancy_n = rel(h1_norm(diff.n_hat), h1_norm(newton.state.n_hat));
    cmp.discrepancy_c = rel(h1_norm(diff.c_hat), h1_norm(newton.state.c_hat));
    cmp.max_discrepancy = std::max({cmp.discrepancy_u, cmp.discrepancy_p, cmp.discrepancy_n, cmp.discrepancy_c});
    if (!cmp.picard_converged && cmp.message.find("Picard") == std::string::npos)
        cmp.message += (cmp.message.empty() ? "" : "; ") + std::string("Picard did not converge");
    return cmp;
}

}  // namespace bioconv
