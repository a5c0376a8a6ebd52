#include "bioconv/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "bioconv/double_double.hpp"
#include "bioconv/grid.hpp"
#include "bioconv/linsolve.hpp"
#include "bioconv/operators.hpp"

namespace bioconv {

double DomainConstants::C_poi() const { return std::max(C_poi_dirichlet, C_poi_meanzero); }

double talenti_constant() {
    const double pi = std::numbers::pi;
    return 1.0 / std::sqrt(3.0 * pi) * std::cbrt(4.0 / std::sqrt(pi));
}

HypothesisViolation::HypothesisViolation(const std::string& inequality, double slack)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "existence hypothesis violated: " << inequality << " (slack " << slack << ")";
          return os.str();
      }()),
      inequality_(inequality),
      slack_(slack) {}

// Domain constants ---------------------------------------------------------

namespace {

std::string grid_tag(const std::array<int, 3>& n) {
    return "discrete " + std::to_string(n[0]) + "x" + std::to_string(n[1]) + "x" + std::to_string(n[2]);
}

// Smallest eigenvalue of an SPD operator (on the subspace kept by
// `project`) by inverse iteration with CG inner solves.
double smallest_eigenvalue(const LinearOperator& A, std::vector<double> x,
                           const std::function<void(std::span<double>)>& project) {
    if (project) project(x);
    const double nx = norm2(x);
    for (double& v : x) v /= nx;
    std::vector<double> y(x.size()), Ay(x.size());
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        const auto st = conjugate_gradient(A, x, y, Preconditioner::identity(), 1e-13, 5000, project);
        if (!st.converged && st.residual > 1e-10) throw std::runtime_error("smallest_eigenvalue: inner solve failed");
        A(y, Ay);
        const double yy = dot(y, y);
        const double next = dot(y, Ay) / yy;
        const double ny = std::sqrt(yy);
        for (std::size_t q = 0; q < x.size(); ++q) x[q] = y[q] / ny;
        if (it > 3 && std::abs(next - lambda) <= 1e-14 * next) return next;
        lambda = next;
    }
    return lambda;
}

double discrete_poincare_meanzero(const MacGrid& g) {
    LinearOperator A = [&g](std::span<const double> x, std::span<double> y) {
        ScalarField s(g, std::vector<double>(x.begin(), x.end()));
        const ScalarField l = laplacian_scalar(s, ScalarBoundary::neumann);
        for (std::size_t q = 0; q < y.size(); ++q) y[q] = -l[q];
    };
    auto project = [](std::span<double> v) {
        double s = 0.0;
        for (double a : v) s += a;
        s /= static_cast<double>(v.size());
        for (double& a : v) a -= s;
    };
    const auto start = random_zero_mean(g, 20231).values();
    return 1.0 / std::sqrt(smallest_eigenvalue(A, start, project));
}

double discrete_poincare_dirichlet(const MacGrid& g) {
    // Boundary faces are carried as identity rows with zero data.
    LinearOperator A = [&g](std::span<const double> x, std::span<double> y) {
        const VectorField u = VectorField::unflatten(g, x);
        VectorField l = laplacian_velocity(u);
        for (int m = 0; m < 3; ++m) {
            const auto d = g.face_dims(m);
            for (int k = 0; k < d[2]; ++k)
                for (int j = 0; j < d[1]; ++j)
                    for (int i = 0; i < d[0]; ++i) {
                        double& v = l.at(m, i, j, k);
                        v = g.boundary_face(m, i, j, k) ? u.at(m, i, j, k) : -v;
                    }
        }
        const auto flat = l.flatten();
        std::copy(flat.begin(), flat.end(), y.begin());
    };
    VectorField start(g);
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int m = 0; m < 3; ++m) {
        const auto d = g.face_dims(m);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i)
                    start.at(m, i, j, k) = g.boundary_face(m, i, j, k) ? 0.0 : U(rng);
    }
    return 1.0 / std::sqrt(smallest_eigenvalue(A, start.flatten(), {}));
}

// Gauss-Legendre nodes/weights on [0,1].
constexpr std::array<double, 4> kGaussX{0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                        0.9305681557970263};
constexpr std::array<double, 4> kGaussW{0.1739274225844269, 0.3260725774155731, 0.3260725774155731,
                                        0.1739274225844269};

// Ratio ||phi||_L1(boundary) / ||phi||_W11 for the trilinear hat at a node
// that is on the wall (true) or interior (false) along each axis.
double hat_trace_ratio(const std::array<double, 3>& h, const std::array<bool, 3>& on_wall) {
    struct Piece {
        double lo, len, slope;  // phi(x) = 1 - |x|/h restricted to [lo, lo+len]
    };
    std::array<std::vector<Piece>, 3> pieces;
    std::array<double, 3> integral{};
    for (int a = 0; a < 3; ++a) {
        pieces[a].push_back({0.0, h[a], -1.0 / h[a]});
        if (!on_wall[a]) pieces[a].push_back({-h[a], h[a], 1.0 / h[a]});
        integral[a] = on_wall[a] ? 0.5 * h[a] : h[a];
    }
    auto phi1 = [&](int a, double x) { return 1.0 - std::abs(x) / h[a]; };
    const double l1 = integral[0] * integral[1] * integral[2];
    double grad = 0.0;
    for (const auto& p0 : pieces[0])
        for (const auto& p1 : pieces[1])
            for (const auto& p2 : pieces[2])
                for (int q0 = 0; q0 < 4; ++q0)
                    for (int q1 = 0; q1 < 4; ++q1)
                        for (int q2 = 0; q2 < 4; ++q2) {
                            const double x0 = p0.lo + kGaussX[q0] * p0.len;
                            const double x1 = p1.lo + kGaussX[q1] * p1.len;
                            const double x2 = p2.lo + kGaussX[q2] * p2.len;
                            const double f0 = phi1(0, x0), f1 = phi1(1, x1), f2 = phi1(2, x2);
                            const double g0 = p0.slope * f1 * f2;
                            const double g1 = f0 * p1.slope * f2;
                            const double g2 = f0 * f1 * p2.slope;
                            const double w = kGaussW[q0] * p0.len * kGaussW[q1] * p1.len * kGaussW[q2] * p2.len;
                            grad += w * std::sqrt(g0 * g0 + g1 * g1 + g2 * g2);
                        }
    double boundary = 0.0;
    for (int a = 0; a < 3; ++a) {
        if (!on_wall[a]) continue;
        boundary += l1 / integral[a];
    }
    return boundary / (l1 + grad);
}

double discrete_trace_constant(const MacGrid& g) {
    const auto& L = g.domain().edges();
    // constant function: |boundary| / |Omega|
    double best = 2.0 * (1.0 / L[0] + 1.0 / L[1] + 1.0 / L[2]);
    const std::array<double, 3> h{g.h(0), g.h(1), g.h(2)};
    for (int mask = 1; mask < 8; ++mask) {
        const std::array<bool, 3> wall{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
        best = std::max(best, hat_trace_ratio(h, wall));
    }
    return best;
}

double discrete_trilinear_constant(const MacGrid& g) {
    double best = 0.0;
    for (std::uint64_t s = 0; s < 12; ++s) {
        const VectorField u = random_divergence_free(g, 1000 + 3 * s);
        const VectorField v = random_divergence_free(g, 1001 + 3 * s);
        const VectorField w = random_divergence_free(g, 1002 + 3 * s);
        const double b0 = std::abs(dot(advect_velocity(u, v), w)) / (v_norm(u) * v_norm(v) * v_norm(w));
        const ScalarField c = random_zero_mean(g, 5000 + 2 * s);
        const ScalarField n = random_zero_mean(g, 5001 + 2 * s);
        const double b = std::abs(dot(advect_scalar(u, c), n)) / (v_norm(u) * h1_seminorm(c) * h1_seminorm(n));
        best = std::max({best, b0, b});
    }
    return best;
}

}  // namespace

DomainConstants domain_constants(const ChamberDomain& dom, ConstantsMode mode, std::optional<std::array<int, 3>> grid) {
    const auto& L = dom.edges();
    if (dom.max_edge() / dom.min_edge() > 1e6) {
        throw std::invalid_argument("domain_constants: degenerate box (edge ratio above 1e6)");
    }
    const double pi = std::numbers::pi;
    DomainConstants dc;
    dc.C_poi_dirichlet = 1.0 / (pi * std::sqrt(1.0 / (L[0] * L[0]) + 1.0 / (L[1] * L[1]) + 1.0 / (L[2] * L[2])));
    dc.C_poi_meanzero = dom.max_edge() / pi;
    // 1-D: |phi(0)| + |phi(L)| <= (2/L) int|phi| + int|phi'|, summed over the three axes.
    dc.C_tr = std::max(2.0 * (1.0 / L[0] + 1.0 / L[1] + 1.0 / L[2]), std::sqrt(3.0));
    // ||u||_L4^2 <= ||u||_L2^{1/2} ||u||_L6^{3/2} for b0; ||u||_L6 ||grad c|| ||n||_L3 for b,
    // with ||n||_L3 bounded through the Gagliardo product inequality on the box.
    const double K = talenti_constant();
    const double Cb0 = std::pow(K, 1.5) * std::sqrt(dc.C_poi_dirichlet);
    double l3 = 1.0;
    for (double Li : L) l3 *= dc.C_poi_meanzero * dc.C_poi_meanzero / Li + 2.0 * dc.C_poi_meanzero;
    const double Cb = K * std::pow(l3, 1.0 / 6.0);
    dc.C_1 = std::max(Cb0, Cb);
    dc.method_poi_dirichlet = dc.method_poi_meanzero = dc.method_tr = dc.method_1 = "analytic";
    if (mode == ConstantsMode::analytic) return dc;

    const std::array<int, 3> cells = grid.value_or(std::array<int, 3>{16, 16, 16});
    for (int c : cells) {
        if (c < 8) throw std::invalid_argument("domain_constants: discrete mode needs at least 8 cells per edge");
    }
    const MacGrid g(dom, cells);
    const std::string tag = grid_tag(cells);
    dc.C_poi_meanzero = discrete_poincare_meanzero(g);
    dc.C_poi_dirichlet = discrete_poincare_dirichlet(g);
    dc.C_tr = discrete_trace_constant(g);
    dc.C_1 = discrete_trilinear_constant(g);
    dc.method_poi_dirichlet = tag + " rayleigh";
    dc.method_poi_meanzero = tag + " rayleigh";
    dc.method_tr = tag + " basis-max";
    dc.method_1 = tag + " sampled (lower estimate)";
    return dc;
}

DomainConstants apply_overrides(DomainConstants dc, const ConstantOverrides& o) {
    auto set = [](double& v, std::string& tag, const std::optional<double>& x, const char* name) {
        if (!x) return;
        if (!(*x > 0.0) || !std::isfinite(*x))
            throw std::invalid_argument(std::string("constants.") + name + " must be positive and finite");
        v = *x;
        tag = "declared";
    };
    set(dc.C_poi_dirichlet, dc.method_poi_dirichlet, o.C_poi_dirichlet, "C_poi_dirichlet");
    set(dc.C_poi_meanzero, dc.method_poi_meanzero, o.C_poi_meanzero, "C_poi_meanzero");
    set(dc.C_tr, dc.method_tr, o.C_tr, "C_tr");
    set(dc.C_1, dc.method_1, o.C_1, "C_1");
    return dc;
}

CertificateInputs make_inputs(const DomainConstants& dc, const ChamberDomain& dom, const DimensionlessGroups& groups,
                              double gravity, const ConsumptionFunction& r, double alpha1, double alpha2,
                              double f_n_norm, double f_c_norm, double F_norm, bool audit_r) {
    CertificateInputs in;
    in.constants = dc;
    in.measure = dom.measure();
    in.groups = groups;
    in.gravity = gravity;
    in.r_inf = r.norm_inf;
    in.r_l1 = r.norm_l1;
    in.r_lip = r.norm_lip;
    in.r_audit_ok = audit_r ? validate_consumption(r).ok : true;
    in.alpha1 = alpha1;
    in.alpha2 = alpha2;
    in.f_n_norm = f_n_norm;
    in.f_c_norm = f_c_norm;
    in.F_norm = F_norm;
    return in;
}

// Certificate arithmetic, generic in the number type -----------------------

namespace {

template <class R>
R nan_value() {
    return R(std::numeric_limits<double>::quiet_NaN());
}

template <class R>
R infinity_value() {
    return R(std::numeric_limits<double>::infinity());
}

template <class R>
R ratio(R num, R den) {
    return den > R(0.0) ? num / den : nan_value<R>();
}

template <class R>
double to_d(R x) {
    if constexpr (std::is_same_v<R, double>) {
        return x;
    } else {
        return x.to_double();
    }
}

template <class R>
struct Check {
    std::string name;
    std::string statement;
    R lhs;
    R rhs;
};

template <class R>
struct Values {
    R theta1, theta2, gamma0, gamma1, gamma2, gamma3, pi;
    R den_theta1, den_theta2, den_gamma0, den_gamma1, den_gamma2, den_gamma3, den_pi;
    R u_bound, n_bound, c_bound;
    R K1, K2, K3;
    std::vector<Check<R>> existence;
    std::vector<Check<R>> uniqueness;
};

template <class R>
Values<R> evaluate(const CertificateInputs& in) {
    using std::isfinite;
    const auto& dc = in.constants;
    const R one(1.0), two(2.0);
    const R Ctr(dc.C_tr), Cmz(dc.C_poi_meanzero), Cd(dc.C_poi_dirichlet), C1(dc.C_1);
    const R Cmax(dc.C_poi());
    const R chi(in.groups.chi), beta(in.groups.beta), delta(in.groups.delta), Sc(in.groups.S_c),
        gam(in.groups.gamma), g(in.gravity);
    const R rinf(in.r_inf), rl1(in.r_l1), rlip(in.r_lip);
    const R a1(in.alpha1), vol(in.measure);
    const R fn(in.f_n_norm), fc(in.f_c_norm), F(in.F_norm);

    Values<R> v;
    v.den_theta1 = one - Ctr - two * chi * rl1 * Ctr * Cmz;
    v.den_theta2 = one - Ctr - Ctr * Cmz;
    v.theta1 = ratio(one - Ctr, v.den_theta1);
    v.theta2 = ratio(one - Ctr, v.den_theta2);

    const R rinf2 = rinf * rinf;
    v.den_gamma0 = vol - chi * beta * a1 * rinf2 * Cmz * Cmz * v.theta1 * v.theta2;
    const R bracket = chi * a1 * rinf2 * v.theta2 / (delta * vol) * fc + fn;
    v.gamma0 = ratio(vol * v.theta1 * Cmz, v.den_gamma0) * bracket;

    v.den_gamma1 = Sc - C1 * Cd * (gam * g * v.gamma0 + F);
    v.gamma1 = ratio(gam * Sc * g * Cd, v.den_gamma1);
    v.den_gamma2 = one - two * rl1 * (one - Ctr + Ctr * Cmz);
    v.gamma2 = ratio(one - Ctr, v.den_gamma2);
    const R C1cubed = C1 * C1 * C1;
    v.den_gamma3 = delta * v.den_theta2 - C1cubed * rlip * v.gamma0;
    v.gamma3 = ratio(one - Ctr, v.den_gamma3);

    v.den_pi = delta * (one - C1 * rlip * v.gamma0);
    const R cterm = beta * Cmz * rinf * v.gamma0 + fc;
    v.pi = v.gamma1 * v.gamma2 * (C1 * v.gamma0 + ratio(rinf * C1 * v.gamma3 * v.theta2 * Cmz, v.den_pi) * cterm);

    v.n_bound = v.gamma0;
    v.u_bound = Cd * (gam * g * v.gamma0 + F);
    v.c_bound = v.theta2 * Cmz / delta * cterm;

    // existence
    double bad = 0.0;
    if (!std::isfinite(in.r_inf) || in.r_inf < 0.0) bad += 1.0;
    if (!std::isfinite(in.r_l1) || in.r_l1 < 0.0) bad += 1.0;
    if (!in.r_audit_ok) bad += 1.0;
    v.existence.push_back({"r_bounded_integrable", "count(non-finite r norms, failed r audit) < 1", R(bad), one});
    const R twochi = two * chi * rl1;
    const R mx = twochi > one ? twochi : one;
    v.existence.push_back({"trace_poincare", "C_tr C_poi max{2 chi |r|_1, 1} < 1 - C_tr", Ctr * Cmz * mx, one - Ctr});
    const R nbar = a1 / vol;
    v.existence.push_back({"coupling_nbar", "chi beta nbar |r|_inf^2 C_poi^2 Theta1 Theta2 < 1",
                           chi * beta * nbar * rinf2 * Cmz * Cmz * v.theta1 * v.theta2, one});
    v.existence.push_back({"coupling_alpha1", "chi beta alpha1 |r|_inf^2 C_poi^2 Theta1 Theta2 < |Omega|",
                           chi * beta * a1 * rinf2 * Cmz * Cmz * v.theta1 * v.theta2, vol});

    // uniqueness
    v.uniqueness.push_back({"momentum_coercivity", "C_1 C_poi (gamma g Gamma0 + |F|) < S_c",
                            C1 * Cd * (gam * g * v.gamma0 + F), Sc});
    v.uniqueness.push_back({"oxygen_coercivity_l1", "C_1^3 |r|_1 Gamma0 < delta (1 - C_tr - C_tr C_poi)",
                            C1cubed * rl1 * v.gamma0, delta * v.den_theta2});
    v.uniqueness.push_back({"oxygen_coercivity_lip", "C_1^3 |r|_Lip Gamma0 < delta (1 - C_tr - C_tr C_poi)",
                            C1cubed * rlip * v.gamma0, delta * v.den_theta2});
    v.uniqueness.push_back({"chemotaxis_coercivity", "2 |r|_1 (1 - C_tr + C_tr C_poi) < 1",
                            two * rl1 * (one - Ctr + Ctr * Cmz), one});
    v.uniqueness.push_back({"lipschitz_smallness", "C_1 |r|_Lip Gamma0 < 1", C1 * rlip * v.gamma0, one});
    v.uniqueness.push_back({"lipschitz_smallness_squared", "C_1^2 |r|_Lip Gamma0 < 1", C1 * C1 * rlip * v.gamma0, one});
    v.uniqueness.push_back({"contraction", "Pi < 1", v.pi, one});

    // Gossez lambda system
    const R C4 = Cmax * Cmax * Cmax * Cmax;
    const R six(6.0), four(4.0), three(3.0);
    const R k3den = three * v.theta1 * gam * gam * g * g * Sc * C4;
    const R ca = chi * a1 * rinf;
    const R k1den = six * v.theta1 * v.theta2 * ca * ca;
    const R bc = beta * Cmax * Cmax * rinf;
    const R k2den = six * v.theta1 * v.theta2 * bc * bc;
    auto kval = [&](R num, R den) {
        if (!(isfinite(v.theta1) && isfinite(v.theta2))) return nan_value<R>();
        return den > R(0.0) ? num / den : infinity_value<R>();
    };
    v.K3 = kval(four, k3den);
    v.K1 = kval(four * delta * vol * vol, k1den);
    v.K2 = kval(four * delta, k2den);
    return v;
}

HypothesisCheck finish_check(const std::string& name, const std::string& statement, double lhs, double rhs) {
    HypothesisCheck c;
    c.name = name;
    c.statement = statement;
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = rhs - lhs;
    c.satisfied = lhs < rhs;  // false for NaN
    return c;
}

template <class R>
std::vector<HypothesisCheck> to_checks(const std::vector<Check<R>>& cs) {
    std::vector<HypothesisCheck> out;
    out.reserve(cs.size());
    for (const auto& c : cs) out.push_back(finish_check(c.name, c.statement, to_d(c.lhs), to_d(c.rhs)));
    return out;
}

GossezResult gossez_from(const Values<double>& v, bool existence_ok) {
    GossezResult r;
    r.K1 = v.K1;
    r.K2 = v.K2;
    r.K3 = v.K3;
    if (!existence_ok || std::isnan(v.K1) || std::isnan(v.K2) || std::isnan(v.K3)) return r;
    const double prod = std::isinf(v.K1) || std::isinf(v.K2) ? std::numeric_limits<double>::infinity() : v.K1 * v.K2;
    r.feasible = prod > 1.0;
    if (!r.feasible) return r;
    // lambda2 = 1; need 1/K1 < lambda3 < K2 and lambda1 < K3
    r.lambda2 = 1.0;
    if (std::isinf(v.K1) && std::isinf(v.K2)) {
        r.lambda3 = 1.0;
    } else if (std::isinf(v.K1)) {
        r.lambda3 = 0.5 * v.K2;
    } else if (std::isinf(v.K2)) {
        r.lambda3 = 2.0 / v.K1;
    } else {
        r.lambda3 = std::sqrt(v.K2 / v.K1);
    }
    r.lambda1 = std::isinf(v.K3) ? 1.0 : 0.5 * v.K3;
    return r;
}

bool all_ok(const std::vector<HypothesisCheck>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const HypothesisCheck& c) { return c.satisfied; });
}

bool agree(double a, double b, double scale) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    if (std::isinf(a) || std::isinf(b)) return a == b;
    const double s = std::max({std::abs(b), scale, std::numeric_limits<double>::min()});
    return std::abs(a - b) <= 1e-12 * s;
}

}  // namespace

// Formula-level API ---------------------------------------------------------

namespace {

CertificateInputs inputs_from(const DomainConstants& dc, double chi, const ConsumptionFunction& r) {
    CertificateInputs in;
    in.constants = dc;
    in.groups.chi = chi;
    in.r_inf = r.norm_inf;
    in.r_l1 = r.norm_l1;
    in.r_lip = r.norm_lip;
    return in;
}

}  // namespace

std::pair<double, double> thetas(const DomainConstants& dc, double chi, const ConsumptionFunction& r) {
    const auto v = evaluate<double>(inputs_from(dc, chi, r));
    if (!(v.den_theta1 > 0.0)) throw HypothesisViolation("1 - C_tr - 2 chi |r|_1 C_tr C_poi > 0", v.den_theta1);
    if (!(v.den_theta2 > 0.0)) throw HypothesisViolation("1 - C_tr - C_tr C_poi > 0", v.den_theta2);
    return {v.theta1, v.theta2};
}

double gamma0(const DomainConstants& dc, const ChamberDomain& dom, const DimensionlessGroups& groups,
              const ConsumptionFunction& r, double alpha1, double f_n_norm, double f_c_norm) {
    thetas(dc, groups.chi, r);
    CertificateInputs in = inputs_from(dc, groups.chi, r);
    in.groups = groups;
    in.measure = dom.measure();
    in.alpha1 = alpha1;
    in.f_n_norm = f_n_norm;
    in.f_c_norm = f_c_norm;
    const auto v = evaluate<double>(in);
    if (!(v.den_gamma0 > 0.0)) {
        throw HypothesisViolation("|Omega| - chi beta alpha1 |r|_inf^2 C_poi^2 Theta1 Theta2 > 0", v.den_gamma0);
    }
    return v.gamma0;
}

Gammas gammas(const DomainConstants& dc, const DimensionlessGroups& groups, double gravity,
              const ConsumptionFunction& r, double gamma0_val, double F_norm) {
    const double one_tr = 1.0 - dc.C_tr;
    Gammas out;
    out.denominator1 = groups.S_c - dc.C_1 * dc.C_poi_dirichlet * (groups.gamma * gravity * gamma0_val + F_norm);
    out.denominator2 = 1.0 - 2.0 * r.norm_l1 * (1.0 - dc.C_tr + dc.C_tr * dc.C_poi_meanzero);
    out.denominator3 = groups.delta * (1.0 - dc.C_tr - dc.C_tr * dc.C_poi_meanzero) -
                       dc.C_1 * dc.C_1 * dc.C_1 * r.norm_lip * gamma0_val;
    if (!(out.denominator1 > 0.0)) throw HypothesisViolation("S_c - C_1 C_poi (gamma g Gamma0 + |F|) > 0", out.denominator1);
    if (!(out.denominator2 > 0.0))
        throw HypothesisViolation("1 - 2 |r|_1 (1 - C_tr + C_tr C_poi) > 0", out.denominator2);
    if (!(out.denominator3 > 0.0))
        throw HypothesisViolation("delta (1 - C_tr - C_tr C_poi) - C_1^3 |r|_Lip Gamma0 > 0", out.denominator3);
    out.gamma1 = groups.gamma * groups.S_c * gravity * dc.C_poi_dirichlet / out.denominator1;
    out.gamma2 = one_tr / out.denominator2;
    out.gamma3 = one_tr / out.denominator3;
    return out;
}

std::vector<HypothesisCheck> check_existence(const CertificateInputs& in) {
    return to_checks(evaluate<double>(in).existence);
}

bool UniquenessReport::all_satisfied() const { return all_ok(checks); }

UniquenessReport check_uniqueness(const CertificateInputs& in) {
    const auto v = evaluate<double>(in);
    UniquenessReport rep;
    rep.checks = to_checks(v.uniqueness);
    rep.pi_value = v.pi;
    return rep;
}

AprioriBounds apriori_bounds(const CertificateInputs& in) {
    const auto v = evaluate<double>(in);
    if (!(v.den_theta1 > 0.0)) throw HypothesisViolation("1 - C_tr - 2 chi |r|_1 C_tr C_poi > 0", v.den_theta1);
    if (!(v.den_theta2 > 0.0)) throw HypothesisViolation("1 - C_tr - C_tr C_poi > 0", v.den_theta2);
    if (!(v.den_gamma0 > 0.0))
        throw HypothesisViolation("|Omega| - chi beta alpha1 |r|_inf^2 C_poi^2 Theta1 Theta2 > 0", v.den_gamma0);
    return {v.u_bound, v.n_bound, v.c_bound};
}

GossezResult gossez_lambda_feasibility(const CertificateInputs& in) {
    const auto v = evaluate<double>(in);
    return gossez_from(v, all_ok(to_checks(v.existence)));
}

// Full certificate ----------------------------------------------------------

bool Certificate::existence_ok() const { return all_ok(existence_checks); }
bool Certificate::uniqueness_ok() const { return existence_ok() && all_ok(uniqueness_checks); }

const HypothesisCheck* Certificate::find_check(const std::string& name) const {
    for (const auto* list : {&existence_checks, &uniqueness_checks})
        for (const auto& c : *list)
            if (c.name == name) return &c;
    return nullptr;
}

Certificate build_certificate(const CertificateInputs& in) {
    const auto v = evaluate<double>(in);
    const auto w = evaluate<DoubleDouble>(in);
    Certificate c;
    c.inputs = in;
    c.theta1 = v.theta1;
    c.theta2 = v.theta2;
    c.gamma0 = v.gamma0;
    c.gamma1 = v.gamma1;
    c.gamma2 = v.gamma2;
    c.gamma3 = v.gamma3;
    c.pi_value = v.pi;
    c.denominators = {{"theta1", v.den_theta1}, {"theta2", v.den_theta2}, {"gamma0", v.den_gamma0},
                      {"gamma1", v.den_gamma1}, {"gamma2", v.den_gamma2}, {"gamma3", v.den_gamma3},
                      {"pi", v.den_pi}};
    c.existence_checks = to_checks(v.existence);
    c.uniqueness_checks = to_checks(v.uniqueness);
    c.apriori = {v.u_bound, v.n_bound, v.c_bound};
    c.gossez = gossez_from(v, c.existence_ok());

    auto cmp = [&](const std::string& name, double a, DoubleDouble b, double scale = 0.0) {
        if (!agree(a, b.to_double(), scale)) c.precision_defects.push_back(name);
    };
    cmp("theta1", v.theta1, w.theta1);
    cmp("theta2", v.theta2, w.theta2);
    cmp("gamma0", v.gamma0, w.gamma0);
    cmp("gamma1", v.gamma1, w.gamma1);
    cmp("gamma2", v.gamma2, w.gamma2);
    cmp("gamma3", v.gamma3, w.gamma3);
    cmp("pi", v.pi, w.pi);
    cmp("u_bound", v.u_bound, w.u_bound);
    cmp("n_bound", v.n_bound, w.n_bound);
    cmp("c_bound", v.c_bound, w.c_bound);
    cmp("K1", v.K1, w.K1);
    cmp("K2", v.K2, w.K2);
    cmp("K3", v.K3, w.K3);
    // Denominators and slacks are differences; compare relative to their operands.
    auto cmp_checks = [&](const std::vector<Check<double>>& a, const std::vector<Check<DoubleDouble>>& b) {
        for (std::size_t q = 0; q < a.size(); ++q) {
            const double scale = std::max(std::abs(a[q].lhs), std::abs(a[q].rhs));
            cmp(a[q].name + ".lhs", a[q].lhs, b[q].lhs);
            cmp(a[q].name + ".rhs", a[q].rhs, b[q].rhs);
            cmp(a[q].name + ".slack", a[q].rhs - a[q].lhs, b[q].rhs - b[q].lhs, scale);
        }
    };
    cmp_checks(v.existence, w.existence);
    cmp_checks(v.uniqueness, w.uniqueness);
    return c;
}

// Serialisation -------------------------------------------------------------

namespace {

nlohmann::json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

nlohmann::json checks_json(const std::vector<HypothesisCheck>& cs) {
    auto arr = nlohmann::json::array();
    for (const auto& c : cs) {
        arr.push_back({{"name", c.name},
                       {"statement", c.statement},
                       {"lhs", number(c.lhs)},
                       {"rhs", number(c.rhs)},
                       {"slack", number(c.slack)},
                       {"satisfied", c.satisfied}});
    }
    return arr;
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string certificate_to_text(const Certificate& c) {
    std::ostringstream os;
    const auto& dc = c.inputs.constants;
    os << "constants.C_poi_dirichlet = " << fmt(dc.C_poi_dirichlet) << "  # " << dc.method_poi_dirichlet << "\n";
    os << "constants.C_poi_meanzero = " << fmt(dc.C_poi_meanzero) << "  # " << dc.method_poi_meanzero << "\n";
    os << "constants.C_tr = " << fmt(dc.C_tr) << "  # " << dc.method_tr << "\n";
    os << "constants.C_1 = " << fmt(dc.C_1) << "  # " << dc.method_1 << "\n";
    os << "theta1 = " << fmt(c.theta1) << "\n";
    os << "theta2 = " << fmt(c.theta2) << "\n";
    os << "gamma0 = " << fmt(c.gamma0) << "\n";
    os << "gamma1 = " << fmt(c.gamma1) << "\n";
    os << "gamma2 = " << fmt(c.gamma2) << "\n";
    os << "gamma3 = " << fmt(c.gamma3) << "\n";
    os << "pi = " << fmt(c.pi_value) << "\n";
    for (const auto& d : c.denominators) os << "denominator." << d.name << " = " << fmt(d.value) << "\n";
    auto put = [&](const char* group, const std::vector<HypothesisCheck>& cs) {
        for (const auto& k : cs) {
            os << group << "." << k.name << " = " << (k.satisfied ? "pass" : "FAIL") << "  lhs=" << fmt(k.lhs)
               << " rhs=" << fmt(k.rhs) << " slack=" << fmt(k.slack) << "\n";
        }
    };
    put("existence", c.existence_checks);
    put("uniqueness", c.uniqueness_checks);
    os << "apriori.u_bound = " << fmt(c.apriori.u_bound) << "\n";
    os << "apriori.n_bound = " << fmt(c.apriori.n_bound) << "\n";
    os << "apriori.c_bound = " << fmt(c.apriori.c_bound) << "\n";
    os << "gossez.K1 = " << fmt(c.gossez.K1) << "\n";
    os << "gossez.K2 = " << fmt(c.gossez.K2) << "\n";
    os << "gossez.K3 = " << fmt(c.gossez.K3) << "\n";
    os << "gossez.feasible = " << (c.gossez.feasible ? "true" : "false") << "\n";
    if (c.gossez.feasible) {
        os << "gossez.lambda = " << fmt(c.gossez.lambda1) << ", " << fmt(c.gossez.lambda2) << ", "
           << fmt(c.gossez.lambda3) << "\n";
    }
    os << "existence = " << (c.existence_ok() ? "pass" : "FAIL") << "\n";
    os << "uniqueness = " << (c.uniqueness_ok() ? "pass" : "FAIL") << "\n";
    os << "precision_defects = " << c.precision_defects.size() << "\n";
    return os.str();
}

std::string certificate_to_json(const Certificate& c, int indent) {
    const auto& in = c.inputs;
    const auto& dc = in.constants;
    nlohmann::json j;
    j["kind"] = "certificate";
    j["constants"] = {
        {"C_poi_dirichlet", {{"value", number(dc.C_poi_dirichlet)}, {"method", dc.method_poi_dirichlet}}},
        {"C_poi_meanzero", {{"value", number(dc.C_poi_meanzero)}, {"method", dc.method_poi_meanzero}}},
        {"C_tr", {{"value", number(dc.C_tr)}, {"method", dc.method_tr}}},
        {"C_1", {{"value", number(dc.C_1)}, {"method", dc.method_1}}}};
    j["inputs"] = {{"measure", in.measure},
                   {"S_c", in.groups.S_c},
                   {"gamma", in.groups.gamma},
                   {"chi", in.groups.chi},
                   {"delta", in.groups.delta},
                   {"beta", in.groups.beta},
                   {"g", in.gravity},
                   {"r_inf", number(in.r_inf)},
                   {"r_l1", number(in.r_l1)},
                   {"r_lip", number(in.r_lip)},
                   {"r_audit_ok", in.r_audit_ok},
                   {"alpha1", in.alpha1},
                   {"alpha2", in.alpha2},
                   {"f_n_norm", in.f_n_norm},
                   {"f_c_norm", in.f_c_norm},
                   {"F_norm", in.F_norm}};
    j["values"] = {{"theta1", number(c.theta1)}, {"theta2", number(c.theta2)}, {"gamma0", number(c.gamma0)},
                   {"gamma1", number(c.gamma1)}, {"gamma2", number(c.gamma2)}, {"gamma3", number(c.gamma3)},
                   {"pi", number(c.pi_value)}};
    auto dens = nlohmann::json::object();
    for (const auto& d : c.denominators) dens[d.name] = number(d.value);
    j["denominators"] = dens;
    j["existence_checks"] = checks_json(c.existence_checks);
    j["uniqueness_checks"] = checks_json(c.uniqueness_checks);
    j["apriori"] = {{"u_bound", number(c.apriori.u_bound)},
                    {"n_bound", number(c.apriori.n_bound)},
                    {"c_bound", number(c.apriori.c_bound)}};
    nlohmann::json gz = {{"feasible", c.gossez.feasible},
                         {"K1", number(c.gossez.K1)},
                         {"K2", number(c.gossez.K2)},
                         {"K3", number(c.gossez.K3)}};
    if (c.gossez.feasible) {
        gz["witness"] = {{"lambda1", c.gossez.lambda1}, {"lambda2", c.gossez.lambda2}, {"lambda3", c.gossez.lambda3}};
    } else {
        gz["witness"] = nullptr;
    }
    j["gossez"] = gz;
    j["existence_ok"] = c.existence_ok();
    j["uniqueness_ok"] = c.uniqueness_ok();
    j["precision_defects"] = c.precision_defects;
    return j.dump(indent);
}

}  // namespace bioconv
