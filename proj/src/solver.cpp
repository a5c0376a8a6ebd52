#include "bioconv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bioconv/assembly.hpp"

namespace bioconv {

FieldState::FieldState(const MacGrid& grid, double a1, double a2)
    : u(grid), p(grid), n_hat(grid), c_hat(grid), alpha1(a1), alpha2(a2) {}

ScalarField FieldState::n() const {
    ScalarField out = n_hat;
    out.shift(alpha1 / grid().measure());
    return out;
}

ScalarField FieldState::c() const {
    ScalarField out = c_hat;
    out.shift(alpha2 / grid().measure());
    return out;
}

ProblemData::ProblemData(const MacGrid& g) : grid(g), f_n(g), f_c(g), F(g) {}

void PicardOptions::validate() const {
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("picard tolerance must lie in (0,1)");
    if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw std::invalid_argument("relaxation must lie in (0,1]");
    linear.validate();
}

double PicardHistory::asymptotic_ratio(double floor) const {
    double log_sum = 0.0;
    int used = 0;
    for (auto it = records.rbegin(); it != records.rend() && used < 3; ++it) {
        if (it->iteration < 2 || it->ratio <= 0.0 || it->increment <= floor) continue;
        log_sum += std::log(it->ratio);
        ++used;
    }
    return used == 0 ? 0.0 : std::exp(log_sum / used);
}

namespace {

double two_sum(double a, double b, double& err) {
    const double s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
}

}  // namespace

double exact_sum(std::span<const double> v) {
    // Shewchuk's grow-expansion with zero elimination: the components are
    // non-overlapping and sum exactly to the input sum.
    std::vector<double> e;
    e.reserve(8);
    for (double x : v) {
        double q = x;
        std::size_t out = 0;
        for (double c : e) {
            double err;
            q = two_sum(q, c, err);
            if (err != 0.0) e[out++] = err;
        }
        e.resize(out);
        if (q != 0.0) e.push_back(q);
    }
    double s = 0.0;
    for (double c : e) s += c;  // increasing magnitude
    return s;
}

void project_zero_sum(std::span<double> v) {
    if (v.empty()) return;
    const double m = exact_sum(v) / static_cast<double>(v.size());
    for (double& x : v) x -= m;
    for (int pass = 0; pass < 4; ++pass) {
        const double r = exact_sum(v);
        if (r == 0.0) return;
        bool fixed = false;
        for (double& x : v) {
            double err;
            const double y = two_sum(x, -r, err);
            if (err == 0.0) {
                x = y;
                fixed = true;
                break;
            }
        }
        if (!fixed) {
            auto it = std::max_element(v.begin(), v.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
            *it -= r;
        }
    }
}

void enforce_means(FieldState& s, bool project_oxygen) {
    project_zero_sum(s.n_hat.values());
    if (project_oxygen) project_zero_sum(s.c_hat.values());
}

DiscreteNorms discrete_norms(const FieldState& s) {
    DiscreteNorms d;
    d.u_v = v_norm(s.u);
    d.u_l2 = l2_norm(s.u);
    d.n_grad = h1_seminorm(s.n_hat);
    d.c_grad = h1_seminorm(s.c_hat);
    d.n_h1 = h1_norm(s.n_hat);
    d.c_h1 = h1_norm(s.c_hat);
    d.div_u = l2_norm(divergence_no_penetration(s.u));
    return d;
}

namespace {

struct ScalarSolve {
    std::vector<double> x;
    double multiplier = 0.0;
    SolveStats stats;
};

ScalarSolve solve_scalar(const ScalarSystem& sys, const SolveOptions& opts) {
    if (sys.mean_constraint) {
        auto r = solve_bordered(sys.K, sys.rhs, opts);
        return {std::move(r.x), r.multiplier, std::move(r.stats)};
    }
    auto r = solve_general(sys.K, sys.rhs, opts);
    return {std::move(r.x), 0.0, std::move(r.stats)};
}

void blend(std::vector<double>& out, const std::vector<double>& old, double omega) {
    if (omega == 1.0) return;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - omega) * old[i] + omega * out[i];
}

void require_converged(const SolveStats& st, const char* what) {
    if (!st.converged) {
        std::ostringstream os;
        os << "picard_step: " << what << " solve did not converge (residual " << st.residual << ")";
        throw SolverError(os.str(), st);
    }
}

}  // namespace

FieldState picard_step(const FieldState& s, const ProblemData& data, const PicardOptions& opts,
                       StepDiagnostics* diag) {
    if (!(s.grid() == data.grid)) throw GridMismatch("picard_step");
    const MacGrid& g = data.grid;
    const double omega = opts.relaxation;
    StepDiagnostics local;
    FieldState next(g, s.alpha1, s.alpha2);

    const OseenSystem os = assemble_oseen(s.u, s.n_hat, data.groups, data.gravity, data.F);
    const SaddleResult flow = solve_saddle(os.A, os.B, os.G, os.f, os.g, opts.linear);
    local.momentum_residual = flow.stats.residual;
    local.divergence_residual = flow.divergence_residual;
    local.linear_iterations += flow.inner_iterations;
    std::vector<double> u = flow.velocity;
    blend(u, s.u.flatten(), omega);
    next.u = VectorField::unflatten(g, u);
    next.p = ScalarField(g, flow.pressure);

    const ScalarSystem bs =
        assemble_bacteria(next.u, s.n_hat, s.c_hat, data.r, data.groups.chi, s.alpha1, s.alpha2, data.f_n);
    ScalarSolve nb = solve_scalar(bs, opts.linear);
    require_converged(nb.stats, "bacteria");
    blend(nb.x, s.n_hat.values(), omega);
    next.n_hat = ScalarField(g, std::move(nb.x));
    local.bacteria_residual = nb.stats.residual;
    local.bacteria_multiplier = nb.multiplier;
    local.linear_iterations += nb.stats.iterations;

    const ScalarSystem xs = assemble_oxygen(next.u, next.n_hat, s.c_hat, data.r, data.groups.delta,
                                            data.groups.beta, s.alpha1, s.alpha2, data.f_c, data.oxygen_top);
    ScalarSolve cx = solve_scalar(xs, opts.linear);
    require_converged(cx.stats, "oxygen");
    blend(cx.x, s.c_hat.values(), omega);
    next.c_hat = ScalarField(g, std::move(cx.x));
    local.oxygen_residual = cx.stats.residual;
    local.oxygen_multiplier = cx.multiplier;
    local.linear_iterations += cx.stats.iterations;

    const double vol = g.cell_volume();
    local.drift_n = exact_sum(next.n_hat.values()) * vol;
    local.drift_c = xs.mean_constraint ? exact_sum(next.c_hat.values()) * vol : 0.0;
    // scaled by the L1 mass so that roundoff on large iterates is not flagged
    const auto l1 = [vol](const ScalarField& f) {
        double m = 0.0;
        for (double v : f.values()) m += std::abs(v);
        return std::max(1.0, m * vol);
    };
    if (std::abs(local.drift_n) > 1e-8 * l1(next.n_hat) || std::abs(local.drift_c) > 1e-8 * l1(next.c_hat)) {
        std::ostringstream os2;
        os2 << "picard_step: mean drift before projection exceeds 1e-8 (n: " << local.drift_n
            << ", c: " << local.drift_c << ")";
        throw std::logic_error(os2.str());
    }
    enforce_means(next, xs.mean_constraint);
    if (diag) *diag = local;
    return next;
}

namespace {

double state_size(const DiscreteNorms& d) { return std::max({d.u_v, d.n_h1, d.c_h1}); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

SolveOutcome solve_stationary(const FieldState& initial, const ProblemData& data, const PicardOptions& opts) {
    opts.validate();
    if (!(initial.grid() == data.grid)) throw GridMismatch("solve_stationary");
    SolveOutcome out{initial, {}, {}};
    SolveReport& rep = out.report;

    if (opts.certificate && !opts.certificate->existence_ok()) {
        std::string failed;
        for (const auto& c : opts.certificate->existence_checks)
            if (!c.satisfied) failed += (failed.empty() ? "" : ", ") + c.name;
        if (opts.strict) throw CertificateFailure("existence checks failed: " + failed);
        rep.warnings.push_back("existence checks failed (" + failed + "); proceeding outside the certified region");
    }

    const bool project_c = data.oxygen_top == OxygenTopBc::neumann;
    FieldState state = initial;
    state.alpha1 = data.alpha1;
    state.alpha2 = data.alpha2;
    enforce_means(state, project_c);

    double prev_increment = 0.0;
    for (int k = 1; k <= opts.max_outer; ++k) {
        StepDiagnostics diag;
        FieldState next = picard_step(state, data, opts, &diag);

        FieldState delta = next;
        delta.u -= state.u;
        delta.n_hat -= state.n_hat;
        delta.c_hat -= state.c_hat;
        PicardRecord rec;
        rec.iteration = k;
        rec.du_v = v_norm(delta.u);
        rec.dn_h1 = h1_norm(delta.n_hat);
        rec.dc_h1 = h1_norm(delta.c_hat);
        rec.increment = std::max({rec.du_v, rec.dn_h1, rec.dc_h1});
        rec.ratio = (k > 1 && prev_increment > 0.0) ? rec.increment / prev_increment : 0.0;
        rec.step = diag;
        out.history.records.push_back(rec);
        rep.max_drift_n = std::max(rep.max_drift_n, std::abs(diag.drift_n));
        rep.max_drift_c = std::max(rep.max_drift_c, std::abs(diag.drift_c));
        prev_increment = rec.increment;
        state = std::move(next);

        const auto& recs = out.history.records;
        if (!std::isfinite(rec.increment)) {
            throw PicardDivergence("solve_stationary: non-finite increment at iteration " + std::to_string(k),
                                   out.history);
        }
        const double size = state_size(discrete_norms(state));
        // growth among roundoff-level increments is noise, not divergence
        const double noise_floor = 1e3 * opts.linear.tolerance * (1.0 + size);
        if (k > 5 && rec.increment > noise_floor &&
            rec.increment > 10.0 * recs[static_cast<std::size_t>(k - 6)].increment) {
            throw PicardDivergence("solve_stationary: increments grew more than tenfold over 5 iterations "
                                   "(outside the certified region)",
                                   out.history);
        }
        rep.iterations = k;
        rep.final_increment = rec.increment;
        if (rec.increment <= opts.tolerance * (1.0 + size)) {
            rep.converged = true;
            break;
        }
    }

    rep.norms = discrete_norms(state);
    rep.contraction_ratio = out.history.asymptotic_ratio(1e3 * opts.linear.tolerance * (1.0 + state_size(rep.norms)));
    if (opts.certificate) {
        const auto& cert = *opts.certificate;
        if (std::isfinite(cert.pi_value)) rep.pi_value = cert.pi_value;
        if (cert.uniqueness_ok()) rep.ratio_within_pi = rep.contraction_ratio <= cert.pi_value + 0.1;
    }
    if (!rep.converged) {
        rep.warnings.push_back("no convergence after " + std::to_string(rep.iterations) +
                               " iterations (last increment " + fmt(rep.final_increment) + ")");
    }

    const ScalarField n = state.n();
    const ScalarField c = state.c();
    const BoundaryGhosts cg = oxygen_ghosts(c, data.oxygen_top, data.alpha2 / data.grid.measure());
    try {
        const BoundaryGhosts ng = bacteria_ghosts(n, c, cg, data.r, data.groups.chi);
        rep.flux_residual = bacteria_boundary_flux_residual(n, c, ng, cg, data.r, data.groups.chi);
    } catch (const std::domain_error& e) {
        rep.flux_residual = std::numeric_limits<double>::quiet_NaN();
        rep.warnings.emplace_back(e.what());
    }
    out.state = std::move(state);
    return out;
}

NavierStokesResult solve_navier_stokes(const MacGrid& grid, double S_c, const VectorField& F,
                                       const PicardOptions& opts) {
    opts.validate();
    NavierStokesResult res{VectorField(grid), ScalarField(grid), 0, false};
    const DimensionlessGroups groups{S_c, 0.0, 0.0, 1.0, 0.0};
    const ScalarField zero(grid);
    for (int k = 1; k <= opts.max_outer; ++k) {
        const OseenSystem os = assemble_oseen(res.u, zero, groups, 0.0, F);
        const SaddleResult flow = solve_saddle(os.A, os.B, os.G, os.f, os.g, opts.linear);
        std::vector<double> u = flow.velocity;
        blend(u, res.u.flatten(), opts.relaxation);
        VectorField next = VectorField::unflatten(grid, u);
        VectorField delta = next;
        delta -= res.u;
        res.u = std::move(next);
        res.p = ScalarField(grid, flow.pressure);
        res.iterations = k;
        const double inc = v_norm(delta);
        if (!std::isfinite(inc)) break;
        if (inc <= opts.tolerance * (1.0 + v_norm(res.u))) {
            res.converged = true;
            break;
        }
    }
    return res;
}

FieldState random_state(const MacGrid& grid, double alpha1, double alpha2, std::uint64_t seed, double amplitude) {
    FieldState s(grid, alpha1, alpha2);
    s.u = random_divergence_free(grid, seed, amplitude);
    s.n_hat = random_zero_mean(grid, seed + 1, amplitude);
    s.c_hat = random_zero_mean(grid, seed + 2, amplitude);
    enforce_means(s);
    return s;
}

}  // namespace bioconv
