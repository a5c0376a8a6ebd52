#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bioconv/certificate.hpp"
#include "bioconv/solver.hpp"

namespace bioconv {

using Point = std::array<double, 3>;
using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<Point(const Point&)>;

/// Smooth exact fields satisfying the wall conditions together with the
/// sources that make them solve the stationary system. n_hat and c_hat are
/// the zero-mean parts; p is the pressure of the shifted momentum equation.
struct MmsCase {
    std::string name;
    ChamberDomain domain{1.0, 1.0, 1.0};
    DimensionlessGroups groups;
    double gravity = 1.0;
    ConsumptionFunction r;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    VectorFn u;
    ScalarFn p;
    ScalarFn n_hat;
    ScalarFn c_hat;
    VectorFn grad_n_hat;
    VectorFn grad_c_hat;
    ScalarFn f_n;
    ScalarFn f_c;
    VectorFn F;
};

/// Names accepted by mms_case.
std::vector<std::string> mms_case_names();

/// "rest": u = 0, n and c constant, all sources zero.
/// "stratified": c_hat = eps_c cos(pi x3/L3), cosine profile for n_hat,
/// u the curl of sin^2 sin^2 sin stream function, cosine pressure.
/// Throws std::invalid_argument for unknown names.
MmsCase mms_case(const std::string& name);

/// Sources sampled on the grid (cells for f_n, f_c; faces for F).
ProblemData discretize(const MmsCase& mc, const MacGrid& grid);

/// Exact fields sampled on the grid, n_hat and c_hat projected to zero sum.
FieldState sample_exact(const MmsCase& mc, const MacGrid& grid);

/// Largest wall residual of the exact fields: |u| on the walls and the
/// normal derivatives of n and c, on a lattice of boundary points.
double mms_boundary_residual(const MmsCase& mc, int samples = 9);

struct MmsErrors {
    double n_h1 = 0.0;  ///< H1 seminorm of n_hat error
    double c_h1 = 0.0;
    double u_v = 0.0;   ///< V-norm of the velocity error
};

MmsErrors mms_errors(const FieldState& computed, const FieldState& exact);

/// log2(e_k / e_{k+1}) for consecutive entries.
std::vector<double> observed_orders(std::span<const double> errors);

struct ConvergenceRow {
    int cells = 0;
    double h = 0.0;
    MmsErrors errors;
    /// Orders against the previous (coarser) row; NaN on the first row.
    double order_n = 0.0;
    double order_c = 0.0;
    double order_u = 0.0;
    int picard_iterations = 0;
};

struct ConvergenceTable {
    std::string case_name;
    std::vector<ConvergenceRow> rows;
    /// Fields whose errors do not decrease monotonically.
    std::vector<std::string> non_monotone;
    /// True when every field's error is below 1e-12 on every grid.
    bool machine_precision = false;

    [[nodiscard]] double min_order_n() const;
    [[nodiscard]] double min_order_c() const;
    [[nodiscard]] double min_order_u() const;
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string to_json(int indent = 2) const;
};

/// Solves the named case on cubes with the given cell counts. Requires at
/// least three grids, each halving the spacing of the previous one. With
/// jobs > 1 the grids are solved on that many threads; results are identical.
ConvergenceTable convergence_study(const std::string& case_name, const std::vector<int>& grids,
                                   const PicardOptions& opts = {}, int jobs = 1);

struct AprioriCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;  ///< bound - value
    bool pass = false;
};

struct AprioriAudit {
    std::vector<AprioriCheck> checks;  ///< n_hat_h1, u_v, c_hat_h1
    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_json(int indent = 2) const;
};

/// Compares the discrete norms of the state with the certified bounds.
/// Undefined bounds (failed existence denominators) fail the check.
AprioriAudit audit_apriori(const FieldState& state, const Certificate& certificate);

/// Wall and constraint audit of a state.
struct FluxAudit {
    double bacteria_flux = 0.0;  ///< upper-boundary zero-total-flux residual
    double divergence = 0.0;     ///< ||div u||_L2
    double mean_n_hat = 0.0;
    double mean_c_hat = 0.0;
};
FluxAudit flux_audit(const FieldState& state, const ProblemData& data);

/// Monolithic Newton on the fully coupled discrete system with a finite-
/// difference Jacobian and dense LU. Unknowns: interior face velocities,
/// pressure, n_hat, c_hat and three mean multipliers.
struct NewtonResult {
    FieldState state;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  ///< final max-norm of the nonlinear residual
    std::vector<double> history;
    std::string message;
};

/// Grids with more than 20000 unknowns are rejected (dense oracle).
NewtonResult newton_solve(const ProblemData& data, const FieldState& initial, double tol = 1e-13,
                          int max_iterations = 25);

/// Residual max-norm of the coupled discrete system at a state (the
/// multipliers are eliminated by least squares, i.e. row means removed).
double coupled_residual(const FieldState& state, const ProblemData& data);

struct OracleComparison {
    bool picard_converged = false;
    bool newton_converged = false;
    int picard_iterations = 0;
    int newton_iterations = 0;
    double newton_residual = 0.0;
    double discrepancy_u = 0.0;  ///< relative, V-norm (absolute when the Newton norm is below 1e-12)
    double discrepancy_p = 0.0;  ///< relative, L2
    double discrepancy_n = 0.0;  ///< relative, H1
    double discrepancy_c = 0.0;
    double max_discrepancy = 0.0;
    std::string message;
};

OracleComparison oracle_equivalence(const ProblemData& data, const PicardOptions& opts = {});

}  // namespace bioconv
