#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bioconv/certificate.hpp"
#include "bioconv/grid.hpp"
#include "bioconv/linsolve.hpp"
#include "bioconv/model.hpp"
#include "bioconv/operators.hpp"

namespace bioconv {

/// Velocity, pressure and the zero-mean shifted densities. The physical
/// fields are n = n_hat + alpha1/|Omega| and c = c_hat + alpha2/|Omega|.
struct FieldState {
    explicit FieldState(const MacGrid& grid, double alpha1 = 0.0, double alpha2 = 0.0);

    VectorField u;
    ScalarField p;
    ScalarField n_hat;
    ScalarField c_hat;
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    [[nodiscard]] const MacGrid& grid() const { return u.grid(); }
    [[nodiscard]] ScalarField n() const;
    [[nodiscard]] ScalarField c() const;
};

/// Data of one stationary problem on a fixed grid.
struct ProblemData {
    explicit ProblemData(const MacGrid& grid);

    MacGrid grid;
    DimensionlessGroups groups;
    double gravity = 1.0;
    ConsumptionFunction r;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    ScalarField f_n;
    ScalarField f_c;
    VectorField F;
    OxygenTopBc oxygen_top = OxygenTopBc::neumann;
};

struct PicardOptions {
    double tolerance = 1e-10;   ///< outer increment tolerance (relative to 1 + state norm)
    int max_outer = 200;
    double relaxation = 1.0;    ///< omega in (0, 1]
    SolveOptions linear{1e-12, 4000, SolveMethod::gmres, 60, Preconditioning::ilu0};
    /// Existence-check outcome used for the strict/warn decision (optional).
    const Certificate* certificate = nullptr;
    bool strict = false;

    void validate() const;
};

/// Per-step diagnostics of one Picard sweep.
struct StepDiagnostics {
    double drift_n = 0.0;  ///< integral of n_hat before projection
    double drift_c = 0.0;
    double momentum_residual = 0.0;
    double bacteria_residual = 0.0;
    double oxygen_residual = 0.0;
    double divergence_residual = 0.0;
    double bacteria_multiplier = 0.0;
    double oxygen_multiplier = 0.0;
    int linear_iterations = 0;
};

struct PicardRecord {
    int iteration = 0;
    double du_v = 0.0;   ///< ||u_k - u_{k-1}||_V
    double dn_h1 = 0.0;  ///< ||n_k - n_{k-1}||_H1
    double dc_h1 = 0.0;
    double increment = 0.0;  ///< max of the three
    double ratio = 0.0;      ///< increment_k / increment_{k-1} (0 for the first step)
    StepDiagnostics step;
};

struct PicardHistory {
    std::vector<PicardRecord> records;
    /// Geometric mean of the last (up to three) ratios above the roundoff floor.
    [[nodiscard]] double asymptotic_ratio(double floor = 0.0) const;
};

struct DiscreteNorms {
    double u_v = 0.0;
    double n_h1 = 0.0;
    double c_h1 = 0.0;
    double div_u = 0.0;  ///< L2 norm of the discrete divergence
    double u_l2 = 0.0;
    double n_grad = 0.0;  ///< gradient parts of the H1 norms
    double c_grad = 0.0;
};

DiscreteNorms discrete_norms(const FieldState& s);

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double final_increment = 0.0;
    DiscreteNorms norms;
    double contraction_ratio = 0.0;  ///< observed asymptotic ratio
    std::optional<double> pi_value;  ///< certificate Pi when available
    /// Set when the uniqueness checks pass: observed ratio <= Pi + 0.1.
    std::optional<bool> ratio_within_pi;
    double flux_residual = 0.0;  ///< bacteria boundary-flux audit on the upper boundary
    double max_drift_n = 0.0;
    double max_drift_c = 0.0;
    std::vector<std::string> warnings;
};

struct SolveOutcome {
    FieldState state;
    PicardHistory history;
    SolveReport report;
};

/// Thrown when the Picard increments grow tenfold over five iterations or
/// become non-finite. Carries the history up to that point.
class PicardDivergence : public std::runtime_error {
public:
    PicardDivergence(const std::string& what, PicardHistory history)
        : std::runtime_error(what), history_(std::move(history)) {}
    [[nodiscard]] const PicardHistory& history() const { return history_; }

private:
    PicardHistory history_;
};

/// Raised in strict mode when the existence checks fail.
class CertificateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact sum of the values, rounded once.
double exact_sum(std::span<const double> v);

/// Projects v onto zero sum. The projected values sum to exactly zero
/// whenever a one-cell correction can be applied without rounding.
void project_zero_sum(std::span<double> v);

/// Removes the means of n_hat and (unless the oxygen top boundary is
/// Dirichlet) c_hat. The totals alpha1, alpha2 are carried by the state.
void enforce_means(FieldState& s, bool project_oxygen = true);

/// One sweep: Oseen solve with buoyancy from the current n_hat, bacteria
/// with the new u and lagged (n, c) in the chemotaxis flux, oxygen with the
/// new u, new n and lagged c inside r; then relaxation and projection.
/// Throws std::logic_error if a mean drifts by more than 1e-8 (times max(1, L1 mass)) before projection.
FieldState picard_step(const FieldState& s, const ProblemData& data, const PicardOptions& opts,
                       StepDiagnostics* diag = nullptr);

SolveOutcome solve_stationary(const FieldState& initial, const ProblemData& data, const PicardOptions& opts);

/// Stationary Navier-Stokes problem S_c(-lap u) + (u.grad)u + S_c grad p = F
/// with no-slip walls, solved by Oseen iterations (no buoyancy).
struct NavierStokesResult {
    VectorField u;
    ScalarField p;
    int iterations = 0;
    bool converged = false;
};
NavierStokesResult solve_navier_stokes(const MacGrid& grid, double S_c, const VectorField& F,
                                       const PicardOptions& opts);

/// A random state with divergence-free u and zero-mean densities.
FieldState random_state(const MacGrid& grid, double alpha1, double alpha2, std::uint64_t seed,
                        double amplitude = 1.0);

}  // namespace bioconv
