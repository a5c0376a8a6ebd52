#pragma once

#include <string>
#include <vector>

#include "bioconv/grid.hpp"
#include "bioconv/model.hpp"
#include "bioconv/operators.hpp"
#include "bioconv/sparse.hpp"

namespace bioconv {

/// Linearised momentum/continuity system [A G; B 0][u; p] = [f; 0] over the
/// flattened face ordering (x, y, z components) and the cell ordering.
struct OseenSystem {
    SparseMatrix A;  ///< S_c (-lap) + skew advection at u_prev; identity rows on wall faces
    SparseMatrix B;  ///< divergence, wall-face columns dropped
    SparseMatrix G;  ///< S_c grad, zero rows on wall faces
    std::vector<double> f;
    std::vector<double> g;
};

/// Scalar convection-diffusion system K x = rhs for a shifted variable.
/// With mean_constraint the system is solved in the bordered form
/// [K 1; 1^T 0] so that x has zero sum.
struct ScalarSystem {
    SparseMatrix K;
    std::vector<double> rhs;
    bool mean_constraint = true;
};

enum class BoundaryTag { velocity, bacteria, oxygen };

/// "velocity", "bacteria" or "oxygen"; throws std::invalid_argument otherwise.
BoundaryTag boundary_tag_from_string(const std::string& name);

struct BoundarySettings {
    OxygenTopBc oxygen_top = OxygenTopBc::neumann;
    double diffusion = 1.0;  ///< coefficient in front of -lap (delta for oxygen)
};

/// Interior stencils are assembled first; this adds the wall treatment.
///  velocity: wall-face rows of A become identity rows with zero right side
///            and the matching rows of G are cleared.
///  bacteria: nothing to add; wall faces carry zero total flux, which the
///            flux-form stencils already encode by omitting them.
///  oxygen:   neumann adds nothing; dirichlet (value alpha2/|Omega|, i.e.
///            c_hat = 0) adds the reflected-ghost coefficient 2 d/h^2 to
///            cells touching the upper boundary and drops the mean constraint.
void apply_boundary_conditions(OseenSystem& sys, const MacGrid& grid);
void apply_boundary_conditions(ScalarSystem& sys, const MacGrid& grid, BoundaryTag which,
                               const BoundarySettings& settings = {});

/// Interior stencil matrices; each equals the matching operator in
/// operators.hpp applied to a field.
SparseMatrix velocity_laplacian_matrix(const MacGrid& grid);
SparseMatrix velocity_advection_matrix(const VectorField& u);
SparseMatrix scalar_laplacian_matrix(const MacGrid& grid);
SparseMatrix scalar_advection_matrix(const VectorField& u);
SparseMatrix divergence_matrix(const MacGrid& grid);
SparseMatrix gradient_matrix(const MacGrid& grid);

/// Buoyancy gamma S_c n_hat (0,0,-gravity), averaged onto z faces.
VectorField buoyancy_force(const ScalarField& n_hat, const DimensionlessGroups& groups, double gravity);

/// Momentum system linearised at u_prev with buoyancy from n_hat.
/// Throws std::domain_error if the assembled diagonal is not positive.
OseenSystem assemble_oseen(const VectorField& u_prev, const ScalarField& n_hat, const DimensionlessGroups& groups,
                           double gravity, const VectorField& F);

/// -lap n_hat + u.grad n_hat = f_n - chi div(n r(c) grad c) with the
/// chemotaxis flux evaluated at the lagged (n_prev, c_prev) (shifted values;
/// the means alpha1/|Omega|, alpha2/|Omega| are added back here).
ScalarSystem assemble_bacteria(const VectorField& u, const ScalarField& n_prev_hat, const ScalarField& c_prev_hat,
                               const ConsumptionFunction& r, double chi, double alpha1, double alpha2,
                               const ScalarField& f_n);

/// -delta lap c_hat + u.grad c_hat = f_c - beta r(c_prev) n with the current n.
ScalarSystem assemble_oxygen(const VectorField& u, const ScalarField& n_hat, const ScalarField& c_prev_hat,
                             const ConsumptionFunction& r, double delta, double beta, double alpha1,
                             double alpha2, const ScalarField& f_c, OxygenTopBc top = OxygenTopBc::neumann);

}  // namespace bioconv
