#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bioconv/grid.hpp"
#include "bioconv/model.hpp"

namespace bioconv {

// Discrete operators on the MAC grid. All stencils are second order and
// centred. Boundary conventions:
//  * velocity: homogeneous Dirichlet everywhere. Values stored on boundary
//    faces are ignored and treated as zero; tangential ghosts reflect
//    (ghost = -interior).
//  * scalars: boundary faces carry zero total flux unless stated otherwise.

/// Face gradient of a cell field; boundary faces get 0.
VectorField gradient(const ScalarField& s);

/// Cell divergence of a face field (boundary face values included).
ScalarField divergence(const VectorField& v);

/// Cell divergence with boundary face values treated as zero.
ScalarField divergence_no_penetration(const VectorField& v);

enum class ScalarBoundary { neumann, dirichlet_zero };

/// 7-point Laplacian. neumann: zero boundary flux, equal to div(grad s).
/// dirichlet_zero: reflected ghosts (value 0 on the wall).
ScalarField laplacian_scalar(const ScalarField& s, ScalarBoundary bc = ScalarBoundary::neumann);

/// Componentwise vector Laplacian with no-slip walls; 0 on boundary faces.
VectorField laplacian_velocity(const VectorField& u);

/// Skew-symmetric advection (u . grad) s. Satisfies <advect(u,s), t> =
/// -<advect(u,t), s> exactly for every face field u with no boundary flux.
ScalarField advect_scalar(const VectorField& u, const ScalarField& s);

/// Skew-symmetric momentum advection (u . grad) w on the staggered
/// control volumes; 0 on boundary faces.
VectorField advect_velocity(const VectorField& u, const VectorField& w);

/// chi div(n r(c) grad c) with face-averaged n and r(c). Boundary faces
/// carry no flux (zero total bacterial flux), so the cell sum vanishes.
ScalarField chemotaxis_term(const ScalarField& n, const ScalarField& c,
                            const ConsumptionFunction& r, double chi);

// Inner products and norms (cell volume weights).

double dot(const ScalarField& a, const ScalarField& b);
/// Sum over interior faces only.
double dot(const VectorField& a, const VectorField& b);
double l2_norm(const ScalarField& s);
double l2_norm(const VectorField& v);
/// Mean value over the domain.
double mean(const ScalarField& s);
/// Domain integral (sum of cell values times cell volume).
double integral(const ScalarField& s);
/// Gradient L2 norm with zero-flux boundaries (the zero-mean H1 norm).
double h1_seminorm(const ScalarField& s);
double h1_norm(const ScalarField& s);
/// Gradient L2 norm of a no-slip velocity field: sqrt(<-lap u, u>).
double v_norm(const VectorField& u);

/// Edge-centred vector potential: component a lives on the edges parallel
/// to axis a (cell-centred along a, nodal in the other two directions).
struct EdgeField {
    explicit EdgeField(const MacGrid& grid);
    MacGrid grid;
    std::array<std::vector<double>, 3> comps;
    [[nodiscard]] std::array<int, 3> dims(int axis) const;
    [[nodiscard]] std::size_t index(int axis, int i, int j, int k) const;
    /// True when the edge lies inside a boundary face.
    [[nodiscard]] bool on_boundary(int axis, int i, int j, int k) const;
};

/// Discrete curl from edges to faces; div(curl psi) = 0 exactly. Boundary
/// edges should be zero for the result to have no boundary flux.
VectorField curl(const EdgeField& psi);

/// Divergence-free, no-slip velocity from a random edge potential.
VectorField random_divergence_free(const MacGrid& grid, std::uint64_t seed, double amplitude = 1.0);
/// Random zero-mean cell field.
ScalarField random_zero_mean(const MacGrid& grid, std::uint64_t seed, double amplitude = 1.0);

/// Average face velocities to cell centres (visualisation only).
std::array<ScalarField, 3> velocity_at_cells(const VectorField& u);

// Boundary ghosts ---------------------------------------------------------

enum class OxygenTopBc { neumann, dirichlet };

/// Ghost values for the boundary-adjacent cells, one array per boundary
/// side (order: x-, x+, y-, y+, z-, z+), indexed like the face layer.
struct BoundaryGhosts {
    std::array<std::vector<double>, 6> side;
};

/// Index of a boundary face within its side array.
std::size_t side_index(const MacGrid& grid, int side, int i, int j, int k);
/// Cell adjacent to boundary face `f` of `side` given side-local coordinates.
std::array<int, 3> side_cell(const MacGrid& grid, int side, int a, int b);
/// Dimensions of the side array (the two tangential extents).
std::array<int, 2> side_dims(const MacGrid& grid, int side);

/// Oxygen ghosts: Neumann on x3 = 0; on the upper boundary either Neumann
/// or Dirichlet with value c_top (ghost = 2 c_top - interior).
BoundaryGhosts oxygen_ghosts(const ScalarField& c, OxygenTopBc top, double c_top);

/// Bacteria ghosts: Neumann on x3 = 0; on the upper boundary the ghost
/// solves grad n . nu = chi n r(c) grad c . nu with r frozen at the given c.
BoundaryGhosts bacteria_ghosts(const ScalarField& n, const ScalarField& c,
                               const BoundaryGhosts& c_ghosts, const ConsumptionFunction& r,
                               double chi);

/// Max over upper-boundary faces of |grad n . nu - chi n r(c) grad c . nu|
/// evaluated from the ghosts.
double bacteria_boundary_flux_residual(const ScalarField& n, const ScalarField& c,
                                       const BoundaryGhosts& n_ghosts,
                                       const BoundaryGhosts& c_ghosts,
                                       const ConsumptionFunction& r, double chi);

}  // namespace bioconv
