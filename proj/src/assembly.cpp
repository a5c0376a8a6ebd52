#include "bioconv/assembly.hpp"

#include <stdexcept>

namespace bioconv {

namespace {

constexpr int kLowerSide = 4;  // x3 = 0

inline int coord(const std::array<int, 3>& p, int axis) { return p[static_cast<std::size_t>(axis)]; }

inline std::array<int, 3> plus(std::array<int, 3> p, int axis, int d) {
    p[static_cast<std::size_t>(axis)] += d;
    return p;
}

template <class F>
void for_each_cell(const MacGrid& g, F&& f) {
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) f(std::array<int, 3>{i, j, k});
}

template <class F>
void for_each_face(const MacGrid& g, int axis, F&& f) {
    const auto d = g.face_dims(axis);
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) f(std::array<int, 3>{i, j, k});
}

bool in_cells(const MacGrid& g, const std::array<int, 3>& p) {
    for (int a = 0; a < 3; ++a)
        if (coord(p, a) < 0 || coord(p, a) >= g.n(a)) return false;
    return true;
}

// Normal index strictly inside, tangential indices in range.
bool interior_face(const MacGrid& g, int axis, const std::array<int, 3>& p) {
    for (int b = 0; b < 3; ++b) {
        const int lo = b == axis ? 1 : 0;
        if (coord(p, b) < lo || coord(p, b) > g.n(b) - 1) return false;
    }
    return true;
}

std::size_t flat_face(const MacGrid& g, int axis, const std::array<int, 3>& p) {
    return face_offset(g, axis) + g.face_index(axis, p[0], p[1], p[2]);
}

std::size_t cell(const MacGrid& g, const std::array<int, 3>& p) { return g.cell_index(p[0], p[1], p[2]); }

std::size_t total_faces(const MacGrid& g) { return g.face_count(0) + g.face_count(1) + g.face_count(2); }

double face_value(const VectorField& u, int axis, const std::array<int, 3>& p) {
    return interior_face(u.grid(), axis, p) ? u.at(axis, p[0], p[1], p[2]) : 0.0;
}

void add_to_diagonal(SparseMatrix& A, std::size_t r, double v) {
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_index();
    for (std::size_t q = rp[r]; q < rp[r + 1]; ++q) {
        if (ci[q] == r) {
            A.values()[q] += v;
            return;
        }
    }
    throw std::logic_error("add_to_diagonal: missing diagonal slot");
}

}  // namespace

BoundaryTag boundary_tag_from_string(const std::string& name) {
    if (name == "velocity") return BoundaryTag::velocity;
    if (name == "bacteria") return BoundaryTag::bacteria;
    if (name == "oxygen") return BoundaryTag::oxygen;
    throw std::invalid_argument("unknown boundary tag '" + name + "'");
}

SparseMatrix velocity_laplacian_matrix(const MacGrid& g) {
    std::vector<Triplet> t;
    t.reserve(total_faces(g) * 7);
    for (int m = 0; m < 3; ++m) {
        for_each_face(g, m, [&](const std::array<int, 3>& p) {
            const std::size_t row = flat_face(g, m, p);
            if (!interior_face(g, m, p)) {
                t.push_back({row, row, 0.0});  // slot for the wall identity row
                return;
            }
            double diag = 0.0;
            for (int b = 0; b < 3; ++b) {
                const double ih2 = 1.0 / (g.h(b) * g.h(b));
                for (int d : {-1, 1}) {
                    const auto q = plus(p, b, d);
                    diag -= ih2;
                    if (interior_face(g, m, q)) {
                        t.push_back({row, flat_face(g, m, q), ih2});
                    } else if (b != m) {
                        diag -= ih2;  // reflected ghost: value -w beyond the wall
                    }
                }
            }
            t.push_back({row, row, diag});
        });
    }
    const std::size_t nf = total_faces(g);
    return SparseMatrix(nf, nf, std::move(t));
}

SparseMatrix velocity_advection_matrix(const VectorField& u) {
    const MacGrid& g = u.grid();
    std::vector<Triplet> t;
    t.reserve(total_faces(g) * 6);
    for (int m = 0; m < 3; ++m) {
        for_each_face(g, m, [&](const std::array<int, 3>& p) {
            if (!interior_face(g, m, p)) return;
            const std::size_t row = flat_face(g, m, p);
            for (int b = 0; b < 3; ++b) {
                const double ih = 1.0 / g.h(b);
                double Uh, Ul;
                if (b == m) {
                    Uh = 0.5 * (face_value(u, m, p) + face_value(u, m, plus(p, m, 1)));
                    Ul = 0.5 * (face_value(u, m, plus(p, m, -1)) + face_value(u, m, p));
                } else {
                    const auto cl = plus(p, m, -1);
                    Uh = 0.5 * (face_value(u, b, plus(cl, b, 1)) + face_value(u, b, plus(p, b, 1)));
                    Ul = 0.5 * (face_value(u, b, cl) + face_value(u, b, p));
                }
                // the centre coefficient cancels against the -div/2 term
                const auto qh = plus(p, b, 1);
                const auto ql = plus(p, b, -1);
                if (interior_face(g, m, qh)) t.push_back({row, flat_face(g, m, qh), 0.5 * Uh * ih});
                if (interior_face(g, m, ql)) t.push_back({row, flat_face(g, m, ql), -0.5 * Ul * ih});
            }
        });
    }
    const std::size_t nf = total_faces(g);
    return SparseMatrix(nf, nf, std::move(t));
}

SparseMatrix scalar_laplacian_matrix(const MacGrid& g) {
    std::vector<Triplet> t;
    t.reserve(g.cell_count() * 7);
    for_each_cell(g, [&](const std::array<int, 3>& p) {
        const std::size_t row = cell(g, p);
        double diag = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double ih2 = 1.0 / (g.h(a) * g.h(a));
            for (int d : {-1, 1}) {
                const auto q = plus(p, a, d);
                if (!in_cells(g, q)) continue;
                t.push_back({row, cell(g, q), ih2});
                diag -= ih2;
            }
        }
        t.push_back({row, row, diag});
    });
    return SparseMatrix(g.cell_count(), g.cell_count(), std::move(t));
}

SparseMatrix scalar_advection_matrix(const VectorField& u) {
    const MacGrid& g = u.grid();
    std::vector<Triplet> t;
    t.reserve(g.cell_count() * 6);
    for_each_cell(g, [&](const std::array<int, 3>& p) {
        const std::size_t row = cell(g, p);
        for (int a = 0; a < 3; ++a) {
            const double ih = 1.0 / g.h(a);
            const auto hi = plus(p, a, 1);
            const auto lo = plus(p, a, -1);
            if (in_cells(g, hi)) t.push_back({row, cell(g, hi), 0.5 * face_value(u, a, hi) * ih});
            if (in_cells(g, lo)) t.push_back({row, cell(g, lo), -0.5 * face_value(u, a, p) * ih});
        }
    });
    return SparseMatrix(g.cell_count(), g.cell_count(), std::move(t));
}

SparseMatrix divergence_matrix(const MacGrid& g) {
    std::vector<Triplet> t;
    t.reserve(g.cell_count() * 6);
    for_each_cell(g, [&](const std::array<int, 3>& p) {
        const std::size_t row = cell(g, p);
        for (int a = 0; a < 3; ++a) {
            const double ih = 1.0 / g.h(a);
            const auto hi = plus(p, a, 1);
            if (interior_face(g, a, hi)) t.push_back({row, flat_face(g, a, hi), ih});
            if (interior_face(g, a, p)) t.push_back({row, flat_face(g, a, p), -ih});
        }
    });
    return SparseMatrix(g.cell_count(), total_faces(g), std::move(t));
}

SparseMatrix gradient_matrix(const MacGrid& g) {
    std::vector<Triplet> t;
    t.reserve(total_faces(g) * 2);
    for (int a = 0; a < 3; ++a) {
        const double ih = 1.0 / g.h(a);
        for_each_face(g, a, [&](const std::array<int, 3>& p) {
            if (!interior_face(g, a, p)) return;
            const std::size_t row = flat_face(g, a, p);
            t.push_back({row, cell(g, p), ih});
            t.push_back({row, cell(g, plus(p, a, -1)), -ih});
        });
    }
    return SparseMatrix(total_faces(g), g.cell_count(), std::move(t));
}

VectorField buoyancy_force(const ScalarField& n_hat, const DimensionlessGroups& groups, double gravity) {
    const MacGrid& g = n_hat.grid();
    VectorField out(g);
    const double scale = -groups.gamma * groups.S_c * gravity;
    for_each_face(g, 2, [&](const std::array<int, 3>& p) {
        if (!interior_face(g, 2, p)) return;
        const auto lo = plus(p, 2, -1);
        out.at(2, p[0], p[1], p[2]) = scale * 0.5 * (n_hat.at(p[0], p[1], p[2]) + n_hat.at(lo[0], lo[1], lo[2]));
    });
    return out;
}

void apply_boundary_conditions(OseenSystem& sys, const MacGrid& g) {
    auto& gvals = sys.G.values();
    const auto& grp = sys.G.row_ptr();
    for (int m = 0; m < 3; ++m) {
        for_each_face(g, m, [&](const std::array<int, 3>& p) {
            if (interior_face(g, m, p)) return;
            const std::size_t row = flat_face(g, m, p);
            sys.A.make_identity_row(row);
            sys.f[row] = 0.0;
            for (std::size_t q = grp[row]; q < grp[row + 1]; ++q) gvals[q] = 0.0;
        });
    }
}

void apply_boundary_conditions(ScalarSystem& sys, const MacGrid& g, BoundaryTag which,
                               const BoundarySettings& settings) {
    switch (which) {
        case BoundaryTag::velocity:
            throw std::invalid_argument("apply_boundary_conditions: velocity conditions need an OseenSystem");
        case BoundaryTag::bacteria:
            sys.mean_constraint = true;
            return;
        case BoundaryTag::oxygen:
            if (settings.oxygen_top == OxygenTopBc::neumann) {
                sys.mean_constraint = true;
                return;
            }
            break;
    }
    sys.mean_constraint = false;
    for_each_cell(g, [&](const std::array<int, 3>& p) {
        double extra = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double ih2 = 1.0 / (g.h(a) * g.h(a));
            if (coord(p, a) == 0 && 2 * a != kLowerSide) extra += 2.0 * ih2;
            if (coord(p, a) == g.n(a) - 1) extra += 2.0 * ih2;
        }
        if (extra != 0.0) add_to_diagonal(sys.K, cell(g, p), settings.diffusion * extra);
    });
}

namespace {

// K = d (-lap) + advection, summing two matrices with the same row space.
SparseMatrix combine(const SparseMatrix& lap, double neg_scale, const SparseMatrix& adv) {
    std::vector<Triplet> t;
    t.reserve(lap.nnz() + adv.nnz());
    for (const SparseMatrix* M : {&lap, &adv}) {
        const double s = M == &lap ? neg_scale : 1.0;
        for (std::size_t r = 0; r < M->rows(); ++r)
            for (std::size_t q = M->row_ptr()[r]; q < M->row_ptr()[r + 1]; ++q)
                t.push_back({r, M->col_index()[q], s * M->values()[q]});
    }
    return SparseMatrix(lap.rows(), lap.cols(), std::move(t));
}

void require_same(const MacGrid& a, const MacGrid& b, const char* where) {
    if (!(a == b)) throw GridMismatch(where);
}

}  // namespace

OseenSystem assemble_oseen(const VectorField& u_prev, const ScalarField& n_hat, const DimensionlessGroups& groups,
                           double gravity, const VectorField& F) {
    const MacGrid& g = u_prev.grid();
    require_same(g, n_hat.grid(), "assemble_oseen");
    require_same(g, F.grid(), "assemble_oseen");
    OseenSystem sys;
    sys.A = combine(velocity_laplacian_matrix(g), -groups.S_c, velocity_advection_matrix(u_prev));
    sys.B = divergence_matrix(g);
    sys.G = gradient_matrix(g);
    for (double& v : sys.G.values()) v *= groups.S_c;
    VectorField rhs = buoyancy_force(n_hat, groups, gravity);
    rhs += F;
    sys.f = rhs.flatten();
    sys.g.assign(g.cell_count(), 0.0);
    apply_boundary_conditions(sys, g);
    const auto diag = sys.A.diagonal();
    for (double d : diag) {
        if (!(d > 0.0)) throw std::domain_error("assemble_oseen: non-positive diagonal (S_c must be positive)");
    }
    return sys;
}

ScalarSystem assemble_bacteria(const VectorField& u, const ScalarField& n_prev_hat, const ScalarField& c_prev_hat,
                               const ConsumptionFunction& r, double chi, double alpha1, double alpha2,
                               const ScalarField& f_n) {
    const MacGrid& g = u.grid();
    require_same(g, n_prev_hat.grid(), "assemble_bacteria");
    require_same(g, c_prev_hat.grid(), "assemble_bacteria");
    require_same(g, f_n.grid(), "assemble_bacteria");
    ScalarSystem sys;
    sys.K = combine(scalar_laplacian_matrix(g), -1.0, scalar_advection_matrix(u));
    sys.rhs = f_n.values();
    if (chi != 0.0) {
        ScalarField n = n_prev_hat;
        n.shift(alpha1 / g.measure());
        ScalarField c = c_prev_hat;
        c.shift(alpha2 / g.measure());
        const ScalarField chem = chemotaxis_term(n, c, r, chi);
        for (std::size_t q = 0; q < sys.rhs.size(); ++q) sys.rhs[q] -= chem[q];
    }
    apply_boundary_conditions(sys, g, BoundaryTag::bacteria);
    return sys;
}

ScalarSystem assemble_oxygen(const VectorField& u, const ScalarField& n_hat, const ScalarField& c_prev_hat,
                             const ConsumptionFunction& r, double delta, double beta, double alpha1,
                             double alpha2, const ScalarField& f_c, OxygenTopBc top) {
    const MacGrid& g = u.grid();
    require_same(g, n_hat.grid(), "assemble_oxygen");
    require_same(g, c_prev_hat.grid(), "assemble_oxygen");
    require_same(g, f_c.grid(), "assemble_oxygen");
    ScalarSystem sys;
    sys.K = combine(scalar_laplacian_matrix(g), -delta, scalar_advection_matrix(u));
    sys.rhs = f_c.values();
    if (beta != 0.0) {
        const double nbar = alpha1 / g.measure();
        const double cbar = alpha2 / g.measure();
        for (std::size_t q = 0; q < sys.rhs.size(); ++q)
            sys.rhs[q] -= beta * r(c_prev_hat[q] + cbar) * (n_hat[q] + nbar);
    }
    apply_boundary_conditions(sys, g, BoundaryTag::oxygen, BoundarySettings{top, delta});
    return sys;
}

}  // namespace bioconv
