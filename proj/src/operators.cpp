#include "bioconv/operators.hpp"

#include <cmath>
#include <random>

namespace bioconv {

namespace {

void require_same(const MacGrid& a, const MacGrid& b, const char* where) {
    if (!(a == b)) throw GridMismatch(where);
}

// Unit offset along axis.
constexpr std::array<std::array<int, 3>, 3> kUnit{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

inline std::array<int, 3> plus(std::array<int, 3> p, int axis, int d) {
    p[static_cast<std::size_t>(axis)] += d;
    return p;
}

inline int coord(const std::array<int, 3>& p, int axis) { return p[static_cast<std::size_t>(axis)]; }

// Face value treating boundary faces (and out-of-range indices) as zero.
inline double face_or_zero(const VectorField& u, int axis, const std::array<int, 3>& p) {
    const MacGrid& g = u.grid();
    const int idx = coord(p, axis);
    if (idx <= 0 || idx >= g.n(axis)) return 0.0;
    for (int b = 0; b < 3; ++b) {
        if (b == axis) continue;
        if (coord(p, b) < 0 || coord(p, b) >= g.n(b)) return 0.0;
    }
    return u.at(axis, p[0], p[1], p[2]);
}

template <class F>
void for_each_cell(const MacGrid& g, F&& f) {
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) f(i, j, k);
}

template <class F>
void for_each_face(const MacGrid& g, int axis, F&& f) {
    const auto d = g.face_dims(axis);
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) f(i, j, k);
}

std::array<int, 2> tangential_axes(int axis) {
    switch (axis) {
        case 0: return {1, 2};
        case 1: return {0, 2};
        default: return {0, 1};
    }
}

}  // namespace

VectorField gradient(const ScalarField& s) {
    const MacGrid& g = s.grid();
    VectorField out(g);
    for (int a = 0; a < 3; ++a) {
        const double inv_h = 1.0 / g.h(a);
        auto& comp = out.component(a);
        for_each_face(g, a, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            const int idx = coord(p, a);
            if (idx == 0 || idx == g.n(a)) return;
            const auto lo = plus(p, a, -1);
            comp[g.face_index(a, i, j, k)] = (s.at(i, j, k) - s.at(lo[0], lo[1], lo[2])) * inv_h;
        });
    }
    return out;
}

namespace {

ScalarField divergence_impl(const VectorField& v, bool include_boundary) {
    const MacGrid& g = v.grid();
    ScalarField out(g);
    for_each_cell(g, [&](int i, int j, int k) {
        double acc = 0.0;
        for (int a = 0; a < 3; ++a) {
            const std::array<int, 3> p{i, j, k};
            const auto hi = plus(p, a, 1);
            double vhi = v.at(a, hi[0], hi[1], hi[2]);
            double vlo = v.at(a, i, j, k);
            if (!include_boundary) {
                if (coord(hi, a) == g.n(a)) vhi = 0.0;
                if (coord(p, a) == 0) vlo = 0.0;
            }
            acc += (vhi - vlo) / g.h(a);
        }
        out.at(i, j, k) = acc;
    });
    return out;
}

}  // namespace

ScalarField divergence(const VectorField& v) { return divergence_impl(v, true); }
ScalarField divergence_no_penetration(const VectorField& v) { return divergence_impl(v, false); }

ScalarField laplacian_scalar(const ScalarField& s, ScalarBoundary bc) {
    const MacGrid& g = s.grid();
    ScalarField out(g);
    for_each_cell(g, [&](int i, int j, int k) {
        const std::array<int, 3> p{i, j, k};
        const double sc = s.at(i, j, k);
        double acc = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double h2 = g.h(a) * g.h(a);
            for (int d : {-1, 1}) {
                const auto q = plus(p, a, d);
                if (coord(q, a) < 0 || coord(q, a) >= g.n(a)) {
                    if (bc == ScalarBoundary::dirichlet_zero) acc += (-sc - sc) / h2;
                    continue;
                }
                acc += (s.at(q[0], q[1], q[2]) - sc) / h2;
            }
        }
        out.at(i, j, k) = acc;
    });
    return out;
}

VectorField laplacian_velocity(const VectorField& u) {
    const MacGrid& g = u.grid();
    VectorField out(g);
    for (int m = 0; m < 3; ++m) {
        auto& comp = out.component(m);
        for_each_face(g, m, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            if (coord(p, m) == 0 || coord(p, m) == g.n(m)) return;
            const double w = u.at(m, i, j, k);
            double acc = 0.0;
            for (int b = 0; b < 3; ++b) {
                const double h2 = g.h(b) * g.h(b);
                for (int d : {-1, 1}) {
                    const auto q = plus(p, b, d);
                    double wn;
                    if (b == m) {
                        wn = face_or_zero(u, m, q);
                    } else if (coord(q, b) < 0 || coord(q, b) >= g.n(b)) {
                        wn = -w;
                    } else {
                        wn = u.at(m, q[0], q[1], q[2]);
                    }
                    acc += (wn - w) / h2;
                }
            }
            comp[g.face_index(m, i, j, k)] = acc;
        });
    }
    return out;
}

ScalarField advect_scalar(const VectorField& u, const ScalarField& s) {
    require_same(u.grid(), s.grid(), "advect_scalar");
    const MacGrid& g = s.grid();
    ScalarField out(g);
    for_each_cell(g, [&](int i, int j, int k) {
        const std::array<int, 3> p{i, j, k};
        const double sc = s.at(i, j, k);
        double conv = 0.0;
        double div = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double inv_h = 1.0 / g.h(a);
            const auto hi = plus(p, a, 1);
            const double uh = face_or_zero(u, a, hi);
            const double ul = face_or_zero(u, a, p);
            const double sh = coord(hi, a) < g.n(a) ? s.at(hi[0], hi[1], hi[2]) : sc;
            const auto lo = plus(p, a, -1);
            const double sl = coord(lo, a) >= 0 ? s.at(lo[0], lo[1], lo[2]) : sc;
            conv += (uh * 0.5 * (sc + sh) - ul * 0.5 * (sl + sc)) * inv_h;
            div += (uh - ul) * inv_h;
        }
        out.at(i, j, k) = conv - 0.5 * div * sc;
    });
    return out;
}

VectorField advect_velocity(const VectorField& u, const VectorField& w) {
    require_same(u.grid(), w.grid(), "advect_velocity");
    const MacGrid& g = u.grid();
    VectorField out(g);
    for (int m = 0; m < 3; ++m) {
        auto& comp = out.component(m);
        for_each_face(g, m, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            if (coord(p, m) == 0 || coord(p, m) == g.n(m)) return;
            const double wc = w.at(m, i, j, k);
            double conv = 0.0;
            double div = 0.0;
            for (int b = 0; b < 3; ++b) {
                const double inv_h = 1.0 / g.h(b);
                double Uh, Ul;
                if (b == m) {
                    Uh = 0.5 * (face_or_zero(u, m, p) + face_or_zero(u, m, plus(p, m, 1)));
                    Ul = 0.5 * (face_or_zero(u, m, plus(p, m, -1)) + face_or_zero(u, m, p));
                } else {
                    // cells on either side of the face along m
                    const auto cl = plus(p, m, -1);
                    const auto& cr = p;
                    Uh = 0.5 * (face_or_zero(u, b, plus(cl, b, 1)) + face_or_zero(u, b, plus(cr, b, 1)));
                    Ul = 0.5 * (face_or_zero(u, b, cl) + face_or_zero(u, b, cr));
                }
                const auto qh = plus(p, b, 1);
                const auto ql = plus(p, b, -1);
                // neighbours outside the domain only meet zero advecting velocity
                const double wh = face_or_zero(w, m, qh);
                const double wl = face_or_zero(w, m, ql);
                conv += (Uh * 0.5 * (wc + wh) - Ul * 0.5 * (wl + wc)) * inv_h;
                div += (Uh - Ul) * inv_h;
            }
            comp[g.face_index(m, i, j, k)] = conv - 0.5 * div * wc;
        });
    }
    return out;
}

ScalarField chemotaxis_term(const ScalarField& n, const ScalarField& c, const ConsumptionFunction& r,
                            double chi) {
    require_same(n.grid(), c.grid(), "chemotaxis_term");
    const MacGrid& g = n.grid();
    ScalarField out(g);
    if (chi == 0.0) return out;
    std::vector<double> rc(c.size());
    for (std::size_t q = 0; q < c.size(); ++q) rc[q] = r(c[q]);
    for (int a = 0; a < 3; ++a) {
        const double inv_h = 1.0 / g.h(a);
        for_each_face(g, a, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            if (coord(p, a) == 0 || coord(p, a) == g.n(a)) return;
            const auto lo = plus(p, a, -1);
            const std::size_t L = g.cell_index(lo[0], lo[1], lo[2]);
            const std::size_t R = g.cell_index(i, j, k);
            const double flux =
                chi * 0.5 * (n[L] + n[R]) * 0.5 * (rc[L] + rc[R]) * (c[R] - c[L]) * inv_h;
            out[L] += flux * inv_h;
            out[R] -= flux * inv_h;
        });
    }
    return out;
}

double dot(const ScalarField& a, const ScalarField& b) {
    require_same(a.grid(), b.grid(), "dot");
    double acc = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) acc += a[q] * b[q];
    return acc * a.grid().cell_volume();
}

double dot(const VectorField& a, const VectorField& b) {
    require_same(a.grid(), b.grid(), "dot");
    const MacGrid& g = a.grid();
    double acc = 0.0;
    for (int m = 0; m < 3; ++m) {
        for_each_face(g, m, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            if (coord(p, m) == 0 || coord(p, m) == g.n(m)) return;
            acc += a.at(m, i, j, k) * b.at(m, i, j, k);
        });
    }
    return acc * g.cell_volume();
}

double l2_norm(const ScalarField& s) { return std::sqrt(dot(s, s)); }
double l2_norm(const VectorField& v) { return std::sqrt(dot(v, v)); }

double integral(const ScalarField& s) {
    // Neumaier summation keeps mean projections accurate to the last bit.
    double sum = 0.0;
    double comp = 0.0;
    for (double v : s.values()) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return (sum + comp) * s.grid().cell_volume();
}

double mean(const ScalarField& s) { return integral(s) / s.grid().measure(); }

double h1_seminorm(const ScalarField& s) {
    const MacGrid& g = s.grid();
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double inv_h = 1.0 / g.h(a);
        for_each_face(g, a, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            if (coord(p, a) == 0 || coord(p, a) == g.n(a)) return;
            const auto lo = plus(p, a, -1);
            const double d = (s.at(i, j, k) - s.at(lo[0], lo[1], lo[2])) * inv_h;
            acc += d * d;
        });
    }
    return std::sqrt(acc * g.cell_volume());
}

double h1_norm(const ScalarField& s) {
    const double a = l2_norm(s);
    const double b = h1_seminorm(s);
    return std::sqrt(a * a + b * b);
}

double v_norm(const VectorField& u) {
    const MacGrid& g = u.grid();
    double acc = 0.0;
    for (int m = 0; m < 3; ++m) {
        for (int b = 0; b < 3; ++b) {
            const double inv_h = 1.0 / g.h(b);
            if (b == m) {
                // consecutive faces along m, walls included as zeros
                for_each_cell(g, [&](int i, int j, int k) {
                    const std::array<int, 3> p{i, j, k};
                    const double d =
                        (face_or_zero(u, m, plus(p, m, 1)) - face_or_zero(u, m, p)) * inv_h;
                    acc += d * d;
                });
                continue;
            }
            for_each_face(g, m, [&](int i, int j, int k) {
                const std::array<int, 3> p{i, j, k};
                if (coord(p, m) == 0 || coord(p, m) == g.n(m)) return;
                const double w = u.at(m, i, j, k);
                const int jb = coord(p, b);
                if (jb + 1 < g.n(b)) {
                    const auto q = plus(p, b, 1);
                    const double d = (u.at(m, q[0], q[1], q[2]) - w) * inv_h;
                    acc += d * d;
                }
                // wall edges span half a cell with gradient 2w/h
                if (jb == 0 || jb == g.n(b) - 1) {
                    const double d = 2.0 * w * inv_h;
                    acc += 0.5 * d * d;
                }
            });
        }
    }
    return std::sqrt(acc * g.cell_volume());
}

EdgeField::EdgeField(const MacGrid& g) : grid(g) {
    for (int a = 0; a < 3; ++a) {
        const auto d = dims(a);
        comps[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0.0);
    }
}

std::array<int, 3> EdgeField::dims(int axis) const {
    std::array<int, 3> d{grid.n(0) + 1, grid.n(1) + 1, grid.n(2) + 1};
    d[static_cast<std::size_t>(axis)] -= 1;
    return d;
}

std::size_t EdgeField::index(int axis, int i, int j, int k) const {
    const auto d = dims(axis);
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(d[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(d[1]) * k);
}

bool EdgeField::on_boundary(int axis, int i, int j, int k) const {
    const std::array<int, 3> p{i, j, k};
    for (int b = 0; b < 3; ++b) {
        if (b == axis) continue;
        if (coord(p, b) == 0 || coord(p, b) == grid.n(b)) return true;
    }
    return false;
}

VectorField curl(const EdgeField& psi) {
    const MacGrid& g = psi.grid;
    VectorField u(g);
    auto val = [&](int axis, const std::array<int, 3>& p) {
        return psi.comps[static_cast<std::size_t>(axis)][psi.index(axis, p[0], p[1], p[2])];
    };
    for (int m = 0; m < 3; ++m) {
        const int b = (m + 1) % 3;
        const int c = (m + 2) % 3;
        auto& comp = u.component(m);
        for_each_face(g, m, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            // (curl psi)_m = d_b psi_c - d_c psi_b
            const double dpsi_c = (val(c, plus(p, b, 1)) - val(c, p)) / g.h(b);
            const double dpsi_b = (val(b, plus(p, c, 1)) - val(b, p)) / g.h(c);
            comp[g.face_index(m, i, j, k)] = dpsi_c - dpsi_b;
        });
    }
    return u;
}

VectorField random_divergence_free(const MacGrid& grid, std::uint64_t seed, double amplitude) {
    EdgeField psi(grid);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int a = 0; a < 3; ++a) {
        const auto d = psi.dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const double v = dist(rng);
                    if (!psi.on_boundary(a, i, j, k))
                        psi.comps[static_cast<std::size_t>(a)][psi.index(a, i, j, k)] = v;
                }
    }
    VectorField u = curl(psi);
    const double nrm = v_norm(u);
    if (nrm > 0.0) u *= amplitude / nrm;
    return u;
}

ScalarField random_zero_mean(const MacGrid& grid, std::uint64_t seed, double amplitude) {
    ScalarField s(grid);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : s.values()) v = dist(rng);
    s.shift(-mean(s));
    s.shift(-mean(s));
    const double nrm = l2_norm(s);
    if (nrm > 0.0) s *= amplitude / nrm;
    return s;
}

std::array<ScalarField, 3> velocity_at_cells(const VectorField& u) {
    const MacGrid& g = u.grid();
    std::array<ScalarField, 3> out{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (int a = 0; a < 3; ++a) {
        for_each_cell(g, [&](int i, int j, int k) {
            const std::array<int, 3> p{i, j, k};
            const auto hi = plus(p, a, 1);
            out[static_cast<std::size_t>(a)].at(i, j, k) =
                0.5 * (u.at(a, i, j, k) + u.at(a, hi[0], hi[1], hi[2]));
        });
    }
    return out;
}

// Boundary ghosts ---------------------------------------------------------

std::array<int, 2> side_dims(const MacGrid& grid, int side) {
    const auto t = tangential_axes(side / 2);
    return {grid.n(t[0]), grid.n(t[1])};
}

std::size_t side_index(const MacGrid& grid, int side, int i, int j, int k) {
    const auto t = tangential_axes(side / 2);
    const std::array<int, 3> p{i, j, k};
    return static_cast<std::size_t>(coord(p, t[0])) +
           static_cast<std::size_t>(grid.n(t[0])) * static_cast<std::size_t>(coord(p, t[1]));
}

std::array<int, 3> side_cell(const MacGrid& grid, int side, int a, int b) {
    const int axis = side / 2;
    const auto t = tangential_axes(axis);
    std::array<int, 3> p{};
    p[static_cast<std::size_t>(t[0])] = a;
    p[static_cast<std::size_t>(t[1])] = b;
    p[static_cast<std::size_t>(axis)] = (side % 2) ? grid.n(axis) - 1 : 0;
    return p;
}

namespace {

BoundaryGhosts allocate_ghosts(const MacGrid& g) {
    BoundaryGhosts gh;
    for (int s = 0; s < 6; ++s) {
        const auto d = side_dims(g, s);
        gh.side[static_cast<std::size_t>(s)].assign(static_cast<std::size_t>(d[0]) * d[1], 0.0);
    }
    return gh;
}

template <class F>
void for_each_side_cell(const MacGrid& g, int side, F&& f) {
    const auto d = side_dims(g, side);
    for (int b = 0; b < d[1]; ++b)
        for (int a = 0; a < d[0]; ++a) {
            const auto p = side_cell(g, side, a, b);
            f(static_cast<std::size_t>(a) + static_cast<std::size_t>(d[0]) * b, p);
        }
}

constexpr int kLowerSide = 4;  // x3 = 0

}  // namespace

BoundaryGhosts oxygen_ghosts(const ScalarField& c, OxygenTopBc top, double c_top) {
    const MacGrid& g = c.grid();
    BoundaryGhosts gh = allocate_ghosts(g);
    for (int s = 0; s < 6; ++s) {
        const bool dirichlet = top == OxygenTopBc::dirichlet && s != kLowerSide;
        for_each_side_cell(g, s, [&](std::size_t q, const std::array<int, 3>& p) {
            const double ci = c.at(p[0], p[1], p[2]);
            gh.side[static_cast<std::size_t>(s)][q] = dirichlet ? 2.0 * c_top - ci : ci;
        });
    }
    return gh;
}

BoundaryGhosts bacteria_ghosts(const ScalarField& n, const ScalarField& c, const BoundaryGhosts& c_ghosts,
                               const ConsumptionFunction& r, double chi) {
    require_same(n.grid(), c.grid(), "bacteria_ghosts");
    const MacGrid& g = n.grid();
    BoundaryGhosts gh = allocate_ghosts(g);
    for (int s = 0; s < 6; ++s) {
        for_each_side_cell(g, s, [&](std::size_t q, const std::array<int, 3>& p) {
            const double ni = n.at(p[0], p[1], p[2]);
            if (s == kLowerSide || chi == 0.0) {
                gh.side[static_cast<std::size_t>(s)][q] = ni;
                return;
            }
            const double ci = c.at(p[0], p[1], p[2]);
            const double cg = c_ghosts.side[static_cast<std::size_t>(s)][q];
            // outward differences: (n_g - n_i) = chi * (n_g + n_i)/2 * rbar * (c_g - c_i)
            const double rbar = 0.5 * (r(ci) + r(cg));
            const double qf = 0.5 * chi * rbar * (cg - ci);
            if (!(std::abs(qf) < 1.0)) {
                throw std::domain_error("bacteria_ghosts: Robin ghost undefined (|chi r dc/2| >= 1)");
            }
            gh.side[static_cast<std::size_t>(s)][q] = ni * (1.0 + qf) / (1.0 - qf);
        });
    }
    return gh;
}

double bacteria_boundary_flux_residual(const ScalarField& n, const ScalarField& c,
                                       const BoundaryGhosts& n_ghosts, const BoundaryGhosts& c_ghosts,
                                       const ConsumptionFunction& r, double chi) {
    const MacGrid& g = n.grid();
    double worst = 0.0;
    for (int s = 0; s < 6; ++s) {
        if (s == kLowerSide) continue;
        const double h = g.h(s / 2);
        for_each_side_cell(g, s, [&](std::size_t q, const std::array<int, 3>& p) {
            const double ni = n.at(p[0], p[1], p[2]);
            const double ci = c.at(p[0], p[1], p[2]);
            const double ng = n_ghosts.side[static_cast<std::size_t>(s)][q];
            const double cg = c_ghosts.side[static_cast<std::size_t>(s)][q];
            const double dn = (ng - ni) / h;
            const double dc = (cg - ci) / h;
            const double flux = dn - chi * 0.5 * (ng + ni) * 0.5 * (r(ci) + r(cg)) * dc;
            worst = std::max(worst, std::abs(flux));
        });
    }
    return worst;
}

}  // namespace bioconv
