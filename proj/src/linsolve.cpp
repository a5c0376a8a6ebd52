#include "bioconv/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace bioconv {

std::string to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::cg: return "cg";
        case SolveMethod::bicgstab: return "bicgstab";
        case SolveMethod::gmres: return "gmres";
        case SolveMethod::uzawa: return "uzawa";
        case SolveMethod::dense: return "dense";
    }
    return "unknown";
}

std::string to_string(Preconditioning p) {
    switch (p) {
        case Preconditioning::none: return "none";
        case Preconditioning::jacobi: return "jacobi";
        case Preconditioning::ilu0: return "ilu0";
        case Preconditioning::milu0: return "milu0";
    }
    return "unknown";
}

void SolveOptions::validate() const {
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("SolveOptions: tolerance must lie in (0,1)");
    if (max_iterations < 1) throw std::invalid_argument("SolveOptions: max_iterations must be >= 1");
    if (restart < 1) throw std::invalid_argument("SolveOptions: restart must be >= 1");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

namespace {

double true_residual(const LinearOperator& A, std::span<const double> b, std::span<const double> x,
                     std::vector<double>& work) {
    work.resize(b.size());
    A(x, work);
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = b[i] - work[i];
        acc += d * d;
    }
    const double nb = norm2(b);
    return nb > 0.0 ? std::sqrt(acc) / nb : std::sqrt(acc);
}

}  // namespace

// Preconditioners -----------------------------------------------------------

Preconditioner Preconditioner::identity() {
    return {[](std::span<const double> r, std::span<double> z) { std::copy(r.begin(), r.end(), z.begin()); }};
}

Preconditioner Preconditioner::jacobi(const SparseMatrix& A) {
    auto d = A.diagonal();
    for (double& v : d) v = v != 0.0 ? 1.0 / v : 1.0;
    return {[inv = std::move(d)](std::span<const double> r, std::span<double> z) {
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv[i] * r[i];
    }};
}

namespace {

struct IluFactors {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;
    std::vector<std::size_t> diag;
};

IluFactors factor_ilu0(const SparseMatrix& A, bool modified, double shift) {
    IluFactors f;
    f.n = A.rows();
    f.row_ptr = A.row_ptr();
    f.col = A.col_index();
    f.val = A.values();
    f.diag.assign(f.n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < f.n; ++i) {
        for (std::size_t p = f.row_ptr[i]; p < f.row_ptr[i + 1]; ++p) {
            if (f.col[p] == i) {
                f.diag[i] = p;
                f.val[p] += shift * std::abs(f.val[p]);
            }
        }
        if (f.diag[i] == std::numeric_limits<std::size_t>::max()) {
            throw std::invalid_argument("ilu0: missing diagonal entry in row " + std::to_string(i));
        }
    }
    std::vector<std::size_t> pos(f.n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < f.n; ++i) {
        for (std::size_t p = f.row_ptr[i]; p < f.row_ptr[i + 1]; ++p) pos[f.col[p]] = p;
        double dropped = 0.0;
        for (std::size_t p = f.row_ptr[i]; p < f.row_ptr[i + 1] && f.col[p] < i; ++p) {
            const std::size_t k = f.col[p];
            const double pivot = f.val[f.diag[k]];
            f.val[p] /= pivot;
            const double lik = f.val[p];
            for (std::size_t q = f.diag[k] + 1; q < f.row_ptr[k + 1]; ++q) {
                const std::size_t j = f.col[q];
                if (pos[j] != std::numeric_limits<std::size_t>::max()) {
                    f.val[pos[j]] -= lik * f.val[q];
                } else if (modified) {
                    dropped += lik * f.val[q];
                }
            }
        }
        if (modified) f.val[f.diag[i]] -= dropped;
        if (f.val[f.diag[i]] == 0.0 || !std::isfinite(f.val[f.diag[i]])) {
            f.val[f.diag[i]] = 1.0;  // zero pivot: fall back to identity on this row
        }
        for (std::size_t p = f.row_ptr[i]; p < f.row_ptr[i + 1]; ++p) pos[f.col[p]] = std::numeric_limits<std::size_t>::max();
    }
    return f;
}

}  // namespace

Preconditioner Preconditioner::ilu0(const SparseMatrix& A, bool modified, double shift) {
    auto f = std::make_shared<IluFactors>(factor_ilu0(A, modified, shift));
    return {[f](std::span<const double> r, std::span<double> z) {
        const std::size_t n = f->n;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = r[i];
            for (std::size_t p = f->row_ptr[i]; p < f->diag[i]; ++p) acc -= f->val[p] * z[f->col[p]];
            z[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = z[ii];
            for (std::size_t p = f->diag[ii] + 1; p < f->row_ptr[ii + 1]; ++p) acc -= f->val[p] * z[f->col[p]];
            z[ii] = acc / f->val[f->diag[ii]];
        }
    }};
}

Preconditioner Preconditioner::make(const SparseMatrix& A, Preconditioning kind, double shift) {
    switch (kind) {
        case Preconditioning::none: return identity();
        case Preconditioning::jacobi: return jacobi(A);
        case Preconditioning::ilu0: return ilu0(A, false, shift);
        case Preconditioning::milu0: return ilu0(A, true, shift);
    }
    return identity();
}

// Krylov kernels ------------------------------------------------------------

SolveStats conjugate_gradient(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                              const Preconditioner& M, double tol, int max_it,
                              const std::function<void(std::span<double>)>& project) {
    SolveStats st;
    st.method = "cg";
    const std::size_t n = b.size();
    std::fill(x.begin(), x.end(), 0.0);
    const double nb = norm2(b);
    std::vector<double> work;
    if (nb == 0.0) {
        st.converged = true;
        return st;
    }
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    if (project) project(r);
    M.apply(r, z);
    if (project) project(z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_it; ++it) {
        A(p, q);
        const double pq = dot(p, q);
        if (pq <= 0.0) break;  // loss of definiteness
        const double alpha = rz / pq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        if (project) project(r);
        const double rel = norm2(r) / nb;
        st.history.push_back(rel);
        st.iterations = it;
        if (rel <= tol) {
            if (project) project(x);
            st.residual = true_residual(A, b, x, work);
            if (st.residual <= tol) {
                st.converged = true;
                return st;
            }
            // recurrence drifted: refresh the residual and carry on
            A(x, q);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
            if (project) project(r);
        }
        M.apply(r, z);
        if (project) project(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (project) project(x);
    st.residual = true_residual(A, b, x, work);
    st.converged = st.residual <= tol;
    return st;
}

SolveStats bicgstab(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                    const Preconditioner& M, double tol, int max_it) {
    SolveStats st;
    st.method = "bicgstab";
    const std::size_t n = b.size();
    std::fill(x.begin(), x.end(), 0.0);
    const double nb = norm2(b);
    std::vector<double> work;
    if (nb == 0.0) {
        st.converged = true;
        return st;
    }
    std::vector<double> r(b.begin(), b.end()), r0(n), p(n, 0.0), v(n, 0.0), ph(n), s(n), sh(n), t(n);
    int it = 0;
    while (it < max_it) {
        // (re)start from the current iterate
        A(x, t);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
        r0 = r;
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        bool restart = false;
        while (it < max_it && !restart) {
            ++it;
            const double rho_new = dot(r0, r);
            if (rho_new == 0.0 || omega == 0.0) {
                restart = true;
                break;
            }
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            M.apply(p, ph);
            A(ph, v);
            const double r0v = dot(r0, v);
            if (r0v == 0.0) {
                restart = true;
                break;
            }
            alpha = rho / r0v;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            if (norm2(s) / nb <= tol) {
                axpy(alpha, ph, x);
                st.history.push_back(norm2(s) / nb);
                st.residual = true_residual(A, b, x, work);
                if (st.residual <= tol) {
                    st.iterations = it;
                    st.converged = true;
                    return st;
                }
                restart = true;
                break;
            }
            M.apply(s, sh);
            A(sh, t);
            const double tt = dot(t, t);
            omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            const double rel = norm2(r) / nb;
            st.history.push_back(rel);
            if (!std::isfinite(rel)) break;
            if (rel <= tol) {
                st.residual = true_residual(A, b, x, work);
                if (st.residual <= tol) {
                    st.iterations = it;
                    st.converged = true;
                    return st;
                }
                restart = true;
            }
        }
        if (!restart) break;
    }
    st.iterations = it;
    st.residual = true_residual(A, b, x, work);
    st.converged = st.residual <= tol;
    return st;
}

SolveStats gmres(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                 const Preconditioner& M, double tol, int max_it, int restart,
                 const std::function<void(std::span<double>)>& project) {
    SolveStats st;
    st.method = "gmres(" + std::to_string(restart) + ")";
    const std::size_t n = b.size();
    std::fill(x.begin(), x.end(), 0.0);
    const double nb = norm2(b);
    std::vector<double> work;
    if (nb == 0.0) {
        st.converged = true;
        return st;
    }
    const auto m = static_cast<std::size_t>(restart);
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> Z(m, std::vector<double>(n));
    std::vector<double> H((m + 1) * m, 0.0), cs(m), sn(m), gvec(m + 1), w(n);
    auto h = [&](std::size_t i, std::size_t j) -> double& { return H[i * m + j]; };
    int it = 0;
    while (it < max_it) {
        A(x, w);
        for (std::size_t i = 0; i < n; ++i) V[0][i] = b[i] - w[i];
        if (project) project(V[0]);
        const double beta = norm2(V[0]);
        if (beta / nb <= tol) {
            st.residual = true_residual(A, b, x, work);
            if (st.residual <= tol) {
                st.converged = true;
                break;
            }
        }
        for (double& v : V[0]) v /= beta;
        std::fill(gvec.begin(), gvec.end(), 0.0);
        gvec[0] = beta;
        std::size_t k = 0;
        for (; k < m && it < max_it; ++k) {
            ++it;
            M.apply(V[k], Z[k]);
            if (project) project(Z[k]);
            A(Z[k], w);
            // modified Gram-Schmidt with one reorthogonalisation pass
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t i = 0; i <= k; ++i) {
                    const double hij = dot(w, V[i]);
                    h(i, k) += hij;
                    axpy(-hij, V[i], w);
                }
            }
            const double hn = norm2(w);
            h(k + 1, k) = hn;
            if (hn > 0.0)
                for (std::size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / hn;
            for (std::size_t i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double denom = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = denom > 0.0 ? h(k, k) / denom : 1.0;
            sn[k] = denom > 0.0 ? h(k + 1, k) / denom : 0.0;
            h(k, k) = denom;
            h(k + 1, k) = 0.0;
            gvec[k + 1] = -sn[k] * gvec[k];
            gvec[k] = cs[k] * gvec[k];
            const double rel = std::abs(gvec[k + 1]) / nb;
            st.history.push_back(rel);
            if (rel <= tol || hn == 0.0) {
                ++k;
                break;
            }
        }
        // back substitution and update
        std::vector<double> y(k, 0.0);
        for (std::size_t ii = k; ii-- > 0;) {
            double acc = gvec[ii];
            for (std::size_t j = ii + 1; j < k; ++j) acc -= h(ii, j) * y[j];
            y[ii] = h(ii, ii) != 0.0 ? acc / h(ii, ii) : 0.0;
        }
        for (std::size_t j = 0; j < k; ++j) axpy(y[j], Z[j], x);
        if (project) project(x);
        std::fill(H.begin(), H.end(), 0.0);
        st.residual = true_residual(A, b, x, work);
        if (st.residual <= tol) {
            st.converged = true;
            break;
        }
        if (!std::isfinite(st.residual)) break;
    }
    st.iterations = it;
    st.residual = true_residual(A, b, x, work);
    st.converged = st.residual <= tol;
    return st;
}

// Drivers -------------------------------------------------------------------

namespace {

LinearOperator as_operator(const SparseMatrix& A) {
    return [&A](std::span<const double> x, std::span<double> y) { A.multiply(x, y); };
}

}  // namespace

SolveResult solve_spd(const SparseMatrix& A, std::span<const double> b, const SolveOptions& opts,
                      const std::function<void(std::span<double>)>& project) {
    opts.validate();
    SolveResult res;
    res.x.assign(b.size(), 0.0);
    // shifted incomplete factors stay usable on semidefinite operators
    const Preconditioner M = Preconditioner::make(A, opts.preconditioner, project ? 1e-3 : 0.0);
    res.stats = conjugate_gradient(as_operator(A), b, res.x, M, opts.tolerance, opts.max_iterations, project);
    if (!res.stats.converged) {
        std::ostringstream os;
        os << "solve_spd: no convergence in " << res.stats.iterations << " iterations (residual "
           << res.stats.residual << ")";
        throw SolverError(os.str(), res.stats);
    }
    return res;
}

SolveResult solve_general(const SparseMatrix& A, std::span<const double> b, const SolveOptions& opts) {
    opts.validate();
    SolveResult res;
    res.x.assign(b.size(), 0.0);
    const Preconditioner M = Preconditioner::make(A, opts.preconditioner);
    if (opts.method == SolveMethod::cg) {
        res.stats = conjugate_gradient(as_operator(A), b, res.x, M, opts.tolerance, opts.max_iterations);
    } else if (opts.method == SolveMethod::bicgstab) {
        res.stats = bicgstab(as_operator(A), b, res.x, M, opts.tolerance, opts.max_iterations);
        if (!res.stats.converged) {
            // fall back to GMRES, which cannot break down
            auto st = gmres(as_operator(A), b, res.x, M, opts.tolerance, opts.max_iterations, opts.restart);
            st.iterations += res.stats.iterations;
            res.stats = std::move(st);
        }
    } else {
        res.stats = gmres(as_operator(A), b, res.x, M, opts.tolerance, opts.max_iterations, opts.restart);
    }
    if (!res.stats.converged) {
        std::ostringstream os;
        os << "solve_general(" << res.stats.method << "): no convergence in " << res.stats.iterations
           << " iterations (residual " << res.stats.residual << ")";
        throw SolverError(os.str(), res.stats);
    }
    return res;
}

BorderedResult solve_bordered(const SparseMatrix& K, std::span<const double> b, const SolveOptions& opts) {
    opts.validate();
    const std::size_t n = K.rows();
    if (b.size() != n) throw std::invalid_argument("solve_bordered: size mismatch");
    const Preconditioner MK = Preconditioner::make(K, opts.preconditioner, 1e-3);
    LinearOperator op = [&K, n](std::span<const double> x, std::span<double> y) {
        const double mu = x[n];
        K.multiply(x.first(n), y.first(n));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += mu;
            s += x[i];
        }
        y[n] = s;
    };
    Preconditioner M{[&MK, n](std::span<const double> r, std::span<double> z) {
        MK.apply(r.first(n), z.first(n));
        z[n] = r[n];
    }};
    std::vector<double> rhs(b.begin(), b.end());
    rhs.push_back(0.0);
    std::vector<double> sol(n + 1, 0.0);
    BorderedResult res;
    res.stats = gmres(op, rhs, sol, M, opts.tolerance, opts.max_iterations, opts.restart);
    if (!res.stats.converged) {
        std::ostringstream os;
        os << "solve_bordered: no convergence in " << res.stats.iterations << " iterations (residual "
           << res.stats.residual << ")";
        throw SolverError(os.str(), res.stats);
    }
    res.multiplier = sol[n];
    sol.pop_back();
    res.x = std::move(sol);
    return res;
}

SaddleResult solve_saddle(const SparseMatrix& A, const SparseMatrix& B, const SparseMatrix& G,
                          std::span<const double> f, std::span<const double> g, const SolveOptions& opts) {
    opts.validate();
    const std::size_t nu = A.rows();
    const std::size_t np = B.rows();
    if (f.size() != nu || g.size() != np || B.cols() != nu || G.rows() != nu || G.cols() != np) {
        throw std::invalid_argument("solve_saddle: inconsistent block sizes");
    }
    const Preconditioner MA = Preconditioner::make(A, Preconditioning::ilu0);
    const double inner_tol = std::max(1e-14, 1e-3 * opts.tolerance);
    SaddleResult res;
    int inner_total = 0;

    auto inner_solve = [&](std::span<const double> rhs, std::span<double> out) {
        auto st = bicgstab(as_operator(A), rhs, out, MA, inner_tol, 20 * opts.max_iterations);
        if (!st.converged) {
            auto st2 = gmres(as_operator(A), rhs, out, MA, inner_tol, 20 * opts.max_iterations, opts.restart);
            st2.iterations += st.iterations;
            st = std::move(st2);
        }
        inner_total += st.iterations;
        // Fully stagnated inner solves are fatal; near-roundoff ones are accepted.
        if (!st.converged && st.residual > 1e3 * inner_tol) {
            throw SolverError("solve_saddle: inner velocity solve failed (residual " +
                                  std::to_string(st.residual) + ")",
                              st);
        }
    };
    auto project_mean = [np](std::span<double> p) {
        double s = 0.0;
        for (double v : p) s += v;
        s /= static_cast<double>(np);
        for (double& v : p) v -= s;
    };

    std::vector<double> u0(nu), rhs_s(np), tmp(nu), tmpu(nu);
    inner_solve(f, u0);
    B.multiply(u0, rhs_s);
    for (std::size_t i = 0; i < np; ++i) rhs_s[i] -= g[i];
    project_mean(rhs_s);

    LinearOperator schur = [&](std::span<const double> p, std::span<double> y) {
        G.multiply(p, tmp);
        inner_solve(tmp, tmpu);
        B.multiply(tmpu, y);
    };
    res.pressure.assign(np, 0.0);
    res.stats = gmres(schur, rhs_s, res.pressure, Preconditioner::identity(),
                      std::max(opts.tolerance, 10.0 * inner_tol), opts.max_iterations, opts.restart, project_mean);
    res.stats.method = "schur-gmres";
    project_mean(res.pressure);

    // u = A^{-1} (f - G p)
    G.multiply(res.pressure, tmp);
    for (std::size_t i = 0; i < nu; ++i) tmp[i] = f[i] - tmp[i];
    res.velocity.assign(nu, 0.0);
    inner_solve(tmp, res.velocity);
    res.inner_iterations = inner_total;

    std::vector<double> div(np);
    B.multiply(res.velocity, div);
    for (std::size_t i = 0; i < np; ++i) div[i] -= g[i];
    const double nrm_u = norm2(res.velocity);
    res.divergence_residual = nrm_u > 0.0 ? norm2(div) / nrm_u : norm2(div);
    if (!res.stats.converged) {
        std::ostringstream os;
        os << "solve_saddle: Schur complement iteration did not converge (residual " << res.stats.residual << ")";
        throw SolverError(os.str(), res.stats);
    }
    return res;
}

// Dense ---------------------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows * cols) throw std::invalid_argument("DenseMatrix: data size mismatch");
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) y[r] = dot(row(r), x);
    return y;
}

LuFactorization::LuFactorization(DenseMatrix A) : lu_(std::move(A)) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw std::invalid_argument("LuFactorization: matrix must be square");
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    double amax = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (double v : lu_.row(r)) amax = std::max(amax, std::abs(v));
    smallest_pivot_ = std::numeric_limits<double>::infinity();
    const double threshold = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * amax;
    std::vector<double> swap_buf(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(lu_(r, k));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        smallest_pivot_ = std::min(smallest_pivot_, best);
        if (best == 0.0 || best <= threshold) {
            std::ostringstream os;
            os << "dense LU: matrix is singular to working precision at column " << k << " (pivot " << best << ")";
            throw SingularMatrixError(os.str(), best);
        }
        if (piv != k) {
            auto a = lu_.row(k);
            auto b = lu_.row(piv);
            std::swap_ranges(a.begin(), a.end(), b.begin());
            std::swap(perm_[k], perm_[piv]);
        }
        const double inv = 1.0 / lu_(k, k);
        const auto rowk = lu_.row(k);
        for (std::size_t r = k + 1; r < n; ++r) {
            double& l = lu_(r, k);
            if (l == 0.0) continue;
            l *= inv;
            const double lr = l;
            auto rowr = lu_.row(r);
            for (std::size_t c = k + 1; c < n; ++c) rowr[c] -= lr * rowk[c];
        }
    }
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
    const std::size_t n = lu_.rows();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = lu_.row(i);
        double acc = y[i];
        for (std::size_t j = 0; j < i; ++j) acc -= row[j] * y[j];
        y[i] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        const auto row = lu_.row(ii);
        double acc = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= row[j] * y[j];
        y[ii] = acc / row[ii];
    }
    return y;
}

DenseResult dense_direct(const DenseMatrix& A, std::span<const double> b) {
    if (A.rows() > 20000) throw std::invalid_argument("dense_direct: more than 20000 unknowns");
    if (A.rows() != A.cols() || b.size() != A.rows()) throw std::invalid_argument("dense_direct: size mismatch");
    LuFactorization lu(A);
    DenseResult res;
    res.smallest_pivot = lu.smallest_pivot();
    res.x = lu.solve(b);
    const double nb = norm2(b);
    // residuals accumulated in extended precision so refinement can make progress
    auto residual = [&](std::vector<double>& r) {
        r.resize(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) {
            long double acc = b[i];
            const auto row = A.row(i);
            for (std::size_t j = 0; j < row.size(); ++j)
                acc -= static_cast<long double>(row[j]) * static_cast<long double>(res.x[j]);
            r[i] = static_cast<double>(acc);
        }
        return nb > 0.0 ? norm2(r) / nb : norm2(r);
    };
    std::vector<double> r;
    res.residual = residual(r);
    while (res.residual > 1e-15 && res.refinement_steps < 5) {
        const auto d = lu.solve(r);
        auto trial = res.x;
        axpy(1.0, d, trial);
        std::swap(trial, res.x);
        std::vector<double> r2;
        const double rr = residual(r2);
        if (rr >= res.residual) {
            std::swap(trial, res.x);
            break;
        }
        res.residual = rr;
        r = std::move(r2);
        ++res.refinement_steps;
    }
    if (res.residual > 1e-11) {
        std::ostringstream os;
        os << "dense_direct: residual contract violated (" << res.residual << " > 1e-11)";
        throw SingularMatrixError(os.str(), res.smallest_pivot);
    }
    return res;
}

}  // namespace bioconv
