#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bioconv/sparse.hpp"

namespace bioconv {

enum class SolveMethod { cg, bicgstab, gmres, uzawa, dense };
enum class Preconditioning { none, jacobi, ilu0, milu0 };

std::string to_string(SolveMethod m);
std::string to_string(Preconditioning p);

struct SolveOptions {
    double tolerance = 1e-10;  ///< relative residual ||b - Ax|| / ||b||
    int max_iterations = 2000;
    SolveMethod method = SolveMethod::gmres;
    int restart = 60;  ///< GMRES(m)
    Preconditioning preconditioner = Preconditioning::ilu0;

    /// Throws std::invalid_argument unless tolerance in (0,1) and max_iterations >= 1.
    void validate() const;
};

struct SolveStats {
    std::string method;
    int iterations = 0;
    double residual = 0.0;  ///< recomputed ||b - Ax|| / ||b|| at exit
    bool converged = false;
    std::vector<double> history;  ///< relative residual per iteration
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, SolveStats stats)
        : std::runtime_error(what), stats_(std::move(stats)) {}
    [[nodiscard]] const SolveStats& stats() const { return stats_; }

private:
    SolveStats stats_;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// z = M^{-1} r
struct Preconditioner {
    std::function<void(std::span<const double>, std::span<double>)> apply;
    static Preconditioner identity();
    static Preconditioner jacobi(const SparseMatrix& A);
    /// Incomplete LU on the sparsity of A. `modified` lumps the dropped fill
    /// onto the diagonal; `shift` adds shift * |a_ii| to each pivot first.
    static Preconditioner ilu0(const SparseMatrix& A, bool modified = false, double shift = 0.0);
    static Preconditioner make(const SparseMatrix& A, Preconditioning kind, double shift = 0.0);
};

// Krylov kernels. x holds the result; x0 = 0 always. The returned
// residual is recomputed from the operator, not taken from the recurrence.
SolveStats conjugate_gradient(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                              const Preconditioner& M, double tol, int max_it,
                              const std::function<void(std::span<double>)>& project = {});
SolveStats bicgstab(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                    const Preconditioner& M, double tol, int max_it);
/// Right-preconditioned restarted GMRES(m).
SolveStats gmres(const LinearOperator& A, std::span<const double> b, std::span<double> x,
                 const Preconditioner& M, double tol, int max_it, int restart,
                 const std::function<void(std::span<double>)>& project = {});

struct SolveResult {
    std::vector<double> x;
    SolveStats stats;
};

/// Symmetric positive (semi-)definite solve with preconditioned CG.
/// `project` (optional) maps iterates onto the constrained subspace.
SolveResult solve_spd(const SparseMatrix& A, std::span<const double> b, const SolveOptions& opts,
                      const std::function<void(std::span<double>)>& project = {});

/// General nonsymmetric solve (bicgstab or gmres per opts.method).
SolveResult solve_general(const SparseMatrix& A, std::span<const double> b, const SolveOptions& opts);

struct BorderedResult {
    std::vector<double> x;
    double multiplier = 0.0;
    SolveStats stats;
};

/// Solves [K 1; 1^T 0] [x; mu] = [b; 0]: K x + mu 1 = b with sum(x) = 0.
/// The mean constraint replaces pinning a cell for pure-Neumann operators.
BorderedResult solve_bordered(const SparseMatrix& K, std::span<const double> b, const SolveOptions& opts);

struct SaddleResult {
    std::vector<double> velocity;
    std::vector<double> pressure;  ///< zero (arithmetic) mean
    SolveStats stats;               ///< outer Schur-complement iteration
    int inner_iterations = 0;
    double divergence_residual = 0.0;  ///< ||B u|| / ||u|| (Euclidean)
};

/// [A G; B 0] [u; p] = [f; g] via GMRES on the pressure Schur complement
/// B A^{-1} G with inner Krylov solves for A. G is the (scaled) gradient,
/// B the divergence; p is determined up to a constant and returned with
/// zero mean.
SaddleResult solve_saddle(const SparseMatrix& A, const SparseMatrix& B, const SparseMatrix& G,
                          std::span<const double> f, std::span<const double> g, const SolveOptions& opts);

// Dense direct ------------------------------------------------------------

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, double smallest_pivot)
        : std::runtime_error(what), smallest_pivot_(smallest_pivot) {}
    [[nodiscard]] double smallest_pivot() const { return smallest_pivot_; }

private:
    double smallest_pivot_;
};

/// LU factorisation with partial pivoting.
class LuFactorization {
public:
    explicit LuFactorization(DenseMatrix A);
    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;
    [[nodiscard]] double smallest_pivot() const { return smallest_pivot_; }
    [[nodiscard]] std::size_t size() const { return lu_.rows(); }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
    double smallest_pivot_ = 0.0;
};

struct DenseResult {
    std::vector<double> x;
    double residual = 0.0;  ///< ||b - Ax|| / ||b||
    double smallest_pivot = 0.0;
    int refinement_steps = 0;
};

/// Pivoted LU with iterative refinement. Limited to 20000 unknowns.
/// Throws SingularMatrixError (with the smallest pivot) on exact or
/// numerical singularity; the residual contract is 1e-11 relative.
DenseResult dense_direct(const DenseMatrix& A, std::span<const double> b);

// small vector helpers used across modules
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace bioconv
