#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bioconv {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Built from triplets; duplicates are summed
/// so a finished matrix never holds two entries for the same (row, col).
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t nnz() const { return values_.size(); }

    [[nodiscard]] const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    [[nodiscard]] const std::vector<std::size_t>& col_index() const { return col_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
    /// y += alpha A x
    void multiply_add(double alpha, std::span<const double> x, std::span<double> y) const;

    [[nodiscard]] double at(std::size_t r, std::size_t c) const;
    [[nodiscard]] std::vector<double> diagonal() const;
    [[nodiscard]] SparseMatrix transpose() const;
    /// Row-major dense copy; intended for small oracle problems only.
    [[nodiscard]] std::vector<double> to_dense() const;

    /// Replace row r by the unit row e_r.
    void make_identity_row(std::size_t r);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_;
    std::vector<double> values_;
};

}  // namespace bioconv
