#include "bioconv/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace bioconv {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
    for (const auto& t : triplets) {
        if (t.row >= rows || t.col >= cols) throw std::out_of_range("SparseMatrix: triplet out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(rows + 1, 0);
    col_.reserve(triplets.size());
    values_.reserve(triplets.size());
    std::size_t i = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        while (i < triplets.size() && triplets[i].row == r) {
            const std::size_t c = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
                v += triplets[i].value;
                ++i;
            }
            col_.push_back(c);
            values_.push_back(v);
        }
        row_ptr_[r + 1] = col_.size();
    }
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += values_[p] * x[col_[p]];
        y[r] = acc;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

void SparseMatrix::multiply_add(double alpha, std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("SparseMatrix::multiply_add: size mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += values_[p] * x[col_[p]];
        y[r] += alpha * acc;
    }
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values_[static_cast<std::size_t>(it - col_.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = at(r, r);
    return d;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) t.push_back({col_[p], r, values_[p]});
    return SparseMatrix(cols_, rows_, std::move(t));
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> d(rows_ * cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d[r * cols_ + col_[p]] = values_[p];
    return d;
}

void SparseMatrix::make_identity_row(std::size_t r) {
    bool has_diag = false;
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        if (col_[p] == r) {
            values_[p] = 1.0;
            has_diag = true;
        } else {
            values_[p] = 0.0;
        }
    }
    if (!has_diag) throw std::logic_error("SparseMatrix::make_identity_row: row has no diagonal slot");
}

}  // namespace bioconv
