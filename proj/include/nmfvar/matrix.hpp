#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace nmfvar {

/// Dense row-major matrix of doubles. Shapes may be empty (0 rows or cols)
/// only for default-constructed placeholders.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    // Checked access; out-of-range indices throw std::out_of_range.
    double& operator()(std::size_t i, std::size_t j);
    double operator()(std::size_t i, std::size_t j) const;

    std::span<double> row(std::size_t i);
    std::span<const double> row(std::size_t i) const;
    std::vector<double> col(std::size_t j) const;

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    const std::vector<double>& values() const noexcept { return data_; }

    Matrix transpose() const;
    /// Columns [first, first + count).
    Matrix col_block(std::size_t first, std::size_t count) const;
    /// Selected columns in the given order.
    Matrix select_cols(std::span<const std::size_t> idx) const;

    double max_abs() const noexcept;
    double max() const;
    double sum() const noexcept;
    bool all_finite() const noexcept;
    bool all_nonnegative() const noexcept;

    std::string shape() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a' * b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b' without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

} // namespace nmfvar
