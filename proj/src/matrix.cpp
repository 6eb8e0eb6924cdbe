#include "nmfvar/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nmfvar/error.hpp"

namespace nmfvar {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: " + std::to_string(data_.size()) +
                                    " values cannot fill a " + shape() + " matrix");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
}

double& Matrix::operator()(std::size_t i, std::size_t j) {
    if (i >= rows_ || j >= cols_) {
        throw std::out_of_range("Matrix index (" + std::to_string(i) + "," + std::to_string(j) +
                                ") outside " + shape());
    }
    return data_[i * cols_ + j];
}

double Matrix::operator()(std::size_t i, std::size_t j) const {
    return const_cast<Matrix&>(*this)(i, j);
}

std::span<double> Matrix::row(std::size_t i) {
    if (i >= rows_) throw std::out_of_range("Matrix row " + std::to_string(i) + " outside " + shape());
    return {data_.data() + i * cols_, cols_};
}

std::span<const double> Matrix::row(std::size_t i) const {
    if (i >= rows_) throw std::out_of_range("Matrix row " + std::to_string(i) + " outside " + shape());
    return {data_.data() + i * cols_, cols_};
}

std::vector<double> Matrix::col(std::size_t j) const {
    if (j >= cols_) throw std::out_of_range("Matrix column " + std::to_string(j) + " outside " + shape());
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i * cols_ + j];
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t.data_[j * rows_ + i] = data_[i * cols_ + j];
    return t;
}

Matrix Matrix::col_block(std::size_t first, std::size_t count) const {
    if (first + count > cols_) {
        throw std::out_of_range("Matrix column block [" + std::to_string(first) + ", " +
                                std::to_string(first + count) + ") outside " + shape());
    }
    Matrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_ + first), count,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * count));
    return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> idx) const {
    Matrix out(rows_, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= cols_) throw std::out_of_range("Matrix column " + std::to_string(idx[k]) + " outside " + shape());
    }
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < idx.size(); ++k) out.data_[i * idx.size() + k] = data_[i * cols_ + idx[k]];
    return out;
}

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Matrix::max() const {
    if (data_.empty()) throw std::logic_error("Matrix::max on empty matrix");
    return *std::max_element(data_.begin(), data_.end());
}

double Matrix::sum() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Matrix::all_nonnegative() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0; });
}

std::string Matrix::shape() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace {

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) throw ConfigError(std::string(op) + ": incompatible shapes " + a.shape() + " and " + b.shape());
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul", a, b);
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = pc + i * m;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = pa[i * k + l];
            if (av == 0.0) continue;
            const double* bl = pb + l * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += av * bl[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn", a, b);
    const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t l = 0; l < k; ++l) {
        const double* al = pa + l * n;
        const double* bl = pb + l * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = al[i];
            if (av == 0.0) continue;
            double* ci = pc + i * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += av * bl[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt", a, b);
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    Matrix c(n, m);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = pa + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = pb + j * k;
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
            pc[i * m + j] = s;
        }
    }
    return c;
}

} // namespace nmfvar
