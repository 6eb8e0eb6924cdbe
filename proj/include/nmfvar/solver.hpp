#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nmfvar/design.hpp"
#include "nmfvar/matrix.hpp"

namespace nmfvar::solver {

enum class InitMode { kmeans, uniform_random };

inline constexpr std::uint64_t default_seed = 20240601;

struct FitOptions {
    std::size_t rank = 2;
    int max_iter = 100000;
    double tolerance = 1e-9;       // relative objective decrease per iteration
    std::uint64_t seed = default_seed;
    std::optional<double> epsilon; // fixed guard; default is 1e-16 * max|Yhat|
    std::optional<Matrix> fixed_basis;
    InitMode init = InitMode::kmeans;
};

struct FitDiagnostics {
    /// Entry 0 is the objective at the starting point, entry k after k iterations.
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    double r_squared = 0.0;
    std::vector<double> r_squared_per_variable;
    Matrix coefficients;  // B = Theta * A
    Matrix fitted;        // Yhat = X * B
    std::vector<std::size_t> zero_rows;  // all-zero rows of the target
};

/// Y ~ X * Theta * A with X column-stochastic. In lag mode Theta is laid out
/// as (Theta_1, ..., Theta_D, theta) with Theta_d of size Q x P.
struct FactorModel {
    Matrix basis;
    Matrix theta;
    design::CovariateMode mode = design::CovariateMode::lags;
    std::size_t lag_order = 0;
    double bandwidth = 0.0;
    bool fixed_basis = false;
    FitDiagnostics diagnostics;

    std::size_t rank() const noexcept { return basis.cols(); }
    std::size_t variables() const noexcept { return basis.rows(); }
};

/// Squared Euclidean distance sum (y - yhat)^2.
double objective(const Matrix& y, const Matrix& yhat);

/// X <- X .* (Y B') ./ (Yhat B' + eps).
Matrix update_basis(const Matrix& x, const Matrix& y, const Matrix& yhat, const Matrix& b,
                    std::optional<double> eps = std::nullopt);

/// Theta <- Theta .* (X' Y A') ./ (X' Yhat A' + eps).
Matrix update_theta(const Matrix& theta, const Matrix& x, const Matrix& y, const Matrix& yhat, const Matrix& a,
                    std::optional<double> eps = std::nullopt);

struct Normalized {
    Matrix basis;
    Matrix theta;
};

/// Rescales basis columns to sum 1 and multiplies the matching Theta rows by
/// the old column sums, leaving X * Theta unchanged.
Normalized normalize_columns(const Matrix& x, const Matrix& theta);

/// K-means centroids of the target columns, each normalized to sum 1.
Matrix init_basis_kmeans(const Matrix& y, std::size_t rank, std::uint64_t seed);

FactorModel fit(const design::Design& design, const FitOptions& opts);

} // namespace nmfvar::solver
