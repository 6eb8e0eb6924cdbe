#pragma once

#include <string>
#include <vector>

#include "nmfvar/matrix.hpp"
#include "nmfvar/preprocessing.hpp"

namespace nmfvar::design {

enum class CovariateMode { lags, kernel, identity };

std::string to_string(CovariateMode mode);
CovariateMode covariate_mode_from_string(const std::string& s);

/// Target/covariate pair for Y ~ X * Theta * A.
///
/// Lag mode: target is (y_{D+1} .. y_T), covariate column j stacks
/// y_{t-1}, ..., y_{t-D} and a trailing 1 for the same time index t as
/// target column j. Kernel and identity modes use the whole frame as target.
struct Design {
    CovariateMode mode = CovariateMode::lags;
    Matrix target;
    Matrix covariates;
    std::size_t lag_order = 0;   // lag mode
    double bandwidth = 0.0;      // kernel mode
    std::vector<std::string> column_labels;

    std::size_t variables() const noexcept { return target.rows(); }
    std::size_t columns() const noexcept { return target.cols(); }
};

Design build_lag_design(const prep::TimeSeriesFrame& frame, std::size_t lag_order);

/// T x T Gaussian kernel exp(-beta * |i - j|^2) over index positions 0..T-1.
Matrix kernel_covariates(std::size_t count, double beta);

Design build_kernel_design(const prep::TimeSeriesFrame& frame, double beta);

Design build_identity_design(const prep::TimeSeriesFrame& frame);

} // namespace nmfvar::design
