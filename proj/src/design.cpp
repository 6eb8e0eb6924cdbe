#include "nmfvar/design.hpp"

#include <cmath>

#include "nmfvar/error.hpp"

namespace nmfvar::design {

std::string to_string(CovariateMode mode) {
    switch (mode) {
    case CovariateMode::lags: return "lags";
    case CovariateMode::kernel: return "kernel";
    case CovariateMode::identity: return "identity";
    }
    return "?";
}

CovariateMode covariate_mode_from_string(const std::string& s) {
    if (s == "lags") return CovariateMode::lags;
    if (s == "kernel") return CovariateMode::kernel;
    if (s == "identity") return CovariateMode::identity;
    throw InputError("unknown covariate mode '" + s + "'");
}

namespace {

void require_nonnegative(const prep::TimeSeriesFrame& frame) {
    const std::size_t t = frame.length();
    for (std::size_t i = 0; i < frame.values.size(); ++i) {
        const double v = frame.values.data()[i];
        if (!(v >= 0.0)) {
            throw InputError("design requires non-negative data; variable '" + frame.variable_names[i / t] +
                             "' is " + std::to_string(v) + " at '" + frame.time_labels[i % t] +
                             "' (add a minmax step?)");
        }
    }
}

} // namespace

Design build_lag_design(const prep::TimeSeriesFrame& frame, std::size_t lag_order) {
    const std::size_t p = frame.variables(), t = frame.length();
    if (lag_order < 1) throw ConfigError("lag order must be at least 1");
    if (lag_order >= t) {
        throw ConfigError("lag order " + std::to_string(lag_order) + " must be below the series length " +
                          std::to_string(t));
    }
    require_nonnegative(frame);
    const std::size_t n = t - lag_order;
    Design d;
    d.mode = CovariateMode::lags;
    d.lag_order = lag_order;
    d.target = frame.values.col_block(lag_order, n);
    d.covariates = Matrix(p * lag_order + 1, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t time = lag_order + j;
        for (std::size_t lag = 1; lag <= lag_order; ++lag)
            for (std::size_t i = 0; i < p; ++i) d.covariates((lag - 1) * p + i, j) = frame.values(i, time - lag);
        d.covariates(p * lag_order, j) = 1.0;
    }
    d.column_labels.assign(frame.time_labels.begin() + static_cast<std::ptrdiff_t>(lag_order), frame.time_labels.end());
    return d;
}

Matrix kernel_covariates(std::size_t count, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("kernel bandwidth beta must be positive");
    Matrix k(count, count);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            const double d = static_cast<double>(i > j ? i - j : j - i);
            k(i, j) = std::exp(-beta * d * d);
        }
    }
    return k;
}

Design build_kernel_design(const prep::TimeSeriesFrame& frame, double beta) {
    require_nonnegative(frame);
    Design d;
    d.mode = CovariateMode::kernel;
    d.bandwidth = beta;
    d.covariates = kernel_covariates(frame.length(), beta);
    d.target = frame.values;
    d.column_labels = frame.time_labels;
    return d;
}

Design build_identity_design(const prep::TimeSeriesFrame& frame) {
    require_nonnegative(frame);
    Design d;
    d.mode = CovariateMode::identity;
    d.covariates = Matrix::identity(frame.length());
    d.target = frame.values;
    d.column_labels = frame.time_labels;
    return d;
}

} // namespace nmfvar::design
