#include "nmfvar/var_analysis.hpp"

#include "nmfvar/error.hpp"
#include "nmfvar/numeric.hpp"

namespace nmfvar::var {

VarCoefficients var_coefficients(const solver::FactorModel& model) {
    if (model.mode != design::CovariateMode::lags) {
        throw ConfigError("VAR coefficients require a model fitted with lag covariates, not " +
                          design::to_string(model.mode));
    }
    const std::size_t p = model.variables(), d = model.lag_order;
    if (d < 1 || model.theta.cols() != p * d + 1 || model.theta.rows() != model.rank()) {
        throw ConfigError("model Theta " + model.theta.shape() + " does not match P=" + std::to_string(p) +
                          ", D=" + std::to_string(d));
    }
    const Matrix full = matmul(model.basis, model.theta);  // P x (PD+1)
    VarCoefficients c;
    for (std::size_t lag = 0; lag < d; ++lag) c.lags.push_back(full.col_block(lag * p, p));
    c.intercept = full.col(p * d);
    return c;
}

CompanionForm companion_form(const VarCoefficients& coeffs) {
    const std::size_t p = coeffs.variables(), d = coeffs.lag_order();
    if (p == 0 || d == 0) throw ConfigError("companion form needs at least one variable and one lag");
    const std::size_t n = p * d;
    CompanionForm f;
    f.matrix = Matrix(n, n);
    for (std::size_t lag = 0; lag < d; ++lag) {
        const Matrix& xi = coeffs.lags[lag];
        if (xi.rows() != p || xi.cols() != p) throw ConfigError("lag block has shape " + xi.shape());
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) f.matrix(i, lag * p + j) = xi(i, j);
    }
    for (std::size_t i = p; i < n; ++i) f.matrix(i, i - p) = 1.0;
    f.intercept.assign(n, 0.0);
    std::copy(coeffs.intercept.begin(), coeffs.intercept.end(), f.intercept.begin());
    f.spectral_radius = numeric::spectral_radius(f.matrix);
    f.stationary = f.spectral_radius < 1.0;
    return f;
}

ParameterCounts parameter_reduction(std::uint64_t p, std::uint64_t q, std::uint64_t d) {
    if (p < 1 || q < 1 || d < 1) throw ConfigError("parameter_reduction: P, Q and D must be at least 1");
    ParameterCounts c;
    c.nmfvar_params = p * q + q * (p * d + 1);
    c.var_params = p * (p * d + 1);
    c.ratio = static_cast<double>(q * (p + p * d + 1)) / static_cast<double>(p * (p * d + 1));
    return c;
}

Matrix forecast(const VarCoefficients& coeffs, const Matrix& history, std::size_t horizon) {
    const std::size_t p = coeffs.variables(), d = coeffs.lag_order();
    if (history.rows() != p || history.cols() != d) {
        throw ConfigError("forecast history must be " + std::to_string(p) + "x" + std::to_string(d) + ", got " +
                          history.shape());
    }
    if (horizon < 1) throw ConfigError("forecast horizon must be at least 1");
    // window holds the last D observations, newest last
    std::vector<std::vector<double>> window;
    for (std::size_t j = 0; j < d; ++j) window.push_back(history.col(j));
    Matrix out(p, horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        std::vector<double> next = coeffs.intercept;
        for (std::size_t lag = 1; lag <= d; ++lag) {
            const auto& past = window[window.size() - lag];
            const Matrix& xi = coeffs.lags[lag - 1];
            for (std::size_t i = 0; i < p; ++i) {
                const auto r = xi.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < p; ++j) s += r[j] * past[j];
                next[i] += s;
            }
        }
        for (std::size_t i = 0; i < p; ++i) out(i, h) = next[i];
        window.erase(window.begin());
        window.push_back(std::move(next));
    }
    return out;
}

Matrix forecast(const solver::FactorModel& model, const Matrix& history, std::size_t horizon) {
    return forecast(var_coefficients(model), history, horizon);
}

} // namespace nmfvar::var
