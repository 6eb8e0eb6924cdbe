#pragma once

#include <cstdint>
#include <vector>

#include "nmfvar/matrix.hpp"
#include "nmfvar/solver.hpp"

namespace nmfvar::var {

/// y_t ~ sum_d Xi_d y_{t-d} + xi with Xi_d = X Theta_d and xi = X theta.
struct VarCoefficients {
    std::vector<Matrix> lags;       // Xi_1 .. Xi_D, each P x P
    std::vector<double> intercept;  // xi

    std::size_t variables() const noexcept { return intercept.size(); }
    std::size_t lag_order() const noexcept { return lags.size(); }
};

VarCoefficients var_coefficients(const solver::FactorModel& model);

struct CompanionForm {
    Matrix matrix;                  // PD x PD
    std::vector<double> intercept;  // xi stacked over zeros
    double spectral_radius = 0.0;
    bool stationary = false;        // spectral_radius < 1, no tolerance band
};

CompanionForm companion_form(const VarCoefficients& coeffs);

struct ParameterCounts {
    std::uint64_t nmfvar_params = 0;  // PQ + Q(PD+1)
    std::uint64_t var_params = 0;     // P(PD+1)
    double ratio = 0.0;               // Q(P+PD+1) / (P(PD+1))
};

ParameterCounts parameter_reduction(std::uint64_t p, std::uint64_t q, std::uint64_t d);

/// Recursive forecasts. history is P x D with columns oldest to newest;
/// returns P x horizon.
Matrix forecast(const VarCoefficients& coeffs, const Matrix& history, std::size_t horizon);
Matrix forecast(const solver::FactorModel& model, const Matrix& history, std::size_t horizon);

} // namespace nmfvar::var
