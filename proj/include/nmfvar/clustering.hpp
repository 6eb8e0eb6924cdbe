#pragma once

#include <string>
#include <vector>

#include "nmfvar/matrix.hpp"

namespace nmfvar::cluster {

enum class Axis { time_points, variables };

/// Membership probabilities stored Q x N for time points and N x Q for
/// variables, mirroring the orientation of B and X respectively.
struct MembershipSeries {
    Matrix probabilities;
    Axis axis = Axis::time_points;
    std::vector<std::string> labels;
};

/// Column t becomes b_t / sum(b_t).
MembershipSeries time_membership(const Matrix& coefficients, std::vector<std::string> labels = {});

/// Row p becomes X[p,:] / sum(X[p,:]).
MembershipSeries variable_membership(const Matrix& basis, std::vector<std::string> labels = {});

struct HardAssignment {
    std::vector<std::size_t> labels;  // 0-based basis index
    std::vector<bool> tie;            // several bases shared the maximum
};

/// Argmax per item; ties go to the lowest basis index and are flagged.
HardAssignment hard_assign(const MembershipSeries& m);

/// Pooled 1 - SSE/SST around the grand mean of y.
double r_squared(const Matrix& y, const Matrix& yhat);

/// R^2 of each row separately. Constant rows yield NaN.
std::vector<double> r_squared_per_row(const Matrix& y, const Matrix& yhat);

struct LaggedCorrelation {
    std::vector<int> lags;              // -L .. +L
    std::vector<double> correlations;
    int best_lag = 0;
    double best_correlation = 0.0;
};

/// Pearson correlation between a[t] and b[t + lag] over the overlap, so a
/// positive best lag means b trails a.
LaggedCorrelation lagged_correlation(const std::vector<double>& a, const std::vector<double>& b, int max_lag);

} // namespace nmfvar::cluster
