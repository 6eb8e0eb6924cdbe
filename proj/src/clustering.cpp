#include "nmfvar/clustering.hpp"

#include <cmath>
#include <limits>

#include "nmfvar/error.hpp"

namespace nmfvar::cluster {

MembershipSeries time_membership(const Matrix& b, std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != b.cols()) throw ConfigError("time_membership: label count mismatch");
    if (!b.all_nonnegative()) throw NumericError("time_membership: coefficients must be non-negative");
    Matrix prob(b.rows(), b.cols());
    for (std::size_t t = 0; t < b.cols(); ++t) {
        double s = 0.0;
        for (std::size_t q = 0; q < b.rows(); ++q) s += b(q, t);
        if (!(s > 0.0)) {
            throw NumericError("time_membership: coefficient column " + std::to_string(t) +
                               (labels.empty() ? std::string() : " ('" + labels[t] + "')") + " is all zero");
        }
        for (std::size_t q = 0; q < b.rows(); ++q) prob(q, t) = b(q, t) / s;
    }
    return {std::move(prob), Axis::time_points, std::move(labels)};
}

MembershipSeries variable_membership(const Matrix& x, std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != x.rows()) throw ConfigError("variable_membership: label count mismatch");
    if (!x.all_nonnegative()) throw NumericError("variable_membership: basis must be non-negative");
    Matrix prob(x.rows(), x.cols());
    for (std::size_t p = 0; p < x.rows(); ++p) {
        double s = 0.0;
        for (double v : x.row(p)) s += v;
        if (!(s > 0.0)) {
            throw NumericError("variable_membership: basis row " + std::to_string(p) +
                               (labels.empty() ? std::string() : " ('" + labels[p] + "')") + " is all zero");
        }
        for (std::size_t q = 0; q < x.cols(); ++q) prob(p, q) = x(p, q) / s;
    }
    return {std::move(prob), Axis::variables, std::move(labels)};
}

HardAssignment hard_assign(const MembershipSeries& m) {
    const bool by_col = m.axis == Axis::time_points;
    const Matrix& p = m.probabilities;
    const std::size_t items = by_col ? p.cols() : p.rows();
    const std::size_t bases = by_col ? p.rows() : p.cols();
    HardAssignment out;
    out.labels.resize(items);
    out.tie.resize(items);
    for (std::size_t i = 0; i < items; ++i) {
        std::size_t best = 0;
        bool tie = false;
        for (std::size_t q = 1; q < bases; ++q) {
            const double v = by_col ? p(q, i) : p(i, q);
            const double cur = by_col ? p(best, i) : p(i, best);
            if (v > cur) {
                best = q;
                tie = false;
            } else if (v == cur) {
                tie = true;
            }
        }
        out.labels[i] = best;
        out.tie[i] = tie;
    }
    return out;
}

double r_squared(const Matrix& y, const Matrix& yhat) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) {
        throw ConfigError("r_squared: shape mismatch " + y.shape() + " vs " + yhat.shape());
    }
    if (y.empty()) throw ConfigError("r_squared: empty input");
    const double mean = y.sum() / static_cast<double>(y.size());
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y.data()[i] - yhat.data()[i];
        const double c = y.data()[i] - mean;
        sse += r * r;
        sst += c * c;
    }
    if (!(sst > 0.0)) throw NumericError("r_squared: observed values are constant");
    return 1.0 - sse / sst;
}

std::vector<double> r_squared_per_row(const Matrix& y, const Matrix& yhat) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) {
        throw ConfigError("r_squared_per_row: shape mismatch " + y.shape() + " vs " + yhat.shape());
    }
    std::vector<double> out(y.rows());
    for (std::size_t i = 0; i < y.rows(); ++i) {
        const auto a = y.row(i);
        const auto b = yhat.row(i);
        double mean = 0.0;
        for (double v : a) mean += v;
        mean /= static_cast<double>(a.size());
        double sse = 0.0, sst = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            sse += (a[j] - b[j]) * (a[j] - b[j]);
            sst += (a[j] - mean) * (a[j] - mean);
        }
        out[i] = sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

LaggedCorrelation lagged_correlation(const std::vector<double>& a, const std::vector<double>& b, int max_lag) {
    if (max_lag < 0) throw ConfigError("lagged_correlation: max_lag must be non-negative");
    if (a.size() != b.size()) throw ConfigError("lagged_correlation: series lengths differ");
    if (a.size() <= static_cast<std::size_t>(max_lag) + 1) {
        throw ConfigError("lagged_correlation: series of length " + std::to_string(a.size()) +
                          " too short for max_lag " + std::to_string(max_lag));
    }
    const long n = static_cast<long>(a.size());
    LaggedCorrelation out;
    bool have_best = false;
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        const long first = std::max(0L, -static_cast<long>(lag));
        const long last = std::min(n, n - lag);
        const double m = static_cast<double>(last - first);
        double ma = 0.0, mb = 0.0;
        for (long t = first; t < last; ++t) {
            ma += a[static_cast<std::size_t>(t)];
            mb += b[static_cast<std::size_t>(t + lag)];
        }
        ma /= m;
        mb /= m;
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (long t = first; t < last; ++t) {
            const double da = a[static_cast<std::size_t>(t)] - ma;
            const double db = b[static_cast<std::size_t>(t + lag)] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        if (!(saa > 0.0) || !(sbb > 0.0)) {
            throw NumericError("lagged_correlation: constant overlap segment at lag " + std::to_string(lag));
        }
        const double r = sab / std::sqrt(saa * sbb);
        out.lags.push_back(lag);
        out.correlations.push_back(r);
        const bool better = !have_best || r > out.best_correlation ||
                            (r == out.best_correlation && std::abs(lag) < std::abs(out.best_lag));
        if (better) {
            out.best_lag = lag;
            out.best_correlation = r;
            have_best = true;
        }
    }
    return out;
}

} // namespace nmfvar::cluster
