#include "nmfvar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfvar/clustering.hpp"
#include "nmfvar/error.hpp"
#include "nmfvar/numeric.hpp"

namespace nmfvar::solver {

double objective(const Matrix& y, const Matrix& yhat) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) {
        throw ConfigError("objective: shape mismatch " + y.shape() + " vs " + yhat.shape());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y.data()[i] - yhat.data()[i];
        s += d * d;
    }
    return s;
}

Matrix update_basis(const Matrix& x, const Matrix& y, const Matrix& yhat, const Matrix& b, std::optional<double> eps) {
    const Matrix num = matmul_nt(y, b);
    const Matrix den = matmul_nt(yhat, b);
    if (num.rows() != x.rows() || num.cols() != x.cols()) {
        throw ConfigError("update_basis: basis " + x.shape() + " does not conform to Y*B' " + num.shape());
    }
    return numeric::hadamard_mul(x, numeric::hadamard_div(num, den, eps.value_or(numeric::default_eps(yhat))));
}

Matrix update_theta(const Matrix& theta, const Matrix& x, const Matrix& y, const Matrix& yhat, const Matrix& a,
                    std::optional<double> eps) {
    const Matrix num = matmul_nt(matmul_tn(x, y), a);
    const Matrix den = matmul_nt(matmul_tn(x, yhat), a);
    if (num.rows() != theta.rows() || num.cols() != theta.cols()) {
        throw ConfigError("update_theta: Theta " + theta.shape() + " does not conform to X'YA' " + num.shape());
    }
    return numeric::hadamard_mul(theta, numeric::hadamard_div(num, den, eps.value_or(numeric::default_eps(yhat))));
}

namespace {

std::vector<double> column_sums(const Matrix& x) {
    std::vector<double> s(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        for (std::size_t q = 0; q < x.cols(); ++q) s[q] += r[q];
    }
    return s;
}

// In-place variant used by the fit loop; returns the applied scales.
std::vector<double> normalize_in_place(Matrix& x, Matrix& theta) {
    auto s = column_sums(x);
    for (std::size_t q = 0; q < s.size(); ++q) {
        if (!(s[q] > 0.0)) throw NumericError("basis column " + std::to_string(q) + " is all zero");
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        for (std::size_t q = 0; q < r.size(); ++q) r[q] /= s[q];
    }
    for (std::size_t q = 0; q < theta.rows(); ++q)
        for (double& v : theta.row(q)) v *= s[q];
    return s;
}

} // namespace

Normalized normalize_columns(const Matrix& x, const Matrix& theta) {
    if (x.cols() != theta.rows()) {
        throw ConfigError("normalize_columns: basis " + x.shape() + " does not conform to Theta " + theta.shape());
    }
    Normalized out{x, theta};
    normalize_in_place(out.basis, out.theta);
    return out;
}

Matrix init_basis_kmeans(const Matrix& y, std::size_t rank, std::uint64_t seed) {
    if (rank < 1) throw ConfigError("rank must be at least 1");
    if (rank > y.cols()) {
        throw ConfigError("rank " + std::to_string(rank) + " exceeds the number of observations " +
                          std::to_string(y.cols()));
    }
    std::vector<std::vector<double>> points;
    points.reserve(y.cols());
    for (std::size_t t = 0; t < y.cols(); ++t) points.push_back(y.col(t));
    const auto km = numeric::kmeans(points, rank, seed);
    const std::size_t p = y.rows();
    Matrix x(p, rank);
    for (std::size_t q = 0; q < rank; ++q) {
        double s = 0.0;
        for (double v : km.centroids[q]) s += v;
        for (std::size_t i = 0; i < p; ++i) {
            x(i, q) = s > 0.0 ? km.centroids[q][i] / s : 1.0 / static_cast<double>(p);
        }
    }
    return x;
}

namespace {

Matrix init_basis_random(std::size_t p, std::size_t rank, std::uint64_t seed) {
    numeric::Rng rng(seed);
    Matrix x(p, rank);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.05 + rng.uniform();
    Matrix dummy(rank, 1, 1.0);
    normalize_in_place(x, dummy);
    return x;
}

void validate(const design::Design& d) {
    const Matrix& y = d.target;
    const Matrix& a = d.covariates;
    if (y.empty() || a.empty()) throw ConfigError("fit: empty design");
    if (y.cols() != a.cols()) {
        throw ConfigError("fit: target " + y.shape() + " and covariates " + a.shape() + " disagree on columns");
    }
    if (!y.all_finite() || !a.all_finite()) throw NumericError("fit: design contains NaN or infinite values");
    if (!y.all_nonnegative() || !a.all_nonnegative()) throw InputError("fit: design contains negative values");
    if (!(y.max() > 0.0)) throw InputError("fit: target matrix is all zero");
}

} // namespace

FactorModel fit(const design::Design& d, const FitOptions& opts) {
    validate(d);
    if (!(opts.tolerance > 0.0)) throw ConfigError("fit: tolerance must be positive");
    if (opts.max_iter < 1) throw ConfigError("fit: max_iter must be at least 1");
    if (opts.epsilon && !(*opts.epsilon >= 0.0)) throw ConfigError("fit: epsilon must be non-negative");

    const Matrix& y = d.target;
    const Matrix& a = d.covariates;
    const std::size_t p = y.rows(), n = y.cols();

    Matrix x;
    if (opts.fixed_basis) {
        x = *opts.fixed_basis;
        if (x.rows() != p) {
            throw ConfigError("fixed basis has " + std::to_string(x.rows()) + " rows but the data has " +
                              std::to_string(p) + " variables");
        }
        if (!x.all_finite() || !x.all_nonnegative()) throw ConfigError("fixed basis must be finite and non-negative");
        Matrix dummy(x.cols(), 1, 1.0);
        normalize_in_place(x, dummy);
    }
    const std::size_t q = opts.fixed_basis ? x.cols() : opts.rank;
    if (q < 1 || q > std::min(p, n)) {
        throw ConfigError("rank Q=" + std::to_string(q) + " must satisfy 1 <= Q <= min(P, columns) = " +
                          std::to_string(std::min(p, n)));
    }
    if (!opts.fixed_basis) {
        x = opts.init == InitMode::kmeans ? init_basis_kmeans(y, q, opts.seed) : init_basis_random(p, q, opts.seed);
    }

    FactorModel model;
    model.mode = d.mode;
    model.lag_order = d.lag_order;
    model.bandwidth = d.bandwidth;
    model.fixed_basis = opts.fixed_basis.has_value();
    auto& diag = model.diagnostics;
    for (std::size_t i = 0; i < p; ++i) {
        const auto r = y.row(i);
        if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) diag.zero_rows.push_back(i);
    }

    // Theta starts constant, scaled to the least-squares multiple of X*1*A.
    Matrix theta(q, a.rows(), 1.0);
    {
        const Matrix yh = matmul(x, matmul(theta, a));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            num += y.data()[i] * yh.data()[i];
            den += yh.data()[i] * yh.data()[i];
        }
        if (den > 0.0 && num > 0.0) {
            const double c = num / den;
            for (std::size_t i = 0; i < theta.size(); ++i) theta.data()[i] = c;
        }
    }

    // Update numerators and denominators from Y*A' and A*A', formed once:
    //   Y B' = (Y A') Theta',  Yhat B' = X Theta (A A') Theta'
    //   X' Y A' = X' (Y A'),   X' Yhat A' = (X' X) Theta (A A')
    const Matrix ya = matmul_nt(y, a);
    const Matrix aa = matmul_nt(a, a);

    Matrix b = matmul(theta, a);
    Matrix yhat = matmul(x, b);
    double obj = objective(y, yhat);
    if (!std::isfinite(obj)) throw NumericError("fit: objective is not finite at the starting point");
    diag.objective_trace.push_back(obj);
    double eps = opts.epsilon.value_or(numeric::default_eps(yhat));

    Matrix prev_x, prev_theta, prev_b, prev_yhat;
    for (int it = 1; it <= opts.max_iter; ++it) {
        prev_x = x;
        prev_theta = theta;
        prev_b = b;
        prev_yhat = yhat;

        Matrix theta_aa = matmul(theta, aa);
        if (!model.fixed_basis) {
            const Matrix num = matmul_nt(ya, theta);
            const Matrix den = matmul(x, matmul_nt(theta_aa, theta));
            x = numeric::hadamard_mul(x, numeric::hadamard_div(num, den, eps));
            const auto scale = normalize_in_place(x, theta);
            for (std::size_t r = 0; r < q; ++r)
                for (double& v : theta_aa.row(r)) v *= scale[r];
        }
        {
            const Matrix num = matmul_tn(x, ya);
            const Matrix den = matmul(matmul_tn(x, x), theta_aa);
            theta = numeric::hadamard_mul(theta, numeric::hadamard_div(num, den, eps));
        }

        b = matmul(theta, a);
        yhat = matmul(x, b);
        const double next = objective(y, yhat);
        if (!std::isfinite(next) || !x.all_finite() || !theta.all_finite()) {
            throw NumericError("fit: NaN encountered at iteration " + std::to_string(it));
        }
        if (next > obj) {
            // Exact arithmetic never increases the objective; an increase is
            // rounding at the noise floor, so keep the previous iterate.
            x = std::move(prev_x);
            theta = std::move(prev_theta);
            b = std::move(prev_b);
            yhat = std::move(prev_yhat);
            diag.converged = true;
            break;
        }
        diag.objective_trace.push_back(next);
        diag.iterations = it;
        const double decrease = obj - next;
        obj = next;
        if (!opts.epsilon) eps = numeric::default_eps(yhat);
        if (obj == 0.0 || decrease <= opts.tolerance * (obj + decrease)) {
            diag.converged = true;
            break;
        }
    }

    try {
        diag.r_squared = cluster::r_squared(y, yhat);
    } catch (const NumericError&) {
        diag.r_squared = std::numeric_limits<double>::quiet_NaN();
    }
    diag.r_squared_per_variable = cluster::r_squared_per_row(y, yhat);
    diag.coefficients = std::move(b);
    diag.fitted = std::move(yhat);
    model.basis = std::move(x);
    model.theta = std::move(theta);
    return model;
}

} // namespace nmfvar::solver
