#pragma once

// Reference implementations written without the library's kernels, plus
// synthetic data generators shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nmfvar/matrix.hpp"
#include "nmfvar/preprocessing.hpp"

namespace testsupport {

using nmfvar::Matrix;

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& g, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = u(g);
    return m;
}

inline Matrix loop_matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

inline Matrix loop_transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline double loop_objective(const Matrix& y, const Matrix& yhat) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            const double d = y(i, j) - yhat(i, j);
            s += d * d;
        }
    return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline double eigen_spectral_radius(const Matrix& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), false);
    double r = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r = std::max(r, std::abs(es.eigenvalues()[i]));
    return r;
}

// Covariates for target times t = D+1..T (1-based): y_{t-1}, ..., y_{t-D}, 1.
inline Matrix naive_lag_covariates(const Matrix& y, std::size_t d) {
    const std::size_t p = y.rows(), t = y.cols();
    Matrix a(p * d + 1, t - d);
    for (std::size_t j = 0; j < t - d; ++j) {
        const std::size_t time = j + d;  // 0-based index of the target column
        for (std::size_t lag = 1; lag <= d; ++lag)
            for (std::size_t i = 0; i < p; ++i) a((lag - 1) * p + i, j) = y(i, time - lag);
        a(p * d, j) = 1.0;
    }
    return a;
}

// Column-stochastic non-negative basis.
inline Matrix random_stochastic(std::size_t p, std::size_t q, std::mt19937_64& g) {
    Matrix x = random_matrix(p, q, g, 0.05, 1.0);
    for (std::size_t c = 0; c < q; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < p; ++r) s += x(r, c);
        for (std::size_t r = 0; r < p; ++r) x(r, c) /= s;
    }
    return x;
}

/// Series generated exactly by y_t = X (sum_d Theta_d y_{t-d} + theta) from
/// a random positive start, with Theta scaled so the VAR is stable.
struct PlantedSeries {
    Matrix series;  // P x T
    Matrix basis;
    Matrix theta;
};

inline PlantedSeries planted_var(std::size_t p, std::size_t q, std::size_t d, std::size_t t, std::uint64_t seed,
                                 double gain = 0.8) {
    std::mt19937_64 g(seed);
    PlantedSeries s;
    s.basis = random_stochastic(p, q, g);
    s.theta = random_matrix(q, p * d + 1, g, 0.0, 1.0);
    // Row sums of Xi_d = X Theta_d total at most gain in the sup norm.
    double lag_mass = 0.0;
    for (std::size_t r = 0; r < q; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < p * d; ++c) row += s.theta(r, c);
        lag_mass = std::max(lag_mass, row);
    }
    for (std::size_t r = 0; r < q; ++r) {
        for (std::size_t c = 0; c < p * d; ++c) s.theta(r, c) *= gain / lag_mass;
        s.theta(r, p * d) = 0.2 + s.theta(r, p * d);
    }
    const Matrix xi = loop_matmul(s.basis, s.theta);  // P x (PD+1)
    s.series = Matrix(p, t);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < p; ++i) s.series(i, k) = u(g);
    for (std::size_t k = d; k < t; ++k)
        for (std::size_t i = 0; i < p; ++i) {
            double v = xi(i, p * d);
            for (std::size_t lag = 1; lag <= d; ++lag)
                for (std::size_t j = 0; j < p; ++j) v += xi(i, (lag - 1) * p + j) * s.series(j, k - lag);
            s.series(i, k) = v;
        }
    return s;
}

/// Noisy VAR in which only lag `active` carries weight; used to check that
/// cross-validation recovers the lag order.
inline Matrix planted_lag_series(std::size_t p, std::size_t q, std::size_t active, std::size_t t,
                                 std::uint64_t seed, double noise = 0.05) {
    std::mt19937_64 g(seed);
    Matrix x = random_stochastic(p, q, g);
    Matrix th = random_matrix(q, p, g, 0.0, 1.0);
    Matrix xi = loop_matmul(x, th);
    double rmax = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p; ++j) s += xi(i, j);
        rmax = std::max(rmax, s);
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) xi(i, j) *= 0.9 / rmax;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix y(p, t);
    for (std::size_t k = 0; k < active; ++k)
        for (std::size_t i = 0; i < p; ++i) y(i, k) = 1.0 + u(g);
    for (std::size_t k = active; k < t; ++k)
        for (std::size_t i = 0; i < p; ++i) {
            double v = 0.3;
            for (std::size_t j = 0; j < p; ++j) v += xi(i, j) * y(j, k - active);
            y(i, k) = v + noise * u(g);
        }
    return y;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nmfvar_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testsupport
