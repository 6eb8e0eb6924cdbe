#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nmfvar/error.hpp"
#include "nmfvar/numeric.hpp"
#include "support.hpp"

using nmfvar::Matrix;
namespace nu = nmfvar::numeric;
using namespace testsupport;

TEST(Matrix, ConstructionAndAccess) {
    Matrix m{{1, 2, 3}, {4, 5, 6}};
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_THROW(m(2, 0), std::out_of_range);
    EXPECT_THROW(m(0, 3), std::out_of_range);
    EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
    EXPECT_EQ(m.transpose(), (Matrix{{1, 4}, {2, 5}, {3, 6}}));
    EXPECT_EQ(m.col_block(1, 2), (Matrix{{2, 3}, {5, 6}}));
    const std::vector<std::size_t> idx{2, 0};
    EXPECT_EQ(m.select_cols(idx), (Matrix{{3, 1}, {6, 4}}));
}

TEST(Matrix, ProductsMatchLoopOracle) {
    std::mt19937_64 g(7);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix a = random_matrix(1 + g() % 7, 1 + g() % 6, g, -1, 1);
        Matrix b = random_matrix(a.cols(), 1 + g() % 5, g, -1, 1);
        EXPECT_LT(max_abs_diff(nmfvar::matmul(a, b), loop_matmul(a, b)), 1e-14);
        Matrix c = random_matrix(a.rows(), 1 + g() % 4, g, -1, 1);
        EXPECT_LT(max_abs_diff(nmfvar::matmul_tn(a, c), loop_matmul(loop_transpose(a), c)), 1e-14);
        Matrix d = random_matrix(1 + g() % 4, a.cols(), g, -1, 1);
        EXPECT_LT(max_abs_diff(nmfvar::matmul_nt(a, d), loop_matmul(a, loop_transpose(d))), 1e-14);
    }
    EXPECT_THROW(nmfvar::matmul(Matrix(2, 3), Matrix(2, 3)), nmfvar::ConfigError);
}

TEST(Hadamard, Multiply) {
    EXPECT_EQ(nu::hadamard_mul(Matrix{{1, 2}, {3, 4}}, Matrix{{1, 1}, {1, 1}}), (Matrix{{1, 2}, {3, 4}}));
    EXPECT_EQ(nu::hadamard_mul(Matrix{{2}}, Matrix{{3}}), Matrix{{6}});
    std::mt19937_64 g(11);
    Matrix a = random_matrix(5, 4, g), b = random_matrix(5, 4, g);
    Matrix r = nu::hadamard_mul(a, b);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r(i, j), a(i, j) * b(i, j));
    EXPECT_EQ(nu::hadamard_mul(a, b), nu::hadamard_mul(b, a));
    try {
        nu::hadamard_mul(Matrix(2, 3), Matrix(3, 2));
        FAIL();
    } catch (const nmfvar::ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("3x2"), std::string::npos);
    }
}

TEST(Hadamard, Divide) {
    EXPECT_EQ(nu::hadamard_div(Matrix{{6}}, Matrix{{3}}, 0.0), Matrix{{2}});
    EXPECT_THROW(nu::hadamard_div(Matrix{{1}}, Matrix{{0}}, 0.0), nmfvar::NumericError);
    EXPECT_DOUBLE_EQ(nu::hadamard_div(Matrix{{1}}, Matrix{{0}}, 1e-12)(0, 0), 1e12);
    EXPECT_THROW(nu::hadamard_div(Matrix(1, 2), Matrix(2, 1), 0.0), nmfvar::ConfigError);
}

TEST(Hadamard, DefaultEps) {
    EXPECT_DOUBLE_EQ(nu::default_eps(Matrix{{-4, 2}}), 4e-16);
    EXPECT_GT(nu::default_eps(Matrix(2, 2)), 0.0);
}

TEST(SpectralRadius, SmallCases) {
    EXPECT_DOUBLE_EQ(nu::spectral_radius(Matrix{{0.5}}), 0.5);
    EXPECT_DOUBLE_EQ(nu::spectral_radius(Matrix{{-0.7}}), 0.7);
    for (double c : {0.0, 0.3, 2.5, -1.25}) {
        Matrix m = Matrix::identity(4);
        for (std::size_t i = 0; i < 4; ++i) m(i, i) = c;
        EXPECT_NEAR(nu::spectral_radius(m), std::abs(c), 1e-14);
    }
    // Rotation: complex pair of modulus 1.
    EXPECT_NEAR(nu::spectral_radius(Matrix{{0, -1}, {1, 0}}), 1.0, 1e-12);
    EXPECT_THROW(nu::spectral_radius(Matrix(2, 3)), nmfvar::ConfigError);
}

TEST(SpectralRadius, PeriodicCompanion) {
    // y_t = a y_{t-12}: eigenvalues are the 12th roots of a, all of equal modulus.
    const double a = 0.7;
    Matrix f(12, 12);
    f(0, 11) = a;
    for (std::size_t i = 1; i < 12; ++i) f(i, i - 1) = 1.0;
    EXPECT_NEAR(nu::spectral_radius(f), std::pow(a, 1.0 / 12.0), 1e-10);
}

TEST(SpectralRadius, MatchesDenseEigensolverNonNegative) {
    std::mt19937_64 g(2024);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + g() % 20;
        Matrix m = random_matrix(n, n, g);
        // Sprinkle zeros so some instances are reducible.
        for (std::size_t k = 0; k < n; ++k) m(g() % n, g() % n) = 0.0;
        EXPECT_NEAR(nu::spectral_radius(m), eigen_spectral_radius(m), 1e-8) << "n=" << n << " rep=" << rep;
    }
}

TEST(SpectralRadius, MatchesDenseEigensolverSigned) {
    std::mt19937_64 g(99);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + g() % 20;
        Matrix m = random_matrix(n, n, g, -1, 1);
        EXPECT_NEAR(nu::spectral_radius(m), eigen_spectral_radius(m), 1e-8) << "n=" << n;
    }
}

TEST(SpectralRadius, HessenbergEigenvaluesMatchEigen) {
    std::mt19937_64 g(5);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + g() % 10;
        Matrix m = random_matrix(n, n, g, -1, 1);
        auto ev = nu::hessenberg_qr_eigenvalues(m);
        ASSERT_EQ(ev.re.size(), n);
        Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), false);
        std::vector<std::complex<double>> mine, ref;
        for (std::size_t i = 0; i < n; ++i) mine.emplace_back(ev.re[i], ev.im[i]);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ref.push_back(es.eigenvalues()[i]);
        // Greedy matching is enough for distinct random spectra.
        for (const auto& z : ref) {
            auto best = std::min_element(mine.begin(), mine.end(), [&](auto a, auto b) {
                return std::abs(a - z) < std::abs(b - z);
            });
            EXPECT_LT(std::abs(*best - z), 1e-8);
            mine.erase(best);
        }
    }
}

TEST(Rng, Deterministic) {
    nu::Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        differs |= u != c.uniform();
    }
    EXPECT_TRUE(differs);
    nu::Rng r(1);
    std::set<std::size_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = r.below(7);
        EXPECT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(KMeans, TwoSeparatedGroups) {
    std::vector<std::vector<double>> pts{{0}, {0}, {10}, {10}};
    auto r = nu::kmeans(pts, 2, 1);
    std::vector<double> c{r.centroids[0][0], r.centroids[1][0]};
    std::sort(c.begin(), c.end());
    EXPECT_EQ(c, (std::vector<double>{0, 10}));
}

TEST(KMeans, KEqualsN) {
    std::vector<std::vector<double>> pts{{1, 2}, {3, 1}, {0, 5}};
    auto r = nu::kmeans(pts, 3, 9);
    std::vector<std::vector<double>> c = r.centroids;
    std::sort(c.begin(), c.end());
    auto p = pts;
    std::sort(p.begin(), p.end());
    EXPECT_EQ(c, p);
}

TEST(KMeans, SingleClusterIsMean) {
    std::mt19937_64 g(3);
    std::vector<std::vector<double>> pts;
    std::vector<double> mean(3, 0.0);
    for (int i = 0; i < 25; ++i) {
        std::vector<double> v{std::uniform_real_distribution<>(0, 1)(g), std::uniform_real_distribution<>(0, 1)(g),
                              std::uniform_real_distribution<>(0, 1)(g)};
        for (int k = 0; k < 3; ++k) mean[k] += v[k] / 25.0;
        pts.push_back(v);
    }
    auto r = nu::kmeans(pts, 1, 5);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.centroids[0][k], mean[k], 1e-14);
}

TEST(KMeans, ReproducibleAndNoEmptyClusters) {
    std::mt19937_64 g(8);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({std::uniform_real_distribution<>(0, 1)(g), double(i % 3)});
    auto a = nu::kmeans(pts, 5, 77), b = nu::kmeans(pts, 5, 77);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.labels, b.labels);
    std::vector<int> count(5, 0);
    for (auto l : a.labels) ++count[l];
    for (int c : count) EXPECT_GT(c, 0);
}

TEST(KMeans, Errors) {
    std::vector<std::vector<double>> pts{{1}, {2}};
    EXPECT_THROW(nu::kmeans(pts, 3, 1), nmfvar::ConfigError);
    EXPECT_THROW(nu::kmeans(std::vector<std::vector<double>>{}, 1, 1), nmfvar::ConfigError);
}
