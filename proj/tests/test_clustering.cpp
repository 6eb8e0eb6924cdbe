#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nmfvar/clustering.hpp"
#include "nmfvar/design.hpp"
#include "nmfvar/error.hpp"
#include "nmfvar/solver.hpp"
#include "support.hpp"

using nmfvar::Matrix;
namespace cl = nmfvar::cluster;
using namespace testsupport;

TEST(TimeMembership, Examples) {
    auto m = cl::time_membership(Matrix{{1, 3}, {1, 1}}, {"t1", "t2"});
    EXPECT_EQ(m.probabilities, (Matrix{{0.5, 0.75}, {0.5, 0.25}}));
    EXPECT_EQ(m.axis, cl::Axis::time_points);
    try {
        cl::time_membership(Matrix{{1, 0}, {1, 0}}, {"t1", "t2"});
        FAIL();
    } catch (const nmfvar::NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("t2"), std::string::npos);
    }
}

TEST(VariableMembership, Examples) {
    auto m = cl::variable_membership(Matrix{{0.069, 0.002, 0.005, 0.001}}, {"Ibaraki"});
    const double row[] = {0.069, 0.002, 0.005, 0.001};
    for (int q = 0; q < 4; ++q) EXPECT_NEAR(m.probabilities(0, q), row[q] / 0.077, 1e-15);
    auto one = cl::variable_membership(Matrix{{0.2}, {0.8}});
    EXPECT_EQ(one.probabilities, (Matrix{{1}, {1}}));
    auto uni = cl::variable_membership(Matrix{{0.3, 0.3, 0.3}});
    for (int q = 0; q < 3; ++q) EXPECT_NEAR(uni.probabilities(0, q), 1.0 / 3.0, 1e-15);
    try {
        cl::variable_membership(Matrix{{1, 1}, {0, 0}}, {"a", "b"});
        FAIL();
    } catch (const nmfvar::NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
    }
}

TEST(Membership, SumsAndScaleInvariance) {
    std::mt19937_64 g(40);
    Matrix b = random_matrix(4, 30, g);
    auto m = cl::time_membership(b);
    std::vector<double> scale{0.5, 3.0, 7.0, 1e-3};
    Matrix bs = b;
    for (std::size_t q = 0; q < 4; ++q)
        for (double& v : bs.row(q)) v *= scale[q];
    Matrix x = random_matrix(6, 4, g);
    auto mv = cl::variable_membership(x);
    Matrix xs = x;
    for (std::size_t p = 0; p < 6; ++p)
        for (double& v : xs.row(p)) v *= double(p + 1) * 1.7;
    auto mvs = cl::variable_membership(xs);
    for (std::size_t t = 0; t < 30; ++t) {
        double s = 0;
        for (std::size_t q = 0; q < 4; ++q) s += m.probabilities(q, t);
        EXPECT_NEAR(s, 1.0, 1e-10);
    }
    for (std::size_t p = 0; p < 6; ++p) {
        double s = 0;
        for (std::size_t q = 0; q < 4; ++q) {
            s += mv.probabilities(p, q);
            EXPECT_NEAR(mv.probabilities(p, q), mvs.probabilities(p, q), 1e-15);
        }
        EXPECT_NEAR(s, 1.0, 1e-10);
    }
    // Hard labels are unchanged when whole columns of B are rescaled.
    auto h = cl::hard_assign(m);
    Matrix bcol = b;
    for (std::size_t t = 0; t < 30; ++t)
        for (std::size_t q = 0; q < 4; ++q) bcol(q, t) *= double(t + 1);
    EXPECT_EQ(cl::hard_assign(cl::time_membership(bcol)).labels, h.labels);
}

TEST(HardAssign, ArgmaxAndTies) {
    auto m = cl::time_membership(Matrix{{3, 1, 2}, {1, 1, 5}});
    auto h = cl::hard_assign(m);
    EXPECT_EQ(h.labels, (std::vector<std::size_t>{0, 0, 1}));
    EXPECT_EQ(h.tie, (std::vector<bool>{false, true, false}));
    auto v = cl::hard_assign(cl::variable_membership(Matrix{{0.1, 0.7, 0.2}}));
    EXPECT_EQ(v.labels, (std::vector<std::size_t>{1}));
}

TEST(HardAssign, MonotoneTransformInvariance) {
    std::mt19937_64 g(41);
    auto m = cl::time_membership(random_matrix(3, 50, g));
    auto h = cl::hard_assign(m);
    cl::MembershipSeries t = m;
    for (std::size_t i = 0; i < t.probabilities.size(); ++i) {
        t.probabilities.data()[i] = std::exp(5 * t.probabilities.data()[i]) + 2;
    }
    EXPECT_EQ(cl::hard_assign(t).labels, h.labels);
}

TEST(RSquared, Definition) {
    Matrix y{{1, 2, 3}, {4, 5, 9}};
    EXPECT_EQ(cl::r_squared(y, y), 1.0);
    const double mean = y.sum() / 6.0;
    EXPECT_NEAR(cl::r_squared(y, Matrix(2, 3, mean)), 0.0, 1e-15);
    std::mt19937_64 g(42);
    Matrix a = random_matrix(3, 10, g), b = random_matrix(3, 10, g);
    Matrix a2 = a, b2 = b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a2.data()[i] += 17.0;
        b2.data()[i] += 17.0;
    }
    EXPECT_NEAR(cl::r_squared(a, b), cl::r_squared(a2, b2), 1e-12);
    EXPECT_THROW(cl::r_squared(Matrix(2, 2, 3.0), Matrix(2, 2)), nmfvar::NumericError);
    auto per = cl::r_squared_per_row(Matrix{{1, 2, 3}, {4, 4, 4}}, Matrix{{1, 2, 3}, {4, 4, 4}});
    EXPECT_EQ(per[0], 1.0);
    EXPECT_TRUE(std::isnan(per[1]));
}

TEST(LaggedCorrelation, SelfAndShift) {
    std::vector<double> a(60), b(60);
    for (std::size_t t = 0; t < 60; ++t) a[t] = std::sin(0.3 * double(t)) + 0.01 * double(t);
    auto self = cl::lagged_correlation(a, a, 7);
    EXPECT_EQ(self.best_lag, 0);
    EXPECT_NEAR(self.best_correlation, 1.0, 1e-12);
    EXPECT_EQ(self.lags.size(), 15u);
    for (std::size_t t = 0; t < 60; ++t) b[t] = t >= 3 ? a[t - 3] : 0.0;
    auto shifted = cl::lagged_correlation(a, b, 7);
    EXPECT_EQ(shifted.best_lag, 3);
    EXPECT_NEAR(shifted.best_correlation, 1.0, 1e-12);
    auto reverse = cl::lagged_correlation(b, a, 7);
    EXPECT_EQ(reverse.best_lag, -3);
}

TEST(LaggedCorrelation, Errors) {
    std::vector<double> a{1, 2, 3}, c{1, 1, 1};
    EXPECT_THROW(cl::lagged_correlation(a, a, 2), nmfvar::ConfigError);
    EXPECT_THROW(cl::lagged_correlation(a, c, 0), nmfvar::NumericError);
    EXPECT_THROW(cl::lagged_correlation(a, std::vector<double>{1, 2}, 0), nmfvar::ConfigError);
}

TEST(Membership, EveryFitNormalizes) {
    std::mt19937_64 g(43);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t p = 3 + g() % 4;
        auto design = nmfvar::design::build_lag_design(nmfvar::prep::make_frame(random_matrix(p, 30, g)), 2);
        nmfvar::solver::FitOptions o;
        o.rank = 2;
        o.max_iter = 200;
        auto m = nmfvar::solver::fit(design, o);
        auto tm = cl::time_membership(m.diagnostics.coefficients);
        auto vm = cl::variable_membership(m.basis);
        for (std::size_t t = 0; t < tm.probabilities.cols(); ++t) {
            double s = 0;
            for (std::size_t q = 0; q < 2; ++q) s += tm.probabilities(q, t);
            EXPECT_NEAR(s, 1.0, 1e-10);
        }
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0;
            for (std::size_t q = 0; q < 2; ++q) s += vm.probabilities(i, q);
            EXPECT_NEAR(s, 1.0, 1e-10);
        }
    }
}
