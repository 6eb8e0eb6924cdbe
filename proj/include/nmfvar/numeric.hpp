#pragma once

#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <span>
#include <vector>

#include "nmfvar/matrix.hpp"

namespace nmfvar::numeric {

Matrix hadamard_mul(const Matrix& a, const Matrix& b);

/// num[i,j] / (den[i,j] + eps). With eps == 0 a zero denominator throws.
Matrix hadamard_div(const Matrix& num, const Matrix& den, double eps);

/// 1e-16 * max|m|, floored at the smallest normal double.
double default_eps(const Matrix& m) noexcept;

/// Thrown when neither iteration converges; carries the best estimate seen.
class SpectralRadiusNotConverged : public std::exception {
public:
    SpectralRadiusNotConverged(double estimate, std::string msg)
        : estimate_(estimate), msg_(std::move(msg)) {}
    double estimate() const noexcept { return estimate_; }
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    double estimate_;
    std::string msg_;
};

/// Largest eigenvalue modulus of a square matrix.
///
/// Entrywise non-negative matrices go through shifted power iteration with
/// Collatz-Wielandt bounds as the stopping certificate; the shift makes the
/// Perron root strictly dominant even for periodic matrices such as seasonal
/// companion forms. Anything else, or a power run that does not certify
/// within max_iter, is handed to a Hessenberg + Francis double-shift QR
/// eigenvalue solve.
double spectral_radius(const Matrix& m, double tol = 1e-12, int max_iter = 10000);

/// Eigenvalues (real, imaginary) of a square matrix via Hessenberg QR.
struct Eigenvalues {
    std::vector<double> re;
    std::vector<double> im;
};
Eigenvalues hessenberg_qr_eigenvalues(const Matrix& m, int max_iter_per_value = 60);

/// Portable deterministic RNG: mt19937_64 bits with our own mapping to
/// doubles/integers, so draws are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();                              // [0, 1)
    std::size_t below(std::size_t n);              // [0, n)
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

struct KMeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> labels;
    int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded with
/// the point farthest from its current centroid.
KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k,
                    std::uint64_t seed, int max_iter = 300);

} // namespace nmfvar::numeric
