#include "nmfvar/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nmfvar/error.hpp"

namespace nmfvar::numeric {

namespace {

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
    }
}

} // namespace

Matrix hadamard_mul(const Matrix& a, const Matrix& b) {
    require_same_shape("hadamard_mul", a, b);
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

Matrix hadamard_div(const Matrix& num, const Matrix& den, double eps) {
    require_same_shape("hadamard_div", num, den);
    if (!(eps >= 0.0)) throw ConfigError("hadamard_div: eps must be non-negative");
    Matrix out(num.rows(), num.cols());
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double d = den.data()[i] + eps;
        if (d == 0.0) {
            throw NumericError("hadamard_div: division by zero at (" + std::to_string(i / num.cols()) + "," +
                               std::to_string(i % num.cols()) + ")");
        }
        out.data()[i] = num.data()[i] / d;
    }
    return out;
}

double default_eps(const Matrix& m) noexcept {
    return std::max(1e-16 * m.max_abs(), std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------------------
// Dense eigenvalues: balance, reduce to upper Hessenberg by stabilized
// elimination, then Francis double-shift QR on the Hessenberg form.

namespace {

class OneBased {
public:
    explicit OneBased(Matrix& m) : m_(m) {}
    double& operator()(std::size_t i, std::size_t j) { return m_.data()[(i - 1) * m_.cols() + (j - 1)]; }

private:
    Matrix& m_;
};

void balance(Matrix& m) {
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    const std::size_t n = m.rows();
    OneBased a(m);
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 1; i <= n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (std::size_t j = 1; j <= n; ++j) a(i, j) *= g;
                for (std::size_t j = 1; j <= n; ++j) a(j, i) *= f;
            }
        }
    }
}

void to_hessenberg(Matrix& m) {
    const std::size_t n = m.rows();
    OneBased a(m);
    for (std::size_t k = 2; k < n; ++k) {
        double x = 0.0;
        std::size_t piv = k;
        for (std::size_t j = k; j <= n; ++j) {
            if (std::abs(a(j, k - 1)) > std::abs(x)) {
                x = a(j, k - 1);
                piv = j;
            }
        }
        if (piv != k) {
            for (std::size_t j = k - 1; j <= n; ++j) std::swap(a(piv, j), a(k, j));
            for (std::size_t j = 1; j <= n; ++j) std::swap(a(j, piv), a(j, k));
        }
        if (x == 0.0) continue;
        for (std::size_t i = k + 1; i <= n; ++i) {
            double y = a(i, k - 1);
            if (y == 0.0) continue;
            y /= x;
            a(i, k - 1) = y;
            for (std::size_t j = k; j <= n; ++j) a(i, j) -= y * a(k, j);
            for (std::size_t j = 1; j <= n; ++j) a(j, k) += y * a(j, i);
        }
    }
    for (std::size_t i = 3; i <= n; ++i)
        for (std::size_t j = 1; j + 1 < i; ++j) a(i, j) = 0.0;
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

} // namespace

Eigenvalues hessenberg_qr_eigenvalues(const Matrix& input, int max_iter_per_value) {
    if (input.rows() != input.cols()) {
        throw ConfigError("eigenvalues: matrix must be square, got " + input.shape());
    }
    const std::size_t n = input.rows();
    Eigenvalues ev{std::vector<double>(n + 1), std::vector<double>(n + 1)};
    if (n == 0) return {};
    if (!input.all_finite()) throw NumericError("eigenvalues: matrix has non-finite entries");

    Matrix work = input;
    balance(work);
    to_hessenberg(work);
    OneBased a(work);
    auto& wr = ev.re;
    auto& wi = ev.im;

    double anorm = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = std::max<std::size_t>(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));

    long nn = static_cast<long>(n);
    double t = 0.0;
    auto A = [&](long i, long j) -> double& { return a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
    while (nn >= 1) {
        int its = 0;
        long l = 0;
        do {
            for (l = nn; l >= 2; --l) {
                double s = std::abs(A(l - 1, l - 1)) + std::abs(A(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(A(l, l - 1)) + s == s) {
                    A(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = A(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn--] = 0.0;
            } else {
                double y = A(nn - 1, nn - 1);
                double w = A(nn, nn - 1) * A(nn - 1, nn);
                if (l == nn - 1) {
                    const double p = 0.5 * (y - x);
                    const double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn - 1] = -(wi[nn] = z);
                    }
                    nn -= 2;
                } else {
                    if (its == max_iter_per_value) {
                        throw NumericError("eigenvalues: QR iteration did not converge");
                    }
                    if (its > 0 && its % 10 == 0) {
                        // exceptional shift
                        t += x;
                        for (long i = 1; i <= nn; ++i) A(i, i) -= x;
                        const double s = std::abs(A(nn, nn - 1)) + std::abs(A(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    long m = nn - 2;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (; m >= l; --m) {
                        z = A(m, m);
                        r = x - z;
                        double s = y - z;
                        p = (r * s - w) / A(m + 1, m) + A(m, m + 1);
                        q = A(m + 1, m + 1) - z - r - s;
                        r = A(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(A(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(A(m - 1, m - 1)) + std::abs(z) +
                                                        std::abs(A(m + 1, m + 1)));
                        if (u + v == v) break;
                    }
                    for (long i = m + 2; i <= nn; ++i) {
                        A(i, i - 2) = 0.0;
                        if (i != m + 2) A(i, i - 3) = 0.0;
                    }
                    for (long k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = A(k, k - 1);
                            q = A(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = A(k + 2, k - 1);
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) A(k, k - 1) = -A(k, k - 1);
                        } else {
                            A(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (long j = k; j <= nn; ++j) {
                            p = A(k, j) + q * A(k + 1, j);
                            if (k != nn - 1) {
                                p += r * A(k + 2, j);
                                A(k + 2, j) -= p * z;
                            }
                            A(k + 1, j) -= p * y;
                            A(k, j) -= p * x;
                        }
                        const long mmin = nn < k + 3 ? nn : k + 3;
                        for (long i = l; i <= mmin; ++i) {
                            p = x * A(i, k) + y * A(i, k + 1);
                            if (k != nn - 1) {
                                p += z * A(i, k + 2);
                                A(i, k + 2) -= p * r;
                            }
                            A(i, k + 1) -= p * q;
                            A(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    wr.erase(wr.begin());
    wi.erase(wi.begin());
    return ev;
}

double spectral_radius(const Matrix& m, double tol, int max_iter) {
    if (m.rows() != m.cols()) throw ConfigError("spectral_radius: matrix must be square, got " + m.shape());
    if (m.rows() == 0) throw ConfigError("spectral_radius: empty matrix");
    if (!(tol > 0.0) || max_iter < 1) throw ConfigError("spectral_radius: tol must be > 0 and max_iter >= 1");
    if (!m.all_finite()) throw NumericError("spectral_radius: matrix has non-finite entries");
    const std::size_t n = m.rows();
    if (n == 1) return std::abs(m(0, 0));

    double best = std::numeric_limits<double>::quiet_NaN();
    if (m.all_nonnegative()) {
        double shift = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double rs = 0.0;
            for (double v : m.row(i)) rs += v;
            shift = std::max(shift, rs);
        }
        if (shift == 0.0) return 0.0;
        std::vector<double> v(n, 1.0), w(n);
        for (int it = 0; it < max_iter; ++it) {
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                const auto r = m.row(i);
                for (std::size_t j = 0; j < n; ++j) s += r[j] * v[j];
                w[i] = s;
                const double ratio = s / v[i];
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
            best = 0.5 * (lo + hi);
            if (hi - lo <= tol * std::max(1.0, hi)) return best;
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] += shift * v[i];
                norm = std::max(norm, w[i]);
            }
            bool underflow = false;
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = w[i] / norm;
                underflow |= !(v[i] > 0.0);
            }
            if (underflow) break;  // reducible matrix; bounds no longer defined
        }
    }

    try {
        const auto ev = hessenberg_qr_eigenvalues(m);
        double rho = 0.0;
        for (std::size_t i = 0; i < ev.re.size(); ++i) rho = std::max(rho, std::hypot(ev.re[i], ev.im[i]));
        return rho;
    } catch (const NumericError& e) {
        throw SpectralRadiusNotConverged(best, std::string("spectral_radius did not converge: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    // rejection sampling keeps draws unbiased and portable
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest(const std::vector<double>& p, const std::vector<std::vector<double>>& centroids,
                    double* dist = nullptr) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sq_dist(p, centroids[c]);
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    if (dist) *dist = bd;
    return best;
}

} // namespace

KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k, std::uint64_t seed, int max_iter) {
    if (points.empty()) throw ConfigError("kmeans: no points");
    if (k == 0) throw ConfigError("kmeans: k must be positive");
    if (k > points.size()) {
        throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds number of points " +
                          std::to_string(points.size()));
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw ConfigError("kmeans: points have differing dimensions");
    }
    const std::size_t n = points.size();
    Rng rng(seed);

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.below(n);
    centroids.push_back(points[first]);
    chosen[first] = true;
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
            if (!chosen[i]) total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || d2[i] == 0.0) continue;
                acc += d2[i];
                pick = i;
                if (acc > target) break;
            }
        } else {
            // remaining points coincide with chosen centroids
            for (std::size_t i = 0; i < n && pick == n; ++i)
                if (!chosen[i]) pick = i;
        }
        chosen[pick] = true;
        centroids.push_back(points[pick]);
    }

    KMeansResult res;
    res.labels.assign(n, k);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        bool changed = false;
        std::vector<double> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = nearest(points[i], centroids, &dist[i]);
            if (c != res.labels[i]) {
                res.labels[i] = c;
                changed = true;
            }
        }
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t c : res.labels) ++counts[c];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            double fd = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[res.labels[i]] > 1 && dist[i] > fd) {
                    fd = dist[i];
                    far = i;
                }
            }
            if (far == n) break;
            --counts[res.labels[far]];
            res.labels[far] = c;
            counts[c] = 1;
            dist[far] = 0.0;
            changed = true;
        }
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            auto& acc = sums[res.labels[i]];
            for (std::size_t j = 0; j < dim; ++j) acc[j] += points[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
        if (!changed) break;
    }
    res.centroids = std::move(centroids);
    return res;
}

} // namespace nmfvar::numeric
