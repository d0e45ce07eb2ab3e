// Small shared pieces: 2-vector aliases, deterministic sampling, numeric helpers.
#ifndef ELLIPTLAB_CORE_HPP
#define ELLIPTLAB_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace elliptlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double pi = std::numbers::pi;
inline constexpr const char* version_string = "0.1.0";

// Reports use a genuine IEEE infinity; serializers spell it "inf".
inline double infinity_marker() { return std::numeric_limits<double>::infinity(); }

// splitmix64. Used instead of <random> distributions so that seeded runs
// produce identical bytes on every platform/libstdc++.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * unit(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

// Radical-inverse Halton value, index i >= 0.
inline double halton(std::uint64_t i, std::uint32_t base) {
    double f = 1.0, r = 0.0;
    ++i;  // skip the all-zeros sample
    while (i > 0) {
        f /= double(base);
        r += f * double(i % base);
        i /= base;
    }
    return r;
}

// Deterministic low-discrepancy points in the closed unit disc.
inline Vec2 halton_disc_point(std::uint64_t i, double radius = 1.0) {
    const double rho = radius * std::sqrt(halton(i, 2));
    const double th = 2.0 * pi * halton(i, 3);
    return {rho * std::cos(th), rho * std::sin(th)};
}

inline double sqr(double x) { return x * x; }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Least-squares slope of y against x (both already transformed by the caller).
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope: need two or more paired samples");
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw std::invalid_argument("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace elliptlab

#endif
