#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "loynes/errors.hpp"
#include "loynes/matrix.hpp"
#include "loynes/optimize.hpp"

namespace loynes {

namespace detail {
inline constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Perron root of a nonnegative matrix by shifted power iteration.
//
// The matrix is first balanced (Osborne's diagonal similarity, which leaves
// the spectrum untouched) so that wildly tilted inputs like [[0,1],[a,0]]
// with a near the underflow threshold expose their Perron root sqrt(a) at
// working precision. The iteration then runs on M + sI with s the dominant
// balanced row sum: the shift kills periodicity and, being proportional to
// rho itself, keeps the spectral gap resolvable at any scale. Convergence is
// declared when successive growth quotients differ by <= 1e-14 relative.
inline double spectral_radius(const Mat &m) {
    require_square(m, "spectral_radius");
    const std::size_t n = m.size();
    for (const auto &row : m)
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw parameter_error("spectral_radius: entries must be finite and nonnegative");

    Mat a = m;
    for (int sweep = 0; sweep < 50; ++sweep) {
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                row += a[i][j];
                col += a[j][i];
            }
            if (!(row > 0.0) || !(col > 0.0)) continue;
            double f = std::sqrt(col / row);
            if (!(f > 1e-150)) f = 1e-150;
            if (f > 1e150) f = 1e150;
            if (f > 1.001 || f < 0.999) moved = true;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                a[i][j] *= f;
                a[j][i] /= f;
            }
        }
        if (!moved) break;
    }

    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (double v : a[i]) row += v;
        shift = std::max(shift, row);
    }
    if (shift == 0.0) return 0.0;

    std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n, 0.0);
    double quotient = shift, prev = -1.0;
    for (int iter = 0; iter < 100000; ++iter) {
        // y = (M + sI) x with x normalized to unit L1 mass; the L1 norm of y
        // is the growth quotient for this step.
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = shift * x[i];
            for (std::size_t j = 0; j < n; ++j) acc += a[i][j] * x[j];
            y[i] = acc;
            norm += acc;
        }
        quotient = norm;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
        if (std::abs(quotient - prev) <= 1e-14 * std::abs(quotient)) break;
        prev = quotient;
    }
    return quotient - shift;
}

inline void require_two_state_params(double alpha, double beta, const char *what) {
    if (!(alpha > 0.0 && alpha < beta && beta < 1.0))
        throw parameter_error(std::string(what) +
                              ": parameters must satisfy 0 < alpha < beta < 1");
}

// Tail exponent of the two-state +/-1 chain with transition probabilities
// alpha (-1 to +1) and beta (+1 to -1).
inline double two_state_exponent(double alpha, double beta) {
    require_two_state_params(alpha, beta, "two_state_exponent");
    return std::log((1.0 - alpha) / (1.0 - beta));
}

// Rate of the transition-matrix estimate landing on A(a,b) instead of the
// true (alpha, beta): the stationary-weighted relative entropy between rows.
// Finite only for a, b in (0,1); +infinity elsewhere.
inline double two_state_relative_entropy(double alpha, double beta, double a, double b) {
    require_two_state_params(alpha, beta, "two_state_relative_entropy");
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) return detail::kInf;
    const double w_minus = b / (a + b);
    const double w_plus = a / (a + b);
    const double row_minus =
        (1.0 - a) * std::log((1.0 - a) / (1.0 - alpha)) + a * std::log(a / alpha);
    const double row_plus =
        b * std::log(b / beta) + (1.0 - b) * std::log((1.0 - b) / (1.0 - beta));
    return w_minus * row_minus + w_plus * row_plus;
}

// Rate function for the tail-exponent estimates of the two-state chain:
// the entropy above minimized along the one-parameter family with
// log((1-a)/(1-b)) = x. No closed form; a 512-point scan (log-spaced towards
// the lower feasibility edge) locates candidate basins and golden-section
// refines each local bracket. The curve is not convex for large x, so a
// single descent would not be trustworthy.
inline double two_state_rate(double alpha, double beta, double x) {
    require_two_state_params(alpha, beta, "two_state_rate");
    if (!std::isfinite(x)) return detail::kInf;
    const double lo = x >= 0.0 ? 0.0 : 1.0 - std::exp(x);
    if (!(lo < 1.0)) return detail::kInf;

    const double exp_neg_x = std::exp(-x);
    auto objective = [&](double a) {
        const double b = 1.0 - (1.0 - a) * exp_neg_x;
        return two_state_relative_entropy(alpha, beta, a, b);
    };

    constexpr int kScan = 512;
    const double span = 1.0 - lo;
    const double log_lo = std::log(1e-9);
    std::vector<double> as(kScan), hs(kScan);
    for (int i = 0; i < kScan; ++i) {
        const double t = std::exp(log_lo * (1.0 - static_cast<double>(i) / (kScan - 1)));
        as[i] = lo + span * t;
        hs[i] = objective(as[i]);
    }

    double best = detail::kInf;
    for (int i = 0; i < kScan; ++i) {
        const bool left_ok = i == 0 || hs[i] <= hs[i - 1];
        const bool right_ok = i == kScan - 1 || hs[i] <= hs[i + 1];
        if (!(left_ok && right_ok) || !std::isfinite(hs[i])) continue;
        const double bracket_lo = as[i > 0 ? i - 1 : i];
        const double bracket_hi = as[i < kScan - 1 ? i + 1 : i];
        const auto refined = golden_section_min(objective, bracket_lo, bracket_hi, 1e-12);
        best = std::min({best, refined.value, hs[i]});
    }
    return std::max(0.0, best);
}

// Tail exponent of the D/M/1 queue: the positive root of
// log(alpha/(alpha - t)) - t/beta = 0 on (0, alpha). The function is convex
// with negative slope at 0 and a pole at alpha, so the root is unique;
// bisection brackets it and Newton steps polish the residual below 1e-12.
inline double dm1_exponent(double alpha, double beta) {
    if (!(alpha > 0.0 && beta > 0.0 && alpha > beta))
        throw parameter_error("dm1_exponent: requires alpha > beta > 0 (negative drift)");
    auto g = [&](double t) { return -std::log1p(-t / alpha) - t / beta; };
    auto dg = [&](double t) { return 1.0 / (alpha - t) - 1.0 / beta; };

    double lo = 1e-12 * alpha;
    double hi = alpha - 1e-12 * alpha;
    while (g(hi) <= 0.0) hi = alpha - (alpha - hi) / 16.0;

    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * alpha; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const double residual = g(root);
        if (!std::isfinite(residual) || std::abs(residual) <= 1e-13) break;
        const double step = residual / dg(root);
        double next = root - step;
        if (!(next > 0.0 && next < alpha)) next = 0.5 * (lo + hi);
        root = next;
    }
    return root;
}

struct RateCurvePoint {
    double x = 0.0;
    double value = 0.0; // +inf allowed
};

enum class RateCurveKind { two_state_rate, legendre_estimate, mc_ldp };

// A sampled rate curve ready for CSV export: x strictly increasing, values
// nonnegative extended reals.
struct RateCurve {
    std::vector<RateCurvePoint> points;
    std::vector<std::string> meta; // parameter echo, emitted as `#` comments
    RateCurveKind kind = RateCurveKind::two_state_rate;
};

} // namespace loynes
