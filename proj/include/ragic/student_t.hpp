#pragma once

// Student's t distribution through the regularized incomplete beta function.

#include <cmath>
#include <limits>
#include <string>

#include "ragic/error.hpp"

namespace ragic {

namespace detail {

/// Continued fraction for I_x(a, b) (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 100000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0) || !(x >= 0 && x <= 1)) {
        fail(ErrorKind::out_of_range, "incomplete beta: argument out of range");
    }
    if (x == 0.0 || x == 1.0) return x;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

inline double t_cdf(double t, double dof) {
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0 ? 1.0 - tail : tail;
}

/// Inverse CDF of Student's t by bisection on t_cdf, to 1e-10 in t.
inline double t_quantile(double prob, double dof) {
    if (!(prob > 0.0 && prob < 1.0)) {
        fail(ErrorKind::out_of_range, "t_quantile: probability must lie in (0, 1)");
    }
    if (!(dof >= 1.0)) fail(ErrorKind::out_of_range, "t_quantile: degrees of freedom must be >= 1");
    if (prob == 0.5) return 0.0;
    if (prob < 0.5) return -t_quantile(1.0 - prob, dof);
    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(hi, dof) < prob) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (t_cdf(mid, dof) < prob) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace ragic
