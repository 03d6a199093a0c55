#include "rcla/special_functions.hpp"

#include <cmath>
#include <limits>

namespace rcla {

void QuadratureSpec::validate() const {
    if (panel_count < 2 || panel_count % 2 != 0) {
        throw DomainError("QuadratureSpec: panel_count must be a positive even integer");
    }
    if (!(absolute_tolerance > 0.0) || !std::isfinite(absolute_tolerance)) {
        throw DomainError("QuadratureSpec: absolute_tolerance must be finite and positive");
    }
}

namespace detail {

// Modified Lentz evaluation of
//   Γ(a,x) = e^{-x} x^a / (x+1-a - 1(1-a)/(x+3-a - 2(2-a)/(x+5-a - ...)))
// valid for every real a once x is moderately large.
double incomplete_gamma_continued_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaTolerance) {
            return std::exp(-x + a * std::log(x)) * h;
        }
    }
    throw ConvergenceError("upper_incomplete_gamma: continued fraction did not converge");
}

// γ(a,x) = e^{-x} x^a Σ x^n / (a(a+1)...(a+n)), a > 0.
double lower_incomplete_gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n <= kGammaMaxIterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaTolerance) {
            return sum * std::exp(-x + a * std::log(x));
        }
    }
    throw ConvergenceError("upper_incomplete_gamma: series did not converge");
}

}  // namespace detail

double upper_incomplete_gamma(double a, double x) {
    if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(a)) {
        throw DomainError("upper_incomplete_gamma: need finite a and x > 0");
    }
    if (a <= 0.0 && a == std::floor(a)) {
        throw DomainError("upper_incomplete_gamma: a must not be a non-positive integer");
    }
    if (x >= 1.0 + std::max(a, 0.0)) {
        return detail::incomplete_gamma_continued_fraction(a, x);
    }
    if (a > 0.0) {
        return std::tgamma(a) - detail::lower_incomplete_gamma_series(a, x);
    }

    // Anchor at a0 = a + n in (0,1), then walk down n times.
    const int n = static_cast<int>(std::ceil(-a));
    const double anchor = a + n;
    double value = std::tgamma(anchor) - detail::lower_incomplete_gamma_series(anchor, x);
    const double log_x = std::log(x);
    for (int k = n - 1; k >= 0; --k) {
        const double ak = a + k;
        value = (value - std::exp(ak * log_x - x)) / ak;
    }
    return value;
}

}  // namespace rcla
