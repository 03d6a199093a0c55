#pragma once

#include <cmath>
#include <string>

#include "rcla/errors.hpp"

namespace rcla {

/// Composite Simpson settings. `panel_count` is the number of subintervals
/// (must be even); `absolute_tolerance` drives the adaptive variant.
struct QuadratureSpec {
    int panel_count = 128;
    double absolute_tolerance = 1e-10;

    void validate() const;
};

/// Upper incomplete gamma Γ(a, x) = ∫ₓ^∞ s^{a-1} e^{-s} ds for real a and x > 0.
///
/// Negative non-integer `a` is reached by the downward recurrence
/// Γ(a,x) = (Γ(a+1,x) - x^a e^{-x}) / a from an anchor in (0,1). For x past the
/// continued-fraction threshold the fraction is evaluated directly for any a.
/// Throws DomainError for x <= 0 or a a non-positive integer, ConvergenceError
/// when an expansion exceeds its iteration cap.
double upper_incomplete_gamma(double a, double x);

namespace detail {
inline constexpr int kGammaMaxIterations = 500;
inline constexpr double kGammaTolerance = 1e-14;

double incomplete_gamma_continued_fraction(double a, double x);
double lower_incomplete_gamma_series(double a, double x);
}  // namespace detail

/// Composite Simpson rule with `spec.panel_count` panels on [lo, hi].
template <class Fn>
double simpson_integrate(Fn&& f, double lo, double hi, const QuadratureSpec& spec) {
    spec.validate();
    if (!(hi > lo)) {
        throw DomainError("simpson_integrate: need hi > lo");
    }
    const int n = spec.panel_count;
    const double h = (hi - lo) / n;
    double odd = 0.0;
    double even = 0.0;
    for (int i = 1; i < n; ++i) {
        const double v = f(lo + i * h);
        if (i % 2 == 1) {
            odd += v;
        } else {
            even += v;
        }
    }
    return h / 3.0 * (f(lo) + 4.0 * odd + 2.0 * even + f(hi));
}

/// Doubles the panel count from `spec.panel_count` until two successive
/// estimates agree to within 15 * absolute_tolerance (the Richardson bound
/// for Simpson), then returns the extrapolated value.
template <class Fn>
double simpson_integrate_adaptive(Fn&& f, double lo, double hi, const QuadratureSpec& spec,
                                  int max_panels = 1 << 22) {
    QuadratureSpec current = spec;
    double coarse = simpson_integrate(f, lo, hi, current);
    while (current.panel_count < max_panels) {
        current.panel_count *= 2;
        const double fine = simpson_integrate(f, lo, hi, current);
        if (std::abs(fine - coarse) <= 15.0 * spec.absolute_tolerance) {
            return fine + (fine - coarse) / 15.0;
        }
        coarse = fine;
    }
    throw ConvergenceError("simpson_integrate_adaptive: panel cap reached");
}

}  // namespace rcla
