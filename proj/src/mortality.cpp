#include "rcla/mortality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcla {

namespace {

// Below this, exp((x - m)/b) contributes nothing at double precision and the
// law is a constant hazard λ.
constexpr double kNegligibleGompertz = 1e-250;

double gompertz_scale(const MortalityParams& p) { return std::exp((p.x - p.m) / p.b); }

bool near_integer(double a) { return std::abs(a - std::round(a)) < 1e-7; }

}  // namespace

void MortalityParams::validate() const {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("MortalityParams: x must be >= 0");
    if (!std::isfinite(lambda) || lambda < 0.0) throw DomainError("MortalityParams: lambda must be >= 0");
    if (!(m > 0.0)) throw DomainError("MortalityParams: m must be > 0");
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("MortalityParams: b must be > 0");
    if (!(max_age > x) || !std::isfinite(max_age)) throw DomainError("MortalityParams: max_age must exceed x");
}

double hazard_rate(double t, const MortalityParams& p) {
    if (!(t >= 0.0)) throw DomainError("hazard_rate: t must be >= 0");
    return p.lambda + std::exp((p.x + t - p.m) / p.b) / p.b;
}

double cumulative_hazard(double t, const MortalityParams& p) {
    if (!(t >= 0.0)) throw DomainError("cumulative_hazard: t must be >= 0");
    return gompertz_scale(p) * std::expm1(t / p.b) + p.lambda * t;
}

double survival_probability(double t, const MortalityParams& p) {
    return std::exp(-cumulative_hazard(t, p));
}

double alda_factor_quadrature(double deferral, double rho, const MortalityParams& p,
                              const QuadratureSpec& spec) {
    p.validate();
    if (!(deferral >= 0.0)) throw DomainError("alda_factor: deferral must be >= 0");
    if (rho < 0.0 && p.lambda + rho <= 0.0) throw DomainError("alda_factor: need lambda + rho >= 0");

    const double scale = gompertz_scale(p);
    double t_end = std::numeric_limits<double>::infinity();
    if (scale > 0.0) {
        // Cumulative Gompertz hazard reaches 45 here.
        t_end = p.b * std::log1p(45.0 / scale);
    }
    if (p.lambda + rho > 0.0) t_end = std::min(t_end, deferral + 45.0 / (p.lambda + rho));
    if (!std::isfinite(t_end)) throw DomainError("alda_factor: integral does not converge");
    if (t_end <= deferral) return 0.0;

    auto integrand = [&](double t) { return survival_probability(t, p) * std::exp(-rho * t); };
    // Split into pieces of at most ten dispersions so the panel doubling starts resolved.
    const int pieces = std::max(1, static_cast<int>(std::ceil((t_end - deferral) / (2.0 * p.b))));
    const double width = (t_end - deferral) / pieces;
    QuadratureSpec piece_spec = spec;
    piece_spec.absolute_tolerance = spec.absolute_tolerance / pieces;
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        total += simpson_integrate_adaptive(integrand, deferral + i * width, deferral + (i + 1) * width, piece_spec);
    }
    return total;
}

AnnuityQuote alda_factor(double deferral, double rho, const MortalityParams& p) {
    p.validate();
    if (!(deferral >= 0.0)) throw DomainError("alda_factor: deferral must be >= 0");
    const double total_rate = p.lambda + rho;
    if (total_rate < 0.0) throw DomainError("alda_factor: need lambda + rho >= 0");

    AnnuityQuote quote{0.0, deferral, rho};
    const double scale = gompertz_scale(p);
    if (scale < kNegligibleGompertz) {
        if (!(total_rate > 0.0)) throw DomainError("alda_factor: constant hazard needs lambda + rho > 0");
        quote.value = std::exp(-total_rate * deferral) / total_rate;
        return quote;
    }

    const double a = -total_rate * p.b;
    if (total_rate == 0.0 || (a <= 0.0 && near_integer(a))) {
        quote.value = alda_factor_quadrature(deferral, rho, p, QuadratureSpec{128, 1e-12});
        return quote;
    }
    const double arg = std::exp((p.x - p.m + deferral) / p.b);
    const double log_prefactor = total_rate * (p.x - p.m) + scale;
    quote.value = p.b * upper_incomplete_gamma(a, arg) * std::exp(log_prefactor);
    return quote;
}

double deferred_factor_F(double xi, double rho, const MortalityParams& p) {
    return alda_factor(xi, rho, p).value;
}

double deferred_factor_Fprime(double xi, double rho, const MortalityParams& p) {
    if (!(xi >= 0.0)) throw DomainError("deferred_factor_Fprime: xi must be >= 0");
    return -std::exp(-cumulative_hazard(xi, p) - rho * xi);
}

DeferredFactorTable::DeferredFactorTable(const MortalityParams& p, double rho, double t_max, int intervals)
    : params_(p), rho_(rho), t_max_(t_max) {
    p.validate();
    if (!(t_max > 0.0) || intervals < 1) throw DomainError("DeferredFactorTable: need t_max > 0 and intervals >= 1");
    step_ = t_max / intervals;
    values_.resize(intervals + 1);
    slopes_.resize(intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
        const double t = i * step_;
        values_[i] = deferred_factor_F(t, rho, p);
        slopes_[i] = deferred_factor_Fprime(t, rho, p);
    }
}

double DeferredFactorTable::F(double t) const {
    if (!(t >= 0.0)) throw DomainError("DeferredFactorTable: t must be >= 0");
    if (t >= t_max_) return deferred_factor_F(t, rho_, params_);
    const auto last = static_cast<double>(values_.size() - 1);
    const double pos = std::min(t / step_, last);
    const auto i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
    const double s = pos - static_cast<double>(i);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * values_[i] + h10 * step_ * slopes_[i] + h01 * values_[i + 1] + h11 * step_ * slopes_[i + 1];
}

double DeferredFactorTable::Fprime(double t) const { return deferred_factor_Fprime(t, rho_, params_); }

double DeferredFactorTable::ratio(double t) const {
    const double slope = Fprime(t);
    if (slope == 0.0 || std::abs(slope) < 1e-280) {
        return -1.0 / (hazard_rate(t, params_) + rho_);
    }
    return F(t) / slope;
}

}  // namespace rcla
