#pragma once

#include <vector>

#include "rcla/special_functions.hpp"

namespace rcla {

/// Gompertz-Makeham law: hazard λ + (1/b)·exp((x + t - m)/b) for a life aged x.
struct MortalityParams {
    double x = 65.0;        ///< purchase age, years
    double lambda = 0.0;    ///< constant (Makeham) hazard per year
    double m = 86.3;        ///< modal age, years
    double b = 9.5;         ///< dispersion, years
    double max_age = 120.0; ///< terminal age; PDE horizon is max_age - x

    void validate() const;
    double horizon() const { return max_age - x; }
};

/// Present value of $1/yr of lifetime income starting after `deferral` years.
struct AnnuityQuote {
    double value = 0.0;
    double deferral = 0.0;
    double valuation_rate = 0.0;
};

double hazard_rate(double t, const MortalityParams& p);
double cumulative_hazard(double t, const MortalityParams& p);
double survival_probability(double t, const MortalityParams& p);

/// Closed form through the upper incomplete gamma function. Falls back to
/// quadrature when λ + ρ is zero or the gamma parameter is an integer, and to
/// the constant-hazard formula when the Gompertz term is negligible.
AnnuityQuote alda_factor(double deferral, double rho, const MortalityParams& p);

/// Simpson integration of survival × discount from `deferral` to the point
/// where the survival probability falls below e^{-45}.
double alda_factor_quadrature(double deferral, double rho, const MortalityParams& p,
                              const QuadratureSpec& spec = {});

inline double spia_factor(double rho, const MortalityParams& p) {
    return alda_factor(0.0, rho, p).value;
}

/// F(ξ) = ∫_ξ^∞ ₜp_x e^{-ρt} dt.
double deferred_factor_F(double xi, double rho, const MortalityParams& p);

/// F'(ξ) = -ξp_x e^{-ρξ}.
double deferred_factor_Fprime(double xi, double rho, const MortalityParams& p);

/// F and F' tabulated on a uniform grid over [0, t_max]. Values between nodes
/// use cubic Hermite interpolation with the exact derivative, so the table is
/// accurate to O(h⁴). Queries beyond t_max are evaluated exactly.
class DeferredFactorTable {
public:
    DeferredFactorTable(const MortalityParams& p, double rho, double t_max, int intervals);

    double F(double t) const;
    double Fprime(double t) const;
    /// u(t, 0) = F(t) / F'(t) with the constant-hazard limit once F' underflows.
    double ratio(double t) const;

    double rho() const { return rho_; }
    const MortalityParams& mortality() const { return params_; }

private:
    MortalityParams params_;
    double rho_;
    double t_max_;
    double step_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

}  // namespace rcla
