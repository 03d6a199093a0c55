#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcla/errors.hpp"

namespace rcla {

/// Space-time discretization. With `stretch` > 0 the space nodes follow a sinh
/// map that concentrates them around `stretch_anchor`; larger values cluster
/// harder. Time is split into `t_steps` steps of nominal size t_max / t_steps,
/// adjusted per segment when breakpoints are supplied to the solver.
struct GridSpec {
    double z_min = 0.0;
    double z_max = 50.0;
    int z_steps = 2500;
    double t_max = 55.0;
    int t_steps = 2750;
    double stretch = 0.0;
    double stretch_anchor = 0.0;

    void validate() const;
    std::vector<double> nodes() const;
    double nominal_dt() const { return t_max / t_steps; }
};

/// Coefficients of V_t + a V_z + ½ c V_zz - k V + s = 0.
struct CoefficientField {
    std::function<double(double t, double z)> drift;
    std::function<double(double t, double z)> diffusion_sq;
    std::function<double(double t)> discount;
    std::function<double(double t, double z)> source;
};

/// Boundary condition α V + β V_z = g(t) on one side. Dirichlet is (1, 0),
/// Neumann is (0, 1).
struct BoundarySpec {
    enum class Kind { dirichlet, neumann, robin };
    enum class Side { lower, upper };

    Kind kind = Kind::dirichlet;
    Side side = Side::lower;
    double alpha = 1.0;
    double beta = 0.0;
    std::function<double(double t)> value;

    static BoundarySpec dirichlet(Side side, std::function<double(double)> g);
    static BoundarySpec neumann(Side side, double slope);
    static BoundarySpec robin(Side side, double alpha, double beta, std::function<double(double)> g = {});

    double at(double t) const { return value ? value(t) : 0.0; }
    void validate() const;
};

enum class DriftScheme { central, peclet_upwind };

struct SolveOptions {
    double theta = 0.5;
    int rannacher_half_steps = 2;
    DriftScheme drift_scheme = DriftScheme::central;
    /// Times the time grid must hit exactly; the implicit startup restarts after each.
    std::vector<double> breakpoints;
    /// Store every n-th time level (plus both ends). 0 keeps only t = 0 and t_max.
    int history_stride = 1;
    std::string label = "V";
};

struct SolveDiagnostics {
    int time_steps = 0;
    double max_residual = 0.0;
};

/// Solved value function on (t, z). Rows are time levels in ascending t.
struct PriceSurface {
    GridSpec grid;
    std::vector<double> t;
    std::vector<double> z;
    std::vector<double> values;
    std::string label;
    SolveDiagnostics diagnostics;

    std::size_t rows() const { return t.size(); }
    std::size_t cols() const { return z.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * z.size() + col]; }
    double& at(std::size_t row, std::size_t col) { return values[row * z.size() + col]; }
};

PriceSurface solve_backward(const CoefficientField& coeffs, const GridSpec& grid,
                            const std::function<double(double z)>& terminal, const BoundarySpec& lower,
                            const BoundarySpec& upper, const SolveOptions& options = {});

/// Solves a V_z + ½ c V_zz - k V + s = 0 with coefficients frozen at time `t`.
std::vector<double> solve_stationary(const CoefficientField& coeffs, const GridSpec& grid,
                                     const BoundarySpec& lower, const BoundarySpec& upper, double t = 0.0,
                                     DriftScheme drift_scheme = DriftScheme::central);

/// Cubic Lagrange interpolation in z on the four nearest nodes, linear in t.
double sample_surface(const PriceSurface& s, double t, double z);

/// ∂V/∂z from five-point node differences, interpolated like sample_surface.
double sample_surface_dz(const PriceSurface& s, double t, double z);

/// Writes `t,z,value` rows, row-major by time.
void write_surface_csv(const PriceSurface& s, std::ostream& out);

/// Time levels used by the solver: uniform steps inside each segment between
/// breakpoints, with each segment's step count rounded up.
std::vector<double> time_levels(const GridSpec& grid, const std::vector<double>& breakpoints);

namespace detail {
/// Thomas algorithm. Returns max |A x - r| of the computed solution.
double solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                         const std::vector<double>& upper, const std::vector<double>& rhs,
                         std::vector<double>& x, std::vector<double>& scratch);
}  // namespace detail

}  // namespace rcla
