#pragma once

#include <span>
#include <vector>

namespace qtime {

/// Least-squares slope of log(y) against log(x). Pairs with y <= 0 are skipped.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Least-squares slope and intercept of y against x.
struct LineFit {
    double slope;
    double intercept;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// n points geometrically spaced in [a, b], a > 0.
std::vector<double> logspace(double a, double b, int n);

double trapezoid(std::span<const double> t, std::span<const double> y);

/// Cumulative trapezoid; out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> y);

bool all_finite(std::span<const double> v);

double max_abs(std::span<const double> v);

/// In-place solve of a periodic tridiagonal system
///   lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]   (indices mod n)
/// by the Sherman-Morrison reduction to two Thomas sweeps. Throws ArgumentError
/// on a zero pivot. Requires n >= 3.
void solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<double> rhs);

}  // namespace qtime
