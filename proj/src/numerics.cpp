#include "qtime/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "qtime/errors.hpp"

namespace qtime {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ArgumentError("fit_line needs two or more paired samples");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw ArgumentError("fit_line: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0 && y[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    return fit_line(lx, ly).slope;
}

std::vector<double> logspace(double a, double b, int n) {
    if (a <= 0 || b <= 0 || n < 1) throw ArgumentError("logspace needs positive bounds");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1));
    out.front() = a;
    out.back() = b;
    return out;
}

double trapezoid(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw ArgumentError("trapezoid: size mismatch");
    double s = 0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw ArgumentError("cumulative_trapezoid: size mismatch");
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    }
    return out;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_abs(std::span<const double> v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace {

// Thomas algorithm on a non-periodic tridiagonal system; a[0] and c[n-1] ignored.
void thomas(std::span<const double> a, std::span<const double> b, std::span<const double> c,
            std::span<double> r, std::vector<double>& scratch) {
    const std::size_t n = b.size();
    scratch.assign(n, 0.0);
    double piv = b[0];
    if (piv == 0) throw ArgumentError("tridiagonal solve: zero pivot");
    r[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = c[i - 1] / piv;
        piv = b[i] - a[i] * scratch[i];
        if (piv == 0) throw ArgumentError("tridiagonal solve: zero pivot");
        r[i] = (r[i] - a[i] * r[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) r[i] -= scratch[i + 1] * r[i + 1];
}

}  // namespace

void solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n < 3 || lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw ArgumentError("cyclic tridiagonal solve needs n >= 3 and matching sizes");
    }
    const double alpha = upper[n - 1];  // row n-1, column 0
    const double beta = lower[0];       // row 0, column n-1
    const double gamma = -diag[0];

    std::vector<double> bb(diag.begin(), diag.end());
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;

    std::vector<double> scratch;
    thomas(lower, bb, upper, rhs, scratch);

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    thomas(lower, bb, upper, u, scratch);

    const double fact = (rhs[0] + beta * rhs[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * u[i];
}

}  // namespace qtime
