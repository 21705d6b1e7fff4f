#include "qtime/ode_lab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "qtime/errors.hpp"
#include "qtime/numerics.hpp"

namespace qtime::ode {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    if (!all_finite(v)) throw ArgumentError(std::string(what) + ": non-finite input");
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double log_cosh(double y) {
    const double ay = std::abs(y);
    return ay + std::log1p(std::exp(-2.0 * ay)) - std::log(2.0);
}

}  // namespace

Vec Potential::grad(std::span<const double> x) const {
    Vec g(x.size());
    grad(x, g);
    return g;
}

// ---------------------------------------------------------------------------

QuadraticPotential::QuadraticPotential(Vec weights) : a_(std::move(weights)) {
    if (a_.empty()) throw ArgumentError("QuadraticPotential needs dim >= 1");
    for (double w : a_) {
        if (!(w > 0)) throw ArgumentError("QuadraticPotential weights must be positive");
    }
}

double QuadraticPotential::eval(std::span<const double> x) const {
    double s = 0;
    for (std::size_t i = 0; i < a_.size(); ++i) s += 0.5 * a_[i] * x[i] * x[i];
    return s;
}

void QuadraticPotential::grad(std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = a_[i] * x[i];
}

void QuadraticPotential::hess(std::span<const double>, std::span<double> out) const {
    const std::size_t d = a_.size();
    std::fill(out.begin(), out.begin() + d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) out[i * d + i] = a_[i];
}

double QuadraticPotential::convexity_lo() const { return *std::min_element(a_.begin(), a_.end()); }
double QuadraticPotential::convexity_hi() const { return *std::max_element(a_.begin(), a_.end()); }

std::string QuadraticPotential::name() const {
    const bool iso = std::all_of(a_.begin(), a_.end(), [](double w) { return w == 1.0; });
    return iso ? "quadratic" : "anisotropic";
}

// ---------------------------------------------------------------------------

LinearPotential::LinearPotential(Vec force) : g_(std::move(force)) {
    if (g_.empty()) throw ArgumentError("LinearPotential needs dim >= 1");
}

double LinearPotential::eval(std::span<const double> x) const { return -dot(g_, x); }

void LinearPotential::grad(std::span<const double>, std::span<double> out) const {
    for (std::size_t i = 0; i < g_.size(); ++i) out[i] = -g_[i];
}

void LinearPotential::hess(std::span<const double>, std::span<double> out) const {
    std::fill(out.begin(), out.begin() + g_.size() * g_.size(), 0.0);
}

// ---------------------------------------------------------------------------

LogCoshPotential::LogCoshPotential(int dim, double a, double c, double angle)
    : dim_(dim), a_(a), c_(c), cos_(std::cos(angle)), sin_(std::sin(angle)) {
    if (dim < 1 || !(a > 0) || !(c >= 0)) throw ArgumentError("LogCoshPotential: bad parameters");
}

void LogCoshPotential::rotate(std::span<const double> x, std::span<double> y) const {
    int i = 0;
    for (; i + 1 < dim_; i += 2) {
        y[i] = cos_ * x[i] - sin_ * x[i + 1];
        y[i + 1] = sin_ * x[i] + cos_ * x[i + 1];
    }
    if (i < dim_) y[i] = x[i];
}

void LogCoshPotential::rotate_back(std::span<const double> y, std::span<double> x) const {
    int i = 0;
    for (; i + 1 < dim_; i += 2) {
        x[i] = cos_ * y[i] + sin_ * y[i + 1];
        x[i + 1] = -sin_ * y[i] + cos_ * y[i + 1];
    }
    if (i < dim_) x[i] = y[i];
}

double LogCoshPotential::eval(std::span<const double> x) const {
    Vec y(dim_);
    rotate(x, y);
    double s = 0.5 * a_ * dot(x, x);
    for (double yi : y) s += c_ * log_cosh(yi);
    return s;
}

void LogCoshPotential::grad(std::span<const double> x, std::span<double> out) const {
    Vec y(dim_), t(dim_);
    rotate(x, y);
    for (int i = 0; i < dim_; ++i) t[i] = c_ * std::tanh(y[i]);
    rotate_back(t, out);
    for (int i = 0; i < dim_; ++i) out[i] += a_ * x[i];
}

void LogCoshPotential::hess(std::span<const double> x, std::span<double> out) const {
    Vec y(dim_);
    rotate(x, y);
    // Columns of Q^T diag(s) Q via rotating unit vectors.
    Vec e(dim_), qe(dim_), col(dim_);
    for (int j = 0; j < dim_; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        rotate(e, qe);
        for (int i = 0; i < dim_; ++i) {
            const double sech = 1.0 / std::cosh(y[i]);
            qe[i] *= c_ * sech * sech;
        }
        rotate_back(qe, col);
        for (int i = 0; i < dim_; ++i) out[i * dim_ + j] = col[i] + (i == j ? a_ : 0.0);
    }
}

double LogCoshPotential::third_deriv_bound() const { return c_ * 4.0 / (3.0 * std::sqrt(3.0)); }

std::vector<std::shared_ptr<const Potential>> suite_potentials(int dim) {
    Vec aniso(dim);
    for (int i = 0; i < dim; ++i) aniso[i] = dim == 1 ? 1.5 : 0.5 + static_cast<double>(i) / (dim - 1);
    return {
        std::make_shared<QuadraticPotential>(QuadraticPotential::isotropic(dim)),
        std::make_shared<QuadraticPotential>(aniso),
        std::make_shared<LogCoshPotential>(dim, 0.5, 1.0, 0.4),
    };
}

// ---------------------------------------------------------------------------

OdeState step_conservative(const OdeState& state, const Potential& potential, double dt) {
    if (!(dt > 0)) throw ArgumentError("step_conservative: dt must be positive");
    const std::size_t d = state.x.size();
    OdeState next = state;
    Vec g(d);
    potential.grad(state.x, g);
    for (std::size_t i = 0; i < d; ++i) next.v[i] -= 0.5 * dt * g[i];
    for (std::size_t i = 0; i < d; ++i) next.x[i] += dt * next.v[i];
    potential.grad(next.x, g);
    for (std::size_t i = 0; i < d; ++i) next.v[i] -= 0.5 * dt * g[i];
    next.t = state.t + dt;
    if (!all_finite(next.x) || !all_finite(next.v)) {
        throw NumericalBlowup("step_conservative produced non-finite state at t=" +
                                  std::to_string(next.t),
                              std::lround(next.t / dt));
    }
    return next;
}

GradientFlowState step_gradient_flow(const GradientFlowState& state, const Potential& potential,
                                     double dtheta, GradientScheme scheme) {
    if (!(dtheta > 0)) throw ArgumentError("step_gradient_flow: dtheta must be positive");
    const std::size_t d = state.z.size();
    GradientFlowState next = state;
    next.theta = state.theta + dtheta;

    if (scheme == GradientScheme::RK4) {
        Vec k1(d), k2(d), k3(d), k4(d), tmp(d);
        potential.grad(state.z, k1);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = state.z[i] - 0.5 * dtheta * k1[i];
        potential.grad(tmp, k2);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = state.z[i] - 0.5 * dtheta * k2[i];
        potential.grad(tmp, k3);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = state.z[i] - dtheta * k3[i];
        potential.grad(tmp, k4);
        for (std::size_t i = 0; i < d; ++i) {
            next.z[i] = state.z[i] - dtheta / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
        return next;
    }

    // Newton on Z - Z0 + dtheta grad phi(Z) = 0, started from the explicit Euler guess.
    constexpr int kMaxIter = 50;
    const int n = static_cast<int>(d);
    Vec g(d), h(d * d);
    potential.grad(state.z, g);
    for (std::size_t i = 0; i < d; ++i) next.z[i] = state.z[i] - dtheta * g[i];
    double res = 0;
    for (int it = 0; it < kMaxIter; ++it) {
        potential.grad(next.z, g);
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r[i] = next.z[i] - state.z[i] + dtheta * g[i];
        res = r.norm();
        if (res <= 1e-14 * (1.0 + Eigen::Map<const Eigen::VectorXd>(next.z.data(), n).norm())) {
            return next;
        }
        potential.hess(next.z, h);
        Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n) +
                              dtheta * Eigen::Map<const Eigen::MatrixXd>(h.data(), n, n);
        const Eigen::VectorXd step = jac.partialPivLu().solve(r);
        for (int i = 0; i < n; ++i) next.z[i] -= step[i];
    }
    throw IterationLimit("implicit Euler Newton did not converge", res);
}

double modulated_energy(std::span<const double> x, std::span<const double> v,
                        std::span<const double> y, std::span<const double> w,
                        const Potential& potential) {
    require_finite(x, "modulated_energy");
    require_finite(v, "modulated_energy");
    require_finite(y, "modulated_energy");
    require_finite(w, "modulated_energy");
    const std::size_t d = x.size();
    Vec gy(d);
    potential.grad(y, gy);
    double kin = 0, lin = 0;
    for (std::size_t i = 0; i < d; ++i) {
        kin += (v[i] - w[i]) * (v[i] - w[i]);
        lin += gy[i] * (x[i] - y[i]);
    }
    return 0.5 * kin + potential.eval(x) - potential.eval(y) - lin;
}

double total_energy(const OdeState& state, const Potential& potential) {
    return 0.5 * dot(state.v, state.v) + potential.eval(state.x);
}

TimeCompareSeries quadratic_time_compare(std::span<const double> x0, const Potential& potential,
                                         double T, double dt) {
    if (!(T > 0) || !(dt > 0)) throw ArgumentError("quadratic_time_compare: T and dt must be positive");
    const std::size_t d = x0.size();
    const long steps = std::lround(T / dt);

    TimeCompareSeries out;
    out.dim = static_cast<int>(d);
    out.t.reserve(steps + 1);

    OdeState cons{0.0, Vec(x0.begin(), x0.end()), Vec(d, 0.0)};
    GradientFlowState grad{0.0, Vec(x0.begin(), x0.end())};
    Vec gz(d);

    auto record = [&](double t) {
        potential.grad(grad.z, gz);
        double e = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const double dx = cons.x[i] - grad.z[i];
            const double dv = cons.v[i] + t * gz[i];  // Z'(theta) = -grad phi(Z)
            e += dx * dx + dv * dv;
        }
        out.t.push_back(t);
        out.x.push_back(cons.x);
        out.v.push_back(cons.v);
        out.z.push_back(grad.z);
        out.e.push_back(e);
    };

    record(0.0);
    for (long k = 0; k < steps; ++k) {
        const double t0 = k * dt, t1 = (k + 1) * dt;
        cons = step_conservative(cons, potential, dt);
        cons.t = t1;
        grad = step_gradient_flow(grad, potential, 0.5 * (t1 * t1 - t0 * t0));
        record(t1);
    }
    return out;
}

double fit_error_exponent(const TimeCompareSeries& series, double t_lo, double t_hi, int samples) {
    if (series.t.size() < 2) throw ArgumentError("fit_error_exponent: empty series");
    const double dt = series.t[1] - series.t[0];
    std::vector<double> ts, es;
    long last = -1;
    for (double target : logspace(t_lo, t_hi, samples)) {
        const long k = std::lround(target / dt);
        if (k <= 0 || k >= static_cast<long>(series.t.size()) || k == last) continue;
        last = k;
        ts.push_back(series.t[k]);
        es.push_back(series.e[k]);
    }
    return loglog_slope(ts, es);
}

double generic_constant(const SampledTrajectory& trial, const Potential& potential) {
    double vmax = 0;
    for (const auto& v : trial.v) vmax = std::max(vmax, std::sqrt(dot(v, v)));
    const double lo = potential.convexity_lo();
    if (!(lo > 0)) throw ArgumentError("generic_constant needs a strongly convex potential");
    return potential.third_deriv_bound() * (1.0 + vmax) / lo;
}

namespace {

// Second derivative of sampled positions: 3-point centered in the interior,
// 4-point one-sided (second order, uniform spacing) at the ends.
std::vector<Vec> second_derivative(const SampledTrajectory& y) {
    const std::size_t m = y.t.size(), d = y.x.front().size();
    if (m < 4) throw ArgumentError("ode_dissipative_residual: need at least 4 samples");
    std::vector<Vec> acc(m, Vec(d));
    for (std::size_t k = 1; k + 1 < m; ++k) {
        const double h0 = y.t[k] - y.t[k - 1], h1 = y.t[k + 1] - y.t[k];
        for (std::size_t i = 0; i < d; ++i) {
            acc[k][i] = 2.0 * (h0 * y.x[k + 1][i] - (h0 + h1) * y.x[k][i] + h1 * y.x[k - 1][i]) /
                        (h0 * h1 * (h0 + h1));
        }
    }
    const double h = y.t[1] - y.t[0], hl = y.t[m - 1] - y.t[m - 2];
    for (std::size_t i = 0; i < d; ++i) {
        acc[0][i] = (2 * y.x[0][i] - 5 * y.x[1][i] + 4 * y.x[2][i] - y.x[3][i]) / (h * h);
        acc[m - 1][i] =
            (2 * y.x[m - 1][i] - 5 * y.x[m - 2][i] + 4 * y.x[m - 3][i] - y.x[m - 4][i]) / (hl * hl);
    }
    return acc;
}

}  // namespace

double ode_dissipative_residual(const SampledTrajectory& x, const SampledTrajectory& y,
                                const Potential& potential, double C, double T) {
    if (x.t.size() != y.t.size() || x.x.size() != x.t.size() || y.x.size() != y.t.size() ||
        x.v.size() != x.t.size() || y.v.size() != y.t.size()) {
        throw ArgumentError("ode_dissipative_residual: mismatched grids");
    }
    for (std::size_t k = 0; k < x.t.size(); ++k) {
        if (std::abs(x.t[k] - y.t[k]) > 1e-12 * (1.0 + std::abs(x.t[k]))) {
            throw ArgumentError("ode_dissipative_residual: mismatched grids");
        }
    }
    std::size_t last = 0;
    while (last + 1 < x.t.size() && x.t[last + 1] <= T * (1 + 1e-12)) ++last;
    if (last < 3) throw ArgumentError("ode_dissipative_residual: T too small for the grid");

    const std::size_t d = x.x.front().size();
    const auto acc = second_derivative(y);
    const double t_end = x.t[last];

    std::vector<double> ts(last + 1), integrand(last + 1);
    Vec g(d);
    for (std::size_t k = 0; k <= last; ++k) {
        potential.grad(y.x[k], g);
        double s = 0;
        for (std::size_t i = 0; i < d; ++i) s += (x.v[k][i] - y.v[k][i]) * (acc[k][i] + g[i]);
        ts[k] = x.t[k];
        integrand[k] = s * std::exp((t_end - x.t[k]) * C);
    }
    const double eta_T = modulated_energy(x.x[last], x.v[last], y.x[last], y.v[last], potential);
    const double eta_0 = modulated_energy(x.x[0], x.v[0], y.x[0], y.v[0], potential);
    return eta_T + trapezoid(ts, integrand) - eta_0 * std::exp(C * t_end);
}

SampledTrajectory integrate_conservative(const OdeState& start, const Potential& potential,
                                         double dt, long steps) {
    SampledTrajectory out;
    OdeState s = start;
    out.t.push_back(s.t);
    out.x.push_back(s.x);
    out.v.push_back(s.v);
    for (long k = 0; k < steps; ++k) {
        s = step_conservative(s, potential, dt);
        s.t = start.t + (k + 1) * dt;
        out.t.push_back(s.t);
        out.x.push_back(s.x);
        out.v.push_back(s.v);
    }
    return out;
}

}  // namespace qtime::ode
