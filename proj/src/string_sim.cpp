#include "qtime/string_sim.hpp"

#include <algorithm>
#include <cmath>

#include "qtime/errors.hpp"
#include "qtime/numerics.hpp"

namespace qtime::string {

namespace {

constexpr double kFixedPointTol = 1e-12;
constexpr int kFixedPointMaxIter = 100;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> centred_xs(std::span<const double> x, int d) {
    const int N = static_cast<int>(x.size()) / d;
    std::vector<double> xs(x.size());
    for (int k = 0; k < N; ++k) {
        const int kp = (k + 1) % N, km = (k + N - 1) % N;
        for (int i = 0; i < d; ++i) xs[k * d + i] = (x[kp * d + i] - x[km * d + i]) * 0.5 * N;
    }
    return xs;
}

// (Phi_{k+1/2} - Phi_{k-1/2}) / h with Phi = G X_t + H X_s on edges.
std::vector<double> flux_divergence(std::span<const double> x, std::span<const double> xt, int d,
                                    double eps) {
    const int N = static_cast<int>(x.size()) / d;
    std::vector<double> phi(x.size()), out(x.size());
    std::vector<double> xs(d), v(d);
    for (int k = 0; k < N; ++k) {
        const int kp = (k + 1) % N;
        for (int i = 0; i < d; ++i) {
            xs[i] = (x[kp * d + i] - x[k * d + i]) * N;
            v[i] = 0.5 * (xt[k * d + i] + xt[kp * d + i]);
        }
        const auto c = coefficients_at(v, xs, eps);
        for (int i = 0; i < d; ++i) phi[k * d + i] = c.G * v[i] + c.H * xs[i];
    }
    for (int k = 0; k < N; ++k) {
        const int km = (k + N - 1) % N;
        for (int i = 0; i < d; ++i) out[k * d + i] = (phi[k * d + i] - phi[km * d + i]) * N;
    }
    return out;
}

std::vector<double> recover_all(std::span<const double> w, std::span<const double> x, int d,
                                double eps) {
    const auto xs = centred_xs(x, d);
    std::vector<double> xt(w.size());
    const std::size_t N = w.size() / d;
    for (std::size_t k = 0; k < N; ++k) {
        recover_velocity(w.subspan(k * d, d), std::span(xs).subspan(k * d, d), eps,
                         std::span(xt).subspan(k * d, d));
    }
    return xt;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

StringState at_rest(const curve::PeriodicCurve& c, double eps) {
    if (!(eps > 0)) throw ArgumentError("string runs need eps > 0");
    return StringState{c.d, c.x, std::vector<double>(c.x.size(), 0.0), eps, 0.0};
}

Coefficients coefficients_at(std::span<const double> xt, std::span<const double> xs, double eps) {
    const double v2 = dot(xt, xt);
    if (!(v2 < 1.0)) throw StateInvalid("superluminal node: |X_t| >= 1");
    const double a = eps * eps + dot(xs, xs);
    const double g = dot(xt, xs);
    const double s2 = a * (1.0 - v2) + g * g;
    const double S = std::sqrt(s2);
    if (!(S > 0) || !std::isfinite(S)) throw StateInvalid("string coefficient S is not positive");
    return {a / S, g / S, (1.0 - v2) / S, S};
}

std::vector<Coefficients> string_coefficients(const StringState& state) {
    const int d = state.d;
    const auto xs = centred_xs(state.x, d);
    std::vector<Coefficients> out(state.N());
    for (int k = 0; k < state.N(); ++k) {
        out[k] = coefficients_at(std::span(state.xt).subspan(k * d, d),
                                 std::span(xs).subspan(k * d, d), state.eps);
    }
    return out;
}

std::vector<double> momentum(const StringState& state) {
    const int d = state.d;
    const auto xs = centred_xs(state.x, d);
    const auto coef = string_coefficients(state);
    std::vector<double> w(state.x.size());
    for (int k = 0; k < state.N(); ++k) {
        for (int i = 0; i < d; ++i) {
            w[k * d + i] = coef[k].F * state.xt[k * d + i] - coef[k].G * xs[k * d + i];
        }
    }
    return w;
}

std::vector<double> total_momentum(const StringState& state) {
    const auto w = momentum(state);
    std::vector<double> tot(state.d, 0.0);
    for (int k = 0; k < state.N(); ++k) {
        for (int i = 0; i < state.d; ++i) tot[i] += w[k * state.d + i];
    }
    for (double& t : tot) t *= state.h();
    return tot;
}

void recover_velocity(std::span<const double> w, std::span<const double> xs, double eps,
                      std::span<double> xt) {
    const std::size_t d = w.size();
    std::vector<double> y(d);
    curve::apply_minv(xs, eps, w, y);
    const double a = eps * eps + dot(xs, xs);
    const double yy = dot(y, y), yx = dot(y, xs);
    // S^2 = a (1 - S^2 |Y|^2) + S^2 (Y.X_s)^2 = a - S^2 q, with q = Y.MY >= 0.
    const double q = a * yy - yx * yx;
    const double S = std::sqrt(a / (1.0 + std::max(q, 0.0)));
    for (std::size_t i = 0; i < d; ++i) xt[i] = S * y[i];
    if (!(dot(xt, xt) < 1.0)) throw StateInvalid("recovered velocity is superluminal");
}

double admissible_dt(const StringState& state) {
    const auto xs = centred_xs(state.x, state.d);
    double m = 0;
    for (int k = 0; k < state.N(); ++k) {
        m = std::max(m, std::sqrt(dot(std::span(xs).subspan(k * state.d, state.d),
                                      std::span(xs).subspan(k * state.d, state.d))));
    }
    return kCfl * state.h() * state.eps / (1.0 + m);
}

StringState step_string(const StringState& state, double dt) {
    if (!(state.eps > 0)) throw ArgumentError("step_string needs eps > 0");
    if (!(dt > 0)) throw ArgumentError("step_string: dt must be positive");
    const double adm = admissible_dt(state);
    if (dt > adm * (1 + 1e-12)) throw StepRejected("step_string: CFL violated", adm);
    const int d = state.d;
    const double eps = state.eps;
    const auto w0 = momentum(state);
    const auto& x0 = state.x;

    // Half kick, implicit in W.
    std::vector<double> wh = w0;
    {
        auto f = flux_divergence(x0, state.xt, d, eps);
        for (std::size_t i = 0; i < wh.size(); ++i) wh[i] = w0[i] + 0.5 * dt * f[i];
        const double scale = 1.0 + max_abs(wh);
        int it = 0;
        for (;; ++it) {
            if (it == kFixedPointMaxIter) {
                throw IterationLimit("string half kick did not converge", 0.0);
            }
            f = flux_divergence(x0, recover_all(wh, x0, d, eps), d, eps);
            std::vector<double> next(wh.size());
            for (std::size_t i = 0; i < wh.size(); ++i) next[i] = w0[i] + 0.5 * dt * f[i];
            const double change = max_diff(next, wh);
            wh = std::move(next);
            if (change <= kFixedPointTol * scale) break;
        }
    }

    // Drift, implicit in X.
    const auto v0 = recover_all(wh, x0, d, eps);
    std::vector<double> x1(x0.size());
    for (std::size_t i = 0; i < x1.size(); ++i) x1[i] = x0[i] + dt * v0[i];
    {
        const double scale = 1.0 + max_abs(x0);
        for (int it = 0;; ++it) {
            if (it == kFixedPointMaxIter) throw IterationLimit("string drift did not converge", 0.0);
            const auto v1 = recover_all(wh, x1, d, eps);
            std::vector<double> next(x1.size());
            for (std::size_t i = 0; i < x1.size(); ++i) next[i] = x0[i] + 0.5 * dt * (v0[i] + v1[i]);
            const double change = max_diff(next, x1);
            x1 = std::move(next);
            if (change <= kFixedPointTol * scale) break;
        }
    }

    // Half kick, explicit.
    const auto f1 = flux_divergence(x1, recover_all(wh, x1, d, eps), d, eps);
    std::vector<double> w1(wh.size());
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] = wh[i] + 0.5 * dt * f1[i];

    StringState out{d, std::move(x1), {}, eps, state.time + dt};
    out.xt = recover_all(w1, out.x, d, eps);
    if (!all_finite(out.x) || !all_finite(out.xt)) {
        throw NumericalBlowup("step_string produced non-finite values", 0);
    }
    return out;
}

ComparisonSeries string_vs_shortening(const curve::PeriodicCurve& curve0, double eps, double T,
                                      const ComparisonOptions& opt) {
    if (!(T > 0)) throw ArgumentError("string_vs_shortening: T must be positive");
    const double t_min = opt.t_min > 0 ? opt.t_min : T / 8.0;
    ComparisonSeries out;
    out.t = logspace(t_min, T, opt.samples);

    StringState s = at_rest(curve0, eps);
    curve::PeriodicCurve c = curve0;
    for (double t : out.t) {
        while (s.time < t - 1e-15) {
            const double dt = std::min(opt.dt_scale * admissible_dt(s), t - s.time);
            s = step_string(s, dt);
        }
        const double theta = 0.5 * t * t;
        while (c.theta < theta - 1e-15) {
            const double dth =
                std::min(opt.dtheta_scale * curve::admissible_dtheta_eps(c, eps), theta - c.theta);
            c = curve::step_curve_shortening_eps(c, eps, dth);
        }
        double worst = 0;
        for (int k = 0; k < c.N(); ++k) {
            double d2 = 0;
            for (int i = 0; i < c.d; ++i) {
                const double e = s.x[k * c.d + i] - c.x[k * c.d + i];
                d2 += e * e;
            }
            worst = std::max(worst, std::sqrt(d2));
        }
        out.distance.push_back(worst);
    }
    const bool positive =
        std::all_of(out.distance.begin(), out.distance.end(), [](double e) { return e > 0; });
    out.fitted_order = positive ? loglog_slope(out.t, out.distance) : 0.0;
    return out;
}

}  // namespace qtime::string
