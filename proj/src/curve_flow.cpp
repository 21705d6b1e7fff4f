#include "qtime/curve_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtime/errors.hpp"
#include "qtime/numerics.hpp"

namespace qtime::curve {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> centre_or_origin(std::span<const double> centre, int d) {
    std::vector<double> c(d, 0.0);
    for (int i = 0; i < d && i < static_cast<int>(centre.size()); ++i) c[i] = centre[i];
    return c;
}

double edge_length(const PeriodicCurve& c, int k) {
    double s = 0;
    for (int i = 0; i < c.d; ++i) {
        const double e = c.at(k + 1, i) - c.at(k, i);
        s += e * e;
    }
    return std::sqrt(s);
}

void check_curve(const PeriodicCurve& c) {
    if (c.d < 2 || c.d > 3) throw ArgumentError("curve dimension must be 2 or 3");
    if (c.N() < 3 || static_cast<int>(c.x.size()) != c.N() * c.d) {
        throw ArgumentError("curve needs at least 3 nodes");
    }
}

}  // namespace

PeriodicCurve make_circle(int N, double R, std::span<const double> centre, int d) {
    const auto o = centre_or_origin(centre, d);
    PeriodicCurve c{d, std::vector<double>(static_cast<std::size_t>(N) * d), 0.0};
    for (int k = 0; k < N; ++k) {
        const double phi = kTwoPi * k / N;
        for (int i = 0; i < d; ++i) c.x[k * d + i] = o[i];
        c.x[k * d] += R * std::cos(phi);
        c.x[k * d + 1] += R * std::sin(phi);
    }
    return c;
}

PeriodicCurve make_warped_circle(int N, double R, double amp, std::span<const double> centre) {
    const auto o = centre_or_origin(centre, 2);
    PeriodicCurve c{2, std::vector<double>(2 * N), 0.0};
    for (int k = 0; k < N; ++k) {
        const double s = static_cast<double>(k) / N;
        const double phi = kTwoPi * s + amp * std::sin(kTwoPi * s);
        c.x[2 * k] = o[0] + R * std::cos(phi);
        c.x[2 * k + 1] = o[1] + R * std::sin(phi);
    }
    return c;
}

PeriodicCurve make_ellipse(int N, double a, double b, std::span<const double> centre) {
    const auto o = centre_or_origin(centre, 2);
    PeriodicCurve c{2, std::vector<double>(2 * N), 0.0};
    for (int k = 0; k < N; ++k) {
        const double phi = kTwoPi * k / N;
        c.x[2 * k] = o[0] + a * std::cos(phi);
        c.x[2 * k + 1] = o[1] + b * std::sin(phi);
    }
    return c;
}

PeriodicCurve make_trefoil(int N, double scale) {
    PeriodicCurve c{3, std::vector<double>(3 * N), 0.0};
    for (int k = 0; k < N; ++k) {
        const double t = kTwoPi * k / N;
        c.x[3 * k] = scale * (std::sin(t) + 2 * std::sin(2 * t));
        c.x[3 * k + 1] = scale * (std::cos(t) - 2 * std::cos(2 * t));
        c.x[3 * k + 2] = -scale * std::sin(3 * t);
    }
    return c;
}

std::vector<double> tangent(const PeriodicCurve& c) {
    check_curve(c);
    const int N = c.N();
    std::vector<double> t(c.x.size());
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < c.d; ++i) t[k * c.d + i] = (c.at(k + 1, i) - c.at(k - 1, i)) * 0.5 * N;
    }
    return t;
}

std::vector<double> curvature_vector(const PeriodicCurve& c) {
    check_curve(c);
    const int N = c.N(), d = c.d;
    std::vector<double> len(N), kappa(c.x.size());
    for (int k = 0; k < N; ++k) {
        len[k] = edge_length(c, k);
        if (!(len[k] > 0)) throw DegenerateCurve("vanishing discrete tangent", k);
    }
    for (int k = 0; k < N; ++k) {
        const int km = (k + N - 1) % N;
        const double lp = len[k], lm = len[km];
        for (int i = 0; i < d; ++i) {
            const double tp = (c.at(k + 1, i) - c.at(k, i)) / lp;
            const double tm = (c.at(k, i) - c.at(k - 1, i)) / lm;
            kappa[k * d + i] = 2.0 * (tp - tm) / (lp + lm);
        }
    }
    return kappa;
}

double curve_length(const PeriodicCurve& c) {
    check_curve(c);
    double L = 0;
    for (int k = 0; k < c.N(); ++k) L += edge_length(c, k);
    return L;
}

std::vector<double> centroid(const PeriodicCurve& c) {
    std::vector<double> m(c.d, 0.0);
    for (int k = 0; k < c.N(); ++k) {
        for (int i = 0; i < c.d; ++i) m[i] += c.x[k * c.d + i];
    }
    for (double& v : m) v /= c.N();
    return m;
}

double mean_radius(const PeriodicCurve& c) {
    const auto m = centroid(c);
    double s = 0;
    for (int k = 0; k < c.N(); ++k) {
        double r2 = 0;
        for (int i = 0; i < c.d; ++i) r2 += (c.x[k * c.d + i] - m[i]) * (c.x[k * c.d + i] - m[i]);
        s += std::sqrt(r2);
    }
    return s / c.N();
}

double max_radius_deviation(const PeriodicCurve& c, double R) {
    const auto m = centroid(c);
    double dev = 0;
    for (int k = 0; k < c.N(); ++k) {
        double r2 = 0;
        for (int i = 0; i < c.d; ++i) r2 += (c.x[k * c.d + i] - m[i]) * (c.x[k * c.d + i] - m[i]);
        dev = std::max(dev, std::abs(std::sqrt(r2) - R));
    }
    return dev;
}

PeriodicCurve step_curve_shortening(const PeriodicCurve& c, double dtheta) {
    check_curve(c);
    if (!(dtheta > 0)) throw ArgumentError("step_curve_shortening: dtheta must be positive");
    const int N = c.N(), d = c.d;
    std::vector<double> len(N);
    for (int k = 0; k < N; ++k) {
        len[k] = edge_length(c, k);
        if (!(len[k] > 0)) throw DegenerateCurve("vanishing discrete tangent", k);
    }
    std::vector<double> lower(N), diag(N), upper(N), rhs(N);
    for (int k = 0; k < N; ++k) {
        const double lp = len[k], lm = len[(k + N - 1) % N];
        const double cp = 2.0 * dtheta / ((lp + lm) * lp);
        const double cm = 2.0 * dtheta / ((lp + lm) * lm);
        lower[k] = -cm;
        diag[k] = 1.0 + cp + cm;
        upper[k] = -cp;
    }
    PeriodicCurve out = c;
    out.theta = c.theta + dtheta;
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < N; ++k) rhs[k] = c.x[k * d + i];
        try {
            solve_cyclic_tridiagonal(lower, diag, upper, rhs);
        } catch (const ArgumentError&) {
            throw DegenerateCurve("curve-shortening linear solve failed", 0);
        }
        for (int k = 0; k < N; ++k) out.x[k * d + i] = rhs[k];
    }
    if (!all_finite(out.x)) throw DegenerateCurve("curve-shortening produced non-finite nodes", 0);
    return out;
}

void apply_minv(std::span<const double> a, double eps, std::span<const double> v,
                std::span<double> out) {
    const std::size_t d = a.size();
    double a2 = 0, av = 0;
    for (std::size_t i = 0; i < d; ++i) {
        a2 += a[i] * a[i];
        av += a[i] * v[i];
    }
    const double inv = 1.0 / (eps * eps + a2);
    for (std::size_t i = 0; i < d; ++i) out[i] = inv * (v[i] + a[i] * av / (eps * eps));
}

std::vector<double> eps_flow_velocity(const PeriodicCurve& c, double eps) {
    check_curve(c);
    if (!(eps > 0)) throw ArgumentError("eps-flow needs eps > 0");
    const int N = c.N(), d = c.d;
    const double h = c.h();
    // Edge flux X_s / sqrt(eps^2 + |X_s|^2) at k + 1/2.
    std::vector<double> flux(c.x.size());
    for (int k = 0; k < N; ++k) {
        double a2 = 0;
        for (int i = 0; i < d; ++i) {
            const double e = (c.at(k + 1, i) - c.at(k, i)) / h;
            flux[k * d + i] = e;
            a2 += e * e;
        }
        const double s = 1.0 / std::sqrt(eps * eps + a2);
        for (int i = 0; i < d; ++i) flux[k * d + i] *= s;
    }
    const auto xs = tangent(c);
    std::vector<double> vel(c.x.size()), rhs(d);
    for (int k = 0; k < N; ++k) {
        const int km = (k + N - 1) % N;
        double a2 = 0;
        for (int i = 0; i < d; ++i) a2 += xs[k * d + i] * xs[k * d + i];
        const double sq = std::sqrt(eps * eps + a2);
        for (int i = 0; i < d; ++i) rhs[i] = sq * (flux[k * d + i] - flux[km * d + i]) / h;
        apply_minv(std::span(xs).subspan(k * d, d), eps, rhs, std::span(vel).subspan(k * d, d));
    }
    return vel;
}

double admissible_dtheta_eps(const PeriodicCurve& c, double eps) {
    const auto xs = tangent(c);
    double amin = INFINITY;
    for (int k = 0; k < c.N(); ++k) {
        double a2 = eps * eps;
        for (int i = 0; i < c.d; ++i) a2 += xs[k * c.d + i] * xs[k * c.d + i];
        amin = std::min(amin, a2);
    }
    return 0.4 * c.h() * c.h() * amin;
}

PeriodicCurve step_curve_shortening_eps(const PeriodicCurve& c, double eps, double dtheta) {
    if (!(dtheta > 0)) throw ArgumentError("step_curve_shortening_eps: dtheta must be positive");
    const double adm = admissible_dtheta_eps(c, eps);
    if (dtheta > adm * (1 + 1e-12)) throw StepRejected("eps-flow: explicit stability bound violated", adm);
    const auto vel = eps_flow_velocity(c, eps);
    PeriodicCurve out = c;
    for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] += dtheta * vel[i];
    out.theta = c.theta + dtheta;
    if (!all_finite(out.x)) throw NumericalBlowup("eps-flow produced non-finite nodes", 0);
    return out;
}

double orthogonality_residual(const PeriodicCurve& prev, const PeriodicCurve& next, double dtheta) {
    const auto xs = tangent(next);
    const int d = next.d;
    double worst = 0;
    for (int k = 0; k < next.N(); ++k) {
        double vx = 0, vv = 0, xx = 0;
        for (int i = 0; i < d; ++i) {
            const double v = (next.x[k * d + i] - prev.x[k * d + i]) / dtheta;
            vx += v * xs[k * d + i];
            vv += v * v;
            xx += xs[k * d + i] * xs[k * d + i];
        }
        if (vv > 0 && xx > 0) worst = std::max(worst, std::abs(vx) / std::sqrt(vv * xx));
    }
    return worst;
}

std::optional<double> shrink_circle_oracle(double R0, double theta) {
    if (!(R0 > 0)) throw ArgumentError("shrink_circle_oracle: R0 must be positive");
    const double r2 = R0 * R0 - 2.0 * theta;
    if (r2 <= 0) return std::nullopt;
    return std::sqrt(r2);
}

double eps_circle_radius(double R0, double eps, double theta) {
    const double c = eps * eps / (4.0 * std::numbers::pi * std::numbers::pi);
    const double target = 0.5 * R0 * R0 + c * std::log(R0) - theta;
    auto g = [&](double R) { return 0.5 * R * R + c * std::log(R) - target; };
    double lo = R0, hi = R0;
    while (g(lo) > 0) lo *= 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0 ? hi : lo) = mid;
    }
    // Newton polish.
    double R = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) R -= g(R) / (R + c / R);
    return R;
}

CurveRun run_curve_shortening(PeriodicCurve c, const CurveRunOptions& opt) {
    CurveRun run;
    const double h = c.h();
    auto record = [&](double ortho) {
        run.theta.push_back(c.theta);
        run.length.push_back(curve_length(c));
        run.radius.push_back(mean_radius(c));
        run.orthogonality.push_back(ortho);
    };
    record(0.0);
    long step = 0;
    while (c.theta < opt.theta_end - 1e-15) {
        const double dth = std::min(opt.dtheta, opt.theta_end - c.theta);
        PeriodicCurve next = step_curve_shortening(c, dth);
        const double ortho = orthogonality_residual(c, next, dth);
        c = std::move(next);
        ++step;
        if (opt.resample && step % opt.resample_every == 0) {
            c = resample_arclength(c);
            run.resampled = true;
        }
        const bool tiny = curve_length(c) < 10.0 * h;
        if (step % opt.record_every == 0 || tiny) record(ortho);
        if (tiny) {
            run.stopped_near_extinction = true;
            break;
        }
    }
    // Extinction estimate from the last 30% of the (theta, (L/2pi)^2) samples.
    const std::size_t m = run.theta.size();
    if (m >= 4) {
        const std::size_t first = m - std::max<std::size_t>(3, (3 * m) / 10);
        std::vector<double> th, r2;
        for (std::size_t i = first; i < m; ++i) {
            const double r = run.length[i] / kTwoPi;
            th.push_back(run.theta[i]);
            r2.push_back(r * r);
        }
        const auto fit = fit_line(th, r2);
        if (fit.slope < 0) run.extinction_estimate = -fit.intercept / fit.slope;
    }
    run.final_state = std::move(c);
    return run;
}

PeriodicCurve resample_arclength(const PeriodicCurve& c) {
    check_curve(c);
    const int N = c.N(), d = c.d;
    std::vector<double> cum(N + 1, 0.0);
    for (int k = 0; k < N; ++k) cum[k + 1] = cum[k] + edge_length(c, k);
    const double L = cum[N];
    PeriodicCurve out = c;
    int seg = 0;
    for (int k = 0; k < N; ++k) {
        const double target = L * k / N;
        while (seg < N - 1 && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double w = len > 0 ? (target - cum[seg]) / len : 0.0;
        for (int i = 0; i < d; ++i) {
            out.x[k * d + i] = (1 - w) * c.at(seg, i) + w * c.at(seg + 1, i);
        }
    }
    return out;
}

}  // namespace qtime::curve
