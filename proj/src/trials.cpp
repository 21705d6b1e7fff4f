#include "qtime/trials.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "qtime/errors.hpp"
#include "qtime/spectral.hpp"

namespace qtime::cert {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> sample_point_field(const PointField& f, int d, int n, double theta) {
    std::size_t N = 1;
    for (int a = 0; a < d; ++a) N *= static_cast<std::size_t>(n);
    std::vector<double> out(d * N, 0.0);
    if (!f) return out;
    std::vector<double> x(d), val(d);
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t rem = i;
        for (int a = d - 1; a >= 0; --a) {
            x[a] = static_cast<double>(rem % n) / n;
            rem /= n;
        }
        std::fill(val.begin(), val.end(), 0.0);
        f(theta, x, val);
        for (int a = 0; a < d; ++a) out[a * N + i] = val[a];
    }
    return out;
}

std::vector<double> unit(std::span<const double> dir) {
    double n2 = 0;
    for (double v : dir) n2 += v * v;
    if (!(n2 > 0)) throw InvalidTrial("trial direction must be nonzero");
    std::vector<double> u(dir.begin(), dir.end());
    for (double& v : u) v /= std::sqrt(n2);
    return u;
}

std::string dir_name(std::span<const double> u) {
    std::ostringstream os;
    os.precision(3);
    os << "b(";
    for (std::size_t a = 0; a < u.size(); ++a) os << (a ? "," : "") << u[a] + 0.0;
    os << ")";
    return os.str();
}

}  // namespace

TrialTriple analytic_trial(std::string id, double lambda, PointField b, PointField v, PointField A,
                           PointField dtheta_b, bool time_independent) {
    TrialTriple t;
    t.id = std::move(id);
    t.lambda = lambda;
    t.time_independent = time_independent;
    t.analytic_dtheta = static_cast<bool>(dtheta_b) || time_independent;
    t.sample = [b, v, A, dtheta_b](int d, int n, double theta) {
        TrialSample s;
        s.b = sample_point_field(b, d, n, theta);
        s.v = sample_point_field(v, d, n, theta);
        s.A = sample_point_field(A, d, n, theta);
        if (dtheta_b) s.dtheta_b = sample_point_field(dtheta_b, d, n, theta);
        return s;
    };
    return t;
}

TrialTriple constant_trial(std::span<const double> dir, double lambda) {
    const auto u = unit(dir);
    return analytic_trial(
        dir_name(u), lambda,
        [u](double, std::span<const double>, std::span<double> out) {
            std::copy(u.begin(), u.end(), out.begin());
        },
        {}, {}, {}, true);
}

void FourierMode::eval(std::span<const double> x, std::span<double> out) const {
    double phase = 0;
    for (std::size_t a = 0; a < m.size() && a < x.size(); ++a) phase += m[a] * x[a];
    phase *= kTwoPi;
    out[axis] += amp * (cosine ? std::cos(phase) : std::sin(phase));
}

std::string FourierMode::name() const {
    std::ostringstream os;
    os << amp << (cosine ? "cos" : "sin") << "(";
    for (std::size_t a = 0; a < m.size(); ++a) os << (a ? "," : "") << m[a];
    os << ")e" << axis + 1;
    return os.str();
}

TrialTriple fourier_trial(std::span<const double> dir, const FourierMode* v, const FourierMode* A,
                          double lambda) {
    const auto u = unit(dir);
    std::string id = dir_name(u);
    PointField vf, af;
    if (v) {
        id += " v=" + v->name();
        vf = [mode = *v](double, std::span<const double> x, std::span<double> out) { mode.eval(x, out); };
    }
    if (A) {
        if (std::abs(A->amp) > 1) throw InvalidTrial("A mode amplitude must be at most 1");
        id += " A=" + A->name();
        af = [mode = *A, lambda](double, std::span<const double> x, std::span<double> out) {
            mode.eval(x, out);
            for (double& o : out) o *= lambda;
        };
    }
    return analytic_trial(
        id, lambda,
        [u](double, std::span<const double>, std::span<double> out) {
            std::copy(u.begin(), u.end(), out.begin());
        },
        vf, af, {}, true);
}

std::vector<TrialTriple> default_dictionary(int d, double lambda) {
    if (d < 2 || d > 3) throw ArgumentError("dictionary dimension must be 2 or 3");
    std::vector<std::vector<double>> dirs;
    for (int a = 0; a < d; ++a) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> u(d, 0.0);
            u[a] = s;
            dirs.push_back(u);
        }
    }
    for (int a = 0; a < d; ++a) {
        for (int c = a + 1; c < d; ++c) {
            for (double s : {1.0, -1.0}) {
                std::vector<double> u(d, 0.0);
                u[a] = 1.0;
                u[c] = s;
                dirs.push_back(u);
            }
        }
    }
    auto e = [d](int a) {
        std::vector<int> m(d, 0);
        m[a] = 1;
        return m;
    };
    const std::vector<FourierMode> vs = {
        {e(1), 0, 0.5, false},
        {e(0), 1, 0.5, true},
    };
    const std::vector<FourierMode> as = {
        {e(0), 0, 1.0, true},
        {e(1), 1, 1.0, false},
        {e(0), 1, -1.0, false},
    };
    std::vector<TrialTriple> out;
    for (const auto& u : dirs) {
        out.push_back(fourier_trial(u, nullptr, nullptr, lambda));
        for (const auto& a : as) out.push_back(fourier_trial(u, nullptr, &a, lambda));
        for (const auto& v : vs) {
            out.push_back(fourier_trial(u, &v, nullptr, lambda));
            for (const auto& a : as) out.push_back(fourier_trial(u, &v, &a, lambda));
        }
    }
    return out;
}

TrialTriple projected_optimal_trial(std::span<const FieldState> frames, const TrialTriple& base,
                                    int modes) {
    if (frames.empty()) throw ArgumentError("projected_optimal_trial needs frames");
    if (modes < 1) throw ArgumentError("projected_optimal_trial needs at least one mode");
    const int d = frames[0].d, n = frames[0].n;
    const auto& sp = spectral::get(d, n);
    const std::size_t N = sp.npts(), M = sp.ncplx();
    const double lambda = base.lambda;

    // Keep the `modes` coefficients of smallest |k| (ties by index).
    std::vector<std::size_t> order(M);
    for (std::size_t c = 0; c < M; ++c) order[c] = c;
    auto k2 = [&](std::size_t c) {
        double s = 0;
        for (int a = 0; a < d; ++a) s += sp.wavenumber(a)[c] * sp.wavenumber(a)[c];
        return s;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t p, std::size_t q) { return k2(p) < k2(q); });
    std::vector<unsigned char> keep(M, 0);
    for (std::size_t i = 0; i < std::min<std::size_t>(modes, M); ++i) keep[order[i]] = 1;

    auto table = std::make_shared<std::map<double, TrialSample>>();
    std::vector<std::complex<double>> z(M);
    for (const auto& f : frames) {
        TrialSample s = sample_with_dtheta(base, d, n, f.theta);
        const auto P = f.P.empty() ? eulerian::compute_P(f) : f.P;
        std::vector<double> A(d * N);
        for (std::size_t x = 0; x < N; ++x) {
            double rho2 = 0;
            for (int a = 0; a < d; ++a) rho2 += f.B[a * N + x] * f.B[a * N + x];
            const double rho = std::sqrt(rho2);
            const double rf = std::max(rho, f.rho_floor);
            double z2 = 0;
            for (int a = 0; a < d; ++a) {
                const double za = P[a * N + x] - rho * s.v[a * N + x];
                A[a * N + x] = za / rf;
                z2 += za * za;
            }
            const double an = std::sqrt(z2) / rf;
            if (an > lambda) {
                for (int a = 0; a < d; ++a) A[a * N + x] *= lambda / an;
            }
        }
        for (int a = 0; a < d; ++a) {
            auto comp = std::span(A).subspan(a * N, N);
            sp.forward(comp, z);
            for (std::size_t c = 0; c < M; ++c) {
                if (!keep[c]) z[c] = 0.0;
            }
            sp.inverse(z, comp);
        }
        for (std::size_t x = 0; x < N; ++x) {
            double a2 = 0;
            for (int a = 0; a < d; ++a) a2 += A[a * N + x] * A[a * N + x];
            const double an = std::sqrt(a2);
            if (an > lambda) {
                for (int a = 0; a < d; ++a) A[a * N + x] *= lambda / an * (1 - 1e-15);
            }
        }
        s.A = std::move(A);
        (*table)[f.theta] = std::move(s);
    }

    TrialTriple t = base;
    t.id = base.id + " A=proj" + std::to_string(modes);
    t.time_independent = false;
    t.analytic_dtheta = true;
    t.sample = [table](int, int, double theta) {
        auto it = table->lower_bound(theta - 1e-14 * (1 + std::abs(theta)));
        if (it == table->end() || std::abs(it->first - theta) > 1e-12 * (1 + std::abs(theta))) {
            throw ArgumentError("sampled trial has no frame at the requested time");
        }
        return it->second;
    };
    return t;
}

TrialTriple constant_solution(int d, int axis) {
    std::vector<double> u(d, 0.0);
    u[axis] = 1.0;
    auto t = constant_trial(u, 1.0);
    t.id = "constant e" + std::to_string(axis + 1);
    return t;
}

TrialTriple circle_congruence(std::span<const double> centre) {
    std::vector<double> c(centre.begin(), centre.end());
    auto rel = [c](std::span<const double> x, double& rx, double& ry) {
        rx = x[0] - c[0];
        ry = x[1] - c[1];
        rx -= std::round(rx);
        ry -= std::round(ry);
    };
    PointField b = [rel](double, std::span<const double> x, std::span<double> out) {
        double rx, ry;
        rel(x, rx, ry);
        const double r = std::hypot(rx, ry);
        if (r == 0) {
            out[0] = 1.0;
            return;
        }
        out[0] = -ry / r;
        out[1] = rx / r;
    };
    PointField v = [rel](double, std::span<const double> x, std::span<double> out) {
        double rx, ry;
        rel(x, rx, ry);
        const double r2 = rx * rx + ry * ry;
        if (r2 == 0) return;
        out[0] = -rx / r2;
        out[1] = -ry / r2;
    };
    auto t = analytic_trial("circle congruence", 1.0, b, v, {}, {}, true);
    return t;
}

}  // namespace qtime::cert
