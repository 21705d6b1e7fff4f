#include "qtime/eulerian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtime/errors.hpp"
#include "qtime/kernels.hpp"
#include "qtime/numerics.hpp"
#include "qtime/spectral.hpp"

namespace qtime::eulerian {

namespace kern = kernels::omp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_grid(int d, int n) {
    if (d < 2 || d > 3) throw ArgumentError("field dimension must be 2 or 3");
    if (n < 4 || n % 2 != 0) throw ArgumentError("grid size must be even and >= 4");
}

std::vector<double> floor_inverse(const FieldState& s, std::vector<double>& rho,
                                  std::span<const double> extra = {}) {
    const std::size_t N = s.npts();
    rho.resize(N);
    std::vector<double> inv(N);
    kern::norm_floor(s.d, N, s.B, extra, s.rho_floor, rho, inv);
    return inv;
}

double sum_times(std::span<const double> f, double w) {
    double s = 0;
    for (double x : f) s += x;
    return s * w;
}

void require_finite(const FieldState& s, const char* what) {
    if (!all_finite(s.B) || !all_finite(s.P)) {
        throw NumericalBlowup(std::string(what) + " produced non-finite values at theta=" +
                                  std::to_string(s.theta),
                              0);
    }
}

}  // namespace

std::size_t FieldState::npts() const {
    std::size_t N = 1;
    for (int a = 0; a < d; ++a) N *= static_cast<std::size_t>(n);
    return N;
}

double FieldState::cell_volume() const { return std::pow(h(), d); }

double FieldState::coord(std::size_t idx, int axis) const {
    for (int a = d - 1; a > axis; --a) idx /= static_cast<std::size_t>(n);
    return static_cast<double>(idx % static_cast<std::size_t>(n)) * h();
}

FieldState make_field(int d, int n, std::vector<double> B) {
    check_grid(d, n);
    FieldState s;
    s.d = d;
    s.n = n;
    if (B.size() != static_cast<std::size_t>(d) * s.npts()) {
        throw ArgumentError("field size does not match the grid");
    }
    s.B = std::move(B);
    std::vector<double> rho;
    s.rho_floor = 1.0;
    floor_inverse(s, rho);
    const double m = max_abs(rho);
    s.rho_floor = m > 0 ? kRhoFloorFactor * m : 1e-300;
    return s;
}

FieldState sample_field(int d, int n,
                        const std::function<void(std::span<const double>, std::span<double>)>& B) {
    check_grid(d, n);
    FieldState probe;
    probe.d = d;
    probe.n = n;
    const std::size_t N = probe.npts();
    std::vector<double> data(d * N), x(d), b(d);
    for (std::size_t i = 0; i < N; ++i) {
        for (int a = 0; a < d; ++a) x[a] = probe.coord(i, a);
        B(x, b);
        for (int a = 0; a < d; ++a) data[a * N + i] = b[a];
    }
    return make_field(d, n, std::move(data));
}

FieldState lift_curves(std::span<const curve::PeriodicCurve> cs, int n, const LiftParams& params) {
    if (cs.empty()) throw ArgumentError("lift needs at least one curve");
    const int d = cs.front().d;
    check_grid(d, n);
    if (params.kernel_width < kMinKernelWidth) {
        throw ResolvabilityError("kernel width " + std::to_string(params.kernel_width) +
                                 " cells is below the resolvable minimum 1.5");
    }
    const double sigma = params.kernel_width / n;
    const int win = kernels::gaussian_window_size(n, sigma);
    if (win >= n) throw ResolvabilityError("kernel wider than the periodic box");

    std::vector<int> starts;
    std::vector<double> wx, weight;
    std::vector<double> w1(win);
    for (const auto& c : cs) {
        if (c.d != d) throw ArgumentError("lifted curves must share a dimension");
        const auto xs = curve::tangent(c);
        const double ds = c.h();
        for (int k = 0; k < c.N(); ++k) {
            for (int a = 0; a < d; ++a) {
                double p = c.x[k * d + a];
                p -= std::floor(p);
                starts.push_back(kernels::gaussian_window(p, n, sigma, win, w1));
                wx.insert(wx.end(), w1.begin(), w1.end());
                weight.push_back(xs[k * d + a] * ds);
            }
        }
    }
    FieldState s;
    s.d = d;
    s.n = n;
    std::vector<double> B(static_cast<std::size_t>(d) * s.npts());
    kern::spread(d, n, win, starts, wx, weight, B);
    if (params.projection) spectral::get(d, n).leray(B);
    return make_field(d, n, std::move(B));
}

FieldState lift_curve(const curve::PeriodicCurve& c, int n, const LiftParams& params) {
    return lift_curves(std::span(&c, 1), n, params);
}

std::vector<double> density(const FieldState& s) {
    std::vector<double> rho;
    floor_inverse(s, rho);
    return rho;
}

double total_mass(const FieldState& s) { return sum_times(density(s), s.cell_volume()); }

double max_divergence(const FieldState& s) { return spectral::get(s.d, s.n).max_divergence(s.B); }

std::vector<double> compute_P(const FieldState& s) {
    const std::size_t N = s.npts();
    std::vector<double> rho;
    const auto inv = floor_inverse(s, rho);
    std::vector<double> T(static_cast<std::size_t>(s.d * (s.d + 1) / 2) * N);
    kern::sym_outer(s.d, N, s.B, {}, 1.0, inv, T);
    std::vector<double> P(static_cast<std::size_t>(s.d) * N);
    spectral::get(s.d, s.n).div_sym(T, P);
    if (!all_finite(P)) throw NumericalBlowup("compute_P produced non-finite values", 0);
    return P;
}

double orthogonality_ratio(const FieldState& s) {
    const auto P = s.P.empty() ? compute_P(s) : s.P;
    const std::size_t N = s.npts();
    double bp = 0, norm = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double dot = 0, b2 = 0, p2 = 0;
        for (int a = 0; a < s.d; ++a) {
            dot += s.B[a * N + i] * P[a * N + i];
            b2 += s.B[a * N + i] * s.B[a * N + i];
            p2 += P[a * N + i] * P[a * N + i];
        }
        bp += std::abs(dot);
        norm += std::sqrt(b2 * p2);
    }
    return norm > 0 ? bp / norm : 0.0;
}

double admissible_dtheta_short(const FieldState& s) { return kShortStability * s.h() * s.h(); }
double admissible_dt_string(const FieldState& s) { return kStringStability * s.h() * s.h(); }

FieldState step_eulerian_short(const FieldState& s, double dtheta) {
    if (!(dtheta > 0)) throw ArgumentError("step_eulerian_short: dtheta must be positive");
    const double adm = admissible_dtheta_short(s);
    if (dtheta > adm * (1 + 1e-12)) {
        throw StepRejected("step_eulerian_short: explicit stability bound violated", adm);
    }
    using Cplx = spectral::Spectral::Cplx;
    const std::size_t N = s.npts();
    const int d = s.d;
    const auto& sp = spectral::get(d, s.n);
    const std::size_t M = sp.ncplx();
    std::vector<std::span<const double>> k(d);
    for (int a = 0; a < d; ++a) k[a] = sp.wavenumber(a);

    std::vector<std::vector<Cplx>> Bh(d, std::vector<Cplx>(M));
    std::vector<double> grad(static_cast<std::size_t>(d * d) * N);
    std::vector<Cplx> tmp(M);
    for (int a = 0; a < d; ++a) {
        sp.forward(std::span(s.B).subspan(a * N, N), Bh[a]);
        for (int j = 0; j < d; ++j) {
            for (std::size_t c = 0; c < M; ++c) tmp[c] = Bh[a][c] * Cplx(0.0, k[j][c]);
            sp.inverse(tmp, std::span(grad).subspan((a * d + j) * N, N));
        }
    }
    std::vector<double> rho;
    const auto inv = floor_inverse(s, rho);
    const int m = d * (d - 1) / 2;
    std::vector<double> A(static_cast<std::size_t>(m) * N);
    kern::transport_flux(d, N, s.B, grad, inv, A);

    // B^ -= dtheta * div A in Fourier space, then project out the
    // longitudinal part so round-off cannot accumulate in div B.
    std::vector<std::vector<Cplx>> Ah(m, std::vector<Cplx>(M));
    for (int q = 0; q < m; ++q) sp.forward(std::span<const double>(A).subspan(q * N, N), Ah[q]);
    int q = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j, ++q) {
            for (std::size_t c = 0; c < M; ++c) {
                Bh[i][c] -= dtheta * Ah[q][c] * Cplx(0.0, k[j][c]);
                Bh[j][c] += dtheta * Ah[q][c] * Cplx(0.0, k[i][c]);
            }
        }
    }
    for (std::size_t c = 0; c < M; ++c) {
        double k2 = 0;
        Cplx kv(0.0, 0.0);
        for (int a = 0; a < d; ++a) {
            k2 += k[a][c] * k[a][c];
            kv += k[a][c] * Bh[a][c];
        }
        if (k2 == 0) continue;
        for (int a = 0; a < d; ++a) Bh[a][c] -= k[a][c] * kv / k2;
    }

    FieldState out;
    out.d = d;
    out.n = s.n;
    out.rho_floor = s.rho_floor;
    out.theta = s.theta + dtheta;
    out.B.resize(s.B.size());
    for (int a = 0; a < d; ++a) sp.inverse(Bh[a], std::span(out.B).subspan(a * N, N));
    require_finite(out, "step_eulerian_short");
    return out;
}

FieldState step_eulerian_string(const FieldState& s, double dt) {
    if (!(dt > 0)) throw ArgumentError("step_eulerian_string: dt must be positive");
    const double adm = admissible_dt_string(s);
    if (dt > adm * (1 + 1e-12)) throw StepRejected("step_eulerian_string: CFL violated", adm);
    if (s.P.size() != s.B.size()) throw ArgumentError("string field system needs P");
    const std::size_t N = s.npts();
    std::vector<double> rho;
    const auto inv = floor_inverse(s, rho, s.P);
    const auto& sp = spectral::get(s.d, s.n);

    std::vector<double> A(static_cast<std::size_t>(s.d * (s.d - 1) / 2) * N);
    kern::antisym_outer(s.d, N, s.B, s.P, inv, A);
    std::vector<double> divA(static_cast<std::size_t>(s.d) * N);
    sp.div_antisym(A, divA);

    std::vector<double> T(static_cast<std::size_t>(s.d * (s.d + 1) / 2) * N);
    kern::sym_outer(s.d, N, s.B, s.P, -1.0, inv, T);
    std::vector<double> divT(static_cast<std::size_t>(s.d) * N);
    sp.div_sym(T, divT);

    FieldState out = s;
    kern::axpy(-dt, divA, out.B);
    kern::axpy(dt, divT, out.P);
    out.theta = s.theta + dt;
    require_finite(out, "step_eulerian_string");
    return out;
}

NonConsFields noncons_fields(const FieldState& s) {
    const std::size_t N = s.npts();
    const auto P = s.P.empty() ? compute_P(s) : s.P;
    std::vector<double> rho;
    const auto inv = floor_inverse(s, rho);
    NonConsFields f;
    f.b.resize(s.B.size());
    f.v.resize(s.B.size());
    f.mask.assign(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
        f.mask[i] = rho[i] > kMaskFactor * s.rho_floor;
        double b2 = 0;
        for (int a = 0; a < s.d; ++a) {
            f.b[a * N + i] = s.B[a * N + i] * inv[i];
            f.v[a * N + i] = P[a * N + i] * inv[i];
            b2 += f.b[a * N + i] * f.b[a * N + i];
        }
        if (f.mask[i]) {
            const double r = 1.0 / std::sqrt(b2);
            for (int a = 0; a < s.d; ++a) f.b[a * N + i] *= r;
        }
    }
    return f;
}

double effective_radius(const FieldState& s, std::span<const double> centre) {
    const std::size_t N = s.npts();
    const auto rho = density(s);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (!(rho[i] > kMaskFactor * s.rho_floor)) continue;
        double r2 = 0;
        for (int a = 0; a < s.d; ++a) {
            double dx = s.coord(i, a) - centre[a];
            dx -= std::round(dx);
            r2 += dx * dx;
        }
        num += rho[i] * std::sqrt(r2);
        den += rho[i];
    }
    return den > 0 ? num / den : 0.0;
}

ShortRun run_eulerian_short(FieldState s, const ShortRunOptions& opt) {
    const double dth = opt.dtheta > 0 ? opt.dtheta : admissible_dtheta_short(s);
    ShortRun run;
    auto keep = [&](FieldState f) {
        if (f.P.empty()) f.P = compute_P(f);
        run.worst_divergence = std::max(run.worst_divergence, max_divergence(f));
        run.frames.push_back(std::move(f));
    };
    run.theta.push_back(s.theta);
    run.mass.push_back(total_mass(s));
    if (opt.keep_first_and_last || opt.frame_every > 0) keep(s);
    for (long k = 1; k <= opt.steps; ++k) {
        s = step_eulerian_short(s, dth);
        const double m0 = run.mass.back(), m1 = total_mass(s);
        run.theta.push_back(s.theta);
        run.mass.push_back(m1);
        if (m0 > 0) run.worst_mass_increase = std::max(run.worst_mass_increase, (m1 - m0) / m0);
        const bool frame = opt.frame_every > 0 && k % opt.frame_every == 0;
        if (frame || (k == opt.steps && opt.keep_first_and_last)) keep(s);
    }
    return run;
}

StringRun run_eulerian_string(FieldState s, double dt, long steps, int frame_every) {
    StringRun run;
    const auto& sp = spectral::get(s.d, s.n);
    auto keep = [&](const FieldState& f) {
        run.worst_divergence = std::max(run.worst_divergence, sp.max_divergence(f.B));
        run.frames.push_back(f);
    };
    keep(s);
    for (long k = 1; k <= steps; ++k) {
        s = step_eulerian_string(s, dt);
        if (frame_every > 0 && k % frame_every == 0) keep(s);
    }
    if (frame_every <= 0 || steps % frame_every != 0) keep(s);
    return run;
}

namespace {

void check_uniform(std::span<const FieldState> frames) {
    if (frames.size() < 3) throw ArgumentError("residual diagnostics need at least 3 frames");
    const double dt = frames[1].theta - frames[0].theta;
    if (!(dt > 0)) throw ArgumentError("frames must advance in time");
    for (std::size_t j = 1; j < frames.size(); ++j) {
        const double step = frames[j].theta - frames[j - 1].theta;
        if (std::abs(step - dt) > 1e-9 * dt) throw ArgumentError("frames must be uniformly spaced");
        if (frames[j].n != frames[0].n || frames[j].d != frames[0].d) {
            throw ArgumentError("frames must share a grid");
        }
    }
}

ResidualNorms masked_norms(std::span<const double> r, std::span<const unsigned char> mask,
                           std::span<const double> weight, double vol) {
    ResidualNorms out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        out.max = std::max(out.max, std::abs(r[i]));
        out.l1 += std::abs(r[i]) * (weight.empty() ? 1.0 : weight[i]);
    }
    out.l1 *= vol;
    return out;
}

// Pointwise |field| of a d-component field at every grid point.
std::vector<double> vector_norm(std::span<const double> v, int d, std::size_t N) {
    std::vector<double> out(N);
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0;
        for (int a = 0; a < d; ++a) s += v[a * N + i] * v[a * N + i];
        out[i] = std::sqrt(s);
    }
    return out;
}

// (u.grad) w for d-component fields.
std::vector<double> advect(const spectral::Spectral& sp, std::span<const double> u,
                           std::span<const double> w, int d, std::size_t N) {
    std::vector<double> out(d * N, 0.0), grad(d * N);
    for (int c = 0; c < d; ++c) {
        sp.gradient(w.subspan(c * N, N), grad);
        for (int a = 0; a < d; ++a) {
            for (std::size_t i = 0; i < N; ++i) out[c * N + i] += u[a * N + i] * grad[a * N + i];
        }
    }
    return out;
}

}  // namespace

ResidualReport residual_diagnostics(std::span<const FieldState> frames) {
    check_uniform(frames);
    const int d = frames[0].d;
    const std::size_t N = frames[0].npts();
    const double vol = frames[0].cell_volume();
    const double dt = frames[1].theta - frames[0].theta;
    const auto& sp = spectral::get(d, frames[0].n);

    ResidualReport rep;
    for (std::size_t j = 1; j + 1 < frames.size(); ++j) {
        const auto& f = frames[j];
        const auto rho_m = density(frames[j - 1]);
        const auto rho_p = density(frames[j + 1]);
        const auto nc = noncons_fields(f);
        const auto ncm = noncons_fields(frames[j - 1]);
        const auto ncp = noncons_fields(frames[j + 1]);
        const auto P = f.P.empty() ? compute_P(f) : f.P;
        std::vector<double> rho;
        const auto inv = floor_inverse(f, rho);

        std::vector<double> divP(N), rhov(d * N), div_rhov(N), ra(N), rb(N);
        sp.divergence(P, divP);
        // The flux uses the floored density, so rho v is P wherever v is defined.
        for (int a = 0; a < d; ++a) {
            for (std::size_t i = 0; i < N; ++i) rhov[a * N + i] = nc.v[a * N + i] / inv[i];
        }
        sp.divergence(rhov, div_rhov);
        for (std::size_t i = 0; i < N; ++i) {
            double p2 = 0, v2 = 0;
            for (int a = 0; a < d; ++a) {
                p2 += P[a * N + i] * P[a * N + i];
                v2 += nc.v[a * N + i] * nc.v[a * N + i];
            }
            const double drho = (rho_p[i] - rho_m[i]) / (2 * dt);
            ra[i] = drho + p2 * inv[i] + divP[i];
            rb[i] = drho + div_rhov[i] + rho[i] * v2;
        }

        const auto vgb = advect(sp, nc.v, nc.b, d, N);
        const auto bgv = advect(sp, nc.b, nc.v, d, N);
        const auto bgb = advect(sp, nc.b, nc.b, d, N);
        std::vector<double> rc(d * N), rv(d * N);
        for (std::size_t i = 0; i < N; ++i) {
            double v2 = 0;
            for (int a = 0; a < d; ++a) v2 += nc.v[a * N + i] * nc.v[a * N + i];
            for (int a = 0; a < d; ++a) {
                const std::size_t q = a * N + i;
                const double db = (ncp.b[q] - ncm.b[q]) / (2 * dt);
                rc[q] = db + vgb[q] - bgv[q] - nc.b[q] * v2;
                rv[q] = nc.v[q] - bgb[q];
            }
        }
        rep.theta.push_back(f.theta);
        rep.mass_balance.push_back(masked_norms(ra, nc.mask, {}, vol));
        rep.mass_balance_v.push_back(masked_norms(rb, nc.mask, {}, vol));
        rep.transport.push_back(masked_norms(vector_norm(rc, d, N), nc.mask, rho, vol));
        rep.velocity.push_back(masked_norms(vector_norm(rv, d, N), nc.mask, rho, vol));
    }
    return rep;
}

std::vector<ResidualNorms> string_entropy_residual(std::span<const FieldState> frames) {
    check_uniform(frames);
    const int d = frames[0].d;
    const std::size_t N = frames[0].npts();
    const double vol = frames[0].cell_volume();
    const double dt = frames[1].theta - frames[0].theta;
    const auto& sp = spectral::get(d, frames[0].n);
    const std::vector<unsigned char> all(N, 1);

    auto rho_of = [&](const FieldState& f) {
        std::vector<double> rho;
        floor_inverse(f, rho, f.P);
        return rho;
    };
    std::vector<ResidualNorms> out;
    for (std::size_t j = 1; j + 1 < frames.size(); ++j) {
        const auto& f = frames[j];
        const auto rm = rho_of(frames[j - 1]), rp = rho_of(frames[j + 1]);
        std::vector<double> rho;
        const auto inv = floor_inverse(f, rho, f.P);
        std::vector<double> flux(d * N), divF(N), divP(N), r(N);
        for (std::size_t i = 0; i < N; ++i) {
            double pb = 0;
            for (int a = 0; a < d; ++a) pb += f.P[a * N + i] * f.B[a * N + i];
            for (int a = 0; a < d; ++a) flux[a * N + i] = pb * f.B[a * N + i] * inv[i] * inv[i];
        }
        sp.divergence(flux, divF);
        sp.divergence(f.P, divP);
        for (std::size_t i = 0; i < N; ++i) r[i] = (rp[i] - rm[i]) / (2 * dt) + divP[i] - divF[i];
        out.push_back(masked_norms(r, all, {}, vol));
    }
    return out;
}

std::vector<double> TestField::sample(int d, int n) const {
    FieldState probe;
    probe.d = d;
    probe.n = n;
    const std::size_t N = probe.npts();
    std::vector<double> out(d * N);
    for (std::size_t i = 0; i < N; ++i) {
        double phase = 0;
        for (int ax = 0; ax < d; ++ax) phase += m[ax] * probe.coord(i, ax);
        const double s = cosine ? std::cos(kTwoPi * phase) : std::sin(kTwoPi * phase);
        for (int c = 0; c < d; ++c) out[c * N + i] = a[c] * s;
    }
    return out;
}

double TestField::lipschitz() const {
    double mm = 0, aa = 0;
    for (int x : m) mm += x * x;
    for (double x : a) aa += x * x;
    return kTwoPi * std::sqrt(mm) * std::sqrt(aa);
}

std::string TestField::name() const {
    std::ostringstream os;
    os << (cosine ? "cos" : "sin") << "(m=";
    for (std::size_t i = 0; i < m.size(); ++i) os << (i ? "," : "") << m[i];
    os << ";a=";
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    os << ")";
    return os.str();
}

std::vector<TestField> default_test_fields(int d) {
    std::vector<TestField> out;
    const std::vector<std::vector<int>> modes2 = {{1, 0}, {0, 1}, {1, 1}, {2, 1}};
    const std::vector<std::vector<int>> modes3 = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 2}};
    for (const auto& m : d == 2 ? modes2 : modes3) {
        for (int c = 0; c < d; ++c) {
            std::vector<double> a(d, 0.0);
            a[c] = 1.0;
            for (bool cosine : {false, true}) out.push_back({a, m, cosine});
        }
    }
    return out;
}

AprioriReport apriori_bounds_check(std::span<const FieldState> frames, double T,
                                   double rel_tolerance, std::span<const TestField> fields) {
    if (frames.size() < 2) throw ArgumentError("a priori check needs at least 2 frames");
    const int d = frames[0].d, n = frames[0].n;
    const std::size_t N = frames[0].npts();
    const double vol = frames[0].cell_volume();
    std::vector<TestField> defaults;
    if (fields.empty()) {
        defaults = default_test_fields(d);
        fields = defaults;
    }

    AprioriReport rep;
    rep.mass0 = total_mass(frames[0]);
    rep.tolerance = rel_tolerance * rep.mass0;

    std::vector<double> theta, mass, diss, pmass;
    for (const auto& f : frames) {
        const auto P = f.P.empty() ? compute_P(f) : f.P;
        std::vector<double> rho;
        const auto inv = floor_inverse(f, rho);
        double ds = 0, pm = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double p2 = 0;
            for (int a = 0; a < d; ++a) p2 += P[a * N + i] * P[a * N + i];
            ds += p2 * inv[i];
            pm += std::sqrt(p2);
        }
        theta.push_back(f.theta);
        mass.push_back(sum_times(rho, vol));
        diss.push_back(ds * vol);
        pmass.push_back(pm * vol);
    }

    rep.mass = {"mass", *std::max_element(mass.begin(), mass.end()), rep.mass0 + rep.tolerance};
    rep.dissipation = {"dissipation", trapezoid(theta, diss), rep.mass0 + rep.tolerance};
    const double sqrtT = std::sqrt(T);
    rep.momentum = {"momentum", trapezoid(theta, pmass), sqrtT * rep.mass0 + rep.tolerance};
    rep.momentum_saturation = rep.momentum.lhs / (sqrtT * rep.mass0);

    double worst = -INFINITY;
    for (const auto& tf : fields) {
        const auto phi = tf.sample(d, n);
        std::vector<double> c(frames.size());
        for (std::size_t j = 0; j < frames.size(); ++j) {
            double s = 0;
            for (std::size_t q = 0; q < phi.size(); ++q) s += frames[j].B[q] * phi[q];
            c[j] = s * vol;
        }
        const double lip = tf.lipschitz();
        for (std::size_t i = 0; i < frames.size(); ++i) {
            for (std::size_t j = i + 1; j < frames.size(); ++j) {
                const double bound = lip * std::sqrt(theta[j] - theta[i]) * rep.mass0;
                worst = std::max(worst, std::abs(c[j] - c[i]) - bound);
            }
        }
    }
    rep.holder = {"holder", worst, rep.tolerance};
    for (BoundCheck* b : {&rep.mass, &rep.dissipation, &rep.momentum, &rep.holder}) {
        b->pass = b->lhs <= b->rhs;
    }
    return rep;
}

}  // namespace qtime::eulerian
