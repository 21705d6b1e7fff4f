#include "qtime/certifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "qtime/errors.hpp"
#include "qtime/numerics.hpp"
#include "qtime/spectral.hpp"

namespace qtime::cert {

namespace {

std::size_t grid_points(int d, int n) {
    std::size_t N = 1;
    for (int a = 0; a < d; ++a) N *= static_cast<std::size_t>(n);
    return N;
}

// g[(a*d + j)*N + x] = d_j f_a
std::vector<double> jacobian(const spectral::Spectral& sp, std::span<const double> f) {
    const int d = sp.d();
    const std::size_t N = sp.npts();
    std::vector<double> g(static_cast<std::size_t>(d * d) * N);
    for (int a = 0; a < d; ++a) {
        sp.gradient(f.subspan(a * N, N), std::span(g).subspan(a * d * N, d * N));
    }
    return g;
}

double sym_op_norm(int d, const double* s) {
    // s: row-major d x d symmetric
    if (d == 2) {
        const double m = 0.5 * (s[0] + s[3]);
        const double r = std::hypot(0.5 * (s[0] - s[3]), s[1]);
        return std::max(std::abs(m + r), std::abs(m - r));
    }
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = s[i * 3 + j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Frames with P present, checked for a common grid and increasing theta.
std::vector<const FieldState*> prepared(std::span<const FieldState> frames,
                                        std::vector<FieldState>& storage) {
    if (frames.size() < 2) throw ArgumentError("certification needs at least 2 frames");
    const int d = frames[0].d, n = frames[0].n;
    storage.clear();
    storage.reserve(frames.size());
    std::vector<const FieldState*> out;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto& f = frames[k];
        if (f.d != d || f.n != n) throw ArgumentError("frames are on different grids");
        if (k > 0 && !(f.theta > frames[k - 1].theta)) {
            throw ArgumentError("frames must be strictly increasing in theta");
        }
        if (f.P.empty()) {
            storage.push_back(f);
            storage.back().P = eulerian::compute_P(f);
        }
    }
    std::size_t used = 0;
    for (const auto& f : frames) out.push_back(f.P.empty() ? &storage[used++] : &f);
    return out;
}

std::vector<double> thetas_of(std::span<const FieldState> frames) {
    std::vector<double> t;
    for (const auto& f : frames) t.push_back(f.theta);
    return t;
}

// Discounted trapezoid of g over times t, cumulative.
std::vector<double> discounted_cumulative(std::span<const double> t, std::span<const double> g,
                                          double r, std::size_t stride = 1) {
    std::vector<double> out(t.size(), 0.0);
    double acc = 0;
    for (std::size_t k = stride; k < t.size(); k += stride) {
        const double t0 = t[k - stride] - t[0], t1 = t[k] - t[0];
        acc += 0.5 * (t1 - t0) * (std::exp(-r * t0) * g[k - stride] + std::exp(-r * t1) * g[k]);
        out[k] = acc;
    }
    return out;
}

}  // namespace

std::vector<double> eta_defect(int d, std::span<const double> B, std::span<const double> bstar) {
    const std::size_t N = B.size() / d;
    if (bstar.size() != B.size()) throw ArgumentError("eta_defect: size mismatch");
    std::vector<double> eta(N);
    for (std::size_t x = 0; x < N; ++x) {
        double n2 = 0, dot = 0;
        for (int a = 0; a < d; ++a) {
            n2 += B[a * N + x] * B[a * N + x];
            dot += B[a * N + x] * bstar[a * N + x];
        }
        eta[x] = std::max(std::sqrt(n2) - dot, 0.0);
    }
    return eta;
}

void validate_sample(const TrialSample& s, int d, std::size_t N, double lambda) {
    const std::size_t sz = static_cast<std::size_t>(d) * N;
    if (s.b.size() != sz || s.v.size() != sz || s.A.size() != sz) {
        throw InvalidTrial("trial sample has the wrong size");
    }
    if (!(lambda > 0)) throw InvalidTrial("trial lambda must be positive");
    for (std::size_t x = 0; x < N; ++x) {
        double b2 = 0, a2 = 0;
        for (int a = 0; a < d; ++a) {
            b2 += s.b[a * N + x] * s.b[a * N + x];
            a2 += s.A[a * N + x] * s.A[a * N + x];
        }
        if (!(std::abs(std::sqrt(b2) - 1.0) <= kUnitTolerance)) {
            throw InvalidTrial("trial b* is not a unit field");
        }
        if (!(std::sqrt(a2) <= lambda * (1 + 1e-12))) throw InvalidTrial("trial |A| exceeds lambda");
    }
    if (!all_finite(s.v)) throw InvalidTrial("trial v* is not finite");
}

TrialSample sample_with_dtheta(const TrialTriple& trial, int d, int n, double theta) {
    if (!trial.sample) throw InvalidTrial("trial '" + trial.id + "' has no sampler");
    TrialSample s = trial.sample(d, n, theta);
    const std::size_t N = grid_points(d, n);
    validate_sample(s, d, N, trial.lambda);
    if (s.dtheta_b.empty()) {
        if (trial.time_independent) {
            s.dtheta_b.assign(s.b.size(), 0.0);
        } else {
            const auto plus = trial.sample(d, n, theta + kDthetaStep);
            const auto minus = trial.sample(d, n, theta - kDthetaStep);
            s.dtheta_b.resize(s.b.size());
            for (std::size_t i = 0; i < s.b.size(); ++i) {
                s.dtheta_b[i] = (plus.b[i] - minus.b[i]) / (2 * kDthetaStep);
            }
        }
    }
    return s;
}

Coefficients trial_coefficients(const TrialSample& s, int d, int n) {
    const auto& sp = spectral::get(d, n);
    const std::size_t N = sp.npts();
    if (s.dtheta_b.size() != s.b.size()) throw ArgumentError("trial sample lacks dtheta b");
    const auto gb = jacobian(sp, s.b);
    const auto gv = jacobian(sp, s.v);
    std::vector<double> bv(N), gbv(d * N);
    for (std::size_t x = 0; x < N; ++x) {
        double t = 0;
        for (int a = 0; a < d; ++a) t += s.b[a * N + x] * s.v[a * N + x];
        bv[x] = t;
    }
    sp.gradient(bv, gbv);

    Coefficients c;
    c.L1.resize(N);
    c.L2.resize(d * N);
    c.L3.resize(d * N);
    for (std::size_t x = 0; x < N; ++x) {
        double v2 = 0, b_grad_bv = 0;
        for (int j = 0; j < d; ++j) {
            v2 += s.v[j * N + x] * s.v[j * N + x];
            b_grad_bv += s.b[j * N + x] * gbv[j * N + x];
        }
        c.L1[x] = v2 - b_grad_bv;
        for (int a = 0; a < d; ++a) {
            double v_grad_b = 0, b_grad_v = 0, b_grad_b = 0;
            for (int j = 0; j < d; ++j) {
                v_grad_b += s.v[j * N + x] * gb[(a * d + j) * N + x];
                b_grad_v += s.b[j * N + x] * gv[(a * d + j) * N + x];
                b_grad_b += s.b[j * N + x] * gb[(a * d + j) * N + x];
            }
            const double ba = s.b[a * N + x];
            c.L2[a * N + x] = -s.dtheta_b[a * N + x] - v_grad_b + b_grad_v + ba * v2 - ba * b_grad_bv;
            c.L3[a * N + x] = -s.v[a * N + x] + b_grad_b;
        }
    }
    return c;
}

Coefficients trial_coefficients(const TrialTriple& trial, int d, int n, double theta) {
    return trial_coefficients(sample_with_dtheta(trial, d, n, theta), d, n);
}

double cstar_at(const TrialSample& s, const Coefficients& c, int d, int n) {
    const auto& sp = spectral::get(d, n);
    const std::size_t N = sp.npts();
    const auto gb = jacobian(sp, s.b);
    const auto gv = jacobian(sp, s.v);
    double sym = 0, anti = 0;
    double m[9];
    for (std::size_t x = 0; x < N; ++x) {
        double w2 = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                m[i * d + j] = gv[(i * d + j) * N + x] + gv[(j * d + i) * N + x];
                if (i < j) {
                    const double w = gb[(i * d + j) * N + x] - gb[(j * d + i) * N + x];
                    w2 += w * w;
                }
            }
        }
        sym = std::max(sym, sym_op_norm(d, m));
        anti = std::max(anti, w2);  // |W|_op^2 for d <= 3
    }
    return sym + anti + max_abs(c.L1);
}

double compute_cstar(const TrialTriple& trial, int d, int n, std::span<const double> thetas) {
    if (thetas.empty()) throw ArgumentError("compute_cstar needs at least one time");
    double cs = 0;
    for (double t : thetas) {
        const auto s = sample_with_dtheta(trial, d, n, t);
        cs = std::max(cs, cstar_at(s, trial_coefficients(s, d, n), d, n));
        if (trial.time_independent) break;
    }
    return cs;
}

double k_lambda_norm(double rho, double z, double lambda) {
    if (!(rho > 0)) throw DomainError("k_lambda needs rho > 0");
    const double excess = std::max(z - lambda * rho, 0.0);
    return (z * z - excess * excess) / (2 * rho);
}

double k_lambda(double rho, std::span<const double> Z, double lambda) {
    double z2 = 0;
    for (double z : Z) z2 += z * z;
    return k_lambda_norm(rho, std::sqrt(z2), lambda);
}

double CertParams::threshold() const { return cstar + 0.5 * lambda * lambda + lambda * vmax; }

CertParams CertParams::make(double cstar, double lambda, double vmax, double r) {
    if (!(cstar >= 0)) throw InvalidParams("c* must be nonnegative");
    if (!(lambda > 0)) throw InvalidParams("lambda must be positive");
    if (!(vmax >= 0)) throw InvalidParams("|v*| bound must be nonnegative");
    CertParams p{0.0, cstar, lambda, vmax};
    const double thr = p.threshold();
    if (r <= 0) {
        p.r = thr;
    } else if (r < thr * (1 - 1e-14)) {
        throw InvalidParams("r = " + std::to_string(r) + " is below c* + lambda^2/2 + lambda |v*| = " +
                            std::to_string(thr));
    } else {
        p.r = r;
    }
    return p;
}

TrialReport certify_trial(std::span<const FieldState> frames_in, const TrialTriple& trial,
                          double r_extra, double r_fixed) {
    std::vector<FieldState> storage;
    const auto frames = prepared(frames_in, storage);
    const int d = frames[0]->d, n = frames[0]->n;
    const std::size_t N = frames[0]->npts();
    const double w = frames[0]->cell_volume();
    const auto theta = thetas_of(frames_in);
    const std::size_t K = frames.size();

    std::vector<TrialSample> samples;
    std::vector<Coefficients> coefs;
    double cstar = 0, vmax = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (trial.time_independent && k > 0) break;
        samples.push_back(sample_with_dtheta(trial, d, n, theta[k]));
        coefs.push_back(trial_coefficients(samples.back(), d, n));
        cstar = std::max(cstar, cstar_at(samples.back(), coefs.back(), d, n));
        const auto& v = samples.back().v;
        for (std::size_t x = 0; x < N; ++x) {
            double v2 = 0;
            for (int a = 0; a < d; ++a) v2 += v[a * N + x] * v[a * N + x];
            vmax = std::max(vmax, std::sqrt(v2));
        }
    }
    TrialReport rep;
    rep.id = trial.id;
    rep.params = CertParams::make(cstar, trial.lambda, vmax,
                                  r_fixed > 0 ? r_fixed : 0.0);
    if (r_fixed <= 0) rep.params.r += r_extra;
    const double r = rep.params.r;

    std::vector<double> G(K), G3(K);
    rep.eta.resize(K);
    rep.dissipation.resize(K);
    std::vector<double> Z(d);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& s = samples[trial.time_independent ? 0 : k];
        const auto& c = coefs[trial.time_independent ? 0 : k];
        const auto& B = frames[k]->B;
        const auto& P = frames[k]->P;
        const double delta = frames[k]->rho_floor;
        double ieta = 0, g = 0, kl = 0, rem = 0;
        for (std::size_t x = 0; x < N; ++x) {
            double rho2 = 0, bb = 0, q = 0, pa = 0, bl2 = 0, pl3 = 0;
            for (int a = 0; a < d; ++a) {
                const std::size_t i = a * N + x;
                rho2 += B[i] * B[i];
                bb += B[i] * s.b[i];
                q += s.A[i] * (s.A[i] + 2 * s.v[i]);
                pa += P[i] * (s.A[i] - c.L3[i]);
                bl2 += B[i] * c.L2[i];
                pl3 += P[i] * c.L3[i];
            }
            q *= 0.5;
            const double rho = std::sqrt(rho2);
            const double eta = std::max(rho - bb, 0.0);
            ieta += eta;
            g += pa + (r - cstar - q) * eta - bl2 - bb * q;
            for (int a = 0; a < d; ++a) Z[a] = P[a * N + x] - rho * s.v[a * N + x];
            kl += k_lambda(std::max(rho, delta), Z, trial.lambda);
            rem += bl2 + pl3;
        }
        rep.eta[k] = ieta * w;
        rep.dissipation[k] = kl * w;
        G[k] = g * w;
        G3[k] = rep.dissipation[k] + (r - cstar) * rep.eta[k] - rem * w;
    }

    const auto acc = discounted_cumulative(theta, G, r);
    const auto acc3 = discounted_cumulative(theta, G3, r);
    rep.margin.resize(K);
    rep.margin_klambda.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double disc = std::exp(-r * (theta[k] - theta[0])) * rep.eta[k] - rep.eta[0];
        rep.margin[k] = disc + acc[k];
        rep.margin_klambda[k] = disc + acc3[k];
    }
    rep.max_margin = *std::max_element(rep.margin.begin(), rep.margin.end());
    if (K >= 3) {
        const auto coarse = discounted_cumulative(theta, G, r, 2);
        double e = 0;
        for (std::size_t k = 2; k < K; k += 2) e = std::max(e, std::abs(acc[k] - coarse[k]) / 3.0);
        rep.quadrature_error = e;
    }
    return rep;
}

CertificateReport certify(std::span<const FieldState> frames, std::span<const TrialTriple> trials,
                          const CertifyOptions& opt) {
    if (trials.empty()) throw ArgumentError("certify needs at least one trial");
    if (!(opt.tolerance >= 0)) throw InvalidParams("certification tolerance must be nonnegative");
    std::vector<FieldState> storage;
    const auto ptrs = prepared(frames, storage);
    std::vector<FieldState> ready;
    ready.reserve(ptrs.size());
    for (const auto* p : ptrs) ready.push_back(*p);

    CertificateReport rep;
    rep.theta = thetas_of(frames);
    rep.tolerance = opt.tolerance;
    rep.trials.resize(trials.size());
    std::vector<std::exception_ptr> errors(trials.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(trials.size()); ++i) {
        try {
            rep.trials[i] = certify_trial(ready, trials[i], opt.r_extra, opt.r_fixed);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    rep.max_margin = -std::numeric_limits<double>::infinity();
    for (const auto& t : rep.trials) {
        if (t.max_margin > rep.max_margin) {
            rep.max_margin = t.max_margin;
            rep.worst_trial = t.id;
        }
    }
    rep.pass = rep.max_margin <= opt.tolerance;
    return rep;
}

std::vector<FieldState> mixture(std::span<const FieldState> a, std::span<const FieldState> b,
                                double t) {
    if (!(t >= 0 && t <= 1)) throw ArgumentError("mixture weight must lie in [0, 1]");
    if (a.size() != b.size() || a.empty()) throw ArgumentError("mixture: frame counts differ");
    std::vector<FieldState> sa, sb;
    const auto pa = prepared(a, sa);
    const auto pb = prepared(b, sb);
    const double scale = std::max(max_abs(a[0].B), 1e-300);
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].d != b[k].d || a[k].n != b[k].n) throw ArgumentError("mixture: grids differ");
        if (std::abs(a[k].theta - b[k].theta) > 1e-12 * (1 + std::abs(a[k].theta))) {
            throw ArgumentError("mixture: frame times differ");
        }
    }
    for (std::size_t i = 0; i < a[0].B.size(); ++i) {
        if (std::abs(a[0].B[i] - b[0].B[i]) > 1e-12 * scale) {
            throw ArgumentError("mixture: initial fields differ");
        }
    }
    std::vector<FieldState> out;
    for (std::size_t k = 0; k < a.size(); ++k) {
        FieldState m = *pa[k];
        for (std::size_t i = 0; i < m.B.size(); ++i) {
            m.B[i] = t * pa[k]->B[i] + (1 - t) * pb[k]->B[i];
            m.P[i] = t * pa[k]->P[i] + (1 - t) * pb[k]->P[i];
        }
        m.rho_floor = t * pa[k]->rho_floor + (1 - t) * pb[k]->rho_floor;
        out.push_back(std::move(m));
    }
    return out;
}

CertificateReport convexity_check(std::span<const FieldState> a, std::span<const FieldState> b,
                                  double t, std::span<const TrialTriple> trials,
                                  const CertifyOptions& opt) {
    const auto mix = mixture(a, b, t);
    return certify(mix, trials, opt);
}

JensenCheck jensen_check(std::span<const FieldState> frames_in, const TrialTriple& trial, double r) {
    std::vector<FieldState> storage;
    const auto frames = prepared(frames_in, storage);
    const int d = frames[0]->d, n = frames[0]->n;
    const std::size_t N = frames[0]->npts();
    const double w = frames[0]->cell_volume();
    const auto theta = thetas_of(frames_in);
    std::vector<double> dens(frames.size()), mean(frames.size());
    std::vector<double> Z(d);
    TrialSample s;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (k == 0 || !trial.time_independent) s = sample_with_dtheta(trial, d, n, theta[k]);
        const auto& B = frames[k]->B;
        const auto& P = frames[k]->P;
        double kl = 0, mass = 0, zabs = 0;
        for (std::size_t x = 0; x < N; ++x) {
            double rho2 = 0;
            for (int a = 0; a < d; ++a) rho2 += B[a * N + x] * B[a * N + x];
            const double rho = std::sqrt(rho2);
            double z2 = 0;
            for (int a = 0; a < d; ++a) {
                Z[a] = P[a * N + x] - rho * s.v[a * N + x];
                z2 += Z[a] * Z[a];
            }
            kl += k_lambda(std::max(rho, frames[k]->rho_floor), Z, trial.lambda);
            mass += rho;
            zabs += std::sqrt(z2);
        }
        dens[k] = kl * w;
        mean[k] = k_lambda_norm(std::max(mass * w, 1e-300), zabs * w, trial.lambda);
    }
    JensenCheck j;
    j.lhs = discounted_cumulative(theta, dens, r).back();
    j.rhs = std::exp(-r * (theta.back() - theta.front())) * trapezoid(theta, mean);
    return j;
}

double WeakStrongReport::max_eta() const { return eta.empty() ? 0.0 : max_abs(eta); }

double WeakStrongReport::max_momentum_defect() const {
    return momentum_defect.empty() ? 0.0 : max_abs(momentum_defect);
}

double WeakStrongReport::gronwall_ratio() const {
    if (eta.empty() || !(eta[0] > 0)) return 0.0;
    double worst = 0;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        worst = std::max(worst, eta[k] / (eta[0] * std::exp(cstar * (theta[k] - theta[0]))));
    }
    return worst;
}

WeakStrongReport weak_strong_experiment(const TrialTriple& smooth, const FieldState& B0,
                                        const WeakStrongOptions& opt) {
    if (!(opt.T > 0)) throw ArgumentError("weak_strong_experiment: T must be positive");
    if (opt.frames < 2) throw ArgumentError("weak_strong_experiment needs at least 2 frames");
    const double dth = opt.dtheta > 0 ? opt.dtheta : eulerian::admissible_dtheta_short(B0);
    const long per_frame = std::max(1L, static_cast<long>(std::ceil(opt.T / (opt.frames - 1) / dth)));
    const double step = opt.T / ((opt.frames - 1) * per_frame);

    const int d = B0.d, n = B0.n;
    const std::size_t N = B0.npts();
    std::vector<double> weight(N, 1.0);
    if (opt.weight) {
        std::vector<double> x(d);
        for (std::size_t i = 0; i < N; ++i) {
            for (int a = 0; a < d; ++a) x[a] = B0.coord(i, a);
            weight[i] = opt.weight(x);
        }
    }

    WeakStrongReport rep;
    rep.mass0 = eulerian::total_mass(B0);
    FieldState s = B0;
    s.P.clear();
    std::vector<double> thetas;
    for (int f = 0; f < opt.frames; ++f) thetas.push_back(B0.theta + f * per_frame * step);
    rep.cstar = compute_cstar(smooth, d, n, thetas);

    const double w = B0.cell_volume();
    for (int f = 0; f < opt.frames; ++f) {
        if (f > 0) {
            for (long k = 0; k < per_frame; ++k) s = eulerian::step_eulerian_short(s, step);
        }
        const auto sample = smooth.sample(d, n, s.theta);
        validate_sample(TrialSample{sample.b, sample.v, std::vector<double>(d * N, 0.0), {}}, d, N,
                        smooth.lambda);
        const auto P = eulerian::compute_P(s);
        const auto eta = eta_defect(d, s.B, sample.b);
        double ie = 0, im = 0;
        for (std::size_t x = 0; x < N; ++x) {
            double rho2 = 0;
            for (int a = 0; a < d; ++a) rho2 += s.B[a * N + x] * s.B[a * N + x];
            const double rho = std::sqrt(rho2);
            double z2 = 0;
            for (int a = 0; a < d; ++a) {
                const double z = P[a * N + x] - rho * sample.v[a * N + x];
                z2 += z * z;
            }
            ie += weight[x] * eta[x];
            im += weight[x] * std::sqrt(z2);
        }
        rep.theta.push_back(s.theta);
        rep.eta.push_back(ie * w);
        rep.momentum_defect.push_back(im * w);
    }
    return rep;
}

}  // namespace qtime::cert
