#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qtime/certifier.hpp"
#include "qtime/curve_flow.hpp"
#include "qtime/errors.hpp"
#include "qtime/eulerian.hpp"
#include "qtime/trials.hpp"

using namespace qtime;
using namespace qtime::cert;
using std::numbers::pi;

namespace {

const std::vector<double> kCentre{0.5, 0.5};

std::vector<FieldState> circle_frames(int n, int frames, double dtheta_scale = 1.0) {
    auto s = eulerian::lift_curve(curve::make_circle(512, 0.25, kCentre), n);
    const double T = 0.3 * 0.25 * 0.25;
    const double dth = dtheta_scale * eulerian::admissible_dtheta_short(s);
    const long per = static_cast<long>(std::ceil(T / (frames - 1) / dth));
    eulerian::ShortRunOptions opt;
    opt.dtheta = T / ((frames - 1) * per);
    opt.steps = per * (frames - 1);
    opt.frame_every = static_cast<int>(per);
    return eulerian::run_eulerian_short(s, opt).frames;
}

std::vector<FieldState> constant_frames(int n, int frames, double T) {
    auto s = eulerian::sample_field(2, n, [](std::span<const double>, std::span<double> B) {
        B[0] = 0.6;
        B[1] = -0.8;
    });
    s.P.assign(s.B.size(), 0.0);
    std::vector<FieldState> out;
    for (int k = 0; k < frames; ++k) {
        out.push_back(s);
        out.back().theta = T * k / (frames - 1);
    }
    return out;
}

PointField constant(std::vector<double> c) {
    return [c](double, std::span<const double>, std::span<double> out) {
        for (std::size_t a = 0; a < c.size(); ++a) out[a] = c[a];
    };
}

// Brute-force sup of Z.A - rho A^2/2 over |A| <= lambda in the plane: scan
// directions, maximize the concave quadratic along each ray exactly.
double k_lambda_scan(double rho, const std::vector<double>& Z, double lambda, int directions) {
    double best = 0;
    for (int j = 0; j < directions; ++j) {
        const double phi = 2 * pi * j / directions;
        const double zu = Z[0] * std::cos(phi) + Z[1] * std::sin(phi);
        const double s = std::clamp(zu / rho, 0.0, lambda);
        best = std::max(best, zu * s - rho * s * s / 2);
    }
    return best;
}

}  // namespace

TEST_CASE("eta defect examples") {
    const int d = 2;
    const std::vector<double> bstar{0.6, 0.8};
    const double rho = 2.5;
    auto eta = [&](std::vector<double> B) { return eta_defect(d, B, bstar)[0]; };
    CHECK(eta({rho * 0.6, rho * 0.8}) == doctest::Approx(0.0).scale(1.0));
    CHECK(eta({-rho * 0.6, -rho * 0.8}) == doctest::Approx(2 * rho));
    CHECK(eta({-rho * 0.8, rho * 0.6}) == doctest::Approx(rho));
    const double a = 0.7;
    const double c = std::cos(a), s = std::sin(a);
    CHECK(eta({rho * (0.6 * c - 0.8 * s), rho * (0.8 * c + 0.6 * s)}) == doctest::Approx(rho * (1 - std::cos(a))));
}

TEST_CASE("eta is nonnegative and vanishes exactly on aligned fields") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> b{g(rng), g(rng), g(rng)};
        const double nb = std::hypot(b[0], b[1], b[2]);
        for (double& x : b) x /= nb;
        std::vector<double> B{g(rng), g(rng), g(rng)};
        CHECK(eta_defect(3, B, b)[0] >= 0.0);
        const double c = std::abs(g(rng));
        const std::vector<double> aligned{c * b[0], c * b[1], c * b[2]};
        CHECK(eta_defect(3, aligned, b)[0] <= 1e-14 * (1 + c));
    }
}

TEST_CASE("trial coefficients: constant b and zero v vanish") {
    const std::vector<double> dir{1.0, 1.0};
    for (const auto& t : {constant_trial(dir), constant_solution(2, 1)}) {
        const auto c = trial_coefficients(t, 2, 16, 0.0);
        for (double x : c.L1) CHECK(std::abs(x) <= 1e-14);
        for (double x : c.L2) CHECK(std::abs(x) <= 1e-14);
        for (double x : c.L3) CHECK(std::abs(x) <= 1e-14);
    }
}

TEST_CASE("trial coefficients: golden values for b = e1, v = f(x1) e2") {
    // f = 0.5 sin(2 pi x1): L1 = f^2, L2 = f' e2 + f^2 e1, L3 = -f e2.
    const int n = 32;
    const std::vector<double> e1{1.0, 0.0};
    const FourierMode v{{1, 0}, 1, 0.5, false};
    const auto t = fourier_trial(e1, &v, nullptr, 1.0);
    const auto c = trial_coefficients(t, 2, n, 0.0);
    const std::size_t N = n * n;
    for (std::size_t i = 0; i < N; ++i) {
        const double x1 = static_cast<double>(i / n) / n;
        const double f = 0.5 * std::sin(2 * pi * x1), fp = pi * std::cos(2 * pi * x1);
        // Component-major grid with x1 the slow index.
        CHECK(c.L1[i] == doctest::Approx(f * f).scale(1.0).epsilon(1e-12));
        CHECK(c.L2[i] == doctest::Approx(f * f).scale(1.0).epsilon(1e-12));
        CHECK(c.L2[N + i] == doctest::Approx(fp).scale(1.0).epsilon(1e-12));
        CHECK(c.L3[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(c.L3[N + i] == doctest::Approx(-f).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("c* examples") {
    const std::vector<double> thetas{0.0};
    CHECK(compute_cstar(constant_trial(std::vector<double>{0.0, 1.0}), 2, 16, thetas) == doctest::Approx(0.0).scale(1.0));
    const auto moving = analytic_trial("constant v", 1.0, constant({1.0, 0.0}), constant({0.3, 0.4}), {}, {}, true);
    CHECK(compute_cstar(moving, 2, 16, thetas) == doctest::Approx(0.25).epsilon(1e-12));
    // b = e1, v = sin(2 pi x1) e2: grad v + grad v^T has eigenvalues
    // +-2 pi cos(2 pi x1), the antisymmetric part of grad b is zero and
    // |L1| = sin^2 <= 1.
    const std::vector<double> e1{1.0, 0.0};
    const FourierMode v{{1, 0}, 1, 1.0, false};
    CHECK(compute_cstar(fourier_trial(e1, &v, nullptr, 1.0), 2, 32, thetas) ==
          doctest::Approx(2 * pi + 1).epsilon(1e-12));
}

TEST_CASE("c* of a rotating unit field counts the antisymmetric gradient") {
    // b = (cos 2 pi x2, sin 2 pi x2): d2 b = 2 pi (-sin, cos), so
    // grad b - grad b^T has off-diagonal entry -2 pi sin and norm up to 2 pi.
    PointField b = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = std::cos(2 * pi * x[1]);
        out[1] = std::sin(2 * pi * x[1]);
    };
    const auto t = analytic_trial("rotating", 1.0, b, constant({0.0, 0.0}), {}, {}, true);
    const std::vector<double> thetas{0.0};
    // L1 = -b.grad(b.v) = 0 with v = 0.
    CHECK(compute_cstar(t, 2, 32, thetas) == doctest::Approx(4 * pi * pi).epsilon(1e-12));
}

TEST_CASE("K_lambda examples and bounds") {
    const std::vector<double> zero{0.0, 0.0}, small{0.3, 0.4}, big{2.0, 0.0};
    CHECK(k_lambda(1.0, zero, 1.0) == 0.0);
    CHECK(k_lambda(2.0, small, 1.0) == doctest::Approx(0.25 / 4));
    CHECK(k_lambda(1.0, big, 1.0) == doctest::Approx(1.5));
    CHECK(std::min(2.0, 1.0) <= k_lambda(1.0, big, 1.0));
    CHECK_THROWS_AS(k_lambda_norm(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(k_lambda(-1.0, big, 1.0), DomainError);

    // 10^5 sampled A on a polar grid of the unit disc, boundary included.
    double best = 0;
    for (int j = 0; j < 500; ++j) {
        for (int i = 1; i <= 200; ++i) {
            const double phi = 2 * pi * j / 500, rad = i / 200.0;
            const double a0 = rad * std::cos(phi), a1 = rad * std::sin(phi);
            best = std::max(best, 2.0 * a0 - 0.5 * (a0 * a0 + a1 * a1));
        }
    }
    CHECK(best == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("K_lambda agrees with a brute-force supremum on random data") {
    std::mt19937_64 rng(29);
    std::lognormal_distribution<double> pos(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double rho = pos(rng), lambda = pos(rng);
        const std::vector<double> Z{g(rng), g(rng)};
        const double k = k_lambda(rho, Z, lambda);
        const double brute = k_lambda_scan(rho, Z, lambda, 4096);
        CHECK(std::abs(k - brute) <= 1e-4 * std::max(k, 1e-300));
        const double z = std::hypot(Z[0], Z[1]);
        CHECK(std::min(z * z / (2 * rho), lambda * z / 2) <= k * (1 + 1e-14));
    }
}

TEST_CASE("discount rate threshold") {
    const auto p = CertParams::make(0.5, 2.0, 0.25);
    CHECK(p.r == doctest::Approx(0.5 + 2.0 + 0.5));
    CHECK(CertParams::make(0.5, 2.0, 0.25, 10.0).r == 10.0);
    CHECK_THROWS_AS(CertParams::make(0.5, 2.0, 0.25, 2.0), InvalidParams);
    CHECK_THROWS_AS(CertParams::make(0.0, -1.0, 0.0), InvalidParams);
}

TEST_CASE("trials violating the unit or lambda constraints are rejected") {
    const auto frames = constant_frames(8, 3, 0.1);
    const auto long_b = analytic_trial("long b", 1.0, constant({1.0, 1.0}), {}, {}, {}, true);
    CHECK_THROWS_AS(certify_trial(frames, long_b), InvalidTrial);
    const auto big_A = analytic_trial("big A", 0.5, constant({1.0, 0.0}), {}, constant({0.0, 0.6}), {}, true);
    CHECK_THROWS_AS(certify_trial(frames, big_A), InvalidTrial);
    const std::vector<double> e1{1.0, 0.0};
    const FourierMode loud{{1, 0}, 0, 1.5, false};
    CHECK_THROWS_AS(fourier_trial(e1, nullptr, &loud, 1.0), InvalidTrial);
}

TEST_CASE("stationary field: the discounted identity gives zero margin") {
    const auto frames = constant_frames(8, 101, 1.0);
    const std::vector<double> dir{1.0, 0.0};
    const auto rep = certify_trial(frames, constant_trial(dir));
    CHECK(rep.params.r == doctest::Approx(0.5));
    CHECK(rep.eta[0] > 0.1);
    for (std::size_t k = 0; k < rep.margin.size(); ++k) {
        CHECK(std::abs(rep.margin[k]) <= 10 * rep.quadrature_error + 1e-14);
        CHECK(std::abs(rep.margin[k]) <= 1e-5 * rep.eta[0]);
    }
}

TEST_CASE("lifted circle passes the default dictionary; a corrupted run fails") {
    const auto frames = circle_frames(32, 21);
    const double m0 = eulerian::total_mass(frames[0]);
    const auto dict = default_dictionary(2, 1.0);
    CertifyOptions opt;
    opt.tolerance = 1e-3 * m0;
    const auto rep = certify(frames, dict, opt);
    CHECK(rep.trials.size() == dict.size());
    CHECK(rep.pass);
    CHECK(rep.max_margin <= opt.tolerance);

    auto bad = frames;
    for (std::size_t k = 1; k < bad.size(); ++k) {
        for (double& b : bad[k].B) b *= 1.05;
        bad[k].P.clear();
    }
    const auto fail = certify(bad, dict, opt);
    CHECK_FALSE(fail.pass);
    CHECK(fail.max_margin > opt.tolerance);
}

TEST_CASE("certify reports are independent of the thread count") {
    const auto frames = circle_frames(32, 7);
    const auto dict = default_dictionary(2, 1.0);
    CertifyOptions opt;
    opt.tolerance = 1.0;
    const auto a = certify(frames, dict, opt);
    for (std::size_t i = 0; i < dict.size(); ++i) {
        const auto single = certify_trial(frames, dict[i]);
        CHECK(a.trials[i].id == single.id);
        CHECK(a.trials[i].margin == single.margin);
    }
}

TEST_CASE("convexity of the certified set") {
    const auto a = circle_frames(32, 11, 1.0);
    const auto b = circle_frames(32, 11, 0.5);
    const double m0 = eulerian::total_mass(a[0]);
    const auto dict = default_dictionary(2, 1.0);
    CertifyOptions opt;
    opt.tolerance = 1e-3 * m0;
    const auto ra = certify(a, dict, opt), rb = certify(b, dict, opt);
    REQUIRE(ra.pass);
    REQUIRE(rb.pass);

    const auto r1 = convexity_check(a, b, 1.0, dict, opt);
    const auto r0 = convexity_check(a, b, 0.0, dict, opt);
    // Frame times of the two runs agree to round-off, not bitwise.
    for (std::size_t i = 0; i < dict.size(); ++i) {
        CHECK(r1.trials[i].margin == ra.trials[i].margin);
        for (std::size_t k = 0; k < rb.theta.size(); ++k) {
            CHECK(std::abs(r0.trials[i].margin[k] - rb.trials[i].margin[k]) <= 1e-12 * m0);
        }
    }
    for (int j = 1; j <= 9; ++j) {
        const double t = 0.1 * j;
        const auto mix = convexity_check(a, b, t, dict, opt);
        CHECK(mix.pass);
        CHECK(mix.max_margin <= std::max(ra.max_margin, rb.max_margin) + opt.tolerance);
        for (std::size_t i = 0; i < dict.size(); ++i) {
            for (std::size_t k = 0; k < mix.theta.size(); ++k) {
                const double bound = t * ra.trials[i].margin[k] + (1 - t) * rb.trials[i].margin[k];
                CHECK(mix.trials[i].margin[k] <= bound + opt.tolerance);
            }
        }
    }

    auto shifted = b;
    shifted[0].B[0] += 1e-3;
    CHECK_THROWS_AS(mixture(a, shifted, 0.5), ArgumentError);
    const auto coarse = constant_frames(16, 11, a.back().theta);
    CHECK_THROWS_AS(mixture(a, coarse, 0.5), ArgumentError);
}

TEST_CASE("discounted Jensen bound for K_lambda") {
    const auto frames = circle_frames(32, 21);
    for (const auto& t : default_dictionary(2, 1.0)) {
        const auto rep = certify_trial(frames, t);
        const auto j = jensen_check(frames, t, rep.params.r);
        CHECK(j.lhs >= j.rhs * (1 - 1e-12));
    }
}

TEST_CASE("raising r keeps passing certificates passing") {
    // B(0) aligned with b*: eta(0) = 0.
    const auto frames = [] {
        auto s = eulerian::sample_field(2, 32, [](std::span<const double> x, std::span<double> B) {
            B[0] = 1.0 + 0.5 * std::sin(2 * pi * x[1]);
            B[1] = 0.02 * std::sin(2 * pi * x[0]);
        });
        eulerian::ShortRunOptions opt;
        opt.steps = 200;
        opt.frame_every = 20;
        return eulerian::run_eulerian_short(s, opt).frames;
    }();
    const double m0 = eulerian::total_mass(frames[0]);
    const double tol = 1e-3 * m0;
    for (const auto& t : default_dictionary(2, 1.0)) {
        bool passed = false;
        for (double extra : {0.0, 0.5, 2.0, 10.0}) {
            const bool pass = certify_trial(frames, t, extra).max_margin <= tol;
            CHECK((pass || !passed));
            passed = passed || pass;
        }
    }
}

TEST_CASE("A-dictionary margins approach the K_lambda margin from below") {
    const auto frames = circle_frames(32, 11);
    const std::vector<double> e1{1.0, 0.0};
    const auto base = constant_trial(e1);
    const auto ref = certify_trial(frames, base);
    const std::size_t last = ref.margin.size() - 1;
    const double mk = ref.margin_klambda[last];

    double best = ref.margin[last];  // A = 0
    std::vector<double> gaps;
    for (int modes : {8, 32, 128}) {
        const auto rep = certify_trial(frames, projected_optimal_trial(frames, base, modes));
        for (std::size_t k = 0; k < rep.margin.size(); ++k) {
            CHECK(rep.margin[k] <= rep.margin_klambda[k] + 1e-12);
        }
        best = std::max(best, rep.margin[last]);
        gaps.push_back(mk - best);
        MESSAGE("modes " << modes << " gap " << mk - best);
    }
    CHECK(gaps[0] >= 0.0);
    CHECK(gaps[1] <= gaps[0]);
    CHECK(gaps[2] <= gaps[1]);
    CHECK(gaps[2] < 0.5 * (mk - ref.margin[last]));
}

TEST_CASE("weak-strong: aligned stationary field") {
    auto B0 = eulerian::sample_field(2, 32, [](std::span<const double> x, std::span<double> B) {
        B[0] = 1.0 + 0.5 * std::sin(2 * pi * x[1]);
        B[1] = 0.0;
    });
    WeakStrongOptions opt;
    opt.frames = 11;
    const auto rep = weak_strong_experiment(constant_solution(2, 0), B0, opt);
    CHECK(rep.theta.back() == doctest::Approx(0.2));
    CHECK(rep.max_eta() <= 1e-8 * rep.mass0);
    CHECK(rep.max_momentum_defect() <= 1e-8 * rep.mass0);
}

TEST_CASE("weak-strong: misaligned start stays under the Gronwall envelope") {
    auto B0 = eulerian::sample_field(2, 32, [](std::span<const double> x, std::span<double> B) {
        B[0] = 1.0 + 0.5 * std::sin(2 * pi * x[1]);
        B[1] = 0.05 * std::sin(2 * pi * x[0]);
    });
    WeakStrongOptions opt;
    opt.frames = 11;
    const auto rep = weak_strong_experiment(constant_solution(2, 0), B0, opt);
    CHECK(rep.eta[0] > 0);
    CHECK(rep.gronwall_ratio() <= 1.01);
}

TEST_CASE("weak-strong: a wrong trial velocity is detected") {
    auto B0 = eulerian::sample_field(2, 32, [](std::span<const double> x, std::span<double> B) {
        B[0] = 1.0 + 0.5 * std::sin(2 * pi * x[1]);
        B[1] = 0.0;
    });
    const auto wrong = analytic_trial("e1, v = 0.1 e2", 1.0, constant({1.0, 0.0}), constant({0.0, 0.1}), {}, {}, true);
    WeakStrongOptions opt;
    opt.frames = 11;
    const auto rep = weak_strong_experiment(wrong, B0, opt);
    CHECK(rep.momentum_defect.back() >= 0.09 * rep.mass0);
    CHECK(rep.momentum_defect.back() >= 0.9 * rep.momentum_defect.front());
}

TEST_CASE("weak-strong: concentric circles on an annulus") {
    const double sigma = 0.04, R = 0.25;
    auto B0 = eulerian::sample_field(2, 64, [&](std::span<const double> x, std::span<double> B) {
        const double rx = x[0] - 0.5, ry = x[1] - 0.5, r = std::hypot(rx, ry);
        const double rho = std::exp(-std::pow(r - R, 2) / (2 * sigma * sigma));
        B[0] = r > 0 ? -rho * ry / r : 0.0;
        B[1] = r > 0 ? rho * rx / r : 0.0;
    });
    WeakStrongOptions opt;
    opt.T = 0.005;
    opt.frames = 6;
    opt.weight = [](std::span<const double> x) {
        const double r = std::hypot(x[0] - 0.5, x[1] - 0.5);
        return r > 0.1 && r < 0.4 ? 1.0 : 0.0;
    };
    const auto rep = weak_strong_experiment(circle_congruence(kCentre), B0, opt);
    MESSAGE("annulus eta " << rep.max_eta() / rep.mass0 << " defect " << rep.max_momentum_defect() / rep.mass0);
    CHECK(rep.max_eta() <= 1e-3 * rep.mass0);
    CHECK(rep.max_momentum_defect() <= 1e-2 * rep.mass0);
}
