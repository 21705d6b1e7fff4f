#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qtime/curve_flow.hpp"
#include "qtime/errors.hpp"
#include "qtime/eulerian.hpp"
#include "qtime/numerics.hpp"

using namespace qtime;
using namespace qtime::eulerian;
using std::numbers::pi;

namespace {

const std::vector<double> kCentre{0.5, 0.5};

FieldState lifted_circle(int n, double R = 0.25, double width = 2.0) {
    return lift_curve(curve::make_circle(std::max(4 * n, 256), R, kCentre), n, {width, true});
}

// Smooth div-free field bounded away from zero.
FieldState smooth_field(int n) {
    return sample_field(2, n, [](std::span<const double> x, std::span<double> B) {
        B[0] = 1.0 + 0.3 * std::sin(2 * pi * x[1]);
        B[1] = 0.3 * std::sin(2 * pi * x[0]);
    });
}

FieldState constant_field(int d, int n) {
    return sample_field(d, n, [d](std::span<const double>, std::span<double> B) {
        for (int a = 0; a < d; ++a) B[a] = 0.5 + 0.25 * a;
    });
}

std::vector<FieldState> short_frames(FieldState s, long steps, int every, double dtheta = 0.0) {
    ShortRunOptions opt;
    opt.dtheta = dtheta;
    opt.steps = steps;
    opt.frame_every = every;
    return run_eulerian_short(std::move(s), opt).frames;
}

}  // namespace

TEST_CASE("lifted closed loop has zero mean and is divergence free") {
    for (const auto& c : {curve::make_circle(256, 0.25, kCentre), curve::make_ellipse(256, 0.3, 0.15, kCentre)}) {
        const auto s = lift_curve(c, 64);
        for (int a = 0; a < 2; ++a) {
            double total = 0;
            for (std::size_t i = 0; i < s.npts(); ++i) total += s.B[a * s.npts() + i];
            CHECK(std::abs(total * s.cell_volume()) <= 1e-12);
        }
        CHECK(max_divergence(s) <= 1e-10);
    }
    const auto knot = lift_curve(curve::make_trefoil(256, 0.2), 32);
    CHECK(max_divergence(knot) <= 1e-10);
}

TEST_CASE("mass of a lifted circle approximates its length") {
    const auto s = lifted_circle(128);
    CHECK(total_mass(s) == doctest::Approx(2 * pi * 0.25).epsilon(0.02));
}

TEST_CASE("lifted mass converges to the curve length as the kernel narrows") {
    const auto c = curve::make_circle(2048, 0.25, kCentre);
    std::vector<double> ws, errs;
    for (double w : {8.0, 4.0, 2.0}) {
        ws.push_back(w);
        errs.push_back(std::abs(total_mass(lift_curve(c, 128, {w, true})) - 2 * pi * 0.25));
    }
    CHECK(loglog_slope(ws, errs) >= 1.8);
}

TEST_CASE("kernels narrower than the grid can resolve are rejected") {
    CHECK_THROWS_AS(lift_curve(curve::make_circle(64, 0.25, kCentre), 64, {1.0, true}), ResolvabilityError);
}

TEST_CASE("constant field has zero momentum and is stationary") {
    for (int d : {2, 3}) {
        auto s = constant_field(d, 16);
        for (double p : compute_P(s)) CHECK(std::abs(p) <= 1e-14);
        const auto next = step_eulerian_short(s, admissible_dtheta_short(s));
        for (std::size_t i = 0; i < s.B.size(); ++i) CHECK(next.B[i] == doctest::Approx(s.B[i]).epsilon(1e-14));
        s.P.assign(s.B.size(), 0.0);
        const auto str = step_eulerian_string(s, admissible_dt_string(s));
        for (std::size_t i = 0; i < s.B.size(); ++i) {
            CHECK(str.B[i] == doctest::Approx(s.B[i]).epsilon(1e-14));
            CHECK(std::abs(str.P[i]) <= 1e-14);
        }
    }
}

TEST_CASE("momentum of a lifted circle is the inward curvature") {
    const auto s = lifted_circle(256);
    auto f = s;
    f.P = compute_P(s);
    const auto nc = noncons_fields(f);
    const auto rho = density(f);
    const std::size_t N = f.npts();
    double err = 0, mass = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (!nc.mask[i]) continue;
        const double x = f.coord(i, 0) - 0.5, y = f.coord(i, 1) - 0.5;
        const double r = std::hypot(x, y);
        // Expected v = -(x, y) / r^2 at the mask point, i.e. 1/r inward.
        const double ex = -x / (r * r), ey = -y / (r * r);
        err += rho[i] * std::hypot(nc.v[i] - ex, nc.v[N + i] - ey) * r;
        mass += rho[i];
    }
    CHECK(err / mass <= 0.1);
    // Against the generating polygon: mean curvature 1/R.
    const auto k = curve::curvature_vector(curve::make_circle(256, 0.25, kCentre));
    CHECK(std::hypot(k[0], k[1]) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("B.P orthogonality improves under refinement") {
    std::vector<double> hs, rs;
    // On a circle B.P vanishes to the density-floor level by symmetry; the
    // ellipse shows the discretization error.
    CHECK(orthogonality_ratio(lifted_circle(64)) <= 1e-7);
    for (int n : {64, 128, 256}) {
        const auto s = lift_curve(curve::make_ellipse(1024, 0.3, 0.15, kCentre), n);
        hs.push_back(1.0 / n);
        rs.push_back(orthogonality_ratio(s));
    }
    MESSAGE("orthogonality ratios " << rs[0] << " " << rs[1] << " " << rs[2]);
    CHECK(loglog_slope(hs, rs) >= 1.0);
}

TEST_CASE("short-flow steps keep B divergence free and do not create mass") {
    for (auto s : {lifted_circle(64), smooth_field(32)}) {
        ShortRunOptions opt;
        opt.steps = 300;
        opt.frame_every = 50;
        const auto run = run_eulerian_short(s, opt);
        CHECK(run.worst_divergence <= 1e-10);
        CHECK(run.worst_mass_increase <= 1e-6);
        CHECK(run.mass.back() < run.mass.front());
    }
}

TEST_CASE("short flow rejects steps beyond the stability bound") {
    const auto s = lifted_circle(32);
    CHECK_THROWS_AS(step_eulerian_short(s, 10 * admissible_dtheta_short(s)), StepRejected);
    CHECK_THROWS_AS(step_eulerian_short(s, -1.0), ArgumentError);
}

TEST_CASE("halving the density floor leaves the circle run unchanged") {
    auto s = lifted_circle(64);
    auto half = s;
    half.rho_floor *= 0.5;
    ShortRunOptions opt;
    opt.steps = 400;
    const auto a = run_eulerian_short(s, opt), b = run_eulerian_short(half, opt);
    for (std::size_t k = 0; k < a.mass.size(); ++k) CHECK(b.mass[k] == doctest::Approx(a.mass[k]).epsilon(1e-6));
}

TEST_CASE("effective radius of the lifted circle") {
    CHECK(effective_radius(lifted_circle(128), kCentre) == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("residual diagnostics") {
    SUBCASE("constant field: everything vanishes") {
        const auto frames = short_frames(constant_field(2, 16), 4, 1);
        const auto rep = residual_diagnostics(frames);
        REQUIRE(rep.theta.size() == 3);
        for (std::size_t k = 0; k < rep.theta.size(); ++k) {
            CHECK(rep.mass_balance[k].max <= 1e-12);
            CHECK(rep.mass_balance_v[k].max <= 1e-12);
            CHECK(rep.transport[k].max <= 1e-12);
            CHECK(rep.velocity[k].max <= 1e-12);
        }
    }
    SUBCASE("lifted circle: the two mass balances agree") {
        const auto frames = short_frames(lifted_circle(64), 20, 5);
        const auto rep = residual_diagnostics(frames);
        for (std::size_t k = 0; k < rep.theta.size(); ++k) {
            CHECK(std::abs(rep.mass_balance[k].l1 - rep.mass_balance_v[k].l1) <= 1e-10);
            CHECK(std::abs(rep.mass_balance[k].max - rep.mass_balance_v[k].max) <= 1e-10 * (1 + rep.mass_balance[k].max));
        }
    }
    SUBCASE("smooth field: non-conservative residual converges under refinement") {
        auto transport = [](int n) {
            const auto frames = short_frames(smooth_field(n), 2, 1);
            return residual_diagnostics(frames).transport[0].l1;
        };
        const double r64 = transport(64), r128 = transport(128);
        MESSAGE("transport residual " << r64 << " -> " << r128);
        CHECK(r64 / r128 >= 3.0);
    }
    SUBCASE("too few frames") {
        const auto frames = short_frames(constant_field(2, 16), 1, 1);
        CHECK_THROWS_AS(residual_diagnostics(frames), ArgumentError);
    }
}

TEST_CASE("string field system: entropy balance converges at second order") {
    std::vector<double> hs, rs;
    for (int n : {16, 32, 64}) {
        auto s = smooth_field(n);
        const std::size_t N = s.npts();
        s.P.assign(2 * N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            s.P[i] = 0.2 * std::cos(2 * pi * s.coord(i, 1));
            s.P[N + i] = 0.1 * std::sin(2 * pi * (s.coord(i, 0) + s.coord(i, 1)));
        }
        const auto run = run_eulerian_string(s, admissible_dt_string(s), 2, 1);
        CHECK(run.worst_divergence <= 1e-10);
        hs.push_back(1.0 / n);
        rs.push_back(string_entropy_residual(run.frames)[0].l1);
    }
    MESSAGE("entropy residuals " << rs[0] << " " << rs[1] << " " << rs[2]);
    CHECK(loglog_slope(hs, rs) >= 1.8);
}

TEST_CASE("a priori bounds") {
    SUBCASE("constant field holds with slack") {
        const auto frames = short_frames(constant_field(2, 16), 10, 2);
        const auto rep = apriori_bounds_check(frames, frames.back().theta);
        CHECK(rep.pass());
    }
    SUBCASE("lifted circle run towards extinction") {
        auto s = lifted_circle(64);
        const double T = 0.45 * 0.25 * 0.25;
        const long steps = std::lround(T / admissible_dtheta_short(s));
        const auto frames = short_frames(s, steps, static_cast<int>(steps / 30), T / steps);
        const auto rep = apriori_bounds_check(frames, frames.back().theta);
        CHECK(rep.mass.pass);
        CHECK(rep.dissipation.pass);
        CHECK(rep.momentum.pass);
        CHECK(rep.holder.pass);
        CHECK(rep.momentum_saturation <= 1 + 1e-3);
    }
}
