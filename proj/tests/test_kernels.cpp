#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "qtime/kernels.hpp"

namespace k = qtime::kernels;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Bitwise equality; NaN payloads are not expected here.
bool same(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    }
    return true;
}

const int kThreadCounts[] = {1, 2, 3, 7};

}  // namespace

TEST_CASE("gaussian window is normalized and centred") {
    const int n = 64;
    const double sigma = 2.0 / n;
    const int win = k::gaussian_window_size(n, sigma);
    CHECK(win % 2 == 1);
    CHECK(win <= n);
    std::vector<double> w(win);
    for (double p : {0.0, 0.013, 0.5, 0.99}) {
        k::gaussian_window(p, n, sigma, win, w);
        double sum = 0;
        for (int j = 0; j < win; ++j) sum += w[j];
        CHECK(sum / n == doctest::Approx(1.0).epsilon(1e-14));
    }
    // Window of a point exactly on a cell is symmetric.
    const int start = k::gaussian_window(10.0 / n, n, sigma, win, w);
    CHECK(start == 10 - win / 2);
    for (int j = 0; j < win / 2; ++j) CHECK(w[j] == doctest::Approx(w[win - 1 - j]).epsilon(1e-14));
}

TEST_CASE("spread matches a direct sum and the serial reference") {
    const int d = 2, n = 32, K = 50;
    const double sigma = 1.5 / n;
    const int win = k::gaussian_window_size(n, sigma);
    const auto pos = noise(K * d, 11, 0.0, 1.0);
    const auto weight = noise(K * d, 12);
    std::vector<int> starts(K * d);
    std::vector<double> wx(static_cast<std::size_t>(K * d * win));
    for (int i = 0; i < K * d; ++i) {
        starts[i] = k::gaussian_window(pos[i], n, sigma, win, std::span<double>(wx).subspan(i * win, win));
    }
    const std::size_t npts = static_cast<std::size_t>(n) * n;
    std::vector<double> ref(d * npts, 7.0);
    k::serial::spread(d, n, win, starts, wx, weight, ref);

    std::vector<double> direct(d * npts, 0.0);
    for (int node = 0; node < K; ++node) {
        for (int a = 0; a < win; ++a) {
            for (int b = 0; b < win; ++b) {
                const int i = ((starts[node * d] + a) % n + n) % n;
                const int j = ((starts[node * d + 1] + b) % n + n) % n;
                const double w = wx[(node * d) * win + a] * wx[(node * d + 1) * win + b];
                for (int c = 0; c < d; ++c) direct[c * npts + i * n + j] += w * weight[node * d + c];
            }
        }
    }
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(ref[i] == doctest::Approx(direct[i]).epsilon(1e-12));

    for (int t : kThreadCounts) {
        omp_set_num_threads(t);
        std::vector<double> out(d * npts, -3.0);
        k::omp::spread(d, n, win, starts, wx, weight, out);
        CHECK(same(out, ref));
    }
}

TEST_CASE("llf flux and porous step are bit-identical across thread counts") {
    const std::size_t N = 1000;
    const auto rl = noise(N, 1, 0.1, 2.0), rr = noise(N, 2, 0.1, 2.0);
    const auto ml = noise(N, 3), mr = noise(N, 4);
    std::vector<double> fr(N), fm(N);
    k::serial::llf_flux(rl, ml, rr, mr, 1.0, 1.4, 1e-8, fr, fm);
    // Consistency: equal states give the physical flux.
    std::vector<double> gr(N), gm(N);
    k::serial::llf_flux(rl, ml, rl, ml, 1.0, 1.4, 1e-8, gr, gm);
    for (std::size_t i = 0; i < N; ++i) {
        CHECK(gr[i] == doctest::Approx(ml[i]).epsilon(1e-14));
        CHECK(gm[i] == doctest::Approx(ml[i] * ml[i] / rl[i] + std::pow(rl[i], 1.4)).epsilon(1e-13));
    }

    const auto rho = noise(N, 5, 0.5, 1.5);
    std::vector<double> ro(N), darcy(N);
    k::serial::porous_explicit(rho, 1.0, 2.0, 0.2, 1.0 / N, ro, darcy);

    for (int t : kThreadCounts) {
        omp_set_num_threads(t);
        std::vector<double> fr2(N), fm2(N), ro2(N), darcy2(N);
        k::omp::llf_flux(rl, ml, rr, mr, 1.0, 1.4, 1e-8, fr2, fm2);
        k::omp::porous_explicit(rho, 1.0, 2.0, 0.2, 1.0 / N, ro2, darcy2);
        CHECK(same(fr, fr2));
        CHECK(same(fm, fm2));
        CHECK(same(ro, ro2));
        CHECK(same(darcy, darcy2));
    }
}

TEST_CASE("field kernels are bit-identical across thread counts") {
    for (int d : {2, 3}) {
        CAPTURE(d);
        const std::size_t N = 4096;
        const int up = d * (d + 1) / 2, sup = d * (d - 1) / 2;
        const auto A = noise(d * N, 21), Bv = noise(d * N, 22), grad = noise(d * d * N, 23);
        // A few zero vectors exercise the floor.
        auto Az = A;
        for (std::size_t x = 0; x < N; x += 97) {
            for (int c = 0; c < d; ++c) Az[c * N + x] = 0.0;
        }

        std::vector<double> rho(N), inv(N), rho2(N), inv2(N);
        k::serial::norm_floor(d, N, Az, Bv, 1e-8, rho, inv);
        std::vector<double> rho1(N), inv1(N);
        k::serial::norm_floor(d, N, Az, {}, 1e-8, rho1, inv1);
        for (std::size_t x = 0; x < N; x += 97) {
            CHECK(rho1[x] == 0.0);
            CHECK(inv1[x] == doctest::Approx(1e8));
        }

        std::vector<double> so(up * N), ao(sup * N), tf(sup * N);
        k::serial::sym_outer(d, N, A, Bv, -1.0, inv, so);
        k::serial::antisym_outer(d, N, A, Bv, inv, ao);
        k::serial::transport_flux(d, N, A, grad, inv, tf);
        // Oracle for one point.
        const std::size_t x = 5;
        int idx = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j, ++idx) {
                const double e = (A[i * N + x] * A[j * N + x] - Bv[i * N + x] * Bv[j * N + x]) * inv[x];
                CHECK(so[idx * N + x] == doctest::Approx(e).epsilon(1e-14));
            }
        }
        std::vector<double> b(d), X(d, 0.0);
        for (int i = 0; i < d; ++i) b[i] = A[i * N + x] * inv[x];
        for (int a = 0; a < d; ++a) {
            for (int j = 0; j < d; ++j) X[a] += b[j] * grad[(a * d + j) * N + x];
        }
        idx = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j, ++idx) {
                CHECK(ao[idx * N + x] ==
                      doctest::Approx((A[i * N + x] * Bv[j * N + x] - Bv[i * N + x] * A[j * N + x]) * inv[x])
                          .epsilon(1e-14));
                CHECK(tf[idx * N + x] == doctest::Approx(b[i] * X[j] - b[j] * X[i]).epsilon(1e-12));
            }
        }

        auto y = noise(d * N, 24);
        auto y_ref = y;
        k::serial::axpy(0.3, A, y_ref);

        for (int t : kThreadCounts) {
            omp_set_num_threads(t);
            k::omp::norm_floor(d, N, Az, Bv, 1e-8, rho2, inv2);
            CHECK(same(rho, rho2));
            CHECK(same(inv, inv2));
            std::vector<double> so2(up * N), ao2(sup * N), tf2(sup * N);
            k::omp::sym_outer(d, N, A, Bv, -1.0, inv, so2);
            k::omp::antisym_outer(d, N, A, Bv, inv, ao2);
            k::omp::transport_flux(d, N, A, grad, inv, tf2);
            CHECK(same(so, so2));
            CHECK(same(ao, ao2));
            CHECK(same(tf, tf2));
            auto y2 = y;
            k::omp::axpy(0.3, A, y2);
            CHECK(same(y_ref, y2));
        }
    }
}
