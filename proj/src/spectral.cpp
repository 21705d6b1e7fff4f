#include "qtime/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>

#include "qtime/errors.hpp"

namespace qtime::spectral {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct RealBuf {
    explicit RealBuf(std::size_t n) : p(fftw_alloc_real(n)) {}
    ~RealBuf() { fftw_free(p); }
    double* p;
};

struct CplxBuf {
    explicit CplxBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~CplxBuf() { fftw_free(p); }
    fftw_complex* p;
};

}  // namespace

struct Spectral::Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

Spectral::Spectral(int d, int n) : d_(d), n_(n), plans_(std::make_unique<Plans>()) {
    if (d < 2 || d > 3) throw ArgumentError("spectral grid dimension must be 2 or 3");
    if (n < 4 || n % 2 != 0) throw ArgumentError("spectral grid size must be even and >= 4");
    npts_ = 1;
    for (int a = 0; a < d; ++a) npts_ *= static_cast<std::size_t>(n);
    const std::size_t last = static_cast<std::size_t>(n / 2 + 1);
    ncplx_ = npts_ / n * last;

    k_.assign(d, std::vector<double>(ncplx_));
    const double tp = 2.0 * std::numbers::pi;
    for (std::size_t c = 0; c < ncplx_; ++c) {
        std::size_t rem = c;
        const int l = static_cast<int>(rem % last);
        rem /= last;
        int idx[3] = {0, 0, 0};
        for (int a = d - 2; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % n);
            rem /= n;
        }
        idx[d - 1] = l;
        for (int a = 0; a < d; ++a) {
            int m = idx[a];
            if (m == n / 2) {
                m = 0;
            } else if (m > n / 2) {
                m -= n;
            }
            k_[a][c] = tp * m;
        }
    }

    int dims[3] = {n, n, n};
    RealBuf r(npts_);
    CplxBuf z(ncplx_);
    std::lock_guard lock(planner_mutex());
    plans_->r2c = fftw_plan_dft_r2c(d, dims, r.p, z.p, FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r(d, dims, z.p, r.p, FFTW_ESTIMATE);
    if (!plans_->r2c || !plans_->c2r) throw Error("FFTW planning failed");
}

Spectral::~Spectral() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plans_->r2c);
    fftw_destroy_plan(plans_->c2r);
}

void Spectral::forward(std::span<const double> f, std::span<Cplx> out) const {
    RealBuf r(npts_);
    CplxBuf z(ncplx_);
    std::memcpy(r.p, f.data(), npts_ * sizeof(double));
    fftw_execute_dft_r2c(plans_->r2c, r.p, z.p);
    std::memcpy(static_cast<void*>(out.data()), z.p, ncplx_ * sizeof(fftw_complex));
}

void Spectral::inverse(std::span<const Cplx> in, std::span<double> f) const {
    RealBuf r(npts_);
    CplxBuf z(ncplx_);
    std::memcpy(z.p, static_cast<const void*>(in.data()), ncplx_ * sizeof(fftw_complex));
    fftw_execute_dft_c2r(plans_->c2r, z.p, r.p);
    const double s = 1.0 / static_cast<double>(npts_);
    for (std::size_t i = 0; i < npts_; ++i) f[i] = r.p[i] * s;
}

void Spectral::derivative(std::span<const double> f, int axis, std::span<double> out) const {
    std::vector<Cplx> z(ncplx_);
    forward(f, z);
    const auto& k = k_[axis];
    for (std::size_t c = 0; c < ncplx_; ++c) z[c] *= Cplx(0.0, k[c]);
    inverse(z, out);
}

void Spectral::gradient(std::span<const double> f, std::span<double> out) const {
    std::vector<Cplx> z(ncplx_), g(ncplx_);
    forward(f, z);
    for (int a = 0; a < d_; ++a) {
        for (std::size_t c = 0; c < ncplx_; ++c) g[c] = z[c] * Cplx(0.0, k_[a][c]);
        inverse(g, out.subspan(a * npts_, npts_));
    }
}

void Spectral::divergence(std::span<const double> v, std::span<double> out) const {
    std::vector<Cplx> z(ncplx_), acc(ncplx_, Cplx(0.0, 0.0));
    for (int a = 0; a < d_; ++a) {
        forward(v.subspan(a * npts_, npts_), z);
        for (std::size_t c = 0; c < ncplx_; ++c) acc[c] += z[c] * Cplx(0.0, k_[a][c]);
    }
    inverse(acc, out);
}

void Spectral::div_sym(std::span<const double> upper, std::span<double> out) const {
    const int m = d_ * (d_ + 1) / 2;
    std::vector<std::vector<Cplx>> t(m, std::vector<Cplx>(ncplx_));
    for (int q = 0; q < m; ++q) forward(upper.subspan(q * npts_, npts_), t[q]);
    auto slot = [&](int i, int j) {
        if (i > j) std::swap(i, j);
        return i * d_ - i * (i - 1) / 2 + (j - i);
    };
    std::vector<Cplx> acc(ncplx_);
    for (int i = 0; i < d_; ++i) {
        std::fill(acc.begin(), acc.end(), Cplx(0.0, 0.0));
        for (int j = 0; j < d_; ++j) {
            const auto& tij = t[slot(i, j)];
            for (std::size_t c = 0; c < ncplx_; ++c) acc[c] += tij[c] * Cplx(0.0, k_[j][c]);
        }
        inverse(acc, out.subspan(i * npts_, npts_));
    }
}

void Spectral::div_antisym(std::span<const double> upper, std::span<double> out) const {
    const int m = d_ * (d_ - 1) / 2;
    std::vector<std::vector<Cplx>> t(m, std::vector<Cplx>(ncplx_));
    for (int q = 0; q < m; ++q) forward(upper.subspan(q * npts_, npts_), t[q]);
    auto slot = [&](int i, int j) {  // i < j
        int s = 0;
        for (int r = 0; r < i; ++r) s += d_ - 1 - r;
        return s + (j - i - 1);
    };
    std::vector<Cplx> acc(ncplx_);
    for (int i = 0; i < d_; ++i) {
        std::fill(acc.begin(), acc.end(), Cplx(0.0, 0.0));
        for (int j = 0; j < d_; ++j) {
            if (i == j) continue;
            const auto& tij = t[slot(std::min(i, j), std::max(i, j))];
            const double sign = i < j ? 1.0 : -1.0;
            for (std::size_t c = 0; c < ncplx_; ++c) acc[c] += sign * tij[c] * Cplx(0.0, k_[j][c]);
        }
        inverse(acc, out.subspan(i * npts_, npts_));
    }
}

void Spectral::leray(std::span<double> v) const {
    std::vector<std::vector<Cplx>> z(d_, std::vector<Cplx>(ncplx_));
    for (int a = 0; a < d_; ++a) forward(v.subspan(a * npts_, npts_), z[a]);
    for (std::size_t c = 0; c < ncplx_; ++c) {
        double k2 = 0;
        Cplx kv(0.0, 0.0);
        for (int a = 0; a < d_; ++a) {
            k2 += k_[a][c] * k_[a][c];
            kv += k_[a][c] * z[a][c];
        }
        if (k2 == 0) continue;
        for (int a = 0; a < d_; ++a) z[a][c] -= k_[a][c] * kv / k2;
    }
    for (int a = 0; a < d_; ++a) inverse(z[a], v.subspan(a * npts_, npts_));
}

double Spectral::max_divergence(std::span<const double> v) const {
    std::vector<double> div(npts_);
    divergence(v, div);
    double m = 0;
    for (double x : div) m = std::max(m, std::abs(x));
    return m;
}

const Spectral& get(int d, int n) {
    static std::mutex m;
    static std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[{d, n}];
    if (!slot) slot = std::make_unique<Spectral>(d, n);
    return *slot;
}

}  // namespace qtime::spectral
