#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace qtime::spectral {

/// Fourier differentiation on the unit torus T^d (d = 2 or 3) with n points
/// per axis. Real fields are row-major, last axis fastest; vector and tensor
/// fields are component-major. The Nyquist wavenumber is treated as zero in
/// every derivative, so divergence, Leray projection and the divergence of
/// antisymmetric tensors use one consistent discrete symbol.
///
/// Methods are safe to call concurrently: plans are shared, work arrays are
/// per call.
class Spectral {
public:
    Spectral(int d, int n);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    int d() const { return d_; }
    int n() const { return n_; }
    std::size_t npts() const { return npts_; }
    std::size_t ncplx() const { return ncplx_; }

    using Cplx = std::complex<double>;

    void forward(std::span<const double> f, std::span<Cplx> out) const;
    /// Normalized inverse (inverse(forward(f)) == f).
    void inverse(std::span<const Cplx> in, std::span<double> f) const;

    /// 2 pi k_axis for each complex coefficient (zero at Nyquist).
    std::span<const double> wavenumber(int axis) const { return k_[axis]; }

    void derivative(std::span<const double> f, int axis, std::span<double> out) const;
    void gradient(std::span<const double> f, std::span<double> out) const;
    void divergence(std::span<const double> v, std::span<double> out) const;
    /// (div T)_i = sum_j d_j T_ij for symmetric T given by its upper triangle.
    void div_sym(std::span<const double> upper, std::span<double> out) const;
    /// Same for antisymmetric T given by its strict upper triangle.
    void div_antisym(std::span<const double> upper, std::span<double> out) const;
    /// Divergence-free projection in place; the mean is kept.
    void leray(std::span<double> v) const;
    double max_divergence(std::span<const double> v) const;

private:
    struct Plans;
    int d_, n_;
    std::size_t npts_, ncplx_;
    std::vector<std::vector<double>> k_;
    std::unique_ptr<Plans> plans_;
};

/// Shared instance per (d, n).
const Spectral& get(int d, int n);

}  // namespace qtime::spectral
