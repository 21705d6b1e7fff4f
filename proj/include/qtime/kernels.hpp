#pragma once

#include <cstddef>
#include <span>

/// Data-parallel inner loops. `serial` is the reference, `omp` the OpenMP
/// version; both produce bit-identical output for any thread count because
/// every output element is computed by a fixed-order sum.
///
/// Field layout: component-major, component c of a field with `npts` grid
/// points occupies [c * npts, (c + 1) * npts). Grid index is row-major with
/// the last axis fastest.
namespace qtime::kernels {

namespace serial {
#include "qtime/kernels_decl.inc"
}
namespace omp {
#include "qtime/kernels_decl.inc"
}

/// 1D periodic Gaussian weights for a point at `p` in [0, 1) on n cells,
/// standard deviation `sigma` (physical units), truncated to `win` cells
/// centred on the nearest cell and normalized so that sum(w) * h == 1.
/// Returns the first cell index (may be negative before wrapping).
int gaussian_window(double p, int n, double sigma, int win, std::span<double> w);

/// Number of cells used by gaussian_window for a given sigma (6 sigma each side).
int gaussian_window_size(int n, double sigma);

}  // namespace qtime::kernels
