#include <algorithm>
#include <cmath>

#include "qtime/errors.hpp"
#include "qtime/kernels.hpp"

namespace qtime::kernels {

int gaussian_window_size(int n, double sigma) {
    const int half = static_cast<int>(std::ceil(6.0 * sigma * n));
    return std::min(2 * half + 1, n);
}

int gaussian_window(double p, int n, double sigma, int win, std::span<double> w) {
    const double h = 1.0 / n;
    const int centre = static_cast<int>(std::lround(p * n));
    const int start = centre - win / 2;
    double sum = 0;
    for (int j = 0; j < win; ++j) {
        double dx = (start + j) * h - p;
        dx -= std::round(dx);
        w[j] = std::exp(-0.5 * dx * dx / (sigma * sigma));
        sum += w[j];
    }
    if (!(sum > 0)) throw ArgumentError("gaussian_window: empty kernel");
    for (int j = 0; j < win; ++j) w[j] /= sum * h;
    return start;
}

namespace serial {
#define QTIME_FOR
#include "kernels_body.inc"
#undef QTIME_FOR
}  // namespace serial

}  // namespace qtime::kernels
