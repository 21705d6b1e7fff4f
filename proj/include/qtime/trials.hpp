#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qtime/certifier.hpp"

namespace qtime::cert {

/// Pointwise field f(theta, x) -> out (d components).
using PointField = std::function<void(double theta, std::span<const double> x, std::span<double> out)>;

/// Samples pointwise callbacks on the grid. `dtheta_b` may be empty.
TrialTriple analytic_trial(std::string id, double lambda, PointField b, PointField v, PointField A,
                           PointField dtheta_b = {}, bool time_independent = false);

/// Constant unit b* (normalized from `dir`), v* = 0, A = 0.
TrialTriple constant_trial(std::span<const double> dir, double lambda = 1.0);

/// One Fourier mode amp * trig(2 pi m.x) e_axis.
struct FourierMode {
    std::vector<int> m;
    int axis = 0;
    double amp = 1.0;
    bool cosine = false;

    void eval(std::span<const double> x, std::span<double> out) const;
    std::string name() const;
};

/// Constant b*, v* and A built from single Fourier modes (empty = 0). A is
/// scaled by lambda, so |A| <= lambda needs |a_amp| <= 1.
TrialTriple fourier_trial(std::span<const double> dir, const FourierMode* v, const FourierMode* A,
                          double lambda);

/// Constant b* along axes and diagonals (both signs), v* in {0, low modes},
/// A in {0, low modes}, all with the given lambda.
std::vector<TrialTriple> default_dictionary(int d, double lambda);

/// A trial whose A approximates the pointwise maximizer of
/// (P - rho v*).A - rho A^2 / 2 over |A| <= lambda for the given run: the
/// maximizer is projected onto the `modes` lowest Fourier wavevectors and
/// rescaled into the lambda ball. b* and v* come from `base`.
TrialTriple projected_optimal_trial(std::span<const FieldState> frames, const TrialTriple& base,
                                    int modes);

/// b* = e_1, v* = 0 as a smooth solution, and the tangent field of concentric
/// circles about `centre` (b = e_phi, v = -e_r / r), valid away from the centre.
TrialTriple constant_solution(int d, int axis = 0);
TrialTriple circle_congruence(std::span<const double> centre);

}  // namespace qtime::cert
