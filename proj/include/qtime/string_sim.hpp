#pragma once

#include <span>
#include <vector>

#include "qtime/curve_flow.hpp"

namespace qtime::string {

/// Closed eps-regularized Nambu-Goto string. Positions and velocities are
/// node-major (k*d + c) at s_k = k/N.
struct StringState {
    int d = 2;
    std::vector<double> x;
    std::vector<double> xt;
    double eps = 1.0;
    double time = 0.0;

    int N() const { return static_cast<int>(x.size()) / d; }
    double h() const { return 1.0 / N(); }
};

/// Starts at rest on the given curve.
StringState at_rest(const curve::PeriodicCurve& c, double eps);

struct Coefficients {
    double F, G, H, S;
};

/// F, G, H, S for one node from its velocity xt and tangent xs. Throws
/// StateInvalid when |xt| >= 1 or S is not positive and finite.
Coefficients coefficients_at(std::span<const double> xt, std::span<const double> xs, double eps);

/// Per-node coefficients with centred X_s.
std::vector<Coefficients> string_coefficients(const StringState& state);

/// W = F X_t - G X_s per node (centred X_s).
std::vector<double> momentum(const StringState& state);
/// sum_k W_k h.
std::vector<double> total_momentum(const StringState& state);

/// Solves F(X_t) X_t - G(X_t) X_s = W for X_t at one node. Writing Y = M^{-1} W
/// with M = (eps^2 + |X_s|^2) I - X_s (x) X_s gives X_t = S Y, and S then
/// solves S^2 = (eps^2 + |X_s|^2) - S^2 Y.MY in closed form.
void recover_velocity(std::span<const double> w, std::span<const double> xs, double eps,
                      std::span<double> xt);

constexpr double kCfl = 0.25;

/// kCfl * h * eps / (1 + max |X_s|).
double admissible_dt(const StringState& state);

/// One generalized Stormer-Verlet step of d_t W = d_s(G X_t + H X_s): half
/// kick (implicit in W), drift (implicit in X), half kick. The flux lives on
/// edges (edge X_s, averaged X_t), so sum_k W_k is conserved to round-off.
StringState step_string(const StringState& state, double dt);

struct ComparisonSeries {
    std::vector<double> t;
    std::vector<double> distance;  ///< max over nodes of |X_string(t) - X_flow(t^2/2)|
    double fitted_order = 0.0;
};

struct ComparisonOptions {
    double t_min = 0.0;     ///< defaults to T / 8
    int samples = 8;
    double dt_scale = 1.0;  ///< string dt = dt_scale * admissible_dt
    double dtheta_scale = 0.05;  ///< eps-flow dtheta = dtheta_scale * admissible
};

/// String from (curve0, X_t = 0) against the eps-flow from curve0, compared at
/// theta = t^2 / 2 on log-spaced t in [t_min, T].
ComparisonSeries string_vs_shortening(const curve::PeriodicCurve& curve0, double eps, double T,
                                      const ComparisonOptions& opt = {});

}  // namespace qtime::string
