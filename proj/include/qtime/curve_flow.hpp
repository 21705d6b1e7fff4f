#pragma once

#include <optional>
#include <span>
#include <vector>

namespace qtime::curve {

/// Closed curve sampled at s_k = k/N, node-major positions x[k*d + c].
struct PeriodicCurve {
    int d = 2;
    std::vector<double> x;
    double theta = 0.0;

    int N() const { return static_cast<int>(x.size()) / d; }
    double h() const { return 1.0 / N(); }
    double at(int k, int c) const { return x[((k % N() + N()) % N()) * d + c]; }
};

PeriodicCurve make_circle(int N, double R, std::span<const double> centre = {}, int d = 2);
/// Circle with non-uniform parametrization phi(s) = 2 pi s + amp sin(2 pi s).
PeriodicCurve make_warped_circle(int N, double R, double amp, std::span<const double> centre = {});
PeriodicCurve make_ellipse(int N, double a, double b, std::span<const double> centre = {});
/// Closed (2,3) torus-knot-like curve in R^3.
PeriodicCurve make_trefoil(int N, double scale = 1.0);

/// Centred difference (X_{k+1} - X_{k-1}) / 2h.
std::vector<double> tangent(const PeriodicCurve& c);

/// Discrete (1/|X_s|) d_s(X_s / |X_s|): difference of the unit edge tangents
/// divided by the mean adjacent edge length. Exact (1/R, inward) on regular
/// polygons inscribed in a circle of radius R.
std::vector<double> curvature_vector(const PeriodicCurve& c);

/// Polygonal length sum |X_{k+1} - X_k|.
double curve_length(const PeriodicCurve& c);
std::vector<double> centroid(const PeriodicCurve& c);
/// Mean distance of the nodes from their centroid.
double mean_radius(const PeriodicCurve& c);
/// Largest | |X_k - centroid| - R |.
double max_radius_deviation(const PeriodicCurve& c, double R);

/// Semi-implicit step of d_theta X = curvature: edge lengths frozen at the old
/// state, the second-difference operator solved implicitly per coordinate.
PeriodicCurve step_curve_shortening(const PeriodicCurve& c, double dtheta);

/// sqrt(eps^2 + |X_s|^2) d_s(X_s / sqrt(eps^2 + |X_s|^2)) followed by M^{-1},
/// M = (eps^2 + |X_s|^2) I - X_s (x) X_s. Node X_s is the centred difference,
/// the inner flux uses edge differences.
std::vector<double> eps_flow_velocity(const PeriodicCurve& c, double eps);

/// Explicit Euler bound 0.4 h^2 min_k (eps^2 + |X_s|^2).
double admissible_dtheta_eps(const PeriodicCurve& c, double eps);

/// Explicit Euler step of the eps-flow; StepRejected above admissible_dtheta_eps.
PeriodicCurve step_curve_shortening_eps(const PeriodicCurve& c, double eps, double dtheta);

/// (eps^2 + |a|^2)^{-1} (I + a (x) a / eps^2) applied to v.
void apply_minv(std::span<const double> a, double eps, std::span<const double> v,
                std::span<double> out);

/// max_k |V_k . X_s,k| / (|V_k| |X_s,k|) for the velocity (next - prev) / dtheta,
/// X_s taken at `next`.
double orthogonality_residual(const PeriodicCurve& prev, const PeriodicCurve& next, double dtheta);

/// sqrt(R0^2 - 2 theta) before extinction, nullopt at or after theta = R0^2 / 2.
std::optional<double> shrink_circle_oracle(double R0, double theta);

/// Radius of a circle under the eps-flow (it decays but never vanishes): solves
/// R^2/2 + eps^2/(4 pi^2) ln R = R0^2/2 + eps^2/(4 pi^2) ln R0 - theta.
double eps_circle_radius(double R0, double eps, double theta);

struct CurveRun {
    std::vector<double> theta, length, radius, orthogonality;
    PeriodicCurve final_state;
    bool stopped_near_extinction = false;
    /// Zero of the linear fit of radius^2 against theta over the last part of the run.
    double extinction_estimate = 0.0;
    bool resampled = false;
};

struct CurveRunOptions {
    double dtheta = 1e-5;
    double theta_end = 1.0;
    int record_every = 1;
    bool resample = false;  ///< arc-length resampling every `resample_every` steps
    int resample_every = 1000;
};

/// Runs step_curve_shortening until theta_end or until length < 10 h.
CurveRun run_curve_shortening(PeriodicCurve c, const CurveRunOptions& opt);

/// Redistributes nodes uniformly in arc length (piecewise-linear interpolation).
PeriodicCurve resample_arclength(const PeriodicCurve& c);

}  // namespace qtime::curve
