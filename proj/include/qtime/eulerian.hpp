#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qtime/curve_flow.hpp"

namespace qtime::eulerian {

/// B and P on a uniform periodic grid over T^d (component-major, see
/// spectral.hpp). P is empty until computed.
struct FieldState {
    int d = 2;
    int n = 0;
    std::vector<double> B;
    std::vector<double> P;
    double rho_floor = 0.0;
    double theta = 0.0;

    std::size_t npts() const;
    double h() const { return 1.0 / n; }
    double cell_volume() const;
    /// Grid coordinate of point index `idx` along `axis`.
    double coord(std::size_t idx, int axis) const;
};

constexpr double kRhoFloorFactor = 1e-8;
constexpr double kMaskFactor = 10.0;

/// Wraps B; rho_floor = kRhoFloorFactor * max |B| (or 1e-300 if B == 0).
FieldState make_field(int d, int n, std::vector<double> B);
/// Samples B(x) at every grid point.
FieldState sample_field(int d, int n,
                        const std::function<void(std::span<const double>, std::span<double>)>& B);

struct LiftParams {
    double kernel_width = 2.0;  ///< Gaussian standard deviation in grid cells
    bool projection = true;
};

constexpr double kMinKernelWidth = 1.5;

/// B(x) = sum_k K(x - X_k) X_s,k ds with a separable periodic Gaussian (each 1D
/// factor normalized on the grid), then Leray-projected if requested. Curve
/// coordinates are taken modulo 1. Several curves are summed.
FieldState lift_curve(const curve::PeriodicCurve& c, int n, const LiftParams& params = {});
FieldState lift_curves(std::span<const curve::PeriodicCurve> cs, int n, const LiftParams& params = {});

/// rho = |B| pointwise.
std::vector<double> density(const FieldState& s);
/// sum |B| h^d
double total_mass(const FieldState& s);
double max_divergence(const FieldState& s);

/// P = div(B (x) B / max(rho, delta)).
std::vector<double> compute_P(const FieldState& s);

/// sum |B.P| / sum |B||P| (0 when P vanishes).
double orthogonality_ratio(const FieldState& s);

/// Explicit-Euler bound dtheta <= c h^2 for the curve-shortening field
/// system. The flux is a degenerate diffusion with unit symbol, so the
/// spectral limit is 2 / (d pi^2 n^2); 0.1 is safe for d = 2 and d = 3
/// (checked on the lifted-circle and noise suites).
constexpr double kShortStability = 0.1;
/// Explicit-Euler step bound for the string field system.
constexpr double kStringStability = 0.1;
double admissible_dtheta_short(const FieldState& s);
double admissible_dt_string(const FieldState& s);

/// Explicit Euler step of d_theta B + div((B (x) P - P (x) B) / rho) = 0.
/// With div B = 0 the flux equals b (x) (b.grad)B - (b.grad)B (x) b,
/// b = B / max(rho, delta), which is how it is evaluated: the product rule is
/// applied before differentiating, so no derivative of B (x) B / rho is
/// taken. The returned state has P empty; compute_P recovers it.
FieldState step_eulerian_short(const FieldState& s, double dtheta);

/// Explicit Euler step of d_t B + div((B (x) P - P (x) B)/rho) = 0,
/// d_t P + div((P (x) P - B (x) B)/rho) = 0 with rho = sqrt(B^2 + P^2).
FieldState step_eulerian_string(const FieldState& s, double dt);

struct NonConsFields {
    std::vector<double> b;  ///< unit on the mask
    std::vector<double> v;  ///< P / max(rho, delta)
    std::vector<unsigned char> mask;  ///< rho > kMaskFactor * delta
};

NonConsFields noncons_fields(const FieldState& s);

/// Mass-weighted mean distance from `centre` over the support mask (minimal
/// periodic image).
double effective_radius(const FieldState& s, std::span<const double> centre);

struct ShortRunOptions {
    double dtheta = 0.0;   ///< 0 = admissible_dtheta_short
    long steps = 0;
    int frame_every = 0;   ///< 0 = keep no intermediate frames
    bool keep_first_and_last = true;
};

/// Per-step mass of a curve-shortening field run plus frames (with P).
struct ShortRun {
    std::vector<FieldState> frames;
    std::vector<double> theta, mass;  ///< every step
    double worst_mass_increase = 0.0;  ///< max relative increase of int|B| over one step
    double worst_divergence = 0.0;     ///< over frames
};

ShortRun run_eulerian_short(FieldState s, const ShortRunOptions& opt);

struct StringRun {
    std::vector<FieldState> frames;
    double worst_divergence = 0.0;
};
StringRun run_eulerian_string(FieldState s, double dt, long steps, int frame_every);

struct ResidualNorms {
    double max = 0.0;
    double l1 = 0.0;
};

/// Residuals at each interior frame (centred time differences).
struct ResidualReport {
    std::vector<double> theta;
    /// d_theta rho + P^2/rho + div P
    std::vector<ResidualNorms> mass_balance;
    /// d_theta rho + div(rho v) + rho v^2, rho floored inside the divergence
    std::vector<ResidualNorms> mass_balance_v;
    /// d_theta b + (v.grad) b - (b.grad) v - b v^2 (l1 weighted by rho)
    std::vector<ResidualNorms> transport;
    /// v - (b.grad) b (l1 weighted by rho)
    std::vector<ResidualNorms> velocity;
};

/// Frames must be uniformly spaced in theta and at least 3.
ResidualReport residual_diagnostics(std::span<const FieldState> frames);

/// Entropy-balance residual of the string field system at interior frames:
/// d_t rho + div P - div((P.B) B / rho^2), rho = sqrt(B^2 + P^2).
std::vector<ResidualNorms> string_entropy_residual(std::span<const FieldState> frames);

/// Smooth test vector field a * trig(2 pi m.x) with Lipschitz constant 2 pi |m| |a|.
struct TestField {
    std::vector<double> a;
    std::vector<int> m;
    bool cosine = false;
    std::vector<double> sample(int d, int n) const;
    double lipschitz() const;
    std::string name() const;
};

std::vector<TestField> default_test_fields(int d);

struct BoundCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct AprioriReport {
    double mass0 = 0.0;
    double tolerance = 0.0;
    BoundCheck mass;         ///< (i) max_theta int|B| <= int|B(0)|
    BoundCheck dissipation;  ///< (ii) int int P^2/rho <= int|B(0)|
    BoundCheck momentum;     ///< (iii) int int |P| <= sqrt(T) int|B(0)|
    BoundCheck holder;       ///< (iv) worst lhs - rhs over pairs and test fields
    double momentum_saturation = 0.0;  ///< lhs/rhs of (iii) without tolerance
    bool pass() const { return mass.pass && dissipation.pass && momentum.pass && holder.pass; }
};

/// Frames over [0, T] with P present; tolerance is relative to int|B(0)|.
AprioriReport apriori_bounds_check(std::span<const FieldState> frames, double T,
                                   double rel_tolerance = 1e-3,
                                   std::span<const TestField> fields = {});

}  // namespace qtime::eulerian
