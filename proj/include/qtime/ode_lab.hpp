#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qtime::ode {

using Vec = std::vector<double>;

/// Smooth convex scalar potential on R^d with derivative access.
///
/// Hessian eigenvalues are assumed to lie in [convexity_lo(), convexity_hi()]
/// everywhere and the third derivative tensor is bounded (as a trilinear form)
/// by third_deriv_bound().
class Potential {
public:
    virtual ~Potential() = default;

    virtual int dim() const = 0;
    virtual double eval(std::span<const double> x) const = 0;
    virtual void grad(std::span<const double> x, std::span<double> out) const = 0;
    /// Row-major d x d.
    virtual void hess(std::span<const double> x, std::span<double> out) const = 0;
    virtual double convexity_lo() const = 0;
    virtual double convexity_hi() const = 0;
    virtual double third_deriv_bound() const = 0;
    virtual std::string name() const = 0;

    Vec grad(std::span<const double> x) const;
};

/// phi(x) = 1/2 sum_i a_i x_i^2. All a_i = 1 gives |x|^2/2.
class QuadraticPotential final : public Potential {
public:
    explicit QuadraticPotential(Vec weights);
    static QuadraticPotential isotropic(int dim) { return QuadraticPotential(Vec(dim, 1.0)); }

    int dim() const override { return static_cast<int>(a_.size()); }
    double eval(std::span<const double> x) const override;
    void grad(std::span<const double> x, std::span<double> out) const override;
    void hess(std::span<const double> x, std::span<double> out) const override;
    double convexity_lo() const override;
    double convexity_hi() const override;
    double third_deriv_bound() const override { return 0.0; }
    std::string name() const override;

private:
    Vec a_;
};

/// phi(x) = -G.x : constant force G (the falling-body case). Not strongly
/// convex: convexity bounds are both zero.
class LinearPotential final : public Potential {
public:
    explicit LinearPotential(Vec force);

    int dim() const override { return static_cast<int>(g_.size()); }
    double eval(std::span<const double> x) const override;
    void grad(std::span<const double> x, std::span<double> out) const override;
    void hess(std::span<const double> x, std::span<double> out) const override;
    double convexity_lo() const override { return 0.0; }
    double convexity_hi() const override { return 0.0; }
    double third_deriv_bound() const override { return 0.0; }
    std::string name() const override { return "linear"; }

private:
    Vec g_;
};

/// phi(x) = a/2 |x|^2 + c sum_i log cosh((Q x)_i) with Q a rotation by `angle`
/// in each consecutive coordinate pair. Hessian spectrum in [a, a + c]; the
/// third derivative is bounded by c * 4 / (3 sqrt 3).
class LogCoshPotential final : public Potential {
public:
    LogCoshPotential(int dim, double a, double c, double angle = 0.0);

    int dim() const override { return dim_; }
    double eval(std::span<const double> x) const override;
    void grad(std::span<const double> x, std::span<double> out) const override;
    void hess(std::span<const double> x, std::span<double> out) const override;
    double convexity_lo() const override { return a_; }
    double convexity_hi() const override { return a_ + c_; }
    double third_deriv_bound() const override;
    std::string name() const override { return "logcosh"; }

private:
    void rotate(std::span<const double> x, std::span<double> y) const;
    void rotate_back(std::span<const double> y, std::span<double> x) const;

    int dim_;
    double a_, c_, cos_, sin_;
};

/// The three potentials used by the test suites: |x|^2/2, an anisotropic
/// quadratic and a rotated log-cosh regularized quadratic.
std::vector<std::shared_ptr<const Potential>> suite_potentials(int dim);

struct OdeState {
    double t = 0.0;
    Vec x;
    Vec v;
};

struct GradientFlowState {
    double theta = 0.0;
    Vec z;
};

enum class GradientScheme { RK4, ImplicitEuler };

/// Velocity-Verlet (kick-drift-kick leapfrog) step of X'' = -grad phi(X).
OdeState step_conservative(const OdeState& state, const Potential& potential, double dt);

/// One step of Z' = -grad phi(Z). ImplicitEuler runs Newton with the Hessian.
GradientFlowState step_gradient_flow(const GradientFlowState& state, const Potential& potential,
                                     double dtheta, GradientScheme scheme = GradientScheme::RK4);

/// 1/2 |V - W|^2 + phi(X) - phi(Y) - grad phi(Y).(X - Y).
double modulated_energy(std::span<const double> x, std::span<const double> v,
                        std::span<const double> y, std::span<const double> w,
                        const Potential& potential);

double total_energy(const OdeState& state, const Potential& potential);

/// Conservative run from (x0, V=0) against the gradient flow from x0 read at
/// theta = t^2/2, on the uniform grid t_k = k dt.
struct TimeCompareSeries {
    int dim = 0;
    std::vector<double> t;
    std::vector<Vec> x, v, z;
    /// |X - Z(t^2/2)|^2 + |X' - t Z'(t^2/2)|^2
    std::vector<double> e;
};

TimeCompareSeries quadratic_time_compare(std::span<const double> x0, const Potential& potential,
                                         double T, double dt);

/// Slope of log e against log t over `samples` log-spaced grid points in [t_lo, t_hi].
double fit_error_exponent(const TimeCompareSeries& series, double t_lo, double t_hi,
                          int samples = 40);

/// Positions and velocities sampled on a time grid.
struct SampledTrajectory {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> v;
};

/// Gronwall constant for a trial Y:
///   third_deriv_bound * (1 + sup_t |Y'(t)|) / convexity_lo.
double generic_constant(const SampledTrajectory& trial, const Potential& potential);

/// LHS - RHS of the dissipative-solution inequality for trial Y up to time T:
///   eta[T] + int_0^T (X'-Y').omega_Y e^{(T-t)C} dt - eta[0] e^{CT},
/// with omega_Y = Y'' + grad phi(Y) from centered second differences of the
/// sampled positions (one-sided at the ends). Grids must match.
double ode_dissipative_residual(const SampledTrajectory& x, const SampledTrajectory& y,
                                const Potential& potential, double C, double T);

/// Leapfrog trajectory sampled every step.
SampledTrajectory integrate_conservative(const OdeState& start, const Potential& potential,
                                         double dt, long steps);

}  // namespace qtime::ode
