#pragma once

#include <span>
#include <vector>

namespace qtime::gas {

/// p(rho) = kappa rho^gamma; gamma = 1 is isothermal.
struct PressureLaw {
    double kappa = 1.0;
    double gamma = 1.0;

    double p(double rho) const;
    double dp(double rho) const;
    void validate() const;
};

/// Cell averages on the periodic unit interval, h = 1/n.
struct GasState1D {
    std::vector<double> rho;
    std::vector<double> mom;
    double time = 0.0;

    int n() const { return static_cast<int>(rho.size()); }
    double h() const { return 1.0 / n(); }
    double cell_centre(int i) const { return (i + 0.5) * h(); }
    double mass() const;
    double momentum() const;
};

constexpr double kCfl = 0.4;
constexpr double kVacuumFloor = 1e-12;

GasState1D make_state(std::span<const double> rho, std::span<const double> mom = {});

/// Largest dt with max(|u| + c) dt / h <= kCfl.
double admissible_dt(const GasState1D& state, const PressureLaw& law);

/// One SSP-RK3 step of the finite-volume scheme: local Lax-Friedrichs flux on
/// unlimited linear (centred-slope) reconstructions of (rho, rho v).
/// Throws StepRejected if dt exceeds admissible_dt.
GasState1D step_euler(const GasState1D& state, const PressureLaw& law, double dt);

enum class PorousScheme { Explicit, SemiImplicit };

/// Largest explicit dtheta: h^2 / (2 max p'(rho)).
double admissible_dtheta(const GasState1D& state, const PressureLaw& law);

/// One step of d_theta rho = (p(rho))_xx. `mom` of the result holds the Darcy
/// momentum -p(rho)_x of the input state. Explicit steps beyond
/// admissible_dtheta throw StepRejected. The semi-implicit scheme freezes
/// D = p(rho)/rho at the old state and solves rho' - dtheta (D rho')_xx = rho.
GasState1D step_porous_medium(const GasState1D& state, const PressureLaw& law, double dtheta,
                              PorousScheme scheme = PorousScheme::Explicit);

/// Advances to time `t_end` exactly, clipping the last step.
GasState1D run_euler(GasState1D state, const PressureLaw& law, double t_end);
GasState1D run_porous_medium(GasState1D state, const PressureLaw& law, double theta_end,
                             PorousScheme scheme = PorousScheme::Explicit);

struct EulerHeatSeries {
    std::vector<double> t;
    std::vector<double> l1;  ///< L1 distance of densities at t and theta = t^2/2
    double fitted_order = 0.0;
};

/// Euler from (rho0, v = 0) against the porous medium equation from rho0 read
/// at theta = t^2 / 2, on `samples` log-spaced times in [t_min, t_max].
EulerHeatSeries euler_heat_compare(std::span<const double> rho0, const PressureLaw& law,
                                   double t_max, double t_min = 0.0, int samples = 12);

/// Amplitude of the cos(2 pi m x) mode: 2 h sum (rho_i - mean) cos(2 pi m x_i).
double cosine_mode(std::span<const double> rho, int m);

}  // namespace qtime::gas
