#include "qtime/gas_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtime/errors.hpp"
#include "qtime/kernels.hpp"
#include "qtime/numerics.hpp"

namespace qtime::gas {

namespace kern = kernels::omp;

double PressureLaw::p(double rho) const { return kappa * std::pow(rho, gamma); }
double PressureLaw::dp(double rho) const { return kappa * gamma * std::pow(rho, gamma - 1.0); }

void PressureLaw::validate() const {
    if (!(kappa > 0) || !(gamma >= 1)) throw ArgumentError("pressure law needs kappa > 0, gamma >= 1");
}

double GasState1D::mass() const {
    double s = 0;
    for (double r : rho) s += r;
    return s * h();
}

double GasState1D::momentum() const {
    double s = 0;
    for (double m : mom) s += m;
    return s * h();
}

GasState1D make_state(std::span<const double> rho, std::span<const double> mom) {
    if (rho.size() < 4) throw ArgumentError("gas state needs at least 4 cells");
    if (!mom.empty() && mom.size() != rho.size()) throw ArgumentError("rho/mom size mismatch");
    for (double r : rho) {
        if (!(r >= 0) || !std::isfinite(r)) throw ArgumentError("density must be finite and >= 0");
    }
    GasState1D s;
    s.rho.assign(rho.begin(), rho.end());
    s.mom = mom.empty() ? std::vector<double>(rho.size(), 0.0)
                        : std::vector<double>(mom.begin(), mom.end());
    return s;
}

double admissible_dt(const GasState1D& state, const PressureLaw& law) {
    double smax = 0;
    for (int i = 0; i < state.n(); ++i) {
        const double r = std::max(state.rho[i], kVacuumFloor);
        smax = std::max(smax, std::abs(state.mom[i] / r) + std::sqrt(law.dp(r)));
    }
    return kCfl * state.h() / smax;
}

namespace {

// Semi-discrete right-hand side -(F_{i+1/2} - F_{i-1/2}) / h.
void euler_rhs(std::span<const double> rho, std::span<const double> mom, const PressureLaw& law,
               std::vector<double>& drho, std::vector<double>& dmom) {
    const int n = static_cast<int>(rho.size());
    const double h = 1.0 / n;
    std::vector<double> rl(n), ml(n), rr(n), mr(n), fr(n), fm(n);
    // Interface i sits between cells i and i+1.
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n, ip = (i + 1) % n, ipp = (i + 2) % n;
        rl[i] = rho[i] + 0.25 * (rho[ip] - rho[im]);
        ml[i] = mom[i] + 0.25 * (mom[ip] - mom[im]);
        rr[i] = rho[ip] - 0.25 * (rho[ipp] - rho[i]);
        mr[i] = mom[ip] - 0.25 * (mom[ipp] - mom[i]);
    }
    kern::llf_flux(rl, ml, rr, mr, law.kappa, law.gamma, kVacuumFloor, fr, fm);
    drho.resize(n);
    dmom.resize(n);
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n;
        drho[i] = -(fr[i] - fr[im]) / h;
        dmom[i] = -(fm[i] - fm[im]) / h;
    }
}

void check_finite(const GasState1D& s, const char* what) {
    if (!all_finite(s.rho) || !all_finite(s.mom)) {
        throw NumericalBlowup(std::string(what) + " produced non-finite values at t=" +
                                  std::to_string(s.time),
                              0);
    }
}

}  // namespace

GasState1D step_euler(const GasState1D& state, const PressureLaw& law, double dt) {
    law.validate();
    if (!(dt > 0)) throw ArgumentError("step_euler: dt must be positive");
    const double adm = admissible_dt(state, law);
    if (dt > adm * (1 + 1e-12)) throw StepRejected("step_euler: CFL violated", adm);

    const int n = state.n();
    std::vector<double> dr, dm;
    GasState1D s1 = state, s2 = state, out = state;

    euler_rhs(state.rho, state.mom, law, dr, dm);
    for (int i = 0; i < n; ++i) {
        s1.rho[i] = state.rho[i] + dt * dr[i];
        s1.mom[i] = state.mom[i] + dt * dm[i];
    }
    euler_rhs(s1.rho, s1.mom, law, dr, dm);
    for (int i = 0; i < n; ++i) {
        s2.rho[i] = 0.75 * state.rho[i] + 0.25 * (s1.rho[i] + dt * dr[i]);
        s2.mom[i] = 0.75 * state.mom[i] + 0.25 * (s1.mom[i] + dt * dm[i]);
    }
    euler_rhs(s2.rho, s2.mom, law, dr, dm);
    for (int i = 0; i < n; ++i) {
        out.rho[i] = state.rho[i] / 3.0 + 2.0 / 3.0 * (s2.rho[i] + dt * dr[i]);
        out.mom[i] = state.mom[i] / 3.0 + 2.0 / 3.0 * (s2.mom[i] + dt * dm[i]);
    }
    out.time = state.time + dt;
    check_finite(out, "step_euler");
    return out;
}

double admissible_dtheta(const GasState1D& state, const PressureLaw& law) {
    double dmax = 0;
    for (double r : state.rho) dmax = std::max(dmax, law.dp(std::max(r, kVacuumFloor)));
    const double h = state.h();
    return h * h / (2.0 * dmax);
}

GasState1D step_porous_medium(const GasState1D& state, const PressureLaw& law, double dtheta,
                              PorousScheme scheme) {
    law.validate();
    if (!(dtheta > 0)) throw ArgumentError("step_porous_medium: dtheta must be positive");
    const int n = state.n();
    const double h = state.h();
    GasState1D out = state;
    out.time = state.time + dtheta;

    if (scheme == PorousScheme::Explicit) {
        const double adm = admissible_dtheta(state, law);
        if (dtheta > adm * (1 + 1e-12)) {
            throw StepRejected("step_porous_medium: explicit stability bound violated", adm);
        }
        kern::porous_explicit(state.rho, law.kappa, law.gamma, dtheta / (h * h), h, out.rho, out.mom);
    } else {
        std::vector<double> diff(n), lower(n), diag(n), upper(n);
        for (int i = 0; i < n; ++i) {
            diff[i] = law.kappa * std::pow(std::max(state.rho[i], 0.0), law.gamma - 1.0);
        }
        const double r = dtheta / (h * h);
        for (int i = 0; i < n; ++i) {
            lower[i] = -r * diff[(i + n - 1) % n];
            diag[i] = 1.0 + 2.0 * r * diff[i];
            upper[i] = -r * diff[(i + 1) % n];
        }
        solve_cyclic_tridiagonal(lower, diag, upper, out.rho);
        for (int i = 0; i < n; ++i) {
            out.mom[i] = -(law.p(state.rho[(i + 1) % n]) - law.p(state.rho[(i + n - 1) % n])) / (2 * h);
        }
    }
    check_finite(out, "step_porous_medium");
    return out;
}

GasState1D run_euler(GasState1D state, const PressureLaw& law, double t_end) {
    while (state.time < t_end) {
        const double dt = std::min(admissible_dt(state, law), t_end - state.time);
        if (dt <= 1e-15 * std::max(1.0, t_end)) break;
        state = step_euler(state, law, dt);
    }
    state.time = t_end;
    return state;
}

GasState1D run_porous_medium(GasState1D state, const PressureLaw& law, double theta_end,
                             PorousScheme scheme) {
    while (state.time < theta_end) {
        double dth = admissible_dtheta(state, law);
        if (scheme == PorousScheme::SemiImplicit) dth *= 4.0;
        dth = std::min(dth, theta_end - state.time);
        if (dth <= 1e-15 * std::max(1.0, theta_end)) break;
        state = step_porous_medium(state, law, dth, scheme);
    }
    state.time = theta_end;
    return state;
}

EulerHeatSeries euler_heat_compare(std::span<const double> rho0, const PressureLaw& law,
                                   double t_max, double t_min, int samples) {
    if (!(t_max > 0)) throw ArgumentError("euler_heat_compare: t_max must be positive");
    if (t_min <= 0) t_min = 0.1 * t_max;
    EulerHeatSeries out;
    out.t = logspace(t_min, t_max, samples);

    GasState1D euler = make_state(rho0);
    GasState1D heat = euler;
    const double h = euler.h();
    for (double t : out.t) {
        euler = run_euler(euler, law, t);
        heat = run_porous_medium(heat, law, 0.5 * t * t);
        double l1 = 0;
        for (int i = 0; i < euler.n(); ++i) l1 += std::abs(euler.rho[i] - heat.rho[i]);
        out.l1.push_back(l1 * h);
    }
    bool positive = std::all_of(out.l1.begin(), out.l1.end(), [](double e) { return e > 0; });
    out.fitted_order = positive ? loglog_slope(out.t, out.l1) : 0.0;
    return out;
}

double cosine_mode(std::span<const double> rho, int m) {
    const int n = static_cast<int>(rho.size());
    const double h = 1.0 / n;
    double mean = 0;
    for (double r : rho) mean += r;
    mean /= n;
    double s = 0;
    for (int i = 0; i < n; ++i) {
        s += (rho[i] - mean) * std::cos(2 * std::numbers::pi * m * (i + 0.5) * h);
    }
    return 2.0 * h * s;
}

}  // namespace qtime::gas
