#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qtime/eulerian.hpp"

namespace qtime::cert {

using eulerian::FieldState;

/// Trial fields sampled on the grid at one time, component-major.
/// `dtheta_b` may be left empty: certify then takes a centred difference of b
/// over neighbouring trial samples (or zero for time-independent trials).
struct TrialSample {
    std::vector<double> b, v, A, dtheta_b;
};

using TrialSampler = std::function<TrialSample(int d, int n, double theta)>;

/// A trial triple (b*, v*, A) with |b*| = 1 and |A| <= lambda.
struct TrialTriple {
    std::string id;
    double lambda = 1.0;
    TrialSampler sample;
    bool time_independent = false;
    bool analytic_dtheta = false;
};

constexpr double kUnitTolerance = 1e-12;
constexpr double kDthetaStep = 1e-5;

/// |B| - B.b* pointwise.
std::vector<double> eta_defect(int d, std::span<const double> B, std::span<const double> bstar);

/// Throws InvalidTrial unless |b| = 1 and |A| <= lambda on every point.
void validate_sample(const TrialSample& s, int d, std::size_t npts, double lambda);

/// Sample plus dtheta b (filled from centred differences when missing).
TrialSample sample_with_dtheta(const TrialTriple& trial, int d, int n, double theta);

struct Coefficients {
    std::vector<double> L1;      ///< v^2 - b.grad(b.v)
    std::vector<double> L2, L3;  ///< vectors, component-major
};

/// Spectral evaluation of L1, L2, L3; `s` must carry dtheta_b.
Coefficients trial_coefficients(const TrialSample& s, int d, int n);
Coefficients trial_coefficients(const TrialTriple& trial, int d, int n, double theta);

/// c* = |grad v + grad v^T|_op + |grad b - grad b^T|_op^2 + |L1|, each a max
/// over the grid and the given times.
double compute_cstar(const TrialTriple& trial, int d, int n, std::span<const double> thetas);
double cstar_at(const TrialSample& s, const Coefficients& c, int d, int n);

/// sup_{|A| <= lambda} Z.A - rho A^2 / 2.
double k_lambda(double rho, std::span<const double> Z, double lambda);
double k_lambda_norm(double rho, double znorm, double lambda);

/// Discount rate and Gronwall constant for one trial. make() enforces
/// r >= cstar + lambda^2 / 2 + lambda * vmax; r <= 0 picks the threshold.
struct CertParams {
    double r = 0.0;
    double cstar = 0.0;
    double lambda = 1.0;
    double vmax = 0.0;

    double threshold() const;
    static CertParams make(double cstar, double lambda, double vmax, double r = 0.0);
};

struct TrialReport {
    std::string id;
    CertParams params;
    std::vector<double> margin;          ///< lhs - rhs of the A-form inequality per frame
    std::vector<double> margin_klambda;  ///< same with the sup over |A| <= lambda taken pointwise
    std::vector<double> eta;             ///< int eta
    std::vector<double> dissipation;     ///< int K_lambda(rho, P - rho v*)
    double max_margin = 0.0;
    double quadrature_error = 0.0;       ///< Richardson estimate from every other frame
};

/// Results for a finite trial dictionary. Passing is a necessary condition for
/// a dissipative solution, not a sufficient one.
struct CertificateReport {
    std::vector<double> theta;
    std::vector<TrialReport> trials;
    double tolerance = 0.0;
    double max_margin = 0.0;
    std::string worst_trial;
    bool pass = false;
};

struct CertifyOptions {
    double tolerance = 0.0;  ///< absolute
    double r_extra = 0.0;    ///< r = threshold + r_extra (ignored when r_fixed > 0)
    double r_fixed = 0.0;    ///< same r for every trial; must clear each threshold
};

/// Frames must be increasing in theta on one grid; missing P is computed.
TrialReport certify_trial(std::span<const FieldState> frames, const TrialTriple& trial,
                          double r_extra = 0.0, double r_fixed = 0.0);
CertificateReport certify(std::span<const FieldState> frames, std::span<const TrialTriple> trials,
                          const CertifyOptions& opt);

/// Frames of t (B1, P1) + (1 - t) (B2, P2); grids, times and B(0) must match.
std::vector<FieldState> mixture(std::span<const FieldState> a, std::span<const FieldState> b,
                                double t);
CertificateReport convexity_check(std::span<const FieldState> a, std::span<const FieldState> b,
                                  double t, std::span<const TrialTriple> trials,
                                  const CertifyOptions& opt);

/// Both sides of the discounted Jensen bound for K_lambda at the last frame:
/// int e^{-r s} int K dx ds >= e^{-r T} int K(int rho, int |P - rho v*|) ds.
struct JensenCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};
JensenCheck jensen_check(std::span<const FieldState> frames, const TrialTriple& trial, double r);

struct WeakStrongOptions {
    double T = 0.2;
    double dtheta = 0.0;  ///< 0 = admissible step
    int frames = 41;
    /// Optional weight restricting the integrals (e.g. an annulus); empty = 1.
    std::function<double(std::span<const double>)> weight;
};

struct WeakStrongReport {
    std::vector<double> theta;
    std::vector<double> eta;              ///< weighted int eta
    std::vector<double> momentum_defect;  ///< weighted int |P - rho v*|
    double mass0 = 0.0;
    double cstar = 0.0;
    double max_eta() const;
    double max_momentum_defect() const;
    /// max over frames of eta(theta) / (eta(0) e^{c* theta})
    double gronwall_ratio() const;
};

/// Evolves B0 by the curve-shortening field system and compares it with the
/// smooth solution (b, v) given as a trial (A is ignored).
WeakStrongReport weak_strong_experiment(const TrialTriple& smooth, const FieldState& B0,
                                        const WeakStrongOptions& opt);

}  // namespace qtime::cert
