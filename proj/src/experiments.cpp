#include "qtime/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qtime/certifier.hpp"
#include "qtime/curve_flow.hpp"
#include "qtime/eulerian.hpp"
#include "qtime/gas_flow.hpp"
#include "qtime/io.hpp"
#include "qtime/numerics.hpp"
#include "qtime/ode_lab.hpp"
#include "qtime/spectral.hpp"
#include "qtime/string_sim.hpp"
#include "qtime/trials.hpp"

namespace qtime::experiments {

namespace {

using nlohmann::json;
using io::Column;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double num(const json& p, const char* key) { return p.at(key).get<double>(); }
int inum(const json& p, const char* key) { return p.at(key).get<int>(); }

Artifact csv(std::string name, std::vector<Column> cols) {
    return {std::move(name), io::csv_text(cols)};
}

// ---------------------------------------------------------------------------

Outcome ode_compare(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const int dim = inum(p, "dim");
    const std::string kind = p.at("potential").get<std::string>();
    std::shared_ptr<const ode::Potential> pot;
    if (kind == "linear") {
        ode::Vec g(dim, 0.0);
        g[dim - 1] = -1.0;
        pot = std::make_shared<ode::LinearPotential>(g);
    } else {
        const auto suite = ode::suite_potentials(dim);
        pot = kind == "quadratic" ? suite[0] : kind == "anisotropic" ? suite[1] : suite[2];
    }
    ode::Vec x0(dim);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < dim; ++i) x0[i] = std::pow(0.5, i) + num(p, "x0_jitter") * u(rng);

    const auto series = ode::quadratic_time_compare(x0, *pot, num(p, "T"), num(p, "dt"));
    std::vector<Column> cols{{"t", series.t}};
    auto add = [&](const char* prefix, const std::vector<ode::Vec>& rows) {
        for (int i = 0; i < dim; ++i) {
            Column c{prefix + std::to_string(i + 1), {}};
            for (const auto& r : rows) c.values.push_back(r[i]);
            cols.push_back(std::move(c));
        }
    };
    add("X", series.x);
    add("V", series.v);
    add("Z", series.z);
    cols.push_back({"e", series.e});

    Outcome out;
    const double t_lo = num(p, "t_lo"), t_hi = std::min(num(p, "t_hi"), num(p, "T"));
    out.summary = {
        {"potential", pot->name()},
        {"x0", x0},
        {"max_error", max_abs(series.e)},
    };
    if (kind != "linear") {
        out.summary["fitted_slope"] = ode::fit_error_exponent(series, t_lo, t_hi, inum(p, "samples"));
    }
    out.files.push_back(csv("series.csv", std::move(cols)));
    return out;
}

Outcome gas_heat(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const int n = inum(p, "n"), m = inum(p, "mode");
    const gas::PressureLaw law{num(p, "kappa"), num(p, "gamma")};
    law.validate();
    std::vector<double> rho0(n);
    for (int i = 0; i < n; ++i) rho0[i] = 1.0 + num(p, "amplitude") * std::cos(kTwoPi * m * (i + 0.5) / n);

    // Single-mode decay under the porous medium equation.
    auto state = gas::make_state(rho0);
    const double theta_end = num(p, "decay_theta");
    Column th{"theta", {0.0}}, amp{"amplitude", {gas::cosine_mode(state.rho, m)}};
    for (int k = 1; k <= 20; ++k) {
        state = gas::run_porous_medium(state, law, theta_end * k / 20.0);
        th.values.push_back(state.time);
        amp.values.push_back(gas::cosine_mode(state.rho, m));
    }
    std::vector<double> logs;
    for (double a : amp.values) logs.push_back(std::log(std::abs(a)));
    const double rate = -fit_line(th.values, logs).slope;
    const double expected = kTwoPi * kTwoPi * m * m * law.dp(1.0);

    const auto cmp = gas::euler_heat_compare(rho0, law, num(p, "t_max"), 0.0, inum(p, "samples"));
    bool decreasing = true;
    for (std::size_t i = 1; i < cmp.l1.size(); ++i) decreasing = decreasing && cmp.l1[i - 1] < cmp.l1[i];

    Outcome out;
    out.summary = {
        {"decay_rate", rate},
        {"expected_rate", expected},
        {"rate_rel_error", std::abs(rate - expected) / expected},
        {"euler_heat_order", cmp.fitted_order},
        {"distance_decreases_as_t_shrinks", decreasing},
    };
    out.files.push_back(csv("decay.csv", {th, amp}));
    out.files.push_back(csv("euler_heat.csv", {{"t", cmp.t}, {"l1", cmp.l1}}));
    return out;
}

Outcome string_vs_curve(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const double centre[2] = {0.5, 0.5};
    const auto c = curve::make_circle(inum(p, "N"), num(p, "R0"), centre);
    string::ComparisonOptions opt;
    opt.samples = inum(p, "samples");
    const auto s = string::string_vs_shortening(c, num(p, "eps"), num(p, "T"), opt);
    Outcome out;
    out.summary = {{"fitted_order", s.fitted_order}, {"max_distance", max_abs(s.distance)}};
    out.files.push_back(csv("distance.csv", {{"t", s.t}, {"distance", s.distance}}));
    return out;
}

Outcome curve_run(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const int N = inum(p, "N");
    const double R0 = num(p, "R0"), eps = num(p, "eps");
    const double theta_end = num(p, "theta_frac") * R0 * R0;
    const double centre[2] = {0.5, 0.5};
    auto c = curve::make_circle(N, R0, centre);
    Outcome out;
    Column th{"theta", {}}, len{"length", {}}, rad{"radius", {}}, orc{"oracle", {}};
    double worst = 0;
    if (eps == 0) {
        curve::CurveRunOptions opt;
        const double ds = kTwoPi * R0 / N;
        opt.dtheta = num(p, "dtheta_scale") * ds * ds;
        opt.theta_end = theta_end;
        opt.record_every = inum(p, "record_every");
        const auto run = curve::run_curve_shortening(c, opt);
        for (std::size_t i = 0; i < run.theta.size(); ++i) {
            const auto o = curve::shrink_circle_oracle(R0, run.theta[i]);
            th.values.push_back(run.theta[i]);
            len.values.push_back(run.length[i]);
            rad.values.push_back(run.radius[i]);
            orc.values.push_back(o.value_or(0.0));
            if (o && run.theta[i] <= 0.45 * R0 * R0) worst = std::max(worst, std::abs(run.radius[i] - *o) / *o);
        }
        out.summary = {
            {"extinction_estimate", run.extinction_estimate},
            {"extinction_expected", 0.5 * R0 * R0},
            {"extinction_rel_error", std::abs(run.extinction_estimate - 0.5 * R0 * R0) / (0.5 * R0 * R0)},
            {"stopped_near_extinction", run.stopped_near_extinction},
            {"max_rel_radius_error", worst},
        };
    } else {
        long step = 0;
        auto record = [&] {
            const double o = curve::eps_circle_radius(R0, eps, c.theta);
            const double r = curve::mean_radius(c);
            th.values.push_back(c.theta);
            len.values.push_back(curve::curve_length(c));
            rad.values.push_back(r);
            orc.values.push_back(o);
            worst = std::max(worst, std::abs(r - o) / o);
        };
        record();
        while (c.theta < theta_end - 1e-15) {
            const double dth = std::min(num(p, "dtheta_scale") * curve::admissible_dtheta_eps(c, eps),
                                        theta_end - c.theta);
            c = curve::step_curve_shortening_eps(c, eps, std::min(dth, curve::admissible_dtheta_eps(c, eps)));
            if (++step % inum(p, "record_every") == 0) record();
        }
        record();
        out.summary = {{"max_rel_radius_error", worst}, {"steps", step}};
    }
    out.files.push_back(csv("series.csv", {th, len, rad, orc}));
    return out;
}

// ---------------------------------------------------------------------------

eulerian::FieldState lifted_circle(const json& p, std::uint64_t seed, double noise) {
    const int n = inum(p, "n");
    const double R0 = num(p, "R0");
    const double centre[2] = {0.5, 0.5};
    const int N = std::max(256, 8 * n);
    eulerian::LiftParams lp;
    lp.kernel_width = num(p, "kernel_width");
    auto s = eulerian::lift_curve(curve::make_circle(N, R0, centre), n, lp);
    if (noise > 0) {
        const std::size_t Np = s.npts();
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        std::vector<double> pert(2 * Np, 0.0);
        for (int a = 0; a < 2; ++a) {
            for (int m1 = -3; m1 <= 3; ++m1) {
                for (int m2 = -3; m2 <= 3; ++m2) {
                    const double ca = g(rng), sa = g(rng);
                    for (std::size_t i = 0; i < Np; ++i) {
                        const double ph = kTwoPi * (m1 * s.coord(i, 0) + m2 * s.coord(i, 1));
                        pert[a * Np + i] += ca * std::cos(ph) + sa * std::sin(ph);
                    }
                }
            }
        }
        spectral::get(2, n).leray(pert);
        const double scale = noise * max_abs(s.B) / std::max(max_abs(pert), 1e-300);
        for (std::size_t i = 0; i < pert.size(); ++i) s.B[i] += scale * pert[i];
        s = eulerian::make_field(2, n, std::move(s.B));
    }
    return s;
}

eulerian::ShortRun field_run(const eulerian::FieldState& s0, double theta_end, int frames) {
    eulerian::ShortRunOptions opt;
    const double adm = eulerian::admissible_dtheta_short(s0);
    const long per_frame = std::max(1L, static_cast<long>(std::ceil(theta_end / (frames - 1) / adm)));
    opt.steps = per_frame * (frames - 1);
    opt.dtheta = theta_end / static_cast<double>(opt.steps);
    opt.frame_every = static_cast<int>(per_frame);
    return eulerian::run_eulerian_short(s0, opt);
}

Outcome eulerian_run(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const double R0 = num(p, "R0");
    const auto s0 = lifted_circle(p, cfg.seed, num(p, "noise"));
    const double theta_end = num(p, "theta_frac") * R0 * R0;
    const auto run = field_run(s0, theta_end, inum(p, "frames"));
    const double centre[2] = {0.5, 0.5};

    Column th{"theta", {}}, mass{"mass", {}}, rad{"radius", {}}, orc{"oracle", {}}, ortho{"orthogonality", {}};
    double worst = 0;
    for (const auto& f : run.frames) {
        const double r = eulerian::effective_radius(f, centre);
        const double o = curve::shrink_circle_oracle(R0, f.theta).value_or(0.0);
        th.values.push_back(f.theta);
        mass.values.push_back(eulerian::total_mass(f));
        rad.values.push_back(r);
        orc.values.push_back(o);
        ortho.values.push_back(eulerian::orthogonality_ratio(f));
        if (o > 0) worst = std::max(worst, std::abs(r - o) / o);
    }
    const auto bounds = eulerian::apriori_bounds_check(run.frames, theta_end);
    Outcome out;
    auto check = [](const eulerian::BoundCheck& b) {
        return json{{"lhs", b.lhs}, {"rhs", b.rhs}, {"pass", b.pass}};
    };
    out.summary = {
        {"steps", run.theta.size() - 1},
        {"worst_mass_increase", run.worst_mass_increase},
        {"worst_divergence", run.worst_divergence},
        {"max_rel_radius_error", worst},
        {"apriori",
         {{"mass", check(bounds.mass)},
          {"dissipation", check(bounds.dissipation)},
          {"momentum", check(bounds.momentum)},
          {"holder", check(bounds.holder)},
          {"momentum_saturation", bounds.momentum_saturation}}},
    };
    out.files.push_back(csv("frames.csv", {th, mass, rad, orc, ortho}));
    out.files.push_back(csv("mass.csv", {{"theta", run.theta}, {"mass", run.mass}}));
    auto [bin, side] = io::field_snapshot(run.frames.back());
    out.files.push_back({"final_field.bin", std::move(bin)});
    out.files.push_back({"final_field.json", std::move(side)});
    return out;
}

Outcome certify(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const double R0 = num(p, "R0");
    const auto s0 = lifted_circle(p, cfg.seed, 0.0);
    const double theta_end = num(p, "theta_frac") * R0 * R0;
    auto run = field_run(s0, theta_end, inum(p, "frames"));
    const double scale = num(p, "corrupt_scale");
    if (scale != 1.0) {
        for (std::size_t k = 1; k < run.frames.size(); ++k) {
            for (double& b : run.frames[k].B) b *= scale;
        }
    }
    const double mass0 = eulerian::total_mass(s0);
    const auto trials = cert::default_dictionary(2, num(p, "lambda"));
    cert::CertifyOptions opt;
    opt.tolerance = num(p, "tolerance_rel") * mass0;
    const auto rep = cert::certify(run.frames, trials, opt);

    std::vector<Column> cols{{"theta", rep.theta}};
    json trials_json = json::array();
    for (std::size_t i = 0; i < rep.trials.size(); ++i) {
        const auto& t = rep.trials[i];
        cols.push_back({"trial_" + std::to_string(i), t.margin});
        trials_json.push_back({{"index", i},
                               {"id", t.id},
                               {"r", t.params.r},
                               {"cstar", t.params.cstar},
                               {"max_margin", t.max_margin},
                               {"quadrature_error", t.quadrature_error},
                               {"margin", t.margin},
                               {"eta", t.eta},
                               {"dissipation", t.dissipation}});
    }
    Outcome out;
    out.summary = {
        {"scope", "finite trial dictionary (necessary condition only)"},
        {"mass0", mass0},
        {"tolerance", rep.tolerance},
        {"max_margin", rep.max_margin},
        {"worst_trial", rep.worst_trial},
        {"pass", rep.pass},
        {"trials", rep.trials.size()},
    };
    out.certification_failed = !rep.pass;
    out.files.push_back(csv("margins.csv", std::move(cols)));
    out.files.push_back({"report.json", io::json_text({{"theta", rep.theta}, {"trials", trials_json}})});
    return out;
}

Outcome weak_strong(const config::ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const int n = inum(p, "n");
    const double eps0 = num(p, "misalignment"), wrong = num(p, "wrong_velocity");
    auto B0 = eulerian::sample_field(2, n, [eps0](std::span<const double> x, std::span<double> B) {
        B[0] = 1.0 + 0.5 * std::sin(kTwoPi * x[1]);
        B[1] = eps0 * std::sin(kTwoPi * x[0]);
    });
    auto trial = cert::constant_solution(2, 0);
    if (wrong > 0) {
        trial = cert::analytic_trial(
            "constant e1, v* = " + io::format_double(wrong) + " e2", 1.0,
            [](double, std::span<const double>, std::span<double> b) { b[0] = 1.0; },
            [wrong](double, std::span<const double>, std::span<double> v) { v[1] = wrong; }, {}, {}, true);
    }
    cert::WeakStrongOptions opt;
    opt.T = num(p, "T");
    opt.frames = inum(p, "frames");
    const auto rep = cert::weak_strong_experiment(trial, B0, opt);
    const double tol = num(p, "tolerance_rel") * rep.mass0;

    Column env{"gronwall_envelope", {}};
    for (double t : rep.theta) env.values.push_back(rep.eta[0] * std::exp(rep.cstar * (t - rep.theta[0])));
    const bool aligned = eps0 == 0;
    const bool eta_ok = aligned ? rep.max_eta() <= tol : rep.gronwall_ratio() <= 1.0 + 1e-2;
    const bool momentum_ok = !aligned || rep.max_momentum_defect() <= tol;

    Outcome out;
    out.summary = {
        {"trial", trial.id},
        {"mass0", rep.mass0},
        {"cstar", rep.cstar},
        {"max_eta", rep.max_eta()},
        {"max_momentum_defect", rep.max_momentum_defect()},
        {"gronwall_ratio", rep.gronwall_ratio()},
        {"tolerance", tol},
        {"eta_ok", eta_ok},
        {"momentum_ok", momentum_ok},
    };
    out.certification_failed = !(eta_ok && momentum_ok);
    out.files.push_back(csv("series.csv", {{"theta", rep.theta},
                                           {"eta", rep.eta},
                                           {"momentum_defect", rep.momentum_defect},
                                           env}));
    return out;
}

}  // namespace

Outcome run(const config::ExperimentConfig& cfg) {
    Outcome out;
    if (cfg.kind == "ode-compare") {
        out = ode_compare(cfg);
    } else if (cfg.kind == "gas-heat") {
        out = gas_heat(cfg);
    } else if (cfg.kind == "string-vs-curve") {
        out = string_vs_curve(cfg);
    } else if (cfg.kind == "curve-run") {
        out = curve_run(cfg);
    } else if (cfg.kind == "eulerian-run") {
        out = eulerian_run(cfg);
    } else if (cfg.kind == "certify") {
        out = certify(cfg);
    } else if (cfg.kind == "weak-strong") {
        out = weak_strong(cfg);
    } else {
        throw config::ConfigError("unknown experiment kind '" + cfg.kind + "'", 0);
    }
    out.summary["config"] = cfg.echo();
    out.files.push_back({"summary.json", io::json_text(out.summary)});
    return out;
}

}  // namespace qtime::experiments
