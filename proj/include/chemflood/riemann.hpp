#pragma once

// Assembly of the full Riemann solution: outer scalar fans at the boundary
// concentrations joined by the concentration shock whose speed comes from the
// saddle-saddle connection, plus profile sampling and a reconstruction check
// of the travelling wave in the physical wave coordinate.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chemflood/connect.hpp"
#include "chemflood/scalar.hpp"

namespace chemflood {

/// Concentration shock between (s_minus, c_minus) and (s_plus, c_plus).
struct CShockWave {
    double s_minus = 0;
    double c_minus = 0;
    double s_plus = 0;
    double c_plus = 0;
    double v = 0;
    double kappa = 0; // dissipation ratio selecting the wave; 0 marks the limit solution
    std::array<double, 2> rh_residuals{0, 0};
};

/// Left fan at c_minus, the c-shock, right fan at c_plus; speeds ordered.
struct WaveSequence {
    ScalarFan left_fan;
    CShockWave shock;
    ScalarFan right_fan;

    double first_speed() const { return left_fan.empty() ? shock.v : left_fan.v_initial; }
    double last_speed() const { return right_fan.empty() ? shock.v : right_fan.v_final; }
};

namespace detail {

inline WaveSequence assemble_sequence(const ModelSet& model, double v, double s_minus,
                                      double s_plus, double kappa) {
    WaveSequence seq;
    seq.shock.s_minus = s_minus;
    seq.shock.c_minus = model.c_minus;
    seq.shock.s_plus = s_plus;
    seq.shock.c_plus = model.c_plus;
    seq.shock.v = v;
    seq.shock.kappa = kappa;
    auto [r1, r2] = rh_residuals(model, v, s_minus, s_plus);
    seq.shock.rh_residuals = {r1, r2};

    if (std::abs(1.0 - s_minus) > 1e-12) {
        seq.left_fan = solve_scalar_riemann(model.flux, model.c_minus, 1.0, s_minus);
    } else {
        seq.left_fan.flux = model.flux;
        seq.left_fan.c = model.c_minus;
        seq.left_fan.s_left = seq.left_fan.s_right = 1.0;
    }
    if (s_plus > 1e-12) {
        seq.right_fan = solve_scalar_riemann(model.flux, model.c_plus, s_plus, 0.0);
    } else {
        seq.right_fan.flux = model.flux;
        seq.right_fan.c = model.c_plus;
        seq.right_fan.s_left = seq.right_fan.s_right = 0.0;
    }

    const double tol = 1e-9;
    if (!seq.left_fan.empty() && seq.left_fan.v_final > v + tol)
        throw solver_error("riemann assembly: left fan speed " +
                           std::to_string(seq.left_fan.v_final) + " exceeds shock speed " +
                           std::to_string(v));
    if (seq.left_fan.empty() && v < -tol)
        throw solver_error("riemann assembly: negative shock speed with empty left fan");
    if (!seq.right_fan.empty() && seq.right_fan.v_initial < v - tol)
        throw solver_error("riemann assembly: right fan speed " +
                           std::to_string(seq.right_fan.v_initial) + " below shock speed " +
                           std::to_string(v));
    return seq;
}

} // namespace detail

/// Full Riemann solution (1, c_minus) -> (0, c_plus) for the given ratio.
inline WaveSequence solve_riemann(const ModelSet& model, double kappa,
                                  SystemKind kind = SystemKind::non_equilibrium_adsorption) {
    if (!(kappa > 0)) throw domain_error("solve_riemann: kappa must be positive");
    auto conn = find_v_for_kappa(model, kappa, kind);
    return detail::assemble_sequence(model, conn.v, conn.s_minus, conn.s_plus, kappa);
}

/// Limit sequence as the ratio vanishes: the shock runs at v_max and the
/// outer construction needs no shooting. Reproduces the classical-criterion
/// solution the dissipative selection is compared against.
inline WaveSequence solve_lax_baseline(const ModelSet& model) {
    auto w = velocity_window(model);
    TravellingWaveSystem sys(model, w.v_max, 1.0);
    double s_minus = -1, s_plus = 2;
    for (const auto& p : critical_points(sys)) {
        if (p.c == model.c_minus) s_minus = std::max(s_minus, p.s);
        if (p.c == model.c_plus) s_plus = std::min(s_plus, p.s);
    }
    if (s_minus < 0 || s_plus > 1)
        throw solver_error("solve_lax_baseline: missing critical points at v_max");
    return detail::assemble_sequence(model, w.v_max, s_minus, s_plus, 0.0);
}

enum class ProfileLabel {
    left_state,
    left_fan,
    plateau_minus,
    plateau_plus,
    right_fan,
    right_state
};

inline const char* to_string(ProfileLabel l) {
    switch (l) {
        case ProfileLabel::left_state: return "left_state";
        case ProfileLabel::left_fan: return "left_fan";
        case ProfileLabel::plateau_minus: return "plateau_minus";
        case ProfileLabel::plateau_plus: return "plateau_plus";
        case ProfileLabel::right_fan: return "right_fan";
        case ProfileLabel::right_state: return "right_state";
    }
    return "?";
}

/// Sampled self-similar solution: c jumps once at xi = v, s follows the fans.
struct SolutionProfile {
    std::vector<double> xi;
    std::vector<double> s;
    std::vector<double> c;
    std::vector<ProfileLabel> label;
};

inline SolutionProfile sample_profile(const WaveSequence& seq, const std::vector<double>& xi_grid) {
    SolutionProfile prof;
    prof.xi = xi_grid;
    prof.s.reserve(xi_grid.size());
    prof.c.reserve(xi_grid.size());
    prof.label.reserve(xi_grid.size());
    const double v = seq.shock.v;
    for (double xi : xi_grid) {
        if (xi < v) {
            prof.c.push_back(seq.shock.c_minus);
            if (seq.left_fan.empty()) {
                prof.s.push_back(seq.shock.s_minus);
                prof.label.push_back(ProfileLabel::left_state);
            } else {
                prof.s.push_back(seq.left_fan.value(xi));
                prof.label.push_back(xi <= seq.left_fan.v_initial ? ProfileLabel::left_state
                                     : xi >= seq.left_fan.v_final ? ProfileLabel::plateau_minus
                                                                  : ProfileLabel::left_fan);
            }
        } else {
            prof.c.push_back(seq.shock.c_plus);
            if (seq.right_fan.empty()) {
                prof.s.push_back(seq.shock.s_plus);
                prof.label.push_back(ProfileLabel::right_state);
            } else {
                prof.s.push_back(seq.right_fan.value(xi));
                prof.label.push_back(xi <= seq.right_fan.v_initial ? ProfileLabel::plateau_plus
                                     : xi >= seq.right_fan.v_final ? ProfileLabel::right_state
                                                                   : ProfileLabel::right_fan);
            }
        }
    }
    return prof;
}

/// Reconstruction of the travelling profile in the wave coordinate and its
/// consistency checks. The concentration equation is autonomous in c, so the
/// profile is rebuilt stably from the scalar c(xi) flow with s carried along
/// the solved connection; an independent planar integration cross-checks it.
struct TravellingProfileReport {
    std::vector<std::array<double, 4>> rows; // xi, s, c, alpha
    double boundary_minus = 0;  // |s(-span) - s_minus|
    double boundary_plus = 0;   // |s(+span) - s_plus|
    double cross_route = 0;     // max |s_planar - s_reconstructed| along xi
    double alpha_chord = 0;     // max |alpha - (d1 c - d2)| (relaxation kind)
    double alpha_boundary = 0;  // |alpha(-span) - a(c_minus)|
    bool monotone = true;       // s monotone along xi

    bool ok(double tol_boundary = 1e-6, double tol_cross = 1e-8) const {
        return boundary_minus < tol_boundary && boundary_plus < tol_boundary &&
               cross_route < tol_cross && alpha_chord < tol_boundary &&
               alpha_boundary < tol_boundary && monotone;
    }
};

inline TravellingProfileReport verify_travelling_profile(const ModelSet& model,
                                                         const ConnectionResult& conn,
                                                         double xi_span) {
    TravellingWaveSystem sys(model, conn.v, conn.kappa, conn.kind);
    const double d1 = sys.chord.d1, d2 = sys.chord.d2;
    TravellingProfileReport rep;

    // Scalar reconstruction: c(xi) from the autonomous concentration flow.
    auto c_rhs = [&sys](double, const num::State<1>& y, num::State<1>& dy) {
        dy[0] = sys.c_rate(y[0]);
    };
    auto fwd = num::integrate<1>(c_rhs, 0.0, num::State<1>{conn.c0}, xi_span, tols().ode_rel,
                                 tols().ode_abs);
    auto bwd = num::integrate<1>(c_rhs, 0.0, num::State<1>{conn.c0}, -xi_span, tols().ode_rel,
                                 tols().ode_abs);
    std::vector<std::pair<double, double>> xi_c; // ascending xi
    for (auto it = bwd.samples.rbegin(); it != bwd.samples.rend(); ++it)
        xi_c.emplace_back(it->t, it->y[0]);
    for (std::size_t i = 1; i < fwd.samples.size(); ++i)
        xi_c.emplace_back(fwd.samples[i].t, fwd.samples[i].y[0]);

    rep.rows.reserve(xi_c.size());
    for (auto& [xi, c] : xi_c) rep.rows.push_back({xi, conn.s_at(c), c, d1 * c - d2});

    rep.boundary_minus = std::abs(rep.rows.front()[1] - conn.s_minus);
    rep.boundary_plus = std::abs(rep.rows.back()[1] - conn.s_plus);
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        if (rep.rows[i + 1][1] > rep.rows[i][1] + 1e-10) rep.monotone = false;

    // Independent planar integration in xi from the matching point, trimmed
    // to the interior band. The connection repels transversally near the
    // saddles (rate |lambda_s|), so each direction is capped at the span over
    // which local truncation errors stay below the drift target; drift beyond
    // the guard re-solves with tighter tolerances once.
    const double collar = 1e-4 * (model.c_minus - model.c_plus);
    const double budget = std::log(1e4);
    const double fwd_span = std::min(xi_span, budget / std::max(conn.to.lambda_s, 0.05));
    const double bwd_span = std::min(xi_span, budget / std::max(-conn.from.lambda_s, 0.05));
    auto planar_drift = [&](double rtol, double atol) {
        double drift = 0;
        auto rhs2 = [&sys](double, const num::State<2>& y, num::State<2>& dy) {
            dy[0] = sys.s_rate(y[0], y[1]);
            dy[1] = sys.c_rate(y[1]);
        };
        for (double dir : {1.0, -1.0}) {
            auto stop = [&](double, const num::State<2>& y) {
                return (dir > 0 ? y[1] < model.c_plus + collar
                                : y[1] > model.c_minus - collar) ||
                       std::abs(y[0] - conn.s_at(y[1])) > 1e-6;
            };
            auto res = num::integrate<2>(rhs2, 0.0, num::State<2>{conn.s_at(conn.c0), conn.c0},
                                         dir * (dir > 0 ? fwd_span : bwd_span), rtol, atol, stop);
            for (const auto& smp : res.samples)
                drift = std::max(drift, std::abs(smp.y[0] - conn.s_at(smp.y[1])));
        }
        return drift;
    };
    rep.cross_route = planar_drift(tols().ode_rel, tols().ode_abs);
    if (rep.cross_route > 1e-8)
        rep.cross_route = planar_drift(tols().ode_rel * 1e-2, tols().ode_abs * 1e-2);

    // Relaxation reconstruction: integrate the adsorption kinetics backwards
    // (its stable direction) and compare with the chord elimination.
    if (conn.kind == SystemKind::non_equilibrium_adsorption) {
        double alpha = d1 * rep.rows.back()[2] - d2;
        const double rate = 1.0 / (conn.v * conn.kappa);
        for (std::size_t i = rep.rows.size(); i-- > 1;) {
            const auto& hi = rep.rows[i];
            const auto& lo = rep.rows[i - 1];
            double hstep = lo[0] - hi[0]; // negative
            // RK4 on alpha_xi = rate (alpha - a(c)); c follows its own flow,
            // so Hermite interpolation with exact slopes is available.
            auto a_of = [&](double t) {
                double c = num::hermite(t, hi[0], lo[0], hi[2], lo[2], sys.c_rate(hi[2]),
                                        sys.c_rate(lo[2]));
                return model.adsorption.value(c);
            };
            int nsub = 1 + static_cast<int>(std::abs(hstep) * (4.0 * rate + 8.0));
            double t = hi[0];
            double hs = hstep / nsub;
            for (int k = 0; k < nsub; ++k) {
                auto f = [&](double tt, double aa) { return rate * (aa - a_of(tt)); };
                double k1 = f(t, alpha);
                double k2 = f(t + 0.5 * hs, alpha + 0.5 * hs * k1);
                double k3 = f(t + 0.5 * hs, alpha + 0.5 * hs * k2);
                double k4 = f(t + hs, alpha + hs * k3);
                alpha += hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
                t += hs;
            }
            rep.alpha_chord = std::max(rep.alpha_chord, std::abs(alpha - (d1 * lo[2] - d2)));
        }
        rep.alpha_boundary = std::abs(alpha - model.adsorption.value(model.c_minus));
    }
    return rep;
}

} // namespace chemflood
