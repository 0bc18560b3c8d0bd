#pragma once

// Saddle-saddle connection solver: shooting along the invariant manifolds of
// u2_minus and u1_plus, the mismatch functional whose zero is the connection,
// bisection in kappa at fixed v (and in v at fixed kappa), and sweeps of the
// v-kappa curve with the chord integral identity as a per-sample check.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "chemflood/twave.hpp"

namespace chemflood {

enum class ManifoldDirection { unstable_forward, stable_backward };

enum class Termination { reached_c_target, hit_s0, hit_s1, entered_sink, max_steps };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::reached_c_target: return "reached_c_target";
        case Termination::hit_s0: return "hit_s0";
        case Termination::hit_s1: return "hit_s1";
        case Termination::entered_sink: return "entered_sink";
        case Termination::max_steps: return "max_steps";
    }
    return "?";
}

struct TrajectorySample {
    double c;
    double s;
    double dsdc;
};

/// One branch of a saddle's invariant manifold, integrated with c as the
/// independent variable. Samples are stored in traversal order: c decreasing
/// for unstable_forward, c increasing for stable_backward.
struct ManifoldTrajectory {
    CriticalPoint origin;
    ManifoldDirection direction = ManifoldDirection::unstable_forward;
    std::vector<TrajectorySample> samples;
    Termination termination = Termination::max_steps;
    bool offset_converged = true; // endpoint reproduced under offset halving

    double end_c() const { return samples.back().c; }
    double end_s() const { return samples.back().s; }

    /// Hermite interpolation in c; clamps to the end values outside the range.
    double s_at(double c) const {
        if (samples.size() < 2) return samples.empty() ? 0.0 : samples.front().s;
        bool increasing = samples.back().c > samples.front().c;
        auto cmp = [increasing](const TrajectorySample& a, double x) {
            return increasing ? a.c < x : a.c > x;
        };
        auto it = std::lower_bound(samples.begin(), samples.end(), c, cmp);
        if (it == samples.begin()) return samples.front().s;
        if (it == samples.end()) return samples.back().s;
        const auto& b = *it;
        const auto& a = *(it - 1);
        return num::hermite(c, a.c, b.c, a.s, b.s, a.dsdc, b.dsdc);
    }
};

struct LaunchOptions {
    double offset = tols().launch_offset;
    bool richardson_check = true; // re-launch at offset/2 and compare endpoints
    std::size_t max_steps = 400000;
};

namespace detail {

inline ManifoldTrajectory launch_once(const TravellingWaveSystem& sys, const CriticalPoint& saddle,
                                      ManifoldDirection dir, double c_target, double offset,
                                      std::size_t max_steps) {
    if (saddle.eigen_degenerate)
        throw solver_error("launch_manifold: eigenvector tangent to the concentration line");
    const bool forward = dir == ManifoldDirection::unstable_forward;
    if (forward && !(saddle.lambda_c > 0))
        throw solver_error("launch_manifold: unstable direction requested at a point with stable c-eigenvalue");
    if (!forward && !(saddle.lambda_c < 0))
        throw solver_error("launch_manifold: stable direction requested at a point with unstable c-eigenvalue");

    // Orient the eigenvector into the strip: forward traversal decreases c,
    // backward traversal increases it.
    double ws = saddle.ev_c[0];
    double wc = saddle.ev_c[1];
    const double want = forward ? -1.0 : 1.0;
    if (wc * want < 0) {
        ws = -ws;
        wc = -wc;
    }
    if (std::abs(wc) < 1e-12)
        throw solver_error("launch_manifold: eigenvector has no concentration component");

    const double c_lo = sys.model.c_plus;
    const double c_hi = sys.model.c_minus;
    const double collar = tols().collar_frac * (c_hi - c_lo);
    double c0 = saddle.c + offset * wc;
    double s0 = saddle.s + offset * ws;
    double target = std::clamp(c_target, c_lo + collar, c_hi - collar);

    ManifoldTrajectory traj;
    traj.origin = saddle;
    traj.direction = dir;

    auto rhs = [&sys](double c, const num::State<1>& y, num::State<1>& dy) {
        dy[0] = sys.slope(y[0], c);
    };
    auto escaped = [](double, const num::State<1>& y) { return y[0] <= 0.0 || y[0] >= 1.0; };
    auto res = num::integrate<1>(rhs, c0, num::State<1>{s0}, target, tols().ode_rel, tols().ode_abs,
                                 escaped, max_steps);

    traj.samples.reserve(res.samples.size());
    for (const auto& smp : res.samples) traj.samples.push_back({smp.t, smp.y[0], smp.dydt[0]});

    if (res.stop == num::OdeStop::event) {
        traj.termination = res.back().y[0] <= 0.5 ? Termination::hit_s0 : Termination::hit_s1;
    } else if (res.stop == num::OdeStop::max_steps) {
        traj.termination = Termination::max_steps;
    } else {
        traj.termination = Termination::reached_c_target;
        if (forward && target <= c_lo + 2 * collar) {
            // Landing at the far line: flag convergence into the sink if the
            // endpoint matches the upper critical point there.
            for (const auto& p : critical_points(sys))
                if (p.c == c_lo && p.kind == CriticalKind::sink &&
                    std::abs(p.s - traj.end_s()) < 1e-5)
                    traj.termination = Termination::entered_sink;
        }
    }
    return traj;
}

} // namespace detail

/// Integrates the invariant manifold of a saddle from an eigenvector offset
/// until c reaches c_target or the trajectory leaves the saturation range.
/// With richardson_check the launch is repeated at half the offset and must
/// reproduce the endpoint to 1e-8; a launch that fails refinement is returned
/// flagged rather than discarded, since bisection probes only need its sign.
inline ManifoldTrajectory launch_manifold(const TravellingWaveSystem& sys,
                                          const CriticalPoint& saddle, ManifoldDirection dir,
                                          double c_target, const LaunchOptions& opt = {}) {
    auto first = detail::launch_once(sys, saddle, dir, c_target, opt.offset, opt.max_steps);
    if (!opt.richardson_check) return first;
    auto halved = detail::launch_once(sys, saddle, dir, c_target, 0.5 * opt.offset, opt.max_steps);
    if (first.termination == Termination::reached_c_target &&
        halved.termination == Termination::reached_c_target) {
        double diff = std::abs(first.end_s() - halved.end_s());
        if (diff >= 1e-8) {
            auto quartered =
                detail::launch_once(sys, saddle, dir, c_target, 0.25 * opt.offset, opt.max_steps);
            if (quartered.termination == Termination::reached_c_target &&
                std::abs(halved.end_s() - quartered.end_s()) < 1e-8)
                return quartered;
            quartered.offset_converged = false;
            return quartered;
        }
    }
    return halved;
}

namespace detail {

struct ManifoldPair {
    CriticalPoint u2m;             // origin saddle on the c_minus line
    CriticalPoint u1p;             // target saddle on the c_plus line
    ManifoldTrajectory from_minus; // unstable manifold of u2_minus
    ManifoldTrajectory into_plus;  // stable manifold of u1_plus
    double mismatch = 0;           // saturated to +-1 on early exits
    bool saturated = false;
};

inline const CriticalPoint& require_point(const std::vector<CriticalPoint>& pts, CriticalLabel l,
                                          const char* what) {
    if (const CriticalPoint* p = find_point(pts, l)) return *p;
    throw solver_error(std::string("connection solver: missing critical point ") + what);
}

inline ManifoldPair shoot(const TravellingWaveSystem& sys, double c0, const LaunchOptions& opt) {
    auto pts = critical_points(sys);
    const auto& u2m = require_point(pts, CriticalLabel::u2_minus, "u2_minus");
    const auto& u1p = require_point(pts, CriticalLabel::u1_plus, "u1_plus");

    ManifoldPair pair;
    pair.u2m = u2m;
    pair.u1p = u1p;
    pair.from_minus = launch_manifold(sys, u2m, ManifoldDirection::unstable_forward, c0, opt);
    if (pair.from_minus.termination == Termination::hit_s0 ||
        pair.from_minus.termination == Termination::hit_s1) {
        pair.saturated = true;
        pair.mismatch = pair.from_minus.termination == Termination::hit_s0 ? -1.0 : 1.0;
        return pair;
    }
    pair.into_plus = launch_manifold(sys, u1p, ManifoldDirection::stable_backward, c0, opt);
    if (pair.into_plus.termination == Termination::hit_s1 ||
        pair.into_plus.termination == Termination::hit_s0) {
        pair.saturated = true;
        pair.mismatch = pair.into_plus.termination == Termination::hit_s1 ? -1.0 : 1.0;
        return pair;
    }
    pair.mismatch = pair.from_minus.end_s() - pair.into_plus.end_s();
    return pair;
}

} // namespace detail

/// Signed distance s_from_minus(c0) - s_into_plus(c0) between the manifolds,
/// positive when the unstable manifold passes above the stable one. Early
/// exits from the strip saturate the value to +-1 so bisection stays defined.
inline double connection_mismatch(const ModelSet& model, double v, double kappa, double c0,
                                  SystemKind kind = SystemKind::non_equilibrium_adsorption) {
    TravellingWaveSystem sys(model, v, kappa, kind);
    if (!(c0 > model.c_plus && c0 < model.c_minus))
        throw domain_error("connection_mismatch: c0 must lie strictly between c_plus and c_minus");
    return detail::shoot(sys, c0, {}).mismatch;
}

/// A solved saddle-saddle connection. The trajectory runs from the c_minus
/// side to the c_plus side (c decreasing), the two manifold halves merged at
/// the matching concentration c0.
struct ConnectionResult {
    double v = 0;
    double kappa = 0;
    double s_minus = 0; // saturation of u2_minus(v)
    double s_plus = 0;  // saturation of u1_plus(v)
    CriticalPoint from; // u2_minus
    CriticalPoint to;   // u1_plus
    std::vector<TrajectorySample> trajectory;
    double mismatch = 0;
    double c0 = 0;
    SystemKind kind = SystemKind::non_equilibrium_adsorption;
    bool at_window_boundary = false;

    /// s(c) along the connection; linear eigen-extension beyond the samples.
    double s_at(double c) const {
        if (trajectory.size() < 2) return s_minus;
        if (c >= trajectory.front().c) {
            double slope = eig_slope(from);
            return s_minus + slope * (c - from.c);
        }
        if (c <= trajectory.back().c) {
            double slope = eig_slope(to);
            return s_plus + slope * (c - to.c);
        }
        auto it = std::lower_bound(trajectory.begin(), trajectory.end(), c,
                                   [](const TrajectorySample& a, double x) { return a.c > x; });
        const auto& b = *it;
        const auto& a = *(it - 1);
        return num::hermite(c, a.c, b.c, a.s, b.s, a.dsdc, b.dsdc);
    }

    static double eig_slope(const CriticalPoint& p) {
        return std::abs(p.ev_c[1]) > 1e-14 ? p.ev_c[0] / p.ev_c[1] : 0.0;
    }
};

namespace detail {

inline ConnectionResult assemble_connection(const TravellingWaveSystem& sys, double c0,
                                            const ManifoldPair& pair, double mismatch) {
    ConnectionResult r;
    r.v = sys.v;
    r.kappa = sys.kappa;
    r.kind = sys.kind;
    r.c0 = c0;
    r.from = pair.u2m;
    r.to = pair.u1p;
    r.s_minus = r.from.s;
    r.s_plus = r.to.s;
    r.mismatch = mismatch;
    // Merge: unstable half from c_minus down to c0, then the stable half
    // (recorded with c increasing) reversed, continuing down to c_plus.
    r.trajectory = pair.from_minus.samples;
    for (auto it = pair.into_plus.samples.rbegin(); it != pair.into_plus.samples.rend(); ++it) {
        if (!r.trajectory.empty() && it->c >= r.trajectory.back().c - 1e-15) continue;
        r.trajectory.push_back(*it);
    }
    return r;
}

} // namespace detail

/// Unique dissipation ratio kappa(v) of the saddle-saddle connection at a
/// Type II velocity: brackets by geometric expansion from kappa = 1, then
/// bisects on the monotone mismatch to relative width 1e-10.
inline ConnectionResult find_kappa_for_v(const ModelSet& model, double v,
                                         SystemKind kind = SystemKind::non_equilibrium_adsorption,
                                         double c0_hint = -1) {
    const double c0 =
        c0_hint > 0 ? c0_hint : 0.5 * (model.c_plus + model.c_minus);
    LaunchOptions opt;
    auto mismatch_at = [&](double kappa) {
        TravellingWaveSystem sys(model, v, kappa, kind);
        return detail::shoot(sys, c0, opt).mismatch;
    };

    // Mismatch decreases in kappa: small kappa leaves the unstable manifold
    // above the stable one, large kappa drops it below.
    double k_lo = 1.0, k_hi = 1.0;
    double m0 = mismatch_at(1.0);
    if (m0 > 0) {
        while (m0 > 0) {
            k_lo = k_hi;
            k_hi *= 4.0;
            if (k_hi > 1e12)
                throw solver_error("find_kappa_for_v: no sign change up to kappa = 1e12");
            m0 = mismatch_at(k_hi);
        }
    } else if (m0 < 0) {
        while (m0 < 0) {
            k_hi = k_lo;
            k_lo /= 4.0;
            if (k_lo < 1e-12)
                throw solver_error("find_kappa_for_v: no sign change down to kappa = 1e-12");
            m0 = mismatch_at(k_lo);
        }
    }
    double kappa = num::bisect_geometric(mismatch_at, k_lo, k_hi, tols().bisect_rel);

    TravellingWaveSystem sys(model, v, kappa, kind);
    auto pair = detail::shoot(sys, c0, opt);
    if (!pair.from_minus.offset_converged ||
        (!pair.saturated && !pair.into_plus.offset_converged))
        throw solver_error("find_kappa_for_v: solved connection failed offset refinement");
    return detail::assemble_connection(sys, c0, pair, pair.mismatch);
}

/// kappa(v) limit as v approaches v_max from inside the window; relevant for
/// Type II-IV windows, identically zero for Type II-III.
inline double kappa_crit(const ModelSet& model, const VelocityWindow& w,
                         SystemKind kind = SystemKind::non_equilibrium_adsorption) {
    if (w.v_max_kind == WindowKind::ii_iii) return 0.0;
    const double width = w.v_max - w.v_min;
    const double h = 1e-8 * width;
    // Richardson on v_max - 2^{-k} h: kappa is near-affine in v this close.
    double k1 = find_kappa_for_v(model, w.v_max - h, kind).kappa;
    double k2 = find_kappa_for_v(model, w.v_max - 2 * h, kind).kappa;
    return std::max(0.0, 2.0 * k1 - k2);
}

/// Admissible shock speed at a fixed dissipation ratio: bisects the monotone
/// map v -> kappa(v) - kappa. For Type II-IV windows and kappa <= kappa_crit
/// the speed saturates at v_max; such connections are limit-extrapolated and
/// flagged at_window_boundary.
inline ConnectionResult find_v_for_kappa(const ModelSet& model, double kappa,
                                         SystemKind kind = SystemKind::non_equilibrium_adsorption) {
    if (!(kappa > 0)) throw domain_error("find_v_for_kappa: kappa must be positive");
    const auto w = velocity_window(model);
    const double width = w.v_max - w.v_min;

    if (w.v_max_kind == WindowKind::ii_iv) {
        double kc = kappa_crit(model, w, kind);
        if (kappa <= kc) {
            const double v_eps = w.v_max - 1e-8 * width;
            auto r = find_kappa_for_v(model, v_eps, kind);
            TravellingWaveSystem sys(model, v_eps, kappa, kind);
            auto pair = detail::shoot(sys, r.c0, {});
            auto out = detail::assemble_connection(sys, r.c0, pair, pair.mismatch);
            out.v = w.v_max;
            out.at_window_boundary = true;
            // Endpoint saturations from the exact v_max critical points.
            TravellingWaveSystem limit(model, w.v_max, kappa, kind);
            double sm = -1, sp = 2;
            for (const auto& p : critical_points(limit)) {
                if (p.c == model.c_minus) sm = std::max(sm, p.s);
                if (p.c == model.c_plus) sp = std::min(sp, p.s);
            }
            if (sm >= 0) out.s_minus = sm;
            if (sp <= 1) out.s_plus = sp;
            return out;
        }
    }

    auto kappa_of = [&](double v) { return find_kappa_for_v(model, v, kind).kappa; };

    // kappa(v) decreases; walk the bracket ends toward the window edges until
    // they straddle the requested ratio, backing off where kappa(v) leaves the
    // solvable range.
    double v_lo = w.v_min + 0.01 * width;
    double k_at_lo = kappa_of(v_lo);
    for (int tries = 0; k_at_lo < kappa && tries < 6; ++tries) {
        double cand = w.v_min + (v_lo - w.v_min) / 16.0;
        try {
            k_at_lo = kappa_of(cand);
            v_lo = cand;
        } catch (const solver_error&) {
            break;
        }
    }
    if (k_at_lo < kappa)
        throw solver_error("find_v_for_kappa: kappa exceeds the computable range near v_min");
    double v_hi = w.v_max - 0.01 * width;
    double k_at_hi = kappa_of(v_hi);
    for (int tries = 0; k_at_hi > kappa && tries < 5; ++tries) {
        double cand = w.v_max - (w.v_max - v_hi) / 16.0;
        try {
            k_at_hi = kappa_of(cand);
            v_hi = cand;
        } catch (const solver_error&) {
            break;
        }
    }
    if (k_at_hi > kappa)
        throw solver_error("find_v_for_kappa: kappa below the computable range near v_max");

    double a = v_lo, b = v_hi;
    while ((b - a) / std::max(1.0, std::abs(b)) > tols().bisect_rel) {
        double mid = 0.5 * (a + b);
        if (kappa_of(mid) > kappa)
            a = mid;
        else
            b = mid;
    }
    double v = 0.5 * (a + b);
    auto result = find_kappa_for_v(model, v, kind);
    result.kappa = kappa; // report the requested ratio, solved to bisection width
    return result;
}

struct CurveSample {
    double v = 0;
    double kappa = 0;
    double s_minus = 0;
    double s_plus = 0;
    double rh_residual = 0;    // max Rankine-Hugoniot residual of the shock
    double eq_residual = 0;    // chord integral identity residual
};

struct VKappaCurve {
    std::vector<CurveSample> samples; // ascending in v
    double kappa_crit = 0;
    VelocityWindow window;
};

enum class SweepSpacing { uniform_in_v, log_in_kappa };

/// Residual of the integral identity along a solved connection:
/// s_minus - s_plus - kappa * integral of the slope kernel over (c_plus, c_minus).
inline double integral_identity_residual(const ModelSet& model, const ConnectionResult& conn) {
    const auto chord = chord_coefficients(model);
    const double d1 = chord.d1, d2 = chord.d2;
    const double v = conn.v;
    const double h = conn.kind == SystemKind::non_equilibrium_adsorption ? 1.0 / (v * d1) : v;
    auto kernel = [&](double c) {
        double s = conn.s_at(c);
        double numer = model.flux.value(s, c) - v * (s + d1);
        double denom = model.capillarity.value(s, c) *
                       (d1 * c - d2 - model.adsorption.value(c)) * h;
        return numer / denom;
    };
    // Quadrature nodes: the trajectory samples extended by the exact saddle
    // endpoints (the kernel limit there is the eigen-direction slope).
    std::vector<double> cs;
    cs.push_back(model.c_plus + 1e-13);
    for (auto it = conn.trajectory.rbegin(); it != conn.trajectory.rend(); ++it)
        if (cs.empty() || it->c > cs.back() + 1e-14) cs.push_back(it->c);
    cs.push_back(model.c_minus - 1e-13);
    double integral = 0;
    for (std::size_t i = 0; i + 1 < cs.size(); ++i)
        integral += num::gauss5(kernel, cs[i], cs[i + 1]);
    return (conn.s_minus - conn.s_plus) - conn.kappa * integral;
}

/// Rankine-Hugoniot residuals of the c-shock candidate (both components).
inline std::pair<double, double> rh_residuals(const ModelSet& model, double v, double s_minus,
                                              double s_plus) {
    const double cm = model.c_minus, cp = model.c_plus;
    double fm = model.flux.value(s_minus, cm);
    double fp = model.flux.value(s_plus, cp);
    double r1 = v * (s_minus - s_plus) - (fm - fp);
    double r2 = v * ((cm * s_minus + model.adsorption.value(cm)) -
                     (cp * s_plus + model.adsorption.value(cp))) -
                (cm * fm - cp * fp);
    return {r1, r2};
}

/// Sweeps the v-kappa connection curve over the Type II window. Verifies
/// strict monotonicity of the sampled pairs and evaluates the integral
/// identity on every sample.
inline VKappaCurve sweep_curve(const ModelSet& model, std::size_t n,
                               SweepSpacing spacing = SweepSpacing::uniform_in_v,
                               SystemKind kind = SystemKind::non_equilibrium_adsorption,
                               unsigned jobs = 1) {
    if (n < 2) throw domain_error("sweep_curve: need at least two samples");
    VKappaCurve curve;
    curve.window = velocity_window(model);
    const double W = curve.window.v_max - curve.window.v_min;

    std::vector<ConnectionResult> results(n);
    if (spacing == SweepSpacing::uniform_in_v) {
        parallel_for(n, jobs, [&](std::size_t i) {
            double v = curve.window.v_min + W * static_cast<double>(i + 1) / static_cast<double>(n + 1);
            results[i] = find_kappa_for_v(model, v, kind);
        });
    } else {
        double v_lo = curve.window.v_min + W / static_cast<double>(n + 1);
        double v_hi = curve.window.v_max - W / static_cast<double>(n + 1);
        double k_hi = find_kappa_for_v(model, v_lo, kind).kappa;
        double k_lo = find_kappa_for_v(model, v_hi, kind).kappa;
        parallel_for(n, jobs, [&](std::size_t i) {
            double t = static_cast<double>(i) / static_cast<double>(n - 1);
            double kappa = k_hi * std::pow(k_lo / k_hi, t);
            results[i] = find_v_for_kappa(model, kappa, kind);
        });
        std::sort(results.begin(), results.end(),
                  [](const ConnectionResult& a, const ConnectionResult& b) { return a.v < b.v; });
    }

    curve.samples.resize(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        const auto& r = results[i];
        auto [r1, r2] = rh_residuals(model, r.v, r.s_minus, r.s_plus);
        curve.samples[i] = {r.v, r.kappa, r.s_minus, r.s_plus,
                            std::max(std::abs(r1), std::abs(r2)),
                            integral_identity_residual(model, r)};
    });

    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        const auto& a = curve.samples[i];
        const auto& b = curve.samples[i + 1];
        if (!(a.v < b.v) || b.kappa > a.kappa * (1.0 + 1e-9))
            throw solver_error("sweep_curve: sampled v-kappa pairs are not strictly monotone");
    }
    curve.kappa_crit = kappa_crit(model, curve.window, kind);
    return curve;
}

} // namespace chemflood
