#pragma once

// Travelling-wave dynamical systems for the two admissible regularizations,
// their critical points on the boundary concentration lines, phase-portrait
// classification, and the bifurcation velocities bounding the window in which
// a saddle-saddle connection can exist.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chemflood/models.hpp"

namespace chemflood {

enum class SystemKind { non_equilibrium_adsorption, capillary_diffusion };

inline const char* to_string(SystemKind k) {
    return k == SystemKind::non_equilibrium_adsorption ? "noneq" : "diff";
}

/// Planar ODE in the wave coordinate xi:
///   A(s,c) s_xi = f(s,c) - v (s + d1)
///   kappa c_xi  = h(v) (d1 c - d2 - a(c)),   h = 1/(v d1) or v
struct TravellingWaveSystem {
    ModelSet model;
    ChordCoefficients chord;
    double v;
    double kappa;
    SystemKind kind;

    TravellingWaveSystem(ModelSet m, double v_, double kappa_,
                         SystemKind kind_ = SystemKind::non_equilibrium_adsorption)
        : model(std::move(m)), chord(chord_coefficients(model)), v(v_), kappa(kappa_), kind(kind_) {
        if (!(v > 0)) throw domain_error("TravellingWaveSystem: v must be positive");
        if (!(kappa > 0)) throw domain_error("TravellingWaveSystem: kappa must be positive");
    }

    double line_residual(double s, double c) const {
        return model.flux.value(s, c) - v * (s + chord.d1);
    }

    double s_rate(double s, double c) const {
        return line_residual(s, c) / model.capillarity.value(s, c);
    }

    double h_factor() const {
        return kind == SystemKind::non_equilibrium_adsorption ? 1.0 / (v * chord.d1) : v;
    }

    /// c_xi depends on c alone; it is strictly negative on (c_plus, c_minus).
    double c_rate(double c) const {
        return h_factor() * (chord.d1 * c - chord.d2 - model.adsorption.value(c)) / kappa;
    }

    std::pair<double, double> rhs(double s, double c) const { return {s_rate(s, c), c_rate(c)}; }

    double slope(double s, double c) const { return s_rate(s, c) / c_rate(c); }
};

enum class CriticalKind { source, saddle, sink, saddle_node };

inline const char* to_string(CriticalKind k) {
    switch (k) {
        case CriticalKind::source: return "source";
        case CriticalKind::saddle: return "saddle";
        case CriticalKind::sink: return "sink";
        case CriticalKind::saddle_node: return "saddle-node";
    }
    return "?";
}

/// u1 is the lower-saturation intersection on its line, u2 the upper;
/// a coalesced double root carries the u1 label.
enum class CriticalLabel { u1_minus, u2_minus, u1_plus, u2_plus };

inline const char* to_string(CriticalLabel l) {
    switch (l) {
        case CriticalLabel::u1_minus: return "u1_minus";
        case CriticalLabel::u2_minus: return "u2_minus";
        case CriticalLabel::u1_plus: return "u1_plus";
        case CriticalLabel::u2_plus: return "u2_plus";
    }
    return "?";
}

struct CriticalPoint {
    double s = 0;
    double c = 0;
    CriticalLabel label = CriticalLabel::u1_minus;
    CriticalKind kind = CriticalKind::saddle;
    double lambda_s = 0;             // eigenvalue along (1,0)
    double lambda_c = 0;             // eigenvalue along ev_c
    std::array<double, 2> ev_c{0, 1}; // unit eigenvector with c-component
    bool eigen_degenerate = false;   // lambda_s == lambda_c to working precision
};

namespace detail {

/// Inflection point of f(.,c) in s, assuming the S-shape assumption.
inline double inflection_point(const FluxModel& flux, double c) {
    const int n = 96;
    double s_pos = -1; // last strictly positive sample
    for (int i = 0; i <= n; ++i) {
        double s = static_cast<double>(i) / n;
        if (i == 0) s = 1e-9;
        if (i == n) s = 1.0 - 1e-9;
        double cur = flux.dss(s, c);
        if (cur > 0) {
            s_pos = s;
        } else if (cur == 0 && s_pos >= 0) {
            return s;
        } else if (cur < 0 && s_pos >= 0) {
            return num::bisect([&](double x) { return flux.dss(x, c); }, s_pos, s, 1e-13);
        }
    }
    throw model_error("inflection_point: no sign change of f_ss in s (S-shape violated)");
}

/// Height of the interior hump of psi(s) = f(s,c) - v(s+d1) above zero,
/// together with its location. Negative height means the line clears the
/// flux curve for this concentration.
struct HumpTop {
    double height;
    double s;
};

inline HumpTop line_hump(const FluxModel& flux, double v, double d1, double c) {
    double si = inflection_point(flux, c);
    double fsi = flux.ds(si, c);
    if (fsi <= v) {
        // psi is non-increasing; its supremum sits at s = 0 and is negative.
        return {-v * d1, 0.0};
    }
    double s2 = num::bisect([&](double x) { return flux.ds(x, c) - v; }, si, 1.0, 1e-13);
    return {flux.f(s2, c) - v * (s2 + d1), s2};
}

struct LineRoots {
    std::vector<double> s;          // ascending
    std::vector<bool> double_root;  // per root
};

/// Roots of f(s,c) = v(s+d1) on [0,1] for one concentration line. Uses the
/// unimodal hump structure guaranteed by the S-shape: at most two roots,
/// a tangency counts as one double root.
inline LineRoots line_roots(const FluxModel& flux, double v, double d1, double c,
                            double psi_tol = 1e-12) {
    LineRoots out;
    auto psi = [&](double s) { return flux.value(s, c) - v * (s + d1); };
    const double border = psi(1.0);
    HumpTop top = line_hump(flux, v, d1, c);
    if (top.height < -psi_tol) return out; // line entirely above the curve
    if (std::abs(top.height) <= psi_tol) {
        out.s.push_back(top.s);
        out.double_root.push_back(true);
        return out;
    }
    // Lower root: psi(0) = -v d1 < 0 rises to the hump top.
    out.s.push_back(num::bisect(psi, 0.0, top.s, tols().root));
    out.double_root.push_back(false);
    if (border < -psi_tol) {
        out.s.push_back(num::bisect(psi, top.s, 1.0, tols().root));
        out.double_root.push_back(false);
    } else if (std::abs(border) <= psi_tol) {
        out.s.push_back(1.0); // upper intersection sits on the boundary
        out.double_root.push_back(false);
    }
    // border > 0: the line re-enters below the curve; single interior root.
    return out;
}

} // namespace detail

/// All critical points of the system on the lines c = c_plus, c = c_minus,
/// classified by the signs of the Jacobian eigenvalues. Throws model_error
/// if a line carries more than two roots.
inline std::vector<CriticalPoint> critical_points(const TravellingWaveSystem& sys) {
    std::vector<CriticalPoint> pts;
    const auto& m = sys.model;
    const double d1 = sys.chord.d1;
    for (int side = 0; side < 2; ++side) {
        const double c = side == 0 ? m.c_minus : m.c_plus;
        auto roots = detail::line_roots(m.flux, sys.v, d1, c);
        if (roots.s.size() > 2)
            throw model_error("critical_points: more than two roots on a concentration line");
        for (std::size_t i = 0; i < roots.s.size(); ++i) {
            CriticalPoint p;
            p.s = roots.s[i];
            p.c = c;
            double fsv = m.flux.ds(p.s, c) - sys.v;
            bool lower = fsv > 0; // u1 carries f_s > v
            if (roots.double_root[i]) lower = true;
            p.label = side == 0 ? (lower ? CriticalLabel::u1_minus : CriticalLabel::u2_minus)
                                : (lower ? CriticalLabel::u1_plus : CriticalLabel::u2_plus);
            double A = m.capillarity.value(p.s, c);
            p.lambda_s = fsv / A;
            p.lambda_c = sys.h_factor() * (d1 - m.adsorption.d(c)) / sys.kappa;
            double j12 = m.flux.dc(p.s, c) / A;
            double gap = p.lambda_c - p.lambda_s;
            if (std::abs(gap) < 1e-13 * (std::abs(p.lambda_c) + std::abs(p.lambda_s) + 1e-30)) {
                p.eigen_degenerate = true;
            } else {
                double ws = j12 / gap;
                double norm = std::hypot(ws, 1.0);
                p.ev_c = {ws / norm, 1.0 / norm};
            }
            if (roots.double_root[i] || std::abs(fsv) < tols().saddle_node) {
                p.kind = CriticalKind::saddle_node;
            } else if (p.lambda_s > 0 && p.lambda_c > 0) {
                p.kind = CriticalKind::source;
            } else if (p.lambda_s < 0 && p.lambda_c < 0) {
                p.kind = CriticalKind::sink;
            } else {
                p.kind = CriticalKind::saddle;
            }
            pts.push_back(p);
        }
    }
    return pts;
}

inline const CriticalPoint* find_point(const std::vector<CriticalPoint>& pts, CriticalLabel l) {
    for (const auto& p : pts)
        if (p.label == l) return &p;
    return nullptr;
}

enum class PortraitType {
    type_0,
    type_0_i,
    type_i,
    type_i_ii,
    type_ii,
    type_ii_iii,
    type_ii_iv,
    type_iii,
    type_iii_iv,
    type_iv
};

inline const char* to_string(PortraitType t) {
    switch (t) {
        case PortraitType::type_0: return "Type0";
        case PortraitType::type_0_i: return "Type0-I";
        case PortraitType::type_i: return "TypeI";
        case PortraitType::type_i_ii: return "TypeI-II";
        case PortraitType::type_ii: return "TypeII";
        case PortraitType::type_ii_iii: return "TypeII-III";
        case PortraitType::type_ii_iv: return "TypeII-IV";
        case PortraitType::type_iii: return "TypeIII";
        case PortraitType::type_iii_iv: return "TypeIII-IV";
        case PortraitType::type_iv: return "TypeIV";
    }
    return "?";
}

/// Position of a portrait in the evolution order as v grows.
inline int portrait_rank(PortraitType t) {
    switch (t) {
        case PortraitType::type_0: return 0;
        case PortraitType::type_0_i: return 1;
        case PortraitType::type_i: return 2;
        case PortraitType::type_i_ii: return 3;
        case PortraitType::type_ii: return 4;
        case PortraitType::type_ii_iii: return 5;
        case PortraitType::type_ii_iv: return 5;
        case PortraitType::type_iii: return 6;
        case PortraitType::type_iii_iv: return 7;
        case PortraitType::type_iv: return 8;
    }
    return -1;
}

struct PortraitReport {
    double v = 0;
    std::vector<CriticalPoint> points;
    PortraitType portrait = PortraitType::type_0;
    std::optional<std::pair<double, double>> gap; // (c1,c2) with no nullcline points
    double min_interior_margin = 0;               // min over c of the hump height
};

/// Classifies the phase portrait at the system's velocity by the root counts
/// of the flux nullcline per concentration. An interior concentration band
/// with no roots splits the nullcline into left/right branches (Type II/III);
/// a line losing both roots gives Type IV. Near-coincidences within tolerance
/// map to the intermediate boundary types.
inline PortraitReport classify_portrait(const TravellingWaveSystem& sys, std::size_t c_grid_n = 513) {
    constexpr double tol_h = 1e-9;  // hump-height tolerance
    constexpr double tol_s = 1e-8;  // branch-order tolerance in s
    const auto& m = sys.model;
    const double d1 = sys.chord.d1;

    PortraitReport rep;
    rep.v = sys.v;
    rep.points = critical_points(sys);

    const double border = m.flux.value(1.0, m.c_minus) - sys.v * (1.0 + d1);
    if (border > tol_h) {
        rep.portrait = PortraitType::type_0;
        rep.min_interior_margin = border;
        return rep;
    }
    if (border >= -tol_h) {
        rep.portrait = PortraitType::type_0_i;
        rep.min_interior_margin = border;
        return rep;
    }

    auto count_on = [&](double c) {
        int n = 0;
        bool sn = false;
        for (const auto& p : rep.points)
            if (p.c == c) {
                ++n;
                sn = sn || p.kind == CriticalKind::saddle_node;
            }
        return std::pair<int, bool>(n, sn);
    };
    auto [n_minus, sn_minus] = count_on(m.c_minus);
    auto [n_plus, sn_plus] = count_on(m.c_plus);
    if (n_minus == 0 || n_plus == 0) {
        rep.portrait = PortraitType::type_iv;
        rep.min_interior_margin =
            detail::line_hump(m.flux, sys.v, d1, n_minus == 0 ? m.c_minus : m.c_plus).height;
        return rep;
    }

    // Interior scan of the hump height M(c); sign changes bracket the gap.
    auto M = [&](double c) { return detail::line_hump(m.flux, sys.v, d1, c).height; };
    auto cs = linspace(m.c_plus, m.c_minus, c_grid_n);
    std::vector<double> h(c_grid_n);
    double min_h = 1e300;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < c_grid_n; ++i) {
        h[i] = M(cs[i]);
        if (h[i] < min_h) {
            min_h = h[i];
            argmin = i;
        }
    }
    // Refine the minimum between the neighbors of the coarse argmin.
    double c_at_min = cs[argmin];
    {
        double lo = cs[argmin > 0 ? argmin - 1 : 0];
        double hi = cs[std::min(argmin + 1, c_grid_n - 1)];
        double cref = num::golden_min(M, lo, hi, 1e-10);
        if (M(cref) < min_h) {
            min_h = M(cref);
            c_at_min = cref;
        }
    }
    rep.min_interior_margin = min_h;

    if (min_h > tol_h) {
        rep.portrait = PortraitType::type_i;
        return rep;
    }
    if (min_h >= -tol_h) {
        rep.portrait = PortraitType::type_i_ii;
        return rep;
    }

    // Locate the root-free band(s).
    std::vector<std::pair<double, double>> gaps;
    bool inside = false;
    double gap_lo = m.c_plus;
    auto edge = [&](std::size_t i) {
        // sign change between cs[i] and cs[i+1]
        return num::bisect(M, cs[i], cs[i + 1], 1e-12);
    };
    for (std::size_t i = 0; i + 1 < c_grid_n; ++i) {
        bool neg_l = h[i] < 0, neg_r = h[i + 1] < 0;
        if (!inside && !neg_l && neg_r) {
            inside = true;
            gap_lo = edge(i);
        } else if (inside && neg_l && !neg_r) {
            gaps.emplace_back(gap_lo, edge(i));
            inside = false;
        }
    }
    // Bands may touch the boundary lines when a branch coalesces there.
    {
        std::vector<std::pair<double, double>> merged;
        std::size_t i = 0;
        if (h[0] < 0) {
            double hi_edge = m.c_minus;
            for (std::size_t k = 0; k + 1 < c_grid_n; ++k)
                if (h[k] < 0 && h[k + 1] >= 0) {
                    hi_edge = edge(k);
                    break;
                }
            merged.emplace_back(m.c_plus, hi_edge);
        }
        for (; i < gaps.size(); ++i) merged.push_back(gaps[i]);
        if (h[c_grid_n - 1] < 0) {
            double lo_edge = m.c_plus;
            for (std::size_t k = c_grid_n - 1; k > 0; --k)
                if (h[k] < 0 && h[k - 1] >= 0) {
                    lo_edge = edge(k - 1);
                    break;
                }
            if (merged.empty() || merged.back().second < lo_edge)
                merged.emplace_back(lo_edge, m.c_minus);
        }
        gaps = std::move(merged);
    }
    if (gaps.size() > 1)
        throw model_error("classify_portrait: nullcline splits into more than two branches");
    if (gaps.empty()) {
        // Band thinner than the grid spacing: bracket it around the refined minimum.
        double lo = cs[argmin > 0 ? argmin - 1 : 0];
        double hi = cs[std::min(argmin + 1, c_grid_n - 1)];
        if (M(lo) > 0 && M(hi) > 0 && min_h < 0) {
            gaps.emplace_back(num::bisect(M, lo, c_at_min, 1e-12),
                              num::bisect(M, c_at_min, hi, 1e-12));
        } else {
            rep.portrait = PortraitType::type_i_ii;
            return rep;
        }
    }
    rep.gap = gaps.front();

    // Branch order: lowest root on c_plus vs highest root on c_minus.
    double s1p = 2, s2m = -1;
    for (const auto& p : rep.points) {
        if (p.c == m.c_plus) s1p = std::min(s1p, p.s);
        if (p.c == m.c_minus) s2m = std::max(s2m, p.s);
    }
    const bool order_eq = std::abs(s1p - s2m) <= tol_s;
    const bool order_ii = s1p < s2m;

    if (sn_minus || sn_plus) {
        // A coalescing branch; same-s tangencies (identical boundary curves)
        // are the degenerate limit of the crossing construction.
        rep.portrait = order_eq ? PortraitType::type_ii_iii
                                : (order_ii ? PortraitType::type_ii_iv : PortraitType::type_iii_iv);
        return rep;
    }
    rep.portrait = order_eq ? PortraitType::type_ii_iii
                            : (order_ii ? PortraitType::type_ii : PortraitType::type_iii);
    return rep;
}

struct TangentResult {
    double v; // slope of the tangent line from Q = (-d1, 0)
    double s; // tangency saturation on the concave branch
};

/// Slope of the tangent from Q = (-d1, 0) to f(.,c), i.e. the maximum of
/// f(s,c)/(s+d1). The tangency condition f_s (s+d1) = f has a unique root
/// beyond the inflection point.
inline TangentResult tangent_slope_from_q(const FluxModel& flux, double d1, double c) {
    double si = detail::inflection_point(flux, c);
    auto phi = [&](double s) { return flux.ds(s, c) * (s + d1) - flux.value(s, c); };
    if (!(phi(si) > 0))
        throw solver_error("tangent_slope_from_q: no tangency beyond the inflection point");
    double s = num::bisect(phi, si, 1.0, 1e-13);
    return {flux.value(s, c) / (s + d1), s};
}

enum class WindowKind { ii_iii, ii_iv };

inline const char* to_string(WindowKind k) { return k == WindowKind::ii_iii ? "II-III" : "II-IV"; }

struct VelocityWindow {
    double v_min = 0;
    double v_max = 0;
    WindowKind v_max_kind = WindowKind::ii_iii;
    double v_0i = 0;      // Type 0-I boundary: line through Q and (1,1)
    double c_at_vmin = 0; // concentration realizing the minimal tangent slope
};

/// Bifurcation velocities of the portrait sequence. v_min minimizes the
/// tangent slope from Q over the concentration family; v_max either passes
/// through the steepest crossing of the two boundary flux curves (Type II-III)
/// or tangentially grazes one of them (Type II-IV). Identical boundary curves
/// are the continuity limit of the crossing construction and map to II-III.
inline VelocityWindow velocity_window(const ModelSet& m) {
    VelocityWindow w;
    const auto chord = chord_coefficients(m);
    const double d1 = chord.d1;
    w.v_0i = 1.0 / (1.0 + d1);

    // Minimal tangent slope over c: coarse grid plus golden-section refinement.
    const std::size_t nc = 129;
    auto cs = linspace(m.c_plus, m.c_minus, nc);
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < nc; ++i) {
        double t = tangent_slope_from_q(m.flux, d1, cs[i]).v;
        if (t < best) {
            best = t;
            arg = i;
        }
    }
    auto tan_of = [&](double c) { return tangent_slope_from_q(m.flux, d1, c).v; };
    double lo = cs[arg > 0 ? arg - 1 : 0];
    double hi = cs[std::min(arg + 1, nc - 1)];
    w.c_at_vmin = num::golden_min(tan_of, lo, hi, 1e-10);
    w.v_min = std::min(best, tan_of(w.c_at_vmin));

    // Crossings of the two boundary flux curves (endpoints are always shared).
    auto delta = [&](double s) { return m.flux.value(s, m.c_minus) - m.flux.value(s, m.c_plus); };
    const std::size_t ns = 4097;
    double max_abs = 0;
    for (std::size_t i = 1; i + 1 < ns; ++i)
        max_abs = std::max(max_abs, std::abs(delta(static_cast<double>(i) / (ns - 1))));

    const double tan_minus = tangent_slope_from_q(m.flux, d1, m.c_minus).v;
    const double tan_plus = tangent_slope_from_q(m.flux, d1, m.c_plus).v;

    if (max_abs < 1e-12) {
        w.v_max = tan_minus;
        w.v_max_kind = WindowKind::ii_iii;
    } else {
        // Interior sign-change crossings, steepest line from Q first.
        std::vector<double> crossings;
        double prev_s = 1e-6, prev = delta(prev_s);
        for (std::size_t i = 1; i < ns; ++i) {
            double s = static_cast<double>(i) / (ns - 1);
            if (i + 1 == ns) s = 1.0 - 1e-6;
            double cur = delta(s);
            if ((prev > 0) != (cur > 0) && prev != 0)
                crossings.push_back(num::bisect(delta, prev_s, s, 1e-13));
            prev_s = s;
            prev = cur;
        }
        bool is_ii_iii = false;
        double v_cand = 0;
        if (!crossings.empty()) {
            double s2 = crossings.front();
            for (double s : crossings)
                if (m.flux.value(s, m.c_plus) / (s + d1) >
                    m.flux.value(s2, m.c_plus) / (s2 + d1))
                    s2 = s;
            v_cand = 0.5 * (m.flux.value(s2, m.c_minus) + m.flux.value(s2, m.c_plus)) / (s2 + d1);
            if (v_cand > w.v_min) {
                // Other intersections of the candidate line with each curve:
                // left of the crossing on the c_minus curve, right on c_plus.
                auto rm = detail::line_roots(m.flux, v_cand, d1, m.c_minus);
                auto rp = detail::line_roots(m.flux, v_cand, d1, m.c_plus);
                bool left_ok = false, right_ok = false;
                for (double r : rm.s) left_ok = left_ok || r < s2 - 1e-9;
                for (double r : rp.s) right_ok = right_ok || r > s2 + 1e-9;
                is_ii_iii = left_ok && right_ok;
            }
        }
        if (is_ii_iii) {
            w.v_max = v_cand;
            w.v_max_kind = WindowKind::ii_iii;
        } else {
            w.v_max = std::min(tan_minus, tan_plus);
            w.v_max_kind = WindowKind::ii_iv;
        }
    }

    if (!(w.v_0i < w.v_min && w.v_min < w.v_max))
        throw solver_error("velocity_window: empty Type II window (v_min >= v_max)");
    return w;
}

/// Points of the flux nullcline f(s,c) = v(s+d1) sampled per concentration,
/// for plotting. Branch 0 collects lower roots, branch 1 upper roots.
struct NullclineSamples {
    std::vector<std::array<double, 3>> rows; // (c, s, branch)
};

inline NullclineSamples sample_nullcline(const ModelSet& m, double v, std::size_t n_c = 257) {
    NullclineSamples out;
    const double d1 = chord_coefficients(m).d1;
    for (double c : linspace(m.c_plus, m.c_minus, n_c)) {
        auto roots = detail::line_roots(m.flux, v, d1, c);
        for (std::size_t i = 0; i < roots.s.size(); ++i)
            out.rows.push_back({c, roots.s[i], static_cast<double>(i)});
    }
    return out;
}

} // namespace chemflood
