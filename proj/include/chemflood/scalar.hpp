#pragma once

// Scalar conservation-law solver at fixed concentration: concave/convex
// envelopes of the flux built by a monotone-chain hull with root-polished
// tangency points, and the wave fans they induce.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "chemflood/models.hpp"

namespace chemflood {

enum class SegmentKind { coincide, chord };

/// Envelope of a flux section on [s_lo, s_hi]: the smallest concave majorant
/// (upper = true) or largest convex minorant. Segments either coincide with
/// the function or are straight chords between tangency points; the slope map
/// g drives the wave fan.
struct EnvelopeResult {
    std::vector<double> breakpoints;  // ascending; first = s_lo, last = s_hi
    std::vector<double> bp_values;    // f at the breakpoints
    std::vector<SegmentKind> kinds;   // one per interval
    std::function<double(double)> f;  // section and its derivative
    std::function<double(double)> fs;
    bool upper = true;

    std::size_t segment_of(double s) const {
        std::size_t i =
            std::upper_bound(breakpoints.begin(), breakpoints.end(), s) - breakpoints.begin();
        return std::clamp<std::size_t>(i, 1, breakpoints.size() - 1) - 1;
    }

    double value(double s) const {
        std::size_t i = segment_of(s);
        if (kinds[i] == SegmentKind::coincide) return f(s);
        double a = breakpoints[i], b = breakpoints[i + 1];
        double t = (s - a) / (b - a);
        return (1 - t) * bp_values[i] + t * bp_values[i + 1];
    }

    /// Envelope slope g(s): f_s on coincidence segments, chord slope on chords.
    double slope(double s) const {
        std::size_t i = segment_of(s);
        if (kinds[i] == SegmentKind::coincide) return fs(s);
        return (bp_values[i + 1] - bp_values[i]) / (breakpoints[i + 1] - breakpoints[i]);
    }
};

namespace detail {

inline EnvelopeResult hull_envelope(std::function<double(double)> f,
                                    std::function<double(double)> fs, double s_lo, double s_hi,
                                    std::size_t grid_n, bool upper) {
    if (!(s_lo < s_hi)) throw domain_error("envelope: need s_lo < s_hi");
    const double sgn = upper ? 1.0 : -1.0;
    auto xs = linspace(s_lo, s_hi, grid_n);
    std::vector<double> ys(grid_n);
    for (std::size_t i = 0; i < grid_n; ++i) ys[i] = sgn * f(xs[i]);

    // Monotone chain, upper hull: keep clockwise turns only.
    std::vector<std::size_t> hull;
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
        return (xs[a] - xs[o]) * (ys[b] - ys[o]) - (ys[a] - ys[o]) * (xs[b] - xs[o]);
    };
    for (std::size_t i = 0; i < grid_n; ++i) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) >= 0)
            hull.pop_back();
        hull.push_back(i);
    }

    // Classify hull edges: adjacent grid indices form coincidence runs, longer
    // jumps are chords.
    std::vector<double> bps;
    std::vector<SegmentKind> kinds;
    bps.push_back(xs[hull.front()]);
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        bool adjacent = hull[k + 1] == hull[k] + 1;
        SegmentKind kind = adjacent ? SegmentKind::coincide : SegmentKind::chord;
        if (!kinds.empty() && kinds.back() == kind && kind == SegmentKind::coincide) {
            bps.back() = xs[hull[k + 1]];
        } else {
            kinds.push_back(kind);
            bps.push_back(xs[hull[k + 1]]);
        }
    }

    // Polish chord tangencies: an interior chord endpoint adjoining a
    // coincidence run satisfies f_s(x) = chord slope; alternate bisections of
    // the tangency condition from each fixed far endpoint.
    const double h = (s_hi - s_lo) / static_cast<double>(grid_n - 1);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (kinds[i] != SegmentKind::chord) continue;
        bool tang_lo = bps[i] > s_lo + 1e-15 &&
                       (i == 0 || kinds[i - 1] == SegmentKind::coincide);
        bool tang_hi = bps[i + 1] < s_hi - 1e-15 &&
                       (i + 1 == kinds.size() || kinds[i + 1] == SegmentKind::coincide);
        auto refine = [&](double x, double other) {
            // Tangency from the fixed point (other, f(other)).
            auto g = [&](double t) {
                return sgn * fs(t) - (sgn * f(t) - sgn * f(other)) / (t - other);
            };
            double lo = std::max(s_lo, x - 2 * h);
            double hi = std::min(s_hi, x + 2 * h);
            if (std::abs(other - x) < 4 * h) return x; // degenerate short chord
            double glo = g(lo), ghi = g(hi);
            if ((glo > 0) == (ghi > 0)) return x;
            return num::bisect(g, lo, hi, 1e-13);
        };
        for (int pass = 0; pass < 30; ++pass) {
            double moved = 0;
            if (tang_lo) {
                double nx = refine(bps[i], bps[i + 1]);
                moved = std::max(moved, std::abs(nx - bps[i]));
                bps[i] = nx;
            }
            if (tang_hi) {
                double nx = refine(bps[i + 1], bps[i]);
                moved = std::max(moved, std::abs(nx - bps[i + 1]));
                bps[i + 1] = nx;
            }
            if (moved < 1e-13) break;
        }
    }

    EnvelopeResult env;
    env.upper = upper;
    env.f = std::move(f);
    env.fs = std::move(fs);
    env.breakpoints = std::move(bps);
    env.kinds = std::move(kinds);
    env.bp_values.resize(env.breakpoints.size());
    for (std::size_t i = 0; i < env.breakpoints.size(); ++i)
        env.bp_values[i] = env.f(env.breakpoints[i]);
    return env;
}

} // namespace detail

/// Smallest concave majorant of f(.,c) on [s_lo, s_hi].
inline EnvelopeResult upper_concave_envelope(const FluxModel& model, double c, double s_lo,
                                             double s_hi, std::size_t grid_n = 4096) {
    return detail::hull_envelope([&model, c](double s) { return model.value(s, c); },
                                 [&model, c](double s) { return model.ds(s, c); }, s_lo, s_hi,
                                 grid_n, true);
}

/// Largest convex minorant (mirror construction).
inline EnvelopeResult lower_convex_envelope(const FluxModel& model, double c, double s_lo,
                                            double s_hi, std::size_t grid_n = 4096) {
    return detail::hull_envelope([&model, c](double s) { return model.value(s, c); },
                                 [&model, c](double s) { return model.ds(s, c); }, s_lo, s_hi,
                                 grid_n, false);
}

/// Envelope of arbitrary section callables (used by idempotence checks).
inline EnvelopeResult envelope_of(std::function<double(double)> f,
                                  std::function<double(double)> fs, double s_lo, double s_hi,
                                  std::size_t grid_n = 4096, bool upper = true) {
    return detail::hull_envelope(std::move(f), std::move(fs), s_lo, s_hi, grid_n, upper);
}

struct FanElement {
    enum class Kind { rarefaction, shock };
    Kind kind = Kind::shock;
    double s_from = 0; // traversal order: left state first
    double s_to = 0;
    double v_from = 0; // edge speeds; equal for a shock
    double v_to = 0;
};

/// Self-similar solution of the fixed-concentration Riemann problem: ordered
/// rarefaction/shock elements with non-decreasing speeds.
struct ScalarFan {
    double c = 0;
    double s_left = 0;
    double s_right = 0;
    std::vector<FanElement> elements;
    double v_initial = 0;
    double v_final = 0;
    FluxModel flux;

    bool empty() const { return elements.empty(); }

    /// Saturation at similarity coordinate xi.
    double value(double xi) const {
        if (empty()) return s_left;
        if (xi <= v_initial) return s_left;
        if (xi >= v_final) return s_right;
        for (const auto& e : elements) {
            if (xi < e.v_from) return e.s_from; // constant plateau before e
            if (xi <= e.v_to) {
                if (e.kind == FanElement::Kind::shock) return xi < e.v_from ? e.s_from : e.s_to;
                // Invert f_s(s,c) = xi on the rarefaction range (monotone there).
                double a = e.s_from, b = e.s_to;
                auto g = [&](double s) { return flux.ds(s, c) - xi; };
                double ga = g(a);
                if ((ga > 0) == (g(b) > 0)) return std::abs(ga) < std::abs(g(b)) ? a : b;
                return num::bisect(g, std::min(a, b), std::max(a, b), 1e-12);
            }
        }
        return s_right;
    }
};

/// Fan of the scalar Riemann problem at constant concentration: decreasing
/// data uses the upper concave envelope, increasing data the convex mirror.
/// Equal states yield an empty fan (flagged, speeds undefined).
inline ScalarFan solve_scalar_riemann(const FluxModel& model, double c, double sL, double sR,
                                      std::size_t grid_n = 4096) {
    ScalarFan fan;
    fan.c = c;
    fan.s_left = sL;
    fan.s_right = sR;
    fan.flux = model;
    if (std::abs(sL - sR) < 1e-14) return fan;

    const bool decreasing = sL > sR;
    auto env = decreasing ? upper_concave_envelope(model, c, sR, sL, grid_n)
                          : lower_convex_envelope(model, c, sL, sR, grid_n);

    const auto& bp = env.breakpoints;
    const std::size_t nseg = env.kinds.size();
    for (std::size_t k = 0; k < nseg; ++k) {
        // Traversal from the left state: decreasing data walks segments from
        // the top of the interval downwards.
        std::size_t i = decreasing ? nseg - 1 - k : k;
        double a = bp[i], b = bp[i + 1];
        FanElement e;
        if (env.kinds[i] == SegmentKind::coincide) {
            e.kind = FanElement::Kind::rarefaction;
            e.s_from = decreasing ? b : a;
            e.s_to = decreasing ? a : b;
            e.v_from = model.ds(e.s_from, c);
            e.v_to = model.ds(e.s_to, c);
            if (std::abs(e.s_from - e.s_to) < 1e-13) continue;
        } else {
            e.kind = FanElement::Kind::shock;
            e.s_from = decreasing ? b : a;
            e.s_to = decreasing ? a : b;
            double sigma = (env.bp_values[i + 1] - env.bp_values[i]) / (b - a);
            e.v_from = e.v_to = sigma;
        }
        fan.elements.push_back(e);
    }
    if (fan.elements.empty()) return fan;
    fan.v_initial = fan.elements.front().v_from;
    fan.v_final = fan.elements.back().v_to;
    return fan;
}

enum class FanSide { initial, final };

/// Edge speed of a non-empty fan.
inline double edge_speed(const ScalarFan& fan, FanSide side) {
    if (fan.empty()) throw solver_error("edge_speed: fan is empty");
    return side == FanSide::initial ? fan.v_initial : fan.v_final;
}

} // namespace chemflood
