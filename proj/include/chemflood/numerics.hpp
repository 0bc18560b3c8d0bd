#pragma once

// Small numerical toolbox: root bracketing/bisection, golden-section
// minimization, finite differences, an adaptive embedded Runge-Kutta pair,
// Gauss-Legendre quadrature and monotone cubic interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "chemflood/common.hpp"

namespace chemflood::num {

/// Bisection on [a,b] assuming f(a) and f(b) have opposite signs.
/// Returns the midpoint of the final bracket of width <= xtol.
template <typename F>
double bisect(F&& f, double a, double b, double xtol) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if ((fa > 0) == (fb > 0)) throw solver_error("bisect: endpoints do not bracket a root");
    for (int it = 0; it < 300 && (b - a) > xtol; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Geometric bisection for positive quantities spanning many decades.
/// Stops when b/a - 1 < rel. f must change sign between a and b.
template <typename F>
double bisect_geometric(F&& f, double a, double b, double rel) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if ((fa > 0) == (fb > 0)) throw solver_error("bisect_geometric: no sign change in bracket");
    for (int it = 0; it < 300 && (b / a - 1.0) > rel; ++it) {
        double m = std::sqrt(a * b);
        double fm = f(m);
        if (fm == 0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return std::sqrt(a * b);
}

/// Golden-section minimization of a unimodal function on [a,b].
template <typename F>
double golden_min(F&& f, double a, double b, double xtol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

/// Central finite difference clipped to [lo,hi]; one-sided within h of the ends.
template <typename F>
double fd_derivative(F&& f, double x, double h, double lo, double hi) {
    double xl = x - h;
    double xr = x + h;
    if (xl < lo) xl = lo;
    if (xr > hi) xr = hi;
    return (f(xr) - f(xl)) / (xr - xl);
}

/// Second derivative by a three-point stencil, shifted inward near the ends.
template <typename F>
double fd_second_derivative(F&& f, double x, double h, double lo, double hi) {
    double xc = std::clamp(x, lo + h, hi - h);
    return (f(xc + h) - 2.0 * f(xc) + f(xc - h)) / (h * h);
}

// ---------------------------------------------------------------------------
// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)).
// ---------------------------------------------------------------------------

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct OdeSample {
    double t;
    State<N> y;
    State<N> dydt;
};

enum class OdeStop { none, event, max_steps };

template <std::size_t N>
struct OdeResult {
    std::vector<OdeSample<N>> samples;
    OdeStop stop = OdeStop::none;
    const OdeSample<N>& back() const { return samples.back(); }
};

/// Integrates dy/dt = rhs(t,y) from t0 to t1 (either direction).
/// `event(t, y)` returning true stops integration after locating the event
/// time by bisection on a cubic Hermite dense output of the last step.
template <std::size_t N, typename Rhs, typename Event>
OdeResult<N> integrate(Rhs&& rhs, double t0, State<N> y0, double t1, double rtol, double atol,
                       Event&& event, std::size_t max_steps = 2'000'000) {
    // Dormand-Prince coefficients.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeResult<N> out;
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    double t = t0;
    State<N> y = y0;
    State<N> k1;
    rhs(t, y, k1);
    out.samples.push_back({t, y, k1});
    if (event(t, y)) {
        out.stop = OdeStop::event;
        return out;
    }

    double h = dir * std::max(1e-12, 1e-3 * std::abs(t1 - t0));
    auto err_norm = [&](const State<N>& ynew, const State<N>& yerr) {
        double e = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            e = std::max(e, std::abs(yerr[i]) / sc);
        }
        return e;
    };

    State<N> k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    for (std::size_t step = 0; step < max_steps; ++step) {
        if (dir * (t - t1) >= 0) return out;
        if (dir * (t + h - t1) > 0) h = t1 - t;

        auto stage = [&](const State<N>& base, std::initializer_list<std::pair<const State<N>*, double>> terms,
                         double frac, State<N>& k) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = base[i];
                for (auto& [kp, w] : terms) acc += h * w * (*kp)[i];
                ytmp[i] = acc;
            }
            rhs(t + frac * h, ytmp, k);
        };
        stage(y, {{&k1, a21}}, c2, k2);
        stage(y, {{&k1, a31}, {&k2, a32}}, c3, k3);
        stage(y, {{&k1, a41}, {&k2, a42}, {&k3, a43}}, c4, k4);
        stage(y, {{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}}, c5, k5);
        stage(y, {{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}}, 1.0, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);
        for (std::size_t i = 0; i < N; ++i)
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

        double err = err_norm(ynew, yerr);
        if (err <= 1.0) {
            double t_new = t + h;
            if (event(t_new, ynew)) {
                // Locate the event by bisection on the Hermite interpolant.
                double lo = 0.0, hi = 1.0;
                auto interp = [&](double th, State<N>& yi) {
                    double hh = t_new - t;
                    for (std::size_t i = 0; i < N; ++i) {
                        double d = y[i], dd = ynew[i];
                        double m0 = hh * k1[i], m1 = hh * k7[i];
                        double t2 = th * th, t3 = t2 * th;
                        yi[i] = (2 * t3 - 3 * t2 + 1) * d + (t3 - 2 * t2 + th) * m0 +
                                (-2 * t3 + 3 * t2) * dd + (t3 - t2) * m1;
                    }
                };
                State<N> yi;
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    interp(mid, yi);
                    if (event(t + mid * (t_new - t), yi))
                        hi = mid;
                    else
                        lo = mid;
                }
                interp(hi, yi);
                double te = t + hi * (t_new - t);
                State<N> ke;
                rhs(te, yi, ke);
                out.samples.push_back({te, yi, ke});
                out.stop = OdeStop::event;
                return out;
            }
            t = t_new;
            y = ynew;
            k1 = k7; // FSAL
            out.samples.push_back({t, y, k1});
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
        if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) {
            out.stop = OdeStop::max_steps;
            return out;
        }
    }
    out.stop = OdeStop::max_steps;
    return out;
}

template <std::size_t N, typename Rhs>
OdeResult<N> integrate(Rhs&& rhs, double t0, State<N> y0, double t1, double rtol, double atol) {
    return integrate<N>(std::forward<Rhs>(rhs), t0, y0, t1, rtol, atol,
                        [](double, const State<N>&) { return false; });
}

/// Cubic Hermite value on [x0,x1] given endpoint values and slopes.
inline double hermite(double x, double x0, double x1, double y0, double y1, double m0, double m1) {
    double h = x1 - x0;
    double u = (x - x0) / h;
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * m0 + (-2 * u3 + 3 * u2) * y1 +
           (u3 - u2) * h * m1;
}

/// 5-point Gauss-Legendre quadrature of f over [a,b].
template <typename F>
double gauss5(F&& f, double a, double b) {
    static constexpr double xs[5] = {-0.906179845938664, -0.5384693101056831, 0.0,
                                     0.5384693101056831, 0.906179845938664};
    static constexpr double ws[5] = {0.23692688505618908, 0.47862867049936647, 0.5688888888888889,
                                     0.47862867049936647, 0.23692688505618908};
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double acc = 0;
    for (int i = 0; i < 5; ++i) acc += ws[i] * f(mid + half * xs[i]);
    return acc * half;
}

/// Monotone cubic (Fritsch-Carlson) interpolant on a strictly increasing grid.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw domain_error("MonotoneCubic: need >= 2 matching nodes");
        m_.resize(n);
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double dx = x_[i + 1] - x_[i];
            if (dx <= 0) throw domain_error("MonotoneCubic: grid must be strictly increasing");
            d[i] = (y_[i + 1] - y_[i]) / dx;
        }
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            m_[i] = (d[i - 1] * d[i] <= 0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        // Fritsch-Carlson limiter keeps the interpolant monotone per interval.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0) {
                m_[i] = m_[i + 1] = 0;
                continue;
            }
            double a = m_[i] / d[i];
            double b = m_[i + 1] / d[i];
            double r = a * a + b * b;
            if (r > 9.0) {
                double s = 3.0 / std::sqrt(r);
                m_[i] = s * a * d[i];
                m_[i + 1] = s * b * d[i];
            }
        }
    }

    double operator()(double x) const { return eval<0>(x); }
    double derivative(double x) const { return eval<1>(x); }
    double second_derivative(double x) const { return eval<2>(x); }

    const std::vector<double>& nodes() const { return x_; }

private:
    template <int Order>
    double eval(double x) const {
        const std::size_t n = x_.size();
        std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
        i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
        double h = x_[i + 1] - x_[i];
        double u = (x - x_[i]) / h;
        double y0 = y_[i], y1 = y_[i + 1], m0 = m_[i] * h, m1 = m_[i + 1] * h;
        if constexpr (Order == 0) {
            double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 +
                   (u3 - u2) * m1;
        } else if constexpr (Order == 1) {
            double u2 = u * u;
            return ((6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * y1 +
                    (3 * u2 - 2 * u) * m1) /
                   h;
        } else {
            return ((12 * u - 6) * y0 + (6 * u - 4) * m0 + (-12 * u + 6) * y1 + (6 * u - 2) * m1) /
                   (h * h);
        }
    }

    std::vector<double> x_, y_, m_;
};

} // namespace chemflood::num
