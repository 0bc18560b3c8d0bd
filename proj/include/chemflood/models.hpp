#pragma once

// Physical model functions for the two-component flooding system: fractional
// flow f(s,c), adsorption a(c), capillary coefficient A(s,c), plus grid-based
// validation of the structural assumptions the wave analysis requires and the
// chord coefficients d1, d2 of the adsorption secant.

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chemflood/common.hpp"
#include "chemflood/numerics.hpp"

namespace chemflood {

using Real2Fn = std::function<double(double, double)>;
using Real1Fn = std::function<double(double)>;

/// Fractional flow f(s,c) on the unit square with optional analytic partials.
/// Missing partials fall back to finite differences with step fd_step,
/// one-sided within fd_step of the s-boundaries.
struct FluxModel {
    Real2Fn f;
    Real2Fn fs;  // df/ds, optional
    Real2Fn fc;  // df/dc, optional
    Real2Fn fss; // d2f/ds2, optional
    double fd_step = tols().fd_step;
    std::string name = "custom";

    double value(double s, double c) const { return f(s, c); }

    double ds(double s, double c) const {
        if (fs) return fs(s, c);
        return num::fd_derivative([&](double x) { return f(x, c); }, s, fd_step, 0.0, 1.0);
    }

    double dc(double s, double c) const {
        if (fc) return fc(s, c);
        return num::fd_derivative([&](double x) { return f(s, x); }, c, fd_step, 0.0, 1.0);
    }

    double dss(double s, double c) const {
        if (fss) return fss(s, c);
        return num::fd_second_derivative([&](double x) { return f(x, c); }, s, fd_step, 0.0, 1.0);
    }
};

/// Adsorption isotherm a(c), increasing and strictly concave on (0,1).
struct AdsorptionModel {
    Real1Fn a;
    Real1Fn da;  // optional
    Real1Fn dda; // optional
    double fd_step = tols().fd_step;
    std::string name = "custom";

    double value(double c) const { return a(c); }

    double d(double c) const {
        if (da) return da(c);
        return num::fd_derivative(a, c, fd_step, 0.0, 1.0);
    }

    double dd(double c) const {
        if (dda) return dda(c);
        return num::fd_second_derivative(a, c, fd_step, 0.0, 1.0);
    }
};

/// Capillary coefficient A(s,c), bounded and separated from zero.
struct CapillaryModel {
    Real2Fn A;
    double lo = 1.0;
    double hi = 1.0;
    std::string name = "constant";

    double value(double s, double c) const { return A(s, c); }
};

/// Complete problem data: model functions plus the Riemann concentrations.
struct ModelSet {
    FluxModel flux;
    AdsorptionModel adsorption;
    CapillaryModel capillarity;
    double c_minus = 1.0; // left-state concentration
    double c_plus = 0.0;  // right-state concentration
};

/// Coefficients of the affine chord L(c) = d1*c - d2 interpolating the
/// adsorption isotherm at c_plus and c_minus.
struct ChordCoefficients {
    double d1 = 0;
    double d2 = 0;
};

enum class FluxPartial { f, f_s, f_c, f_ss };

/// Range-checked evaluation of f or one of its partials.
inline double eval_flux(const FluxModel& m, double s, double c, FluxPartial which) {
    if (!(s >= 0.0 && s <= 1.0 && c >= 0.0 && c <= 1.0))
        throw domain_error("eval_flux: (s,c) outside the unit square");
    switch (which) {
        case FluxPartial::f: return m.value(s, c);
        case FluxPartial::f_s: return m.ds(s, c);
        case FluxPartial::f_c: return m.dc(s, c);
        case FluxPartial::f_ss: return m.dss(s, c);
    }
    throw domain_error("eval_flux: bad selector");
}

inline ChordCoefficients chord_coefficients(const ModelSet& m) {
    const double cm = m.c_minus, cp = m.c_plus;
    if (!(cm > cp)) throw model_error("chord_coefficients: requires c_minus > c_plus");
    const double am = m.adsorption.value(cm);
    const double ap = m.adsorption.value(cp);
    return {(am - ap) / (cm - cp), (cp * am - cm * ap) / (cm - cp)};
}

// ---------------------------------------------------------------------------
// Built-in models
// ---------------------------------------------------------------------------

/// Quadratic-ratio flux with concentration-dependent mobility mu(c).
inline FluxModel mobility_ratio_flux(Real1Fn mu, Real1Fn dmu, std::string name) {
    auto D = [mu](double s, double c) {
        double u = 1.0 - s;
        return s * s + mu(c) * u * u;
    };
    FluxModel fm;
    fm.f = [mu, D](double s, double c) { return s * s / D(s, c); };
    fm.fs = [mu, D](double s, double c) {
        double d = D(s, c);
        return 2.0 * mu(c) * s * (1.0 - s) / (d * d);
    };
    fm.fc = [mu, dmu, D](double s, double c) {
        double d = D(s, c);
        double u = 1.0 - s;
        return -dmu(c) * s * s * u * u / (d * d);
    };
    fm.fss = [mu, D](double s, double c) {
        double m = mu(c);
        double u = 1.0 - s;
        double d = D(s, c);
        double dDds = 2.0 * s - 2.0 * m * u;
        return 2.0 * m * ((1.0 - 2.0 * s) * d - 2.0 * s * u * dDds) / (d * d * d);
    };
    fm.name = std::move(name);
    return fm;
}

/// Non-monotone flux whose mobility returns to its c=0 value at c=1.
inline FluxModel boomerang_flux() {
    return mobility_ratio_flux([](double c) { return 1.0 + 4.0 * c * (1.0 - c); },
                               [](double c) { return 4.0 - 8.0 * c; }, "boomerang");
}

/// Monotone-in-c flux (violates the non-monotonicity assumption; used to
/// exercise validation failures).
inline FluxModel corey_flux() {
    return mobility_ratio_flux([](double c) { return 1.0 + c; }, [](double) { return 1.0; },
                               "corey");
}

/// Langmuir isotherm a(c) = m*c / (1 + b*c).
inline AdsorptionModel langmuir_adsorption(double m = 1.0, double b = 1.0) {
    AdsorptionModel am;
    am.a = [m, b](double c) { return m * c / (1.0 + b * c); };
    am.da = [m, b](double c) {
        double u = 1.0 + b * c;
        return m / (u * u);
    };
    am.dda = [m, b](double c) {
        double u = 1.0 + b * c;
        return -2.0 * m * b / (u * u * u);
    };
    am.name = "langmuir";
    return am;
}

/// Linear isotherm; fails the strict-concavity assumption.
inline AdsorptionModel linear_adsorption(double slope = 1.0) {
    AdsorptionModel am;
    am.a = [slope](double c) { return slope * c; };
    am.da = [slope](double) { return slope; };
    am.dda = [](double) { return 0.0; };
    am.name = "linear";
    return am;
}

inline CapillaryModel constant_capillarity(double value = 1.0) {
    if (!(value > 0)) throw model_error("constant_capillarity: value must be positive");
    CapillaryModel cm;
    cm.A = [value](double, double) { return value; };
    cm.lo = cm.hi = value;
    cm.name = "constant";
    return cm;
}

/// Affine A(s,c) = base + slope_s*s + slope_c*c; bounds from the corners.
inline CapillaryModel affine_capillarity(double base, double slope_s, double slope_c) {
    CapillaryModel cm;
    cm.A = [=](double s, double c) { return base + slope_s * s + slope_c * c; };
    cm.lo = base + std::min(0.0, slope_s) + std::min(0.0, slope_c);
    cm.hi = base + std::max(0.0, slope_s) + std::max(0.0, slope_c);
    cm.name = "affine";
    if (!(cm.lo > 0)) throw model_error("affine_capillarity: not separated from zero");
    return cm;
}

/// Reference model: boomerang flux, Langmuir adsorption, unit capillarity.
inline ModelSet boomerang_model(double c_minus = 1.0, double c_plus = 0.0) {
    return {boomerang_flux(), langmuir_adsorption(), constant_capillarity(), c_minus, c_plus};
}

/// Tabulated flux: monotone cubic in s per tabulated concentration row,
/// linear blending between rows in c.
inline FluxModel tabulated_flux(std::vector<double> s_nodes, std::vector<double> c_nodes,
                                std::vector<std::vector<double>> values) {
    if (c_nodes.size() != values.size() || c_nodes.size() < 2)
        throw domain_error("tabulated_flux: need one value row per c node (>= 2)");
    auto rows = std::make_shared<std::vector<num::MonotoneCubic>>();
    for (const auto& row : values) {
        if (row.size() != s_nodes.size()) throw domain_error("tabulated_flux: ragged value rows");
        rows->emplace_back(s_nodes, row);
    }
    auto cs = std::make_shared<std::vector<double>>(std::move(c_nodes));
    auto locate = [cs](double c) {
        std::size_t k = std::upper_bound(cs->begin(), cs->end(), c) - cs->begin();
        k = std::clamp<std::size_t>(k, 1, cs->size() - 1) - 1;
        double w = ((*cs)[k + 1] - (*cs)[k]);
        double t = std::clamp((c - (*cs)[k]) / w, 0.0, 1.0);
        return std::pair<std::size_t, double>(k, t);
    };
    FluxModel fm;
    fm.f = [rows, locate](double s, double c) {
        auto [k, t] = locate(c);
        return (1.0 - t) * (*rows)[k](s) + t * (*rows)[k + 1](s);
    };
    fm.fs = [rows, locate](double s, double c) {
        auto [k, t] = locate(c);
        return (1.0 - t) * (*rows)[k].derivative(s) + t * (*rows)[k + 1].derivative(s);
    };
    fm.fc = [rows, locate, cs](double s, double c) {
        auto [k, t] = locate(c);
        (void)t;
        return ((*rows)[k + 1](s) - (*rows)[k](s)) / ((*cs)[k + 1] - (*cs)[k]);
    };
    fm.fss = [rows, locate](double s, double c) {
        auto [k, t] = locate(c);
        return (1.0 - t) * (*rows)[k].second_derivative(s) + t * (*rows)[k + 1].second_derivative(s);
    };
    fm.name = "table";
    return fm;
}

// ---------------------------------------------------------------------------
// Assumption validation
// ---------------------------------------------------------------------------

struct AssumptionCheck {
    std::string name;
    bool passed = true;
    double s = -1; // first violating lattice point, if any
    double c = -1;
    std::string detail;

    AssumptionCheck() = default;
    explicit AssumptionCheck(std::string n) : name(std::move(n)) {}
    AssumptionCheck(std::string n, bool p, double s_, double c_, std::string d)
        : name(std::move(n)), passed(p), s(s_), c(c_), detail(std::move(d)) {}
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    std::vector<double> c_grid;     // lattice used for c*(s) / s_I(c) scans
    std::vector<double> inflection; // s_I(c) per lattice c (F3), empty on failure
    std::vector<double> c_star;     // c*(s) per lattice s (F4), empty on failure

    bool all_passed() const {
        for (const auto& ch : checks)
            if (!ch.passed) return false;
        return true;
    }
    const AssumptionCheck* find(const std::string& name) const {
        for (const auto& ch : checks)
            if (ch.name == name) return &ch;
        return nullptr;
    }
};

/// Grid-based check of the flux assumptions (boundary values, monotonicity in
/// s, S-shape in s, single monotonicity change in c), the adsorption
/// assumptions (a(0)=0, increasing, strictly concave) and the capillary
/// bounds. Strict inequalities must hold at every lattice point with margin.
inline ValidationReport validate_assumptions(const ModelSet& m, std::size_t grid_n = 256) {
    if (grid_n < 64) throw domain_error("validate_assumptions: grid_n must be >= 64");
    const double margin = tols().validate_margin;
    const double eval_tol = tols().eval;
    ValidationReport rep;
    auto grid = linspace(0.0, 1.0, grid_n);
    rep.c_grid = grid;

    auto& flux = m.flux;
    auto& ads = m.adsorption;

    AssumptionCheck f1{"F1"};
    for (double c : grid) {
        if (std::abs(flux.value(0.0, c)) > eval_tol) {
            f1 = {"F1", false, 0.0, c, "f(0,c) != 0"};
            break;
        }
        if (std::abs(flux.value(1.0, c) - 1.0) > eval_tol) {
            f1 = {"F1", false, 1.0, c, "f(1,c) != 1"};
            break;
        }
    }
    rep.checks.push_back(f1);

    AssumptionCheck f2{"F2"};
    for (double c : grid) {
        if (!f2.passed) break;
        if (std::abs(flux.ds(0.0, c)) > 1e-5 || std::abs(flux.ds(1.0, c)) > 1e-5) {
            f2 = {"F2", false, 0.0, c, "f_s must vanish at s in {0,1}"};
            break;
        }
        for (std::size_t i = 1; i + 1 < grid_n; ++i) {
            if (flux.ds(grid[i], c) <= margin) {
                f2 = {"F2", false, grid[i], c, "f_s not positive on the open square"};
                break;
            }
        }
    }
    rep.checks.push_back(f2);

    // F3: single sign change of f_ss in s per c, positive then negative.
    AssumptionCheck f3{"F3"};
    for (double c : grid) {
        if (!f3.passed) break;
        bool saw_positive = false;
        bool crossed = false;
        double s_inflection = -1;
        for (std::size_t i = 1; i + 1 < grid_n; ++i) {
            double v = flux.dss(grid[i], c);
            if (!crossed) {
                if (v > margin) {
                    saw_positive = true;
                } else if (v < -margin) {
                    crossed = true;
                    s_inflection = grid[i];
                }
            } else if (v > margin) {
                f3 = {"F3", false, grid[i], c, "f_ss changes sign more than once in s"};
                break;
            }
        }
        if (!f3.passed) break;
        if (!saw_positive || !crossed) {
            f3 = {"F3", false, -1, c, "f_ss has no positive-to-negative crossing in s"};
            break;
        }
        rep.inflection.push_back(s_inflection);
    }
    if (!f3.passed) rep.inflection.clear();
    rep.checks.push_back(f3);

    // F4: per s, f_c negative then positive with a single crossing c*(s).
    AssumptionCheck f4{"F4"};
    for (std::size_t i = 1; i + 1 < grid_n; ++i) {
        if (!f4.passed) break;
        double s = grid[i];
        bool saw_negative = false;
        bool crossed = false;
        double c_cross = -1;
        for (std::size_t j = 1; j + 1 < grid_n; ++j) {
            double v = flux.dc(s, grid[j]);
            if (!crossed) {
                if (v < -margin) {
                    saw_negative = true;
                } else if (v > margin) {
                    crossed = true;
                    c_cross = grid[j];
                }
            } else if (v < -margin) {
                f4 = {"F4", false, s, grid[j], "f_c changes sign more than once in c"};
                break;
            }
        }
        if (!f4.passed) break;
        if (!saw_negative || !crossed) {
            f4 = {"F4", false, s, -1, "f_c is single-signed in c (no crossing)"};
            break;
        }
        rep.c_star.push_back(c_cross);
    }
    if (!f4.passed) rep.c_star.clear();
    rep.checks.push_back(f4);

    AssumptionCheck a1{"A1"};
    if (std::abs(ads.value(0.0)) > eval_tol) a1 = {"A1", false, -1, 0.0, "a(0) != 0"};
    rep.checks.push_back(a1);

    AssumptionCheck a2{"A2"};
    for (std::size_t j = 1; j + 1 < grid_n; ++j) {
        if (ads.d(grid[j]) <= margin) {
            a2 = {"A2", false, -1, grid[j], "a' not positive on (0,1)"};
            break;
        }
    }
    rep.checks.push_back(a2);

    AssumptionCheck a3{"A3"};
    for (std::size_t j = 1; j + 1 < grid_n; ++j) {
        if (ads.dd(grid[j]) >= -margin) {
            a3 = {"A3", false, -1, grid[j], "a'' not strictly negative on (0,1)"};
            break;
        }
    }
    rep.checks.push_back(a3);

    AssumptionCheck cap{"capillary-bounds"};
    if (!(m.capillarity.lo > 0)) {
        cap = {"capillary-bounds", false, -1, -1, "declared lower bound not positive"};
    } else {
        for (double s : grid) {
            if (!cap.passed) break;
            for (double c : grid) {
                double v = m.capillarity.value(s, c);
                if (v < m.capillarity.lo - eval_tol || v > m.capillarity.hi + eval_tol) {
                    cap = {"capillary-bounds", false, s, c, "A(s,c) outside declared bounds"};
                    break;
                }
            }
        }
    }
    rep.checks.push_back(cap);

    AssumptionCheck riem{"riemann-data"};
    if (!(m.c_plus >= 0 && m.c_plus < m.c_minus && m.c_minus <= 1))
        riem = {"riemann-data", false, -1, m.c_plus, "requires 0 <= c_plus < c_minus <= 1"};
    rep.checks.push_back(riem);

    return rep;
}

/// Throws model_error unless the model passes validation (or force is set).
inline void require_valid(const ModelSet& m, bool force = false, std::size_t grid_n = 256) {
    if (force) return;
    auto rep = validate_assumptions(m, grid_n);
    if (!rep.all_passed()) {
        std::string which;
        for (const auto& ch : rep.checks)
            if (!ch.passed) which += (which.empty() ? "" : ", ") + ch.name;
        throw model_error("model fails validation (" + which + "); pass force to override");
    }
}

} // namespace chemflood
