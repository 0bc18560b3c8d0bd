#include <doctest.h>

#include <cmath>

#include "chemflood/twave.hpp"
#include "oracles.hpp"

using namespace chemflood;

namespace {
// Frozen from the dense-grid tangent oracle (1e5 points, parabolic top).
const double v_min_ref = 0.698757285380;
const double v_max_ref = 0.724059704198;
} // namespace

TEST_SUITE("twave") {

TEST_CASE("right-hand side structure") {
    auto m = boomerang_model();
    TravellingWaveSystem sys(m, 0.7, 1.5);
    SUBCASE("concentration rate vanishes on the boundary lines") {
        CHECK(sys.c_rate(m.c_minus) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sys.c_rate(m.c_plus) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("concentration rate is strictly negative inside") {
        for (double c : linspace(0.01, 0.99, 99)) CHECK(sys.c_rate(c) < 0);
        // frozen interior value: (d1 c - d2 - a(c)) / (v d1 kappa) at (0.5, 0.5)
        double expect = (0.25 - 1.0 / 3.0) / (0.7 * 0.5 * 1.5);
        CHECK(sys.c_rate(0.5) == doctest::Approx(expect).epsilon(1e-13));
    }
    SUBCASE("both components vanish at critical points") {
        for (const auto& p : critical_points(sys)) {
            auto [ds, dc] = sys.rhs(p.s, p.c);
            CHECK(std::abs(ds) < 1e-10);
            CHECK(std::abs(dc) < 1e-14);
        }
    }
    SUBCASE("kind selects the concentration scaling") {
        TravellingWaveSystem diff(m, 0.7, 1.5, SystemKind::capillary_diffusion);
        double ratio = diff.c_rate(0.5) / sys.c_rate(0.5);
        CHECK(ratio == doctest::Approx(0.7 * 0.7 * 0.5).epsilon(1e-12)); // v / (1/(v d1))
    }
}

TEST_CASE("critical points follow the sign table") {
    auto m = boomerang_model();
    SUBCASE("below the 0-I boundary each line carries one point") {
        TravellingWaveSystem sys(m, 0.5, 1.0);
        auto pts = critical_points(sys);
        REQUIRE(pts.size() == 2);
        const auto* um = find_point(pts, CriticalLabel::u1_minus);
        const auto* up = find_point(pts, CriticalLabel::u1_plus);
        REQUIRE(um);
        REQUIRE(up);
        CHECK(um->kind == CriticalKind::source);
        CHECK(up->kind == CriticalKind::saddle);
        CHECK(m.flux.ds(um->s, um->c) > sys.v);
    }
    SUBCASE("inside the Type I band all four points appear") {
        TravellingWaveSystem sys(m, 0.69, 1.0);
        auto pts = critical_points(sys);
        REQUIRE(pts.size() == 4);
        CHECK(find_point(pts, CriticalLabel::u1_minus)->kind == CriticalKind::source);
        CHECK(find_point(pts, CriticalLabel::u2_minus)->kind == CriticalKind::saddle);
        CHECK(find_point(pts, CriticalLabel::u1_plus)->kind == CriticalKind::saddle);
        CHECK(find_point(pts, CriticalLabel::u2_plus)->kind == CriticalKind::sink);
        // saddle at u2_minus: f_s below v on a line where the chord slope
        // exceeds the isotherm derivative
        const auto* u2m = find_point(pts, CriticalLabel::u2_minus);
        CHECK(m.flux.ds(u2m->s, u2m->c) < sys.v);
        CHECK(0.5 - m.adsorption.d(m.c_minus) > 0);
        CHECK(u2m->lambda_s < 0);
        CHECK(u2m->lambda_c > 0);
    }
    SUBCASE("line roots satisfy the jump conditions pairwise") {
        TravellingWaveSystem sys(m, 0.71, 1.0);
        auto pts = critical_points(sys);
        for (const auto& a : pts)
            for (const auto& b : pts) {
                if (a.c <= b.c) continue;
                double r1 = sys.v * (a.s - b.s) - (m.flux.value(a.s, a.c) - m.flux.value(b.s, b.c));
                double r2 = sys.v * ((a.c * a.s + m.adsorption.value(a.c)) -
                                     (b.c * b.s + m.adsorption.value(b.c))) -
                            (a.c * m.flux.value(a.s, a.c) - b.c * m.flux.value(b.s, b.c));
                CHECK(std::abs(r1) < 1e-9);
                CHECK(std::abs(r2) < 1e-9);
            }
    }
}

TEST_CASE("tangent slope from the chord pivot") {
    auto m = boomerang_model();
    const double d1 = 0.5;
    // closed forms for d1 = 1/2: tangency at 2^{-1/3} (c=0), (2/3)^{1/3} (c=0.5)
    auto t0 = tangent_slope_from_q(m.flux, d1, 0.0);
    CHECK(t0.s == doctest::Approx(std::pow(2.0, -1.0 / 3.0)).epsilon(1e-10));
    CHECK(t0.v == doctest::Approx(v_max_ref).epsilon(1e-9));
    auto t5 = tangent_slope_from_q(m.flux, d1, 0.5);
    CHECK(t5.s == doctest::Approx(std::pow(2.0 / 3.0, 1.0 / 3.0)).epsilon(1e-10));
    CHECK(t5.v == doctest::Approx(v_min_ref).epsilon(1e-9));
    // grid-maximizer oracle agreement
    for (double c : {0.0, 0.2, 0.5, 0.8, 1.0}) {
        double oracle = oracles::tangent_slope_grid(m.flux, d1, c);
        CHECK(tangent_slope_from_q(m.flux, d1, c).v == doctest::Approx(oracle).epsilon(1e-8));
    }
    // the tangent slope dominates every chord slope from the pivot
    for (int i = 0; i < 100; ++i) {
        double s = oracles::uniform(0.01, 0.99);
        CHECK(t0.v >= m.flux.value(s, 0.0) / (s + d1) - 1e-12);
    }
}

TEST_CASE("velocity window of the reference model") {
    auto m = boomerang_model();
    auto w = velocity_window(m);
    CHECK(w.v_0i == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w.v_min == doctest::Approx(v_min_ref).epsilon(1e-9));
    CHECK(w.v_max == doctest::Approx(v_max_ref).epsilon(1e-9));
    CHECK(w.v_max_kind == WindowKind::ii_iii); // identical boundary curves
    CHECK(w.c_at_vmin == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(w.v_0i < w.v_min);
    CHECK(w.v_min < w.v_max);
}

TEST_CASE("velocity window with distinct boundary curves") {
    auto m = boomerang_model(1.0, 0.3); // curves no longer intersect inside
    auto w = velocity_window(m);
    CHECK(w.v_max_kind == WindowKind::ii_iv);
    CHECK(w.v_min == doctest::Approx(0.763074030591).epsilon(1e-7));
    CHECK(w.v_max == doctest::Approx(0.766157565958).epsilon(1e-7));
    SUBCASE("coalescing pair shrinks toward the window edge") {
        double prev = 1e300;
        for (double off : {3e-3, 1e-3, 3e-4}) {
            TravellingWaveSystem sys(m, w.v_max - off, 1.0);
            auto pts = critical_points(sys);
            const auto* a = find_point(pts, CriticalLabel::u1_plus);
            const auto* b = find_point(pts, CriticalLabel::u2_plus);
            REQUIRE(a);
            REQUIRE(b);
            double gap = b->s - a->s;
            CHECK(gap > 0);
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

TEST_CASE("portrait classification across the velocity sweep") {
    auto m = boomerang_model();
    auto w = velocity_window(m);
    auto type_at = [&](double v) { return classify_portrait(TravellingWaveSystem(m, v, 1.0)).portrait; };

    CHECK(type_at(0.5) == PortraitType::type_0);
    CHECK(type_at(w.v_0i) == PortraitType::type_0_i);
    CHECK(type_at(0.69) == PortraitType::type_i);
    CHECK(type_at(w.v_min) == PortraitType::type_i_ii);
    CHECK(type_at(0.71) == PortraitType::type_ii);
    CHECK(type_at(w.v_max) == PortraitType::type_ii_iii);
    CHECK(type_at(0.75) == PortraitType::type_iv);

    SUBCASE("Type II gap matches the tangent geometry") {
        auto rep = classify_portrait(TravellingWaveSystem(m, 0.71, 1.0));
        REQUIRE(rep.gap.has_value());
        auto [c1, c2] = *rep.gap;
        CHECK(c1 < c2);
        // gap boundaries are exactly the concentrations whose tangent slope is v
        CHECK(tangent_slope_from_q(m.flux, 0.5, c1).v == doctest::Approx(0.71).epsilon(1e-8));
        CHECK(tangent_slope_from_q(m.flux, 0.5, c2).v == doctest::Approx(0.71).epsilon(1e-8));
        // independent root-count scan agrees inside and outside the gap
        CHECK(oracles::count_roots_scan(m.flux, 0.71, 0.5, 0.5 * (c1 + c2)) == 0);
        CHECK(oracles::count_roots_scan(m.flux, 0.71, 0.5, c1 - 0.05) == 2);
        CHECK(oracles::count_roots_scan(m.flux, 0.71, 0.5, c2 + 0.05) == 2);
    }
    SUBCASE("saturation rate is negative across the gap strip") {
        TravellingWaveSystem sys(m, 0.71, 1.0);
        auto rep = classify_portrait(sys);
        auto [c1, c2] = *rep.gap;
        for (double c : linspace(c1 + 1e-6, c2 - 1e-6, 21))
            for (double s : linspace(0.01, 0.99, 21)) CHECK(sys.s_rate(s, c) < 0);
    }
}

TEST_CASE("every velocity inside the window is Type II") {
    auto m = boomerang_model();
    auto w = velocity_window(m);
    for (double t : linspace(0.02, 0.98, 13)) {
        double v = w.v_min + t * (w.v_max - w.v_min);
        auto rep = classify_portrait(TravellingWaveSystem(m, v, 1.0));
        CHECK(rep.portrait == PortraitType::type_ii);
        CHECK(rep.gap.has_value());
    }
}

TEST_CASE("portrait ranks are non-decreasing in v") {
    auto m = boomerang_model();
    auto w = velocity_window(m);
    int prev = -1;
    for (double v : linspace(0.05, w.v_max * 1.05, 60)) {
        auto rep = classify_portrait(TravellingWaveSystem(m, v, 1.0));
        int rank = portrait_rank(rep.portrait);
        CHECK(rank >= prev);
        prev = rank;
        CHECK(rep.portrait != PortraitType::type_iii); // omitted for this model
    }
}

TEST_CASE("II-IV path shows the intermediate type at the window edge") {
    auto m = boomerang_model(1.0, 0.3);
    auto w = velocity_window(m);
    auto mid = classify_portrait(TravellingWaveSystem(m, 0.5 * (w.v_min + w.v_max), 1.0));
    CHECK(mid.portrait == PortraitType::type_ii);
    auto edge = classify_portrait(TravellingWaveSystem(m, w.v_max, 1.0));
    CHECK(edge.portrait == PortraitType::type_ii_iv);
    auto beyond = classify_portrait(TravellingWaveSystem(m, w.v_max * 1.01, 1.0));
    CHECK(beyond.portrait == PortraitType::type_iv);
}

TEST_CASE("boundary-curve crossings below the window select the tangent rule") {
    // A concentration-dependent exponent makes the two boundary flux curves
    // genuinely cross, but the line from Q through the crossing stays below
    // the minimal tangent slope, so the window still closes tangentially.
    const double gamma = -0.2;
    auto mu = [](double c) { return 1.0 + 4.0 * c * (1.0 - c); };
    auto dmu = [](double c) { return 4.0 - 8.0 * c; };
    auto p = [gamma](double c) { return 2.0 + gamma * c * c * c; };
    auto dp = [gamma](double c) { return 3.0 * gamma * c * c; };
    FluxModel fm;
    fm.f = [=](double s, double c) {
        double u = 1.0 - s;
        return s * s / (s * s + mu(c) * std::pow(u, p(c)));
    };
    fm.fs = [=](double s, double c) {
        double u = 1.0 - s;
        double P = p(c), M = mu(c);
        double D = s * s + M * std::pow(u, P);
        double Ds = 2.0 * s - (u > 0 ? M * P * std::pow(u, P - 1.0) : 0.0);
        return (2.0 * s * D - s * s * Ds) / (D * D);
    };
    fm.fc = [=](double s, double c) {
        if (s >= 1.0 - 1e-12 || s <= 0.0) return 0.0;
        double u = 1.0 - s;
        double P = p(c), M = mu(c);
        double up = std::pow(u, P);
        double D = s * s + M * up;
        return -s * s * up * (dmu(c) + M * std::log(u) * dp(c)) / (D * D);
    };
    fm.name = "exponent";
    ModelSet m{fm, langmuir_adsorption(), constant_capillarity(), 1.0, 0.3};
    REQUIRE(validate_assumptions(m, 128).all_passed());

    // the boundary curves really do cross inside (0,1)
    auto delta = [&](double s) { return fm.value(s, 1.0) - fm.value(s, 0.3); };
    int crossings = 0;
    double prev = delta(1e-4);
    for (double s : linspace(1e-3, 1.0 - 1e-3, 2000)) {
        double cur = delta(s);
        if ((prev > 0) != (cur > 0)) ++crossings;
        prev = cur;
    }
    CHECK(crossings >= 1);

    auto w = velocity_window(m);
    CHECK(w.v_max_kind == WindowKind::ii_iv);
    CHECK(w.v_min < w.v_max);
    auto mid = classify_portrait(TravellingWaveSystem(m, 0.5 * (w.v_min + w.v_max), 1.0));
    CHECK(mid.portrait == PortraitType::type_ii);
    auto edge = classify_portrait(TravellingWaveSystem(m, w.v_max, 1.0));
    CHECK(edge.portrait == PortraitType::type_ii_iv);
}

TEST_CASE("multi-branch nullclines are rejected") {
    // A mobility profile with two deep wells in c splits the nullcline into
    // more than two branches at a suitable speed.
    auto bump = [](double c, double at) {
        double t = (c - at) / 0.06;
        return std::exp(-t * t);
    };
    auto mu = [bump](double c) {
        return 1.0 + 4.0 * c * (1.0 - c) + 3.0 * bump(c, 0.25) + 3.0 * bump(c, 0.75);
    };
    auto dmu = [bump](double c) {
        auto db = [&](double at) { return bump(c, at) * (-2.0 * (c - at) / (0.06 * 0.06)); };
        return 4.0 - 8.0 * c + 3.0 * db(0.25) + 3.0 * db(0.75);
    };
    ModelSet m{mobility_ratio_flux(mu, dmu, "two-well"), langmuir_adsorption(),
               constant_capillarity(), 1.0, 0.0};
    const double d1 = chord_coefficients(m).d1;
    double t25 = tangent_slope_from_q(m.flux, d1, 0.25).v;
    double t50 = tangent_slope_from_q(m.flux, d1, 0.5).v;
    double t75 = tangent_slope_from_q(m.flux, d1, 0.75).v;
    double v = std::max(t25, t75) + 0.1 * (t50 - std::max(t25, t75));
    REQUIRE(v < t50); // the ridge between the wells stays above the line
    CHECK_THROWS_AS(classify_portrait(TravellingWaveSystem(m, v, 1.0)), model_error);
}

TEST_CASE("nullcline sampling covers both branches") {
    auto m = boomerang_model();
    auto ns = sample_nullcline(m, 0.71, 129);
    CHECK(!ns.rows.empty());
    for (const auto& r : ns.rows) {
        double psi = m.flux.value(r[1], r[0]) - 0.71 * (r[1] + 0.5);
        CHECK(std::abs(psi) < 1e-9);
    }
}

} // TEST_SUITE
