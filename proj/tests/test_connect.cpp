#include <doctest.h>

#include <cmath>

#include "chemflood/connect.hpp"
#include "oracles.hpp"

using namespace chemflood;

TEST_SUITE("connect") {

TEST_CASE("manifold launch basics") {
    auto m = boomerang_model();
    TravellingWaveSystem sys(m, 0.71, 1.0);
    auto pts = critical_points(sys);
    const auto* u2m = find_point(pts, CriticalLabel::u2_minus);
    const auto* u1p = find_point(pts, CriticalLabel::u1_plus);
    REQUIRE(u2m);
    REQUIRE(u1p);

    SUBCASE("unstable manifold marches to the target concentration") {
        auto traj = launch_manifold(sys, *u2m, ManifoldDirection::unstable_forward, 0.5);
        CHECK(traj.termination == Termination::reached_c_target);
        CHECK(traj.samples.front().c > traj.samples.back().c);
        CHECK(traj.end_c() == doctest::Approx(0.5).epsilon(1e-10));
        // leaves along the eigenvector with a positive graph slope
        CHECK(traj.samples.front().dsdc > 0);
    }
    SUBCASE("stable manifold is traced backwards, c increasing") {
        auto traj = launch_manifold(sys, *u1p, ManifoldDirection::stable_backward, 0.5);
        CHECK(traj.termination == Termination::reached_c_target);
        CHECK(traj.samples.front().c < traj.samples.back().c);
        CHECK(traj.samples.front().dsdc > 0);
    }
    SUBCASE("wrong direction is rejected") {
        CHECK_THROWS_AS(launch_manifold(sys, *u2m, ManifoldDirection::stable_backward, 0.5),
                        solver_error);
        CHECK_THROWS_AS(launch_manifold(sys, *u1p, ManifoldDirection::unstable_forward, 0.5),
                        solver_error);
    }
    SUBCASE("flow reversibility at the adaptive tolerance") {
        auto traj = launch_manifold(sys, *u2m, ManifoldDirection::unstable_forward, 0.5);
        auto rhs = [&sys](double c, const num::State<1>& y, num::State<1>& dy) {
            dy[0] = sys.slope(y[0], c);
        };
        auto back = num::integrate<1>(rhs, traj.end_c(), num::State<1>{traj.end_s()},
                                      traj.samples.front().c, tols().ode_rel, tols().ode_abs);
        CHECK(back.back().y[0] == doctest::Approx(traj.samples.front().s).epsilon(1e-8));
    }
}

TEST_CASE("Type I portraits admit no saddle-saddle trajectory") {
    auto m = boomerang_model();
    TravellingWaveSystem sys(m, 0.69, 1.0); // Type I
    auto pts = critical_points(sys);
    const auto* u2m = find_point(pts, CriticalLabel::u2_minus);
    const auto* u1p = find_point(pts, CriticalLabel::u1_plus);
    auto traj = launch_manifold(sys, *u2m, ManifoldDirection::unstable_forward, m.c_plus);
    // the trajectory crosses the inter-branch strip where its slope turns
    // negative and lands above the target saddle (toward the sink)
    double min_slope = 1e300;
    for (const auto& ts : traj.samples) min_slope = std::min(min_slope, ts.dsdc);
    CHECK(min_slope < 0);
    CHECK(traj.end_s() > u1p->s + 1e-3);
    CHECK((traj.termination == Termination::reached_c_target ||
           traj.termination == Termination::entered_sink));
    CHECK_THROWS_AS(find_kappa_for_v(m, 0.69), solver_error);
}

TEST_CASE("mismatch sign structure at a Type II velocity") {
    auto m = boomerang_model();
    const double v = 0.71;
    SUBCASE("small ratio leaves the unstable manifold above") {
        CHECK(connection_mismatch(m, v, 1e-3, 0.5) > 0);
    }
    SUBCASE("large ratio drops it below (saturated on exit)") {
        CHECK(connection_mismatch(m, v, 100.0, 0.5) == doctest::Approx(-1.0));
    }
    SUBCASE("monotone decrease and a single sign change on a log grid") {
        int changes = 0;
        double prev = connection_mismatch(m, v, 1e-3, 0.5);
        for (int i = 1; i < 30; ++i) {
            double kappa = 1e-3 * std::pow(1e5, static_cast<double>(i) / 29.0);
            double cur = connection_mismatch(m, v, kappa, 0.5);
            if ((prev > 0) != (cur > 0)) ++changes;
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
        CHECK(changes == 1);
    }
    SUBCASE("interior matching point is required") {
        CHECK_THROWS_AS(connection_mismatch(m, v, 1.0, 1.5), domain_error);
    }
}

TEST_CASE("kappa(v) solve and its certificates") {
    auto m = boomerang_model();
    auto r = find_kappa_for_v(m, 0.71);
    CHECK(std::abs(r.mismatch) < tols().connect);
    CHECK(r.s_minus > r.s_plus); // Type II order
    SUBCASE("trajectory is a monotone graph with positive slope") {
        for (const auto& ts : r.trajectory) CHECK(ts.dsdc > 0);
        for (std::size_t i = 0; i + 1 < r.trajectory.size(); ++i)
            CHECK(r.trajectory[i + 1].c < r.trajectory[i].c + 1e-15);
    }
    SUBCASE("endpoints satisfy the jump conditions") {
        auto [r1, r2] = rh_residuals(m, r.v, r.s_minus, r.s_plus);
        CHECK(std::abs(r1) < 1e-8);
        CHECK(std::abs(r2) < 1e-8);
    }
    SUBCASE("chord integral identity") {
        CHECK(std::abs(integral_identity_residual(m, r)) < 1e-6);
    }
    SUBCASE("matching point does not matter") {
        auto r2 = find_kappa_for_v(m, 0.71, SystemKind::non_equilibrium_adsorption, 0.25);
        CHECK(std::abs(r2.kappa - r.kappa) / r.kappa < 1e-8);
    }
    SUBCASE("deterministic re-solve") {
        auto r2 = find_kappa_for_v(m, 0.71);
        CHECK(r2.kappa == r.kappa);
    }
    SUBCASE("ratio decreases with speed") {
        auto ra = find_kappa_for_v(m, 0.705);
        auto rb = find_kappa_for_v(m, 0.718);
        CHECK(ra.kappa > r.kappa);
        CHECK(r.kappa > rb.kappa);
    }
    SUBCASE("ratio blows up toward the lower window edge") {
        auto w = velocity_window(m);
        double W = w.v_max - w.v_min;
        double near = find_kappa_for_v(m, w.v_min + 1e-3 * W).kappa;
        double far = find_kappa_for_v(m, w.v_min + 1e-1 * W).kappa;
        CHECK(near > far);
        CHECK(near > 50.0 * far); // steep growth over the approach
    }
    SUBCASE("ratio vanishes toward the upper window edge") {
        auto w = velocity_window(m);
        double W = w.v_max - w.v_min;
        double near = find_kappa_for_v(m, w.v_max - 1e-3 * W).kappa;
        double far = find_kappa_for_v(m, w.v_max - 1e-1 * W).kappa;
        CHECK(near < far);
        CHECK(near < 0.05);
    }
    SUBCASE("both regularizations connect, with different ratios") {
        auto rd = find_kappa_for_v(m, 0.71, SystemKind::capillary_diffusion);
        CHECK(std::abs(rd.mismatch) < tols().connect);
        CHECK(rd.kappa != doctest::Approx(r.kappa).epsilon(0.01));
        CHECK(std::abs(integral_identity_residual(m, rd)) < 1e-6);
    }
}

TEST_CASE("pointwise slope monotonicity in kappa and v") {
    auto m = boomerang_model();
    for (auto kind : {SystemKind::non_equilibrium_adsorption, SystemKind::capillary_diffusion}) {
        int checked = 0;
        for (int i = 0; i < 400 && checked < 200; ++i) {
            double s = oracles::uniform(0.02, 0.98);
            double c = oracles::uniform(0.02, 0.98);
            double v = oracles::uniform(0.2, 1.2);
            double kappa = oracles::uniform(0.05, 5.0);
            TravellingWaveSystem sys(m, v, kappa, kind);
            double slope = sys.slope(s, c);
            if (slope <= 0) continue;
            ++checked;
            TravellingWaveSystem sys_k(m, v, kappa * 1.07, kind);
            TravellingWaveSystem sys_v(m, v * 1.07, kappa, kind);
            CHECK(sys_k.slope(s, c) > slope);
            CHECK(sys_v.slope(s, c) > slope);
        }
        CHECK(checked == 200);
    }
}

TEST_CASE("v(kappa) inverts kappa(v)") {
    auto m = boomerang_model();
    auto fwd = find_kappa_for_v(m, 0.71);
    auto inv = find_v_for_kappa(m, fwd.kappa);
    CHECK(inv.v == doctest::Approx(0.71).epsilon(1e-8));
    CHECK_FALSE(inv.at_window_boundary);
    SUBCASE("ordering of speeds") {
        auto r2 = find_v_for_kappa(m, 2.0);
        auto r01 = find_v_for_kappa(m, 0.1);
        CHECK(r2.v < r01.v);
    }
    SUBCASE("rejects non-positive ratios") {
        CHECK_THROWS_AS(find_v_for_kappa(m, 0.0), domain_error);
        CHECK_THROWS_AS(find_v_for_kappa(m, -1.0), domain_error);
    }
}

TEST_CASE("curve sweep: monotone, consistent, deterministic") {
    auto m = boomerang_model();
    auto curve = sweep_curve(m, 12);
    REQUIRE(curve.samples.size() == 12);
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        CHECK(curve.samples[i].v < curve.samples[i + 1].v);
        CHECK(curve.samples[i].kappa > curve.samples[i + 1].kappa);
    }
    for (const auto& s : curve.samples) {
        CHECK(s.rh_residual < 1e-8);
        CHECK(std::abs(s.eq_residual) < 1e-6);
    }
    CHECK(curve.kappa_crit == 0.0); // II-III window
    SUBCASE("shared grid points reproduce under refinement") {
        auto fine = sweep_curve(m, 25); // fractions (2i+2)/26 contain (i+1)/13
        for (std::size_t i = 0; i < 12; ++i) {
            CHECK(fine.samples[2 * i + 1].kappa ==
                  doctest::Approx(curve.samples[i].kappa).epsilon(1e-8));
        }
    }
    SUBCASE("parallel sweep matches serial") {
        auto par = sweep_curve(m, 12, SweepSpacing::uniform_in_v,
                               SystemKind::non_equilibrium_adsorption, 4);
        for (std::size_t i = 0; i < 12; ++i) CHECK(par.samples[i].kappa == curve.samples[i].kappa);
    }
}

TEST_CASE("diffusive regularization sweeps are monotone too") {
    auto m = boomerang_model();
    auto curve = sweep_curve(m, 8, SweepSpacing::uniform_in_v, SystemKind::capillary_diffusion);
    auto noneq = sweep_curve(m, 8);
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i)
        CHECK(curve.samples[i].kappa > curve.samples[i + 1].kappa);
    // same structure, different curve
    bool differs = false;
    for (std::size_t i = 0; i < 8; ++i)
        differs = differs ||
                  std::abs(curve.samples[i].kappa - noneq.samples[i].kappa) > 0.01 * noneq.samples[i].kappa;
    CHECK(differs);
}

TEST_CASE("log-spaced sweep covers the same curve") {
    auto m = boomerang_model();
    auto curve = sweep_curve(m, 6, SweepSpacing::log_in_kappa);
    REQUIRE(curve.samples.size() == 6);
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i)
        CHECK(curve.samples[i].kappa > curve.samples[i + 1].kappa);
}

TEST_CASE("tabulated flux drives the full connection stack") {
    auto src = boomerang_flux();
    auto s_nodes = linspace(0.0, 1.0, 401);
    auto c_nodes = linspace(0.0, 1.0, 33);
    std::vector<std::vector<double>> values;
    for (double c : c_nodes) {
        std::vector<double> row;
        for (double s : s_nodes) row.push_back(src.value(s, c));
        values.push_back(row);
    }
    ModelSet m{tabulated_flux(s_nodes, c_nodes, values), langmuir_adsorption(),
               constant_capillarity(), 1.0, 0.0};
    // the interpolant cannot certify the endpoint derivative condition, so
    // strict validation rejects it; the solvers still run on forced models
    CHECK_FALSE(validate_assumptions(m, 128).all_passed());
    auto w = velocity_window(m);
    CHECK(w.v_min == doctest::Approx(0.698757285).epsilon(1e-6));
    CHECK(w.v_max == doctest::Approx(0.724059704).epsilon(1e-6));
    auto r = find_kappa_for_v(m, 0.71);
    CHECK(r.kappa == doctest::Approx(1.63007).epsilon(5e-3));
    CHECK(std::abs(r.mismatch) < tols().connect);
}

TEST_CASE("window-edge saturation for the II-IV geometry") {
    auto m = boomerang_model(1.0, 0.3);
    auto w = velocity_window(m);
    double kc = kappa_crit(m, w);
    CHECK(kc > 0);
    CHECK(std::isfinite(kc));
    SUBCASE("below kappa_crit the speed pins to v_max") {
        auto r = find_v_for_kappa(m, 0.5 * kc);
        CHECK(r.v == doctest::Approx(w.v_max).epsilon(1e-12));
        CHECK(r.at_window_boundary);
        CHECK(r.kappa == doctest::Approx(0.5 * kc));
    }
    SUBCASE("above kappa_crit the usual bisection applies") {
        auto r = find_v_for_kappa(m, 4.0 * kc);
        CHECK_FALSE(r.at_window_boundary);
        CHECK(r.v < w.v_max);
        CHECK(r.v > w.v_min);
    }
}

} // TEST_SUITE
