// Command-line front end: model ingestion, solver dispatch, and reproducible
// CSV/JSON emission for all figure data.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chemflood/chemflood.hpp"

using namespace chemflood;

namespace {

struct CommonArgs {
    std::string model_spec = "boomerang";
    std::string out_path;
    std::string system_name = "noneq";
    bool force = false;
    unsigned jobs = 1;

    SystemKind system() const {
        if (system_name == "noneq") return SystemKind::non_equilibrium_adsorption;
        if (system_name == "diff") return SystemKind::capillary_diffusion;
        throw domain_error("unknown system '" + system_name + "' (expected noneq or diff)");
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_system = true) {
    cmd->add_option("-m,--model", args.model_spec,
                    "model JSON file or builtin name (boomerang, corey)");
    cmd->add_option("-o,--output", args.out_path, "CSV output path");
    cmd->add_flag("--force", args.force, "skip model validation");
    if (with_system)
        cmd->add_option("--system", args.system_name, "regularization: noneq or diff")
            ->check(CLI::IsMember({"noneq", "diff"}));
}

ModelSet load_checked(const CommonArgs& args) {
    ModelSet m = load_model(args.model_spec);
    require_valid(m, args.force);
    return m;
}

RunManifest manifest_for(const std::string& subcommand, const CommonArgs& args, json params) {
    RunManifest man;
    man.subcommand = subcommand;
    man.model_spec = args.model_spec;
    man.parameters = std::move(params);
    return man;
}

void emit(const json& report) { std::cout << report.dump(2) << "\n"; }

std::vector<double> profile_grid(const WaveSequence& seq, std::size_t n) {
    double lo = std::min(0.0, seq.first_speed());
    double hi = seq.last_speed();
    double span = hi - lo;
    return linspace(lo - 0.1 * span - 0.05, hi + 0.1 * span + 0.05, n);
}

void emit_profile_csv(const std::string& path, const RunManifest& man, const WaveSequence& seq,
                      std::size_t n) {
    auto prof = sample_profile(seq, profile_grid(seq, n));
    std::vector<std::vector<double>> rows;
    rows.reserve(prof.xi.size());
    for (std::size_t i = 0; i < prof.xi.size(); ++i)
        rows.push_back({prof.xi[i], prof.s[i], prof.c[i]});
    write_csv_file(path, man, {"xi", "s", "c"}, rows);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vanishing-viscosity Riemann solver for two-component flooding models"};
    app.require_subcommand(1);

    CommonArgs args;
    double kappa = -1, v = -1;
    std::size_t n = 50;
    std::size_t grid_points = 2001;
    std::string spacing = "v";

    // simulate parameters
    SimConfig sim;
    double sim_kappa = 1.0;
    std::string snapshot_path;

    auto* c_validate = app.add_subcommand("validate", "check model assumptions on a lattice");
    add_common(c_validate, args, false);

    auto* c_window = app.add_subcommand("window", "bifurcation velocities of the portrait sweep");
    add_common(c_window, args, false);

    auto* c_portrait = app.add_subcommand("portrait", "classify the phase portrait at a velocity");
    add_common(c_portrait, args);
    c_portrait->add_option("--v", v, "wave speed")->required();
    c_portrait->add_option("--kappa", kappa, "dissipation ratio (affects eigen-data only)");

    auto* c_connect = app.add_subcommand("connect", "saddle-saddle connection at fixed v or kappa");
    add_common(c_connect, args);
    c_connect->add_option("--v", v, "solve kappa(v)");
    c_connect->add_option("--kappa", kappa, "solve v(kappa)");

    auto* c_sweep = app.add_subcommand("sweep", "sample the v-kappa connection curve");
    add_common(c_sweep, args);
    c_sweep->add_option("-n", n, "number of samples");
    c_sweep->add_option("--spacing", spacing, "grid spacing: v or logk")
        ->check(CLI::IsMember({"v", "logk"}));
    c_sweep->add_option("--jobs", args.jobs, "parallel workers");

    auto* c_solve = app.add_subcommand("solve", "full Riemann solution for a dissipation ratio");
    add_common(c_solve, args);
    c_solve->add_option("--kappa", kappa, "dissipation ratio")->required();
    c_solve->add_option("-n", grid_points, "profile sample count");

    auto* c_lax = app.add_subcommand("lax", "zero-ratio limit solution (classical criterion)");
    add_common(c_lax, args, false);
    c_lax->add_option("-n", grid_points, "profile sample count");

    auto* c_sim = app.add_subcommand("simulate", "explicit finite-volume run of the dissipative system");
    add_common(c_sim, args);
    c_sim->add_option("--kappa", sim_kappa, "dissipation ratio (sets eps_r or eps_d)");
    c_sim->add_option("--eps-c", sim.eps_c, "capillary coefficient");
    c_sim->add_option("--eps-d", sim.eps_d, "diffusion coefficient (three-parameter mode)");
    c_sim->add_option("--eps-r", sim.eps_r, "relaxation time (three-parameter mode)");
    c_sim->add_flag("--three-parameter", sim.three_parameter, "enable all three coefficients");
    c_sim->add_option("--cells", sim.cells, "grid cells");
    c_sim->add_option("--cfl", sim.cfl, "CFL number in (0, 0.5]");
    c_sim->add_option("--t-end", sim.t_end, "end time");
    c_sim->add_option("--length", sim.length, "domain length");
    c_sim->add_option("--x0", sim.front_x0, "initial front position");
    c_sim->add_option("--jobs", sim.jobs, "parallel workers for spatial loops");
    c_sim->add_option("--snapshot", snapshot_path, "CSV path for the final (x,s,c,alpha) snapshot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage errors exit 1, --help exits 0
    }

    try {
        if (c_validate->parsed()) {
            ModelSet m = load_model(args.model_spec);
            auto rep = validate_assumptions(m);
            emit(to_json(rep));
            return rep.all_passed() ? 0 : 2;
        }

        if (c_window->parsed()) {
            auto m = load_checked(args);
            emit(to_json(velocity_window(m)));
            return 0;
        }

        if (c_portrait->parsed()) {
            auto m = load_checked(args);
            TravellingWaveSystem sys(m, v, kappa > 0 ? kappa : 1.0, args.system());
            auto rep = classify_portrait(sys);
            emit(to_json(rep));
            if (!args.out_path.empty()) {
                auto man = manifest_for("portrait", args, {{"v", v}});
                std::vector<std::vector<double>> rows;
                for (auto& r : sample_nullcline(m, v).rows)
                    rows.push_back({0.0, r[2], r[0], r[1]});
                for (double cline : {m.c_plus, m.c_minus})
                    for (double s : linspace(0.0, 1.0, 65))
                        rows.push_back({1, cline == m.c_minus ? 1.0 : 0.0, cline, s});
                write_csv_file(args.out_path, man, {"curve", "branch", "c", "s"}, rows);
            }
            return 0;
        }

        if (c_connect->parsed()) {
            auto m = load_checked(args);
            if ((kappa > 0) == (v > 0))
                throw domain_error("connect: pass exactly one of --v or --kappa");
            ConnectionResult r = v > 0 ? find_kappa_for_v(m, v, args.system())
                                       : find_v_for_kappa(m, kappa, args.system());
            emit(to_json(r));
            if (!args.out_path.empty()) {
                auto man = manifest_for("connect", args, {{"v", r.v}, {"kappa", r.kappa}});
                std::vector<std::vector<double>> rows;
                for (const auto& ts : r.trajectory) rows.push_back({ts.c, ts.s});
                write_csv_file(args.out_path, man, {"c", "s"}, rows);
            }
            return 0;
        }

        if (c_sweep->parsed()) {
            auto m = load_checked(args);
            auto curve = sweep_curve(m, n,
                                     spacing == "v" ? SweepSpacing::uniform_in_v
                                                    : SweepSpacing::log_in_kappa,
                                     args.system(), args.jobs);
            emit(to_json(curve));
            if (!args.out_path.empty()) {
                auto man = manifest_for("sweep", args, {{"n", n}, {"spacing", spacing}});
                std::vector<std::vector<double>> rows;
                for (const auto& s : curve.samples)
                    rows.push_back({s.v, s.kappa, s.s_minus, s.s_plus, s.rh_residual});
                write_csv_file(args.out_path, man,
                               {"v", "kappa", "s_minus", "s_plus", "rh_residual"}, rows);
            }
            return 0;
        }

        if (c_solve->parsed() || c_lax->parsed()) {
            auto m = load_checked(args);
            WaveSequence seq =
                c_lax->parsed() ? solve_lax_baseline(m) : solve_riemann(m, kappa, args.system());
            emit(to_json(seq));
            if (!args.out_path.empty()) {
                auto man = manifest_for(c_lax->parsed() ? "lax" : "solve", args,
                                        {{"kappa", seq.shock.kappa}, {"n", grid_points}});
                emit_profile_csv(args.out_path, man, seq, grid_points);
            }
            return 0;
        }

        if (c_sim->parsed()) {
            auto m = load_checked(args);
            if (!sim.three_parameter) {
                if (args.system() == SystemKind::non_equilibrium_adsorption) {
                    sim.eps_r = sim_kappa * sim.eps_c;
                    sim.eps_d = 0;
                } else {
                    sim.eps_d = sim_kappa * sim.eps_c;
                    sim.eps_r = 0;
                }
            }
            auto res = run_simulation(m, sim);
            json report{{"steps", res.steps},
                        {"dt", res.dt},
                        {"t_end", res.history.back().time},
                        {"kappa", sim_kappa}};
            try {
                report["front"] = to_json(measure_front_speed(res, m));
            } catch (const solver_error& e) {
                report["front"] = {{"error", e.what()}};
            }
            emit(report);
            json params{{"kappa", sim_kappa}, {"eps_c", sim.eps_c},  {"eps_d", sim.eps_d},
                        {"eps_r", sim.eps_r}, {"cells", sim.cells},  {"cfl", sim.cfl},
                        {"t_end", sim.t_end}, {"length", sim.length}};
            if (!args.out_path.empty()) {
                auto man = manifest_for("simulate", args, params);
                std::vector<std::vector<double>> rows;
                for (const auto& g : res.history) {
                    double x = front_position(g, m, sim.dx());
                    if (x >= 0) rows.push_back({g.time, x});
                }
                write_csv_file(args.out_path, man, {"t", "x_front"}, rows);
            }
            if (!snapshot_path.empty()) {
                auto man = manifest_for("simulate", args, params);
                const auto& g = res.history.back();
                std::vector<std::vector<double>> rows;
                for (std::size_t i = 0; i < g.s.size(); ++i)
                    rows.push_back({(static_cast<double>(i) + 0.5) * sim.dx(), g.s[i], g.c[i],
                                    g.alpha[i]});
                write_csv_file(snapshot_path, man, {"x", "s", "c", "alpha"}, rows);
            }
            return 0;
        }
    } catch (const model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
