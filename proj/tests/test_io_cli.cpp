#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chemflood/io.hpp"

using namespace chemflood;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

#ifdef CHEMFLOOD_CLI_PATH
int run_cli(const std::string& args) {
    std::string cmd = std::string(CHEMFLOOD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}
#endif

} // namespace

TEST_SUITE("io") {

TEST_CASE("model configuration round trip") {
    json j{{"flux", {{"kind", "boomerang"}}},
           {"adsorption", {{"kind", "langmuir"}, {"m", 1.0}, {"b", 1.0}}},
           {"capillarity", {{"kind", "constant"}, {"value", 1.0}}},
           {"c_minus", 1.0},
           {"c_plus", 0.0}};
    auto m = model_from_json(j);
    CHECK(m.flux.value(0.5, 0.0) == doctest::Approx(0.5));
    CHECK(m.adsorption.value(1.0) == doctest::Approx(0.5));
    CHECK(m.capillarity.value(0.3, 0.3) == doctest::Approx(1.0));

    auto back = model_to_json(m);
    CHECK(back["flux"]["kind"] == "boomerang");
    CHECK(back["c_minus"] == 1.0);
}

TEST_CASE("model configuration rejects malformed input") {
    CHECK_THROWS_AS(model_from_json(json{{"flux", {{"kind", "nope"}}}}), domain_error);
    CHECK_THROWS_AS(model_from_json(json{{"c_minus", 0.2}, {"c_plus", 0.8}}), domain_error);
    CHECK_THROWS_AS(model_from_json(json{{"adsorption", {{"kind", "mystery"}}}}), domain_error);
}

TEST_CASE("tabulated flux comes in through the config") {
    json j{{"flux",
            {{"kind", "table"},
             {"s", {0.0, 0.25, 0.5, 0.75, 1.0}},
             {"c", {0.0, 1.0}},
             {"values", {{0.0, 0.1, 0.5, 0.9, 1.0}, {0.0, 0.1, 0.5, 0.9, 1.0}}}}}};
    auto m = model_from_json(j);
    CHECK(m.flux.value(0.5, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("builtin model names load directly") {
    CHECK_NOTHROW(load_model("boomerang"));
    CHECK_NOTHROW(load_model("builtin:corey"));
    CHECK_THROWS_AS(load_model("/nonexistent/path.json"), domain_error);
}

TEST_CASE("csv emission is deterministic and carries the manifest") {
    RunManifest man;
    man.subcommand = "sweep";
    man.model_spec = "boomerang";
    man.parameters = {{"n", 3}};
    std::vector<std::vector<double>> rows{{0.7, 1.5}, {0.71, 1.2}, {0.72, 0.9}};
    std::ostringstream a, b;
    write_csv(a, man, {"v", "kappa"}, rows);
    write_csv(b, man, {"v", "kappa"}, rows);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# {", 0) == 0);
    CHECK(a.str().find("\"subcommand\":\"sweep\"") != std::string::npos);
    CHECK(a.str().find("v,kappa\n") != std::string::npos);
    // full precision round trip
    CHECK(a.str().find("0.71") != std::string::npos);
}

TEST_CASE("scalar fan csv rows") {
    auto m = boomerang_model();
    auto fan = solve_scalar_riemann(m.flux, 0.0, 1.0, 0.0);
    auto rows = fan_csv_rows(fan, 101);
    REQUIRE(rows.size() == 101);
    CHECK(rows.front()[0] < fan.v_initial);
    CHECK(rows.back()[0] > fan.v_final);
    CHECK(rows.front()[1] == doctest::Approx(1.0));
    CHECK(rows.back()[1] == doctest::Approx(0.0));
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i + 1][1] <= rows[i][1] + 1e-12);
    CHECK(fan_csv_rows(solve_scalar_riemann(m.flux, 0.0, 0.3, 0.3), 11).empty());
}

TEST_CASE("report serialization smoke") {
    auto m = boomerang_model();
    auto w = velocity_window(m);
    auto jw = to_json(w);
    CHECK(jw["v_0I"] == doctest::Approx(2.0 / 3.0));
    auto rep = classify_portrait(TravellingWaveSystem(m, 0.71, 1.0));
    auto jp = to_json(rep);
    CHECK(jp["portrait"] == "TypeII");
    CHECK(jp["points"].size() == 4);
    CHECK(jp.contains("gap"));
    auto val = to_json(validate_assumptions(m, 64));
    CHECK(val["all_passed"] == true);
}

#ifdef CHEMFLOOD_CLI_PATH
TEST_CASE("cli exit codes and artifacts") {
    CHECK(run_cli("validate -m boomerang") == 0);
    CHECK(run_cli("validate -m corey") == 2);      // model-validation failure
    CHECK(run_cli("window -m corey") == 2);        // solvers reject invalid models
    CHECK(run_cli("connect -m boomerang") == 1);   // neither --v nor --kappa
    CHECK(run_cli("bogus-subcommand") != 0);

    SUBCASE("solve emits a deterministic profile csv") {
        std::string p1 = "/tmp/chemflood_test_prof1.csv";
        std::string p2 = "/tmp/chemflood_test_prof2.csv";
        REQUIRE(run_cli("solve -m boomerang --kappa 2 -n 200 -o " + p1) == 0);
        REQUIRE(run_cli("solve -m boomerang --kappa 2 -n 200 -o " + p2) == 0);
        auto s1 = slurp(p1);
        CHECK(s1 == slurp(p2));
        CHECK(s1.rfind("# {", 0) == 0);
        CHECK(s1.find("xi,s,c\n") != std::string::npos);
        std::remove(p1.c_str());
        std::remove(p2.c_str());
    }
    SUBCASE("sweep csv has the contracted columns and ignores worker count") {
        std::string p1 = "/tmp/chemflood_test_sweep1.csv";
        std::string p2 = "/tmp/chemflood_test_sweep2.csv";
        REQUIRE(run_cli("sweep -m boomerang -n 4 --jobs 1 -o " + p1) == 0);
        REQUIRE(run_cli("sweep -m boomerang -n 4 --jobs 3 -o " + p2) == 0);
        auto s = slurp(p1);
        CHECK(s.find("v,kappa,s_minus,s_plus,rh_residual\n") != std::string::npos);
        CHECK(s == slurp(p2)); // identical manifest -> identical bytes
        std::remove(p1.c_str());
        std::remove(p2.c_str());
    }
}
#endif

} // TEST_SUITE
