#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "biharm/cli.hpp"
#include "biharm/errors.hpp"
#include "biharm/io.hpp"

using namespace biharm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("biharm_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig base(Command c, const fs::path& out) {
    RunConfig r;
    r.command = c;
    r.out_dir = out.string();
    return r;
}

}  // namespace

TEST_CASE("run config round trip") {
    RunConfig c;
    c.command = Command::gap;
    c.potential = "1-0.4*exp(-t^2)";
    c.lambda = 0.3;
    c.seeds = {1, 2, 18446744073709551615ull};
    c.b_values = {3.5, 0.1};
    c.sweep_values = {0.1, 0.2, 1.0 / 3.0};
    c.tol = 1e-7;
    const std::string first = canonical_json(c.to_json());
    const RunConfig back = RunConfig::from_json(nlohmann::json::parse(first));
    CHECK(canonical_json(back.to_json()) == first);
    CHECK(back.sweep_values[2] == 1.0 / 3.0);
    CHECK(back.seeds[2] == 18446744073709551615ull);
    CHECK(back.command == Command::gap);

    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json{{"command", "fly"}}), config_error);
    CHECK_THROWS_AS(command_from_string("solver"), config_error);
    for (Command k : {Command::solve, Command::rearrange, Command::moser, Command::ratio, Command::check, Command::gap,
                      Command::sweep})
        CHECK(command_from_string(to_string(k)) == k);
}

TEST_CASE("grid spec") {
    double r = 0;
    int n = 0;
    parse_grid_spec("20:2048", r, n);
    CHECK(r == 20.0);
    CHECK(n == 2048);
    parse_grid_spec("12.5:300", r, n);
    CHECK(r == 12.5);
    CHECK(n == 300);
    for (const char* bad : {"20", "20:", ":10", "a:10", "20:10x", "20:2.5", "-1:100", "20:3"})
        CHECK_THROWS_AS(parse_grid_spec(bad, r, n), config_error);
}

TEST_CASE("canonical json") {
    nlohmann::json j{{"b", 0.1}, {"a", 1.0}, {"c", number(INFINITY)}, {"d", number(-INFINITY)}, {"e", number(NAN)}, {"f", 3}};
    const std::string s = canonical_json(j);
    CHECK(s == "{\n  \"a\": 1.0,\n  \"b\": 0.10000000000000001,\n  \"c\": \"inf\",\n  \"d\": \"-inf\",\n  \"e\": \"nan\",\n  \"f\": 3\n}\n");
    CHECK(nlohmann::json::parse(s)["b"].get<double>() == 0.1);
}

TEST_CASE("field csv round trip is exact") {
    auto g = build_grid(20.0, 777, 4);
    auto u = sample(g, [](double r) { return std::exp(-r * r / 3) * std::sin(1 + r) / 7.0; });
    const fs::path dir = fresh_dir("csv");
    save_field_csv((dir / "u.csv").string(), u);
    const RadialField v = load_field_csv((dir / "u.csv").string(), 4);
    CHECK(v.grid->n_points == 777);
    CHECK(v.grid->r_max == 20.0);
    CHECK(v.grid->h == g->h);
    for (int i = 0; i < g->n_points; ++i) {
        CHECK(v.values[i] == u.values[i]);
        CHECK(v.grid->nodes[i] == g->nodes[i]);
    }
    CHECK_THROWS_AS(parse_field_csv("x,y\n0,1\n1,2\n", 4), parse_error);
    CHECK_THROWS(parse_field_csv("r,u\n0,1\n1,2\n3,4\n", 4));
}

TEST_CASE("check command") {
    const fs::path dir = fresh_dir("check");
    RunConfig c = base(Command::check, dir);
    c.g_expr = "t";
    c.K = 1.0;
    std::ostringstream log;
    CHECK(run(c, log) == 0);
    const auto j = nlohmann::json::parse(read_file((dir / "check_report.json").string()));
    CHECK(j["report"]["growth"]["bounded_verdict"] == "fails");
    CHECK(j["version"] == version_string());
}

TEST_CASE("exit codes") {
    std::ostringstream log;
    SUBCASE("configuration errors") {
        RunConfig c = base(Command::solve, fresh_dir("cfg"));
        c.lambda = 1.5;
        CHECK(run(c, log) == 3);
        c.lambda = 0.5;
        c.nonlinearity = "cubic";
        CHECK(run(c, log) == 3);
        c.nonlinearity = "user_expr";
        c.f_expr = "t*+2";
        CHECK(run(c, log) == 3);
    }
    SUBCASE("non-convergence") {
        const fs::path dir = fresh_dir("noconv");
        RunConfig c = base(Command::solve, dir);
        c.n_points = 512;
        c.max_iters = 3;
        CHECK(run(c, log) == 2);
        const auto j = nlohmann::json::parse(read_file((dir / "solve_report.json").string()));
        CHECK(j["report"]["runs"][0]["converged"] == false);
    }
}

TEST_CASE("deterministic reports") {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    for (Command k : {Command::moser, Command::ratio, Command::rearrange}) {
        RunConfig c = base(k, a);
        c.budget = 12;
        std::ostringstream log;
        REQUIRE(run(c, log) == 0);
        c.out_dir = b.string();
        REQUIRE(run(c, log) == 0);
    }
    for (const char* f : {"moser_table.csv", "ratio_report.json", "rearrange_checks.json", "rearranged.csv"})
        CHECK(read_file((a / f).string()) == read_file((b / f).string()));
}

TEST_CASE("sweep keeps the input order") {
    const fs::path dir = fresh_dir("sweep");
    RunConfig c = base(Command::sweep, dir);
    c.sweep_command = "ratio";
    c.sweep_param = "lambda";
    c.sweep_values = {0.2, 0.5, 0.8};
    c.budget = 8;
    c.L = 10.0;
    c.jobs = 3;
    std::ostringstream log;
    REQUIRE(run(c, log) == 0);
    const auto j = nlohmann::json::parse(read_file((dir / "sweep_report.json").string()));
    REQUIRE(j["report"]["runs"].size() == 3);
    CHECK(j["report"]["runs"][0]["value"] == 0.2);
    CHECK(j["report"]["runs"][2]["value"] == 0.8);
    const std::string once = read_file((dir / "sweep_report.json").string());
    c.jobs = 1;
    REQUIRE(run(c, log) == 0);
    CHECK(read_file((dir / "sweep_report.json").string()) == once);
}
