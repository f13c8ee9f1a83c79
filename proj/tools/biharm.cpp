#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biharm/cli.hpp"
#include "biharm/errors.hpp"

namespace {

// flags override values from --config; only options given on the command line are applied
struct Flags {
    std::string config_path, out_dir, grid, V, nonlinearity, f, mode, field, u, g, param, sub;
    int dim = 0, jobs = 0, max_iters = 0, rearrange_interval = 0, budget = 0;
    double gamma = 0, lambda = 0, theta = 0, alpha0 = 0, ar_mu = 0, cap = 0, tol = 0, mass_target = 0, K = 0, L = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> b, values;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config_path, "JSON run configuration");
    app->add_option("--out-dir", f.out_dir, "output directory (default ./out)");
    app->add_option("--grid", f.grid, "grid as R_MAX:N, e.g. 20:2048");
    app->add_option("--dim", f.dim, "dimension, 4 or 2");
    app->add_option("--gamma", f.gamma, "constant potential value");
    app->add_option("--lambda", f.lambda, "lambda of the exp-critical nonlinearity");
    app->add_option("--V", f.V, "radial potential expression in t = r");
    app->add_option("--nonlinearity", f.nonlinearity, "exp_critical | exact_growth | user_expr");
    app->add_option("--theta", f.theta, "exponent of the exact growth family");
    app->add_option("--f", f.f, "user nonlinearity f(t)");
    app->add_option("--alpha0", f.alpha0, "critical exponent of a user nonlinearity");
    app->add_option("--ar-mu", f.ar_mu, "Ambrosetti-Rabinowitz exponent to record");
    app->add_option("--cap", f.cap, "overflow cap on |u|");
    app->add_option("--jobs", f.jobs, "parallel workers for sweep (BIHARM_JOBS overrides)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial ground states for exponential-critical fourth-order problems"};
    app.set_version_flag("--version", biharm::version_string());
    app.require_subcommand(1);
    Flags f;

    std::vector<CLI::App*> subs;
    auto* solve = app.add_subcommand("solve", "constrained minimisation and recovery");
    auto* rearrange = app.add_subcommand("rearrange", "Fourier rearrangement of a field");
    auto* moser = app.add_subcommand("moser", "Moser sequence estimate table");
    auto* ratio = app.add_subcommand("ratio", "Adams ratio lower bound");
    auto* check = app.add_subcommand("check", "growth conditions and classifier");
    auto* gap = app.add_subcommand("gap", "Rabinowitz energy gap");
    auto* sweep = app.add_subcommand("sweep", "run a command over a list of parameter values");
    subs = {solve, rearrange, moser, ratio, check, gap, sweep};
    for (auto* s : subs) add_common(s, f);

    for (auto* s : {solve, gap, sweep}) {
        s->add_option("--mode", f.mode, "pohozaev | nehari");
        s->add_option("--max-iters", f.max_iters);
        s->add_option("--tol", f.tol);
        s->add_option("--rearrange-interval", f.rearrange_interval);
        s->add_option("--mass-target", f.mass_target);
        s->add_option("--seeds", f.seeds, "random initial data seeds");
    }
    rearrange->add_option("--field", f.field, "input field CSV (header r,u)");
    rearrange->add_option("--u", f.u, "input field expression in t = r");
    for (auto* s : {moser, check, sweep}) s->add_option("--K", f.K);
    moser->add_option("--b", f.b, "Moser heights b_k");
    for (auto* s : {ratio, sweep}) {
        s->add_option("--L", f.L, "energy budget (default R(F))");
        s->add_option("--budget", f.budget, "number of trial functions");
    }
    check->add_option("--g", f.g, "g(t) to classify (default g_lambda)");
    sweep->add_option("--param", f.param, "lambda | gamma | theta | K | L");
    sweep->add_option("--values", f.values, "parameter values");
    sweep->add_option("--command", f.sub, "command to sweep (default solve)");

    CLI11_PARSE(app, argc, argv);

    CLI::App* used = nullptr;
    for (auto* s : subs)
        if (s->parsed()) used = s;

    try {
        biharm::RunConfig cfg;
        if (!f.config_path.empty()) cfg = biharm::RunConfig::from_json(biharm::json::parse(biharm::read_file(f.config_path)));
        cfg.command = biharm::command_from_string(used->get_name());
        auto given = [&](const char* name) { return used->get_option_no_throw(name) && used->count(name) > 0; };
        if (given("--out-dir")) cfg.out_dir = f.out_dir;
        if (given("--grid")) biharm::parse_grid_spec(f.grid, cfg.r_max, cfg.n_points);
        if (given("--dim")) cfg.dimension = f.dim;
        if (given("--gamma")) cfg.gamma = f.gamma;
        if (given("--lambda")) cfg.lambda = f.lambda;
        if (given("--V")) cfg.potential = f.V;
        if (given("--nonlinearity")) cfg.nonlinearity = f.nonlinearity;
        if (given("--theta")) cfg.theta = f.theta;
        if (given("--f")) cfg.f_expr = f.f;
        if (given("--alpha0")) cfg.alpha0 = f.alpha0;
        if (given("--ar-mu")) cfg.ar_mu = f.ar_mu;
        if (given("--cap")) cfg.overflow_cap = f.cap;
        if (given("--jobs")) cfg.jobs = f.jobs;
        if (given("--mode")) cfg.mode = f.mode;
        if (given("--max-iters")) cfg.max_iters = f.max_iters;
        if (given("--tol")) cfg.tol = f.tol;
        if (given("--rearrange-interval")) cfg.rearrange_interval = f.rearrange_interval;
        if (given("--mass-target")) cfg.mass_target = f.mass_target;
        if (given("--seeds")) cfg.seeds = f.seeds;
        if (given("--field")) cfg.field_path = f.field;
        if (given("--u")) cfg.u_expr = f.u;
        if (given("--K")) cfg.K = f.K;
        if (given("--b")) cfg.b_values = f.b;
        if (given("--L")) cfg.L = f.L;
        if (given("--budget")) cfg.budget = f.budget;
        if (given("--g")) cfg.g_expr = f.g;
        if (given("--param")) cfg.sweep_param = f.param;
        if (given("--values")) cfg.sweep_values = f.values;
        if (given("--command")) cfg.sweep_command = f.sub;
        if (const char* env = std::getenv("BIHARM_JOBS")) {
            try {
                cfg.jobs = std::stoi(env);
            } catch (const std::logic_error&) {
                throw biharm::config_error(std::string("BIHARM_JOBS must be an integer, got '") + env + "'");
            }
        }
        return biharm::run(cfg, std::cout);
    } catch (const biharm::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const biharm::json::exception& e) {
        std::cerr << "error: malformed config: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
