#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "biharm/io.hpp"
#include "biharm/model.hpp"

namespace biharm {

enum class Command { solve, rearrange, moser, ratio, check, gap, sweep };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct RunConfig {
    Command command = Command::solve;

    // problem
    int dimension = 4;
    double gamma = 1.0;
    double lambda = 0.5;
    std::string potential;               // expression in t = r; empty means the constant gamma
    std::string nonlinearity = "exp_critical";  // exp_critical | exact_growth | user_expr
    double theta = 0.0;
    std::string f_expr;
    double alpha0 = 2.0;
    double ar_mu = 2.5;
    double overflow_cap = 6.0;

    // grid
    double r_max = 20.0;
    int n_points = 2048;

    // solver
    std::string mode = "pohozaev";  // pohozaev | nehari
    int max_iters = 4000;
    double tol = 1e-7;
    int rearrange_interval = 10;
    double mass_target = 1.0;
    std::vector<std::uint64_t> seeds;

    // rearrange
    std::string field_path;
    std::string u_expr = "exp(-t^2/2)";

    // moser
    double K = 1.0;
    std::vector<double> b_values{3.0, 5.0, 8.0};

    // ratio; L <= 0 means the threshold R(F)
    double L = 0.0;
    int budget = 40;

    // check; empty g means g_lambda of the problem
    std::string g_expr;

    // sweep
    std::string sweep_param = "lambda";
    std::vector<double> sweep_values;
    std::string sweep_command = "solve";

    int jobs = 1;
    std::string out_dir = "out";

    json to_json() const;
    static RunConfig from_json(const json& j);

    ProblemConfig problem() const;
    GridPtr grid() const;
};

// "20:2048" -> (20, 2048)
void parse_grid_spec(const std::string& spec, double& r_max, int& n_points);

std::string version_string();

// exit codes: 0 success, 2 solver non-convergence, 3 configuration error, 1 other failures
int run(const RunConfig& config, std::ostream& log);

}  // namespace biharm
