#include "biharm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>
#include <utility>

#include "biharm/errors.hpp"
#include "biharm/expression.hpp"

#ifndef BIHARM_VERSION
#define BIHARM_VERSION "0.1.0"
#endif

namespace biharm {

namespace {

const char* command_names[] = {"solve", "rearrange", "moser", "ratio", "check", "gap", "sweep"};

struct Artifact {
    std::string name;
    std::string content;
};

struct Outcome {
    json report;
    int exit_code = 0;
    std::vector<Artifact> artifacts;
};

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

double read_double(const json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw config_error("expected a number, got \"" + s + "\"");
    }
    return v.get<double>();
}

void read_num(const json& j, const char* key, double& out) {
    if (j.contains(key)) out = read_double(j.at(key));
}

json config_echo(const RunConfig& c) {
    json j = c.to_json();
    j.erase("jobs");
    j.erase("out_dir");
    return j;
}

json envelope(const RunConfig& c, json body) {
    return json{{"version", version_string()}, {"config", config_echo(c)}, {"report", std::move(body)}};
}

RadialField random_init(GridPtr g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.5, 1.5), width(0.4, 1.6), bend(0.0, 0.5);
    const double a = amp(rng), w = width(rng), c = bend(rng);
    return sample(std::move(g), [=](double r) { return a * (1.0 + c * r * r) * std::exp(-0.5 * (r / w) * (r / w)); });
}

SolverOptions solver_options(const RunConfig& c) {
    SolverOptions o;
    o.max_iters = c.max_iters;
    o.tol = c.tol;
    o.rearrange_interval = c.rearrange_interval;
    o.mass_target = c.mass_target;
    o.throw_on_failure = false;
    o.trace_stride = 10;
    return o;
}

Outcome do_solve(const RunConfig& c) {
    const ProblemConfig pc = c.problem();
    const GridPtr g = c.grid();
    const SolverOptions o = solver_options(c);
    if (c.mode != "pohozaev" && c.mode != "nehari") throw config_error("unknown solve mode '" + c.mode + "'");

    std::vector<std::pair<std::int64_t, RadialField>> inits;
    if (c.seeds.empty()) {
        inits.emplace_back(-1, default_init(g));
    } else {
        for (std::uint64_t s : c.seeds) inits.emplace_back(static_cast<std::int64_t>(s), random_init(g, s));
    }

    Outcome out;
    json runs = json::array();
    const SolveReport* best = nullptr;
    std::vector<SolveReport> reports;
    reports.reserve(inits.size());
    for (const auto& [seed, init] : inits) {
        reports.push_back(c.mode == "nehari" ? minimize_nehari(pc, init, o) : minimize_pohozaev(pc, init, o));
        json r = to_json(reports.back());
        if (seed >= 0) r["seed"] = seed;
        runs.push_back(std::move(r));
        if (!reports.back().converged) out.exit_code = 2;
    }
    double lo = reports.front().objective, hi = lo;
    for (const SolveReport& r : reports) {
        lo = std::min(lo, r.objective);
        hi = std::max(hi, r.objective);
        if (!best || r.objective < best->objective) best = &r;
    }
    json body{{"runs", std::move(runs)}, {"objective_spread", number((hi - lo) / std::abs(lo))}};
    if (c.mode == "pohozaev") body["below_8pi2"] = best->objective < 8.0 * std::numbers::pi * std::numbers::pi;
    out.report = envelope(c, std::move(body));
    out.artifacts.push_back({"solve_report.json", canonical_json(out.report)});
    out.artifacts.push_back({"field.csv", field_csv(best->field)});
    if (best->recovered) out.artifacts.push_back({"recovered.csv", field_csv(*best->recovered)});
    return out;
}

Outcome do_rearrange(const RunConfig& c) {
    RadialField u = c.field_path.empty() ? sample(c.grid(), Expression::parse(c.u_expr).as_function())
                                         : load_field_csv(c.field_path, c.dimension);
    const RearrangeResult r = fourier_rearrange(u);
    Outcome out;
    out.report = envelope(c, json{{"checks", to_json(r.checks)}});
    out.artifacts.push_back({"rearrange_checks.json", canonical_json(out.report)});
    out.artifacts.push_back({"input.csv", field_csv(u)});
    out.artifacts.push_back({"rearranged.csv", field_csv(r.w)});
    return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

Outcome do_moser(const RunConfig& c) {
    const ProblemConfig pc = c.problem();
    if (c.b_values.empty()) throw config_error("moser needs at least one b value");
    const double principal = c.dimension == 4 ? 32.0 * std::numbers::pi * std::numbers::pi * c.K : 4.0 * std::numbers::pi * c.K;
    struct Row {
        double b, l2, lap, G;
    };
    std::vector<Row> rows;
    std::vector<double> lb, ldef, ll2;
    for (double b : c.b_values) {
        if (!(b > 0)) throw config_error("b values must be positive");
        const RadialProfile p = c.dimension == 4 ? moser_profile(MoserParams::moser(b, c.K)) : moser_profile_2d(b, c.K);
        const ProfileNorms n = profile_norms(p);
        const double cap = std::numeric_limits<double>::max();
        const double G = profile_integral(p, [&](const ProfilePoint& q) {
            return eval_potential(pc.potential, q.r) * q.u * q.u - 2.0 * eval_F(pc.nonlinearity, q.u, cap);
        });
        rows.push_back({b, n.l2_sq, n.lap_l2_sq, G});
        lb.push_back(std::log(b));
        ll2.push_back(std::log(n.l2_sq));
        const double def = std::abs(n.lap_l2_sq - principal);
        if (def > 0) ldef.push_back(std::log(def));
    }
    const double lap_exp = ldef.size() == lb.size() ? fit_slope(lb, ldef) : std::numeric_limits<double>::quiet_NaN();
    const double l2_exp = fit_slope(lb, ll2);
    std::string csv = "k,b_k,l2_sq,lap_l2_sq,G,lap_defect_exponent,l2_exponent\n";
    char buf[256];
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", k + 1, rows[k].b, rows[k].l2,
                      rows[k].lap, rows[k].G, lap_exp, l2_exp);
        csv += buf;
    }
    Outcome out;
    out.report = envelope(c, json{{"lap_defect_exponent", number(lap_exp)}, {"l2_exponent", number(l2_exp)}, {"rows", rows.size()}});
    out.artifacts.push_back({"moser_table.csv", csv});
    return out;
}

Outcome do_ratio(const RunConfig& c) {
    const ProblemConfig pc = c.problem();
    const double L = c.L > 0 ? c.L : pc.adams_beta / pc.nonlinearity.alpha0;
    Outcome out;
    out.report = envelope(c, to_json(adams_ratio_search(pc, L, c.budget)));
    out.artifacts.push_back({"ratio_report.json", canonical_json(out.report)});
    return out;
}

Outcome do_check(const RunConfig& c) {
    const ProblemConfig pc = c.problem();
    std::function<double(double)> g;
    if (c.g_expr.empty()) {
        // the classifier probes up to double overflow, not to the solver cap
        ProblemConfig wide = pc;
        wide.overflow_cap = std::numeric_limits<double>::infinity();
        g = [wide](double t) { return eval_g_lambda(wide, t); };
    } else {
        g = Expression::parse(c.g_expr).as_function();
    }
    if (!(c.K > 0)) throw config_error("K must be positive");
    const GrowthClassification cls = classify_growth(g, c.K, default_probes(g, c.K));
    std::vector<double> ts;
    for (int i = 0; i < 200; ++i) ts.push_back(1e-3 * std::pow(pc.overflow_cap / 1e-3, i / 199.0));
    const ConditionReport cond = check_conditions(pc.nonlinearity, ts, pc.overflow_cap);
    Outcome out;
    out.report = envelope(c, json{{"growth", to_json(cls)}, {"conditions", to_json(cond)}});
    out.artifacts.push_back({"check_report.json", canonical_json(out.report)});
    return out;
}

Outcome do_gap(const RunConfig& c) {
    const ProblemConfig pc = c.problem();
    const GridPtr g = c.grid();
    SolverOptions o = solver_options(c);
    const GapReport r = limiting_gap(pc, default_init(g), o);
    Outcome out;
    out.report = envelope(c, to_json(r));
    if (!r.solve_V.converged || !r.solve_infty.converged) out.exit_code = 2;
    out.artifacts.push_back({"gap_report.json", canonical_json(out.report)});
    return out;
}

Outcome execute(const RunConfig& c);

Outcome do_sweep(const RunConfig& c) {
    if (c.sweep_values.empty()) throw config_error("sweep needs a list of values");
    const Command sub = command_from_string(c.sweep_command);
    if (sub == Command::sweep) throw config_error("sweep cannot nest");
    const std::string& p = c.sweep_param;
    if (p != "lambda" && p != "gamma" && p != "theta" && p != "K" && p != "L")
        throw config_error("unknown sweep parameter '" + p + "'");

    const std::size_t n = c.sweep_values.size();
    std::vector<Outcome> results(n);
    auto job = [&](std::size_t i) {
        RunConfig child = c;
        child.command = sub;
        const double v = c.sweep_values[i];
        if (p == "lambda") child.lambda = v;
        else if (p == "gamma") child.gamma = v;
        else if (p == "theta") child.theta = v;
        else if (p == "K") child.K = v;
        else child.L = v;
        results[i] = execute(child);
    };
    const int workers = std::max(1, std::min<int>(c.jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) job(i);
            });
        for (auto& t : pool) t.join();
    }

    Outcome out;
    json runs = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        runs.push_back({{"value", number(c.sweep_values[i])}, {"exit_code", results[i].exit_code}, {"result", results[i].report}});
        if (out.exit_code == 0) out.exit_code = results[i].exit_code;
    }
    out.report = envelope(c, json{{"runs", std::move(runs)}});
    out.artifacts.push_back({"sweep_report.json", canonical_json(out.report)});
    return out;
}

Outcome execute(const RunConfig& c) {
    try {
        switch (c.command) {
        case Command::solve: return do_solve(c);
        case Command::rearrange: return do_rearrange(c);
        case Command::moser: return do_moser(c);
        case Command::ratio: return do_ratio(c);
        case Command::check: return do_check(c);
        case Command::gap: return do_gap(c);
        case Command::sweep: return do_sweep(c);
        }
    } catch (const config_error& e) {
        return {json{{"error", e.what()}}, 3, {}};
    } catch (const parse_error& e) {
        return {json{{"error", e.what()}}, 3, {}};
    } catch (const convergence_error& e) {
        return {json{{"error", e.what()}}, 2, {}};
    } catch (const projection_error& e) {
        return {json{{"error", e.what()}}, 2, {}};
    } catch (const overflow_error& e) {
        return {json{{"error", e.what()}}, 2, {}};
    } catch (const std::exception& e) {
        return {json{{"error", e.what()}}, 1, {}};
    }
    return {json{{"error", "unknown command"}}, 3, {}};
}

}  // namespace

std::string to_string(Command c) { return command_names[static_cast<int>(c)]; }

Command command_from_string(const std::string& s) {
    for (int i = 0; i < 7; ++i)
        if (s == command_names[i]) return static_cast<Command>(i);
    throw config_error("unknown command '" + s + "'");
}

std::string version_string() { return std::string("biharm ") + BIHARM_VERSION; }

void parse_grid_spec(const std::string& spec, double& r_max, int& n_points) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw config_error("grid must look like R_MAX:N, got '" + spec + "'");
    try {
        std::size_t used = 0;
        const std::string a = spec.substr(0, colon), b = spec.substr(colon + 1);
        const double r = std::stod(a, &used);
        if (used != a.size()) throw config_error("bad r_max in grid '" + spec + "'");
        const int n = std::stoi(b, &used);
        if (used != b.size()) throw config_error("bad N in grid '" + spec + "'");
        if (!(r > 0) || !std::isfinite(r)) throw config_error("grid r_max must be positive in '" + spec + "'");
        if (n < 16) throw config_error("grid needs at least 16 points in '" + spec + "'");
        r_max = r;
        n_points = n;
    } catch (const std::logic_error&) {
        throw config_error("grid must look like R_MAX:N, got '" + spec + "'");
    }
}

json RunConfig::to_json() const {
    return json{
        {"command", to_string(command)},
        {"problem",
         {{"dimension", dimension},
          {"gamma", gamma},
          {"lambda", lambda},
          {"potential", potential},
          {"nonlinearity", nonlinearity},
          {"theta", theta},
          {"f", f_expr},
          {"alpha0", alpha0},
          {"ar_mu", ar_mu},
          {"overflow_cap", overflow_cap}}},
        {"grid", {{"r_max", r_max}, {"n_points", n_points}}},
        {"solver",
         {{"mode", mode},
          {"max_iters", max_iters},
          {"tol", tol},
          {"rearrange_interval", rearrange_interval},
          {"mass_target", mass_target},
          {"seeds", seeds}}},
        {"rearrange", {{"field", field_path}, {"u", u_expr}}},
        {"moser", {{"K", K}, {"b", b_values}}},
        {"ratio", {{"L", L}, {"budget", budget}}},
        {"check", {{"g", g_expr}}},
        {"sweep", {{"param", sweep_param}, {"values", sweep_values}, {"command", sweep_command}}},
        {"jobs", jobs},
        {"out_dir", out_dir}};
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    try {
        if (!j.is_object()) throw config_error("config must be a JSON object");
        if (j.contains("command")) c.command = command_from_string(j.at("command").get<std::string>());
        if (j.contains("problem")) {
            const json& p = j.at("problem");
            read_opt(p, "dimension", c.dimension);
            read_num(p, "gamma", c.gamma);
            read_num(p, "lambda", c.lambda);
            read_opt(p, "potential", c.potential);
            read_opt(p, "nonlinearity", c.nonlinearity);
            read_num(p, "theta", c.theta);
            read_opt(p, "f", c.f_expr);
            read_num(p, "alpha0", c.alpha0);
            read_num(p, "ar_mu", c.ar_mu);
            read_num(p, "overflow_cap", c.overflow_cap);
        }
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            read_num(g, "r_max", c.r_max);
            read_opt(g, "n_points", c.n_points);
        }
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            read_opt(s, "mode", c.mode);
            read_opt(s, "max_iters", c.max_iters);
            read_num(s, "tol", c.tol);
            read_opt(s, "rearrange_interval", c.rearrange_interval);
            read_num(s, "mass_target", c.mass_target);
            read_opt(s, "seeds", c.seeds);
        }
        if (j.contains("rearrange")) {
            read_opt(j.at("rearrange"), "field", c.field_path);
            read_opt(j.at("rearrange"), "u", c.u_expr);
        }
        if (j.contains("moser")) {
            read_num(j.at("moser"), "K", c.K);
            read_opt(j.at("moser"), "b", c.b_values);
        }
        if (j.contains("ratio")) {
            read_num(j.at("ratio"), "L", c.L);
            read_opt(j.at("ratio"), "budget", c.budget);
        }
        if (j.contains("check")) read_opt(j.at("check"), "g", c.g_expr);
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            read_opt(s, "param", c.sweep_param);
            read_opt(s, "values", c.sweep_values);
            read_opt(s, "command", c.sweep_command);
        }
        read_opt(j, "jobs", c.jobs);
        read_opt(j, "out_dir", c.out_dir);
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    return c;
}

GridPtr RunConfig::grid() const { return build_grid(r_max, n_points, dimension); }

ProblemConfig RunConfig::problem() const {
    if (dimension != 2 && dimension != 4) throw config_error("dimension must be 2 or 4");
    Potential pot = potential.empty() ? Potential::constant(gamma) : Potential::rabinowitz(potential, *grid());
    NonlinearitySpec spec;
    if (nonlinearity == "exp_critical") {
        spec = NonlinearitySpec::exp_critical(lambda, dimension);
    } else if (nonlinearity == "exact_growth") {
        spec = NonlinearitySpec::exact_growth(theta, ar_mu);
    } else if (nonlinearity == "user_expr") {
        if (f_expr.empty()) throw config_error("user_expr nonlinearity needs an expression for f");
        spec = NonlinearitySpec::user_expr(f_expr, alpha0, ar_mu);
    } else {
        throw config_error("unknown nonlinearity '" + nonlinearity + "'");
    }
    return make_config(dimension, std::move(pot), std::move(spec), overflow_cap);
}

int run(const RunConfig& config, std::ostream& log) {
    const Outcome out = execute(config);
    try {
        for (const Artifact& a : out.artifacts) {
            const std::string path = (std::filesystem::path(config.out_dir) / a.name).string();
            write_atomic(path, a.content);
            log << "wrote " << path << "\n";
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    if (out.report.contains("error")) log << "error: " << out.report.at("error").get<std::string>() << "\n";
    return out.exit_code;
}

}  // namespace biharm
