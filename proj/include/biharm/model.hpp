#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "biharm/expression.hpp"
#include "biharm/grid_ops.hpp"

namespace biharm {

enum class NonlinearityKind { exp_critical, exact_growth, user_expr };

struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::exp_critical;
    double lambda = 0;       // exp_critical
    int dimension = 4;       // exp_critical: exp(2t^2) in R^4, exp(t^2) in R^2
    double theta = 0;        // exact_growth
    double alpha0 = 2;
    double ar_mu = 2;
    std::optional<Expression> f_expr;  // user_expr

    static NonlinearitySpec exp_critical(double lambda, int dimension = 4);
    static NonlinearitySpec exact_growth(double theta, double ar_mu = 2.5);
    static NonlinearitySpec user_expr(const std::string& f_src, double alpha0, double ar_mu = 2.5);

    // exponent a in exp(a t^2) for exp_critical
    double exp_rate() const { return dimension == 4 ? 2.0 : 1.0; }
};

enum class PotentialKind { constant, radial_rabinowitz };

struct Potential {
    PotentialKind kind = PotentialKind::constant;
    double gamma = 1;  // constant value or limit at infinity
    std::function<double(double)> profile;
    std::string source;  // expression text if parsed
    double V0 = 1;
    double gamma_inf = 1;

    static Potential constant(double gamma);
    // V0 and gamma_inf are measured on the supplied grid
    static Potential rabinowitz(std::function<double(double)> profile, const RadialGrid& grid, std::string source = {});
    static Potential rabinowitz(const std::string& expr, const RadialGrid& grid);

    double infimum() const { return kind == PotentialKind::constant ? gamma : V0; }
    double at_infinity() const { return kind == PotentialKind::constant ? gamma : gamma_inf; }
};

struct ProblemConfig {
    int order = 2;      // m
    int dimension = 4;  // n
    double lambda = 0;
    Potential potential = Potential::constant(1.0);
    NonlinearitySpec nonlinearity = NonlinearitySpec::exp_critical(0.5);
    double adams_beta = 0;
    double overflow_cap = 6.0;

    void validate() const;
};

// (m,n) = (2,4) or (1,2); lambda < inf V is enforced for exp_critical
ProblemConfig make_config(int dimension, double lambda, Potential potential, double overflow_cap = 6.0);
ProblemConfig make_config(int dimension, Potential potential, NonlinearitySpec spec, double overflow_cap = 6.0);

double adams_beta_for(int dimension);

double eval_f(const NonlinearitySpec& spec, double t, double cap = 6.0);
double eval_F(const NonlinearitySpec& spec, double t, double cap = 6.0);
double eval_fprime(const NonlinearitySpec& spec, double t, double cap = 6.0);
double eval_g_lambda(const ProblemConfig& config, double t);
double eval_potential(const Potential& pot, double r);

// adaptive Simpson quadrature on [a,b]; tol is relative to max(1, |integral|)
double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double tol);

struct ConditionReport {
    double ar_mu = 0;
    double ar_worst_ratio = 0;   // min over the probes of t f(t)/F(t)
    double ar_worst_at = 0;
    bool ar_above_two = false;   // t f > 2F at every probe
    bool ar_holds = false;       // worst ratio >= ar_mu
    bool ar_boundary = false;    // infimum approaches 2 at the small-t end
    double m0 = 0;               // max F/f over t >= t0
    double t0 = 0;
    bool cond_ii_holds = false;
    double alpha0_estimate = 0;
    bool critical = false;       // alpha0 estimate clearly positive
};

ConditionReport check_conditions(const NonlinearitySpec& spec, const std::vector<double>& t_grid, double cap = 6.0);

}  // namespace biharm
