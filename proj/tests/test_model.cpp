#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "biharm/errors.hpp"
#include "biharm/expression.hpp"
#include "biharm/model.hpp"

using namespace biharm;

namespace {

double kronrod(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back(lo * std::pow(hi / lo, i / (n - 1.0)));
    return t;
}

}  // namespace

TEST_CASE("exp-critical f values") {
    const auto s = NonlinearitySpec::exp_critical(0.5);
    CHECK(eval_f(s, 0.0) == 0.0);
    CHECK(eval_f(s, 1.0) == doctest::Approx(0.5 * std::exp(2.0)));
    CHECK(eval_f(s, 1.0) == doctest::Approx(3.6945).epsilon(1e-4));
    CHECK(eval_f(s, -1.0) == doctest::Approx(-3.6945).epsilon(1e-4));
    CHECK_THROWS_AS(eval_f(s, 6.5), overflow_error);
    const auto s2 = NonlinearitySpec::exp_critical(0.5, 2);
    CHECK(eval_f(s2, 1.0) == doctest::Approx(0.5 * std::exp(1.0)));
}

TEST_CASE("F is the primitive of f") {
    std::vector<NonlinearitySpec> specs{NonlinearitySpec::exp_critical(0.5), NonlinearitySpec::exp_critical(0.5, 2),
                                        NonlinearitySpec::exact_growth(1.0), NonlinearitySpec::exact_growth(3.0),
                                        NonlinearitySpec::user_expr("t*exp(t^2)", 1.0)};
    for (const auto& s : specs) {
        CHECK(std::abs(eval_f(s, 0.0)) <= 1e-12);
        for (double t : {0.05, 0.3, 1.0, 2.5, 4.0, 5.0}) {
            const double F = eval_F(s, t);
            const double oracle = kronrod([&](double x) { return eval_f(s, x); }, 0.0, t);
            CHECK(std::abs(F - oracle) <= 1e-8 * (1.0 + std::abs(F)));
        }
    }
}

TEST_CASE("f' agrees with a difference quotient") {
    for (const auto& s : {NonlinearitySpec::exp_critical(0.5), NonlinearitySpec::exact_growth(3.0)}) {
        for (double t : {0.2, 1.0, 2.0}) {
            const double d = 1e-5;
            const double fd = (eval_f(s, t + d) - eval_f(s, t - d)) / (2 * d);
            CHECK(eval_fprime(s, t) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("g_lambda values and cancellation safety") {
    auto c1 = make_config(4, 0.9, Potential::constant(1.0));
    c1.lambda = 1.0;
    c1.nonlinearity.lambda = 1.0;
    CHECK(eval_g_lambda(c1, 0.0) == 0.0);
    const double t = 1e-4;
    const double x = 2 * t * t;
    const double taylor = 0.5 * (x * x / 2 + x * x * x / 6 + x * x * x * x / 24 + x * x * x * x * x / 120);
    CHECK(std::abs(eval_g_lambda(c1, t) - taylor) < 1e-6 * taylor);
    CHECK(eval_g_lambda(c1, t) == doctest::Approx(1e-16).epsilon(1e-6));
    for (double tt : {0.5, 1.0, 2.0, 3.0}) {
        const double direct = 0.5 * (std::exp(2 * tt * tt) - 1.0) - tt * tt;
        CHECK(std::abs(eval_g_lambda(c1, tt) - direct) <= 1e-12 * direct);
    }
    for (double tt : {1e-5, 3e-4, 1e-3}) CHECK(std::abs(eval_g_lambda(c1, tt) - tt * tt * tt * tt) <= 1e-6 * tt * tt * tt * tt * 10);

    auto c2 = make_config(4, 0.9, Potential::constant(1.0));
    c2.lambda = c2.nonlinearity.lambda = 2.0;
    CHECK(eval_g_lambda(c2, 1.0) == doctest::Approx(std::exp(2.0) - 3.0));
    CHECK(eval_g_lambda(c2, 1.0) == doctest::Approx(4.3891).epsilon(1e-4));
}

TEST_CASE("superquadraticity of the exp-critical nonlinearity") {
    const auto s = NonlinearitySpec::exp_critical(0.5);
    for (double t : log_grid(1e-3, 6.0, 200)) CHECK(t * eval_f(s, t) - 2 * eval_F(s, t) >= 0.0);
}

TEST_CASE("potentials") {
    CHECK(eval_potential(Potential::constant(1.0), 7.0) == 1.0);
    auto g = build_grid(20.0, 2048, 4);
    const Potential p = Potential::rabinowitz("1-0.4*exp(-t^2)", *g);
    CHECK(eval_potential(p, 0.0) == doctest::Approx(0.6));
    CHECK(eval_potential(p, 20.0) >= 1.0 - 1e-6);
    CHECK(p.V0 == doctest::Approx(0.6));
    CHECK(p.gamma_inf == doctest::Approx(1.0));
    CHECK(p.V0 < p.gamma_inf);
    CHECK_THROWS_AS(Potential::rabinowitz("1+0.4*exp(-t^2)", *g), config_error);
    CHECK_THROWS_AS(Potential::constant(-1.0), config_error);
}

TEST_CASE("problem config hypotheses") {
    CHECK_NOTHROW(make_config(4, 0.5, Potential::constant(1.0)));
    CHECK_THROWS_AS(make_config(4, 1.0, Potential::constant(1.0)), config_error);
    CHECK_THROWS_AS(make_config(3, 0.5, Potential::constant(1.0)), config_error);
    auto g = build_grid(20.0, 512, 4);
    CHECK_THROWS_AS(make_config(4, 0.7, Potential::rabinowitz("1-0.4*exp(-t^2)", *g)), config_error);
    const auto c = make_config(2, 0.5, Potential::constant(1.0));
    CHECK(c.order == 1);
    CHECK(c.adams_beta == doctest::Approx(4 * M_PI));
    CHECK(make_config(4, 0.5, Potential::constant(1.0)).adams_beta == doctest::Approx(32 * M_PI * M_PI));
}

TEST_CASE("condition checker") {
    const auto ts = log_grid(0.1, 5.0, 200);
    const ConditionReport e = check_conditions(NonlinearitySpec::exp_critical(1.0), ts);
    CHECK(e.ar_above_two);
    CHECK(e.ar_boundary);
    CHECK(e.ar_worst_ratio > 2.0);
    CHECK(e.ar_worst_ratio < 2.05);
    CHECK(e.ar_worst_at == doctest::Approx(0.1));
    CHECK(e.critical);

    const ConditionReport x = check_conditions(NonlinearitySpec::exact_growth(1.0), ts);
    CHECK(x.ar_above_two);
    CHECK(x.cond_ii_holds);
    CHECK(x.alpha0_estimate == doctest::Approx(1.0).epsilon(0.15));

    const ConditionReport q = check_conditions(NonlinearitySpec::user_expr("2*t", 0.5), ts);
    CHECK(std::abs(q.alpha0_estimate) < 0.1);
    CHECK_FALSE(q.critical);

    CHECK_THROWS_AS(check_conditions(NonlinearitySpec::exp_critical(1.0), {0.0, 1.0}), config_error);
}

TEST_CASE("expression grammar") {
    CHECK(Expression::parse("t*exp(2*t^2)")(1.0) == doctest::Approx(std::exp(2.0)));
    CHECK(Expression::parse("t*exp(2*t^2)")(1.0) == doctest::Approx(7.389).epsilon(1e-4));
    const auto e = Expression::parse("(exp(t^2)-1-t^2)/(1+abs(t)^2)");
    CHECK(e(0.0) == 0.0);
    const double t = 1e-5;
    CHECK(e(t) == doctest::Approx(0.5 * std::pow(t, 4) / (1 + t * t)).epsilon(1e-9));
    CHECK(Expression::parse("-t^2")(2.0) == -4.0);
    CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
    CHECK(Expression::parse("  sqrt( 16 ) + log(1) - 1.5e1 / 3 ")(0.0) == doctest::Approx(-1.0));
    CHECK(Expression::parse("2*-t")(3.0) == -6.0);
    CHECK(Expression::parse("1-0.4*exp(-t^2)")(0.0) == doctest::Approx(0.6));

    try {
        Expression::parse("t*+2");
        FAIL("expected a parse error");
    } catch (const parse_error& err) {
        CHECK(err.offset == 2);
    }
    CHECK_THROWS_AS(Expression::parse("foo(t)"), parse_error);
    CHECK_THROWS_AS(Expression::parse("exp(t, 2)"), parse_error);
    CHECK_THROWS_AS(Expression::parse("exp()"), parse_error);
    CHECK_THROWS_AS(Expression::parse(""), parse_error);
    CHECK_THROWS_AS(Expression::parse("(t+1"), parse_error);
    CHECK_THROWS_AS(Expression::parse("x"), parse_error);
}
