#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "biharm/rearrangement.hpp"

using namespace biharm;
using std::numbers::pi;

namespace {

double max_abs_diff(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

// decreasing rearrangement in R^4 of p(x) = (1 + a x^2) exp(-x^2/2), a > 1/2, by level-set volumes
double hump_rearranged(double a, double rho) {
    auto p = [a](double x) { return (1 + a * x * x) * std::exp(-0.5 * x * x); };
    const double x_peak = std::sqrt(2.0 - 1.0 / a);
    const double top = p(x_peak);
    const double target = 0.5 * pi * pi * std::pow(rho, 4);
    if (rho == 0) return top;
    boost::math::tools::eps_tolerance<double> tol(60);
    auto level_volume = [&](double t) {
        std::uintmax_t it = 200;
        double inner = 0;
        if (t > 1.0) {
            auto r = boost::math::tools::toms748_solve([&](double x) { return p(x) - t; }, 0.0, x_peak, 1 - t, top - t, tol, it);
            inner = 0.5 * (r.first + r.second);
        }
        it = 200;
        auto r = boost::math::tools::toms748_solve([&](double x) { return p(x) - t; }, x_peak, 60.0, top - t, p(60.0) - t, tol, it);
        const double outer = 0.5 * (r.first + r.second);
        return 0.5 * pi * pi * (std::pow(outer, 4) - std::pow(inner, 4)) - target;
    };
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(level_volume, 1e-300, top * (1 - 1e-15), level_volume(1e-300),
                                               level_volume(top * (1 - 1e-15)), tol, it);
    return 0.5 * (r.first + r.second);
}

}  // namespace

TEST_CASE("Hankel transform of Gaussians") {
    for (int n : {4, 2}) {
        auto g = build_grid(20.0, 2048, n);
        for (double a : {1.0, 2.0, 0.5}) {
            auto u = sample(g, [a](double r) { return std::exp(-0.5 * a * r * r); });
            const SpectralProfile p = fourier_radial(u);
            Vec expect(g->n_points);
            for (int i = 0; i < g->n_points; ++i)
                expect[i] = std::pow(a, -0.5 * n) * std::exp(-0.5 * g->nodes[i] * g->nodes[i] / a);
            CHECK(max_abs_diff(p.values, expect) <= 1e-7);
        }
    }
}

TEST_CASE("round trip and Plancherel") {
    auto g = build_grid(20.0, 2048, 4);
    auto u = sample(g, [](double r) { return std::exp(-0.5 * r * r) * (1 - 0.6 * r * r + 0.06 * r * r * r * r) + 0.2 * std::exp(-r * r / 8); });
    const SpectralProfile p = fourier_radial(u);
    const RadialField back = inverse_fourier_radial(p);
    CHECK(max_abs_diff(back.values, u.values) <= 1e-8);
    const double l2 = integrate(*g, u.values.cwiseAbs2());
    const double l2p = integrate(*p.grid, p.values.cwiseAbs2());
    CHECK(l2p == doctest::Approx(l2).epsilon(1e-8));
}

TEST_CASE("Schwarz profile") {
    auto g = build_grid(20.0, 2048, 4);
    SUBCASE("decreasing profiles are fixed") {
        SpectralProfile p{g, sample(g, [](double r) { return std::exp(-r * r / 8) / (1 + r * r * r * r); }).values};
        CHECK(max_abs_diff(schwarz_profile(p).values, p.values) <= 1e-12);
        SpectralProfile q{g, -p.values};
        CHECK(max_abs_diff(schwarz_profile(q).values, p.values) <= 1e-12);
    }
    SUBCASE("hump against the level-set oracle") {
        const double a = 2.0;
        SpectralProfile p{g, sample(g, [a](double x) { return (1 + a * x * x) * std::exp(-0.5 * x * x); }).values};
        const SpectralProfile s = schwarz_profile(p);
        for (int i = 1; i < g->n_points; ++i) CHECK(s.values[i] <= s.values[i - 1] + 1e-15);
        double err = 0;
        for (int i = 0; i < g->n_points; i += 7) err = std::max(err, std::abs(s.values[i] - hump_rearranged(a, g->nodes[i])));
        CHECK(err <= 1e-6);
        // equimeasurable, so every L^p norm is kept
        CHECK(integrate(*g, s.values.cwiseAbs2()) == doctest::Approx(integrate(*g, p.values.cwiseAbs2())).epsilon(1e-6));
    }
}

TEST_CASE("rearranging a Gaussian returns it") {
    for (int n : {4, 2}) {
        auto g = build_grid(20.0, 2048, n);
        auto u = sample(g, [](double r) { return 0.7 * std::exp(-0.5 * r * r); });
        const RearrangeResult res = fourier_rearrange(u);
        CHECK(max_abs_diff(res.w.values, u.values) <= 1e-8);
        CHECK_FALSE(res.checks.flagged);
        CHECK(res.checks.mass_ok);
        CHECK(res.checks.lap_ok);
        CHECK(res.checks.exp_ok);
    }
}

TEST_CASE("non-monotone transform: inequalities hold") {
    auto g = build_grid(20.0, 2048, 4);
    const double beta = 2.0, a = 2.0, A = 0.5;
    auto u = sample(g, [=](double r) {
        const double y = beta * r;
        return A * std::exp(-0.5 * y * y) * (1 + a * (4 - y * y)) / (1 + 4 * a);
    });
    const RearrangeResult res = fourier_rearrange(u);
    const RearrangeChecks& c = res.checks;
    CHECK(c.mass_rel_err <= 1e-6);
    CHECK(c.lap_w <= c.lap_u * (1 + 1e-6));
    CHECK(c.exp_w >= c.exp_u * (1 - 1e-6));
    CHECK_FALSE(c.flagged);
    // idempotent
    const RearrangeResult twice = fourier_rearrange(res.w);
    CHECK(max_abs_diff(twice.w.values, res.w.values) <= 1e-6 * res.w.values.cwiseAbs().maxCoeff());
}

TEST_CASE("two-bump field: checks are reported consistently") {
    auto g = build_grid(20.0, 2048, 4);
    auto u = sample(g, [](double r) { return 0.6 * std::exp(-r * r) - 0.4 * std::exp(-0.5 * (r - 4) * (r - 4)); });
    const RearrangeResult res = fourier_rearrange(u);
    const RearrangeChecks& c = res.checks;
    CHECK(c.flagged == !(c.mass_ok && c.lap_ok && c.exp_ok));
    CHECK(c.mass_ok == (c.mass_rel_err <= 1e-6));
    CHECK(c.l2_u > 0);
    CHECK(c.l2_w > 0);
    for (int i = 1; i < g->n_points; ++i) CHECK(std::isfinite(res.w.values[i]));
}
