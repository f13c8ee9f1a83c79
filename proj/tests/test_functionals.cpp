#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "biharm/errors.hpp"
#include "biharm/functionals.hpp"
#include "biharm/solvers.hpp"

using namespace biharm;
using std::numbers::pi;

namespace {

double radial_quad(const std::function<double(double)>& f, double r_max) {
    auto g = [&](double r) { return 2 * pi * pi * r * r * r * f(r); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, r_max, 20, 1e-14);
}

RadialField random_bump(GridPtr g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> A(0.2, 1.0), s(0.5, 2.0), c(-0.3, 0.3);
    const double a = A(rng), w = s(rng), k = c(rng);
    return sample(g, [=](double r) { return a * (1 + k * r * r) * std::exp(-0.5 * (r / w) * (r / w)); });
}

}  // namespace

TEST_CASE("evaluate_all of zero") {
    auto g = build_grid(20.0, 512, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    const FunctionalReport r = evaluate_all(sample(g, [](double) { return 0.0; }), cfg);
    CHECK(r.energy_I == 0.0);
    CHECK(r.pohozaev_G == 0.0);
    CHECK(r.nehari_N == 0.0);
    CHECK(r.mass_terms.exp_mass == 0.0);
}

TEST_CASE("small fields sit inside the Pohozaev set") {
    auto g = build_grid(20.0, 2048, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    const double eps = 1e-3;
    const FunctionalReport r = evaluate_all(sample(g, [&](double x) { return eps * std::exp(-0.5 * x * x); }), cfg);
    CHECK(r.pohozaev_G > 0.0);
    CHECK(r.pohozaev_G == doctest::Approx((1.0 - 0.5) * eps * eps * pi * pi).epsilon(1e-5));
}

TEST_CASE("Gaussian terms against adaptive quadrature") {
    auto g = build_grid(20.0, 2048, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    auto u = [](double r) { return std::exp(-0.5 * r * r); };
    const FunctionalReport rep = evaluate_all(sample(g, u), cfg);
    const MassTerms& m = rep.mass_terms;
    const double l2 = radial_quad([&](double r) { return u(r) * u(r); }, 20.0);
    const double lap = radial_quad([&](double r) { return std::pow((r * r - 4) * u(r), 2); }, 20.0);
    const double em = radial_quad([&](double r) { return std::expm1(2 * u(r) * u(r)); }, 20.0);
    const double ew = radial_quad([&](double r) { return std::exp(2 * u(r) * u(r)) * u(r) * u(r); }, 20.0);
    CHECK(m.l2_sq == doctest::Approx(l2).epsilon(1e-6));
    CHECK(m.lap_l2_sq == doctest::Approx(lap).epsilon(1e-6));
    CHECK(m.pot_l2_sq == doctest::Approx(l2).epsilon(1e-6));
    CHECK(m.exp_mass == doctest::Approx(em).epsilon(1e-6));
    CHECK(m.exp_weighted == doctest::Approx(ew).epsilon(1e-6));
    CHECK(m.F_mass == doctest::Approx(0.125 * em).epsilon(1e-6));
    CHECK(rep.energy_I == doctest::Approx(0.5 * (lap + l2) - 0.125 * em).epsilon(1e-6));
    CHECK(rep.nehari_N == doctest::Approx(lap + l2 - 0.5 * ew).epsilon(1e-6));
    CHECK(rep.pohozaev_G == doctest::Approx(l2 - 0.25 * em).epsilon(1e-6));
}

TEST_CASE("definition algebra") {
    auto g = build_grid(20.0, 2048, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
        const FunctionalReport r = evaluate_all(random_bump(g, rng), cfg);
        const MassTerms& m = r.mass_terms;
        CHECK(m.exp_mass >= 0.0);
        CHECK(m.exp_weighted >= 0.0);
        CHECK(m.F_mass >= 0.0);
        CHECK(std::abs(r.energy_I - (0.5 * (m.lap_l2_sq + m.pot_l2_sq) - 0.125 * m.exp_mass)) <=
              1e-12 * (m.lap_l2_sq + m.pot_l2_sq + m.exp_mass));
        CHECK(std::abs(r.nehari_N - (m.lap_l2_sq + m.pot_l2_sq - 0.5 * m.exp_weighted)) <=
              1e-12 * (m.lap_l2_sq + m.pot_l2_sq + m.exp_weighted));
    }
}

TEST_CASE("energy identity gap is half the Nehari value") {
    auto g = build_grid(20.0, 2048, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    CHECK(nehari_energy_identity_gap(sample(g, [](double) { return 0.0; }), cfg) == 0.0);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 10; ++k) {
        RadialField u = random_bump(g, rng);
        const FunctionalReport r = evaluate_all(u, cfg);
        const double scale = r.mass_terms.lap_l2_sq + r.mass_terms.pot_l2_sq + r.mass_terms.fu_mass;
        CHECK(std::abs(nehari_energy_identity_gap(u, cfg) - 0.5 * std::abs(r.nehari_N)) <= 1e-10 * scale);

        const double t = project_nehari(u, cfg);
        RadialField v(g, t * u.values);
        const double I = evaluate_all(v, cfg).energy_I;
        CHECK(nehari_energy_identity_gap(v, cfg) <= 1e-8 * (1 + std::abs(I)));
    }
}

TEST_CASE("dilation invariance of the principal term") {
    auto g = build_grid(20.0, 2048, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    auto u = sample(g, [](double r) { return 0.8 * std::exp(-r * r) * (1 + 0.5 * r * r); });
    const FunctionalReport a = evaluate_all(u, cfg);
    for (double s : {0.6, 1.5}) {
        const FunctionalReport b = evaluate_all(RadialField(scaled_grid(*g, s), u.values), cfg);
        CHECK(b.mass_terms.lap_l2_sq == doctest::Approx(a.mass_terms.lap_l2_sq).epsilon(1e-6));
        CHECK(b.mass_terms.l2_sq == doctest::Approx(std::pow(s, 4) * a.mass_terms.l2_sq).epsilon(1e-6));
    }
}

TEST_CASE("discrete gradients match central differences") {
    auto g = build_grid(20.0, 2048, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    auto u = sample(g, [](double r) { return 0.9 * std::exp(-0.5 * r * r); });
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 5; ++k) {
        Vec d(g->n_points);
        for (int i = 0; i < d.size(); ++i) d[i] = nd(rng) * std::exp(-0.1 * g->nodes[i] * g->nodes[i]);
        const double eps = 1e-4;
        const Vec up = u.values + eps * d, um = u.values - eps * d;
        const double fd_p = (0.5 * principal_form(*g, up) - 0.5 * principal_form(*g, um)) / (2 * eps);
        CHECK(gradient_half_principal(*g, u.values).dot(d) == doctest::Approx(fd_p).epsilon(1e-5));
        const double fd_I = (energy_I(*g, up, cfg) - energy_I(*g, um, cfg)) / (2 * eps);
        CHECK(gradient_energy(*g, u.values, cfg).dot(d) == doctest::Approx(fd_I).epsilon(1e-5));
    }
}

TEST_CASE("overflow guard") {
    auto g = build_grid(20.0, 256, 4);
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    CHECK_THROWS_AS(evaluate_all(sample(g, [](double r) { return 7.0 * std::exp(-r * r); }), cfg), overflow_error);
}

TEST_CASE("2D functionals") {
    auto g = build_grid(30.0, 2048, 2);
    const auto cfg = make_config(2, 0.5, Potential::constant(1.0));
    auto u = [](double r) { return 0.7 * std::exp(-0.5 * r * r); };
    const FunctionalReport rep = evaluate_all(sample(g, u), cfg);
    auto quad2 = [](const std::function<double(double)>& f) {
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double r) { return 2 * pi * r * f(r); }, 0.0, 30.0, 20, 1e-14);
    };
    const double l2 = quad2([&](double r) { return u(r) * u(r); });
    const double grad = quad2([&](double r) { return r * r * u(r) * u(r); });
    const double F = quad2([&](double r) { return 0.25 * std::expm1(u(r) * u(r)); });
    CHECK(rep.mass_terms.l2_sq == doctest::Approx(l2).epsilon(1e-4));
    CHECK(rep.mass_terms.lap_l2_sq == doctest::Approx(grad).epsilon(1e-4));
    CHECK(rep.mass_terms.F_mass == doctest::Approx(F).epsilon(1e-4));
}

TEST_CASE("Adams ratio for a quartic F") {
    const auto cfg = make_config(4, Potential::constant(1.0), NonlinearitySpec::user_expr("4*t^3", 1.0));
    const AdamsRatioReport r = adams_ratio_search(cfg, 1.0, 12);
    CHECK(r.verdict == RatioVerdict::finite_evidence);
    // on Gaussians a exp(-(r/s)^2) with ||Delta u||^2 = L the ratio is L / (12 pi^2) for every s
    const double quotient = 1.0 / (12 * pi * pi);
    int gaussians = 0;
    for (const RatioSample& s : r.samples)
        if (s.family == "gaussian") {
            ++gaussians;
            CHECK(s.ratio == doctest::Approx(quotient).epsilon(1e-4));
        }
    CHECK(gaussians >= 1);
    CHECK(r.ratio_lower_bound >= quotient * (1 - 1e-4));
    CHECK(r.threshold_R == doctest::Approx(32 * pi * pi));
}

TEST_CASE("Adams ratio for the exp-critical preset") {
    const auto cfg = make_config(4, 0.5, Potential::constant(1.0));
    const AdamsRatioReport at_R = adams_ratio_search(cfg, 16 * pi * pi, 40);
    CHECK(at_R.threshold_R == doctest::Approx(16 * pi * pi));
    CHECK(at_R.verdict == RatioVerdict::divergence_evidence);

    double prev = std::numeric_limits<double>::infinity();
    for (double L : {1.0, 1e-1, 1e-2, 1e-3}) {
        const AdamsRatioReport r = adams_ratio_search(cfg, L, 20);
        CHECK(r.ratio_lower_bound >= 0.0);
        CHECK(r.ratio_lower_bound < prev);
        prev = r.ratio_lower_bound;
    }
    CHECK(prev < 1e-3);
    CHECK_THROWS_AS(adams_ratio_search(cfg, -1.0, 10), config_error);
}
