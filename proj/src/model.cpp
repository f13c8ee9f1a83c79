#include "biharm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

// e^x - 1 - x without cancellation
double em1x(double x) {
    if (std::abs(x) < 1e-2)
        return x * x * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x / 720))));
    return std::expm1(x) - x;
}

void guard(double t, double cap) {
    if (!(std::abs(t) <= cap)) {
        std::ostringstream os;
        os << "overflow guard: |t| = " << std::abs(t) << " exceeds cap " << cap;
        throw overflow_error(os.str());
    }
}

double simpson_rec(const std::function<double(double)>& fn, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol || std::abs(diff) <= 1e-15 * std::abs(left + right))
        return left + right + diff / 15.0;
    return simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = fn(a);
    const double fb = fn(b);
    const double fm = fn(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    // tolerance relative to the size of the integral, estimated on 16 panels
    double coarse = 0;
    const int panels = 16;
    const double w = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double x0 = a + k * w;
        coarse += w / 6.0 * (fn(x0) + 4 * fn(x0 + 0.5 * w) + fn(x0 + w));
    }
    return simpson_rec(fn, a, b, fa, fm, fb, whole, tol * std::max(1.0, std::abs(coarse)), 40);
}

NonlinearitySpec NonlinearitySpec::exp_critical(double lambda, int dimension) {
    if (dimension != 2 && dimension != 4) throw config_error("exp_critical: dimension must be 2 or 4");
    if (!(lambda > 0)) throw config_error("exp_critical: lambda must be positive");
    NonlinearitySpec s;
    s.kind = NonlinearityKind::exp_critical;
    s.lambda = lambda;
    s.dimension = dimension;
    s.alpha0 = dimension == 4 ? 2.0 : 1.0;
    // t f / F -> 2 as t -> 0+, so 2 is the best uniform constant
    s.ar_mu = 2.0;
    return s;
}

NonlinearitySpec NonlinearitySpec::exact_growth(double theta, double ar_mu) {
    if (!(theta >= 0)) throw config_error("exact_growth: theta must be non-negative");
    NonlinearitySpec s;
    s.kind = NonlinearityKind::exact_growth;
    s.theta = theta;
    s.alpha0 = 1.0;
    s.ar_mu = ar_mu;
    return s;
}

NonlinearitySpec NonlinearitySpec::user_expr(const std::string& f_src, double alpha0, double ar_mu) {
    if (!(alpha0 > 0)) throw config_error("user nonlinearity: alpha0 must be positive");
    NonlinearitySpec s;
    s.kind = NonlinearityKind::user_expr;
    s.f_expr = Expression::parse(f_src);
    s.alpha0 = alpha0;
    s.ar_mu = ar_mu;
    return s;
}

double eval_f(const NonlinearitySpec& spec, double t, double cap) {
    guard(t, cap);
    switch (spec.kind) {
        case NonlinearityKind::exp_critical:
            return spec.lambda * t * std::exp(spec.exp_rate() * t * t);
        case NonlinearityKind::exact_growth: {
            if (t == 0) return 0.0;
            const double a = std::abs(t);
            const double pt = std::pow(a, spec.theta);
            const double den = 1.0 + pt;
            const double num = em1x(t * t);
            // d/dt [num/den]
            const double dnum = 2.0 * t * std::expm1(t * t);
            const double dden = spec.theta * pt / a * (t > 0 ? 1.0 : -1.0);
            return (dnum * den - num * dden) / (den * den);
        }
        case NonlinearityKind::user_expr:
            return (*spec.f_expr)(t);
    }
    return 0;
}

double eval_F(const NonlinearitySpec& spec, double t, double cap) {
    guard(t, cap);
    switch (spec.kind) {
        case NonlinearityKind::exp_critical:
            return spec.lambda / (2.0 * spec.exp_rate()) * std::expm1(spec.exp_rate() * t * t);
        case NonlinearityKind::exact_growth:
            return em1x(t * t) / (1.0 + std::pow(std::abs(t), spec.theta));
        case NonlinearityKind::user_expr: {
            const Expression& e = *spec.f_expr;
            return adaptive_simpson([&e](double s) { return e(s); }, 0.0, t, 1e-10);
        }
    }
    return 0;
}

double eval_fprime(const NonlinearitySpec& spec, double t, double cap) {
    guard(t, cap);
    if (spec.kind == NonlinearityKind::exp_critical) {
        const double a = spec.exp_rate();
        return spec.lambda * std::exp(a * t * t) * (1.0 + 2.0 * a * t * t);
    }
    const double step = 1e-5 * std::max(1.0, std::abs(t));
    const double hi = std::min(t + step, cap);
    const double lo = std::max(t - step, -cap);
    return (eval_f(spec, hi, cap) - eval_f(spec, lo, cap)) / (hi - lo);
}

double eval_g_lambda(const ProblemConfig& config, double t) {
    guard(t, config.overflow_cap);
    const NonlinearitySpec& s = config.nonlinearity;
    if (s.kind == NonlinearityKind::exp_critical) {
        // 2F(t) - lambda t^2
        const double a = s.exp_rate();
        return s.lambda / a * em1x(a * t * t);
    }
    return 2.0 * eval_F(s, t, config.overflow_cap) - eval_fprime(s, 0.0, config.overflow_cap) * t * t;
}

double eval_potential(const Potential& pot, double r) {
    if (pot.kind == PotentialKind::constant) return pot.gamma;
    return pot.profile(r);
}

Potential Potential::constant(double gamma) {
    if (!(gamma > 0) || !std::isfinite(gamma)) throw config_error("constant potential must be positive");
    Potential p;
    p.kind = PotentialKind::constant;
    p.gamma = gamma;
    p.V0 = gamma;
    p.gamma_inf = gamma;
    return p;
}

Potential Potential::rabinowitz(std::function<double(double)> profile, const RadialGrid& grid, std::string source) {
    Potential p;
    p.kind = PotentialKind::radial_rabinowitz;
    p.profile = std::move(profile);
    p.source = std::move(source);
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n_points; ++i) {
        const double v = p.profile(grid.nodes[i]);
        if (!std::isfinite(v)) throw config_error("potential is not finite at r = " + std::to_string(grid.nodes[i]));
        vmin = std::min(vmin, v);
    }
    p.V0 = vmin;
    p.gamma_inf = p.profile(grid.r_max);
    p.gamma = p.gamma_inf;
    if (!(p.V0 > 0)) throw config_error("Rabinowitz potential needs inf V > 0");
    if (!(p.gamma_inf - p.V0 > 1e-6))
        throw config_error("Rabinowitz potential needs inf V < V(r_max); use a constant potential instead");
    return p;
}

Potential Potential::rabinowitz(const std::string& expr, const RadialGrid& grid) {
    Expression e = Expression::parse(expr);
    return rabinowitz(e.as_function(), grid, expr);
}

double adams_beta_for(int dimension) {
    if (dimension == 4) return 32.0 * std::numbers::pi * std::numbers::pi;
    if (dimension == 2) return 4.0 * std::numbers::pi;
    throw config_error("dimension must be 2 or 4");
}

void ProblemConfig::validate() const {
    if (!((order == 2 && dimension == 4) || (order == 1 && dimension == 2)))
        throw config_error("(m,n) must be (2,4) or (1,2)");
    if (std::abs(adams_beta - adams_beta_for(dimension)) > 1e-12 * adams_beta_for(dimension))
        throw config_error("adams_beta inconsistent with dimension");
    if (!(overflow_cap > 0)) throw config_error("overflow_cap must be positive");
    if (nonlinearity.kind == NonlinearityKind::exp_critical) {
        if (nonlinearity.dimension != dimension) throw config_error("nonlinearity dimension mismatch");
        if (!(lambda > 0)) throw config_error("lambda must be positive");
        if (!(lambda < potential.infimum()))
            throw config_error("hypothesis 0 < lambda < inf V violated (lambda = " + std::to_string(lambda) +
                               ", inf V = " + std::to_string(potential.infimum()) + ")");
    }
}

ProblemConfig make_config(int dimension, Potential potential, NonlinearitySpec spec, double overflow_cap) {
    ProblemConfig c;
    c.dimension = dimension;
    c.order = dimension == 4 ? 2 : 1;
    c.adams_beta = adams_beta_for(dimension);
    c.potential = std::move(potential);
    c.lambda = spec.kind == NonlinearityKind::exp_critical ? spec.lambda : 0.0;
    c.nonlinearity = std::move(spec);
    c.overflow_cap = overflow_cap;
    c.validate();
    return c;
}

ProblemConfig make_config(int dimension, double lambda, Potential potential, double overflow_cap) {
    if (dimension != 2 && dimension != 4) throw config_error("dimension must be 2 or 4");
    return make_config(dimension, std::move(potential), NonlinearitySpec::exp_critical(lambda, dimension), overflow_cap);
}

ConditionReport check_conditions(const NonlinearitySpec& spec, const std::vector<double>& t_grid, double cap) {
    if (t_grid.size() < 2) throw config_error("check_conditions needs at least two probe points");
    std::vector<double> ts(t_grid);
    std::sort(ts.begin(), ts.end());
    for (double t : ts)
        if (!(t > 0) || t > cap) throw config_error("probe points must lie in (0, overflow_cap]");

    ConditionReport rep;
    rep.ar_mu = spec.ar_mu;
    rep.ar_worst_ratio = std::numeric_limits<double>::infinity();
    rep.ar_above_two = true;
    std::vector<double> Fs(ts.size()), fs(ts.size()), ratios(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        const double F = eval_F(spec, t, cap);
        const double f = eval_f(spec, t, cap);
        if (!(F > 0)) throw error("non-positive F encountered at t = " + std::to_string(t));
        Fs[i] = F;
        fs[i] = f;
        ratios[i] = t * f / F;
        if (ratios[i] <= 2.0) rep.ar_above_two = false;
        if (ratios[i] < rep.ar_worst_ratio) {
            rep.ar_worst_ratio = ratios[i];
            rep.ar_worst_at = t;
        }
    }
    rep.ar_holds = rep.ar_worst_ratio >= rep.ar_mu;
    // boundary: infimum sits at the smallest probe and tends to 2 there
    rep.ar_boundary = rep.ar_above_two && rep.ar_worst_at == ts.front() && ratios.front() - 2.0 < 0.05 &&
                      ratios.front() < ratios[1];

    // condition (ii): F <= M0 f on t >= t0
    std::size_t i0 = ts.size() / 2;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] >= 1.0) {
            i0 = i;
            break;
        }
    rep.t0 = ts[i0];
    rep.m0 = 0;
    rep.cond_ii_holds = true;
    for (std::size_t i = i0; i < ts.size(); ++i) {
        if (!(fs[i] > 0)) {
            rep.cond_ii_holds = false;
            continue;
        }
        rep.m0 = std::max(rep.m0, Fs[i] / fs[i]);
    }
    if (!std::isfinite(rep.m0)) rep.cond_ii_holds = false;

    // growth exponent from log f against t^2 over the two largest probes
    const double t1 = ts[ts.size() - 2];
    const double t2 = ts.back();
    const double f1 = std::abs(fs[ts.size() - 2]);
    const double f2 = std::abs(fs.back());
    if (f1 > 0 && f2 > 0 && t2 > t1) rep.alpha0_estimate = (std::log(f2) - std::log(f1)) / (t2 * t2 - t1 * t1);
    rep.critical = rep.alpha0_estimate > 0.1;
    return rep;
}

}  // namespace biharm
