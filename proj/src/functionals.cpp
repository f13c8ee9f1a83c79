#include "biharm/functionals.hpp"

#include <cmath>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

void guard_field(const Vec& u, double cap) {
    const double m = u.cwiseAbs().maxCoeff();
    if (!(m <= cap)) throw overflow_error("overflow guard: max|u| = " + std::to_string(m) + " exceeds cap " + std::to_string(cap));
}

}  // namespace

NodalNonlinearity nodal_terms(const RadialGrid& g, const Vec& u, const ProblemConfig& config, bool with_fprime) {
    guard_field(u, config.overflow_cap);
    const int n = static_cast<int>(u.size());
    NodalNonlinearity out;
    out.f.resize(n);
    out.F.resize(n);
    out.V.resize(n);
    if (with_fprime) out.fprime.resize(n);
    const NonlinearitySpec& s = config.nonlinearity;
    const double cap = config.overflow_cap;
    for (int i = 0; i < n; ++i) {
        out.f[i] = eval_f(s, u[i], cap);
        out.F[i] = eval_F(s, u[i], cap);
        out.V[i] = eval_potential(config.potential, g.nodes[i]);
        if (with_fprime) out.fprime[i] = eval_fprime(s, u[i], cap);
    }
    return out;
}

FunctionalReport evaluate_all(const RadialGrid& g, const Vec& u, const ProblemConfig& config) {
    if (u.size() != g.n_points) throw config_error("field does not match grid");
    const NodalNonlinearity nl = nodal_terms(g, u, config, false);
    const double a = config.nonlinearity.kind == NonlinearityKind::exp_critical ? config.nonlinearity.exp_rate()
                                                                                 : config.nonlinearity.alpha0;
    FunctionalReport rep;
    MassTerms& m = rep.mass_terms;
    const Vec u2 = u.cwiseAbs2();
    m.l2_sq = integrate(g, u2);
    m.lap_l2_sq = principal_form(g, u);
    m.pot_l2_sq = integrate(g, nl.V.cwiseProduct(u2));
    Vec em(u.size()), ew(u.size());
    for (int i = 0; i < u.size(); ++i) {
        em[i] = std::expm1(a * u2[i]);
        ew[i] = std::exp(a * u2[i]) * u2[i];
    }
    m.exp_mass = integrate(g, em);
    m.exp_weighted = integrate(g, ew);
    m.F_mass = integrate(g, nl.F);
    m.fu_mass = integrate(g, nl.f.cwiseProduct(u));

    rep.energy_I = 0.5 * (m.lap_l2_sq + m.pot_l2_sq) - m.F_mass;
    // constant potential: G = gamma |u|^2 - 2 int F
    rep.pohozaev_G = m.pot_l2_sq - 2.0 * m.F_mass;
    rep.nehari_N = m.lap_l2_sq + m.pot_l2_sq - m.fu_mass;
    return rep;
}

FunctionalReport evaluate_all(const RadialField& u, const ProblemConfig& config) {
    return evaluate_all(*u.grid, u.values, config);
}

double nehari_energy_identity_gap(const RadialField& u, const ProblemConfig& config) {
    const RadialGrid& g = *u.grid;
    const FunctionalReport rep = evaluate_all(u, config);
    const NonlinearitySpec& s = config.nonlinearity;
    double rhs;
    if (s.kind == NonlinearityKind::exp_critical) {
        // (lambda/2a) int (exp(a u^2) a u^2 - (exp(a u^2) - 1))
        const double a = s.exp_rate();
        Vec q(u.size());
        for (int i = 0; i < u.size(); ++i) {
            const double x = a * u[i] * u[i];
            q[i] = std::exp(x) * x - std::expm1(x);
        }
        rhs = s.lambda / (2.0 * a) * integrate(g, q);
    } else {
        rhs = 0.5 * rep.mass_terms.fu_mass - rep.mass_terms.F_mass;
    }
    return std::abs(rep.energy_I - rhs);
}

Vec gradient_half_principal(const RadialGrid& g, const Vec& u) { return g.stiffness * u; }

Vec gradient_energy(const RadialGrid& g, const Vec& u, const ProblemConfig& config) {
    const NodalNonlinearity nl = nodal_terms(g, u, config, false);
    Vec grad = g.stiffness * u;
    grad.array() += g.weights.array() * (nl.V.array() * u.array() - nl.f.array());
    return grad;
}

double energy_I(const RadialGrid& g, const Vec& u, const ProblemConfig& config) {
    return evaluate_all(g, u, config).energy_I;
}

std::string to_string(RatioVerdict v) {
    return v == RatioVerdict::divergence_evidence ? "divergence_evidence" : "finite_evidence";
}

}  // namespace biharm
