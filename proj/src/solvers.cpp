#include "biharm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/SparseCholesky>

#include "biharm/errors.hpp"
#include "biharm/moser.hpp"
#include "biharm/rearrangement.hpp"

namespace biharm {

namespace {

using Triplet = Eigen::Triplet<double>;

SpMat diag_matrix(const Vec& d) {
    SpMat D(d.size(), d.size());
    D.reserve(Eigen::VectorXi::Constant(d.size(), 1));
    for (int i = 0; i < d.size(); ++i) D.insert(i, i) = d[i];
    return D;
}

// The 4D problem works on x = u[1..N-1]; u_0 is the even extrapolation
// exact for 1, r^2 and r^4.
class Discrete {
public:
    Discrete(GridPtr grid, const ProblemConfig& config) : grid_(std::move(grid)), config_(config) {
        const RadialGrid& g = *grid_;
        const int n = g.n_points;
        reduced_ = g.dimension == 4;
        m_ = reduced_ ? n - 1 : n;
        std::vector<Triplet> t;
        if (reduced_) {
            t.emplace_back(0, 0, 1.5);
            t.emplace_back(0, 1, -0.6);
            t.emplace_back(0, 2, 0.1);
            for (int i = 1; i < n; ++i) t.emplace_back(i, i - 1, 1.0);
        } else {
            for (int i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
        }
        T_.resize(n, m_);
        T_.setFromTriplets(t.begin(), t.end());
        Tt_ = T_.transpose();
        K_ = Tt_ * g.stiffness * T_;
        K_.makeCompressed();
        vol_ = reduced_ ? Vec(g.cell_volume.tail(m_)) : g.cell_volume;
    }

    const RadialGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const ProblemConfig& config() const { return config_; }
    int dofs() const { return m_; }
    const SpMat& K() const { return K_; }

    Vec embed(const Vec& x) const { return T_ * x; }
    Vec restrict_to(const Vec& u) const { return reduced_ ? Vec(u.tail(m_)) : u; }
    Vec pull_back(const Vec& full_dual) const { return Tt_ * full_dual; }

    double dual_norm(const Vec& g) const { return std::sqrt((g.array().square() / vol_.array()).sum()); }

    double max_abs(const Vec& x) const { return embed(x).cwiseAbs().maxCoeff(); }
    bool within_cap(const Vec& x) const { return max_abs(x) < config_.overflow_cap; }

    NodalNonlinearity nodal(const Vec& u, bool with_fprime) const {
        return nodal_terms(*grid_, u, config_, with_fprime);
    }

    double half_lap(const Vec& x) const { return 0.5 * principal_form(*grid_, embed(x)); }
    double mass(const Vec& x) const {
        const Vec u = embed(x);
        return grid_->weights.dot(u.cwiseAbs2());
    }

    FunctionalReport report(const Vec& x) const { return evaluate_all(*grid_, embed(x), config_); }

    // reduced gradient of I
    Vec grad_I(const Vec& x, const NodalNonlinearity& nl) const {
        const Vec u = embed(x);
        Vec d = (grid_->weights.array() * (nl.V.array() * u.array() - nl.f.array())).matrix();
        return K_ * x + Tt_ * d;
    }

    double weak_residual(const Vec& x, const NodalNonlinearity& nl) const {
        const Vec u = embed(x);
        const Vec g = grad_I(x, nl);
        const Vec& w = grid_->weights;
        const double fn = std::sqrt((w.array() * nl.f.array().square()).sum());
        const double vn = std::sqrt((w.array() * (nl.V.array() * u.array()).square()).sum());
        const double den = fn + vn;
        if (den == 0.0) return 0.0;
        return dual_norm(g) / den;
    }

    SpMat preconditioner(const NodalNonlinearity& nl) const {
        Vec d = (grid_->weights.array() * (nl.V.array() + nl.fprime.array().abs())).matrix();
        SpMat P = K_ + Tt_ * diag_matrix(d) * T_;
        P.makeCompressed();
        return P;
    }

    Vec dilation(const Vec& x) const { return restrict_to(dilation_generator(*grid_, embed(x))); }

private:
    GridPtr grid_;
    ProblemConfig config_;
    bool reduced_ = false;
    int m_ = 0;
    SpMat T_, Tt_, K_;
    Vec vol_;
};

// s > 0 with c(s) = 0 where c > 0 for small s and c < 0 beyond the root
double bracket_bisect(const std::function<double(double)>& c, double umax, double cap, const char* what) {
    if (!(umax > 0)) throw projection_error(std::string(what) + ": field is zero");
    const double s_cap = cap / umax;
    double s = std::min(1.0, 0.5 * s_cap);
    double lo, hi;
    if (c(s) > 0) {
        lo = s;
        hi = s;
        for (;;) {
            hi = std::min(2.0 * hi, s_cap);
            if (c(hi) <= 0) break;
            lo = hi;
            if (hi >= s_cap) throw projection_error(std::string(what) + ": no sign change before the overflow cap");
        }
    } else {
        hi = s;
        lo = s;
        int k = 0;
        for (;;) {
            lo *= 0.5;
            if (c(lo) > 0) break;
            hi = lo;
            if (++k > 200) throw projection_error(std::string(what) + ": constraint is non-positive at every scale");
        }
    }
    double c_lo = c(lo), c_hi = c(hi);
    for (int it = 0; it < 80 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double cm = c(mid);
        if (cm > 0) {
            lo = mid;
            c_lo = cm;
        } else {
            hi = mid;
            c_hi = cm;
        }
    }
    return std::abs(c_lo) <= std::abs(c_hi) ? lo : hi;
}

double pohozaev_value(const RadialGrid& g, const Vec& u, const ProblemConfig& config) {
    const NodalNonlinearity nl = nodal_terms(g, u, config, false);
    return (g.weights.array() * (nl.V.array() * u.array().square() - 2.0 * nl.F.array())).sum();
}

double nehari_value(const RadialGrid& g, const Vec& u, const ProblemConfig& config) {
    const NodalNonlinearity nl = nodal_terms(g, u, config, false);
    return principal_form(g, u) + (g.weights.array() * (nl.V.array() * u.array().square() - nl.f.array() * u.array())).sum();
}

double project_scale(const RadialGrid& g, const Vec& u, const ProblemConfig& config, bool nehari) {
    const double umax = u.cwiseAbs().maxCoeff();
    auto c = [&](double s) {
        const Vec su = s * u;
        return nehari ? nehari_value(g, su, config) : pohozaev_value(g, su, config);
    };
    return bracket_bisect(c, umax, config.overflow_cap, nehari ? "project_nehari" : "project_pohozaev");
}

SignScan sign_scan(const RadialField& u, const ProblemConfig& config, double s_lo, double s_hi, int count, bool nehari) {
    if (!(s_lo > 0) || !(s_hi > s_lo) || count < 2) throw config_error("invalid scan range");
    SignScan out;
    double prev_s = 0, prev = 0;
    bool have = false;
    for (int i = 0; i < count; ++i) {
        const double s = s_lo * std::pow(s_hi / s_lo, static_cast<double>(i) / (count - 1));
        const Vec su = s * u.values;
        if (su.cwiseAbs().maxCoeff() > config.overflow_cap) break;
        const double v = nehari ? nehari_value(*u.grid, su, config) : pohozaev_value(*u.grid, su, config);
        if (have && ((prev > 0) != (v > 0))) {
            if (out.sign_changes == 0) {
                out.bracket_lo = prev_s;
                out.bracket_hi = s;
            }
            ++out.sign_changes;
        }
        prev_s = s;
        prev = v;
        have = true;
    }
    return out;
}

void check_init(const RadialField& init, const ProblemConfig& config) {
    if (!init.grid) throw config_error("init field has no grid");
    if (init.grid->dimension != config.dimension) throw config_error("init grid dimension does not match the config");
    if (init.values.cwiseAbs().maxCoeff() == 0.0) throw projection_error("init field is zero");
}

struct Plateau {
    std::vector<double> history;
    bool reached(int window, double rel) const {
        if (static_cast<int>(history.size()) <= window) return false;
        const double old = history[history.size() - 1 - window];
        const double now = history.back();
        return old - now < rel * std::abs(old);
    }
};

}  // namespace

double project_pohozaev(const RadialField& u, const ProblemConfig& config) {
    config.validate();
    return project_scale(*u.grid, u.values, config, false);
}

double project_nehari(const RadialField& u, const ProblemConfig& config) {
    config.validate();
    return project_scale(*u.grid, u.values, config, true);
}

SignScan nehari_sign_scan(const RadialField& u, const ProblemConfig& config, double s_lo, double s_hi, int count) {
    return sign_scan(u, config, s_lo, s_hi, count, true);
}

SignScan pohozaev_sign_scan(const RadialField& u, const ProblemConfig& config, double s_lo, double s_hi, int count) {
    return sign_scan(u, config, s_lo, s_hi, count, false);
}

double residual_weak(const RadialField& u, const ProblemConfig& config) {
    Discrete d(u.grid, config);
    const NodalNonlinearity nl = d.nodal(u.values, false);
    return d.weak_residual(d.restrict_to(u.values), nl);
}

RadialField default_init(GridPtr grid, double amplitude, double width) {
    return sample(std::move(grid), [=](double r) { return amplitude * std::exp(-0.5 * (r / width) * (r / width)); });
}

RadialField recover_solution(const RadialField& u, double theta, const ProblemConfig& config) {
    if (!(2.0 * theta - 1.0 < 0.0)) throw config_error("recovery needs 2 theta - 1 < 0, got theta = " + std::to_string(theta));
    const double s = std::pow(1.0 - 2.0 * theta, 1.0 / (2.0 * config.order));
    if (s == 1.0) return u;
    return RadialField(scaled_grid(*u.grid, s), u.values);
}

SolveReport minimize_pohozaev(const ProblemConfig& config, const RadialField& init, const SolverOptions& opts) {
    config.validate();
    check_init(init, config);
    if (config.potential.kind != PotentialKind::constant)
        throw config_error("minimize_pohozaev needs a constant potential");
    if (config.nonlinearity.kind == NonlinearityKind::exp_critical && !(config.lambda < config.potential.gamma))
        throw config_error("minimize_pohozaev needs lambda < gamma");

    Discrete d(init.grid, config);
    const RadialGrid& g = d.grid();
    const Vec& w = g.weights;

    Vec x = d.restrict_to(init.values);
    const double s0 = project_scale(g, d.embed(x), config, false);
    x *= s0;
    const double target = opts.mass_target > 0 ? opts.mass_target : d.mass(x);

    // back onto G = 0 and the mass gauge, moving along the dilation orbit
    auto retract = [&](Vec y) {
        for (int k = 0; k < 50; ++k) {
            y *= project_scale(g, d.embed(y), config, false);
            const double m = d.mass(y);
            if (std::abs(m - target) < 1e-14 * target) return y;
            if (m > 2.0 * target || m < 0.5 * target) {
                // far from the gauge: one interpolated dilation u(r/s), mass scales by s^n
                const double s = std::pow(target / m, 1.0 / g.dimension);
                y = d.restrict_to(dilate(RadialField(d.grid_ptr(), d.embed(y)), s).values);
                continue;
            }
            const Vec dy = d.dilation(y);
            const double dm = 2.0 * w.dot(d.embed(y).cwiseProduct(d.embed(dy)));
            if (!(std::abs(dm) > 0)) throw projection_error("mass gauge: degenerate dilation direction");
            y += ((target / m - 1.0) * m / dm) * dy;
            if (!d.within_cap(y)) throw overflow_error("mass gauge correction exceeded the overflow cap");
        }
        y *= project_scale(g, d.embed(y), config, false);
        return y;
    };

    struct Kkt {
        Vec dir;
        double res = 0;
        double a = 0, b = 0;
    };
    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool analyzed = false;
    auto kkt = [&](const Vec& y) {
        const Vec u = d.embed(y);
        const NodalNonlinearity nl = d.nodal(u, true);
        const Vec gE = d.K() * y;
        const Vec gG = d.pull_back(2.0 * (w.array() * (nl.V.array() * u.array() - nl.f.array())).matrix());
        const Vec gM = d.pull_back(2.0 * w.cwiseProduct(u));
        const SpMat P = d.preconditioner(nl);
        if (!analyzed) {
            ldlt.analyzePattern(P);
            analyzed = true;
        }
        ldlt.factorize(P);
        if (ldlt.info() != Eigen::Success) throw convergence_error("preconditioner factorization failed");
        const Vec z0 = ldlt.solve(gE), z1 = ldlt.solve(gG), z2 = ldlt.solve(gM);
        Eigen::Matrix2d A;
        A << gG.dot(z1), gG.dot(z2), gM.dot(z1), gM.dot(z2);
        const Eigen::Vector2d rhs(gG.dot(z0), gM.dot(z0));
        const Eigen::Vector2d ab = A.fullPivLu().solve(rhs);
        Kkt out;
        out.a = ab[0];
        out.b = ab[1];
        out.dir = z0 - ab[0] * z1 - ab[1] * z2;
        const double ne = d.dual_norm(gE);
        out.res = ne > 0 ? d.dual_norm(gE - ab[0] * gG - ab[1] * gM) / ne : 0.0;
        return out;
    };

    x = retract(x);
    SolveReport rep;
    rep.mode = "pohozaev";
    double step = 1.0;
    int interval = std::max(1, opts.rearrange_interval);
    int next_rearrange = interval;
    Plateau plateau;
    Kkt k = kkt(x);
    double E = d.half_lap(x);
    int it = 0;
    for (;; ++it) {
        plateau.history.push_back(E);
        if (it % std::max(1, opts.trace_stride) == 0)
            rep.trace.push_back({it, E, std::abs(pohozaev_value(g, d.embed(x), config)), k.res});
        if (k.res <= opts.tol) {
            rep.converged = true;
            rep.stop_reason = "kkt residual below tolerance";
            break;
        }
        // the objective is quadratic in the error, so a plateau alone is not convergence
        if (plateau.reached(opts.stall_window, opts.stall_rel) && k.res <= opts.stall_residual) {
            rep.converged = true;
            rep.stop_reason = "objective plateau";
            break;
        }
        if (it >= opts.max_iters) {
            rep.stop_reason = "iteration limit";
            break;
        }

        double al = step;
        bool accepted = false;
        Vec xn;
        Kkt kn;
        double En = E;
        while (al >= 1e-12) {
            Vec trial = x - al * k.dir;
            if (d.within_cap(trial)) {
                try {
                    trial = retract(trial);
                    En = d.half_lap(trial);
                    if (En <= E - 1e-12 * E) {
                        xn = trial;
                        kn = kkt(xn);
                        accepted = true;
                        break;
                    }
                    if (std::abs(En - E) <= 1e-12 * E) {
                        Kkt kt = kkt(trial);
                        if (kt.res < k.res) {
                            xn = trial;
                            kn = std::move(kt);
                            accepted = true;
                            break;
                        }
                    }
                } catch (const projection_error&) {
                } catch (const overflow_error&) {
                }
            }
            al *= 0.5;
        }
        if (!accepted) {
            rep.converged = k.res <= opts.stall_residual;
            rep.stop_reason = "line search stalled";
            break;
        }
        x = std::move(xn);
        k = std::move(kn);
        E = En;
        step = std::min(1.0, 2.0 * al);

        if (opts.rearrange && it + 1 >= next_rearrange) {
            bool ok = false;
            try {
                const RearrangeResult rr = fourier_rearrange(RadialField(d.grid_ptr(), d.embed(x)));
                if (!rr.checks.flagged) {
                    const Vec xr = retract(d.restrict_to(rr.w.values));
                    const double Er = d.half_lap(xr);
                    if (Er <= E) {
                        x = xr;
                        E = Er;
                        k = kkt(x);
                        ok = true;
                    }
                }
            } catch (const error&) {
            }
            if (ok) {
                ++rep.rearrangements_accepted;
            } else {
                ++rep.rearrangements_rejected;
                interval *= 2;
            }
            next_rearrange = it + 1 + interval;
        }
    }

    const Vec u = d.embed(x);
    const NodalNonlinearity nl = d.nodal(u, false);
    const double lap = 2.0 * E;
    const double denom = (w.array() * (nl.V.array() * u.array() - nl.f.array()) * u.array()).sum();
    const double mu = lap / denom;
    rep.field = RadialField(d.grid_ptr(), u);
    rep.objective = E;
    rep.iterations = it;
    rep.kkt_residual = k.res;
    rep.gauge_multiplier = k.b;
    rep.lagrange_theta = 0.5 * (mu + 1.0);
    rep.constraint_residual = std::abs(pohozaev_value(g, u, config));
    rep.residual_weak = d.weak_residual(x, nl);
    if (2.0 * rep.lagrange_theta - 1.0 < 0.0) {
        RadialField rec = recover_solution(rep.field, rep.lagrange_theta, config);
        rep.recovered_residual_weak = residual_weak(rec, config);
        rep.recovered_energy = evaluate_all(rec, config).energy_I;
        rep.recovered = std::move(rec);
    } else {
        rep.converged = false;
        rep.stop_reason += "; multiplier sign violates 2 theta - 1 < 0";
    }
    if (!rep.converged && opts.throw_on_failure)
        throw convergence_error("minimize_pohozaev did not converge (" + rep.stop_reason + ", kkt residual " +
                                std::to_string(rep.kkt_residual) + ")");
    return rep;
}

SolveReport minimize_nehari(const ProblemConfig& config, const RadialField& init, const SolverOptions& opts) {
    config.validate();
    check_init(init, config);
    if (config.nonlinearity.kind == NonlinearityKind::exp_critical && !(config.lambda < config.potential.infimum()))
        throw config_error("minimize_nehari needs lambda < inf V");

    Discrete d(init.grid, config);
    const RadialGrid& g = d.grid();
    auto project = [&](Vec y) {
        y *= project_scale(g, d.embed(y), config, true);
        return y;
    };

    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool analyzed = false;
    struct Step {
        Vec dir;
        double res = 0;
        double I = 0;
    };
    auto evaluate = [&](const Vec& y) {
        const Vec u = d.embed(y);
        const NodalNonlinearity nl = d.nodal(u, true);
        const Vec gI = d.grad_I(y, nl);
        const SpMat P = d.preconditioner(nl);
        if (!analyzed) {
            ldlt.analyzePattern(P);
            analyzed = true;
        }
        ldlt.factorize(P);
        if (ldlt.info() != Eigen::Success) throw convergence_error("preconditioner factorization failed");
        Step s;
        s.dir = ldlt.solve(gI);
        s.res = d.weak_residual(y, nl);
        s.I = evaluate_all(g, u, config).energy_I;
        return s;
    };

    Vec x = project(d.restrict_to(init.values));
    SolveReport rep;
    rep.mode = "nehari";
    Step cur = evaluate(x);
    double step = 1.0;
    Plateau plateau;
    int it = 0;
    for (;; ++it) {
        plateau.history.push_back(cur.I);
        if (it % std::max(1, opts.trace_stride) == 0)
            rep.trace.push_back({it, cur.I, std::abs(nehari_value(g, d.embed(x), config)), cur.res});
        if (cur.res <= opts.tol) {
            rep.converged = true;
            rep.stop_reason = "weak residual below tolerance";
            break;
        }
        // the objective is quadratic in the error, so a plateau alone is not convergence
        if (plateau.reached(opts.stall_window, opts.stall_rel) && cur.res <= opts.stall_residual) {
            rep.converged = true;
            rep.stop_reason = "objective plateau";
            break;
        }
        if (it >= opts.max_iters) {
            rep.stop_reason = "iteration limit";
            break;
        }
        double al = step;
        bool accepted = false;
        Vec xn;
        Step next;
        while (al >= 1e-12) {
            Vec trial = x - al * cur.dir;
            if (d.within_cap(trial)) {
                try {
                    trial = project(trial);
                    const double In = evaluate_all(g, d.embed(trial), config).energy_I;
                    const double scale = std::abs(cur.I);
                    if (In <= cur.I - 1e-12 * scale ||
                        std::abs(In - cur.I) <= 1e-12 * scale) {
                        Step s = evaluate(trial);
                        if (In <= cur.I - 1e-12 * scale || s.res < cur.res) {
                            xn = trial;
                            next = std::move(s);
                            accepted = true;
                            break;
                        }
                    }
                } catch (const projection_error&) {
                } catch (const overflow_error&) {
                }
            }
            al *= 0.5;
        }
        if (!accepted) {
            rep.converged = cur.res <= opts.stall_residual;
            rep.stop_reason = "line search stalled";
            break;
        }
        x = std::move(xn);
        cur = std::move(next);
        step = std::min(1.0, 2.0 * al);
    }

    const Vec u = d.embed(x);
    rep.field = RadialField(d.grid_ptr(), u);
    rep.objective = cur.I;
    rep.iterations = it;
    rep.residual_weak = cur.res;
    rep.constraint_residual = std::abs(nehari_value(g, u, config));
    if (!rep.converged && opts.throw_on_failure)
        throw convergence_error("minimize_nehari did not converge (" + rep.stop_reason + ", residual " +
                                std::to_string(rep.residual_weak) + ")");
    return rep;
}

GapReport limiting_gap(const ProblemConfig& config_V, const RadialField& init, const SolverOptions& opts) {
    config_V.validate();
    if (config_V.nonlinearity.kind == NonlinearityKind::exp_critical && !(config_V.lambda < config_V.potential.infimum()))
        throw config_error("limiting_gap needs lambda < V0");
    ProblemConfig config_inf = config_V;
    config_inf.potential = Potential::constant(config_V.potential.at_infinity());

    GapReport rep;
    rep.solve_V = minimize_nehari(config_V, init, opts);
    if (config_V.potential.kind == PotentialKind::constant) {
        rep.solve_infty = rep.solve_V;
    } else {
        rep.solve_infty = minimize_nehari(config_inf, init, opts);
    }
    rep.m_V = rep.solve_V.objective;
    rep.m_infty = rep.solve_infty.objective;
    rep.gap = rep.m_infty - rep.m_V;
    rep.both_positive = rep.m_V > 0 && rep.m_infty > 0;

    const RadialField& u_inf = rep.solve_infty.field;
    rep.comparison_scale = project_scale(*u_inf.grid, u_inf.values, config_V, true);
    rep.comparison_level = evaluate_all(*u_inf.grid, rep.comparison_scale * u_inf.values, config_V).energy_I;
    return rep;
}

}  // namespace biharm
