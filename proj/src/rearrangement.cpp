#include "biharm/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

using Key = std::tuple<double, int, int>;

std::mutex cache_mutex;
std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> kernel_cache;

std::shared_ptr<const Eigen::MatrixXd> build_kernel(const RadialGrid& g) {
    const int n = g.n_points;
    const Vec& r = g.nodes;
    Vec tw = Vec::Constant(n, g.h);
    tw[0] *= 0.5;
    tw[n - 1] *= 0.5;
    auto H = std::make_shared<Eigen::MatrixXd>(n, n);
    Eigen::MatrixXd& M = *H;
    if (g.dimension == 4) {
        // rho^{-1} J_1(rho r) r^2, symmetric part J_1(rho r) computed once
        for (int i = 1; i < n; ++i)
            for (int j = 1; j <= i; ++j) {
                const double J = boost::math::cyl_bessel_j(1, r[i] * r[j]);
                M(i, j) = J;
                M(j, i) = J;
            }
        for (int i = 1; i < n; ++i) {
            M(i, 0) = 0.0;
            for (int j = 1; j < n; ++j) M(i, j) *= r[j] * r[j] / r[i] * tw[j];
        }
        // rho -> 0: J_1(rho r)/rho -> r/2
        for (int j = 0; j < n; ++j) M(0, j) = 0.5 * r[j] * r[j] * r[j] * tw[j];
        // Euler-Maclaurin endpoint term at r = 0: the integrand starts as u(0) r^3 / 2
        const double h4 = std::pow(g.h, 4);
        for (int i = 0; i < n; ++i) M(i, 0) = -h4 / 240.0;
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                const double J = boost::math::cyl_bessel_j(0, r[i] * r[j]);
                M(i, j) = J;
                M(j, i) = J;
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) *= r[j] * tw[j];
        // Euler-Maclaurin endpoint terms at r = 0 for u(r) r J_0(rho r) = a1 r + a3 r^3 + ...
        // with a1 = u(0) and a3 = u''(0)/2 - u(0) rho^2 / 4, u''(0) from the first two nodes
        const double h2 = g.h * g.h;
        for (int i = 0; i < n; ++i) {
            M(i, 0) = h2 / 12.0 + h2 / 120.0 + h2 * h2 * r[i] * r[i] / 480.0;
            M(i, 1) -= h2 / 120.0;
        }
    }
    return H;
}

void check_decay(const Vec& v, const char* what) {
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0) return;
    if (std::abs(v[v.size() - 1]) > 1e-8 * m)
        throw error(std::string(what) + " does not decay at the end of the grid (truncation dominated)");
}

// ---- exact distribution function of a piecewise cubic Hermite interpolant ----

struct Cell {
    double x0, h;          // physical left end and width
    double c0, c1, c2, c3;  // cubic in s in [0,1]
    double value(double s) const { return c0 + s * (c1 + s * (c2 + s * c3)); }
    double slope(double s) const { return c1 + s * (2 * c2 + s * 3 * c3); }
};

struct Piece {
    int cell;
    double sa, sb;   // parameter range
    double va, vb;   // |p| at the ends
    double vmin() const { return std::min(va, vb); }
    double vmax() const { return std::max(va, vb); }
};

class LevelSets {
public:
    LevelSets(const RadialGrid& g, const Vec& p) : g_(g) {
        const int n = g.n_points;
        const Vec m = radial_derivative(g, p);
        const double h = g.h;
        for (int k = 0; k + 1 < n; ++k) {
            const double y0 = p[k], y1 = p[k + 1];
            const double d0 = h * m[k], d1 = h * m[k + 1];
            Cell c{g.nodes[k], h, y0, d0, -3 * y0 - 2 * d0 + 3 * y1 - d1, 2 * y0 + d0 - 2 * y1 + d1};
            cells_.push_back(c);
            split(static_cast<int>(cells_.size()) - 1);
        }
    }

    const std::vector<Piece>& pieces() const { return pieces_; }

    double vol(const Piece& pc, double s) const {
        const Cell& c = cells_[pc.cell];
        return ball_volume(c.x0 + s * c.h, g_.dimension);
    }

    double full(const Piece& pc) const { return vol(pc, pc.sb) - vol(pc, pc.sa); }

    // measure of {|p| > t} inside the piece
    double partial(const Piece& pc, double t) const {
        if (t >= pc.vmax()) return 0.0;
        if (t < pc.vmin()) return full(pc);
        const Cell& c = cells_[pc.cell];
        const double sign = c.value(0.5 * (pc.sa + pc.sb)) >= 0 ? 1.0 : -1.0;
        const bool decreasing = pc.va > pc.vb;
        // solve sign*c.value(s) = t on [sa, sb], monotone there
        double lo = pc.sa, hi = pc.sb;
        double s = 0.5 * (lo + hi);
        for (int it = 0; it < 100; ++it) {
            const double f = sign * c.value(s) - t;
            const bool above = f > 0;
            // keep the bracket: for a decreasing piece values above t lie to the left
            if (above == decreasing) lo = s;
            else hi = s;
            const double d = sign * c.slope(s);
            double next = d != 0 ? s - f / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - s) <= 1e-15 * (1.0 + std::abs(s)) || hi - lo <= 1e-15) {
                s = next;
                break;
            }
            s = next;
        }
        return decreasing ? vol(pc, s) - vol(pc, pc.sa) : vol(pc, pc.sb) - vol(pc, s);
    }

private:
    void add_piece(int cell, double sa, double sb) {
        if (sb <= sa) return;
        const Cell& c = cells_[cell];
        pieces_.push_back({cell, sa, sb, std::abs(c.value(sa)), std::abs(c.value(sb))});
    }

    void split(int ci) {
        const Cell& c = cells_[ci];
        std::vector<double> br = {0.0, 1.0};
        // critical points: roots of c1 + 2 c2 s + 3 c3 s^2
        const double A = 3 * c.c3, B = 2 * c.c2, C = c.c1;
        if (std::abs(A) > 1e-300) {
            const double disc = B * B - 4 * A * C;
            if (disc > 0) {
                const double sq = std::sqrt(disc);
                const double q = -0.5 * (B + (B >= 0 ? sq : -sq));
                for (double s : {q / A, q != 0 ? C / q : -1.0})
                    if (s > 0 && s < 1) br.push_back(s);
            }
        } else if (std::abs(B) > 1e-300) {
            const double s = -C / B;
            if (s > 0 && s < 1) br.push_back(s);
        }
        std::sort(br.begin(), br.end());
        // zeros inside each monotone stretch
        std::vector<double> all = br;
        for (std::size_t k = 0; k + 1 < br.size(); ++k) {
            double a = br[k], b = br[k + 1];
            double fa = c.value(a), fb = c.value(b);
            if (fa * fb < 0) {
                for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
                    const double mid = 0.5 * (a + b);
                    const double fm = c.value(mid);
                    if ((fm < 0) == (fa < 0)) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                all.push_back(0.5 * (a + b));
            }
        }
        std::sort(all.begin(), all.end());
        for (std::size_t k = 0; k + 1 < all.size(); ++k) add_piece(ci, all[k], all[k + 1]);
    }

    const RadialGrid& g_;
    std::vector<Cell> cells_;
    std::vector<Piece> pieces_;
};

}  // namespace

std::shared_ptr<const Eigen::MatrixXd> hankel_kernel(const RadialGrid& g) {
    const Key key{g.r_max, g.n_points, g.dimension};
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = kernel_cache.find(key);
        if (it != kernel_cache.end()) return it->second;
    }
    auto H = build_kernel(g);
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (kernel_cache.size() >= 4) kernel_cache.clear();
    kernel_cache.emplace(key, H);
    return H;
}

SpectralProfile fourier_radial(const RadialField& u) {
    check_decay(u.values, "input field");
    auto H = hankel_kernel(*u.grid);
    return SpectralProfile{u.grid, (*H) * u.values};
}

RadialField inverse_fourier_radial(const SpectralProfile& p) {
    auto H = hankel_kernel(*p.grid);
    return RadialField(p.grid, (*H) * p.values);
}

SpectralProfile schwarz_profile(const SpectralProfile& p) {
    const RadialGrid& g = *p.grid;
    const int n = g.n_points;
    const double pmax = p.values.cwiseAbs().maxCoeff();
    SpectralProfile out{p.grid, Vec::Zero(n)};
    if (pmax == 0) return out;

    LevelSets ls(g, p.values);
    const auto& pcs = ls.pieces();
    const double zero_level = 1e-14 * pmax;

    struct Event {
        double level;
        int piece;
        bool enter;
    };
    std::vector<Event> ev;
    ev.reserve(2 * pcs.size());
    for (int i = 0; i < static_cast<int>(pcs.size()); ++i) {
        if (pcs[i].vmax() <= zero_level) continue;
        ev.push_back({pcs[i].vmax(), i, true});
        ev.push_back({std::max(pcs[i].vmin(), zero_level), i, false});
    }
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
        if (a.level != b.level) return a.level > b.level;
        return a.enter && !b.enter;  // enter before leaving at equal level
    });

    std::vector<double> targets(n);
    for (int i = 0; i < n; ++i) targets[i] = ball_volume(g.nodes[i], g.dimension);

    std::vector<int> active;
    double full_sum = 0;
    auto mu = [&](double t) {
        double s = full_sum;
        for (int k : active) s += ls.partial(pcs[k], t);
        return s;
    };

    int i = 0;
    // nodes whose volume is 0 take the supremum
    const double top = ev.empty() ? 0.0 : ev.front().level;
    while (i < n && targets[i] <= 0.0) out.values[i++] = top;

    std::size_t e = 0;
    while (e < ev.size() && i < n) {
        const double hi = ev[e].level;
        // apply every event at this level
        while (e < ev.size() && ev[e].level == hi) {
            const Event& x = ev[e];
            if (x.enter) {
                active.push_back(x.piece);
            } else {
                auto it = std::find(active.begin(), active.end(), x.piece);
                if (it != active.end()) active.erase(it);
                full_sum += ls.full(pcs[x.piece]);
            }
            ++e;
        }
        const double lo = e < ev.size() ? ev[e].level : zero_level;
        const double mu_lo = mu(lo);
        while (i < n && targets[i] <= mu_lo) {
            const double V = targets[i];
            double a = lo, b = hi;  // mu(a) >= V >= mu(b) expected
            double fa = mu_lo - V, fb = mu(b) - V;
            double t;
            if (fb >= 0) {
                t = b;
            } else if (fa <= 0) {
                t = a;
            } else {
                // Illinois regula falsi
                int side = 0;
                t = 0.5 * (a + b);
                for (int it = 0; it < 200; ++it) {
                    t = (a * fb - b * fa) / (fb - fa);
                    if (!(t > a && t < b)) t = 0.5 * (a + b);
                    const double ft = mu(t) - V;
                    if (ft == 0 || (b - a) <= 1e-15 * std::max(1.0, std::abs(b))) break;
                    if (ft > 0) {
                        a = t;
                        fa = ft;
                        if (side == -1) fb *= 0.5;
                        side = -1;
                    } else {
                        b = t;
                        fb = ft;
                        if (side == 1) fa *= 0.5;
                        side = 1;
                    }
                    if (std::abs(ft) <= 1e-15 * std::max(V, 1e-300)) break;
                }
            }
            out.values[i++] = t;
        }
    }
    // remaining nodes lie outside the support of |p|
    while (i < n) out.values[i++] = 0.0;
    return out;
}

RearrangeResult fourier_rearrange(const RadialField& u, const RearrangeTolerances& tol, double exp_rate) {
    const RadialGrid& g = *u.grid;
    const double a = exp_rate > 0 ? exp_rate : (g.dimension == 4 ? 2.0 : 1.0);
    const SpectralProfile uh = fourier_radial(u);
    const SpectralProfile ph = schwarz_profile(uh);
    RadialField w = inverse_fourier_radial(ph);

    RearrangeChecks c;
    const HNorms nu = h_norms(u);
    const HNorms nw = h_norms(w);
    c.l2_u = nu.l2_sq;
    c.l2_w = nw.l2_sq;
    c.lap_u = std::sqrt(nu.lap_l2_sq);
    c.lap_w = std::sqrt(nw.lap_l2_sq);
    Vec eu(g.n_points), ew(g.n_points);
    for (int i = 0; i < g.n_points; ++i) {
        eu[i] = std::expm1(a * u[i] * u[i]);
        ew[i] = std::expm1(a * w[i] * w[i]);
    }
    c.exp_u = integrate(g, eu);
    c.exp_w = integrate(g, ew);
    c.mass_rel_err = c.l2_u > 0 ? std::abs(c.l2_w - c.l2_u) / c.l2_u : std::abs(c.l2_w);
    c.mass_ok = c.mass_rel_err <= tol.mass_rel;
    c.lap_ok = c.lap_w <= c.lap_u * (1 + tol.lap_rel);
    c.exp_ok = c.exp_w >= c.exp_u * (1 - tol.exp_rel);
    c.escalate = c.exp_w < c.exp_u * (1 - 1e-4);
    c.flagged = !(c.mass_ok && c.lap_ok && c.exp_ok);
    return RearrangeResult{std::move(w), c};
}

}  // namespace biharm
