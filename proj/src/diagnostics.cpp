#include "biharm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "biharm/errors.hpp"
#include "biharm/moser.hpp"

namespace biharm {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double slope_threshold = 0.05;  // log10 q per decade of t

struct Fit {
    double slope = 0;
    int sign_changes = 0;
};

// least-squares slope of y against x, plus the number of sign changes of the local slope
Fit tail_fit(const std::vector<double>& x, const std::vector<double>& y) {
    Fit f;
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    int last = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = y[i] - y[i - 1];
        const double scale = 1e-9 * (1.0 + std::abs(y[i]));
        const int s = d > scale ? 1 : (d < -scale ? -1 : 0);
        if (s != 0) {
            if (last != 0 && s != last) ++f.sign_changes;
            last = s;
        }
    }
    return f;
}

enum class Limit { zero, finite, infinite, unknown };

Limit limit_from(const Fit& f, bool towards_zero) {
    if (f.sign_changes >= 3) return Limit::unknown;
    // at the origin the variable runs towards -infinity in log t
    const double s = towards_zero ? -f.slope : f.slope;
    if (s > slope_threshold) return Limit::infinite;
    if (s < -slope_threshold) return Limit::zero;
    return Limit::finite;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(RateClass c) {
    switch (c) {
        case RateClass::subcritical: return "subcritical";
        case RateClass::boundary: return "boundary";
        case RateClass::supercritical: return "supercritical";
    }
    return "?";
}

std::vector<double> default_probes(const std::function<double(double)>& g, double K, int count, double t_cap) {
    if (count < 8) throw config_error("need at least 8 probes");
    // largest t where g is finite
    double t_max = t_cap;
    const double lo = std::log10(1e-4);
    for (int i = 0; i < count; ++i) {
        const double t = std::pow(10.0, lo + (std::log10(t_cap) - lo) * i / (count - 1));
        if (!std::isfinite(g(t))) {
            t_max = std::pow(10.0, lo + (std::log10(t_cap) - lo) * std::max(0, i - 1) / (count - 1));
            break;
        }
    }
    (void)K;
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, lo + (std::log10(t_max) - lo) * i / (count - 1));
    return out;
}

GrowthClassification classify_growth(const std::function<double(double)>& g, double K,
                                     const std::vector<double>& t_probe) {
    if (!(K > 0)) throw config_error("K must be positive");
    std::vector<double> ts(t_probe);
    std::sort(ts.begin(), ts.end());
    std::vector<double> lt, lg;
    for (double t : ts) {
        if (!(t > 0)) throw config_error("probe points must be positive");
        const double v = g(t);
        if (!std::isfinite(v)) break;  // overflow: cap the probe range here
        lt.push_back(t);
        lg.push_back(v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(v)));
    }
    if (lt.size() < 16) throw error("g is not evaluable on enough of the probe range");

    GrowthClassification out;
    out.K = K;
    out.t_max_used = lt.back();
    const std::size_t n = lt.size();
    const std::size_t w = std::max<std::size_t>(4, n / 4);

    // infinity: q(t) = t^2 exp(-t^2/K) g(t)
    {
        std::vector<double> x, y, t2;
        bool all_zero = true;
        for (std::size_t i = n - w; i < n; ++i) {
            if (std::isinf(lg[i])) continue;
            all_zero = false;
            const double t = lt[i];
            const double L = 2.0 * std::log(t) - t * t / K + lg[i];
            x.push_back(std::log10(t));
            y.push_back(L / std::log(10.0));
            t2.push_back(t);
        }
        if (all_zero || x.size() < 4) {
            out.limsup_infinity = 0;
            out.rate_class = RateClass::subcritical;
            out.rate_gap = -1.0 / K;
            out.bounded_verdict = Verdict::holds;
        } else {
            const Fit f = tail_fit(x, y);
            out.slope_infinity = f.slope;
            const Limit lim = limit_from(f, false);
            out.limsup_infinity = lim == Limit::infinite ? std::numeric_limits<double>::infinity()
                                  : lim == Limit::zero   ? 0.0
                                  : lim == Limit::finite ? std::pow(10.0, y.back())
                                                         : std::numeric_limits<double>::quiet_NaN();
            // log q = c2 t^2 + c1 log t + c0
            Eigen::MatrixXd A(x.size(), 3);
            Eigen::VectorXd b(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                A(i, 0) = t2[i] * t2[i];
                A(i, 1) = std::log(t2[i]);
                A(i, 2) = 1.0;
                b[i] = y[i] * std::log(10.0);
            }
            const Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
            out.rate_gap = c[0];
            out.rate_class = std::abs(c[0]) <= 0.02 ? RateClass::boundary
                             : c[0] > 0             ? RateClass::supercritical
                                                    : RateClass::subcritical;
        }
    }

    // origin: q(t) = g(t) / t^2 on the smallest probes
    Limit origin = Limit::zero;
    {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < w; ++i) {
            if (std::isinf(lg[i])) continue;
            x.push_back(std::log10(lt[i]));
            y.push_back((lg[i] - 2.0 * std::log(lt[i])) / std::log(10.0));
        }
        if (x.size() < 4) {
            out.limsup_origin = 0;
        } else {
            const Fit f = tail_fit(x, y);
            out.slope_origin = f.slope;
            origin = limit_from(f, true);
            out.limsup_origin = origin == Limit::infinite ? std::numeric_limits<double>::infinity()
                                : origin == Limit::zero   ? 0.0
                                : origin == Limit::finite ? std::pow(10.0, y.front())
                                                          : std::numeric_limits<double>::quiet_NaN();
        }
    }

    auto classify = [](double v) {
        if (std::isnan(v)) return Limit::unknown;
        if (std::isinf(v)) return Limit::infinite;
        if (v == 0.0) return Limit::zero;
        return Limit::finite;
    };
    const Limit li = classify(out.limsup_infinity);
    const Limit lo = classify(out.limsup_origin);
    if (li == Limit::unknown || lo == Limit::unknown) {
        out.bounded_verdict = Verdict::inconclusive;
        out.compact_verdict = Verdict::inconclusive;
    } else {
        out.bounded_verdict = (li == Limit::infinite || lo == Limit::infinite) ? Verdict::fails : Verdict::holds;
        out.compact_verdict = (li == Limit::zero && lo == Limit::zero) ? Verdict::holds : Verdict::fails;
    }
    return out;
}

ProbeResult bounded_functional_probe(const std::function<double(double)>& g, double K,
                                     const std::vector<RadialField>& trials) {
    ProbeResult res;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const RadialField& u = trials[i];
        const RadialGrid& grid = *u.grid;
        const double budget = grid.dimension == 4 ? 32.0 * pi * pi * K : 4.0 * pi * K;
        const double energy = principal_form(grid, u.values);
        if (energy > budget * (1 + 1e-9)) {
            res.skipped.push_back(static_cast<int>(i));
            continue;
        }
        Vec gu(u.size());
        for (int j = 0; j < u.size(); ++j) gu[j] = g(u[j]);
        const double l2 = integrate(grid, u.values.cwiseAbs2());
        const double ratio = l2 > 0 ? integrate(grid, gu) / l2 : 0.0;
        res.ratios.push_back(ratio);
        res.max_ratio = std::max(res.max_ratio, ratio);
    }
    return res;
}

ProbeResult bounded_functional_probe(const std::function<double(double)>& g, double K,
                                     const std::vector<RadialProfile>& trials) {
    ProbeResult res;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const RadialProfile& p = trials[i];
        const double budget = p.dimension == 4 ? 32.0 * pi * pi * K : 4.0 * pi * K;
        const ProfileNorms nrm = profile_norms(p);
        if (nrm.lap_l2_sq > budget * (1 + 1e-9)) {
            res.skipped.push_back(static_cast<int>(i));
            continue;
        }
        const double G = profile_integral(p, [&g](const ProfilePoint& q) { return g(q.u); });
        const double ratio = nrm.l2_sq > 0 ? G / nrm.l2_sq : 0.0;
        res.ratios.push_back(ratio);
        res.max_ratio = std::max(res.max_ratio, ratio);
    }
    return res;
}

}  // namespace biharm
