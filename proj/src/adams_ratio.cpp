#include <algorithm>
#include <cmath>
#include <limits>

#include "biharm/errors.hpp"
#include "biharm/functionals.hpp"
#include "biharm/moser.hpp"

namespace biharm {

namespace {

// F with its quadratic part removed for the exp-critical preset: g_lambda / 2
double ratio_F(const NonlinearitySpec& s, double t, double cap) {
    if (s.kind == NonlinearityKind::exp_critical) {
        const double a = s.exp_rate();
        const double x = a * t * t;
        const double em1x = std::abs(x) < 1e-2 ? x * x * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x / 120)))
                                               : std::expm1(x) - x;
        return s.lambda / (2.0 * a) * em1x;
    }
    return eval_F(s, t, cap);
}

double growth_rate(const NonlinearitySpec& s) {
    return s.kind == NonlinearityKind::exp_critical ? s.exp_rate() : s.alpha0;
}

}  // namespace

AdamsRatioReport adams_ratio_search(const ProblemConfig& config, double L, int budget) {
    if (!(L > 0)) throw config_error("L must be positive");
    if (budget < 1) throw error("budget exhausted without any feasible candidate");
    const NonlinearitySpec& s = config.nonlinearity;
    const int dim = config.dimension;
    const double rate = growth_rate(s);
    const double cap = std::sqrt(650.0 / rate);  // exp(rate t^2) stays finite

    AdamsRatioReport rep;
    rep.L = L;
    rep.threshold_R = config.adams_beta / s.alpha0;

    const int n_gauss = std::max(1, budget / 4);
    const int n_moser = budget - n_gauss;

    auto consider = [&rep](const std::string& fam, double param, double amp, double ratio) {
        rep.samples.push_back({fam, param, ratio});
        if (ratio > rep.ratio_lower_bound || rep.argmax_family.empty()) {
            rep.ratio_lower_bound = ratio;
            rep.argmax_family = fam;
            rep.argmax_param = param;
            rep.argmax_amplitude = amp;
        }
    };

    // Gaussians a exp(-(r/sigma)^2) scaled to the energy budget
    GridPtr grid = build_grid(dim == 4 ? 20.0 : 30.0, 2048, dim);
    for (int j = 0; j < n_gauss; ++j) {
        const double sigma = n_gauss == 1 ? 1.0 : 0.5 * std::pow(6.0, static_cast<double>(j) / (n_gauss - 1));
        RadialField base = sample(grid, [sigma](double r) { return std::exp(-(r / sigma) * (r / sigma)); });
        const double e = principal_form(*grid, base.values);
        const double amp = std::sqrt(L / e);
        if (amp > cap) continue;
        Vec Fu(grid->n_points);
        for (int i = 0; i < grid->n_points; ++i) Fu[i] = ratio_F(s, amp * base[i], cap);
        const double l2 = amp * amp * integrate(*grid, base.values.cwiseAbs2());
        consider("gaussian", sigma, amp, 2.0 * integrate(*grid, Fu) / l2);
    }

    // Moser family swept in the height b, each rescaled to the budget. The verdict
    // uses the cap-free profile; the capped psi_k only add candidates.
    const double K = L / config.adams_beta;
    std::vector<double> moser_ratios, moser_b;
    auto moser_ratio = [&](RadialProfile p) {
        const ProfileNorms nrm = profile_norms(p);
        p.amplitude = std::sqrt(L / nrm.lap_l2_sq);
        if (!(p.value(0.0) < cap)) return std::make_pair(std::numeric_limits<double>::quiet_NaN(), p.amplitude);
        const double l2 = p.amplitude * p.amplitude * nrm.l2_sq;
        const double G = profile_integral(p, [&](const ProfilePoint& q) { return ratio_F(s, q.u, cap); });
        return std::make_pair(2.0 * G / l2, p.amplitude);
    };
    const int n_capped = dim == 4 ? n_moser / 4 : 0;
    const int n_sharp = n_moser - n_capped;
    const double b_lo = 2.0;
    const double b_hi = std::max(3.0, 0.9 * cap);
    auto b_at = [&](int j, int n) {
        return n == 1 ? b_lo : b_lo * std::pow(b_hi / b_lo, static_cast<double>(j) / (n - 1));
    };
    for (int j = 0; j < n_sharp; ++j) {
        const double b = b_at(j, n_sharp);
        const auto [ratio, amp] = moser_ratio(dim == 4 ? moser_profile_sharp(b, K) : moser_profile_2d(b, K));
        if (!std::isfinite(ratio)) break;
        consider("moser", b, amp, ratio);
        moser_b.push_back(b);
        moser_ratios.push_back(ratio);
    }
    for (int j = 0; j < n_capped; ++j) {
        const double b = b_at(j, n_capped);
        const auto [ratio, amp] = moser_ratio(moser_profile(MoserParams::moser(b, K)));
        if (!std::isfinite(ratio)) break;
        consider("moser_capped", b, amp, ratio);
    }
    if (rep.samples.empty()) throw error("budget exhausted without any feasible candidate");

    rep.verdict = RatioVerdict::finite_evidence;
    const std::size_t m = moser_ratios.size();
    if (m >= 3) {
        // growth without saturation over the second half of the sweep
        const std::size_t start = m / 2;
        bool increasing = true;
        for (std::size_t i = start + 1; i < m; ++i) increasing = increasing && moser_ratios[i] > moser_ratios[i - 1];
        const std::size_t k0 = m >= 4 ? m - 3 : 0;
        rep.moser_tail_slope = std::log(moser_ratios[m - 1] / moser_ratios[k0]) / std::log(moser_b[m - 1] / moser_b[k0]);
        if (increasing && rep.moser_tail_slope > 0.05) rep.verdict = RatioVerdict::divergence_evidence;
    }
    return rep;
}

}  // namespace biharm
