#include "biharm/moser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "biharm/diagnostics.hpp"
#include "biharm/errors.hpp"

namespace biharm {

namespace {

constexpr double pi = std::numbers::pi;

const ProfilePiece* find_piece(const RadialProfile& p, double x) {
    for (const auto& piece : p.pieces)
        if (x >= piece.r0 && x <= piece.r1) return &piece;
    return nullptr;
}

ProfilePoint point_at(const RadialProfile& p, const ProfilePiece& piece, double x) {
    const double S = p.scale;
    ProfilePoint pt;
    pt.r = S * x;
    const double A = p.amplitude;
    pt.u = A * piece.u(x);
    const double d1 = A * piece.du(x);
    const double d2 = A * piece.d2u(x);
    pt.du = d1 / S;
    pt.lap = d2 / (S * S) + (p.dimension - 1) * d1 / (x * S * S);
    return pt;
}

}  // namespace

MoserParams MoserParams::plateau(double a, double R, double S) {
    if (!(a > 0) || !(R > 0) || !(S > 0)) throw config_error("plateau parameters must be positive");
    MoserParams p;
    p.a_k = a;
    p.R_k = R;
    p.S_k = S;
    return p;
}

MoserParams MoserParams::moser(double b, double K, double S) {
    if (!(b > 0) || !(K > 0) || !(S > 0)) throw config_error("Moser parameters must be positive");
    MoserParams p;
    p.b_k = b;
    p.K = K;
    p.S_k = S;
    p.R_k = std::exp(-b * b / K);
    return p;
}

double RadialProfile::value(double r) const {
    const double x = r / scale;
    const ProfilePiece* piece = find_piece(*this, x);
    return piece ? amplitude * piece->u(x) : 0.0;
}

double RadialProfile::derivative(double r) const {
    const double x = r / scale;
    const ProfilePiece* piece = find_piece(*this, x);
    return piece ? amplitude * piece->du(x) / scale : 0.0;
}

double RadialProfile::second_derivative(double r) const {
    const double x = r / scale;
    const ProfilePiece* piece = find_piece(*this, x);
    return piece ? amplitude * piece->d2u(x) / (scale * scale) : 0.0;
}

double RadialProfile::laplacian(double r) const {
    if (r == 0) return dimension * second_derivative(0.0);
    return second_derivative(r) + (dimension - 1) / r * derivative(r);
}

std::vector<double> RadialProfile::branch_radii() const {
    std::vector<double> out;
    for (const auto& piece : pieces) out.push_back(piece.r1 * scale);
    return out;
}

ProfilePiece quintic_cap(double r0, double r1, double slope) {
    const double d = r1 - r0;
    const double c = slope * d;
    // H(s) = s - 6 s^3 + 8 s^4 - 3 s^5
    ProfilePiece p;
    p.r0 = r0;
    p.r1 = r1;
    p.u = [=](double x) {
        const double s = (x - r0) / d;
        return c * (s + s * s * s * (-6.0 + s * (8.0 - 3.0 * s)));
    };
    p.du = [=](double x) {
        const double s = (x - r0) / d;
        return c / d * (1.0 + s * s * (-18.0 + s * (32.0 - 15.0 * s)));
    };
    p.d2u = [=](double x) {
        const double s = (x - r0) / d;
        return c / (d * d) * (s * (-36.0 + s * (96.0 - 60.0 * s)));
    };
    return p;
}

RadialProfile plateau_profile(const MoserParams& prm) {
    const double a = prm.a_k;
    const double R = prm.R_k;
    RadialProfile p;
    p.dimension = 4;
    p.scale = prm.S_k;
    ProfilePiece flat;
    flat.r0 = 0;
    flat.r1 = R;
    flat.u = [a](double) { return a; };
    flat.du = [](double) { return 0.0; };
    flat.d2u = [](double) { return 0.0; };
    ProfilePiece ring;
    ring.r0 = R;
    ring.r1 = R + 1;
    ring.u = [a, R](double x) { return a * (1.0 - R * R - x * x + 2.0 * R * x); };
    ring.du = [a, R](double x) { return -2.0 * a * (x - R); };
    ring.d2u = [a](double) { return -2.0 * a; };
    p.pieces = {flat, ring, quintic_cap(R + 1, R + 2, -2.0 * a)};
    return p;
}

RadialProfile moser_profile(const MoserParams& prm) {
    const double b = prm.b_k;
    const double K = prm.K;
    const double R = prm.R_k;
    const double rho = std::pow(R, 0.25);
    const double sqR = std::sqrt(R);
    RadialProfile p;
    p.dimension = 4;
    p.scale = prm.S_k;
    ProfilePiece core;
    core.r0 = 0;
    core.r1 = rho;
    core.u = [=](double x) { return b - 2.0 * K * x * x / (sqR * b) + 2.0 * K / b; };
    core.du = [=](double x) { return -4.0 * K * x / (sqR * b); };
    core.d2u = [=](double) { return -4.0 * K / (sqR * b); };
    ProfilePiece tail;
    tail.r0 = rho;
    tail.r1 = 1.0;
    tail.log_graded = true;
    tail.u = [=](double x) { return 4.0 * K * std::abs(std::log(x)) / b; };
    tail.du = [=](double x) { return -4.0 * K / (b * x); };
    tail.d2u = [=](double x) { return 4.0 * K / (b * x * x); };
    // slope of the log branch at r = 1 is -4K/b; the cap continues it
    p.pieces = {core, tail, quintic_cap(1.0, 2.0, -4.0 * K / b)};
    return p;
}

RadialProfile moser_profile_sharp(double b, double K, double S) {
    if (!(b > 0) || !(K > 0) || !(S > 0)) throw config_error("Moser parameters must be positive");
    const double rho = std::exp(-b * b / (4.0 * K));
    const double c = 4.0 * K / b;
    const double q = c * (1.0 - rho * rho) / 2.0;  // core drop b - u(rho)
    RadialProfile p;
    p.dimension = 4;
    p.scale = S;
    ProfilePiece core;
    core.r0 = 0;
    core.r1 = rho;
    core.u = [=](double x) { return b - q * (x / rho) * (x / rho); };
    core.du = [=](double x) { return -2.0 * q * x / (rho * rho); };
    core.d2u = [=](double) { return -2.0 * q / (rho * rho); };
    ProfilePiece tail;
    tail.r0 = rho;
    tail.r1 = 1.0;
    tail.log_graded = true;
    tail.u = [c](double x) { return c * (-std::log(x) + 0.5 * (x * x - 1.0)); };
    tail.du = [c](double x) { return c * (x - 1.0 / x); };
    tail.d2u = [c](double x) { return c * (1.0 + 1.0 / (x * x)); };
    p.pieces = {core, tail};
    return p;
}

RadialProfile moser_profile_2d(double b, double K, double S) {
    if (!(b > 0) || !(K > 0) || !(S > 0)) throw config_error("Moser parameters must be positive");
    const double rho = std::exp(-b * b / (2.0 * K));
    const double c = 2.0 * K / b;
    RadialProfile p;
    p.dimension = 2;
    p.scale = S;
    ProfilePiece core;
    core.r0 = 0;
    core.r1 = rho;
    core.u = [b](double) { return b; };
    core.du = [](double) { return 0.0; };
    core.d2u = [](double) { return 0.0; };
    ProfilePiece tail;
    tail.r0 = rho;
    tail.r1 = 1.0;
    tail.log_graded = true;
    tail.u = [c](double x) { return -c * std::log(x); };
    tail.du = [c](double x) { return -c / x; };
    tail.d2u = [c](double x) { return c / (x * x); };
    p.pieces = {core, tail};
    return p;
}

double profile_integral(const RadialProfile& p, const std::function<double(const ProfilePoint&)>& integrand) {
    using quad = boost::math::quadrature::gauss<double, 10>;
    const double S = p.scale;
    const double s_area = sphere_area(p.dimension);
    const int n = p.dimension;
    double total = 0;
    for (const auto& piece : p.pieces) {
        if (piece.r1 <= piece.r0) continue;
        auto at_x = [&](double x) {
            const ProfilePoint pt = point_at(p, piece, x);
            return integrand(pt) * s_area * std::pow(pt.r, n - 1) * S;
        };
        if (piece.log_graded && piece.r0 > 0) {
            // x = exp(-sigma)
            const double s0 = -std::log(piece.r1);
            const double s1 = -std::log(piece.r0);
            const int panels = std::max(16, static_cast<int>(std::ceil((s1 - s0) / 0.25)));
            const double w = (s1 - s0) / panels;
            for (int k = 0; k < panels; ++k) {
                const double a = s0 + k * w;
                total += quad::integrate(
                    [&](double sg) {
                        const double x = std::exp(-sg);
                        return at_x(x) * x;
                    },
                    a, a + w);
            }
        } else {
            const int panels = 16;
            const double w = (piece.r1 - piece.r0) / panels;
            for (int k = 0; k < panels; ++k) {
                const double a = piece.r0 + k * w;
                total += quad::integrate(at_x, a, a + w);
            }
        }
    }
    return total;
}

ProfileNorms profile_norms(const RadialProfile& p) {
    ProfileNorms out;
    out.l2_sq = profile_integral(p, [](const ProfilePoint& q) { return q.u * q.u; });
    if (p.dimension == 4)
        out.lap_l2_sq = profile_integral(p, [](const ProfilePoint& q) { return q.lap * q.lap; });
    else
        out.lap_l2_sq = profile_integral(p, [](const ProfilePoint& q) { return q.du * q.du; });
    return out;
}

RadialField sample_profile(const RadialProfile& p, GridPtr grid) {
    return sample(std::move(grid), [&p](double r) { return p.value(r); });
}

GeneratedField plateau_field(const MoserParams& params, GridPtr grid) {
    if (grid->dimension != 4) throw config_error("plateau family is defined on R^4");
    if (params.S_k * (params.R_k + 2.0) > grid->r_max) throw config_error("plateau exceeds the domain");
    MoserParams snapped = params;
    const double target = params.S_k * params.R_k;
    const double node = std::round(target / grid->h) * grid->h;
    snapped.R_k = std::max(node, grid->h) / params.S_k;
    if (params.S_k * (snapped.R_k + 2.0) > grid->r_max) throw config_error("plateau exceeds the domain");
    GeneratedField out{sample_profile(plateau_profile(snapped), grid), params.S_k * (snapped.R_k - params.R_k),
                       snapped};
    return out;
}

GeneratedField moser_field(const MoserParams& params, GridPtr grid) {
    if (grid->dimension != 4) throw config_error("Moser family is defined on R^4");
    const double rho = std::pow(params.R_k, 0.25) * params.S_k;
    if (rho / grid->h < 8.0)
        throw config_error("under-resolved concentration region: R_k^{1/4} covers " + std::to_string(rho / grid->h) +
                           " cells, need at least 8");
    if (params.b_k + 2.0 * params.K / params.b_k > 18.0) throw config_error("Moser height beyond overflow-safe range");
    if (2.0 * params.S_k > grid->r_max) throw config_error("Moser support exceeds the domain");
    // report how far the concentration radius sits from the nearest node
    const double node = std::round(rho / grid->h) * grid->h;
    GeneratedField out{sample_profile(moser_profile(params), grid), node - rho, params};
    return out;
}

RadialField dilate(const RadialField& u, double S) {
    if (!(S > 0)) throw config_error("dilation factor must be positive");
    const RadialGrid& g = *u.grid;
    const int n = g.n_points;
    const Vec& y = u.values;
    const double scale = std::max(1e-300, y.cwiseAbs().maxCoeff());
    // values that would be pushed beyond r_max must be negligible
    for (int i = 0; i < n; ++i)
        if (g.nodes[i] * S > g.r_max * (1 + 1e-12) && std::abs(y[i]) > 1e-10 * scale)
            throw config_error("dilated support escapes the domain");

    // Fritsch-Carlson slopes
    Vec delta(n - 1), m(n);
    for (int i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / g.h;
    m[0] = 0.0;  // even profile
    m[n - 1] = delta[n - 2];
    for (int i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0) m[i] = 0.0;
        else m[i] = 2.0 / (1.0 / delta[i - 1] + 1.0 / delta[i]);
    }
    Vec out(n);
    for (int i = 0; i < n; ++i) {
        const double x = g.nodes[i] / S;
        if (x >= g.r_max) {
            out[i] = x == g.r_max ? y[n - 1] : 0.0;
            continue;
        }
        const double pos = x / g.h;
        int k = static_cast<int>(std::floor(pos));
        k = std::clamp(k, 0, n - 2);
        const double t = pos - k;
        if (t == 0.0) {
            out[i] = y[k];
            continue;
        }
        const double t2 = t * t, t3 = t2 * t;
        out[i] = (2 * t3 - 3 * t2 + 1) * y[k] + (t3 - 2 * t2 + t) * g.h * m[k] + (-2 * t3 + 3 * t2) * y[k + 1] +
                 (t3 - t2) * g.h * m[k + 1];
    }
    return RadialField(u.grid, out);
}

std::string to_string(WitnessMode m) {
    switch (m) {
        case WitnessMode::unbounded_origin: return "unbounded_origin";
        case WitnessMode::noncompact_origin: return "noncompact_origin";
        case WitnessMode::unbounded_infinity: return "unbounded_infinity";
        case WitnessMode::noncompact_infinity: return "noncompact_infinity";
    }
    return "?";
}

WitnessMode witness_mode_from_string(const std::string& s) {
    for (auto m : {WitnessMode::unbounded_origin, WitnessMode::noncompact_origin, WitnessMode::unbounded_infinity,
                   WitnessMode::noncompact_infinity})
        if (to_string(m) == s) return m;
    throw config_error("unknown witness mode '" + s + "'");
}

WitnessReport necessity_witness(const ProblemConfig& config, WitnessMode mode, const std::function<double(double)>& g,
                                double K) {
    if (!(K > 0)) throw config_error("K must be positive");
    if (config.dimension != 4) throw config_error("necessity witnesses are built in R^4");

    const bool origin = mode == WitnessMode::unbounded_origin || mode == WitnessMode::noncompact_origin;
    GrowthClassification cls = classify_growth(g, K, default_probes(g, K));
    const double q = origin ? cls.limsup_origin : cls.limsup_infinity;
    bool applicable = false;
    switch (mode) {
        case WitnessMode::unbounded_origin:
        case WitnessMode::unbounded_infinity: applicable = std::isinf(q); break;
        case WitnessMode::noncompact_origin:
        case WitnessMode::noncompact_infinity: applicable = std::isfinite(q) && q > 1e-12; break;
    }
    if (!applicable)
        throw config_error("witness inapplicable: g does not violate the condition targeted by " + to_string(mode));

    WitnessReport rep;
    rep.mode = mode;
    rep.K = K;
    const std::vector<int> ks = {2, 4, 8};
    for (int k : ks) {
        WitnessRow row;
        row.k = k;
        RadialProfile prof;
        if (origin) {
            const double a = 1.0 / k;
            double R;
            if (mode == WitnessMode::unbounded_origin) {
                row.c_k = g(a) / (a * a);
                R = std::pow(a, -0.25) + std::pow(a, -0.5) * std::pow(row.c_k, -0.125);
            } else {
                row.c_k = g(a) / (a * a);
                R = std::pow(a, -0.5);
            }
            row.a_k = a;
            row.R_k = R;
            prof = plateau_profile(MoserParams::plateau(a, R));
        } else {
            const double b = 2.0 + 0.5 * static_cast<double>(rep.rows.size());
            const double Rk = std::exp(-b * b / K);
            row.b_k = b;
            row.R_k = Rk;
            row.c_k = b * b * Rk * g(b);
            const double S4 = mode == WitnessMode::unbounded_infinity ? b * b / std::sqrt(row.c_k) : b * b;
            row.S_k = std::pow(S4, 0.25);
            prof = moser_profile(MoserParams::moser(b, K, row.S_k));
        }
        row.l2_sq = profile_integral(prof, [](const ProfilePoint& p) { return p.u * p.u; });
        row.lap_l2_sq = profile_integral(prof, [](const ProfilePoint& p) { return p.lap * p.lap; });
        row.G = profile_integral(prof, [&g](const ProfilePoint& p) { return g(p.u); });
        row.ratio = row.G / row.l2_sq;
        rep.rows.push_back(row);

        // nodal sample on a grid that covers the support and resolves the core
        const double support = prof.support();
        const double core = origin ? prof.support() : std::pow(row.R_k, 0.25) * row.S_k;
        const double h_need = std::min(core / 8.0, support / 512.0);
        int npts = static_cast<int>(std::ceil(1.05 * support / h_need)) + 1;
        npts = std::clamp(npts, 1024, 1 << 16);
        rep.fields.push_back(sample_profile(prof, build_grid(1.05 * support, npts, 4)));
    }

    const auto& r = rep.rows;
    switch (mode) {
        case WitnessMode::unbounded_origin:
        case WitnessMode::unbounded_infinity:
            rep.pattern = "l2 decreasing while G/l2 increasing";
            rep.pattern_holds = r[0].l2_sq > r[1].l2_sq && r[1].l2_sq > r[2].l2_sq && r[0].ratio < r[1].ratio &&
                                r[1].ratio < r[2].ratio;
            break;
        case WitnessMode::noncompact_origin:
            rep.pattern = "lap decreasing while G stays bounded below";
            rep.pattern_holds = r[0].lap_l2_sq > r[1].lap_l2_sq && r[1].lap_l2_sq > r[2].lap_l2_sq &&
                                std::min({r[0].G, r[1].G, r[2].G}) > 0.25 * r[0].G;
            break;
        case WitnessMode::noncompact_infinity: {
            const double budget = 32.0 * pi * pi * K;
            bool ok = true;
            for (const auto& row : r) ok = ok && row.lap_l2_sq < 2.0 * budget && row.G > 0.25 * r[0].G;
            rep.pattern = "lap near 32 pi^2 K while G stays bounded below";
            rep.pattern_holds = ok;
            break;
        }
    }
    return rep;
}

}  // namespace biharm
