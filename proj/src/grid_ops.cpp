#include "biharm/grid_ops.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

constexpr double pi = std::numbers::pi;

// 5-point stencils, offsets -2..2
constexpr double d2_coef[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};  // / 12h^2
constexpr double d1_coef[5] = {1.0, -8.0, 0.0, 8.0, -1.0};      // / 12h

// even reflection at the origin, zero ghosts beyond r_max
void add_entry(std::vector<Eigen::Triplet<double>>& t, int n, int i, int j, double v) {
    if (j < 0) j = -j;
    if (j >= n) return;
    t.emplace_back(i, j, v);
}

SpMat build_laplacian(const RadialGrid& g) {
    const int n = g.n_points;
    const double h = g.h;
    const double dim = g.dimension;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n) * 10);
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            // Delta u(0) = n u''(0)
            for (int k = -2; k <= 2; ++k)
                add_entry(t, n, 0, k, dim * d2_coef[k + 2] / (12.0 * h * h));
            continue;
        }
        const double r = g.nodes[i];
        for (int k = -2; k <= 2; ++k) {
            double v = d2_coef[k + 2] / (12.0 * h * h) + (dim - 1.0) / r * d1_coef[k + 2] / (12.0 * h);
            if (v != 0.0) add_entry(t, n, i, i + k, v);
        }
    }
    SpMat L(n, n);
    L.setFromTriplets(t.begin(), t.end());
    L.makeCompressed();
    return L;
}

SpMat build_stiffness(const RadialGrid& g) {
    const int n = g.n_points;
    if (g.dimension == 4) {
        SpMat W(n, n);
        W.reserve(Eigen::VectorXi::Constant(n, 1));
        for (int i = 0; i < n; ++i) W.insert(i, i) = g.weights[i];
        SpMat Q = SpMat(g.lap.transpose()) * W * g.lap;
        Q.makeCompressed();
        return Q;
    }
    // staggered differences (u_{i+1}-u_i)/h at r_{i+1/2}; u_n = 0
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n) * 3);
    for (int i = 0; i < n; ++i) {
        const double rm = (i + 0.5) * g.h;
        const double c = sphere_area(2) * rm / g.h;  // s r_{i+1/2} h / h^2
        t.emplace_back(i, i, c);
        if (i + 1 < n) {
            t.emplace_back(i + 1, i + 1, c);
            t.emplace_back(i, i + 1, -c);
            t.emplace_back(i + 1, i, -c);
        }
    }
    SpMat Q(n, n);
    Q.setFromTriplets(t.begin(), t.end());
    Q.makeCompressed();
    return Q;
}

}  // namespace

RadialField::RadialField(GridPtr g, Vec v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw config_error("field without grid");
    if (values.size() != grid->n_points)
        throw config_error("field length " + std::to_string(values.size()) + " does not match grid size " +
                           std::to_string(grid->n_points));
    require_finite(values, "field");
}

void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw error(std::string(what) + " contains non-finite values");
}

double sphere_area(int dimension) {
    if (dimension == 2) return 2.0 * pi;
    if (dimension == 4) return 2.0 * pi * pi;
    throw config_error("dimension must be 2 or 4");
}

double ball_volume(double radius, int dimension) {
    if (dimension == 2) return pi * radius * radius;
    if (dimension == 4) {
        const double r2 = radius * radius;
        return 0.5 * pi * pi * r2 * r2;
    }
    throw config_error("dimension must be 2 or 4");
}

GridPtr build_grid(double r_max, int n_points, int dimension) {
    if (dimension != 2 && dimension != 4) throw config_error("invalid dimension " + std::to_string(dimension));
    if (!(r_max > 0) || !std::isfinite(r_max)) throw config_error("r_max must be positive");
    if (n_points < 16) throw config_error("n_points must be at least 16");

    auto g = std::make_shared<RadialGrid>();
    g->r_max = r_max;
    g->n_points = n_points;
    g->dimension = dimension;
    g->h = r_max / (n_points - 1);
    g->nodes.resize(n_points);
    g->weights.resize(n_points);
    g->cell_volume.resize(n_points);
    const double s = sphere_area(dimension);
    for (int i = 0; i < n_points; ++i) {
        const double r = i * g->h;
        g->nodes[i] = r;
        double w = s * std::pow(r, dimension - 1) * g->h;
        if (i == 0 || i == n_points - 1) w *= 0.5;
        g->weights[i] = w;
        const double lo = i == 0 ? 0.0 : r - 0.5 * g->h;
        const double hi = i == n_points - 1 ? r : r + 0.5 * g->h;
        g->cell_volume[i] = ball_volume(hi, dimension) - ball_volume(lo, dimension);
    }
    g->nodes[n_points - 1] = r_max;
    g->lap = build_laplacian(*g);
    g->stiffness = build_stiffness(*g);
    return g;
}

GridPtr scaled_grid(const RadialGrid& g, double s) {
    if (!(s > 0)) throw config_error("grid scale must be positive");
    return build_grid(g.r_max * s, g.n_points, g.dimension);
}

RadialField sample(GridPtr g, const std::function<double(double)>& fn) {
    Vec v(g->n_points);
    for (int i = 0; i < g->n_points; ++i) v[i] = fn(g->nodes[i]);
    return RadialField(std::move(g), std::move(v));
}

double integrate(const RadialGrid& g, const Vec& v) { return g.weights.dot(v); }

double integrate(const RadialField& field) { return integrate(*field.grid, field.values); }

RadialField radial_laplacian(const RadialField& field) {
    if (field.grid->n_points < 3) throw config_error("grid too small for the Laplacian");
    return RadialField(field.grid, field.grid->lap * field.values);
}

RadialField bilaplacian(const RadialField& field) {
    if (field.grid->n_points < 5) throw config_error("grid too small for the bilaplacian");
    const SpMat& L = field.grid->lap;
    Vec lu = L * field.values;
    return RadialField(field.grid, L * lu);
}

HNorms h_norms(const RadialField& field) {
    const RadialGrid& g = *field.grid;
    HNorms out;
    out.l2_sq = integrate(g, field.values.cwiseAbs2());
    Vec lu = g.lap * field.values;
    out.lap_l2_sq = integrate(g, lu.cwiseAbs2());
    return out;
}

// sums of squares, so the form carries no cancellation error from Q's large entries
double principal_form(const RadialGrid& g, const Vec& u) {
    if (g.dimension == 4) {
        const Vec lu = g.lap * u;
        return g.weights.dot(lu.cwiseAbs2());
    }
    const int n = g.n_points;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        const double next = i + 1 < n ? u[i + 1] : 0.0;
        const double c = sphere_area(2) * (i + 0.5) * g.h / g.h;
        acc += c * (next - u[i]) * (next - u[i]);
    }
    return acc;
}

Vec radial_derivative(const RadialGrid& g, const Vec& u) {
    const int n = g.n_points;
    Vec d = Vec::Zero(n);
    for (int i = 1; i < n; ++i) {
        double acc = 0;
        for (int k = -2; k <= 2; ++k) {
            int j = i + k;
            if (j < 0) j = -j;
            if (j >= n) continue;
            acc += d1_coef[k + 2] * u[j];
        }
        d[i] = acc / (12.0 * g.h);
    }
    return d;
}

Vec dilation_generator(const RadialGrid& g, const Vec& u) {
    Vec d = radial_derivative(g, u);
    return -(g.nodes.array() * d.array()).matrix();
}

}  // namespace biharm
