#pragma once

#include <functional>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace biharm {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Uniform radial mesh on [0, r_max] with trapezoid weights that absorb the
// surface measure, so that w.dot(v) approximates an integral over R^n.
struct RadialGrid {
    double r_max = 0;
    int n_points = 0;
    int dimension = 0;
    double h = 0;
    Vec nodes;
    Vec weights;
    Vec cell_volume;  // exact volume of the shell [r_{i-1/2}, r_{i+1/2}]
    SpMat lap;        // 4th-order radial Laplacian
    SpMat stiffness;  // quadratic form of the principal part: sum w (Lu)^2 or int |grad u|^2
};

using GridPtr = std::shared_ptr<const RadialGrid>;

struct RadialField {
    GridPtr grid;
    Vec values;

    RadialField() = default;
    RadialField(GridPtr g, Vec v);

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[i]; }
};

double sphere_area(int dimension);                  // s_{n-1}
double ball_volume(double radius, int dimension);   // |B_radius|

GridPtr build_grid(double r_max, int n_points, int dimension);
GridPtr scaled_grid(const RadialGrid& g, double s);  // same N, r_max -> s r_max

RadialField sample(GridPtr g, const std::function<double(double)>& fn);

double integrate(const RadialField& field);
double integrate(const RadialGrid& g, const Vec& v);

RadialField radial_laplacian(const RadialField& field);
RadialField bilaplacian(const RadialField& field);

struct HNorms {
    double l2_sq = 0;
    double lap_l2_sq = 0;
};
HNorms h_norms(const RadialField& field);

// principal quadratic form u^T Q u used by the energies
double principal_form(const RadialGrid& g, const Vec& u);

// -r u'(r) with 4th-order differences, generator of u -> u(x/s) at s=1
Vec dilation_generator(const RadialGrid& g, const Vec& u);

// first derivative with the same conventions as the Laplacian
Vec radial_derivative(const RadialGrid& g, const Vec& u);

void require_finite(const Vec& v, const char* what);

}  // namespace biharm
